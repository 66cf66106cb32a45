from math import isqrt
from typing import List

import numpy as np

from modular_spans.constants import (
    FORM_M,
    FORM_N,
    FORM_P,
    LEVEL_FOUR,
)
from modular_spans.errors import ConfigError
from modular_spans.series import QExpansion, mul, power

# Coefficients below are in the variable q^(1/4): theta(z) = sum q^(n^2) puts
# a 2 at index 4j^2, phi(z) = sum over odd k of q^(k^2/4) a 2 at index j^2.


def _check_count(count: int) -> None:
    if not isinstance(count, int) or count < 1:
        raise ConfigError(
            f"coefficient count must be a positive integer, got {count!r}"
        )


def theta_coefficients(count: int) -> List[int]:
    _check_count(count)
    c = [0] * count
    c[0] = 1
    for j in range(1, isqrt((count - 1) // 4) + 1):
        c[4 * j * j] = 2
    return c


def phi_coefficients(count: int) -> List[int]:
    _check_count(count)
    c = [0] * count
    for j in range(1, isqrt(count - 1) + 1, 2):
        c[j * j] = 2
    return c


def _product(a: List[int], b: List[int]) -> List[int]:
    count = len(a)
    full = np.convolve(np.array(a, dtype=object), np.array(b, dtype=object))
    return [int(x) for x in full[:count]]


def quarter_coefficients(form: str, count: int) -> List[int]:
    """q^(1/4) coefficients of M = theta^2, N = 2 theta phi or P = phi^2."""
    theta = theta_coefficients(count)
    phi = phi_coefficients(count)
    if form == FORM_M:
        return _product(theta, theta)
    if form == FORM_N:
        return [2 * x for x in _product(theta, phi)]
    if form == FORM_P:
        return _product(phi, phi)
    raise ConfigError(f"unknown weight-1 form {form!r}")


def gamma4_monomials(k: int, length: int) -> List[QExpansion]:
    """theta^(2k-j) phi^j for 0 <= j <= 2k, the weight-k forms on Gamma(4)."""
    if k < 0:
        raise ConfigError(f"weight must be non-negative, got {k}")
    theta = QExpansion.from_coefficients(LEVEL_FOUR, theta_coefficients(length), 0)
    # odd squares are 1 mod 8
    phi = QExpansion.from_coefficients(LEVEL_FOUR, phi_coefficients(length), 1)
    return [mul(power(theta, 2 * k - j), power(phi, j)) for j in range(2 * k + 1)]
