import logging
from typing import Optional, Sequence

import attr
import numpy as np

from modular_spans.errors import (
    ConfigError,
    InvariantError,
    SeriesMismatchError,
)
from modular_spans.primes import check_odd_prime

logger = logging.getLogger("modular_spans.series")

# entries below this magnitude are kept as int64
_INT64_SAFE = 1 << 62
_INT64_PRODUCT_LIMIT = 1 << 63


def truncation_bound(p: int, k: int) -> int:
    """Number of q^(1/4p) coefficients that determine a weight-k form on
    Gamma(4p).

    A nonzero form has k * [PSL2(Z) : Gamma(4p)] / 12 = 2kp(p^2 - 1) zeros,
    counted in the local parameter q^(1/4p) at infinity, so it cannot
    vanish at every index n <= 2kp(p^2 - 1).
    """
    check_odd_prime(p)
    if not isinstance(k, int) or k < 1:
        raise ConfigError(f"weight must be a positive integer, got {k!r}")
    return 2 * k * p * (p * p - 1) + 1


def subgrid_length(length: int, grid_denominator: int, b: int) -> int:
    """Count of indices 0 <= n < length with n = b (mod grid_denominator)."""
    if b >= length:
        return 0
    return (length - b + grid_denominator - 1) // grid_denominator


def _compact(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    if values.size == 0:
        return np.zeros(0, dtype=np.int64)
    if values.dtype == np.int64:
        return values
    biggest = int(np.abs(values.astype(object)).max())
    if biggest < _INT64_SAFE:
        return values.astype(np.int64)
    return values.astype(object)


def _convolve(a: np.ndarray, b: np.ndarray, count: int) -> np.ndarray:
    """First `count` entries of the Cauchy product of a and b."""
    a = a[:count]
    b = b[:count]
    if count <= 0 or a.size == 0 or b.size == 0:
        return np.zeros(max(count, 0), dtype=np.int64)
    if a.dtype == np.int64 and b.dtype == np.int64:
        bound = int(np.abs(a).max()) * int(np.abs(b).max()) * min(a.size, b.size)
        if bound < _INT64_PRODUCT_LIMIT:
            full = np.convolve(a, b)
        else:
            full = np.convolve(a.astype(object), b.astype(object))
    else:
        full = np.convolve(a.astype(object), b.astype(object))
    out = np.zeros(count, dtype=full.dtype)
    n = min(count, full.size)
    out[:n] = full[:n]
    return _compact(out)


@attr.s(auto_attribs=True, frozen=True, eq=False, repr=False)
class QExpansion:
    """A q-expansion sum_{0 <= n < length} a_n q^(n/grid_denominator).

    With `support_class` set, `values` holds only the coefficients at
    n = support_class, support_class + D, ... (D = grid_denominator);
    every other coefficient is zero. Otherwise `values` is dense.
    """

    grid_denominator: int
    length: int
    values: np.ndarray
    support_class: Optional[int] = None

    def __attrs_post_init__(self) -> None:
        if self.grid_denominator < 1 or self.length < 1:
            raise ConfigError(
                f"invalid grid 1/{self.grid_denominator} or length {self.length}"
            )
        expected = self.length
        if self.support_class is not None:
            if not 0 <= self.support_class < self.grid_denominator:
                raise InvariantError(f"support class {self.support_class} out of range")
            expected = subgrid_length(
                self.length, self.grid_denominator, self.support_class
            )
        if self.values.shape != (expected,):
            raise InvariantError(
                f"expected {expected} stored coefficients, got {self.values.shape}"
            )
        self.values.setflags(write=False)

    @classmethod
    def zero(cls, grid_denominator: int, length: int) -> "QExpansion":
        return cls(grid_denominator, length, np.zeros(length, dtype=np.int64))

    @classmethod
    def from_coefficients(
        cls,
        grid_denominator: int,
        coefficients: Sequence[int],
        support_class: Optional[int] = None,
    ) -> "QExpansion":
        full = _compact(np.array([int(c) for c in coefficients], dtype=object))
        length = len(full)
        if support_class is None:
            return cls(grid_denominator, length, full)
        outside = np.ones(length, dtype=bool)
        outside[support_class::grid_denominator] = False
        if np.any(full[outside] != 0):
            raise InvariantError(
                f"coefficients outside class {support_class} mod {grid_denominator}"
            )
        return cls(
            grid_denominator,
            length,
            full[support_class::grid_denominator].copy(),
            support_class,
        )

    @classmethod
    def on_class(
        cls,
        grid_denominator: int,
        length: int,
        support_class: int,
        values: Sequence[int],
    ) -> "QExpansion":
        return cls(
            grid_denominator,
            length,
            _compact(np.array([int(v) for v in values], dtype=object)),
            support_class,
        )

    @property
    def coefficients(self) -> np.ndarray:
        """All `length` coefficients, materialized."""
        if self.support_class is None:
            return self.values
        full = np.zeros(self.length, dtype=self.values.dtype)
        full[self.support_class :: self.grid_denominator] = self.values
        return full

    def __getitem__(self, n: int) -> int:
        if not 0 <= n < self.length:
            raise IndexError(n)
        if self.support_class is None:
            return int(self.values[n])
        if n % self.grid_denominator != self.support_class:
            return 0
        return int(self.values[n // self.grid_denominator])

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QExpansion):
            return NotImplemented
        return (
            self.grid_denominator == other.grid_denominator
            and self.length == other.length
            and bool(np.all(self.coefficients == other.coefficients))
        )

    def __hash__(self) -> int:
        return hash((self.grid_denominator, self.length))

    def __repr__(self) -> str:
        head = [int(c) for c in self.coefficients[:8]]
        return (
            f"QExpansion(1/{self.grid_denominator}, L={self.length}, "
            f"class={self.support_class}, head={head})"
        )

    def is_zero(self) -> bool:
        return not bool(np.any(self.values != 0))

    def valuation(self) -> Optional[int]:
        nz = np.flatnonzero(self.coefficients)
        if nz.size == 0:
            return None
        return int(nz[0])

    def truncate(self, length: int) -> "QExpansion":
        if not 1 <= length <= self.length:
            raise SeriesMismatchError(f"cannot truncate {self.length} to {length}")
        if self.support_class is None:
            return QExpansion(
                self.grid_denominator, length, self.values[:length].copy()
            )
        keep = subgrid_length(length, self.grid_denominator, self.support_class)
        return QExpansion(
            self.grid_denominator,
            length,
            self.values[:keep].copy(),
            self.support_class,
        )


def _check_compatible(a: QExpansion, b: QExpansion) -> None:
    if a.grid_denominator != b.grid_denominator:
        raise SeriesMismatchError(
            f"grid 1/{a.grid_denominator} does not match 1/{b.grid_denominator}"
        )
    if a.length != b.length:
        raise SeriesMismatchError(
            f"truncation {a.length} does not match {b.length}"
        )


def mul(a: QExpansion, b: QExpansion) -> QExpansion:
    _check_compatible(a, b)
    denominator = a.grid_denominator
    if a.support_class is None or b.support_class is None:
        full = _convolve(a.coefficients, b.coefficients, a.length)
        return QExpansion(denominator, a.length, full)

    carry, c = divmod(a.support_class + b.support_class, denominator)
    count = subgrid_length(a.length, denominator, c)
    values = np.zeros(count, dtype=np.int64)
    if count > carry:
        product = _convolve(a.values, b.values, count - carry)
        values = np.zeros(count, dtype=product.dtype)
        values[carry:] = product
    return QExpansion(denominator, a.length, values, c)


def add(a: QExpansion, b: QExpansion) -> QExpansion:
    _check_compatible(a, b)
    if a.support_class is not None and a.support_class == b.support_class:
        values = a.values.astype(object) + b.values.astype(object)
        return QExpansion(
            a.grid_denominator, a.length, _compact(values), a.support_class
        )
    values = a.coefficients.astype(object) + b.coefficients.astype(object)
    return QExpansion(a.grid_denominator, a.length, _compact(values))


def scale(c: int, a: QExpansion) -> QExpansion:
    values = _compact(a.values.astype(object) * int(c))
    return QExpansion(a.grid_denominator, a.length, values, a.support_class)


def one(grid_denominator: int, length: int) -> QExpansion:
    values = np.zeros(subgrid_length(length, grid_denominator, 0), dtype=np.int64)
    values[0] = 1
    return QExpansion(grid_denominator, length, values, 0)


def power(a: QExpansion, e: int) -> QExpansion:
    if e < 0:
        raise ConfigError(f"negative exponent {e}")
    result = one(a.grid_denominator, a.length)
    for _ in range(e):
        result = mul(result, a)
    return result
