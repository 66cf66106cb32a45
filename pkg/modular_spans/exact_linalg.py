import logging
from fractions import Fraction
from math import gcd, lcm
from typing import List, Optional, Sequence, Tuple

import attr
import numpy as np
import sympy

from modular_spans.constants import (
    CERT_BAREISS,
    CERT_MODULAR2,
    CERT_MODULARN,
    CERT_POLICIES,
    DEFAULT_MAX_PRIMES,
    DEFAULT_MODULARN_AGREEMENT,
    DEFAULT_PRIME_BITS,
    DEFAULT_SEED,
    INT64_PRIME_BITS,
)
from modular_spans.errors import CertificationError, ConfigError
from modular_spans.primes import choose_primes

logger = logging.getLogger("modular_spans.exact_linalg")

# Dense 2-D array of exact integers: int64 when every entry fits, else object
IntMatrix = np.ndarray

METHOD_MODULAR = "modular-agreed"
METHOD_FRACTION_FREE = "fraction-free"


def as_int_matrix(
    rows: Sequence[Sequence[int]], cols: Optional[int] = None
) -> IntMatrix:
    rows = [[int(x) for x in row] for row in rows]
    if cols is None:
        cols = len(rows[0]) if rows else 0
    if any(len(row) != cols for row in rows):
        raise ConfigError("ragged integer matrix")
    m = np.array(rows, dtype=object).reshape(len(rows), cols)
    if m.size and int(np.abs(m).max()) < (1 << 62):
        return m.astype(np.int64)
    return m


@attr.s(auto_attribs=True, frozen=True)
class CertPolicy:
    name: str = CERT_MODULAR2
    prime_bits: int = DEFAULT_PRIME_BITS
    seed: int = DEFAULT_SEED
    agreement: int = DEFAULT_MODULARN_AGREEMENT
    max_primes: int = DEFAULT_MAX_PRIMES

    def __attrs_post_init__(self) -> None:
        if self.name not in CERT_POLICIES:
            raise ConfigError(f"unknown certification policy {self.name!r}")
        if self.required_agreement() > self.max_primes:
            raise ConfigError(
                f"{self.max_primes} primes cannot reach agreement of "
                f"{self.required_agreement()}"
            )

    def required_agreement(self) -> int:
        if self.name == CERT_MODULARN:
            return self.agreement
        return 2

    def cache_key(self) -> str:
        """Identifies the policy in cache headers; bareiss ignores primes."""
        if self.name == CERT_BAREISS:
            return self.name
        return (
            f"{self.name}:bits={self.prime_bits}:seed={self.seed}"
            f":agree={self.required_agreement()}:max={self.max_primes}"
        )


@attr.s(auto_attribs=True, frozen=True)
class RankCertificate:
    rank: int
    method: str
    pivot_columns: Tuple[int, ...]
    primes: Tuple[int, ...] = ()

    def __attrs_post_init__(self) -> None:
        if len(self.pivot_columns) != self.rank:
            raise CertificationError(
                f"rank {self.rank} with {len(self.pivot_columns)} pivots"
            )

    def describe(self) -> str:
        if self.method == METHOD_MODULAR:
            return f"{METHOD_MODULAR}[{','.join(str(q) for q in self.primes)}]"
        return self.method


def _check_prime(q: int) -> None:
    if q < 2 or not sympy.isprime(q):
        raise ConfigError(f"modulus {q} is not prime")


def _reduce(m: IntMatrix, q: int) -> np.ndarray:
    if q.bit_length() <= INT64_PRIME_BITS:
        if m.dtype == np.int64:
            return m % q
        return (m % q).astype(np.int64)
    return m.astype(object) % q


def _rref_mod_prime(a: np.ndarray, q: int) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form over GF(q), pivoting on the leftmost
    column and then the topmost row. `a` must already be reduced mod q."""
    a = a.copy()
    rows, cols = a.shape
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        below = np.flatnonzero(a[r:, c])
        if below.size == 0:
            continue
        pivot_row = r + int(below[0])
        if pivot_row != r:
            a[[r, pivot_row]] = a[[pivot_row, r]]
        inv = pow(int(a[r, c]), -1, q)
        a[r, c:] = (a[r, c:] * inv) % q
        column = a[:, c].copy()
        column[r] = 0
        hit = np.flatnonzero(column)
        if hit.size:
            a[hit, c:] = (a[hit, c:] - np.outer(column[hit], a[r, c:])) % q
        pivots.append(c)
        r += 1
    return a, pivots


def rank_mod_prime(m: IntMatrix, q: int) -> Tuple[int, Tuple[int, ...]]:
    _check_prime(q)
    if m.size == 0:
        return 0, ()
    _, pivots = _rref_mod_prime(_reduce(m, q), q)
    return len(pivots), tuple(pivots)


def kernel_mod_prime(m: IntMatrix, q: int) -> List[List[int]]:
    """Basis of the right null space of m over GF(q), one vector per
    non-pivot column, entries in [0, q)."""
    _check_prime(q)
    cols = m.shape[1]
    if m.shape[0] == 0:
        return [[int(i == j) for i in range(cols)] for j in range(cols)]
    reduced, pivots = _rref_mod_prime(_reduce(m, q), q)
    pivot_set = set(pivots)
    basis: List[List[int]] = []
    for free in range(cols):
        if free in pivot_set:
            continue
        vector = [0] * cols
        vector[free] = 1
        for row, pivot in enumerate(pivots):
            vector[pivot] = (-int(reduced[row, free])) % q
        basis.append(vector)
    return basis


def rank_bareiss(m: IntMatrix) -> Tuple[int, Tuple[int, ...]]:
    """Fraction-free elimination over Z with the same pivoting rule as
    rank_mod_prime. Every division below is exact."""
    a = [[int(x) for x in row] for row in m.tolist()]
    rows = len(a)
    cols = m.shape[1]
    previous = 1
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot_row = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if pivot_row is None:
            continue
        if pivot_row != r:
            a[r], a[pivot_row] = a[pivot_row], a[r]
        top = a[r]
        pivot = top[c]
        for i in range(r + 1, rows):
            row = a[i]
            factor = row[c]
            for j in range(c + 1, cols):
                row[j] = (pivot * row[j] - factor * top[j]) // previous
            row[c] = 0
        previous = pivot
        pivots.append(c)
        r += 1
    return len(pivots), tuple(pivots)


def kernel_exact(m: IntMatrix) -> List[List[int]]:
    """Primitive integer basis of the rational right null space of m."""
    cols = m.shape[1]
    a = [[Fraction(int(x)) for x in row] for row in m.tolist()]
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == len(a):
            break
        pivot_row = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if pivot_row is None:
            continue
        a[r], a[pivot_row] = a[pivot_row], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                factor = a[i][c]
                a[i] = [x - factor * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    pivot_set = set(pivots)
    basis: List[List[int]] = []
    for free in range(cols):
        if free in pivot_set:
            continue
        vector = [Fraction(0)] * cols
        vector[free] = Fraction(1)
        for row, pivot in enumerate(pivots):
            vector[pivot] = -a[row][free]
        scale = lcm(*(x.denominator for x in vector))
        integral = [int(x * scale) for x in vector]
        common = 0
        for x in integral:
            common = gcd(common, x)
        basis.append([x // common for x in integral])
    return basis


def rank_exact(m: IntMatrix, policy: Optional[CertPolicy] = None) -> RankCertificate:
    policy = policy or CertPolicy()
    if policy.name == CERT_BAREISS:
        rank, pivots = rank_bareiss(m)
        return RankCertificate(rank, METHOD_FRACTION_FREE, pivots)

    needed = policy.required_agreement()
    primes = choose_primes(policy.max_primes, policy.prime_bits, policy.seed)
    results: List[Tuple[int, int, Tuple[int, ...]]] = []
    for q in primes:
        rank, pivots = rank_mod_prime(m, q)
        results.append((q, rank, pivots))
        best_rank = max(r for _, r, _ in results)
        best_pivots = min(pv for _, r, pv in results if r == best_rank)
        agreeing = tuple(
            prime
            for prime, r, pv in results
            if r == best_rank and pv == best_pivots
        )
        if len(agreeing) >= needed:
            return RankCertificate(best_rank, METHOD_MODULAR, best_pivots, agreeing)
        if len(results) >= needed:
            logger.info(
                f"Primes {[r[0] for r in results]} disagree on a "
                f"{m.shape[0]}x{m.shape[1]} matrix, adding another"
            )
    raise CertificationError(
        f"no {needed} of {len(primes)} primes agreed on rank "
        f"({[(q, r) for q, r, _ in results]})"
    )


def stack_rows(rows: Sequence[np.ndarray], cols: int) -> IntMatrix:
    """Stack equal-length integer vectors into a matrix, one per row."""
    if not rows:
        return np.zeros((0, cols), dtype=np.int64)
    if all(row.dtype == np.int64 for row in rows):
        return np.vstack(rows).reshape(len(rows), cols)
    return np.vstack([row.astype(object) for row in rows]).reshape(len(rows), cols)


def summarize_certificates(certificates: Sequence[RankCertificate]) -> str:
    """One label for a batch of block certificates, e.g. for a report row."""
    labels = sorted({certificate.describe() for certificate in certificates})
    return ";".join(labels)
