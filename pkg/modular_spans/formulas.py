from typing import List, Optional

import attr

from modular_spans.constants import PUBLISHED_BOUNDS, PUBLISHED_DIMS
from modular_spans.errors import ConfigError, InvariantError
from modular_spans.primes import check_odd_prime


def _check_weight(k: int, minimum: int) -> None:
    if not isinstance(k, int) or k < minimum:
        raise ConfigError(f"weight must be an integer >= {minimum}, got {k!r}")


def dim_Mk_gamma4(k: int) -> int:
    """M, N, P generate the graded ring on Gamma(4) subject only to
    N^2 = 4MP, so each weight has 2k + 1 monomials theta^(2k-j) phi^j."""
    _check_weight(k, 0)
    return 2 * k + 1


def dim_Mk_gammapm(p: int, k: int) -> int:
    """(p^2 - 1)((k - 1)p + 3/2); p^2 - 1 is divisible by 8 for odd p."""
    check_odd_prime(p)
    _check_weight(k, 2)
    twice = (p * p - 1) * (2 * (k - 1) * p + 3)
    if twice % 2:
        raise InvariantError(f"half-integral dimension at p={p}, k={k}")
    return twice // 2


def dim_Mk_gamma4p(p: int, k: int) -> int:
    return 2 * dim_Mk_gammapm(p, k)


def cusp_correction(p: int) -> int:
    """Dimensions lost to cusps identified by the map to projective space."""
    return 3 * (p + 1) * (p - 3)


def conjecture_bound(p: int, k: int) -> int:
    """Upper bound on dim W_k, computed both ways and cross-checked:
    (1/2) dim M_k(Gamma(4p)) - 3(p+1)(p-3) and
    (k-1)p^3 - 3p^2/2 + (7-k)p + 15/2."""
    from_dimension = dim_Mk_gammapm(p, k) - cusp_correction(p)
    twice = 2 * (k - 1) * p**3 - 3 * p * p + 2 * (7 - k) * p + 15
    if twice % 2:
        raise InvariantError(f"half-integral bound at p={p}, k={k}")
    if twice // 2 != from_dimension:
        raise InvariantError(
            f"bound formulas disagree at p={p}, k={k}: {twice // 2} != {from_dimension}"
        )
    return from_dimension


def spanning_set_size(p: int) -> int:
    return 3 * (p + 1)


@attr.s(auto_attribs=True, frozen=True)
class PublishedCell:
    p: int
    k: int
    dim: Optional[int]
    bound: Optional[int]
    # asserted equal to the bound without being computed
    starred: bool = False


def published_grid() -> List[PublishedCell]:
    """The published dim W_k grid for p <= 23 and k <= 4, row by row."""
    cells = []
    for p, dims in sorted(PUBLISHED_DIMS.items()):
        bounds: List[Optional[int]] = [None, *PUBLISHED_BOUNDS[p]]
        for k, (dim, bound) in enumerate(zip(dims, bounds), start=1):
            starred = dim == "star"
            value = bound if starred else dim
            assert value is None or isinstance(value, int)
            cells.append(PublishedCell(p, k, value, bound, starred))
    return cells


def published_dim(p: int, k: int) -> Optional[int]:
    """The published dim W_k when it was actually computed, else None."""
    for cell in published_grid():
        if (cell.p, cell.k) == (p, k):
            return None if cell.starred else cell.dim
    return None
