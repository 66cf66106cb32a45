import logging
from collections import Counter
from math import gcd
from typing import Dict, FrozenSet, List, Tuple

import attr

from modular_spans.constants import LEVEL_FOUR
from modular_spans.errors import ConfigError, InvariantError
from modular_spans.primes import check_odd_prime

logger = logging.getLogger("modular_spans.cusps")

RELATION_SIM = "sim"
RELATION_APPROX = "approx"
RELATIONS = (RELATION_SIM, RELATION_APPROX)

Pair = Tuple[int, int]


@attr.s(auto_attribs=True, frozen=True)
class CuspVector:
    """A cusp a/c as the primitive vector (a, c), read mod `modulus`."""

    a: int
    c: int
    modulus: int

    def __attrs_post_init__(self) -> None:
        # some lift of (a, c) is coprime exactly when gcd(a, c, N) = 1
        if gcd(gcd(self.a, self.c), self.modulus) != 1:
            raise ConfigError(
                f"({self.a}, {self.c}) is not primitive mod {self.modulus}"
            )

    def residues(self) -> Pair:
        return (self.a % self.modulus, self.c % self.modulus)

    def canonical(self) -> Pair:
        """Smaller of the two sign choices, as residues in [0, modulus)."""
        n = self.modulus
        return min(self.residues(), ((-self.a) % n, (-self.c) % n))


@attr.s(auto_attribs=True, frozen=True)
class CuspClassTable:
    p: int
    relation: str
    classes: Tuple[Tuple[Pair, ...], ...]

    @property
    def count(self) -> int:
        return len(self.classes)

    @property
    def representatives(self) -> List[Pair]:
        return [members[0] for members in self.classes]

    def class_index(self) -> Dict[Pair, int]:
        return {pair: i for i, members in enumerate(self.classes) for pair in members}


def primitive_pairs(p: int) -> List[Pair]:
    n = LEVEL_FOUR * p
    return [(a, c) for a in range(n) for c in range(n) if gcd(gcd(a, c), n) == 1]


def multipliers(p: int, relation: str) -> List[int]:
    """Scalars mu acting on cusp vectors mod 4p for the given relation."""
    n = LEVEL_FOUR * p
    units = [mu for mu in range(1, n) if gcd(mu, n) == 1]
    if relation == RELATION_SIM:
        return units
    if relation == RELATION_APPROX:
        # mu = +-1 (mod 4) always; also require mu = +-1 (mod p)
        return [mu for mu in units if mu % p in (1, p - 1)]
    raise ConfigError(f"unknown cusp relation {relation!r}")


def expected_class_count(p: int, relation: str) -> int:
    if relation == RELATION_SIM:
        return 6 * (p + 1)
    return 3 * (p * p - 1)


def cusp_classes(p: int, relation: str) -> CuspClassTable:
    check_odd_prime(p)
    n = LEVEL_FOUR * p
    scalars = multipliers(p, relation)
    seen: set = set()
    classes: List[Tuple[Pair, ...]] = []
    for pair in primitive_pairs(p):
        if pair in seen:
            continue
        orbit = sorted({((mu * pair[0]) % n, (mu * pair[1]) % n) for mu in scalars})
        seen.update(orbit)
        classes.append(tuple(orbit))
    classes.sort()
    table = CuspClassTable(p, relation, tuple(classes))
    expected = expected_class_count(p, relation)
    if table.count != expected:
        raise InvariantError(
            f"p={p}: {table.count} {relation} classes, expected {expected}"
        )
    logger.debug(f"p={p}: {table.count} cusp classes under {relation}")
    return table


def identified_at_level4(v: CuspVector, w: CuspVector) -> bool:
    """Cusps with the same image on X(4): (a', c') = +-(a, c) mod 4."""
    a, c = v.a % LEVEL_FOUR, v.c % LEVEL_FOUR
    a2, c2 = w.a % LEVEL_FOUR, w.c % LEVEL_FOUR
    return (a2, c2) == (a, c) or (a2, c2) == ((-a) % LEVEL_FOUR, (-c) % LEVEL_FOUR)


def refinement_multiplicities(p: int) -> Dict[Pair, int]:
    """Number of approx classes inside each sim class, keyed by the sim
    representative. Raises if some approx class straddles two sim classes."""
    coarse = cusp_classes(p, RELATION_SIM)
    fine = cusp_classes(p, RELATION_APPROX)
    coarse_index = coarse.class_index()
    counts: Counter = Counter()
    for members in fine.classes:
        owners: FrozenSet[int] = frozenset(coarse_index[pair] for pair in members)
        if len(owners) != 1:
            raise InvariantError(f"p={p}: approx class {members[0]} is not refined")
        counts[next(iter(owners))] += 1
    multiplicity = {coarse.classes[i][0]: counts[i] for i in range(coarse.count)}
    distinct = set(multiplicity.values())
    if len(distinct) != 1:
        logger.warning(f"p={p}: refinement multiplicities vary: {sorted(distinct)}")
    return multiplicity
