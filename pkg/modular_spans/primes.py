import logging
import random
from functools import lru_cache
from typing import List, Tuple

import sympy

from modular_spans.errors import ConfigError

logger = logging.getLogger("modular_spans.primes")


def check_odd_prime(p: int) -> int:
    if not isinstance(p, int) or isinstance(p, bool):
        raise ConfigError(f"p must be an integer, got {p!r}")
    if p < 3 or not sympy.isprime(p):
        raise ConfigError(f"p must be an odd prime, got {p}")
    return p


@lru_cache(maxsize=64)
def choose_primes(count: int, bits: int, seed: int) -> Tuple[int, ...]:
    """Draw `count` distinct primes of exactly `bits` bits.

    The draw depends only on (count, bits, seed), so certificates are
    reproducible across runs and machines.
    """
    if bits < 8:
        raise ConfigError(f"prime size must be at least 8 bits, got {bits}")
    rng = random.Random(f"{seed}:{bits}")
    low = 1 << (bits - 1)
    high = (1 << bits) - 1
    primes: List[int] = []
    while len(primes) < count:
        q = int(sympy.nextprime(rng.randint(low, high - 1)))
        if q > high or q in primes:
            continue
        primes.append(q)
    logger.debug(f"Chose primes {primes} (bits={bits}, seed={seed})")
    return tuple(primes)
