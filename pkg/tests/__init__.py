import io
import os
import random
from typing import Any, List, Optional, Sequence

from modular_spans import ModularSpans, cache
from modular_spans.constants import CACHE_KIND_SPAN, ENV_LONG_TESTS
from modular_spans.exact_linalg import CertPolicy
from modular_spans.series import QExpansion, subgrid_length

# Reason given to trial when a slow acceptance case is skipped
LONG_TEST_SKIP = f"slow; set {ENV_LONG_TESTS}=1 to run"


def long_tests_enabled() -> bool:
    return os.environ.get(ENV_LONG_TESTS, "") == "1"


def create_module(**options: Any) -> ModularSpans:
    """A pipeline built from explicit options only, ignoring the caller's
    MODULAR_SPANS_* environment."""
    config = ModularSpans.parse_config(options, environ={})
    return ModularSpans(config)


def random_expansion(
    rng: random.Random,
    grid_denominator: int,
    length: int,
    support_class: Optional[int] = None,
    magnitude: int = 5,
) -> QExpansion:
    if support_class is None:
        values: List[int] = [rng.randint(-magnitude, magnitude) for _ in range(length)]
        return QExpansion.from_coefficients(grid_denominator, values)
    count = subgrid_length(length, grid_denominator, support_class)
    values = [rng.randint(-magnitude, magnitude) for _ in range(count)]
    return QExpansion.on_class(grid_denominator, length, support_class, values)


def write_span_file(
    cache_dir: str, p: int, length: int, exponents: Sequence[Sequence[int]]
) -> str:
    """A span cache file holding the given exponent vectors verbatim, under
    the default certification policy, with every monomial in class 0."""
    k = sum(exponents[0])
    stream = io.BytesIO()
    cache._write_header(stream, CACHE_KIND_SPAN, p, length, CertPolicy())
    for value in (k, len(exponents[0]), len(exponents)):
        cache._write_int(stream, value)
    for vector in exponents:
        for e in vector:
            cache._write_int(stream, e)
    for value in (1, 0, len(exponents), len(exponents)):
        cache._write_int(stream, value)
    cache._write_str(stream, "test")
    path = cache.span_path(cache_dir, p, length, k)
    with open(path, "wb") as f:
        f.write(stream.getvalue())
    return path
