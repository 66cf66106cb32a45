from typing import Dict, Tuple, Union

# Exponent grid: forms on Gamma(4p) are expanded in q^(1/4p)
LEVEL_FOUR = 4

# Weight-1 forms on Gamma(4), in generator order
FORM_M = "M"
FORM_N = "N"
FORM_P = "P"
FORMS = (FORM_M, FORM_N, FORM_P)
# residue mod 4 of the q^(1/4) exponents carried by each form
FORM_CLASS_MOD_4 = {FORM_M: 0, FORM_N: 1, FORM_P: 2}

# Pivoting: leftmost column, then smallest row index
PIVOT_RULE = "leftmost-topmost-v1"

# Certification policies
CERT_MODULAR2 = "modular2"
CERT_MODULARN = "modularN"
CERT_BAREISS = "bareiss"
CERT_POLICIES = (CERT_MODULAR2, CERT_MODULARN, CERT_BAREISS)
DEFAULT_PRIME_BITS = 31
INT64_PRIME_BITS = 31  # q < 2^31 keeps every product below 2^62
DEFAULT_MODULARN_AGREEMENT = 3
DEFAULT_MAX_PRIMES = 8
DEFAULT_SEED = 0

# Relations on blocks wider than this stay mod-q
DEFAULT_EXACT_RELATION_LIMIT = 200

# Output formats
FORMAT_JSON = "json"
FORMAT_CSV = "csv"
FORMAT_TABLE = "table"
OUTPUT_FORMATS = (FORMAT_JSON, FORMAT_CSV, FORMAT_TABLE)
REPORT_SCHEMA_VERSION = 1
UNSOUND_MARKER = "UNSOUND"

# Cache files
CACHE_MAGIC = b"MSPANS\x00\x01"
CACHE_FORMAT_VERSION = 2
CACHE_KIND_GENERATORS = 1
CACHE_KIND_SPAN = 2

# Environment overrides, e.g. MODULAR_SPANS_THREADS=4
ENV_PREFIX = "MODULAR_SPANS_"
ENV_LONG_TESTS = ENV_PREFIX + "LONG_TESTS"

# CLI exit codes
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_CONFIG = 2
EXIT_CERTIFICATION_FAILED = 3
EXIT_CACHE_CORRUPT = 4

# Largest k computed per p by `table1` unless --no-cap is given
DEFAULT_KMAX_CAP = {3: 4, 5: 4, 7: 4, 11: 3, 13: 3}
FALLBACK_KMAX_CAP = 2

PUBLISHED_MAX_WEIGHT = 4
# Published dim W_k for k = 1..PUBLISHED_MAX_WEIGHT. None: unknown; "star": asserted without computation
PUBLISHED_DIMS: Dict[int, Tuple[Union[int, str, None], ...]] = {
    3: (9, 33, 60, 84),
    5: (18, 115, 240, 360),
    7: (21, 189, 630, 984),
    11: (33, 499, 2532, 3852),
    13: (42, 842, 4200, 6384),
    17: (54, 1359, 9333, None),
    19: (57, 1624, 13260, "star"),
    23: (69, 2347, 23442, None),
}
# Published parenthesized bounds (k = 2..4)
PUBLISHED_BOUNDS: Dict[int, Tuple[int, ...]] = {
    3: (36, 60, 84),
    5: (120, 240, 360),
    7: (312, 648, 984),
    11: (1212, 2532, 3852),
    13: (2016, 4200, 6384),
    17: (4572, 9468, 14364),
    19: (6420, 13260, 20100),
    23: (11496, 23640, 35784),
}
