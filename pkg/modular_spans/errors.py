class ModularSpansError(Exception):
    """Base class for every error raised by modular_spans."""


class ConfigError(ModularSpansError):
    """An option is missing, malformed or inconsistent."""


class TruncationError(ModularSpansError):
    """A truncation length is too short to make q-expansions injective."""


class CertificationError(ModularSpansError):
    """Modular ranks never agreed within the prime budget."""


class CacheCorruptError(ModularSpansError):
    """A cache file failed its header, version or length checks."""


class InvariantError(ModularSpansError):
    """A mathematical invariant was violated; always a bug."""


class SeriesMismatchError(ModularSpansError, ValueError):
    """Two q-expansions on different grids or truncations were combined."""
