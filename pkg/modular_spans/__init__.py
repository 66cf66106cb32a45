import logging
import os
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import attr

from modular_spans import cache
from modular_spans.constants import (
    CERT_MODULAR2,
    CERT_POLICIES,
    DEFAULT_KMAX_CAP,
    DEFAULT_MAX_PRIMES,
    DEFAULT_MODULARN_AGREEMENT,
    DEFAULT_PRIME_BITS,
    DEFAULT_SEED,
    ENV_PREFIX,
    FALLBACK_KMAX_CAP,
    FORMAT_JSON,
    OUTPUT_FORMATS,
)
from modular_spans.cusps import RELATIONS, CuspClassTable, cusp_classes
from modular_spans.errors import ConfigError, TruncationError
from modular_spans.exact_linalg import CertPolicy
from modular_spans.generators import GeneratorSet, reduce_to_basis, spanning_set
from modular_spans.graded_span import SpanBasis, compute_spans
from modular_spans.primes import check_odd_prime
from modular_spans.report import DimensionReport, build_report
from modular_spans.series import truncation_bound
from modular_spans.verify import CheckResult, run_verification

logger = logging.getLogger("modular_spans")


def _positive(instance: Any, attribute: "attr.Attribute", value: int) -> None:
    if not isinstance(value, int) or value < 1:
        raise ConfigError(f"{attribute.name} must be a positive integer, got {value!r}")


def _one_of(choices: Tuple[str, ...]) -> Callable[[Any, "attr.Attribute", Any], None]:
    def check(instance: Any, attribute: "attr.Attribute", value: Any) -> None:
        if value not in choices:
            raise ConfigError(
                f"{attribute.name} must be one of {', '.join(choices)}, got {value!r}"
            )

    return check


def _primes(instance: Any, attribute: "attr.Attribute", value: Any) -> None:
    for p in (value,) if isinstance(value, int) else value or ():
        check_odd_prime(p)


@attr.s(auto_attribs=True, frozen=True)
class RunConfig:
    p: Optional[int] = attr.ib(default=None, validator=_primes)
    p_list: Tuple[int, ...] = attr.ib(default=(), converter=tuple, validator=_primes)
    k_max: int = attr.ib(default=1, validator=_positive)
    # truncation override; None means truncation_bound(p, k_max)
    length: Optional[int] = None
    allow_unsound: bool = False
    cert: str = attr.ib(default=CERT_MODULAR2, validator=_one_of(CERT_POLICIES))
    prime_bits: int = attr.ib(default=DEFAULT_PRIME_BITS, validator=_positive)
    agreement: int = attr.ib(default=DEFAULT_MODULARN_AGREEMENT, validator=_positive)
    max_primes: int = attr.ib(default=DEFAULT_MAX_PRIMES, validator=_positive)
    threads: int = attr.ib(default=1, validator=_positive)
    seed: int = DEFAULT_SEED
    cache_dir: Optional[str] = None
    output_format: str = attr.ib(default=FORMAT_JSON, validator=_one_of(OUTPUT_FORMATS))
    out: Optional[str] = None
    relation: Optional[str] = attr.ib(
        default=None, validator=attr.validators.optional(_one_of(RELATIONS))
    )
    timings: bool = False
    relations: bool = False
    verify_relations: bool = False
    no_cap: bool = False

    def __attrs_post_init__(self) -> None:
        if self.prime_bits < 8:
            raise ConfigError(f"prime_bits must be at least 8, got {self.prime_bits}")
        if self.length is not None and self.p is not None:
            minimum = truncation_bound(self.p, self.k_max)
            if self.length < minimum and not self.allow_unsound:
                raise ConfigError(
                    f"L={self.length} is below the truncation bound {minimum} "
                    f"for p={self.p}, k={self.k_max}; pass --allow-unsound to force it"
                )
        # validates the policy as a whole
        self.policy()

    def policy(self) -> CertPolicy:
        return CertPolicy(
            self.cert, self.prime_bits, self.seed, self.agreement, self.max_primes
        )

    @property
    def primes(self) -> Tuple[int, ...]:
        """Primes a multi-p command runs over."""
        if self.p_list:
            return self.p_list
        if self.p is not None:
            return (self.p,)
        return tuple(sorted(DEFAULT_KMAX_CAP))

    def capped_k(self, p: int) -> int:
        if self.no_cap:
            return self.k_max
        return min(self.k_max, DEFAULT_KMAX_CAP.get(p, FALLBACK_KMAX_CAP))


def _as_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"cannot read {text!r} as a boolean")


def _as_primes(text: str) -> Tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


# Options that may come from MODULAR_SPANS_<NAME>, e.g. MODULAR_SPANS_THREADS=4
ENV_OPTIONS: Dict[str, Callable[[str], Any]] = {
    "p": int,
    "p_list": _as_primes,
    "k_max": int,
    "length": int,
    "allow_unsound": _as_bool,
    "cert": str,
    "prime_bits": int,
    "agreement": int,
    "max_primes": int,
    "threads": int,
    "seed": int,
    "cache_dir": str,
    "output_format": str,
    "out": str,
    "relation": str,
    "timings": _as_bool,
    "relations": _as_bool,
    "verify_relations": _as_bool,
    "no_cap": _as_bool,
}
# variables named after the flag rather than the field
_ENV_NAMES = {"output_format": "FORMAT", "k_max": "KMAX", "length": "L"}


class ModularSpans:
    def __init__(self, config: RunConfig):
        self._config = config
        self._policy = config.policy()

    @property
    def config(self) -> RunConfig:
        return self._config

    @staticmethod
    def parse_config(
        config: Dict[str, Any], environ: Optional[Mapping[str, str]] = None
    ) -> RunConfig:
        """Build a RunConfig from explicit options, falling back to the
        environment and then to the defaults. Options set to None count as
        absent."""
        environ = os.environ if environ is None else environ
        fields = {field.name for field in attr.fields(RunConfig)}
        unknown = set(config) - fields
        if unknown:
            raise ConfigError(f"unknown options: {', '.join(sorted(unknown))}")

        options = {name: value for name, value in config.items() if value is not None}
        for name, convert in ENV_OPTIONS.items():
            variable = ENV_PREFIX + _ENV_NAMES.get(name, name.upper())
            if name in options or variable not in environ:
                continue
            try:
                options[name] = convert(environ[variable])
            except ValueError as e:
                raise ConfigError(f"bad value for {variable}: {e}") from e
            logger.debug(f"{name} taken from {variable}")

        try:
            return RunConfig(**options)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    def _length(self, p: int, k_max: int) -> int:
        minimum = truncation_bound(p, k_max)
        length = self._config.length
        if length is None:
            return minimum
        if length < minimum:
            if not self._config.allow_unsound:
                raise TruncationError(
                    f"L={length} is below the truncation bound {minimum} "
                    f"for p={p}, k={k_max}"
                )
            logger.warning(f"p={p}: L={length} < {minimum}, results are UNSOUND")
        return length

    def generators(self, p: int, length: int) -> GeneratorSet:
        """The reduced generator set, through the cache when one is configured."""
        cache_dir = self._config.cache_dir
        if cache_dir is not None:
            cached = cache.read_generators(cache_dir, p, length, self._policy)
            if cached is not None and cached.basis_indices is not None:
                return cached
        gs = reduce_to_basis(
            spanning_set(p, length), self._policy, self._config.allow_unsound
        )
        if cache_dir is not None:
            cache.write_generators(cache_dir, gs, self._policy)
        return gs

    def spans(self, p: int, k_max: int, length: int) -> List[SpanBasis]:
        config = self._config
        wants_relations = config.relations or config.verify_relations
        if config.cache_dir is not None and not wants_relations:
            cached = [
                cache.read_span(config.cache_dir, p, length, k, self._policy)
                for k in range(1, k_max + 1)
            ]
            if all(span is not None for span in cached):
                logger.info(f"p={p}: W_1..W_{k_max} loaded from {config.cache_dir}")
                return [span for span in cached if span is not None]

        spans = compute_spans(
            p,
            k_max,
            length,
            self._policy,
            workers=config.threads,
            allow_unsound=config.allow_unsound,
            generators=self.generators(p, length),
            relations=wants_relations,
            exact_relations=config.verify_relations,
        )
        if config.cache_dir is not None:
            for span in spans:
                cache.write_span(config.cache_dir, p, length, span, self._policy)
        return spans

    def dims(
        self, p: Optional[int] = None, k_max: Optional[int] = None
    ) -> DimensionReport:
        p = self._config.p if p is None else p
        if p is None:
            raise ConfigError("dims needs a prime p")
        k_max = self._config.k_max if k_max is None else k_max
        length = self._length(p, k_max)
        spans = self.spans(p, k_max, length)
        return build_report(p, length, spans, unsound=self._config.allow_unsound)

    def table1(self) -> List[DimensionReport]:
        reports = []
        for p in self._config.primes:
            k = self._config.capped_k(p)
            if k < self._config.k_max:
                logger.info(
                    f"p={p}: computing k <= {k} only (pass --no-cap to go further)"
                )
            reports.append(self.dims(p, k))
        return reports

    def cusps(self) -> List[CuspClassTable]:
        relation = self._config.relation
        relations = RELATIONS if relation is None else (relation,)
        return [
            cusp_classes(p, relation)
            for p in self._config.primes
            for relation in relations
        ]

    def verify(self) -> List[CheckResult]:
        results = []
        for p in self._config.primes:
            results.extend(
                run_verification(
                    p, self._config.k_max, self._policy, self._config.threads
                )
            )
        return results
