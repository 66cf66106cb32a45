"""Versioned binary cache for generator sets and span bases.

Layout, all integers little-endian:

    magic            8 bytes, CACHE_MAGIC
    format version   1 byte
    kind             1 byte (1 generators, 2 span basis)
    pivot rule       string
    certification    string, CertPolicy.cache_key()
    p, L             int
    payload          kind-specific, see below

An `int` is a sign byte (0 or 1), a uint32 byte count and that many
magnitude bytes; a `string` is a uint32 byte count and UTF-8 bytes.

Generators payload: entry count, then per entry the label string, the
support class and the class sub-grid values (count, then ints); then the
basis index count and the indices; then the certification string.

Span payload: degree, d, basis monomial count, the exponent vectors
(d ints each), the block count and (class, rank) pairs, the candidate
count and the certification string.

A file written for another p, L, version, pivot rule or certification
policy is ignored; a file that cannot be parsed, or that parses to values
no computation could have produced, raises CacheCorruptError.
"""
import io
import logging
import os
import struct
from typing import BinaryIO, List, Optional, Tuple

from modular_spans.constants import (
    CACHE_FORMAT_VERSION,
    CACHE_KIND_GENERATORS,
    CACHE_KIND_SPAN,
    CACHE_MAGIC,
    LEVEL_FOUR,
    PIVOT_RULE,
)
from modular_spans.errors import CacheCorruptError, ModularSpansError
from modular_spans.exact_linalg import CertPolicy
from modular_spans.generators import GeneratorLabel, GeneratorSet
from modular_spans.graded_span import SpanBasis
from modular_spans.monomial import Monomial
from modular_spans.series import QExpansion

logger = logging.getLogger("modular_spans.cache")

_U32 = struct.Struct("<I")


def _write_int(stream: BinaryIO, value: int) -> None:
    value = int(value)
    magnitude = abs(value)
    raw = magnitude.to_bytes((magnitude.bit_length() + 7) // 8, "little")
    stream.write(bytes([1 if value < 0 else 0]))
    stream.write(_U32.pack(len(raw)))
    stream.write(raw)


def _read_exact(stream: BinaryIO, size: int) -> bytes:
    data = stream.read(size)
    if len(data) != size:
        raise CacheCorruptError(
            f"cache truncated: wanted {size} bytes, got {len(data)}"
        )
    return data


def _read_int(stream: BinaryIO) -> int:
    sign = _read_exact(stream, 1)[0]
    if sign not in (0, 1):
        raise CacheCorruptError(f"bad sign byte {sign}")
    (size,) = _U32.unpack(_read_exact(stream, 4))
    magnitude = int.from_bytes(_read_exact(stream, size), "little")
    return -magnitude if sign else magnitude


def _write_str(stream: BinaryIO, text: str) -> None:
    raw = text.encode("utf-8")
    stream.write(_U32.pack(len(raw)))
    stream.write(raw)


def _read_str(stream: BinaryIO) -> str:
    (size,) = _U32.unpack(_read_exact(stream, 4))
    try:
        return _read_exact(stream, size).decode("utf-8")
    except UnicodeDecodeError as e:
        raise CacheCorruptError(f"bad string in cache: {e}") from e


def generators_path(cache_dir: str, p: int, length: int) -> str:
    return os.path.join(
        cache_dir, f"generators-p{p}-L{length}-v{CACHE_FORMAT_VERSION}.bin"
    )


def span_path(cache_dir: str, p: int, length: int, k: int) -> str:
    return os.path.join(
        cache_dir, f"span-p{p}-L{length}-k{k}-v{CACHE_FORMAT_VERSION}.bin"
    )


def _write_header(
    stream: BinaryIO, kind: int, p: int, length: int, policy: CertPolicy
) -> None:
    stream.write(CACHE_MAGIC)
    stream.write(bytes([CACHE_FORMAT_VERSION, kind]))
    _write_str(stream, PIVOT_RULE)
    _write_str(stream, policy.cache_key())
    _write_int(stream, p)
    _write_int(stream, length)


def _header_matches(
    stream: BinaryIO, kind: int, p: int, length: int, policy: CertPolicy
) -> bool:
    if _read_exact(stream, len(CACHE_MAGIC)) != CACHE_MAGIC:
        raise CacheCorruptError("bad cache magic")
    version, found_kind = _read_exact(stream, 2)
    if found_kind != kind:
        raise CacheCorruptError(f"cache kind {found_kind}, expected {kind}")
    if version != CACHE_FORMAT_VERSION:
        logger.info(f"Ignoring cache written by format version {version}")
        return False
    rule = _read_str(stream)
    certification = _read_str(stream)
    found_p = _read_int(stream)
    found_length = _read_int(stream)
    found = (rule, certification, found_p, found_length)
    wanted = (PIVOT_RULE, policy.cache_key(), p, length)
    if found != wanted:
        logger.info(
            f"Ignoring cache for {rule}, {certification}, p={found_p}, "
            f"L={found_length}; want {PIVOT_RULE}, {policy.cache_key()}, "
            f"p={p}, L={length}"
        )
        return False
    return True


def _atomic_write(path: str, data: bytes) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    partial = path + ".partial"
    with open(partial, "wb") as f:
        f.write(data)
    os.replace(partial, path)


def write_generators(
    cache_dir: str, gs: GeneratorSet, policy: Optional[CertPolicy] = None
) -> str:
    policy = policy or CertPolicy()
    stream = io.BytesIO()
    _write_header(stream, CACHE_KIND_GENERATORS, gs.p, gs.length, policy)
    _write_int(stream, len(gs.entries))
    for label, expansion in gs.entries:
        _write_str(stream, str(label))
        _write_int(stream, expansion.support_class)
        _write_int(stream, len(expansion.values))
        for value in expansion.values:
            _write_int(stream, int(value))
    indices = gs.basis_indices or ()
    _write_int(stream, len(indices))
    for index in indices:
        _write_int(stream, index)
    _write_str(stream, gs.certification)
    path = generators_path(cache_dir, gs.p, gs.length)
    _atomic_write(path, stream.getvalue())
    logger.debug(f"Wrote {path}")
    return path


def _parse_generators(stream: BinaryIO, path: str, p: int, length: int) -> GeneratorSet:
    entries: List[Tuple[GeneratorLabel, QExpansion]] = []
    for _ in range(_read_int(stream)):
        label = GeneratorLabel.parse(_read_str(stream))
        b = _read_int(stream)
        values = [_read_int(stream) for _ in range(_read_int(stream))]
        if b != label.class_of(p):
            raise CacheCorruptError(f"{label} stored in class {b}")
        expansion = QExpansion.on_class(LEVEL_FOUR * p, length, b, values)
        entries.append((label, expansion))
    indices = tuple(_read_int(stream) for _ in range(_read_int(stream)))
    certification = _read_str(stream)
    if stream.read(1):
        raise CacheCorruptError(f"trailing bytes in {path}")
    if any(not 0 <= i < len(entries) for i in indices):
        raise CacheCorruptError(f"basis index out of range in {path}")
    return GeneratorSet(p, length, tuple(entries), indices or None, certification)


def read_generators(
    cache_dir: str, p: int, length: int, policy: Optional[CertPolicy] = None
) -> Optional[GeneratorSet]:
    path = generators_path(cache_dir, p, length)
    if not os.path.exists(path):
        return None
    with open(path, "rb") as stream:
        if not _header_matches(
            stream, CACHE_KIND_GENERATORS, p, length, policy or CertPolicy()
        ):
            return None
        try:
            gs = _parse_generators(stream, path, p, length)
        except CacheCorruptError:
            raise
        except (ModularSpansError, ValueError) as e:
            raise CacheCorruptError(f"bad generator data in {path}: {e}") from e
    logger.info(f"Loaded {len(gs.entries)} generators from {path}")
    return gs


def write_span(
    cache_dir: str,
    p: int,
    length: int,
    span: SpanBasis,
    policy: Optional[CertPolicy] = None,
) -> str:
    stream = io.BytesIO()
    _write_header(stream, CACHE_KIND_SPAN, p, length, policy or CertPolicy())
    d = len(span.basis_monomials[0].exponents) if span.basis_monomials else 0
    _write_int(stream, span.degree)
    _write_int(stream, d)
    _write_int(stream, span.dim)
    for monomial in span.basis_monomials:
        for e in monomial.exponents:
            _write_int(stream, e)
    _write_int(stream, len(span.per_block_dims))
    for b, rank in sorted(span.per_block_dims.items()):
        _write_int(stream, b)
        _write_int(stream, rank)
    _write_int(stream, span.candidate_count)
    _write_str(stream, span.certification)
    path = span_path(cache_dir, p, length, span.degree)
    _atomic_write(path, stream.getvalue())
    logger.debug(f"Wrote {path}")
    return path


def _parse_span(stream: BinaryIO, path: str, k: int) -> SpanBasis:
    degree = _read_int(stream)
    d = _read_int(stream)
    count = _read_int(stream)
    monomials = tuple(
        Monomial(tuple(_read_int(stream) for _ in range(d))) for _ in range(count)
    )
    per_block = {}
    for _ in range(_read_int(stream)):
        b = _read_int(stream)
        per_block[b] = _read_int(stream)
    candidate_count = _read_int(stream)
    certification = _read_str(stream)
    if stream.read(1):
        raise CacheCorruptError(f"trailing bytes in {path}")
    if degree != k or any(m.degree != k for m in monomials):
        raise CacheCorruptError(f"{path} does not hold degree-{k} monomials")
    if sum(per_block.values()) != len(monomials):
        raise CacheCorruptError(f"block ranks in {path} do not add up")
    return SpanBasis(
        degree=degree,
        basis_monomials=monomials,
        per_block_dims=per_block,
        candidate_count=candidate_count,
        certification=certification,
    )


def read_span(
    cache_dir: str,
    p: int,
    length: int,
    k: int,
    policy: Optional[CertPolicy] = None,
) -> Optional[SpanBasis]:
    path = span_path(cache_dir, p, length, k)
    if not os.path.exists(path):
        return None
    with open(path, "rb") as stream:
        if not _header_matches(
            stream, CACHE_KIND_SPAN, p, length, policy or CertPolicy()
        ):
            return None
        try:
            return _parse_span(stream, path, k)
        except CacheCorruptError:
            raise
        except (ModularSpansError, ValueError) as e:
            raise CacheCorruptError(f"bad span data in {path}: {e}") from e
