import logging
import time
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import attr

from modular_spans.block_partition import Block, block_partition
from modular_spans.constants import DEFAULT_EXACT_RELATION_LIMIT, LEVEL_FOUR
from modular_spans.errors import ConfigError, InvariantError, TruncationError
from modular_spans.exact_linalg import (
    CertPolicy,
    RankCertificate,
    kernel_exact,
    kernel_mod_prime,
    rank_exact,
    summarize_certificates,
)
from modular_spans.formulas import conjecture_bound, spanning_set_size
from modular_spans.generators import GeneratorSet, reduce_to_basis, spanning_set
from modular_spans.monomial import Monomial
from modular_spans.primes import check_odd_prime, choose_primes
from modular_spans.series import QExpansion, add, mul, scale, truncation_bound
from modular_spans.worker_pool import chunked, map_in_pool

logger = logging.getLogger("modular_spans.graded_span")

# exhaustive_span_check refuses to enumerate more monomials than this
MAX_EXHAUSTIVE_MONOMIALS = 50000


@attr.s(auto_attribs=True, frozen=True)
class Relation:
    """sum_i coefficients[i] * monomials[i] = 0 in degree `degree`.

    Exact relations were multiplied out and checked to vanish up to the
    truncation; the others only hold mod `modulus`."""

    degree: int
    support_class: int
    monomials: Tuple[Monomial, ...]
    coefficients: Tuple[int, ...]
    exact: bool
    modulus: Optional[int] = None


@attr.s(auto_attribs=True, frozen=True, eq=False)
class SpanBasis:
    degree: int
    basis_monomials: Tuple[Monomial, ...]
    per_block_dims: Dict[int, int]
    candidate_count: int
    certification: str
    seconds: float = 0.0
    relations: Tuple[Relation, ...] = ()
    basis_expansions: Tuple[QExpansion, ...] = attr.ib(default=(), repr=False)
    candidates: Tuple[Tuple[Monomial, QExpansion], ...] = attr.ib(
        default=(), repr=False
    )
    blocks: Dict[int, Block] = attr.ib(factory=dict, repr=False)
    certificates: Dict[int, RankCertificate] = attr.ib(factory=dict, repr=False)

    def __attrs_post_init__(self) -> None:
        if sum(self.per_block_dims.values()) != len(self.basis_monomials):
            raise InvariantError(
                f"degree {self.degree}: block ranks {self.per_block_dims} do not "
                f"add up to {len(self.basis_monomials)}"
            )

    @property
    def dim(self) -> int:
        return len(self.basis_monomials)


def _evaluate(pairs: List[Tuple[QExpansion, QExpansion]]) -> List[QExpansion]:
    return [mul(a, b) for a, b in pairs]


def _certify(job: Tuple[object, CertPolicy]) -> RankCertificate:
    matrix, policy = job
    return rank_exact(matrix, policy)  # type: ignore[arg-type]


def _candidates(
    generators: Sequence[QExpansion],
    previous: SpanBasis,
    workers: int,
) -> List[Tuple[Monomial, QExpansion]]:
    """Distinct products x_i * m for m in the previous basis, in monomial
    order, each evaluated through its first factorization."""
    first: Dict[Monomial, Tuple[int, int]] = {}
    for i in range(len(generators)):
        for j, monomial in enumerate(previous.basis_monomials):
            first.setdefault(monomial.times(i), (i, j))
    ordered = sorted(first, key=Monomial.sort_key)
    pairs = [
        (generators[first[m][0]], previous.basis_expansions[first[m][1]])
        for m in ordered
    ]
    expansions: List[QExpansion] = []
    for batch in map_in_pool(_evaluate, chunked(pairs, 4 * max(workers, 1)), workers):
        expansions.extend(batch)
    return list(zip(ordered, expansions))


def _span_from_candidates(
    degree: int,
    candidates: List[Tuple[Monomial, QExpansion]],
    policy: Optional[CertPolicy],
    workers: int,
) -> SpanBasis:
    started = time.monotonic()
    blocks = block_partition(candidates)
    jobs = [(block.matrix.T, policy or CertPolicy()) for block in blocks.values()]
    certificates = dict(zip(blocks, map_in_pool(_certify, jobs, workers)))
    chosen: List[int] = []
    per_block_dims: Dict[int, int] = {}
    for b, block in blocks.items():
        certificate = certificates[b]
        per_block_dims[b] = certificate.rank
        chosen.extend(block.rows[j] for j in certificate.pivot_columns)
        logger.debug(
            f"degree {degree}, class {b}: rank {certificate.rank} of "
            f"{len(block.rows)} candidates ({certificate.describe()})"
        )
    chosen.sort()
    return SpanBasis(
        degree=degree,
        basis_monomials=tuple(candidates[i][0] for i in chosen),
        per_block_dims=per_block_dims,
        candidate_count=len(candidates),
        certification=summarize_certificates(list(certificates.values())),
        seconds=time.monotonic() - started,
        basis_expansions=tuple(candidates[i][1] for i in chosen),
        candidates=tuple(candidates),
        blocks=blocks,
        certificates=certificates,
    )


def _check_bounds(p: int, span: SpanBasis) -> None:
    if span.degree == 1 and span.dim > spanning_set_size(p):
        raise InvariantError(f"p={p}: dim V = {span.dim} exceeds 3(p+1)")
    if span.degree >= 3:
        bound = conjecture_bound(p, span.degree)
        if span.dim > bound:
            raise InvariantError(
                f"p={p}: dim W_{span.degree} = {span.dim} exceeds the bound {bound}"
            )


def _symmetric(x: int, q: int) -> int:
    return x - q if x > q // 2 else x


def extract_relations(
    span: SpanBasis,
    exact: bool = False,
    exact_limit: int = DEFAULT_EXACT_RELATION_LIMIT,
    policy: Optional[CertPolicy] = None,
) -> List[Relation]:
    """Kernel vectors of every block of `span`, as relations among its
    candidate monomials.

    With `exact`, blocks with at most `exact_limit` candidates get an
    integer kernel whose relations are multiplied out and checked;
    the remaining blocks use the kernel mod the block's first prime.
    """
    if not span.blocks:
        raise ConfigError(f"degree {span.degree} span was computed without blocks")
    relations: List[Relation] = []
    for b, block in span.blocks.items():
        monomials = tuple(span.candidates[i][0] for i in block.rows)
        expansions = [span.candidates[i][1] for i in block.rows]
        if exact and len(block.rows) <= exact_limit:
            for vector in kernel_exact(block.matrix.T):
                relations.append(
                    _checked_relation(span.degree, b, monomials, expansions, vector)
                )
            continue
        certificate = span.certificates.get(b)
        if certificate is not None and certificate.primes:
            q = certificate.primes[0]
        else:
            cert_policy = policy or CertPolicy()
            q = choose_primes(1, cert_policy.prime_bits, cert_policy.seed)[0]
        for vector in kernel_mod_prime(block.matrix.T, q):
            coefficients = tuple(_symmetric(x, q) for x in vector)
            relations.append(
                Relation(span.degree, b, monomials, coefficients, False, q)
            )
    return relations


def _checked_relation(
    degree: int,
    b: int,
    monomials: Tuple[Monomial, ...],
    expansions: List[QExpansion],
    vector: List[int],
) -> Relation:
    total = scale(0, expansions[0])
    for c, expansion in zip(vector, expansions):
        if c:
            total = add(total, scale(c, expansion))
    if not total.is_zero():
        raise InvariantError(
            f"degree {degree}, class {b}: exact relation does not vanish"
        )
    return Relation(degree, b, monomials, tuple(vector), True)


def compute_spans(
    p: int,
    k_max: int,
    length: Optional[int] = None,
    policy: Optional[CertPolicy] = None,
    workers: int = 1,
    allow_unsound: bool = False,
    generators: Optional[GeneratorSet] = None,
    relations: bool = False,
    exact_relations: bool = False,
    exact_limit: int = DEFAULT_EXACT_RELATION_LIMIT,
    keep_blocks: bool = False,
) -> List[SpanBasis]:
    """Bases of W_1, ..., W_{k_max} through W_{k+1} = V * W_k.

    W_{k+1} is spanned by the products f_i * m with m running over a basis
    of W_k, so each degree only multiplies the previous pivot monomials by
    the basis of V.
    """
    check_odd_prime(p)
    if k_max < 1:
        raise ConfigError(f"k_max must be at least 1, got {k_max}")
    minimum = truncation_bound(p, k_max)
    if length is None:
        length = minimum
    if length < minimum and not allow_unsound:
        raise TruncationError(
            f"truncation {length} is below the bound {minimum} for p={p}, k={k_max}"
        )
    if generators is None:
        generators = spanning_set(p, length)
    if generators.length != length:
        raise TruncationError(
            f"generators truncated at {generators.length}, expected {length}"
        )
    if generators.basis_indices is None:
        generators = reduce_to_basis(generators, policy, allow_unsound=allow_unsound)

    basis = [expansion for _, expansion in generators.basis()]
    d = len(basis)
    denominator = LEVEL_FOUR * p
    classes: List[int] = []
    per_block: Dict[int, int] = {}
    for expansion in basis:
        b = expansion.support_class
        assert b is not None
        classes.append(b)
        per_block[b] = per_block.get(b, 0) + 1
    spans = [
        SpanBasis(
            degree=1,
            basis_monomials=tuple(Monomial.variable(i, d) for i in range(d)),
            per_block_dims=dict(sorted(per_block.items())),
            candidate_count=len(generators.entries),
            certification=generators.certification,
            basis_expansions=tuple(basis),
        )
    ]
    _check_bounds(p, spans[0])
    logger.info(f"p={p}, L={length}: dim W_1 = {d}")

    for k in range(2, k_max + 1):
        started = time.monotonic()
        candidates = _candidates(basis, spans[-1], workers)
        for monomial, expansion in candidates:
            expected = monomial.support_class(classes, denominator)
            if expansion.support_class != expected:
                raise InvariantError(f"class of {monomial} is not {expected}")
        span = _span_from_candidates(k, candidates, policy, workers)
        span = attr.evolve(span, seconds=time.monotonic() - started)
        _check_bounds(p, span)
        if relations:
            found = extract_relations(span, exact_relations, exact_limit, policy)
            span = attr.evolve(span, relations=tuple(found))
        logger.info(
            f"p={p}: dim W_{k} = {span.dim} from {span.candidate_count} candidates "
            f"in {len(span.blocks)} blocks ({span.seconds:.1f}s)"
        )
        if not keep_blocks:
            # the previous degree's expansions are no longer needed either
            spans[-1] = attr.evolve(spans[-1], basis_expansions=())
            span = attr.evolve(span, candidates=(), blocks={}, certificates={})
        spans.append(span)
    return spans


def all_monomial_expansions(
    basis: Sequence[QExpansion], k: int
) -> List[Tuple[Monomial, QExpansion]]:
    """Every degree-k monomial in the basis, evaluated directly."""
    d = len(basis)
    products: Dict[Tuple[int, ...], QExpansion] = {}
    result: List[Tuple[Monomial, QExpansion]] = []
    for combo in combinations_with_replacement(range(d), k):
        for size in range(1, k + 1):
            prefix = combo[:size]
            if prefix in products:
                continue
            if size == 1:
                products[prefix] = basis[prefix[0]]
            else:
                products[prefix] = mul(products[prefix[:-1]], basis[prefix[-1]])
        exponents = [0] * d
        for i in combo:
            exponents[i] += 1
        result.append((Monomial(tuple(exponents)), products[combo]))
    result.sort(key=lambda item: item[0].sort_key())
    return result


def exhaustive_span_check(
    p: int,
    k: int,
    policy: Optional[CertPolicy] = None,
    spans: Optional[List[SpanBasis]] = None,
    workers: int = 1,
) -> bool:
    """Rank of all C(d+k-1, k) degree-k monomials equals the recursion's
    dim W_k."""
    if spans is None or len(spans) < k:
        spans = compute_spans(p, k, policy=policy, workers=workers, keep_blocks=True)
    generators = reduce_to_basis(spanning_set(p, truncation_bound(p, k)), policy)
    basis = [expansion for _, expansion in generators.basis()]
    count = comb(len(basis) + k - 1, k)
    if count > MAX_EXHAUSTIVE_MONOMIALS:
        raise ConfigError(f"{count} monomials of degree {k} is too many to enumerate")
    everything = all_monomial_expansions(basis, k)
    direct = _span_from_candidates(k, everything, policy, workers)
    matches = direct.dim == spans[k - 1].dim
    log = logger.info if matches else logger.error
    log(
        f"p={p}, k={k}: {count} monomials have rank {direct.dim}, "
        f"recursion gives {spans[k - 1].dim}"
    )
    return matches


def stability_check(
    p: int,
    k_max: int,
    policy: Optional[CertPolicy] = None,
    workers: int = 1,
) -> bool:
    """Doubling the truncation length leaves every dim W_k unchanged."""
    length = truncation_bound(p, k_max)
    base = compute_spans(p, k_max, length, policy, workers)
    doubled = compute_spans(p, k_max, 2 * length, policy, workers)
    dims = [span.dim for span in base]
    matches = dims == [span.dim for span in doubled]
    if not matches:
        logger.error(
            f"p={p}: dims {dims} at L={length} but "
            f"{[span.dim for span in doubled]} at L={2 * length}"
        )
    return matches
