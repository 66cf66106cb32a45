import logging
from typing import Callable, List, Optional, Tuple

import attr

from modular_spans.block_partition import block_partition
from modular_spans.constants import CERT_BAREISS, FORM_M, FORM_N, FORM_P
from modular_spans.cusps import RELATIONS, cusp_classes, refinement_multiplicities
from modular_spans.errors import ModularSpansError
from modular_spans.exact_linalg import (
    CertPolicy,
    rank_exact,
    stack_rows,
)
from modular_spans.formulas import conjecture_bound, dim_Mk_gamma4, published_dim
from modular_spans.generators import GeneratorLabel, reduce_to_basis, spanning_set
from modular_spans.graded_span import (
    compute_spans,
    exhaustive_span_check,
    stability_check,
)
from modular_spans.monomial import Monomial
from modular_spans.series import add, mul, scale, truncation_bound
from modular_spans.theta_series import gamma4_monomials

logger = logging.getLogger("modular_spans.verify")

# largest weight used for the Gamma(4) check
GAMMA4_MAX_WEIGHT = 5


@attr.s(auto_attribs=True, frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def relation_check(p: int, length: int) -> CheckResult:
    """N^2 - 4MP vanishes identically."""
    gs = spanning_set(p, length)
    m = gs.expansion(GeneratorLabel(FORM_M))
    n = gs.expansion(GeneratorLabel(FORM_N))
    pp = gs.expansion(GeneratorLabel(FORM_P))
    difference = add(mul(n, n), scale(-4, mul(m, pp)))
    return CheckResult(
        "relation N^2-4MP",
        difference.is_zero(),
        f"p={p}, L={length}",
    )


def generator_check(p: int, length: int) -> CheckResult:
    """Every generator is integral and lives on the class of its label."""
    gs = spanning_set(p, length)
    problems = []
    for label, expansion in gs.entries:
        if expansion.support_class != label.class_of(p):
            problems.append(f"{label} in class {expansion.support_class}")
        if expansion.values.dtype.kind not in "iO" or not all(
            isinstance(v, int) for v in expansion.values.tolist()
        ):
            problems.append(f"{label} has non-integral coefficients")
        if expansion.is_zero():
            problems.append(f"{label} vanishes")
    detail = "; ".join(problems) or f"{len(gs.entries)} generators"
    return CheckResult("generator integrality and class", not problems, detail)


def gamma4_check(policy: Optional[CertPolicy] = None) -> CheckResult:
    """theta^(2k-j) phi^j, 0 <= j <= 2k, are independent for k <= 5."""
    failures = []
    for k in range(1, GAMMA4_MAX_WEIGHT + 1):
        # 2k+1 coefficients already separate the leading terms q^(j/4)
        length = 4 * (2 * k + 1)
        forms = gamma4_monomials(k, length)
        matrix = stack_rows([form.coefficients for form in forms], length)
        rank = rank_exact(matrix, policy).rank
        if rank != dim_Mk_gamma4(k):
            failures.append(f"k={k}: rank {rank}")
    return CheckResult(
        "dim M_k(Gamma(4)) = 2k+1",
        not failures,
        "; ".join(failures) or f"k=1..{GAMMA4_MAX_WEIGHT}",
    )


def cusp_check(p: int) -> CheckResult:
    try:
        counts = {relation: cusp_classes(p, relation).count for relation in RELATIONS}
        multiplicity = sorted(set(refinement_multiplicities(p).values()))
    except ModularSpansError as e:
        return CheckResult("cusp class counts", False, str(e))
    return CheckResult(
        "cusp class counts",
        True,
        f"{counts}, approx classes per sim class {multiplicity}",
    )


def bound_identity_check(p: int) -> CheckResult:
    try:
        for k in range(2, 11):
            conjecture_bound(p, k)
    except ModularSpansError as e:
        return CheckResult("bound identity", False, str(e))
    return CheckResult("bound identity", True, "k=2..10")


def dims_check(
    p: int, k_max: int, policy: Optional[CertPolicy], workers: int
) -> CheckResult:
    spans = compute_spans(p, k_max, policy=policy, workers=workers)
    dims = [span.dim for span in spans]
    mismatches = [
        f"k={k}: {dim} != {published_dim(p, k)}"
        for k, dim in enumerate(dims, start=1)
        if published_dim(p, k) not in (None, dim)
    ]
    return CheckResult(
        "published dimensions",
        not mismatches,
        "; ".join(mismatches) or f"dims {dims}",
    )


def oracle_check(
    p: int, k_max: int, policy: Optional[CertPolicy], workers: int
) -> CheckResult:
    """Fraction-free ranks agree with the modular certificates on every block."""
    strict = CertPolicy(CERT_BAREISS)
    length = truncation_bound(p, k_max)
    gs = reduce_to_basis(spanning_set(p, length), policy)
    spans = compute_spans(
        p, k_max, length, policy, workers, generators=gs, keep_blocks=True
    )
    disagreements = []
    for span in spans[1:]:
        for b, block in span.blocks.items():
            exact = rank_exact(block.matrix.T, strict).rank
            if exact != span.per_block_dims[b]:
                disagreements.append(f"k={span.degree}, class {b}")
    d = len(gs.entries)
    generators = [
        (Monomial.variable(i, d), expansion)
        for i, (_, expansion) in enumerate(gs.entries)
    ]
    for b, block in block_partition(generators).items():
        modular = rank_exact(block.matrix.T, policy)
        if rank_exact(block.matrix.T, strict).rank != modular.rank:
            disagreements.append(f"k=1, class {b}")
    return CheckResult(
        "fraction-free oracle",
        not disagreements,
        "; ".join(disagreements) or f"k=1..{k_max}",
    )


def run_verification(
    p: int,
    k_max: int,
    policy: Optional[CertPolicy] = None,
    workers: int = 1,
) -> List[CheckResult]:
    length = truncation_bound(p, max(k_max, 2))
    checks: List[Tuple[str, Callable[[], CheckResult]]] = [
        ("relation N^2-4MP", lambda: relation_check(p, length)),
        ("generator integrality and class", lambda: generator_check(p, length)),
        ("dim M_k(Gamma(4)) = 2k+1", lambda: gamma4_check(policy)),
        ("cusp class counts", lambda: cusp_check(p)),
        ("bound identity", lambda: bound_identity_check(p)),
        ("published dimensions", lambda: dims_check(p, k_max, policy, workers)),
    ]
    if p in (3, 5):
        for k in range(2, min(k_max, 3) + 1):
            name = f"exhaustive span k={k}"
            checks.append(
                (
                    name,
                    lambda k=k, name=name: CheckResult(
                        name,
                        exhaustive_span_check(p, k, policy, workers=workers),
                        f"p={p}",
                    ),
                )
            )
        checks.append(
            (
                "fraction-free oracle",
                lambda: oracle_check(p, min(k_max, 3), policy, workers),
            )
        )
    if p == 3:
        checks.append(
            (
                "stability at 2L",
                lambda: CheckResult(
                    "stability at 2L",
                    stability_check(p, k_max, policy, workers),
                    f"k=1..{k_max}",
                ),
            )
        )

    results = []
    for name, check in checks:
        try:
            result = check()
        except ModularSpansError as e:
            result = CheckResult(name, False, f"raised {type(e).__name__}: {e}")
        log = logger.info if result.passed else logger.error
        log(f"{'PASS' if result.passed else 'FAIL'} {result.name}: {result.detail}")
        results.append(result)
    return results
