import logging
import re
from collections import defaultdict
from typing import Dict, List, Optional, Tuple

import attr
from sympy.ntheory.modular import crt

from modular_spans.constants import FORM_CLASS_MOD_4, FORMS, LEVEL_FOUR
from modular_spans.errors import ConfigError, TruncationError
from modular_spans.exact_linalg import (
    CertPolicy,
    RankCertificate,
    rank_exact,
    stack_rows,
    summarize_certificates,
)
from modular_spans.primes import check_odd_prime
from modular_spans.series import QExpansion, subgrid_length, truncation_bound
from modular_spans.theta_series import quarter_coefficients

logger = logging.getLogger("modular_spans.generators")

_LABEL_RE = re.compile(r"^([MNP])(?:\((\d+)\))?$")


@attr.s(auto_attribs=True, frozen=True, order=False)
class GeneratorLabel:
    """`M`, `N` or `P` at pz (twist None) or the class selection f_(b) of
    f(z/p) keeping exponents n = b (mod p)."""

    form: str
    twist: Optional[int] = None

    def __attrs_post_init__(self) -> None:
        if self.form not in FORMS:
            raise ConfigError(f"unknown weight-1 form {self.form!r}")
        if self.twist is not None and self.twist < 0:
            raise ConfigError(f"negative twist {self.twist}")

    def __str__(self) -> str:
        if self.twist is None:
            return self.form
        return f"{self.form}({self.twist})"

    @classmethod
    def parse(cls, text: str) -> "GeneratorLabel":
        match = _LABEL_RE.match(text.strip())
        if match is None:
            raise ConfigError(f"cannot parse generator label {text!r}")
        twist = match.group(2)
        return cls(match.group(1), None if twist is None else int(twist))

    def class_of(self, p: int) -> int:
        """The residue mod 4p holding every exponent of this generator."""
        r = FORM_CLASS_MOD_4[self.form]
        if self.twist is None:
            # f(pz) sits at n = p^2 m with m = r (mod 4), and p^2 = 1 (mod 4)
            residues = [r, 0]
        else:
            if self.twist >= p:
                raise ConfigError(f"twist {self.twist} is not a residue mod {p}")
            residues = [r, self.twist]
        solution = crt([LEVEL_FOUR, p], residues)
        assert solution is not None
        return int(solution[0]) % (LEVEL_FOUR * p)


def generator_labels(p: int) -> List[GeneratorLabel]:
    labels = [GeneratorLabel(form) for form in FORMS]
    labels += [GeneratorLabel(form, b) for b in range(p) for form in FORMS]
    return labels


@attr.s(auto_attribs=True, frozen=True)
class GeneratorSet:
    p: int
    length: int
    entries: Tuple[Tuple[GeneratorLabel, QExpansion], ...]
    basis_indices: Optional[Tuple[int, ...]] = None
    certification: str = ""

    @property
    def d(self) -> int:
        if self.basis_indices is None:
            raise ConfigError("generator set has not been reduced to a basis")
        return len(self.basis_indices)

    def basis(self) -> List[Tuple[GeneratorLabel, QExpansion]]:
        """The basis f_1, ..., f_d of V, in pivot order."""
        if self.basis_indices is None:
            raise ConfigError("generator set has not been reduced to a basis")
        return [self.entries[i] for i in self.basis_indices]

    def expansion(self, label: GeneratorLabel) -> QExpansion:
        for entry_label, expansion in self.entries:
            if entry_label == label:
                return expansion
        raise KeyError(str(label))


def build_generator(
    label: GeneratorLabel,
    p: int,
    length: int,
    coefficients: Optional[Dict[str, List[int]]] = None,
) -> QExpansion:
    """Expansion of `label` on the q^(1/4p) grid, truncated to `length`.

    `coefficients` may carry precomputed q^(1/4) coefficients per form; the
    base form needs ceil(length / p^2) of them, a twist needs `length`.
    """
    check_odd_prime(p)
    denominator = LEVEL_FOUR * p
    b = label.class_of(p)
    count = subgrid_length(length, denominator, b)
    if coefficients is not None and label.form in coefficients:
        c = coefficients[label.form]
    else:
        c = quarter_coefficients(label.form, length)
    if label.twist is None:
        # f(pz) puts c_m at n = p^2 m; the rest of the class is zero
        square = p * p
        values = [
            c[n // square] if n % square == 0 else 0
            for n in range(b, length, denominator)
        ]
    else:
        # f_(b) keeps c_m at n = m for the m in this class
        values = [c[b + denominator * i] for i in range(count)]
    return QExpansion.on_class(denominator, length, b, values)


def spanning_set(p: int, length: int) -> GeneratorSet:
    check_odd_prime(p)
    coefficients = {form: quarter_coefficients(form, length) for form in FORMS}
    entries = tuple(
        (label, build_generator(label, p, length, coefficients))
        for label in generator_labels(p)
    )
    logger.debug(f"Built {len(entries)} generators for p={p}, L={length}")
    return GeneratorSet(p, length, entries)


def reduce_to_basis(
    gs: GeneratorSet,
    policy: Optional[CertPolicy] = None,
    allow_unsound: bool = False,
) -> GeneratorSet:
    """Pick a maximal independent subset of the generators, preferring
    earlier labels. Generators in different classes mod 4p are
    independent of each other, so each class is reduced on its own."""
    minimum = truncation_bound(gs.p, 1)
    if gs.length < minimum and not allow_unsound:
        raise TruncationError(
            f"truncation {gs.length} is below the weight-1 bound {minimum} for p={gs.p}"
        )
    by_class: Dict[int, List[int]] = defaultdict(list)
    for index, (_, expansion) in enumerate(gs.entries):
        assert expansion.support_class is not None
        by_class[expansion.support_class].append(index)

    chosen: List[int] = []
    certificates: List[RankCertificate] = []
    for b, indices in sorted(by_class.items()):
        cols = subgrid_length(gs.length, LEVEL_FOUR * gs.p, b)
        block = stack_rows([gs.entries[i][1].values for i in indices], cols)
        certificate = rank_exact(block.T, policy)
        certificates.append(certificate)
        chosen.extend(indices[j] for j in certificate.pivot_columns)
    basis_indices = tuple(sorted(chosen))
    logger.info(
        f"p={gs.p}: dim V = {len(basis_indices)} of {len(gs.entries)} generators"
    )
    return attr.evolve(
        gs,
        basis_indices=basis_indices,
        certification=summarize_certificates(certificates),
    )
