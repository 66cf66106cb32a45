from typing import Sequence, Tuple

import attr

from modular_spans.errors import InvariantError


@attr.s(auto_attribs=True, frozen=True, order=False)
class Monomial:
    """x_1^e_1 ... x_d^e_d over a basis f_1, ..., f_d of V.

    Monomials sort by degree, then lexicographically with larger
    exponents on earlier variables first (x1^2 < x1 x2 < x2^2).
    """

    exponents: Tuple[int, ...]

    def __attrs_post_init__(self) -> None:
        if any(e < 0 for e in self.exponents):
            raise InvariantError(f"negative exponent in {self.exponents}")

    @classmethod
    def variable(cls, i: int, d: int) -> "Monomial":
        return cls(tuple(int(j == i) for j in range(d)))

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        return (self.degree, tuple(-e for e in self.exponents))

    def __lt__(self, other: "Monomial") -> bool:
        return self.sort_key() < other.sort_key()

    def times(self, i: int) -> "Monomial":
        exponents = list(self.exponents)
        exponents[i] += 1
        return Monomial(tuple(exponents))

    def support_class(self, classes: Sequence[int], grid_denominator: int) -> int:
        """Class mod 4p of the product: the exponent-weighted sum of the
        variables' classes."""
        return sum(e * b for e, b in zip(self.exponents, classes)) % grid_denominator

    def render(self, names: Sequence[str]) -> str:
        factors = []
        for e, name in zip(self.exponents, names):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        return "*".join(factors) or "1"
