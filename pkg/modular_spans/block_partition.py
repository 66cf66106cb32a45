from collections import defaultdict
from typing import Dict, List, Sequence, Tuple

import attr

from modular_spans.errors import InvariantError
from modular_spans.exact_linalg import IntMatrix, stack_rows
from modular_spans.monomial import Monomial
from modular_spans.series import QExpansion, subgrid_length


@attr.s(auto_attribs=True, frozen=True, eq=False)
class Block:
    """Candidates sharing one class b mod 4p; row i of `matrix` is the
    coefficient vector of candidate `rows[i]` on the sub-grid n = b (mod 4p)."""

    support_class: int
    rows: Tuple[int, ...]
    matrix: IntMatrix = attr.ib(repr=False)


def block_partition(
    candidates: Sequence[Tuple[Monomial, QExpansion]],
) -> Dict[int, Block]:
    if not candidates:
        return {}
    grouped: Dict[int, List[int]] = defaultdict(list)
    for index, (monomial, expansion) in enumerate(candidates):
        if expansion.support_class is None:
            raise InvariantError(f"candidate {monomial} has no support class")
        grouped[expansion.support_class].append(index)

    denominator = candidates[0][1].grid_denominator
    length = candidates[0][1].length
    blocks: Dict[int, Block] = {}
    for b in sorted(grouped):
        rows = grouped[b]
        cols = subgrid_length(length, denominator, b)
        matrix = stack_rows([candidates[i][1].values for i in rows], cols)
        blocks[b] = Block(b, tuple(rows), matrix)
    return blocks
