import csv
import io
import json
from typing import Any, Dict, List, Optional, Sequence, Tuple

import attr

from modular_spans.constants import (
    FORMAT_CSV,
    FORMAT_JSON,
    PUBLISHED_MAX_WEIGHT,
    REPORT_SCHEMA_VERSION,
    UNSOUND_MARKER,
)
from modular_spans.cusps import CuspClassTable, expected_class_count
from modular_spans.formulas import (
    conjecture_bound,
    dim_Mk_gamma4p,
    dim_Mk_gammapm,
    published_dim,
)
from modular_spans.graded_span import SpanBasis
from modular_spans.verify import CheckResult


@attr.s(auto_attribs=True, frozen=True)
class DimensionRow:
    k: int
    dim: int
    bound: Optional[int]
    dim_gammapm: Optional[int]
    per_block_dims: Dict[int, int]
    certification: str
    candidate_count: int
    seconds: float
    relation_count: Optional[int] = None
    exact_relation_count: Optional[int] = None

    @property
    def match(self) -> Optional[bool]:
        if self.bound is None:
            return None
        return self.dim == self.bound

    @property
    def deficit(self) -> Optional[int]:
        if self.bound is None:
            return None
        return self.bound - self.dim


@attr.s(auto_attribs=True, frozen=True)
class DimensionReport:
    p: int
    length: int
    unsound: bool
    rows: Tuple[DimensionRow, ...]

    @property
    def dims(self) -> List[int]:
        return [row.dim for row in self.rows]

    def row(self, k: int) -> Optional[DimensionRow]:
        for row in self.rows:
            if row.k == k:
                return row
        return None

    def published(self, k: int) -> Optional[int]:
        return published_dim(self.p, k)


def build_report(
    p: int, length: int, spans: Sequence[SpanBasis], unsound: bool = False
) -> DimensionReport:
    rows = []
    for span in spans:
        k = span.degree
        bound = conjecture_bound(p, k) if k >= 2 else None
        gammapm = dim_Mk_gammapm(p, k) if k >= 2 else None
        relation_count = None
        exact_count = None
        if span.relations:
            relation_count = len(span.relations)
            exact_count = sum(1 for relation in span.relations if relation.exact)
        rows.append(
            DimensionRow(
                k=k,
                dim=span.dim,
                bound=bound,
                dim_gammapm=gammapm,
                per_block_dims=dict(sorted(span.per_block_dims.items())),
                certification=span.certification,
                candidate_count=span.candidate_count,
                seconds=span.seconds,
                relation_count=relation_count,
                exact_relation_count=exact_count,
            )
        )
    return DimensionReport(p, length, unsound, tuple(rows))


def _row_dict(
    report: DimensionReport, row: DimensionRow, timings: bool
) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "k": row.k,
        "dim_W": row.dim,
        "bound": row.bound,
        "dim_M_gammapm": row.dim_gammapm,
        "match": row.match,
        "deficit": row.deficit,
        "published": report.published(row.k),
        "per_block_dims": {str(b): r for b, r in row.per_block_dims.items()},
        "candidates": row.candidate_count,
        "certification": row.certification,
        "unsound": report.unsound,
    }
    if report.unsound:
        data["marker"] = UNSOUND_MARKER
    if row.relation_count is not None:
        data["relations"] = row.relation_count
        data["exact_relations"] = row.exact_relation_count
    if timings:
        data["seconds"] = round(row.seconds, 3)
    return data


def report_dict(report: DimensionReport, timings: bool = False) -> Dict[str, Any]:
    return {
        "p": report.p,
        "L": report.length,
        "unsound": report.unsound,
        "rows": [_row_dict(report, row, timings) for row in report.rows],
    }


def render_json(payload: Dict[str, Any], kind: str) -> str:
    document = {"schema_version": REPORT_SCHEMA_VERSION, "kind": kind}
    document.update(payload)
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if value is None else value for value in row])
    return buffer.getvalue()


DIMS_CSV_HEADER = (
    "p",
    "L",
    "k",
    "dim_W",
    "bound",
    "dim_M_gammapm",
    "match",
    "deficit",
    "published",
    "per_block_dims",
    "certification",
    "unsound",
)


def dims_csv_rows(
    reports: Sequence[DimensionReport], timings: bool = False
) -> Tuple[Tuple[str, ...], List[List[Any]]]:
    header = DIMS_CSV_HEADER + (("seconds",) if timings else ())
    rows: List[List[Any]] = []
    for report in reports:
        for row in report.rows:
            blocks = ";".join(f"{b}:{r}" for b, r in row.per_block_dims.items())
            line: List[Any] = [
                report.p,
                report.length,
                row.k,
                row.dim,
                row.bound,
                row.dim_gammapm,
                None if row.match is None else str(row.match).lower(),
                row.deficit,
                report.published(row.k),
                blocks,
                row.certification,
                UNSOUND_MARKER if report.unsound else "",
            ]
            if timings:
                line.append(f"{row.seconds:.3f}")
            rows.append(line)
    return header, rows


def table_cell(p: int, k: int, dim: Optional[int]) -> str:
    """`dim (bound)` in the published layout; a bare `?` for cells not computed."""
    if dim is None:
        return "?"
    if k < 2:
        return str(dim)
    return f"{dim} ({conjecture_bound(p, k)})"


def render_table(reports: Sequence[DimensionReport], k_max: int) -> str:
    header = ["p"] + [f"k={k}" for k in range(1, k_max + 1)]
    grid = [header]
    for report in reports:
        cells = [str(report.p)]
        for k in range(1, k_max + 1):
            row = report.row(k)
            cells.append(table_cell(report.p, k, None if row is None else row.dim))
        if report.unsound:
            cells.append(UNSOUND_MARKER)
        grid.append(cells)
    # the UNSOUND column is left unpadded
    widths = [max(len(line[i]) for line in grid) for i in range(len(header))]
    lines = []
    for line in grid:
        padded = [
            cell.rjust(widths[i]) if i < len(widths) else cell
            for i, cell in enumerate(line)
        ]
        lines.append(" | ".join(padded))
    return "\n".join(lines) + "\n"


def render_reports(
    reports: Sequence[DimensionReport],
    output_format: str,
    k_max: int,
    kind: str,
    timings: bool = False,
) -> str:
    if output_format == FORMAT_JSON:
        if kind == "dims" and len(reports) == 1:
            return render_json(report_dict(reports[0], timings), kind)
        return render_json(
            {
                "k_max": k_max,
                "reports": [report_dict(report, timings) for report in reports],
            },
            kind,
        )
    if output_format == FORMAT_CSV:
        header, rows = dims_csv_rows(reports, timings)
        return render_csv(header, rows)
    if kind == "table1":
        # the grid keeps every published column, printing ? where not computed
        k_max = max(k_max, PUBLISHED_MAX_WEIGHT)
    return render_table(reports, k_max)


def _grid(rows: Sequence[Sequence[Any]]) -> str:
    text = [["" if value is None else str(value) for value in row] for row in rows]
    widths = [max(len(row[i]) for row in text) for i in range(len(text[0]))]
    return "\n".join(
        " | ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)) for row in text
    ) + "\n"


def render_rows(
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
    output_format: str,
    kind: str,
    extra: Optional[Dict[str, Any]] = None,
) -> str:
    """Flat tabular payloads shared by the cusps, formulas and verify outputs."""
    if output_format == FORMAT_JSON:
        payload: Dict[str, Any] = dict(extra or {})
        payload["rows"] = [dict(zip(header, row)) for row in rows]
        return render_json(payload, kind)
    if output_format == FORMAT_CSV:
        return render_csv(header, rows)
    return _grid([list(header)] + [list(row) for row in rows])


CUSPS_HEADER = ("p", "relation", "count", "expected", "representatives")


def cusp_rows(tables: Sequence[CuspClassTable]) -> List[List[Any]]:
    return [
        [
            table.p,
            table.relation,
            table.count,
            expected_class_count(table.p, table.relation),
            " ".join(f"({a},{c})" for a, c in table.representatives),
        ]
        for table in tables
    ]


FORMULAS_HEADER = ("p", "k", "dim_M_gamma4p", "dim_M_gammapm", "bound", "published")


def formula_rows(primes: Sequence[int], k_max: int) -> List[List[Any]]:
    return [
        [
            p,
            k,
            dim_Mk_gamma4p(p, k),
            dim_Mk_gammapm(p, k),
            conjecture_bound(p, k),
            published_dim(p, k),
        ]
        for p in primes
        for k in range(2, k_max + 1)
    ]


CHECKS_HEADER = ("check", "passed", "detail")


def check_rows(results: Sequence[CheckResult]) -> List[List[Any]]:
    return [[result.name, result.passed, result.detail] for result in results]
