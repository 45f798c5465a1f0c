"""Rendering of evaluation results into human and machine readable tables.

Two table shapes: the per-model table (one row per model, class-wise
recall per class plus overall accuracy, 4 decimals) and the comparison
table (accuracy / precision / sensitivity / specificity in percent,
2 decimals) which also carries static rows quoted from previously
published work.  Rendering is pure: identical inputs give byte-identical
documents, with half-even rounding applied only at this stage.
"""

from __future__ import annotations

import importlib.resources
import json
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    ConfusionMatrix,
    ValidationError,
    format_fraction,
    format_percent,
    slugify,
)
from .formats import read_json
from .metrics import EvaluationResult


@dataclass(frozen=True)
class TableDocument:
    """A rendered table: header row plus string cells."""

    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    footnotes: tuple[str, ...] = ()

    def to_markdown(self) -> str:
        lines = [
            "| " + " | ".join(self.header) + " |",
            "|" + "|".join(" --- " for _ in self.header) + "|",
        ]
        for row in self.rows:
            lines.append("| " + " | ".join(row) + " |")
        for note in self.footnotes:
            lines.append("")
            lines.append(f"*{note}*")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = [",".join(self.header)]
        for row in self.rows:
            cells = []
            for cell in row:
                if any(ch in cell for ch in ',"\n'):
                    cell = '"' + cell.replace('"', '""') + '"'
                cells.append(cell)
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ReferenceRow:
    """A published result quoted verbatim; never recomputed."""

    method: str
    accuracy: str
    precision: str
    sensitivity: str
    specificity: str


def load_references(path=None) -> list[ReferenceRow]:
    """Reference rows from a JSON file (bundled data by default)."""
    if path is None:
        resource = importlib.resources.files("hemobench.data") / "references.json"
        doc = json.loads(resource.read_text(encoding="utf-8"))
    else:
        doc = read_json(path)
    rows = []
    for entry in doc["rows"]:
        rows.append(
            ReferenceRow(
                method=entry["method"],
                accuracy=entry["accuracy"],
                precision=entry["precision"],
                sensitivity=entry["sensitivity"],
                specificity=entry["specificity"],
            )
        )
    return rows


def _cell(value: Fraction | None, places: int, percent: bool = False) -> str:
    if value is None:
        return "-"
    return format_percent(value, places) if percent else format_fraction(value, places)


def render_model_table(results: list[EvaluationResult]) -> TableDocument:
    """One row per model: class-wise recalls plus overall accuracy."""
    if not results:
        raise ValidationError("no results to render")
    taxonomy = results[0].taxonomy
    for result in results[1:]:
        if result.taxonomy.classes != taxonomy.classes:
            raise ValidationError(
                f"taxonomy mismatch: {result.model_name!r} uses different classes"
            )
    header = ("Model",) + tuple(n.capitalize() for n in taxonomy.classes) + ("Overall",)
    rows = []
    for result in results:
        cells = [result.model_name]
        for recall in result.class_recalls():
            cells.append(_cell(recall, 4))
        cells.append(_cell(result.overall_accuracy, 4))
        rows.append(tuple(cells))
    return TableDocument(header=header, rows=tuple(rows))


def render_comparison_table(
    results: list[EvaluationResult],
    ensemble_result: EvaluationResult | None = None,
    references: list[ReferenceRow] | None = None,
) -> TableDocument:
    """Accuracy/precision/sensitivity/specificity in percent, 2 decimals.

    Reference rows come first and are rendered verbatim; the ensemble row
    goes last and is bold-tagged.
    """
    header = ("Method", "Accuracy", "Precision", "Sensitivity", "Specificity")
    rows: list[tuple[str, ...]] = []
    for ref in references or []:
        rows.append(
            (ref.method, ref.accuracy, ref.precision, ref.sensitivity, ref.specificity)
        )

    def computed_row(result: EvaluationResult, bold: bool = False) -> tuple[str, ...]:
        agg = result.aggregate
        cells = (
            result.model_name,
            _cell(result.overall_accuracy, 2, percent=True),
            _cell(agg.precision, 2, percent=True),
            _cell(agg.sensitivity, 2, percent=True),
            _cell(agg.specificity, 2, percent=True),
        )
        if bold:
            cells = tuple(f"**{c}**" for c in cells)
        return cells

    modes = set()
    for result in results:
        rows.append(computed_row(result))
        modes.add(result.aggregate.mode)
    if ensemble_result is not None:
        rows.append(computed_row(ensemble_result, bold=True))
        modes.add(ensemble_result.aggregate.mode)

    notes = []
    if modes:
        notes.append("aggregation: " + ", ".join(sorted(modes)))
    if references:
        notes.append(
            f"first {len(references)} row(s) are published reference values, "
            "not computed by this run"
        )
    return TableDocument(header=header, rows=tuple(rows), footnotes=tuple(notes))


def _round_scaled(num: int, den: int, scale: int) -> int:
    """Half-even rounding of num/den at a power-of-ten scale, in integers."""
    scaled = num * scale
    quot, rem = divmod(scaled, den)
    double = 2 * rem
    if double > den or (double == den and quot % 2 == 1):
        quot += 1
    return quot


def render_confusion(cm: ConfusionMatrix, normalize: str = "counts") -> TableDocument:
    """Confusion grid as raw counts or row percentages.

    In ``row_percent`` mode each cell is the row share in percent at two
    decimals; the rounding residual is assigned to the row's largest cell
    so every non-empty row sums to exactly 100.00.  Empty rows render as
    dashes.
    """
    if normalize not in ("counts", "row_percent"):
        raise ValidationError("normalize must be 'counts' or 'row_percent'")
    names = cm.taxonomy.classes
    header = ("true \\ pred",) + names
    rows = []
    for i, name in enumerate(names):
        counts = [int(v) for v in cm.counts[i]]
        if normalize == "counts":
            rows.append((name,) + tuple(str(v) for v in counts))
            continue
        row_sum = sum(counts)
        if row_sum == 0:
            rows.append((name,) + tuple("-" for _ in counts))
            continue
        hundredths = [_round_scaled(v * 100, row_sum, 100) for v in counts]
        residual = 10000 - sum(hundredths)
        if residual:
            largest = max(range(len(counts)), key=lambda j: (counts[j], -j))
            hundredths[largest] += residual
        rows.append(
            (name,) + tuple(f"{h // 100}.{h % 100:02d}" for h in hundredths)
        )
    return TableDocument(header=header, rows=tuple(rows))


def confusion_csv_name(model_name: str) -> str:
    return f"confusion_{slugify(model_name)}.csv"


def render_report_markdown(
    model_table: TableDocument,
    comparison_table: TableDocument | None = None,
    confusions: list[tuple[str, TableDocument]] | None = None,
    provenance_lines: list[str] | None = None,
) -> str:
    """Assemble report.md from rendered tables."""
    parts = ["# Benchmark report", "", "## Class-wise recall and overall accuracy", ""]
    parts.append(model_table.to_markdown())
    if comparison_table is not None:
        parts += ["## Overall performance comparison (%)", ""]
        parts.append(comparison_table.to_markdown())
    for model_name, grid in confusions or []:
        parts += [f"## Confusion matrix: {model_name}", ""]
        parts.append(grid.to_markdown())
    if provenance_lines:
        parts += ["## Provenance", ""]
        parts += [f"- {line}" for line in provenance_lines]
        parts.append("")
    return "\n".join(parts)
