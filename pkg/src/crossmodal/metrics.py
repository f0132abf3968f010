"""Scoring of detection and repair against the ground-truth error mask.

Detection is scored with precision/recall/F1 at the tuple level (a tuple is
erroneous if any of its cells is) and per column, where the positive class
of a column is "row whose injected error targets this column" and rows
corrupted in other columns count as negatives. Zero denominators yield 0,
never NaN, so reports aggregate cleanly.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

from .data import ErrorMask, erroneous_rows
from .errors import UnknownRowId


@dataclass(frozen=True)
class DetectionMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "DetectionMetrics":
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)

    def to_json(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(frozen=True)
class ColumnReport:
    """Per-column detection metrics plus the tuple-level roll-up."""

    per_column: dict[str, DetectionMetrics]
    overall: DetectionMetrics
    modality: str | None = None

    def to_json(self) -> dict:
        doc = {
            "per_column": {c: m.to_json() for c, m in self.per_column.items()},
            "overall": self.overall.to_json(),
        }
        if self.modality is not None:
            doc["modality"] = self.modality
        return doc


@dataclass(frozen=True)
class RepairReport:
    """Fraction of injected errors flagged and restored to the true value,
    per corrupted column."""

    per_column: dict[str, float]

    def to_json(self) -> dict:
        return {"per_column": dict(self.per_column)}


def _check_row_ids(predicted: Iterable[int], n: int) -> set[int]:
    predicted = set(predicted)
    bad = [r for r in predicted if not 0 <= r < n]
    if bad:
        raise UnknownRowId(f"predicted row ids {sorted(bad)} outside [0, {n})")
    return predicted


def score_detection(predicted: Iterable[int], mask: ErrorMask, n: int) -> DetectionMetrics:
    """Tuple-level precision/recall/F1 of a predicted erroneous-row set."""
    predicted = _check_row_ids(predicted, n)
    actual = erroneous_rows(mask)
    tp = len(predicted & actual)
    return DetectionMetrics.from_counts(
        tp=tp, fp=len(predicted) - tp, fn=len(actual) - tp
    )


def tuple_level_prediction(per_column_flags: Mapping[str, Iterable[int]]) -> set[int]:
    """A tuple is predicted erroneous if any column's detector flagged it."""
    combined: set[int] = set()
    for flags in per_column_flags.values():
        combined |= set(flags)
    return combined


def per_column_metrics(
    per_column_flags: Mapping[str, Iterable[int]], mask: ErrorMask, n: int
) -> ColumnReport:
    """Score each column's flags against the errors injected into that
    column; a row corrupted elsewhere is a negative for this column."""
    entries_by_column: dict[str, set[int]] = defaultdict(set)
    for entry in mask.entries:
        entries_by_column[entry.column].add(entry.row)

    columns = sorted(set(per_column_flags) | set(entries_by_column))
    per_column = {}
    for column in columns:
        predicted = _check_row_ids(per_column_flags.get(column, ()), n)
        actual = entries_by_column.get(column, set())
        tp = len(predicted & actual)
        per_column[column] = DetectionMetrics.from_counts(
            tp=tp, fp=len(predicted) - tp, fn=len(actual) - tp
        )
    overall = score_detection(tuple_level_prediction(per_column_flags), mask, n)
    return ColumnReport(per_column=per_column, overall=overall)


def repair_accuracy(
    repairs: Mapping[tuple[int, str], str], mask: ErrorMask
) -> RepairReport:
    """Per column: the share of injected errors whose repair restored the
    original value. Unflagged or wrongly repaired entries both count against."""
    totals: dict[str, int] = defaultdict(int)
    correct: dict[str, int] = defaultdict(int)
    for entry in mask.entries:
        totals[entry.column] += 1
        if repairs.get((entry.row, entry.column)) == entry.original:
            correct[entry.column] += 1
    return RepairReport(
        per_column={c: correct[c] / totals[c] for c in sorted(totals)}
    )


def render_column_report(report: ColumnReport, title: str = "") -> str:
    """Fixed-width text table: one column per attribute, P/R/F1 rows."""
    columns = list(report.per_column)
    width = max([len("Measure")] + [len(c) for c in columns]) + 2
    lines = []
    if title:
        lines.append(title)
    header = "Measure".ljust(width) + "".join(c.rjust(width) for c in columns)
    lines.append(header)
    lines.append("-" * len(header))
    for measure, attr in (("P", "precision"), ("R", "recall"), ("F1", "f1")):
        cells = "".join(
            f"{getattr(report.per_column[c], attr):.2f}".rjust(width) for c in columns
        )
        lines.append(measure.ljust(width) + cells)
    o = report.overall
    lines.append(
        f"tuple-level: P={o.precision:.2f} R={o.recall:.2f} F1={o.f1:.2f} "
        f"(tp={o.tp} fp={o.fp} fn={o.fn})"
    )
    return "\n".join(lines)


def render_repair_report(report: RepairReport, title: str = "") -> str:
    columns = list(report.per_column)
    width = max([len("Measure")] + [len(c) for c in columns]) + 2
    lines = []
    if title:
        lines.append(title)
    lines.append("Measure".ljust(width) + "".join(c.rjust(width) for c in columns))
    lines.append(
        "repair".ljust(width)
        + "".join(f"{report.per_column[c]:.2f}".rjust(width) for c in columns)
    )
    return "\n".join(lines)
