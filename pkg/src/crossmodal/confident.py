"""Label-issue detection via confident-joint counting.

Works from out-of-sample class probabilities and the observed (noisy)
labels alone. Per-class thresholds are the mean self-confidence of each
class's members; a row is counted into the joint when at least one class
probability clears its threshold, pairing the row's observed label with its
most confident class. Off-diagonal rows are the label-issue candidates, and
the confident class doubles as the repair suggestion.

All tie-breaking is by lower class index, so results are deterministic and
independent of row order up to permutation of the row ids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateJoint, EmptyClass
from .predict import ProbabilityMatrix


@dataclass(frozen=True, eq=False)
class ClassThresholds:
    """Per-class confidence thresholds and the member counts behind them."""

    values: np.ndarray
    support: np.ndarray


@dataclass(frozen=True, eq=False)
class ConfidentJoint:
    """Counts pairing observed labels (rows) with confident classes (columns),
    plus the calibrated joint distribution."""

    counts: np.ndarray
    joint: np.ndarray
    thresholds: ClassThresholds


@dataclass(frozen=True)
class FlaggedRow:
    row: int
    score: float
    suggested: int


@dataclass(frozen=True)
class LabelIssueReport:
    """Rows whose observed label looks wrong, most suspicious first.

    score is the row's self-confidence (probability of its own observed
    label); suggested is the class index of the proposed repair and always
    differs from the observed label.
    """

    rows: tuple[FlaggedRow, ...]

    def flagged(self) -> set[int]:
        return {r.row for r in self.rows}

    def to_json(self, class_index: tuple[str, ...], column: str) -> dict:
        return {
            "column": column,
            "flagged": [
                {"row": r.row, "score": r.score, "suggested": class_index[r.suggested]}
                for r in self.rows
            ],
        }


def class_thresholds(matrix: ProbabilityMatrix) -> ClassThresholds:
    """threshold_j = mean predicted probability of class j over the rows
    observed as class j."""
    m = matrix.num_classes
    values = np.empty(m)
    support = np.empty(m, dtype=np.int64)
    for j in range(m):
        members = matrix.labels == j
        count = int(members.sum())
        if count == 0:
            raise EmptyClass(f"class {matrix.class_index[j]!r} has no labeled members")
        values[j] = matrix.probs[members, j].mean()
        support[j] = count
    return ClassThresholds(values=values, support=support)


def _confident_assignment(
    matrix: ProbabilityMatrix, thresholds: ClassThresholds
) -> tuple[np.ndarray, np.ndarray]:
    """For each row: whether any class cleared its threshold, and the most
    confident such class (ties to the lower index)."""
    over = matrix.probs >= thresholds.values[None, :]
    counted = over.any(axis=1)
    masked = np.where(over, matrix.probs, -1.0)
    best = np.argmax(masked, axis=1)
    return counted, best


def confident_joint(matrix: ProbabilityMatrix, thresholds: ClassThresholds) -> ConfidentJoint:
    """Count each confidently-assigned row into cell (observed label,
    confident class); rows clearing no threshold stay uncounted."""
    m = matrix.num_classes
    counted, best = _confident_assignment(matrix, thresholds)
    counts = np.zeros((m, m), dtype=np.int64)
    np.add.at(counts, (matrix.labels[counted], best[counted]), 1)
    joint = calibrate_joint(counts, matrix.labels)
    return ConfidentJoint(counts=counts, joint=joint, thresholds=thresholds)


def calibrate_joint(counts: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Rescale the raw counts so row marginals match the observed label
    frequencies, then normalize the whole matrix to sum to 1. All-zero count
    rows stay zero."""
    if counts.sum() == 0:
        raise DegenerateJoint("confident joint has no counted rows")
    m = counts.shape[0]
    n = len(labels)
    label_counts = np.bincount(labels, minlength=m)
    joint = np.zeros((m, m))
    row_sums = counts.sum(axis=1)
    nonzero = row_sums > 0
    joint[nonzero] = (
        counts[nonzero]
        / row_sums[nonzero, None]
        * (label_counts[nonzero, None] / n)
    )
    return joint / joint.sum()


def find_label_issues(matrix: ProbabilityMatrix) -> LabelIssueReport:
    """Flag every row counted off-diagonal in the confident joint.

    Flagged rows are ordered by ascending self-confidence (most suspicious
    first). The suggested repair is the overall most probable class; in the
    rare case that argmax is the observed label itself, the row's confident
    class is suggested instead, so the suggestion always differs from the
    observed label.
    """
    thresholds = class_thresholds(matrix)
    counted, best = _confident_assignment(matrix, thresholds)
    candidates = np.flatnonzero(counted & (best != matrix.labels))
    scores = matrix.self_confidence()

    argmax = np.argmax(matrix.probs, axis=1)
    flagged = []
    for row in candidates:
        suggested = int(argmax[row])
        if suggested == int(matrix.labels[row]):
            suggested = int(best[row])
        flagged.append(FlaggedRow(row=int(row), score=float(scores[row]), suggested=suggested))
    flagged.sort(key=lambda r: (r.score, r.row))
    return LabelIssueReport(rows=tuple(flagged))


def suggest_repairs(report: LabelIssueReport, class_index: tuple[str, ...]) -> dict[int, str]:
    """Map each flagged row to the class value proposed as its repair."""
    return {r.row: class_index[r.suggested] for r in report.rows}
