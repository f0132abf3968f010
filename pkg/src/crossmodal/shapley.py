"""Exact Shapley valuation of potentially dirty tuples under a 1-NN utility.

The utility of a subset of dirty tuples is the fraction of clean validation
points whose nearest member of the subset carries the matching label (the
empty set has utility 0). For a single validation point the Shapley values
of all tuples follow from one sorted pass: with tuples ordered by distance
(nearest first, ties to the lower index) the farthest tuple gets
match/N and each closer tuple adds the scaled indicator difference of its
successor, value[i] = value[i+1] + (match[i] - match[i+1]) / rank[i].
Averaging over validation points gives the exact values for the full
utility, and tuples with negative value are flagged as likely errors.

brute_force_shapley enumerates all subsets and exists purely as an
independent check of the sorted recurrence; the two must agree to 1e-9.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import EmptyCleanSet, EmptyDirtySet, TooLarge
from .predict import FeatureView

BRUTE_FORCE_LIMIT = 12


@dataclass(frozen=True, eq=False)
class ValuationInput:
    """Dirty tuples to value plus the clean points used to score them.

    Features of both sets live in one space and labels share one class
    vocabulary. ids name the dirty tuples in reports; they default to
    0..N-1.
    """

    dirty_features: np.ndarray
    dirty_labels: np.ndarray
    clean_features: np.ndarray
    clean_labels: np.ndarray
    ids: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.dirty_labels) == 0:
            raise EmptyDirtySet("no dirty tuples to value")
        if self.dirty_features.shape[0] != len(self.dirty_labels):
            raise ValueError("dirty features and labels disagree on row count")
        if self.clean_features.shape[0] != len(self.clean_labels):
            raise ValueError("clean features and labels disagree on row count")
        if (
            self.clean_features.size
            and self.dirty_features.shape[1] != self.clean_features.shape[1]
        ):
            raise ValueError("dirty and clean features have different dimensions")
        if not self.ids:
            object.__setattr__(self, "ids", tuple(range(len(self.dirty_labels))))
        elif len(self.ids) != len(self.dirty_labels):
            raise ValueError("ids must name every dirty tuple")

    @property
    def size(self) -> int:
        return len(self.dirty_labels)

    @classmethod
    def from_views(cls, dirty: FeatureView, clean: FeatureView, ids: tuple[int, ...] = ()):
        if dirty.class_index != clean.class_index:
            raise ValueError("dirty and clean views must share one class index")
        return cls(
            dirty_features=dirty.matrix,
            dirty_labels=dirty.labels,
            clean_features=clean.matrix,
            clean_labels=clean.labels,
            ids=ids,
        )


@dataclass(frozen=True, eq=False)
class ValuationResult:
    """Per-tuple Shapley values; negative ones mark harmful tuples."""

    ids: tuple[int, ...]
    shapley: np.ndarray
    flagged: frozenset[int]
    utility_full: float
    utility_empty: float = 0.0

    def __post_init__(self):
        gap = abs(self.shapley.sum() - (self.utility_full - self.utility_empty))
        if gap > 1e-9:
            raise ValueError(f"values do not add up to the total utility (gap {gap:.3g})")
        expected = frozenset(
            rid for rid, value in zip(self.ids, self.shapley) if value < 0.0
        )
        if self.flagged != expected:
            raise ValueError("flagged set must be exactly the negative-valued tuples")

    def to_json(self) -> dict:
        return {
            "shapley": [
                {"row": rid, "value": float(v)} for rid, v in zip(self.ids, self.shapley)
            ],
            "flagged": sorted(self.flagged),
            "utility_full": self.utility_full,
        }


def _distance_order(features: np.ndarray, point: np.ndarray) -> np.ndarray:
    """Indices sorted by ascending squared distance, ties to the lower index."""
    diff = features - point[None, :]
    d2 = np.einsum("ij,ij->i", diff, diff)
    return np.argsort(d2, kind="stable")


def knn_shapley_single(
    dirty_features: np.ndarray,
    dirty_labels: np.ndarray,
    point: np.ndarray,
    point_label: int,
) -> np.ndarray:
    """Exact per-tuple values for one validation point under the 1-NN utility."""
    n = len(dirty_labels)
    if n == 0:
        raise EmptyDirtySet("no dirty tuples to value")
    order = _distance_order(dirty_features, point)
    match = (dirty_labels[order] == point_label).astype(np.float64)
    values = np.empty(n)
    values[n - 1] = match[n - 1] / n
    for i in range(n - 2, -1, -1):
        values[i] = values[i + 1] + (match[i] - match[i + 1]) / (i + 1)
    out = np.empty(n)
    out[order] = values
    return out


def knn_shapley(inputs: ValuationInput) -> ValuationResult:
    """Average the single-point values over every clean validation point."""
    if len(inputs.clean_labels) == 0:
        raise EmptyCleanSet("no clean validation points")
    n = inputs.size
    total = np.zeros(n)
    hits = 0
    for point, label in zip(inputs.clean_features, inputs.clean_labels):
        total += knn_shapley_single(inputs.dirty_features, inputs.dirty_labels, point, label)
        nearest = _distance_order(inputs.dirty_features, point)[0]
        hits += int(inputs.dirty_labels[nearest] == label)
    shapley = total / len(inputs.clean_labels)
    utility_full = hits / len(inputs.clean_labels)
    flagged = frozenset(
        rid for rid, value in zip(inputs.ids, shapley) if value < 0.0
    )
    return ValuationResult(
        ids=inputs.ids,
        shapley=shapley,
        flagged=flagged,
        utility_full=utility_full,
    )


def flag_errors(result: ValuationResult) -> set[int]:
    """Tuples with strictly negative value; zeros are kept."""
    return set(result.flagged)


def _subset_utility(
    members: list[int],
    dirty_features: np.ndarray,
    dirty_labels: np.ndarray,
    clean_features: np.ndarray,
    clean_labels: np.ndarray,
) -> float:
    if not members:
        return 0.0
    hits = 0
    for point, label in zip(clean_features, clean_labels):
        best = None
        best_d2 = None
        for i in members:
            diff = dirty_features[i] - point
            d2 = float(diff @ diff)
            if best_d2 is None or d2 < best_d2:  # ties keep the lower index
                best_d2 = d2
                best = i
        hits += int(dirty_labels[best] == label)
    return hits / len(clean_labels)


def brute_force_shapley(inputs: ValuationInput) -> np.ndarray:
    """Shapley values by direct enumeration of all subsets of dirty tuples.

    Independent of the sorted recurrence: computes the weighted marginal
    contribution sum_{S} |S|!(N-|S|-1)!/N! * (U(S + i) - U(S)) per tuple.
    Only for small N; use knn_shapley for real workloads.
    """
    n = inputs.size
    if n > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"subset enumeration limited to N <= {BRUTE_FORCE_LIMIT}, got {n}")
    if len(inputs.clean_labels) == 0:
        raise EmptyCleanSet("no clean validation points")

    utilities = np.empty(1 << n)
    for mask in range(1 << n):
        members = [i for i in range(n) if mask & (1 << i)]
        utilities[mask] = _subset_utility(
            members,
            inputs.dirty_features,
            inputs.dirty_labels,
            inputs.clean_features,
            inputs.clean_labels,
        )

    weights = [factorial(s) * factorial(n - s - 1) / factorial(n) for s in range(n)]
    values = np.zeros(n)
    for mask in range(1 << n):
        size = bin(mask).count("1")
        for i in range(n):
            if not mask & (1 << i):
                values[i] += weights[size] * (utilities[mask | (1 << i)] - utilities[mask])
    return values
