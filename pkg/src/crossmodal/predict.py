"""Out-of-sample class-probability estimation per target column and modality.

For a chosen target column the remaining data is turned into a numeric
feature matrix under one of three modalities: the table view one-hot encodes
every other categorical column, the image view uses the row embeddings, and
the combined view concatenates both. The target column and all title-style
propagation columns are excluded from the features so the value being
predicted cannot leak back in through another cell.

Probabilities come either from the built-in cross-validated k-NN estimator
(each row is scored by folds that never saw it) or from an external CSV
produced by any stronger model.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from .data import CATEGORICAL, AlignedDataset
from .errors import (
    ClassMismatch,
    DegenerateTarget,
    ParseError,
    RowCountMismatch,
    SchemaError,
    TooFewRows,
)
from .rng import SplitMix64

# a single categorical mismatch flips two one-hot slots; scaling by 1/sqrt(2)
# makes it contribute exactly distance 1, comparable to unit embeddings
ONE_HOT_SCALE = 1.0 / math.sqrt(2.0)

LAPLACE_WEIGHT = 1.0


class Modality(enum.Enum):
    TABLE_ONLY = "table"
    IMAGE_ONLY = "image"
    TABLE_AND_IMAGE = "both"

    @classmethod
    def from_token(cls, token: str) -> "Modality":
        for member in cls:
            if member.value == token:
                return member
        raise ValueError(f"unknown modality {token!r}; expected table, image, or both")


@dataclass(frozen=True, eq=False)
class FeatureView:
    """Numeric features for one target column under one modality.

    provenance names the source of every feature column; the target column
    and its propagation columns never appear there. class_index and labels
    describe the target column itself: labels[i] is the index of row i's
    observed value in class_index.
    """

    matrix: np.ndarray
    provenance: tuple[str, ...]
    target_column: str
    excluded_columns: tuple[str, ...]
    class_index: tuple[str, ...]
    labels: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (len(self.labels), len(self.provenance)):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match "
                f"{len(self.labels)} rows x {len(self.provenance)} features"
            )
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("feature matrix contains non-finite values")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def width(self) -> int:
        return int(self.matrix.shape[1])


def _normalized_embeddings(dataset: AlignedDataset) -> np.ndarray:
    emb = dataset.embeddings.astype(np.float64)
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    return emb / np.where(norms == 0.0, 1.0, norms)


def _encode(
    dataset: AlignedDataset,
    target: str,
    modality: Modality,
    vocabulary: dict[str, list[str]],
    class_index: tuple[str, ...],
) -> FeatureView:
    excluded = (target,) + tuple(
        c.name for c in dataset.columns if c.propagation_target and c.name != target
    )

    blocks: list[np.ndarray] = []
    provenance: list[str] = []
    if modality in (Modality.TABLE_ONLY, Modality.TABLE_AND_IMAGE):
        for name, values in vocabulary.items():
            idx = dataset.column_index(name)
            slot = {v: j for j, v in enumerate(values)}
            block = np.zeros((dataset.n, len(values)))
            for i, row in enumerate(dataset.rows):
                j = slot.get(row[idx])
                if j is None:
                    raise SchemaError(
                        f"value {row[idx]!r} of column {name!r} missing from the "
                        "shared encoding vocabulary"
                    )
                block[i, j] = ONE_HOT_SCALE
            blocks.append(block)
            provenance.extend(f"{name}={v}" for v in values)
    if modality in (Modality.IMAGE_ONLY, Modality.TABLE_AND_IMAGE):
        blocks.append(_normalized_embeddings(dataset))
        provenance.extend(f"embedding[{j}]" for j in range(dataset.dim))

    matrix = np.hstack(blocks) if blocks else np.zeros((dataset.n, 0))
    class_slot = {v: j for j, v in enumerate(class_index)}
    try:
        labels = np.array([class_slot[v] for v in dataset.column_values(target)], dtype=np.int64)
    except KeyError as exc:
        raise ClassMismatch(f"target value {exc.args[0]!r} missing from class index") from exc
    return FeatureView(
        matrix=matrix,
        provenance=tuple(provenance),
        target_column=target,
        excluded_columns=excluded,
        class_index=class_index,
        labels=labels,
    )


def _check_target(dataset: AlignedDataset, target: str) -> None:
    if dataset.schema_of(target).kind != CATEGORICAL:
        raise DegenerateTarget(f"target column {target!r} is not categorical")
    if len(set(dataset.column_values(target))) < 2:
        raise DegenerateTarget(f"target column {target!r} has fewer than 2 distinct values")


def _encodable_columns(dataset: AlignedDataset, target: str) -> list[str]:
    skip = {target} | {c.name for c in dataset.columns if c.propagation_target}
    return [c.name for c in dataset.columns if c.kind == CATEGORICAL and c.name not in skip]


def build_features(dataset: AlignedDataset, target: str, modality: Modality) -> FeatureView:
    """Feature matrix for predicting `target` from the chosen modality."""
    _check_target(dataset, target)
    vocabulary = {
        name: sorted(set(dataset.column_values(name)))
        for name in _encodable_columns(dataset, target)
    }
    class_index = tuple(sorted(set(dataset.column_values(target))))
    return _encode(dataset, target, modality, vocabulary, class_index)


def paired_feature_views(
    primary: AlignedDataset,
    secondary: AlignedDataset,
    target: str,
    modality: Modality,
) -> tuple[FeatureView, FeatureView]:
    """Feature views for two datasets in one shared space.

    Encoding vocabulary and class index are the unions over both datasets,
    so distances and labels are directly comparable (e.g. a potentially
    dirty split against a clean one).
    """
    if primary.column_names != secondary.column_names:
        raise SchemaError(
            f"datasets have different columns: {primary.column_names} "
            f"vs {secondary.column_names}"
        )
    _check_target(primary, target)
    vocabulary = {
        name: sorted(
            set(primary.column_values(name)) | set(secondary.column_values(name))
        )
        for name in _encodable_columns(primary, target)
    }
    class_index = tuple(
        sorted(set(primary.column_values(target)) | set(secondary.column_values(target)))
    )
    return (
        _encode(primary, target, modality, vocabulary, class_index),
        _encode(secondary, target, modality, vocabulary, class_index),
    )


@dataclass(frozen=True, eq=False)
class ProbabilityMatrix:
    """Per-row class probabilities with the observed (possibly noisy) labels."""

    probs: np.ndarray
    class_index: tuple[str, ...]
    labels: np.ndarray
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        n, m = self.probs.shape
        if m < 2:
            raise ValueError(f"need at least 2 classes, got {m}")
        if len(self.class_index) != m or len(self.labels) != n:
            raise ValueError("class index / labels do not match the matrix shape")
        if np.any(self.probs < -1e-9) or np.any(self.probs > 1.0 + 1e-9):
            raise ValueError("probabilities outside [0, 1]")
        sums = self.probs.sum(axis=1)
        worst = np.abs(sums - 1.0).max() if n else 0.0
        if worst > 1e-9:
            raise ValueError(f"probability rows must sum to 1 (max deviation {worst:.3g})")
        if np.any(self.labels < 0) or np.any(self.labels >= m):
            raise ValueError("labels outside [0, m)")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def num_classes(self) -> int:
        return len(self.class_index)

    def self_confidence(self) -> np.ndarray:
        """Each row's predicted probability for its own observed label."""
        return self.probs[np.arange(self.n), self.labels]


def stratified_folds(labels: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Deterministic stratified fold assignment.

    Members of each class are shuffled by the seeded stream and dealt
    round-robin, so every fold sees close to the global class balance.
    """
    if folds < 2:
        raise ValueError(f"need at least 2 folds, got {folds}")
    if len(labels) < folds:
        raise TooFewRows(f"{len(labels)} rows cannot fill {folds} folds")
    rng = SplitMix64(seed)
    fold_of = np.empty(len(labels), dtype=np.int64)
    for j in range(int(labels.max()) + 1):
        members = [int(i) for i in np.flatnonzero(labels == j)]
        rng.shuffle(members)
        for pos, row in enumerate(members):
            fold_of[row] = pos % folds
    return fold_of


def knn_oos_probabilities(
    features: FeatureView, k: int = 5, folds: int = 5, seed: int = 0
) -> ProbabilityMatrix:
    """Out-of-sample probabilities from a cross-validated k-NN vote.

    Each row is scored using only the rows of the other folds: the class-j
    probability is (votes for j among the k nearest neighbours + prior_j)
    / (k + 1), a Laplace-smoothed vote with the global label frequencies as
    the prior. Neighbours are ranked by Euclidean distance with ties broken
    by lower row index. Rows always sum to exactly 1.

    A class absent from some training folds is reported in the result's
    warnings; its probability falls back to the smoothed prior term.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    labels = features.labels
    n = features.n
    m = len(features.class_index)
    fold_of = stratified_folds(labels, folds, seed)
    prior = np.bincount(labels, minlength=m) / n

    probs = np.zeros((n, m))
    warns: list[str] = []
    for f in range(folds):
        test = np.flatnonzero(fold_of == f)
        train = np.flatnonzero(fold_of != f)
        if test.size == 0:
            continue
        present = np.bincount(labels[train], minlength=m) > 0
        for j in np.flatnonzero(~present):
            warns.append(
                f"fold {f}: class {features.class_index[j]!r} has no members in the "
                "training folds; its probability is the smoothed prior"
            )
        k_eff = min(k, train.size)
        diff = features.matrix[test][:, None, :] - features.matrix[train][None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k_eff]
        votes = labels[train[nearest]]
        counts = (votes[:, :, None] == np.arange(m)[None, None, :]).sum(axis=1)
        probs[test] = (counts + LAPLACE_WEIGHT * prior[None, :]) / (k_eff + LAPLACE_WEIGHT)

    return ProbabilityMatrix(
        probs=probs,
        class_index=features.class_index,
        labels=labels,
        warnings=tuple(warns),
    )


def load_probabilities(path, labels_column: str, dataset: AlignedDataset) -> ProbabilityMatrix:
    """Read an external probability CSV aligned to the dataset's row order.

    The header row names the classes; each following row holds that many
    probabilities summing to 1 (small formatting error is tolerated and
    renormalized away). Labels are taken from the named table column and
    must all appear in the header.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty probability file") from None
        if len(set(header)) != len(header):
            raise ParseError(f"{path}: duplicate class names in header")
        raw_rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: line {lineno} has {len(row)} values, expected {len(header)}"
                )
            try:
                values = [float(v) for v in row]
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from exc
            if any(v < 0.0 for v in values):
                raise ParseError(f"{path}: line {lineno}: negative probability")
            total = sum(values)
            if abs(total - 1.0) > 1e-6:
                raise ParseError(
                    f"{path}: line {lineno}: probabilities sum to {total:.6f}, expected 1"
                )
            raw_rows.append([v / total for v in values])

    if len(raw_rows) != dataset.n:
        raise RowCountMismatch(
            f"{path} has {len(raw_rows)} probability rows but the table has {dataset.n}"
        )
    class_index = tuple(header)
    slot = {name: j for j, name in enumerate(class_index)}
    observed = dataset.column_values(labels_column)
    missing = sorted(set(observed) - set(slot))
    if missing:
        raise ClassMismatch(
            f"label values {missing} of column {labels_column!r} missing from the header"
        )
    labels = np.array([slot[v] for v in observed], dtype=np.int64)
    return ProbabilityMatrix(
        probs=np.array(raw_rows, dtype=np.float64),
        class_index=class_index,
        labels=labels,
    )
