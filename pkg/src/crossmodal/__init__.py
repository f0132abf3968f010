"""Toolkit for cross-modal errors in tables aligned with image embeddings.

Inject seeded synthetic errors into the categorical cells of a table whose
rows carry embedding vectors, detect them with confident-learning label
analysis or exact 1-NN Shapley valuation, suggest repairs, and score
everything against the ground-truth mask.
"""

from .confident import (
    ClassThresholds,
    ConfidentJoint,
    LabelIssueReport,
    calibrate_joint,
    class_thresholds,
    confident_joint,
    find_label_issues,
    suggest_repairs,
)
from .data import (
    AlignedDataset,
    CellError,
    ColumnSchema,
    ColumnStats,
    ErrorMask,
    PropagatedCell,
    column_stats,
    dataset_stats,
    erroneous_rows,
    load_dataset,
    load_mask,
    load_schema,
    read_embeddings,
    save_dataset,
    save_mask,
    save_schema,
    write_embeddings,
)
from .inject import CorruptionConfig, PairConstraint, inject_errors, observed_pairs
from .metrics import (
    ColumnReport,
    DetectionMetrics,
    RepairReport,
    per_column_metrics,
    repair_accuracy,
    score_detection,
    tuple_level_prediction,
)
from .predict import (
    FeatureView,
    Modality,
    ProbabilityMatrix,
    build_features,
    knn_oos_probabilities,
    load_probabilities,
    paired_feature_views,
    stratified_folds,
)
from .shapley import (
    ValuationInput,
    ValuationResult,
    brute_force_shapley,
    flag_errors,
    knn_shapley,
    knn_shapley_single,
)

__version__ = "0.1.0"

__all__ = [
    "AlignedDataset",
    "CellError",
    "ClassThresholds",
    "ColumnReport",
    "ColumnSchema",
    "ColumnStats",
    "ConfidentJoint",
    "CorruptionConfig",
    "DetectionMetrics",
    "ErrorMask",
    "FeatureView",
    "LabelIssueReport",
    "Modality",
    "PairConstraint",
    "ProbabilityMatrix",
    "PropagatedCell",
    "RepairReport",
    "ValuationInput",
    "ValuationResult",
    "brute_force_shapley",
    "calibrate_joint",
    "class_thresholds",
    "column_stats",
    "confident_joint",
    "dataset_stats",
    "erroneous_rows",
    "find_label_issues",
    "flag_errors",
    "inject_errors",
    "knn_oos_probabilities",
    "knn_shapley",
    "knn_shapley_single",
    "load_dataset",
    "load_mask",
    "load_probabilities",
    "load_schema",
    "observed_pairs",
    "paired_feature_views",
    "per_column_metrics",
    "read_embeddings",
    "repair_accuracy",
    "save_dataset",
    "save_mask",
    "save_schema",
    "score_detection",
    "stratified_folds",
    "suggest_repairs",
    "tuple_level_prediction",
    "write_embeddings",
]
