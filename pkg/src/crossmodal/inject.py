"""Seeded injection of cross-modal errors into the categorical cells of a table.

The procedure corrupts a fixed fraction of rows, one cell each: pick a row,
pick one of the eligible categorical columns, and swap the cell for a
different value already present in that column. Free-text propagation
columns (titles) that mention the original value are rewritten so the
replaced value does not survive anywhere in the row. Values injected into a
column that belongs to a correlated group must keep every value pair of that
group observed in the clean data, so no nonsensical combinations appear.
Embeddings are never touched; the injected cell now contradicts the row's
image, which is what makes the error cross-modal.

Everything is driven by one :class:`~crossmodal.rng.SplitMix64` stream, so a
given (dataset, config) pair always produces byte-identical output.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .data import CATEGORICAL, TEXT, AlignedDataset, CellError, ErrorMask, PropagatedCell
from .errors import DegenerateColumn, NoCandidateValue, SchemaError
from .rng import SplitMix64

_QUOTA_EPS = 1e-9  # guards floor() against float representation of exact products


@dataclass(frozen=True)
class CorruptionConfig:
    """Parameters of one injection run.

    row_fraction of the rows receive exactly one corrupted cell each, drawn
    from eligible_columns. propagation_columns are the free-text columns
    scanned for the replaced value.
    """

    eligible_columns: tuple[str, ...]
    seed: int
    row_fraction: float = 0.5
    enforce_observed_pairs: bool = True
    propagation_columns: tuple[str, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.row_fraction <= 1.0:
            raise ValueError(f"row_fraction must be in [0, 1], got {self.row_fraction}")
        if not self.eligible_columns:
            raise ValueError("eligible_columns must not be empty")
        if len(set(self.eligible_columns)) != len(self.eligible_columns):
            raise ValueError("eligible_columns contains duplicates")

    def to_json(self) -> dict:
        return {
            "eligible_columns": list(self.eligible_columns),
            "seed": self.seed,
            "row_fraction": self.row_fraction,
            "enforce_observed_pairs": self.enforce_observed_pairs,
            "propagation_columns": list(self.propagation_columns),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CorruptionConfig":
        return cls(
            eligible_columns=tuple(doc["eligible_columns"]),
            seed=int(doc["seed"]),
            row_fraction=float(doc.get("row_fraction", 0.5)),
            enforce_observed_pairs=bool(doc.get("enforce_observed_pairs", True)),
            propagation_columns=tuple(doc.get("propagation_columns", ())),
        )


@dataclass(frozen=True)
class PairConstraint:
    """Value pairs of two correlated columns seen in the clean data."""

    columns: tuple[str, str]
    observed: frozenset[tuple[str, str]]

    def allows(self, value_a: str, value_b: str) -> bool:
        return (value_a, value_b) in self.observed


def observed_pairs(dataset: AlignedDataset, col_a: str, col_b: str) -> PairConstraint:
    """All distinct (value_a, value_b) combinations present in the dataset."""
    ia = dataset.column_index(col_a)
    ib = dataset.column_index(col_b)
    pairs = frozenset((row[ia], row[ib]) for row in dataset.rows)
    return PairConstraint(columns=(col_a, col_b), observed=pairs)


def _word_pattern(value: str) -> re.Pattern:
    # lookarounds instead of \b so values that start or end with
    # non-word characters still match whole occurrences
    return re.compile(r"(?<!\w)" + re.escape(value) + r"(?!\w)", re.IGNORECASE)


def _match_case(template: str, replacement: str) -> str:
    if len(template) > 1 and template.isupper():
        return replacement.upper()
    if template.islower():
        return replacement.lower()
    if template[:1].isupper() and template[1:].islower():
        return replacement[:1].upper() + replacement[1:].lower()
    return replacement


def contains_word(text: str, value: str) -> bool:
    return bool(value) and _word_pattern(value).search(text) is not None


def replace_word(text: str, original: str, replacement: str) -> str:
    """Rewrite every whole-word occurrence, preserving the case pattern of
    each matched occurrence. All occurrences are replaced so the original
    value cannot leak through the text column."""
    return _word_pattern(original).sub(
        lambda m: _match_case(m.group(0), replacement), text
    )


def _validate(dataset: AlignedDataset, config: CorruptionConfig) -> None:
    for name in config.eligible_columns:
        if dataset.schema_of(name).kind != CATEGORICAL:
            raise SchemaError(f"eligible column {name!r} is not categorical")
    for name in config.propagation_columns:
        if dataset.schema_of(name).kind != TEXT:
            raise SchemaError(f"propagation column {name!r} is not free-text")


def inject_errors(
    dataset: AlignedDataset, config: CorruptionConfig
) -> tuple[AlignedDataset, ErrorMask]:
    """Corrupt floor(row_fraction * n) rows of a clean dataset.

    Rows are drawn without replacement; each corrupted row gets one injected
    cell, chosen uniformly from the eligible columns that still admit a
    replacement value. The injected value is uniform over the column's other
    distinct values, filtered by the observed-pair constraints when enabled.
    A row where no eligible column admits any replacement is skipped and
    another row is drawn; NoCandidateValue is raised only when the quota
    cannot be met at all.

    Returns the corrupted dataset (embeddings shared with the input) and the
    ground-truth mask.
    """
    _validate(dataset, config)

    distinct: dict[str, list[str]] = {}
    for name in config.eligible_columns:
        values = sorted(set(dataset.column_values(name)))
        if len(values) < 2:
            raise DegenerateColumn(
                f"column {name!r} has {len(values)} distinct value(s); need >= 2"
            )
        distinct[name] = values

    # for each eligible column, the pair constraints against every other
    # column in its correlated group, computed on the clean input
    partners: dict[str, list[tuple[int, PairConstraint]]] = {}
    if config.enforce_observed_pairs:
        for name in config.eligible_columns:
            group = dataset.schema_of(name).correlated_group
            if group is None:
                continue
            links = []
            for other in dataset.columns:
                if other.name != name and other.correlated_group == group:
                    links.append(
                        (dataset.column_index(other.name), observed_pairs(dataset, name, other.name))
                    )
            if links:
                partners[name] = links

    quota = math.floor(config.row_fraction * dataset.n + _QUOTA_EPS)
    rng = SplitMix64(config.seed)
    row_order = rng.shuffled_range(dataset.n)
    rows = [list(r) for r in dataset.rows]
    eligible_idx = [(name, dataset.column_index(name)) for name in config.eligible_columns]
    prop_idx = [(name, dataset.column_index(name)) for name in config.propagation_columns]

    entries: list[CellError] = []
    for r in row_order:
        if len(entries) == quota:
            break
        column_order = list(eligible_idx)
        rng.shuffle(column_order)
        for name, c in column_order:
            original = rows[r][c]
            candidates = [v for v in distinct[name] if v != original]
            for other_idx, constraint in partners.get(name, ()):
                partner_value = rows[r][other_idx]
                candidates = [v for v in candidates if constraint.allows(v, partner_value)]
                if not candidates:
                    break
            if not candidates:
                continue
            injected = candidates[rng.below(len(candidates))]
            rows[r][c] = injected
            propagated = []
            if original:
                for prop_name, p in prop_idx:
                    text = rows[r][p]
                    if contains_word(text, original):
                        new_text = replace_word(text, original, injected)
                        rows[r][p] = new_text
                        propagated.append(PropagatedCell(prop_name, text, new_text))
            entries.append(
                CellError(
                    row=dataset.ids[r],
                    column=name,
                    original=original,
                    injected=injected,
                    propagated=tuple(propagated),
                )
            )
            break

    if len(entries) < quota:
        raise NoCandidateValue(
            f"could only corrupt {len(entries)} of {quota} rows; "
            "remaining rows admit no constraint-satisfying replacement"
        )

    corrupted = dataset.with_rows(rows)
    return corrupted, ErrorMask(tuple(entries))
