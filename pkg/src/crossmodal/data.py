"""Data model for relational tables aligned with per-row embedding vectors.

A dataset couples a table (every cell kept as a string) with one embedding
vector per row, the numeric stand-in for the row's image. Cell semantics
live in the column schema: whether a column is categorical or free text,
which columns form a correlated group whose value pairs must stay jointly
observed, and which free-text columns (titles) embed categorical values.

File formats:
  * table          RFC-4180 CSV, UTF-8, first row is the header
  * embeddings     "XMEB" binary: magic ``XMEB``, u32 row count, u32
                   dimension, then n*d little-endian float32, row-major
  * error mask     JSON, see :class:`ErrorMask`
  * column schema  JSON, see :func:`load_schema`

Missing cells are the empty string and count as an ordinary distinct value.
All types here are immutable after construction and safe for concurrent
reads.
"""

from __future__ import annotations

import csv
import json
import struct
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import AlignmentError, ParseError, SchemaError, UnknownColumn

CATEGORICAL = "categorical"
TEXT = "text"

XMEB_MAGIC = b"XMEB"
_XMEB_HEADER = struct.Struct("<4sII")


@dataclass(frozen=True)
class ColumnSchema:
    """Declared semantics of one table column."""

    name: str
    kind: str = CATEGORICAL
    correlated_group: str | None = None
    propagation_target: bool = False

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, TEXT):
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.propagation_target and self.kind != TEXT:
            raise SchemaError(
                f"column {self.name!r}: propagation targets must be free-text columns"
            )


@dataclass(frozen=True, eq=False)
class AlignedDataset:
    """A table plus one embedding vector per row.

    Invariants enforced at construction: every row has one cell per column,
    embeddings are a finite (n, d) float32 matrix with d >= 1 aligned to the
    rows by position, and row ids are unique.
    """

    columns: tuple[ColumnSchema, ...]
    rows: tuple[tuple[str, ...], ...]
    embeddings: np.ndarray
    ids: tuple[int, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate column names: {names}")
        groups = Counter(c.correlated_group for c in self.columns if c.correlated_group)
        for group, size in groups.items():
            if size < 2:
                raise SchemaError(f"correlated group {group!r} has a single column")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise SchemaError(
                    f"row {i} has {len(row)} cells, expected {len(self.columns)}"
                )
        emb = self.embeddings
        if emb.ndim != 2 or emb.shape[1] < 1:
            raise AlignmentError(f"embeddings must be (n, d) with d >= 1, got {emb.shape}")
        if emb.shape[0] != len(self.rows):
            raise AlignmentError(
                f"{len(self.rows)} table rows but {emb.shape[0]} embedding vectors"
            )
        if not np.all(np.isfinite(emb)):
            raise AlignmentError("embeddings contain non-finite values")
        if len(self.ids) != len(self.rows) or len(set(self.ids)) != len(self.ids):
            raise SchemaError("row ids must be unique, one per row")
        if emb.flags.writeable:
            emb.flags.writeable = False

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def dim(self) -> int:
        return int(self.embeddings.shape[1])

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise UnknownColumn(f"no column named {name!r}")

    def schema_of(self, name: str) -> ColumnSchema:
        return self.columns[self.column_index(name)]

    def column_values(self, name: str) -> list[str]:
        idx = self.column_index(name)
        return [row[idx] for row in self.rows]

    def with_rows(self, rows: Iterable[Sequence[str]]) -> "AlignedDataset":
        """Same schema, ids, and embeddings (shared, not copied) with new cells."""
        return replace(self, rows=tuple(tuple(r) for r in rows))


@dataclass(frozen=True)
class PropagatedCell:
    """A free-text cell rewritten alongside a primary injected error."""

    column: str
    original: str
    new: str


@dataclass(frozen=True)
class CellError:
    """One injected error: the corrupted cell plus any propagated rewrites."""

    row: int
    column: str
    original: str
    injected: str
    propagated: tuple[PropagatedCell, ...] = ()

    def __post_init__(self):
        if self.injected == self.original:
            raise ValueError(f"row {self.row}: injected value equals the original")


@dataclass(frozen=True)
class ErrorMask:
    """Ground-truth record of injected errors, at most one primary cell per row."""

    entries: tuple[CellError, ...]

    def __post_init__(self):
        rows = [e.row for e in self.entries]
        if len(set(rows)) != len(rows):
            raise ValueError("multiple primary errors recorded for one row")

    def to_json(self) -> dict:
        return {
            "entries": [
                {
                    "row": e.row,
                    "column": e.column,
                    "original": e.original,
                    "injected": e.injected,
                    "propagated": [
                        {"column": p.column, "original": p.original, "new": p.new}
                        for p in e.propagated
                    ],
                }
                for e in self.entries
            ]
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ErrorMask":
        try:
            entries = tuple(
                CellError(
                    row=int(e["row"]),
                    column=e["column"],
                    original=e["original"],
                    injected=e["injected"],
                    propagated=tuple(
                        PropagatedCell(p["column"], p["original"], p["new"])
                        for p in e.get("propagated", ())
                    ),
                )
                for e in doc["entries"]
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed error mask document: {exc}") from exc
        return cls(entries)


def erroneous_rows(mask: ErrorMask) -> set[int]:
    """Row ids with at least one corrupted cell. Propagated rewrites do not
    add rows beyond the primary entry."""
    return {e.row for e in mask.entries}


@dataclass(frozen=True)
class ColumnStats:
    """Distinct-value count and exact value histogram of one column."""

    column: str
    distinct_count: int
    frequencies: dict[str, int]

    def most_common(self) -> list[tuple[str, int]]:
        return sorted(self.frequencies.items(), key=lambda kv: (-kv[1], kv[0]))


def column_stats(dataset: AlignedDataset, column: str) -> ColumnStats:
    values = dataset.column_values(column)
    freq = dict(Counter(values))
    return ColumnStats(column=column, distinct_count=len(freq), frequencies=freq)


def dataset_stats(dataset: AlignedDataset) -> list[ColumnStats]:
    return [column_stats(dataset, name) for name in dataset.column_names]


# ---------------------------------------------------------------------------
# file I/O


def read_table(path) -> tuple[list[str], list[tuple[str, ...]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty table file") from None
        if len(set(header)) != len(header):
            raise SchemaError(f"{path}: duplicate column names in header {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: line {lineno} has {len(row)} cells, expected {len(header)}"
                )
            rows.append(tuple(row))
    return header, rows


def write_table(dataset: AlignedDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.column_names)
        writer.writerows(dataset.rows)


def read_embeddings(path) -> np.ndarray:
    """Read an XMEB file into a read-only (n, d) float32 array."""
    raw = Path(path).read_bytes()
    if len(raw) < _XMEB_HEADER.size:
        raise ParseError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, n, d = _XMEB_HEADER.unpack_from(raw)
    if magic != XMEB_MAGIC:
        raise ParseError(f"{path}: bad magic {magic!r}, expected {XMEB_MAGIC!r}")
    if d < 1:
        raise ParseError(f"{path}: embedding dimension must be >= 1")
    expected = _XMEB_HEADER.size + 4 * n * d
    if len(raw) != expected:
        raise ParseError(f"{path}: file is {len(raw)} bytes, expected {expected}")
    vectors = np.frombuffer(raw, dtype="<f4", offset=_XMEB_HEADER.size).reshape(n, d)
    if not np.all(np.isfinite(vectors)):
        raise ParseError(f"{path}: embeddings contain non-finite values")
    return vectors


def write_embeddings(path, vectors: np.ndarray) -> None:
    arr = np.ascontiguousarray(vectors, dtype="<f4")
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise ValueError(f"embeddings must be (n, d) with d >= 1, got {arr.shape}")
    with open(path, "wb") as fh:
        fh.write(_XMEB_HEADER.pack(XMEB_MAGIC, arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes(order="C"))


def load_schema(path) -> tuple[ColumnSchema, ...]:
    """Read a column-schema JSON document.

    Format: ``{"columns": [{"name": str, "kind": "categorical"|"text",
    "correlated_group": str|null, "propagation_target": bool}, ...]}``.
    Only ``name`` is required per column.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    try:
        cols = tuple(
            ColumnSchema(
                name=c["name"],
                kind=c.get("kind", CATEGORICAL),
                correlated_group=c.get("correlated_group"),
                propagation_target=bool(c.get("propagation_target", False)),
            )
            for c in doc["columns"]
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: malformed schema document: {exc}") from exc
    return cols


def save_schema(columns: Sequence[ColumnSchema], path) -> None:
    doc = {
        "columns": [
            {
                "name": c.name,
                "kind": c.kind,
                "correlated_group": c.correlated_group,
                "propagation_target": c.propagation_target,
            }
            for c in columns
        ]
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_dataset(
    table_path,
    embeddings_path,
    schema: Sequence[ColumnSchema] | None = None,
) -> AlignedDataset:
    """Load and validate a table/embedding pair.

    The embedding file's row order must match the table's by position. When
    no schema is given every column defaults to categorical; pass the schema
    (see :func:`load_schema`) to mark free-text columns, correlated groups,
    and propagation targets.
    """
    header, rows = read_table(table_path)
    embeddings = read_embeddings(embeddings_path)
    if embeddings.shape[0] != len(rows):
        raise AlignmentError(
            f"{table_path} has {len(rows)} rows but {embeddings_path} has "
            f"{embeddings.shape[0]} vectors"
        )
    if schema is None:
        columns = tuple(ColumnSchema(name) for name in header)
    else:
        by_name = {c.name: c for c in schema}
        if set(by_name) != set(header):
            raise SchemaError(
                f"schema columns {sorted(by_name)} do not match table header {header}"
            )
        columns = tuple(by_name[name] for name in header)
    return AlignedDataset(
        columns=columns,
        rows=tuple(rows),
        embeddings=embeddings,
        ids=tuple(range(len(rows))),
    )


def save_dataset(dataset: AlignedDataset, table_path, embeddings_path) -> None:
    write_table(dataset, table_path)
    write_embeddings(embeddings_path, dataset.embeddings)


def save_mask(mask: ErrorMask, path) -> None:
    Path(path).write_text(
        json.dumps(mask.to_json(), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_mask(path) -> ErrorMask:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    return ErrorMask.from_json(doc)
