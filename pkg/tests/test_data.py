import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossmodal.data import (
    AlignedDataset,
    CellError,
    ColumnSchema,
    ErrorMask,
    PropagatedCell,
    column_stats,
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
from crossmodal.errors import AlignmentError, ParseError, SchemaError, UnknownColumn

from conftest import build_dataset


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")


def test_load_dataset_round_trip(tmp_path):
    table = tmp_path / "t.csv"
    emb = tmp_path / "e.xmeb"
    write_csv(table, "Color,Size\nRed,S\nBlue,M\nRed,L\n")
    write_embeddings(emb, np.arange(12, dtype=np.float32).reshape(3, 4))
    ds = load_dataset(table, emb)
    assert ds.n == 3
    assert ds.dim == 4
    assert ds.rows[1] == ("Blue", "M")
    assert ds.ids == (0, 1, 2)


def test_load_dataset_row_count_mismatch(tmp_path):
    table = tmp_path / "t.csv"
    emb = tmp_path / "e.xmeb"
    write_csv(table, "Color\nRed\nBlue\nGreen\n")
    write_embeddings(emb, np.zeros((2, 4), dtype=np.float32))
    with pytest.raises(AlignmentError):
        load_dataset(table, emb)


def test_load_dataset_duplicate_header(tmp_path):
    table = tmp_path / "t.csv"
    emb = tmp_path / "e.xmeb"
    write_csv(table, "Color,Color\nRed,Blue\n")
    write_embeddings(emb, np.zeros((1, 2), dtype=np.float32))
    with pytest.raises(SchemaError):
        load_dataset(table, emb)


def test_load_dataset_ragged_row(tmp_path):
    table = tmp_path / "t.csv"
    emb = tmp_path / "e.xmeb"
    write_csv(table, "A,B\nx,y\nonly-one\n")
    write_embeddings(emb, np.zeros((2, 2), dtype=np.float32))
    with pytest.raises(ParseError):
        load_dataset(table, emb)


def test_embeddings_bad_magic(tmp_path):
    path = tmp_path / "e.xmeb"
    path.write_bytes(b"NOPE" + b"\x00" * 8)
    with pytest.raises(ParseError):
        read_embeddings(path)


def test_embeddings_truncated(tmp_path):
    path = tmp_path / "e.xmeb"
    write_embeddings(path, np.ones((2, 3), dtype=np.float32))
    data = path.read_bytes()
    path.write_bytes(data[:-4])
    with pytest.raises(ParseError):
        read_embeddings(path)


def test_embeddings_bit_exact_round_trip(tmp_path):
    path = tmp_path / "e.xmeb"
    rng = np.random.default_rng(7)
    original = rng.standard_normal((5, 9)).astype(np.float32)
    original[0, 0] = -0.0
    write_embeddings(path, original)
    loaded = read_embeddings(path)
    assert loaded.tobytes() == original.tobytes()


cell_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\x00"),
    max_size=12,
)


@settings(max_examples=40, deadline=None)
@given(
    data=st.lists(
        st.lists(cell_text, min_size=2, max_size=2),
        min_size=1,
        max_size=6,
    ),
    seed=st.integers(0, 2**16),
)
def test_save_load_round_trip_any_cells(tmp_path_factory, data, seed):
    tmp = tmp_path_factory.mktemp("rt")
    n = len(data)
    rng = np.random.default_rng(seed)
    embeddings = rng.standard_normal((n, 4)).astype(np.float32)
    ds = AlignedDataset(
        columns=(ColumnSchema("A"), ColumnSchema("B")),
        rows=tuple(tuple(r) for r in data),
        embeddings=embeddings,
        ids=tuple(range(n)),
    )
    save_dataset(ds, tmp / "t.csv", tmp / "e.xmeb")
    loaded = load_dataset(tmp / "t.csv", tmp / "e.xmeb")
    assert loaded.rows == ds.rows
    assert loaded.embeddings.tobytes() == ds.embeddings.tobytes()


def test_schema_round_trip(tmp_path):
    columns = (
        ColumnSchema("Category", correlated_group="taxonomy"),
        ColumnSchema("SubCategory", correlated_group="taxonomy"),
        ColumnSchema("Title", kind="text", propagation_target=True),
    )
    path = tmp_path / "schema.json"
    save_schema(columns, path)
    assert load_schema(path) == columns


def test_schema_propagation_must_be_text():
    with pytest.raises(SchemaError):
        ColumnSchema("Color", kind="categorical", propagation_target=True)


def test_dataset_rejects_single_column_group():
    with pytest.raises(SchemaError):
        build_dataset(
            {"A": ["x"], "B": ["y"]},
            groups={"A": "lonely"},
        )


def test_column_stats_counts():
    ds = build_dataset({"C": ["a", "b", "a"]})
    stats = column_stats(ds, "C")
    assert stats.distinct_count == 2
    assert stats.frequencies == {"a": 2, "b": 1}
    assert stats.most_common() == [("a", 2), ("b", 1)]


def test_column_stats_constant_column():
    ds = build_dataset({"C": ["same"] * 5})
    stats = column_stats(ds, "C")
    assert stats.distinct_count == 1
    assert stats.frequencies == {"same": 5}


def test_column_stats_gender_cardinality():
    # catalog-style fixture: four distinct gender values
    values = ["Men", "Women", "Boys", "Girls", "Men", "Women", "Men"]
    ds = build_dataset({"Gender": values})
    assert column_stats(ds, "Gender").distinct_count == 4


def test_column_stats_unknown_column():
    ds = build_dataset({"C": ["a"]})
    with pytest.raises(UnknownColumn):
        column_stats(ds, "missing")


@settings(max_examples=50, deadline=None)
@given(values=st.lists(st.sampled_from("abcde"), min_size=1, max_size=40))
def test_column_stats_frequencies_sum_to_n(values):
    ds = build_dataset({"C": list(values)})
    stats = column_stats(ds, "C")
    assert sum(stats.frequencies.values()) == len(values)
    assert stats.distinct_count == len(set(values))


def test_erroneous_rows_empty_mask():
    assert erroneous_rows(ErrorMask(())) == set()


def test_erroneous_rows_collects_entry_rows():
    mask = ErrorMask(
        (
            CellError(2, "Color", "Red", "Blue"),
            CellError(7, "Size", "S", "M"),
        )
    )
    assert erroneous_rows(mask) == {2, 7}


def test_erroneous_rows_propagation_adds_no_rows():
    mask = ErrorMask(
        (
            CellError(
                2,
                "Color",
                "Red",
                "Blue",
                propagated=(
                    PropagatedCell("Title", "Red shoe", "Blue shoe"),
                    PropagatedCell("Note", "deep Red", "deep Blue"),
                ),
            ),
        )
    )
    assert erroneous_rows(mask) == {2}
    assert len(mask.entries) == len(erroneous_rows(mask))


def test_mask_rejects_identity_injection():
    with pytest.raises(ValueError):
        CellError(0, "Color", "Red", "Red")


def test_mask_rejects_two_entries_per_row():
    with pytest.raises(ValueError):
        ErrorMask(
            (
                CellError(1, "Color", "Red", "Blue"),
                CellError(1, "Size", "S", "M"),
            )
        )


def test_mask_json_round_trip(tmp_path):
    mask = ErrorMask(
        (
            CellError(
                3,
                "Color",
                "Red",
                "Blue",
                propagated=(PropagatedCell("Title", "Red hat", "Blue hat"),),
            ),
            CellError(5, "Size", "", "M"),
        )
    )
    path = tmp_path / "mask.json"
    save_mask(mask, path)
    assert load_mask(path) == mask
    doc = json.loads(path.read_text())
    assert doc["entries"][0]["row"] == 3
    assert doc["entries"][0]["propagated"][0]["new"] == "Blue hat"


def test_mask_json_malformed(tmp_path):
    path = tmp_path / "mask.json"
    path.write_text('{"entries": [{"row": 1}]}')
    with pytest.raises(ParseError):
        load_mask(path)


def test_embeddings_are_read_only():
    ds = build_dataset({"C": ["a", "b"]})
    with pytest.raises(ValueError):
        ds.embeddings[0, 0] = 5.0
