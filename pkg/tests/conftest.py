import numpy as np
import pytest

from crossmodal.data import CATEGORICAL, TEXT, AlignedDataset, ColumnSchema


def build_dataset(cells, kinds=None, groups=None, propagation=(), embeddings=None):
    """Small helper: cells is {column: [values]}; embeddings default to
    distinct deterministic vectors."""
    names = list(cells)
    n = len(next(iter(cells.values())))
    kinds = kinds or {}
    groups = groups or {}
    columns = tuple(
        ColumnSchema(
            name,
            kind=kinds.get(name, CATEGORICAL),
            correlated_group=groups.get(name),
            propagation_target=name in propagation,
        )
        for name in names
    )
    rows = tuple(tuple(cells[name][i] for name in names) for i in range(n))
    if embeddings is None:
        embeddings = np.arange(n * 3, dtype=np.float32).reshape(n, 3)
    return AlignedDataset(
        columns=columns,
        rows=rows,
        embeddings=np.asarray(embeddings, dtype=np.float32),
        ids=tuple(range(n)),
    )


@pytest.fixture
def retail_cells():
    return {
        "Category": ["Footwear", "Footwear", "Apparel", "Apparel"],
        "SubCategory": ["Sandals", "Sneakers", "Dress", "Tshirt"],
        "Color": ["Red", "Blue", "Green", "Blue"],
        "Title": [
            "Acme Red Sandals",
            "Acme Blue Sneakers",
            "Acme Green Dress",
            "Acme Blue Tshirt",
        ],
    }


@pytest.fixture
def retail_dataset(retail_cells):
    return build_dataset(
        retail_cells,
        kinds={"Title": TEXT},
        groups={"Category": "taxonomy", "SubCategory": "taxonomy"},
        propagation=("Title",),
    )
