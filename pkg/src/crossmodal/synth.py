"""Synthetic benchmark datasets with a known cross-modal ground truth.

Two generators cover the two things worth stressing: `make_cluster_dataset`
builds rows whose embedding is a draw from one well-separated Gaussian
cluster per class value, so the image modality determines the class column
while the rest of the table is independent noise; `make_retail_dataset`
builds a small product table with a correlated category/subcategory pair
and a title that mentions the color and subcategory, for exercising
injection constraints and propagation.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .data import CATEGORICAL, TEXT, AlignedDataset, ColumnSchema


def make_cluster_dataset(
    n: int,
    class_names: Sequence[str] = ("alpha", "bravo", "charlie", "delta"),
    dim: int = 8,
    separation: float = 10.0,
    sigma: float = 1.0,
    seed: int = 0,
    vendor_values: Sequence[str] = ("north", "south", "east"),
) -> AlignedDataset:
    """Rows with class-determined embeddings and class-independent table noise.

    Class c's embedding cluster is an isotropic Gaussian at separation *
    e_c (orthogonal axes, so all pairwise mean distances are separation *
    sqrt(2) >= separation). Columns: Category (the class value), Vendor
    (independent noise), Title (free text mentioning the category, a
    propagation target). Classes are assigned round-robin, so they are as
    balanced as n allows.
    """
    m = len(class_names)
    if dim < m:
        raise ValueError(f"dim must be >= number of classes ({m}), got {dim}")
    rng = np.random.default_rng(seed)
    assignment = np.arange(n) % m
    embeddings = sigma * rng.standard_normal((n, dim))
    for c in range(m):
        embeddings[assignment == c, c] += separation
    rows = []
    for i in range(n):
        category = class_names[assignment[i]]
        vendor = vendor_values[rng.integers(len(vendor_values))]
        rows.append((category, vendor, f"Acme {category} item {i}"))
    columns = (
        ColumnSchema("Category", CATEGORICAL),
        ColumnSchema("Vendor", CATEGORICAL),
        ColumnSchema("Title", TEXT, propagation_target=True),
    )
    return AlignedDataset(
        columns=columns,
        rows=tuple(rows),
        embeddings=embeddings.astype(np.float32),
        ids=tuple(range(n)),
    )


TAXONOMY = {
    "Footwear": ("Sandals", "Sneakers"),
    "Apparel": ("Dress", "Tshirt"),
}

COLORS = ("Red", "Blue", "Green", "Black")


def make_retail_dataset(n: int, seed: int = 0, dim: int = 4) -> AlignedDataset:
    """Product-style table with a correlated Category/SubCategory pair.

    Every subcategory occurs under exactly one category, so the observed
    pairs are a strict subset of the cross product. The Title mentions the
    color and subcategory as whole words. Embeddings are unstructured; this
    generator is for exercising injection, not detection quality.
    """
    rng = np.random.default_rng(seed)
    categories = list(TAXONOMY)
    rows = []
    for i in range(n):
        category = categories[rng.integers(len(categories))]
        subcategory = TAXONOMY[category][rng.integers(len(TAXONOMY[category]))]
        color = COLORS[rng.integers(len(COLORS))]
        rows.append(
            (category, subcategory, color, f"Acme {color} {subcategory}")
        )
    columns = (
        ColumnSchema("Category", CATEGORICAL, correlated_group="taxonomy"),
        ColumnSchema("SubCategory", CATEGORICAL, correlated_group="taxonomy"),
        ColumnSchema("Color", CATEGORICAL),
        ColumnSchema("Title", TEXT, propagation_target=True),
    )
    return AlignedDataset(
        columns=columns,
        rows=tuple(rows),
        embeddings=rng.standard_normal((n, dim)).astype(np.float32),
        ids=tuple(range(n)),
    )


def stack_datasets(first: AlignedDataset, second: AlignedDataset) -> AlignedDataset:
    """Concatenate two datasets with identical schemas; ids are reassigned
    by position (rows of `second` start at first.n)."""
    if first.columns != second.columns:
        raise ValueError("datasets must share an identical column schema")
    embeddings = np.vstack([first.embeddings, second.embeddings]).astype(np.float32)
    return AlignedDataset(
        columns=first.columns,
        rows=first.rows + second.rows,
        embeddings=embeddings,
        ids=tuple(range(first.n + second.n)),
    )
