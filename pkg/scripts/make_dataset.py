"""Generate a synthetic dataset on disk for experimenting with the CLI.

Writes table.csv, embeddings.xmeb, and schema.json into --out. The
`cluster` flavor has a Category column determined by the embedding cluster
(good for detection experiments); the `retail` flavor has a correlated
Category/SubCategory pair and a color-bearing title (good for injection
experiments).
"""

import argparse
from pathlib import Path

from crossmodal.data import save_dataset, save_schema
from crossmodal.synth import make_cluster_dataset, make_retail_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--flavor", choices=("cluster", "retail"), default="cluster")
    parser.add_argument("--rows", type=int, default=400)
    parser.add_argument("--dim", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    if args.flavor == "cluster":
        dataset = make_cluster_dataset(args.rows, dim=args.dim, seed=args.seed)
    else:
        dataset = make_retail_dataset(args.rows, seed=args.seed, dim=args.dim)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(dataset, out / "table.csv", out / "embeddings.xmeb")
    save_schema(dataset.columns, out / "schema.json")
    print(f"wrote {dataset.n} rows (dim {dataset.dim}) to {out}")


if __name__ == "__main__":
    main()
