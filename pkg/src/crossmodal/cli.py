"""Command-line pipeline: stats, inject, detect, evaluate.

Exit codes: 0 success, 2 configuration error (bad flags or config file),
3 data error (unparseable files, schema violations, degenerate columns).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import confident, metrics, predict, shapley
from .data import (
    CATEGORICAL,
    AlignedDataset,
    dataset_stats,
    load_dataset,
    load_mask,
    load_schema,
    read_table,
    save_mask,
    write_embeddings,
    write_table,
)
from .errors import CrossModalError
from .inject import CorruptionConfig, inject_errors
from .predict import Modality


@dataclass(frozen=True)
class RunConfig:
    """Detection run parameters; the --config file mirrors this."""

    detector: str | None = None
    modality: str | None = None
    k: int = 5
    folds: int = 5
    seed: int = 0
    row_fraction: float = 0.5
    out: str | None = None

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)


def _load(args) -> AlignedDataset:
    schema = load_schema(args.schema) if args.schema else None
    return load_dataset(args.table, args.embeddings, schema=schema)


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _eligible_columns(dataset: AlignedDataset, requested: str | None) -> list[str]:
    if requested:
        names = [c.strip() for c in requested.split(",") if c.strip()]
        for name in names:
            dataset.column_index(name)
        return names
    return [
        c.name
        for c in dataset.columns
        if c.kind == CATEGORICAL
        and not c.propagation_target
        and len(set(dataset.column_values(c.name))) >= 2
    ]


def cmd_stats(args) -> int:
    dataset = _load(args)
    stats = dataset_stats(dataset)
    width = max(len(s.column) for s in stats) + 2
    lines = ["Column".ljust(width) + "#Distinct  Top values"]
    for s in stats:
        top = ", ".join(f"{v!r}x{c}" for v, c in s.most_common()[:5])
        lines.append(s.column.ljust(width) + f"{s.distinct_count:9d}  {top}")
    text = "\n".join(lines)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(
            out / "stats.json",
            {
                "columns": [
                    {
                        "column": s.column,
                        "distinct": s.distinct_count,
                        "frequencies": dict(s.most_common()),
                    }
                    for s in stats
                ]
            },
        )
        (out / "stats.txt").write_text(text + "\n", encoding="utf-8")
    return 0


def cmd_inject(args) -> int:
    dataset = _load(args)
    eligible = _eligible_columns(dataset, args.columns)
    if args.propagation_columns:
        propagation = tuple(c.strip() for c in args.propagation_columns.split(","))
    else:
        propagation = tuple(c.name for c in dataset.columns if c.propagation_target)
    config = CorruptionConfig(
        eligible_columns=tuple(eligible),
        seed=args.seed,
        row_fraction=args.row_fraction,
        enforce_observed_pairs=not args.no_pair_constraints,
        propagation_columns=propagation,
    )
    corrupted, mask = inject_errors(dataset, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_table(corrupted, out / "corrupted.csv")
    write_embeddings(out / "embeddings.xmeb", corrupted.embeddings)
    save_mask(mask, out / "mask.json")
    _write_json(out / "config.json", config.to_json())
    print(f"injected {len(mask.entries)} errors into {dataset.n} rows -> {out}")
    return 0


def _merge_run_config(args) -> RunConfig:
    base = RunConfig()
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = RunConfig.from_json(json.load(fh))
    return RunConfig(
        detector=args.detector or base.detector,
        modality=args.modality or base.modality,
        k=args.k if args.k is not None else base.k,
        folds=args.folds if args.folds is not None else base.folds,
        seed=args.seed if args.seed is not None else base.seed,
        row_fraction=base.row_fraction,
        out=args.out or base.out,
    )


def _external_probabilities(args) -> dict[str, str]:
    mapping = {}
    for item in args.probabilities or ():
        column, _, path = item.partition("=")
        if not path:
            raise ValueError(f"--probabilities expects COLUMN=PATH, got {item!r}")
        mapping[column] = path
    return mapping


def cmd_detect(args) -> int:
    run = _merge_run_config(args)
    if run.detector not in ("cl", "shapley"):
        raise ValueError(f"detector must be 'cl' or 'shapley', got {run.detector!r}")
    if run.modality is None:
        raise ValueError("modality is required (table, image, or both)")
    modality = Modality.from_token(run.modality)
    if run.out is None:
        raise ValueError("--out is required for detect")
    external = _external_probabilities(args)
    if external and run.detector != "cl":
        raise ValueError("external probability files only apply to the cl detector")

    dataset = _load(args)
    columns = _eligible_columns(dataset, args.columns)
    clean = None
    if run.detector == "shapley":
        if not (args.clean_table and args.clean_embeddings):
            raise ValueError("shapley detection needs --clean-table and --clean-embeddings")
        schema = load_schema(args.schema) if args.schema else None
        clean = load_dataset(args.clean_table, args.clean_embeddings, schema=schema)

    reports: dict[str, dict] = {}
    repairs: dict[str, list[dict]] = {}
    for column in columns:
        if run.detector == "cl":
            if column in external:
                matrix = predict.load_probabilities(external[column], column, dataset)
            else:
                view = predict.build_features(dataset, column, modality)
                matrix = predict.knn_oos_probabilities(
                    view, k=run.k, folds=run.folds, seed=run.seed
                )
            for warning in matrix.warnings:
                print(f"warning: {column}: {warning}", file=sys.stderr)
            report = confident.find_label_issues(matrix)
            reports[column] = report.to_json(matrix.class_index, column)
            repairs[column] = [
                {"row": row, "value": value}
                for row, value in sorted(
                    confident.suggest_repairs(report, matrix.class_index).items()
                )
            ]
        else:
            dirty_view, clean_view = predict.paired_feature_views(
                dataset, clean, column, modality
            )
            inputs = shapley.ValuationInput.from_views(
                dirty_view, clean_view, ids=dataset.ids
            )
            result = shapley.knn_shapley(inputs)
            reports[column] = result.to_json()

    out = Path(run.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {
        "detector": run.detector,
        "modality": modality.value,
        "k": run.k,
        "folds": run.folds,
        "seed": run.seed,
        "columns": reports,
    }
    _write_json(out / "flags.json", doc)
    if run.detector == "cl":
        _write_json(out / "repairs.json", {"columns": repairs})
    total = sum(len(r["flagged"]) for r in reports.values())
    print(f"{run.detector} ({modality.value}): flagged {total} cells across {len(columns)} columns -> {out}")
    return 0


def _flag_sets(doc: dict) -> dict[str, set[int]]:
    sets: dict[str, set[int]] = {}
    for column, report in doc["columns"].items():
        if doc["detector"] == "cl":
            sets[column] = {entry["row"] for entry in report["flagged"]}
        else:
            sets[column] = set(report["flagged"])
    return sets


def cmd_evaluate(args) -> int:
    with open(args.flags, encoding="utf-8") as fh:
        flags_doc = json.load(fh)
    mask = load_mask(args.mask)
    header, rows = read_table(args.table)
    n = len(rows)
    report = metrics.per_column_metrics(_flag_sets(flags_doc), mask, n)
    title = f"detector={flags_doc['detector']} modality={flags_doc['modality']}"
    text = metrics.render_column_report(report, title=title)

    doc = report.to_json()
    doc["detector"] = flags_doc["detector"]
    doc["modality"] = flags_doc["modality"]
    if args.repairs:
        with open(args.repairs, encoding="utf-8") as fh:
            repairs_doc = json.load(fh)
        repair_map = {
            (entry["row"], column): entry["value"]
            for column, entries in repairs_doc["columns"].items()
            for entry in entries
        }
        repair_report = metrics.repair_accuracy(repair_map, mask)
        text += "\n" + metrics.render_repair_report(repair_report)
        doc["repair_accuracy"] = repair_report.to_json()["per_column"]

    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "metrics.json", doc)
        (out / "metrics.txt").write_text(text + "\n", encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossmodal",
        description="Inject, detect, and score cross-modal errors in tables "
        "aligned with per-row image embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_dataset_args(p):
        p.add_argument("--table", required=True, help="table CSV path")
        p.add_argument("--embeddings", required=True, help="XMEB embedding file path")
        p.add_argument("--schema", help="column schema JSON path")

    p_stats = sub.add_parser("stats", help="per-column distinct counts and histograms")
    add_dataset_args(p_stats)
    p_stats.add_argument("--out", help="directory for stats.json / stats.txt")
    p_stats.set_defaults(func=cmd_stats)

    p_inject = sub.add_parser("inject", help="corrupt a fraction of rows")
    add_dataset_args(p_inject)
    p_inject.add_argument("--seed", type=int, default=0)
    p_inject.add_argument("--row-fraction", type=float, default=0.5)
    p_inject.add_argument(
        "--columns", help="comma-separated eligible columns (default: all categorical)"
    )
    p_inject.add_argument(
        "--propagation-columns",
        help="comma-separated free-text columns to rewrite (default: schema flags)",
    )
    p_inject.add_argument(
        "--no-pair-constraints",
        action="store_true",
        help="allow injected values that break observed correlated pairs",
    )
    p_inject.add_argument("--out", required=True, help="output directory")
    p_inject.set_defaults(func=cmd_inject)

    p_detect = sub.add_parser("detect", help="flag suspicious rows per column")
    add_dataset_args(p_detect)
    p_detect.add_argument("--detector", choices=("cl", "shapley"))
    p_detect.add_argument("--modality", choices=("table", "image", "both"))
    p_detect.add_argument("--k", type=int)
    p_detect.add_argument("--folds", type=int)
    p_detect.add_argument("--seed", type=int)
    p_detect.add_argument("--columns", help="comma-separated target columns")
    p_detect.add_argument("--clean-table", help="clean table CSV (shapley)")
    p_detect.add_argument("--clean-embeddings", help="clean XMEB file (shapley)")
    p_detect.add_argument(
        "--probabilities",
        action="append",
        metavar="COLUMN=PATH",
        help="external probability CSV for a column (cl detector)",
    )
    p_detect.add_argument("--config", help="JSON run config; flags override it")
    p_detect.add_argument("--out", help="output directory")
    p_detect.set_defaults(func=cmd_detect)

    p_eval = sub.add_parser("evaluate", help="score flags against the mask")
    p_eval.add_argument("--flags", required=True, help="flags.json from detect")
    p_eval.add_argument("--mask", required=True, help="mask.json from inject")
    p_eval.add_argument("--table", required=True, help="the corrupted table CSV")
    p_eval.add_argument("--repairs", help="repairs.json from detect (cl)")
    p_eval.add_argument("--out", help="directory for metrics.json / metrics.txt")
    p_eval.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CrossModalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
