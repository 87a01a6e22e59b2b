"""Command-line front end: ``run``, ``ablate``, ``synth`` and ``info``."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import pipeline
from .dataset import DEFAULT_RATIOS, Dataset, load_csv, prepare, split, validate_ratios
from .errors import CdgafsError, ValidationError
from .feature_graph import build_graph, graph_csv
from .ga import GaConfig
from .relevance import score_features, subset_count
from .synth import csv_text, make_redundant

log = logging.getLogger("cdgafs")


@dataclass(frozen=True)
class CliConfig:
    command: str
    data: Path | None
    label: str | None
    ga: GaConfig
    ratios: tuple[float, float, float]
    repeats: int
    out: Path | None
    graph: bool = False

    def __post_init__(self):
        if self.repeats < 1:
            raise ValidationError("--repeats must be >= 1")


def _ratios(text: str):
    try:
        return validate_ratios(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdgafs",
        description="Community-detection genetic algorithm for feature selection",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", type=Path, required=True, help="CSV dataset")
    common.add_argument("--label", default=None,
                        help="label column name or 0-based index (default: last column)")

    ga = argparse.ArgumentParser(add_help=False)
    ga.add_argument("--omega", type=int, default=1, help="features kept per community")
    ga.add_argument("--knn", type=int, default=5, help="neighbours for the KNN classifier")
    ga.add_argument("--pop", type=int, default=100, help="population size")
    ga.add_argument("--iters", type=int, default=100, help="generations")
    ga.add_argument("--cx-rate", type=float, default=0.8)
    ga.add_argument("--mut-rate", type=float, default=0.05)
    ga.add_argument("--seed", type=int, default=0)
    ga.add_argument("--repeats", type=int, default=1, help="runs with seeds seed..seed+r-1")
    ga.add_argument("--split", type=_ratios, default=DEFAULT_RATIOS,
                    help="train,validation,test fractions (default 0.6,0.2,0.2)")
    ga.add_argument("--filter-cap", type=int, default=100,
                    help="features kept by the Fisher filter")
    ga.add_argument("--out", type=Path, default=Path("."), help="output directory")

    run = sub.add_parser("run", parents=[common, ga], help="select features on a dataset")
    run.add_argument("--no-repair", action="store_true", help="disable the repair operator")
    run.add_argument("--graph", action="store_true", help="also write graph.csv")
    sub.add_parser("ablate", parents=[common, ga], help="compare runs with and without repair")

    synth = sub.add_parser("synth", help="write a synthetic redundancy benchmark")
    synth.add_argument("--groups", type=int, default=5)
    synth.add_argument("--group-size", type=int, default=5)
    synth.add_argument("--noise", type=int, default=25)
    synth.add_argument("--patterns", type=int, default=400)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", type=Path, required=True, help="CSV file to write")

    sub.add_parser("info", parents=[common], help="print dataset statistics")
    return parser


def config_from_args(args) -> CliConfig:
    ga = None
    if args.command in ("run", "ablate"):
        ga = GaConfig(
            crossover_rate=args.cx_rate,
            mutation_rate=args.mut_rate,
            population_size=args.pop,
            max_iterations=args.iters,
            omega=args.omega,
            k_nn=args.knn,
            seed=args.seed,
            repair_enabled=not getattr(args, "no_repair", False),
            filter_cap=args.filter_cap,
        )
    return CliConfig(
        command=args.command,
        data=getattr(args, "data", None),
        label=getattr(args, "label", None),
        ga=ga,
        ratios=getattr(args, "split", DEFAULT_RATIOS),
        repeats=getattr(args, "repeats", 1),
        out=args.out if hasattr(args, "out") else None,
        graph=getattr(args, "graph", False),
    )


def _load(cfg: CliConfig) -> tuple[Dataset, dict]:
    if not cfg.data.is_file():
        raise ValidationError(f"dataset not found: {cfg.data}")
    data = load_csv(cfg.data, cfg.label)
    info = {
        "file": cfg.data.name,
        "sha256": hashlib.sha256(cfg.data.read_bytes()).hexdigest(),
        "patterns": data.n_patterns,
        "features": data.n_features,
        "classes": data.class_count,
    }
    return data, info


def cmd_run(cfg: CliConfig) -> list[Path]:
    data, info = _load(cfg)
    reports = pipeline.run_repeats(data, cfg.ga, cfg.repeats, cfg.ratios)
    files = {
        "report.json": pipeline.report_json(reports, info),
        "trace.csv": pipeline.trace_csv(reports),
        "timings.json": json.dumps([r.timings for r in reports], indent=2) + "\n",
    }
    if cfg.graph:
        parts = split(prepare(data), cfg.ratios, cfg.ga.seed)
        kept = sorted(score_features(parts.train, cfg.ga.filter_cap).kept_indices)
        files["graph.csv"] = graph_csv(build_graph(parts.train, kept), data.feature_names)
    written = pipeline.write_outputs(cfg.out, files)
    for r in reports:
        print(f"seed {r.config['seed']}: {len(r.selected_features)} features, "
              f"k={r.k}, validation {r.validation_accuracy:.4f}, test {r.test_accuracy:.4f}")
    if len(reports) > 1:
        agg = pipeline.aggregate(reports)
        print(f"test accuracy % (mean (std)): {agg['test_accuracy_percent']}")
        print(f"selected features (mean (std)): {agg['subset_size']}")
    return written


def cmd_ablate(cfg: CliConfig) -> list[Path]:
    data, info = _load(cfg)
    result = pipeline.ablate(data, replace(cfg.ga, repair_enabled=True), cfg.repeats, cfg.ratios)
    summary = pipeline.ablation_summary(result)
    summary["dataset"] = info
    files = {
        "ablation.csv": pipeline.ablation_csv(result),
        "ablation.json": json.dumps(summary, indent=2, sort_keys=True) + "\n",
    }
    written = pipeline.write_outputs(cfg.out, files)
    for variant in ("CDGAFS", "GAFS"):
        s = summary[variant]
        print(f"{variant}: test accuracy {s['test_accuracy_mean']:.4f}, "
              f"mean pairwise similarity {s['mean_pairwise_similarity_mean']:.4f}")
    return written


def cmd_synth(args) -> list[Path]:
    d = make_redundant(args.groups, args.group_size, args.noise, args.patterns, args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    [path] = pipeline.write_outputs(args.out.parent, {args.out.name: csv_text(d)})
    print(f"wrote {path}: {d.n_patterns} patterns, {d.n_features} features")
    return [path]


def cmd_info(cfg: CliConfig) -> str:
    data, _ = _load(cfg)
    counts = data.class_counts()
    lines = [
        f"features: {data.n_features}, classes: {data.class_count}, patterns: {data.n_patterns}",
        f"missing: {data.missing_count}",
        "class counts: " + ", ".join(f"{name}={c}" for name, c in zip(data.class_names, counts)),
        f"search space: 2^{data.n_features} = {subset_count(data.n_features)}",
    ]
    text = "\n".join(lines)
    print(text)
    return text


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "synth":
            cmd_synth(args)
            return 0
        cfg = config_from_args(args)
        {"run": cmd_run, "ablate": cmd_ablate, "info": cmd_info}[cfg.command](cfg)
    except (CdgafsError, OSError) as exc:
        print(f"cdgafs: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
