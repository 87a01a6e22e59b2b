"""End-to-end runs, repeat aggregation, ablation and report files."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from .dataset import DEFAULT_RATIOS, Dataset, prepare, split
from .ga import SCHEMA_VERSION, GaConfig, RunReport, run_cdgafs

TRACE_COLUMNS = ("iteration", "best_fitness", "best_validation_accuracy")


def run_once(data: Dataset, cfg: GaConfig, ratios=DEFAULT_RATIOS, threads=None) -> RunReport:
    """Impute, scale, split with ``cfg.seed`` and run the GA."""
    parts = split(prepare(data), ratios, cfg.seed)
    return run_cdgafs(cfg, parts, threads)


def run_repeats(data: Dataset, cfg: GaConfig, repeats: int = 1, ratios=DEFAULT_RATIOS,
                threads=None) -> list[RunReport]:
    return [run_once(data, replace(cfg, seed=cfg.seed + r), ratios, threads)
            for r in range(repeats)]


def format_mean_std(values, scale: float = 1.0) -> str:
    """``"mean (std)"`` with two decimals, std with ddof=1."""
    v = np.asarray(values, dtype=float) * scale
    std = v.std(ddof=1) if v.size > 1 else 0.0
    return f"{v.mean():.2f} ({std:.2f})"


def aggregate(reports: list[RunReport]) -> dict:
    acc = [r.test_accuracy for r in reports]
    size = [len(r.selected_features) for r in reports]
    return {
        "seeds": [r.config["seed"] for r in reports],
        "test_accuracy_mean": float(np.mean(acc)),
        "test_accuracy_std": float(np.std(acc, ddof=1)) if len(acc) > 1 else 0.0,
        "subset_size_mean": float(np.mean(size)),
        "subset_size_std": float(np.std(size, ddof=1)) if len(size) > 1 else 0.0,
        "test_accuracy_percent": format_mean_std(acc, 100.0),
        "subset_size": format_mean_std(size),
    }


def ablate(data: Dataset, cfg: GaConfig, repeats: int = 1, ratios=DEFAULT_RATIOS,
           threads=None) -> dict[str, list[RunReport]]:
    """Same seeds and data with and without the repair operator."""
    prepared = prepare(data)
    out = {"CDGAFS": [], "GAFS": []}
    for r in range(repeats):
        parts = split(prepared, ratios, cfg.seed + r)
        for variant, enabled in (("CDGAFS", True), ("GAFS", False)):
            run_cfg = replace(cfg, seed=cfg.seed + r, repair_enabled=enabled)
            out[variant].append(run_cdgafs(run_cfg, parts, threads))
    return out


def iterations_to_best(report: RunReport) -> int:
    """First iteration at which the final best fitness was reached."""
    final = report.trace[-1]["best_fitness"]
    return next(row["iteration"] for row in report.trace if row["best_fitness"] == final)


# --- file output -----------------------------------------------------------

def report_json(reports: list[RunReport], data_info: dict) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "dataset": data_info,
        "runs": [r.to_dict() for r in reports],
    }
    if len(reports) > 1:
        doc["aggregate"] = aggregate(reports)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def trace_csv(reports: list[RunReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    multi = len(reports) > 1
    writer.writerow((("seed",) if multi else ()) + TRACE_COLUMNS)
    for r in reports:
        for row in r.trace:
            values = [row[c] for c in TRACE_COLUMNS]
            writer.writerow(([r.config["seed"]] if multi else []) + [repr(v) if isinstance(v, float) else v for v in values])
    return buf.getvalue()


def ablation_csv(result: dict[str, list[RunReport]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("seed", "variant") + TRACE_COLUMNS)
    for variant, reports in result.items():
        for r in reports:
            for row in r.trace:
                writer.writerow([r.config["seed"], variant, row["iteration"],
                                 repr(row["best_fitness"]), repr(row["best_validation_accuracy"])])
    return buf.getvalue()


def ablation_summary(result: dict[str, list[RunReport]]) -> dict:
    summary = {}
    for variant, reports in result.items():
        sims = [r.mean_raw_similarity for r in reports]
        summary[variant] = {
            "seeds": [r.config["seed"] for r in reports],
            "test_accuracy": [r.test_accuracy for r in reports],
            "validation_accuracy": [r.validation_accuracy for r in reports],
            "subset_size": [len(r.selected_features) for r in reports],
            "mean_pairwise_similarity": sims,
            "iterations_to_best": [iterations_to_best(r) for r in reports],
            "test_accuracy_mean": float(np.mean([r.test_accuracy for r in reports])),
            "mean_pairwise_similarity_mean": float(np.mean(sims)),
        }
    return summary


def write_outputs(out_dir, files: dict[str, str]) -> list[Path]:
    """Write all ``files`` into ``out_dir`` or none of them.

    Each file goes to a temporary sibling first and is renamed into place
    only after every temporary has been written.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.")
            staged.append((Path(tmp), out_dir / name))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o644)
    except BaseException:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)
    return [final for _, final in staged]
