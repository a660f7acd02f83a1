"""Benchmark harness: synth -> featurize -> train -> eval -> report.

A run takes an ExperimentConfig, synthesizes training sets at each target
size with the configured technique (or trains straight on the stratified
seed subset for technique "none"), trains the linear SVM on HOG features,
scores the untouched test set, and writes a report directory:

    report.csv          one row per cell, fixed column order
    report.json         full results, echoed config, published reference
                        errors, wall-clock timings
    errors_vs_size.png  error curves next to the published reference curves
    cells/<technique>-<size>/
        images.idx, labels.idx, synth-stats.json   (synthesizing techniques)
        model.json, eval.json                      (every cell)
        sheet.png                                  (when contact_sheets is on)

Every artifact except the timing values is deterministic per config.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .config import ExperimentConfig
from .crossover import synthesize_dataset
from .dataset import LabeledSet, load_labeled_set, select_seed, write_contact_sheet, write_idx
from .hog import hog_batch
from .svm import EvalReport, LinearModel, load_model, predict_batch, save_model, train_one_vs_all
from .tangent import sample_tangent_dataset

# Previously published test errors for this protocol (percent, by training-set
# size), recorded for context in every report. The original runs' exact
# parameters are unspecified, so these are reference points, not targets.
REFERENCE_ERRORS = {
    "tangent": {
        10000: 21.42, 20000: 16.22, 30000: 13.41,
        40000: 12.15, 50000: 12.7, 60000: 11.74,
    },
    "crossover": {
        10000: 10.66, 20000: 9.42, 30000: 9.07,
        40000: 8.5, 50000: 8.35, 60000: 8.06,
    },
    "none": {60000: 16.55},
}

REFERENCE_NOTE = (
    "Published errors for this protocol are recorded for context only: the "
    "original experiments' exact preprocessing, hyperparameters, and random "
    "draws are unspecified, so numeric agreement is not expected and these "
    "values are not assertion targets. This run's own numbers are reported "
    "alongside them."
)

CSV_COLUMNS = (
    "technique", "target-size", "achieved-size",
    "error-percent", "train-seconds", "synth-accept-rate",
)


@dataclass
class CellResult:
    technique: str
    target_size: int
    achieved_size: int
    eval_report: EvalReport
    train_seconds: float
    synth_accept_rate: float | None = None
    synth_stats: dict | None = None

    def csv_row(self) -> list[str]:
        rate = "" if self.synth_accept_rate is None else str(self.synth_accept_rate)
        return [
            self.technique,
            str(self.target_size),
            str(self.achieved_size),
            str(self.eval_report.error_percent),
            f"{self.train_seconds:.3f}",
            rate,
        ]

    def to_dict(self) -> dict:
        doc = {
            "technique": self.technique,
            "target_size": self.target_size,
            "achieved_size": self.achieved_size,
            "error_percent": self.eval_report.error_percent,
            "synth_accept_rate": self.synth_accept_rate,
            "confusion": self.eval_report.confusion.tolist(),
        }
        if self.synth_stats is not None:
            doc["synth_stats"] = self.synth_stats
        return doc


def _require_file(path: str, key: str, hint: str) -> Path:
    if not path:
        raise FileNotFoundError(f"config key {key!r} is empty; {hint}")
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{key} file not found: {p}; {hint}")
    return p


def load_train_set(cfg: ExperimentConfig) -> LabeledSet:
    hint = "supply the training IDX files (user-provided; see the README)"
    _require_file(cfg.train_images, "train_images", hint)
    _require_file(cfg.train_labels, "train_labels", hint)
    return load_labeled_set(cfg.train_images, cfg.train_labels, "train")


def load_test_set(cfg: ExperimentConfig) -> LabeledSet:
    hint = "supply the test IDX files (user-provided; see the README)"
    _require_file(cfg.test_images, "test_images", hint)
    _require_file(cfg.test_labels, "test_labels", hint)
    return load_labeled_set(cfg.test_images, cfg.test_labels, "test")


def cell_dir(out_dir, technique: str, size: int) -> Path:
    return Path(out_dir) / "cells" / f"{technique}-{size}"


def synthesize_cell(cfg: ExperimentConfig, seed: LabeledSet, technique: str, size: int) -> tuple[LabeledSet, dict]:
    """Produce one cell's training set plus its synthesis stats dict."""
    if technique == "crossover":
        synth, stats = synthesize_dataset(seed, size, cfg.synth, cfg.rng_seed)
        return synth, stats.to_dict()
    if technique == "tangent":
        synth = sample_tangent_dataset(seed, size, cfg.tangent, cfg.rng_seed)
        stats = {"target": size, "accepted": size, "shortfall": 0, "accept_rate": 1.0}
        return synth, stats
    raise ValueError(f"technique {technique!r} does not synthesize (expected crossover or tangent)")


def write_cell_synth(out: Path, synth: LabeledSet, stats: dict, contact_sheet: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_idx(synth, out / "images.idx", out / "labels.idx")
    with open(out / "synth-stats.json", "w") as fh:
        json.dump(stats, fh, indent=2)
        fh.write("\n")
    if contact_sheet and len(synth):
        head = LabeledSet(synth.images[:60], synth.labels[:60], synth.provenance)
        write_contact_sheet(head, out / "sheet.png", grid_cols=10)


def featurize(images: np.ndarray, cfg: ExperimentConfig) -> np.ndarray:
    """HOG descriptors as the benchmark sees them, in one raster domain.

    With featurize_binary on (the default), every image is thresholded to
    0/255 first, so binary synthesized characters and gray sources compare
    on stroke geometry rather than edge softness.
    """
    if cfg.featurize_binary:
        images = np.where(
            np.asarray(images) >= cfg.synth.binarize_threshold, 255, 0
        ).astype(np.uint8)
    return hog_batch(images, cfg.hog)


def train_cell(cfg: ExperimentConfig, train_set: LabeledSet) -> tuple[LinearModel, float]:
    features = featurize(train_set.images, cfg)
    start = time.perf_counter()
    model = train_one_vs_all(features, train_set.labels, cfg.svm)
    return model, time.perf_counter() - start


def evaluate_features(model: LinearModel, test_features: np.ndarray, test_labels: np.ndarray) -> EvalReport:
    pred = predict_batch(model, test_features)
    confusion = np.zeros((10, 10), dtype=np.int64)
    np.add.at(confusion, (test_labels.astype(np.int64), pred), 1)
    total = len(test_labels)
    errors = total - int(np.trace(confusion))
    return EvalReport(100.0 * errors / total, confusion, total)


def write_eval(report: EvalReport, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")


def run_cell(
    cfg: ExperimentConfig,
    seed: LabeledSet,
    technique: str,
    size: int | None,
    out_dir: Path,
    test_features: np.ndarray,
    test_labels: np.ndarray,
) -> CellResult:
    if technique == "none":
        train_set, stats, rate = seed, None, None
        target = len(seed)
    else:
        target = int(size)
        train_set, stats = synthesize_cell(cfg, seed, technique, target)
        rate = float(stats["accept_rate"])
    cdir = cell_dir(out_dir, technique, target)
    cdir.mkdir(parents=True, exist_ok=True)
    if stats is not None:
        write_cell_synth(cdir, train_set, stats, cfg.contact_sheets)
    model, seconds = train_cell(cfg, train_set)
    save_model(model, cdir / "model.json")
    eval_report = evaluate_features(model, test_features, test_labels)
    write_eval(eval_report, cdir / "eval.json")
    return CellResult(
        technique=technique,
        target_size=target,
        achieved_size=len(train_set),
        eval_report=eval_report,
        train_seconds=seconds,
        synth_accept_rate=rate,
        synth_stats=stats,
    )


def rows_to_csv_text(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def assemble_report(cfg: ExperimentConfig, cells: list[CellResult], total_seconds: float) -> dict:
    return {
        "config": cfg.to_dict(),
        "results": [c.to_dict() for c in cells],
        "reference": {"errors": REFERENCE_ERRORS, "note": REFERENCE_NOTE},
        "timings": {
            "total_seconds": total_seconds,
            "train_seconds": {f"{c.technique}-{c.target_size}": c.train_seconds for c in cells},
        },
    }


def write_report(cfg: ExperimentConfig, cells: list[CellResult], out_dir, total_seconds: float) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(rows_to_csv_text([c.csv_row() for c in cells]))
    report = assemble_report(cfg, cells, total_seconds)
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    curve_rows = [
        {"technique": c.technique, "size": c.achieved_size, "error": c.eval_report.error_percent}
        for c in cells
    ]
    render_error_figure(curve_rows, out / "errors_vs_size.png")
    return report


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run the configured technique over its target sizes and write the report."""
    train = load_train_set(cfg)
    test = load_test_set(cfg)
    out = Path(cfg.out_dir)
    start = time.perf_counter()
    seed = select_seed(train, cfg.seed_count, cfg.rng_seed)
    test_features = featurize(test.images, cfg)
    cells = []
    if cfg.technique == "none":
        cells.append(run_cell(cfg, seed, "none", None, out, test_features, test.labels))
    else:
        for size in cfg.target_sizes:
            cells.append(run_cell(cfg, seed, cfg.technique, size, out, test_features, test.labels))
    return write_report(cfg, cells, out, time.perf_counter() - start)


def merge_report_csvs(paths: list) -> list[dict]:
    """Merge partial report CSVs, keyed by (technique, target-size); last wins."""
    merged: dict[tuple[str, int], dict] = {}
    for path in paths:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(
                f"report CSV not found: {path}; produce it with the run subcommand"
            )
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
            if missing:
                raise ValueError(f"{path} lacks column(s): {', '.join(missing)}")
            for row in reader:
                merged[(row["technique"], int(row["target-size"]))] = row
    return [merged[key] for key in sorted(merged)]


def write_merged_report(rows: list[dict], out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(
        rows_to_csv_text([[row[c] for c in CSV_COLUMNS] for row in rows])
    )
    curve_rows = [
        {
            "technique": row["technique"],
            "size": int(row["achieved-size"]),
            "error": float(row["error-percent"]),
        }
        for row in rows
    ]
    render_error_figure(curve_rows, out / "errors_vs_size.png")


_TECHNIQUE_STYLE = {
    "crossover": ("tab:blue", "o"),
    "tangent": ("tab:orange", "s"),
    "none": ("tab:green", "D"),
}


def render_error_figure(rows: list[dict], path) -> None:
    """Error-vs-training-size curves, with the published reference curves dashed."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    by_technique: dict[str, list[tuple[int, float]]] = {}
    for row in rows:
        by_technique.setdefault(row["technique"], []).append((row["size"], row["error"]))
    for technique, pts in sorted(by_technique.items()):
        pts.sort()
        color, marker = _TECHNIQUE_STYLE.get(technique, ("tab:gray", "x"))
        xs, ys = zip(*pts)
        if len(xs) == 1:
            ax.axhline(ys[0], color=color, linewidth=1.2, alpha=0.8)
        ax.plot(xs, ys, color=color, marker=marker, label=f"{technique} (this run)")
    for technique, ref in REFERENCE_ERRORS.items():
        color, marker = _TECHNIQUE_STYLE[technique]
        xs, ys = zip(*sorted(ref.items()))
        if len(xs) == 1:
            ax.axhline(ys[0], color=color, linestyle="--", alpha=0.5,
                       label=f"{technique} (published)")
        else:
            ax.plot(xs, ys, color=color, marker=marker, linestyle="--", alpha=0.5,
                    markerfacecolor="none", label=f"{technique} (published)")
    ax.set_xlabel("training-set size")
    ax.set_ylabel("test error (%)")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
