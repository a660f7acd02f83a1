"""Command-line interface.

Subcommands mirror the pipeline stages so they can be chained by hand:

    crossynth run     --config cfg.json              full grid -> report dir
    crossynth synth   --config cfg.json --size N     one synthesized training set
    crossynth train   --config cfg.json --images I --labels L --model-out M
    crossynth eval    --config cfg.json --model M [--out eval.json]
    crossynth report  --out DIR report1.csv [report2.csv ...]
    crossynth inspect --images I [--labels L --digit D] --out sheet.png

Chaining synth, train, and eval with the same config reproduces the
corresponding run artifacts bit for bit (timings aside).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

from . import experiment
from .config import ConfigError, ExperimentConfig, load_config
from .dataset import IdxFormatError, LabeledSet, load_labeled_set, read_idx_images, select_seed, write_contact_sheet
from .svm import load_model, save_model, train_one_vs_all

import numpy as np


def _parse_sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"--sizes must be comma-separated integers, got {text!r}") from exc


def _load_config_with_overrides(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if not getattr(args, "has_overrides", False):
        return cfg
    updates = {}
    if getattr(args, "technique", None):
        updates["technique"] = args.technique
    if getattr(args, "sizes", None):
        updates["target_sizes"] = _parse_sizes(args.sizes)
    if getattr(args, "seed", None) is not None:
        updates["rng_seed"] = args.seed
    if getattr(args, "out", None):
        updates["out_dir"] = args.out
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _cmd_run(args) -> int:
    cfg = _load_config_with_overrides(args)
    report = experiment.run_experiment(cfg)
    print(f"report written to {Path(cfg.out_dir) / 'report.csv'}")
    for row in report["results"]:
        rate = row.get("synth_accept_rate")
        rate_text = f"  accept-rate {rate:.3f}" if rate is not None else ""
        print(
            f"{row['technique']:>9}  size {row['achieved_size']:>6}  "
            f"error {row['error_percent']:.2f}%{rate_text}"
        )
    return 0


def _cmd_synth(args) -> int:
    cfg = _load_config_with_overrides(args)
    technique = cfg.technique
    if technique == "none":
        raise ConfigError("technique 'none' synthesizes nothing; choose crossover or tangent")
    train = experiment.load_train_set(cfg)
    seed = select_seed(train, cfg.seed_count, cfg.rng_seed)
    synth, stats = experiment.synthesize_cell(cfg, seed, technique, args.size)
    out = experiment.cell_dir(cfg.out_dir, technique, args.size)
    experiment.write_cell_synth(out, synth, stats, cfg.contact_sheets)
    print(f"{len(synth)} samples written to {out} (target {args.size})")
    if stats.get("shortfall"):
        print(f"warning: fell short of target by {stats['shortfall']} samples")
    return 0


def _cmd_train(args) -> int:
    cfg = _load_config_with_overrides(args)
    for path, stage in ((args.images, "synth (images.idx)"), (args.labels, "synth (labels.idx)")):
        if not Path(path).exists():
            raise FileNotFoundError(
                f"training file not found: {path}; produce it with the {stage} subcommand "
                "or point at user-supplied IDX data"
            )
    train_set = load_labeled_set(args.images, args.labels, "train")
    start = time.perf_counter()
    model = train_one_vs_all(experiment.featurize(train_set.images, cfg), train_set.labels, cfg.svm)
    seconds = time.perf_counter() - start
    save_model(model, args.model_out)
    print(f"model trained on {len(train_set)} samples in {seconds:.1f}s -> {args.model_out}")
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_config_with_overrides(args)
    if not Path(args.model).exists():
        raise FileNotFoundError(
            f"model file not found: {args.model}; produce it with the train subcommand"
        )
    model = load_model(args.model)
    test = experiment.load_test_set(cfg)
    report = experiment.evaluate_features(
        model, experiment.featurize(test.images, cfg), test.labels
    )
    if args.out:
        experiment.write_eval(report, Path(args.out))
        print(f"eval report written to {args.out}")
    print(f"test error {report.error_percent:.2f}% on {report.total} samples")
    return 0


def _cmd_report(args) -> int:
    rows = experiment.merge_report_csvs(args.csvs)
    experiment.write_merged_report(rows, args.out)
    print(f"merged {len(rows)} row(s) into {Path(args.out) / 'report.csv'}")
    return 0


def _cmd_inspect(args) -> int:
    if not Path(args.images).exists():
        raise FileNotFoundError(
            f"image file not found: {args.images}; produce one with the synth subcommand"
        )
    images = read_idx_images(Path(args.images).read_bytes())
    if args.digit is not None and not args.labels:
        raise ConfigError("--digit filtering needs --labels")
    if args.labels:
        dataset = load_labeled_set(args.images, args.labels, "inspect")
        if args.digit is not None:
            keep = dataset.labels == args.digit
            dataset = LabeledSet(dataset.images[keep], dataset.labels[keep], "inspect")
    else:
        dataset = LabeledSet(images, np.zeros(len(images), dtype=np.uint8), "inspect")
    if len(dataset) == 0:
        raise ValueError("nothing to inspect after filtering")
    head = LabeledSet(dataset.images[: args.limit], dataset.labels[: args.limit], "inspect")
    write_contact_sheet(head, args.out, grid_cols=args.cols)
    print(f"contact sheet of {len(head)} image(s) written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossynth",
        description="Skeleton-recombination data synthesis and its benchmark harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p, with_overrides=True):
        p.add_argument("--config", required=True, help="experiment config JSON")
        if with_overrides:
            p.set_defaults(has_overrides=True)
            p.add_argument("--technique", choices=("crossover", "tangent", "none"))
            p.add_argument("--sizes", help="comma-separated target sizes override")
            p.add_argument("--seed", type=int, help="rng seed override")
            p.add_argument("--out", help="output directory override")

    p = sub.add_parser("run", help="full synth/train/eval grid plus report")
    add_config(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("synth", help="synthesize one training set")
    add_config(p)
    p.add_argument("--size", type=int, required=True, help="target sample count")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train the SVM on an IDX image/label pair")
    add_config(p, with_overrides=False)
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--model-out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="score a trained model on the test set")
    add_config(p, with_overrides=False)
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="write the eval report JSON here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("report", help="merge report CSVs and render the figure")
    p.add_argument("csvs", nargs="+", metavar="CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("inspect", help="render a contact sheet from an IDX file")
    p.add_argument("--images", required=True)
    p.add_argument("--labels")
    p.add_argument("--digit", type=int, choices=range(10))
    p.add_argument("--out", required=True)
    p.add_argument("--cols", type=int, default=10)
    p.add_argument("--limit", type=int, default=60)
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, IdxFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
