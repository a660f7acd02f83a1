"""Configuration dataclasses and the JSON config loader.

An experiment config is a JSON object with flat scalar keys plus four nested
objects ("synth", "tangent", "hog", "svm"); every key is optional except the
dataset paths, which the stages validate when they actually need them. The
full config is echoed into every report.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path

from .hog import HogParams
from .svm import SvmParams
from .tangent import TangentConfig

TECHNIQUES = ("crossover", "tangent", "none")

DEFAULT_TARGET_SIZES = (10000, 20000, 30000, 40000, 50000, 60000)


class ConfigError(ValueError):
    """A config document failed validation."""


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for the skeleton-recombination synthesizer."""

    binarize_threshold: int = 128
    sweep_radius: int = 4
    offset_step: int = 2
    min_crossing_points: int = 1
    max_cluster_size: int = 5
    erase_radius: int = 1
    min_fragment_size: int = 3
    dilate_iterations: int = 1
    size_band: tuple[float, float] = (0.5, 1.5)
    max_samples_per_pair: int = 4
    max_attempts_factor: int = 50

    def __post_init__(self) -> None:
        if not 0 <= self.binarize_threshold <= 255:
            raise ConfigError(f"binarize_threshold must be in 0..255, got {self.binarize_threshold}")
        if self.sweep_radius < 0:
            raise ConfigError(f"sweep_radius must be non-negative, got {self.sweep_radius}")
        if self.offset_step < 1:
            raise ConfigError(f"offset_step must be positive, got {self.offset_step}")
        if self.min_crossing_points < 1:
            raise ConfigError(f"min_crossing_points must be positive, got {self.min_crossing_points}")
        if self.max_cluster_size < 1:
            raise ConfigError(f"max_cluster_size must be positive, got {self.max_cluster_size}")
        if self.erase_radius < 0:
            raise ConfigError(f"erase_radius must be non-negative, got {self.erase_radius}")
        if self.min_fragment_size < 1:
            raise ConfigError(f"min_fragment_size must be positive, got {self.min_fragment_size}")
        if self.dilate_iterations < 0:
            raise ConfigError(f"dilate_iterations must be non-negative, got {self.dilate_iterations}")
        object.__setattr__(self, "size_band", tuple(float(v) for v in self.size_band))
        lo, hi = self.size_band
        if not 0 <= lo <= hi:
            raise ConfigError(f"size_band must satisfy 0 <= low <= high, got {self.size_band}")
        if self.max_samples_per_pair < 1:
            raise ConfigError(
                f"max_samples_per_pair must be positive, got {self.max_samples_per_pair}"
            )
        if self.max_attempts_factor < 1:
            raise ConfigError(f"max_attempts_factor must be positive, got {self.max_attempts_factor}")


@dataclass(frozen=True)
class ExperimentConfig:
    """The harness config.

    featurize_binary thresholds every image entering the featurizer (at the
    synth binarize threshold), so gray-space technique outputs, binary
    synthesized characters, and the raw test set all reach the classifier in
    one raster domain.
    """

    train_images: str = ""
    train_labels: str = ""
    test_images: str = ""
    test_labels: str = ""
    out_dir: str = "runs/experiment"
    technique: str = "crossover"
    seed_count: int = 1000
    target_sizes: tuple[int, ...] = DEFAULT_TARGET_SIZES
    rng_seed: int = 42
    contact_sheets: bool = False
    featurize_binary: bool = True
    synth: SynthConfig = field(default_factory=SynthConfig)
    tangent: TangentConfig = field(default_factory=TangentConfig)
    hog: HogParams = field(default_factory=HogParams)
    svm: SvmParams = field(default_factory=SvmParams)

    def __post_init__(self) -> None:
        if self.technique not in TECHNIQUES:
            raise ConfigError(
                f"technique must be one of {', '.join(TECHNIQUES)}, got {self.technique!r}"
            )
        if self.seed_count < 1:
            raise ConfigError(f"seed_count must be positive, got {self.seed_count}")
        object.__setattr__(self, "target_sizes", tuple(int(v) for v in self.target_sizes))
        if any(v < 1 for v in self.target_sizes):
            raise ConfigError(f"target_sizes must all be positive, got {self.target_sizes}")

    def to_dict(self) -> dict:
        return asdict(self)


_NESTED = {
    "synth": SynthConfig,
    "tangent": TangentConfig,
    "hog": HogParams,
    "svm": SvmParams,
}


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    kwargs = {}
    for name, value in data.items():
        if name in _NESTED and cls is ExperimentConfig:
            kwargs[name] = _build(_NESTED[name], value, f"{where}.{name}")
        else:
            kwargs[name] = tuple(value) if isinstance(value, list) else value
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {where}: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    return _build(ExperimentConfig, data, "config")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)
