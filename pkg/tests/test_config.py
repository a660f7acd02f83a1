import json

import pytest

from crossynth.config import (
    DEFAULT_TARGET_SIZES,
    ConfigError,
    ExperimentConfig,
    SynthConfig,
    config_from_dict,
    load_config,
)
from crossynth.hog import HogParams
from crossynth.svm import SvmParams


class TestDefaults:
    def test_experiment_defaults(self):
        cfg = ExperimentConfig()
        assert cfg.technique == "crossover"
        assert cfg.seed_count == 1000
        assert cfg.target_sizes == DEFAULT_TARGET_SIZES
        assert cfg.rng_seed == 42
        assert cfg.synth == SynthConfig()
        assert cfg.hog == HogParams()
        assert cfg.svm == SvmParams()

    def test_synth_defaults(self):
        synth = SynthConfig()
        assert synth.binarize_threshold == 128
        assert synth.sweep_radius == 4
        assert synth.size_band == (0.5, 1.5)

    def test_to_dict_round_trips(self):
        cfg = ExperimentConfig(technique="tangent", seed_count=50)
        rebuilt = config_from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert rebuilt == cfg


class TestValidation:
    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown key.*typo_key"):
            config_from_dict({"typo_key": 1})

    def test_unknown_nested_key_names_the_section(self):
        with pytest.raises(ConfigError, match=r"config\.synth.*radius_sweep"):
            config_from_dict({"synth": {"radius_sweep": 2}})

    def test_bad_technique(self):
        with pytest.raises(ConfigError, match="technique"):
            config_from_dict({"technique": "mixup"})

    def test_bad_nested_value(self):
        with pytest.raises(ConfigError, match="binarize_threshold"):
            config_from_dict({"synth": {"binarize_threshold": 900}})

    def test_nested_must_be_object(self):
        with pytest.raises(ConfigError, match=r"config\.svm must be a JSON object"):
            config_from_dict({"svm": 3})

    def test_size_band_ordering(self):
        with pytest.raises(ConfigError, match="size_band"):
            SynthConfig(size_band=(1.5, 0.5))

    def test_target_sizes_positive(self):
        with pytest.raises(ConfigError, match="target_sizes"):
            config_from_dict({"target_sizes": [100, 0]})

    def test_seed_count_positive(self):
        with pytest.raises(ConfigError, match="seed_count"):
            ExperimentConfig(seed_count=0)

    def test_lists_become_tuples(self):
        cfg = config_from_dict({"target_sizes": [10, 20]})
        assert cfg.target_sizes == (10, 20)


class TestLoader:
    def test_load_json_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"technique": "none", "seed_count": 9}))
        cfg = load_config(path)
        assert cfg.technique == "none"
        assert cfg.seed_count == 9

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="config file"):
            load_config(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(path)

    def test_nested_sections_built(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({
            "synth": {"sweep_radius": 2},
            "svm": {"epochs": 5, "c": 2.0},
            "hog": {"cell_size": 7},
            "tangent": {"smoothing_sigma": 1.5},
        }))
        cfg = load_config(path)
        assert cfg.synth.sweep_radius == 2
        assert cfg.svm.epochs == 5
        assert cfg.svm.c == 2.0
        assert cfg.hog.cell_size == 7
        assert cfg.tangent.smoothing_sigma == 1.5
