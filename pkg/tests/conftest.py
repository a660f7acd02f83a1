from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from crossynth.dataset import LabeledSet

from synthetic_corpus import make_corpus

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def find_mnist() -> dict[str, Path] | None:
    """Locate user-supplied MNIST IDX files via MNIST_DIR or ./data."""
    candidates = []
    if os.environ.get("MNIST_DIR"):
        candidates.append(Path(os.environ["MNIST_DIR"]))
    candidates.append(Path(__file__).resolve().parent.parent / "data")
    for root in candidates:
        paths = {key: root / name for key, name in MNIST_FILES.items()}
        if all(p.exists() for p in paths.values()):
            return paths
    return None


@pytest.fixture(scope="session")
def mnist_paths():
    paths = find_mnist()
    if paths is None:
        pytest.skip(
            "MNIST IDX files not supplied; place the four standard files in "
            "./data or point MNIST_DIR at them (see README)"
        )
    return paths


@pytest.fixture(scope="session")
def tiny_corpus() -> LabeledSet:
    """80 glyphs, enough for fast end-to-end synthesis tests."""
    images, labels = make_corpus(80, rng_seed=7)
    return LabeledSet(images, labels, provenance="glyphs-80")


@pytest.fixture(scope="session")
def glyph_pair(tiny_corpus):
    """Two same-class glyph skeletons plus their class, for pipeline tests."""
    from crossynth.raster import binarize, thin

    idx = np.flatnonzero(tiny_corpus.labels == 3)[:2]
    skel_l = thin(binarize(tiny_corpus.images[idx[0]]))
    skel_r = thin(binarize(tiny_corpus.images[idx[1]]))
    return skel_l, skel_r


def random_blob(rng: np.random.Generator, size: int = 16) -> np.ndarray:
    """A random blobby mask: union of a few dilated random walks."""
    from crossynth.raster import dilate

    mask = np.zeros((size, size), dtype=bool)
    walks = rng.integers(1, 4)
    for _ in range(walks):
        y, x = rng.integers(2, size - 2, size=2)
        steps = rng.integers(4, size * 2)
        for _ in range(steps):
            mask[y, x] = True
            y = min(max(y + rng.integers(-1, 2), 0), size - 1)
            x = min(max(x + rng.integers(-1, 2), 0), size - 1)
    return dilate(mask, 1)


@pytest.fixture(scope="session")
def glyph_idx_dir(tmp_path_factory):
    """Glyph train/test splits written as IDX pairs, for harness tests."""
    from crossynth.dataset import write_idx

    root = tmp_path_factory.mktemp("glyph-idx")
    train_images, train_labels = make_corpus(120, rng_seed=21)
    test_images, test_labels = make_corpus(60, rng_seed=22)
    write_idx(
        LabeledSet(train_images, train_labels, "glyph-train"),
        root / "train-images.idx", root / "train-labels.idx",
    )
    write_idx(
        LabeledSet(test_images, test_labels, "glyph-test"),
        root / "test-images.idx", root / "test-labels.idx",
    )
    return root


def harness_config(idx_dir, out_dir, **overrides) -> dict:
    """A config dict wired to the glyph IDX fixture, small enough to run fast."""
    doc = {
        "train_images": str(idx_dir / "train-images.idx"),
        "train_labels": str(idx_dir / "train-labels.idx"),
        "test_images": str(idx_dir / "test-images.idx"),
        "test_labels": str(idx_dir / "test-labels.idx"),
        "out_dir": str(out_dir),
        "technique": "tangent",
        "seed_count": 40,
        "target_sizes": [80],
        "rng_seed": 5,
        "svm": {"epochs": 3},
    }
    doc.update(overrides)
    return doc
