"""IDX dataset handling: parsing, persistence, seed selection, contact sheets.

The IDX binary layout (the MNIST container format) is big-endian throughout:
image files carry magic 0x00000803 followed by item count, row count and
column count, then one byte per pixel; label files carry magic 0x00000801,
an item count, and one byte per label.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

N_CLASSES = 10


class IdxFormatError(ValueError):
    """A byte stream does not follow the IDX layout."""


@dataclass
class LabeledSet:
    """A stack of grayscale images with digit labels.

    images: (n, h, w) uint8, labels: (n,) uint8 with values in 0..9.
    provenance records where the set came from ("mnist-train", "seed",
    "synthetic", ...) and is echoed into reports.
    """

    images: np.ndarray
    labels: np.ndarray
    provenance: str = "unspecified"

    def __post_init__(self) -> None:
        self.images = np.asarray(self.images, dtype=np.uint8)
        self.labels = np.asarray(self.labels, dtype=np.uint8)
        if self.images.ndim != 3:
            raise ValueError(f"images must be (n, h, w), got shape {self.images.shape}")
        if self.labels.ndim != 1:
            raise ValueError(f"labels must be 1-d, got shape {self.labels.shape}")
        if len(self.images) != len(self.labels):
            raise ValueError(
                f"image/label count mismatch: {len(self.images)} images, "
                f"{len(self.labels)} labels"
            )
        if len(self.labels) and self.labels.max() >= N_CLASSES:
            bad = int(self.labels.max())
            raise ValueError(f"label {bad} out of range 0..{N_CLASSES - 1}")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def image_shape(self) -> tuple[int, int]:
        return (int(self.images.shape[1]), int(self.images.shape[2]))

    def class_indices(self) -> list[np.ndarray]:
        """Indices of each digit class, ascending, one array per class 0..9."""
        return [np.flatnonzero(self.labels == c) for c in range(N_CLASSES)]


def _as_stream(source) -> io.BufferedIOBase:
    if isinstance(source, (bytes, bytearray)):
        return io.BytesIO(source)
    return source


def _read_exact(stream, count: int, what: str) -> bytes:
    data = stream.read(count)
    if len(data) != count:
        raise IdxFormatError(
            f"truncated {what}: expected {count} bytes, found {len(data)}"
        )
    return data


def _read_payload(stream, count: int, what: str) -> bytes:
    data = _read_exact(stream, count, what)
    extra = stream.read(1)
    if extra:
        raise IdxFormatError(
            f"{what} longer than declared: expected exactly {count} bytes"
        )
    return data


def read_idx_images(source) -> np.ndarray:
    """Parse an IDX image stream (bytes or binary file object) to (n, h, w) uint8."""
    stream = _as_stream(source)
    magic, items, rows, cols = struct.unpack(">IIII", _read_exact(stream, 16, "image header"))
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(
            f"bad image magic: expected 0x{IMAGE_MAGIC:08x}, found 0x{magic:08x}"
        )
    payload = _read_payload(stream, items * rows * cols, "image payload")
    return np.frombuffer(payload, dtype=np.uint8).reshape(items, rows, cols).copy()


def read_idx_labels(source) -> np.ndarray:
    """Parse an IDX label stream to a (n,) uint8 array; labels must be 0..9."""
    stream = _as_stream(source)
    magic, items = struct.unpack(">II", _read_exact(stream, 8, "label header"))
    if magic != LABEL_MAGIC:
        raise IdxFormatError(
            f"bad label magic: expected 0x{LABEL_MAGIC:08x}, found 0x{magic:08x}"
        )
    payload = _read_payload(stream, items, "label payload")
    labels = np.frombuffer(payload, dtype=np.uint8).copy()
    if len(labels) and labels.max() >= N_CLASSES:
        raise IdxFormatError(f"label {int(labels.max())} out of range 0..{N_CLASSES - 1}")
    return labels


def load_labeled_set(image_path, label_path, provenance: str | None = None) -> LabeledSet:
    """Read a matching IDX image/label file pair into a LabeledSet."""
    image_path, label_path = Path(image_path), Path(label_path)
    for path, stage in ((image_path, "image"), (label_path, "label")):
        if not path.exists():
            raise FileNotFoundError(f"{stage} file not found: {path}")
    images = read_idx_images(image_path.read_bytes())
    labels = read_idx_labels(label_path.read_bytes())
    if len(images) != len(labels):
        raise IdxFormatError(
            f"image/label count mismatch: {len(images)} images in {image_path}, "
            f"{len(labels)} labels in {label_path}"
        )
    return LabeledSet(images, labels, provenance or image_path.stem)


def write_idx(dataset: LabeledSet, image_path, label_path) -> None:
    """Serialize a LabeledSet as an IDX image/label file pair (round-trip exact)."""
    n, h, w = dataset.images.shape
    image_path, label_path = Path(image_path), Path(label_path)
    image_path.parent.mkdir(parents=True, exist_ok=True)
    label_path.parent.mkdir(parents=True, exist_ok=True)
    with open(image_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, n, h, w))
        fh.write(dataset.images.tobytes())
    with open(label_path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, n))
        fh.write(dataset.labels.tobytes())


def select_seed(dataset: LabeledSet, n: int, rng_seed: int) -> LabeledSet:
    """Draw a stratified n-image seed subset, deterministic per rng_seed.

    Quotas are n // 10 per class, with one extra for classes 0..(n % 10 - 1).
    A class with fewer images than its quota contributes everything it has and
    the shortfall is redistributed over the remaining classes in class order.
    Output indices are sorted ascending, so the subset keeps dataset order.
    """
    if n < 0:
        raise ValueError(f"seed count must be non-negative, got {n}")
    if n > len(dataset):
        raise ValueError(f"seed count {n} exceeds dataset size {len(dataset)}")
    pools = dataset.class_indices()
    avail = np.array([len(p) for p in pools])
    quotas = np.array([n // N_CLASSES + (1 if c < n % N_CLASSES else 0) for c in range(N_CLASSES)])
    take = np.minimum(quotas, avail)
    shortfall = n - int(take.sum())
    for c in range(N_CLASSES):
        if shortfall == 0:
            break
        extra = min(shortfall, int(avail[c] - take[c]))
        take[c] += extra
        shortfall -= extra

    rng = np.random.default_rng(rng_seed)
    chosen = []
    for c in range(N_CLASSES):
        if take[c] > 0:
            chosen.append(rng.choice(pools[c], size=int(take[c]), replace=False))
    idx = np.sort(np.concatenate(chosen)) if chosen else np.zeros(0, dtype=int)
    h, w = dataset.images.shape[1:]
    images = dataset.images[idx] if len(idx) else np.zeros((0, h, w), dtype=np.uint8)
    return LabeledSet(images.copy(), dataset.labels[idx].copy(), provenance="seed")


def write_contact_sheet(dataset: LabeledSet, path, grid_cols: int = 10) -> None:
    """Tile the set's images into one PNG, left-to-right then top-to-bottom.

    Tiles are separated by 1-pixel lines at intensity 128; unused trailing
    cells stay background black.
    """
    if len(dataset) == 0:
        raise ValueError("cannot render a contact sheet for an empty set")
    if grid_cols < 1:
        raise ValueError(f"grid_cols must be positive, got {grid_cols}")
    n, h, w = dataset.images.shape
    rows = -(-n // grid_cols)
    canvas = np.zeros((rows * h + rows - 1, grid_cols * w + grid_cols - 1), dtype=np.uint8)
    for r in range(1, rows):
        canvas[r * (h + 1) - 1, :] = 128
    for c in range(1, grid_cols):
        canvas[:, c * (w + 1) - 1] = 128
    for i in range(n):
        r, c = divmod(i, grid_cols)
        canvas[r * (h + 1):r * (h + 1) + h, c * (w + 1):c * (w + 1) + w] = dataset.images[i]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(canvas, mode="L").save(path)
