"""Histogram-of-oriented-gradients features for small grayscale images.

Gradients are central differences on a replicate-padded image. Orientations
are unsigned (modulo 180 degrees) and votes are gradient magnitudes shared
linearly between the two nearest bin centers, wrapping around. Cell
histograms are grouped into 2x2-cell blocks at stride one cell and each
block is L2-normalized with an epsilon guard.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HogParams:
    cell_size: int = 4
    bins: int = 9
    block_cells: int = 2
    epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if self.cell_size < 1:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        if self.bins < 2:
            raise ValueError(f"bins must be at least 2, got {self.bins}")
        if self.block_cells < 1:
            raise ValueError(f"block_cells must be positive, got {self.block_cells}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


def _check_dims(h: int, w: int, params: HogParams) -> tuple[int, int]:
    cs = params.cell_size
    if h % cs or w % cs:
        raise ValueError(
            f"image dimensions ({h}, {w}) are not divisible by cell_size {cs}"
        )
    cells_y, cells_x = h // cs, w // cs
    if cells_y < params.block_cells or cells_x < params.block_cells:
        raise ValueError(
            f"cell grid ({cells_y}, {cells_x}) smaller than block of {params.block_cells}"
        )
    return cells_y, cells_x


def descriptor_length(image_shape: tuple[int, int], params: HogParams = HogParams()) -> int:
    cells_y, cells_x = _check_dims(image_shape[0], image_shape[1], params)
    blocks = (cells_y - params.block_cells + 1) * (cells_x - params.block_cells + 1)
    return blocks * params.block_cells ** 2 * params.bins


def _gradients(imgs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    imgs = imgs.astype(np.float64)
    padded = np.pad(imgs, ((0, 0), (1, 1), (1, 1)), mode="edge")
    gy = padded[:, 2:, 1:-1] - padded[:, :-2, 1:-1]
    gx = padded[:, 1:-1, 2:] - padded[:, 1:-1, :-2]
    return gx, gy


def cell_histograms(imgs: np.ndarray, params: HogParams = HogParams()) -> np.ndarray:
    """Unnormalized per-cell orientation histograms, (n, cells_y, cells_x, bins).

    Kept public because the histograms scale linearly with image intensity;
    normalization happens per block in hog_batch.
    """
    imgs = np.asarray(imgs)
    if imgs.ndim == 2:
        imgs = imgs[None]
    n, h, w = imgs.shape
    cells_y, cells_x = _check_dims(h, w, params)
    cs, nbins = params.cell_size, params.bins

    gx, gy = _gradients(imgs)
    mag = np.hypot(gx, gy)
    theta = np.degrees(np.arctan2(gy, gx)) % 180.0

    bin_width = 180.0 / nbins
    pos = theta / bin_width - 0.5
    low = np.floor(pos).astype(np.int64)
    frac = pos - low
    lo_bin = low % nbins
    hi_bin = (low + 1) % nbins

    cell_y = (np.arange(h) // cs)[None, :, None]
    cell_x = (np.arange(w) // cs)[None, None, :]
    img_idx = np.arange(n)[:, None, None]
    base = ((img_idx * cells_y + cell_y) * cells_x + cell_x) * nbins
    flat_lo = (base + lo_bin).ravel()
    flat_hi = (base + hi_bin).ravel()

    hist = np.zeros(n * cells_y * cells_x * nbins, dtype=np.float64)
    np.add.at(hist, flat_lo, (mag * (1.0 - frac)).ravel())
    np.add.at(hist, flat_hi, (mag * frac).ravel())
    return hist.reshape(n, cells_y, cells_x, nbins)


def _descriptors(hists: np.ndarray, params: HogParams) -> np.ndarray:
    n, cells_y, cells_x, nbins = hists.shape
    bc = params.block_cells
    by, bx = cells_y - bc + 1, cells_x - bc + 1
    windows = np.lib.stride_tricks.sliding_window_view(hists, (bc, bc), axis=(1, 2))
    # (n, by, bx, bins, bc, bc) -> (n, by, bx, bc, bc, bins)
    blocks = windows.transpose(0, 1, 2, 4, 5, 3).reshape(n, by, bx, bc * bc * nbins)
    norms = np.sqrt(np.sum(blocks * blocks, axis=-1, keepdims=True) + params.epsilon ** 2)
    return (blocks / norms).reshape(n, by * bx * bc * bc * nbins)


def hog_batch(imgs: np.ndarray, params: HogParams = HogParams(), chunk: int = 4096) -> np.ndarray:
    """Descriptors for a stack of images, (n, d) float64.

    Images are featurized in chunks to bound intermediate memory; results are
    independent of the chunk size (each image is processed alone).
    """
    imgs = np.asarray(imgs)
    if imgs.ndim == 2:
        imgs = imgs[None]
    n, h, w = imgs.shape
    d = descriptor_length((h, w), params)
    out = np.empty((n, d), dtype=np.float64)
    for start in range(0, n, chunk):
        part = imgs[start:start + chunk]
        out[start:start + len(part)] = _descriptors(cell_histograms(part, params), params)
    return out


def hog(img: np.ndarray, params: HogParams = HogParams()) -> np.ndarray:
    """Descriptor for a single image, (d,) float64."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-d image, got shape {img.shape}")
    return hog_batch(img[None], params)[0]
