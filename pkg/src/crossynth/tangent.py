"""Tangent-vector distortion baseline.

Eight tangent fields of the Gaussian-smoothed image span small geometric and
stroke-thickness perturbations: adding alpha * field approximates the smoothed
image under the corresponding transform to first order. Coordinates (u, v)
are centered on the image, gradients are central differences, and fields are
expressed in intensity units (the image is scaled to [0, 1] before smoothing
and the fields scaled back by 255).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

TANGENT_KINDS = (
    "scaling",
    "rotation",
    "x-translation",
    "y-translation",
    "parallel-hyperbolic",
    "diagonal-hyperbolic",
    "thickness",
    "modified-thickness",
)


@dataclass(frozen=True)
class TangentConfig:
    smoothing_sigma: float = 1.0
    alpha_max_geometric: float = 0.5
    alpha_max_thickness: float = 5.0

    def __post_init__(self) -> None:
        if self.smoothing_sigma <= 0:
            raise ValueError(f"smoothing_sigma must be positive, got {self.smoothing_sigma}")
        if self.alpha_max_geometric < 0 or self.alpha_max_thickness < 0:
            raise ValueError("alpha maxima must be non-negative")


def smoothed_intensity(img: np.ndarray, sigma: float) -> np.ndarray:
    """The Gaussian-smoothed image in intensity units (float64, 0..255 scale)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return ndimage.gaussian_filter(np.asarray(img, dtype=np.float64), sigma)


def centered_coords(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """(u, v) coordinate grids with the origin at the image center."""
    h, w = shape
    u = np.arange(w, dtype=np.float64) - (w - 1) / 2.0
    v = np.arange(h, dtype=np.float64) - (h - 1) / 2.0
    return np.broadcast_to(u, (h, w)).copy(), np.broadcast_to(v[:, None], (h, w)).copy()


def tangent_fields(img: np.ndarray, smoothing_sigma: float = 1.0) -> np.ndarray:
    """The eight tangent fields, stacked (8, h, w) in TANGENT_KINDS order."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-d image, got shape {img.shape}")
    smooth = smoothed_intensity(img, smoothing_sigma) / 255.0
    gy, gx = np.gradient(smooth)
    u, v = centered_coords(img.shape)
    fields = np.stack([
        u * gx + v * gy,
        v * gx - u * gy,
        gx,
        gy,
        u * gx - v * gy,
        v * gx + u * gy,
        gx * gx + gy * gy,
        np.hypot(gx, gy),
    ])
    return fields * 255.0


def apply_tangents(img: np.ndarray, coefficients: np.ndarray, fields: np.ndarray) -> np.ndarray:
    """img + sum_k alpha_k * field_k, rounded and clamped to uint8."""
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if coefficients.shape != (len(TANGENT_KINDS),):
        raise ValueError(f"expected {len(TANGENT_KINDS)} coefficients, got shape {coefficients.shape}")
    if fields.shape != (len(TANGENT_KINDS), *img.shape):
        raise ValueError(f"fields shape {fields.shape} does not match image {img.shape}")
    out = np.asarray(img, dtype=np.float64) + np.tensordot(coefficients, fields, axes=1)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def sample_tangent_dataset(seed, target: int, cfg: TangentConfig = TangentConfig(), rng_seed: int = 0):
    """Draw target distorted images from a seed set, deterministic per rng_seed.

    Each sample draws a seed image uniformly and the eight coefficients
    independently uniform in [-alpha_max, +alpha_max] (the geometric maximum
    for the six geometric fields, the thickness maximum for the two thickness
    fields). Fields are cached per seed image.
    """
    from .dataset import LabeledSet  # local import to keep module deps one-way

    if target < 0:
        raise ValueError(f"target must be non-negative, got {target}")
    if len(seed) == 0:
        raise ValueError("cannot sample from an empty seed set")
    alpha_max = np.array(
        [cfg.alpha_max_geometric] * 6 + [cfg.alpha_max_thickness] * 2
    )
    rng = np.random.default_rng(rng_seed)
    cache: dict[int, np.ndarray] = {}
    h, w = seed.images.shape[1:]
    images = np.zeros((target, h, w), dtype=np.uint8)
    labels = np.zeros(target, dtype=np.uint8)
    for k in range(target):
        i = int(rng.integers(len(seed)))
        if i not in cache:
            cache[i] = tangent_fields(seed.images[i], cfg.smoothing_sigma)
        coeffs = rng.uniform(-1.0, 1.0, size=len(TANGENT_KINDS)) * alpha_max
        images[k] = apply_tangents(seed.images[i], coeffs, cache[i])
        labels[k] = seed.labels[i]
    return LabeledSet(images, labels, provenance="synthetic-tangent")
