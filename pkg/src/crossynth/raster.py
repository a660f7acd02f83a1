"""Binary raster primitives: binarize, thin, dilate, overlay, components.

Masks are 2-d bool arrays indexed [y, x]. Public point/offset arguments use
(x, y) order; offsets are (dx, dy) with y growing downward.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

_SQUARE3 = np.ones((3, 3), dtype=bool)


def binarize(img: np.ndarray, threshold: int = 128) -> np.ndarray:
    """Foreground = intensity >= threshold."""
    if not 0 <= threshold <= 255:
        raise ValueError(f"threshold must be in 0..255, got {threshold}")
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-d image, got shape {img.shape}")
    return img >= threshold


def dilate(mask: np.ndarray, iterations: int = 1) -> np.ndarray:
    """Morphological dilation by a 3x3 square, clipped at the border."""
    if iterations < 0:
        raise ValueError(f"iterations must be non-negative, got {iterations}")
    mask = np.asarray(mask, dtype=bool)
    if iterations == 0:
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=_SQUARE3, iterations=iterations)


def shift_mask(mask: np.ndarray, offset: tuple[int, int], out_shape: tuple[int, int] | None = None) -> np.ndarray:
    """Translate a mask by (dx, dy) onto a canvas, dropping out-of-bounds pixels."""
    mask = np.asarray(mask, dtype=bool)
    dx, dy = int(offset[0]), int(offset[1])
    h, w = mask.shape
    oh, ow = out_shape if out_shape is not None else (h, w)
    out = np.zeros((oh, ow), dtype=bool)
    y0, y1 = max(0, dy), min(oh, h + dy)
    x0, x1 = max(0, dx), min(ow, w + dx)
    if y0 < y1 and x0 < x1:
        out[y0:y1, x0:x1] = mask[y0 - dy:y1 - dy, x0 - dx:x1 - dx]
    return out


def overlay(base: np.ndarray, other: np.ndarray, offset: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Union and intersection of base with other translated by (dx, dy).

    Both results live on base's canvas; translated pixels falling outside
    it are dropped.
    """
    base = np.asarray(base, dtype=bool)
    shifted = shift_mask(other, offset, base.shape)
    return base | shifted, base & shifted


def connected_components(mask: np.ndarray) -> list[np.ndarray]:
    """8-connected components as (k, 2) int arrays of (x, y) pixel coordinates.

    Pixels within a component are sorted by (y, x); components are ordered by
    their smallest (y, x) member.
    """
    mask = np.asarray(mask, dtype=bool)
    labels, count = ndimage.label(mask, structure=_SQUARE3)
    comps = []
    for k in range(1, count + 1):
        yx = np.argwhere(labels == k)  # already sorted by (y, x)
        comps.append(np.ascontiguousarray(yx[:, ::-1]))
    comps.sort(key=lambda c: (int(c[0, 1]), int(c[0, 0])))
    return comps


def component_count(mask: np.ndarray) -> int:
    return int(ndimage.label(np.asarray(mask, dtype=bool), structure=_SQUARE3)[1])


# Thinning. Two-subiteration rule: a foreground pixel p with neighbors
# n, ne, e, se, s, sw, w, nw is deletable when its neighbor count B(p) is in
# [2, 6], the number of 0->1 transitions A(p) around the circular neighbor
# sequence is exactly 1, and the subiteration's two neighbor products vanish
# (pass 1: n*e*s = 0 and e*s*w = 0; pass 2: n*e*w = 0 and n*s*w = 0).
#
# Candidates are gathered from the subiteration's snapshot but deleted one at
# a time in raster order, re-verifying the conditions against the live image:
# batch deletion can erase an isolated 2x2 square entirely (all four pixels
# qualify simultaneously), which would change the component count.


def _subiteration_candidates(padded: np.ndarray, first: bool) -> np.ndarray:
    n = padded[:-2, 1:-1]
    ne = padded[:-2, 2:]
    e = padded[1:-1, 2:]
    se = padded[2:, 2:]
    s = padded[2:, 1:-1]
    sw = padded[2:, :-2]
    w = padded[1:-1, :-2]
    nw = padded[:-2, :-2]
    ring = np.stack([n, ne, e, se, s, sw, w, nw])
    b = ring.sum(axis=0)
    a = ((~ring) & np.roll(ring, -1, axis=0)).sum(axis=0)
    if first:
        prod = ~(n & e & s) & ~(e & s & w)
    else:
        prod = ~(n & e & w) & ~(n & s & w)
    return padded[1:-1, 1:-1] & (b >= 2) & (b <= 6) & (a == 1) & prod


def _still_deletable(padded: np.ndarray, y: int, x: int, first: bool) -> bool:
    n = padded[y - 1, x]
    ne = padded[y - 1, x + 1]
    e = padded[y, x + 1]
    se = padded[y + 1, x + 1]
    s = padded[y + 1, x]
    sw = padded[y + 1, x - 1]
    w = padded[y, x - 1]
    nw = padded[y - 1, x - 1]
    ring = (n, ne, e, se, s, sw, w, nw)
    b = sum(ring)
    if not 2 <= b <= 6:
        return False
    a = sum(1 for i in range(8) if not ring[i] and ring[(i + 1) % 8])
    if a != 1:
        return False
    if first:
        return not (n and e and s) and not (e and s and w)
    return not (n and e and w) and not (n and s and w)


def thin(mask: np.ndarray) -> np.ndarray:
    """Iteratively thin a mask to a 1-pixel-wide skeleton (fixpoint).

    The skeleton is a subset of the input, keeps the 8-connected component
    count, and is idempotent: a further pass deletes nothing.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError(f"expected a 2-d mask, got shape {mask.shape}")
    padded = np.pad(mask, 1)
    while True:
        deleted = 0
        for first in (True, False):
            for y, x in np.argwhere(_subiteration_candidates(padded, first)) + 1:
                if _still_deletable(padded, y, x, first):
                    padded[y, x] = False
                    deleted += 1
        if deleted == 0:
            return padded[1:-1, 1:-1].copy()
