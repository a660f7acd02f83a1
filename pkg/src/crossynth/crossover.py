"""Skeleton recombination: synthesize new characters from same-class pairs.

Pipeline per pair (L, R), both already thinned to skeletons:

1. Sweep a square grid of offsets, translating R over L. At each offset the
   exact pixel intersection of the two skeletons is clustered (8-connected);
   cluster centroids become crossing points. Oversized clusters mean the pair
   overlaps degenerately at that offset, which discards the offset.
2. Erase a small disk around every crossing point in each skeleton (R in its
   own frame, points translated back), splitting it into fragments; dust
   below the minimum fragment size is dropped.
3. Group each character's fragments into at most two structures by whether a
   fragment's centroid lies above or below the mean crossing height.
4. Recombine one structure of L with a different-index structure of R plus
   the crossing points themselves, dilate, and accept the composite only if
   it is a single connected component with foreground mass inside the size
   band relative to its parents and is not a bit-copy of either parent.

A pair contributes at most max_samples_per_pair accepted samples (offsets
tried most-crossing-points-first, nearest-first among ties), so a dataset
draws its variety from many pairs instead of exhausting each pair's
near-duplicate offset neighbors.

Every coordinate is (x, y) with y growing downward; offsets are (dx, dy)
applied to R relative to L's frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import raster
from .config import SynthConfig
from .dataset import LabeledSet

SOURCE_LEFT = "L"
SOURCE_RIGHT = "R"

REJECT_MULTI_COMPONENT = "multiple-components"
REJECT_MASS_BAND = "mass-band"
REJECT_SOURCE_COPY = "source-copy"


@dataclass(frozen=True)
class CrossingPointSet:
    """Crossing points for one pair at one offset, in L's frame."""

    offset: tuple[int, int]
    points: np.ndarray  # (k, 2) int, (x, y)
    cluster_sizes: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.points)

    def translated(self, offset: tuple[int, int]) -> np.ndarray:
        """The points shifted by offset (e.g. (-dx, -dy) to reach R's frame)."""
        return self.points + np.array([offset], dtype=int)


@dataclass(frozen=True)
class Fragment:
    pixels: np.ndarray  # (m, 2) int, (x, y) in the character's own frame
    source: str  # SOURCE_LEFT or SOURCE_RIGHT

    @property
    def centroid(self) -> tuple[float, float]:
        return (float(self.pixels[:, 0].mean()), float(self.pixels[:, 1].mean()))

    def __len__(self) -> int:
        return len(self.pixels)


@dataclass(frozen=True)
class StructureGroup:
    """A positional group of fragments from one character."""

    fragments: tuple[Fragment, ...]
    index: int  # 0 = above the mean crossing height (or the only group), 1 = below
    source: str
    mask: np.ndarray  # bool canvas, union of the member fragments

    def __len__(self) -> int:
        return len(self.fragments)


@dataclass(frozen=True)
class Provenance:
    left_id: int
    right_id: int
    offset: tuple[int, int]
    left_structure: int
    right_structure: int

    def to_dict(self) -> dict:
        return {
            "left_id": self.left_id,
            "right_id": self.right_id,
            "offset": list(self.offset),
            "left_structure": self.left_structure,
            "right_structure": self.right_structure,
        }


@dataclass(frozen=True)
class SynthSample:
    image: np.ndarray  # bool canvas, the dilated composite
    label: int
    provenance: Provenance | None = None


@dataclass(frozen=True)
class Rejection:
    reason: str


def offset_grid(sweep_radius: int, offset_step: int) -> list[tuple[int, int]]:
    """All (dx, dy) in the sweep square, ascending (dy, dx) order."""
    if sweep_radius < 0:
        raise ValueError(f"sweep_radius must be non-negative, got {sweep_radius}")
    if offset_step < 1:
        raise ValueError(f"offset_step must be positive, got {offset_step}")
    steps = range(-sweep_radius, sweep_radius + 1, offset_step)
    return [(dx, dy) for dy in steps for dx in steps]


def find_crossing_points(
    skel_l: np.ndarray,
    skel_r: np.ndarray,
    offset: tuple[int, int],
    max_cluster_size: int = 5,
) -> CrossingPointSet:
    """Cluster the pixel intersection of the aligned skeletons into points.

    Each 8-connected intersection cluster yields its centroid, rounded
    half-up per axis. Any cluster above max_cluster_size pixels discards the
    whole offset (the pair overlaps too much there): the result is empty.
    """
    _, inter = raster.overlay(skel_l, skel_r, offset)
    clusters = raster.connected_components(inter)
    empty = CrossingPointSet(tuple(offset), np.zeros((0, 2), dtype=int))
    if not clusters:
        return empty
    if any(len(c) > max_cluster_size for c in clusters):
        return empty
    points = np.array(
        [np.floor(c.mean(axis=0) + 0.5).astype(int) for c in clusters], dtype=int
    )
    return CrossingPointSet(tuple(offset), points, tuple(len(c) for c in clusters))


def sweep_offsets(
    skel_l: np.ndarray,
    skel_r: np.ndarray,
    cfg: SynthConfig = SynthConfig(),
) -> list[CrossingPointSet]:
    """Evaluate the offset grid, keeping offsets with enough crossing points."""
    kept = []
    for offset in offset_grid(cfg.sweep_radius, cfg.offset_step):
        crossings = find_crossing_points(skel_l, skel_r, offset, cfg.max_cluster_size)
        if len(crossings) >= cfg.min_crossing_points:
            kept.append(crossings)
    return kept


def _erase_disks(mask: np.ndarray, points: np.ndarray, radius: int) -> np.ndarray:
    out = mask.copy()
    h, w = out.shape
    r = int(radius)
    for x, y in points:
        y0, y1 = max(0, y - r), min(h, y + r + 1)
        x0, x1 = max(0, x - r), min(w, x + r + 1)
        if y0 >= y1 or x0 >= x1:
            continue
        yy, xx = np.ogrid[y0:y1, x0:x1]
        out[y0:y1, x0:x1] &= (xx - x) ** 2 + (yy - y) ** 2 > r * r
    return out


def split_at_crossings(
    skel: np.ndarray,
    points: np.ndarray,
    source: str,
    erase_radius: int = 1,
    min_fragment_size: int = 3,
) -> list[Fragment]:
    """Erase disks at the crossing points and return the surviving fragments.

    points are (k, 2) (x, y) in the skeleton's own frame (translate them
    before calling for the swept character). Fragments smaller than
    min_fragment_size pixels are dropped as dust.
    """
    erased = _erase_disks(np.asarray(skel, dtype=bool), np.asarray(points, dtype=int), erase_radius)
    return [
        Fragment(comp, source)
        for comp in raster.connected_components(erased)
        if len(comp) >= min_fragment_size
    ]


def _group_one_side(fragments: list[Fragment], mean_y: float, source: str, shape: tuple[int, int]) -> list[StructureGroup]:
    above = [f for f in fragments if f.centroid[1] < mean_y]
    below = [f for f in fragments if f.centroid[1] >= mean_y]
    groups = []
    for bucket in (above, below):
        if not bucket:
            continue
        mask = np.zeros(shape, dtype=bool)
        for frag in bucket:
            mask[frag.pixels[:, 1], frag.pixels[:, 0]] = True
        groups.append(StructureGroup(tuple(bucket), len(groups), source, mask))
    return groups


def group_structures(
    fragments_l: list[Fragment],
    fragments_r: list[Fragment],
    crossings: CrossingPointSet,
    shape: tuple[int, int],
) -> tuple[list[StructureGroup], list[StructureGroup]]:
    """Split each side's fragments at the mean crossing height.

    The mean is computed in L's frame and translated into R's. Fragment
    centroids strictly above the mean (y < mean) form structure 0, the rest
    structure 1; a side whose fragments all land in one bucket yields a
    single structure with index 0. Either side may come back empty when all
    its fragments were dust.
    """
    if len(crossings) == 0:
        raise ValueError("cannot group structures without crossing points")
    mean_y_l = float(crossings.points[:, 1].mean())
    mean_y_r = mean_y_l - crossings.offset[1]
    return (
        _group_one_side(fragments_l, mean_y_l, SOURCE_LEFT, shape),
        _group_one_side(fragments_r, mean_y_r, SOURCE_RIGHT, shape),
    )


def recombine(
    structure_l: StructureGroup,
    crossings: CrossingPointSet,
    structure_r: StructureGroup,
    *,
    label: int,
    source_masses: tuple[int, int],
    cfg: SynthConfig = SynthConfig(),
    provenance: Provenance | None = None,
    forbid_copies: tuple[np.ndarray, ...] = (),
) -> SynthSample | Rejection:
    """Compose one L structure, the crossing points, and one R structure.

    The R structure's mask is translated by the crossing offset into L's
    frame. The union is dilated and accepted only if it forms exactly one
    8-connected component, its mass lies inside cfg.size_band times the mean
    of source_masses (the parents' dilated-skeleton masses), and it is not
    pixel-identical to any mask in forbid_copies.
    """
    if structure_l.source != SOURCE_LEFT or structure_r.source != SOURCE_RIGHT:
        raise ValueError("recombine expects an L structure and an R structure")
    if structure_l.index == structure_r.index:
        raise ValueError("the two structures must have different indices")
    canvas = structure_l.mask | raster.shift_mask(structure_r.mask, crossings.offset, structure_l.mask.shape)
    h, w = canvas.shape
    for x, y in crossings.points:
        if 0 <= y < h and 0 <= x < w:
            canvas[y, x] = True
    image = raster.dilate(canvas, cfg.dilate_iterations)
    if raster.component_count(image) != 1:
        return Rejection(REJECT_MULTI_COMPONENT)
    mass = int(image.sum())
    reference = float(np.mean(source_masses))
    lo, hi = cfg.size_band
    if not lo * reference <= mass <= hi * reference:
        return Rejection(REJECT_MASS_BAND)
    for ref in forbid_copies:
        if np.array_equal(image, ref):
            return Rejection(REJECT_SOURCE_COPY)
    return SynthSample(image, int(label), provenance)


@dataclass
class SynthStats:
    target: int
    accepted: int = 0
    pairs_drawn: int = 0
    pairs_skipped_singleton_class: int = 0
    offsets_without_crossings: int = 0
    offsets_without_fragments: int = 0
    offsets_without_pairing: int = 0
    candidates: int = 0
    rejections: dict[str, int] = field(default_factory=dict)
    provenance: list[dict] | None = None

    @property
    def accept_rate(self) -> float:
        """Accepted samples per candidate composite (0 when nothing was tried)."""
        return self.accepted / self.candidates if self.candidates else 0.0

    @property
    def shortfall(self) -> int:
        return self.target - self.accepted

    def to_dict(self) -> dict:
        doc = {
            "target": self.target,
            "accepted": self.accepted,
            "shortfall": self.shortfall,
            "pairs_drawn": self.pairs_drawn,
            "pairs_skipped_singleton_class": self.pairs_skipped_singleton_class,
            "offsets_without_crossings": self.offsets_without_crossings,
            "offsets_without_fragments": self.offsets_without_fragments,
            "offsets_without_pairing": self.offsets_without_pairing,
            "candidates": self.candidates,
            "accept_rate": self.accept_rate,
            "rejections": dict(sorted(self.rejections.items())),
        }
        if self.provenance is not None:
            doc["provenance"] = self.provenance
        return doc


def _pair_samples(
    skel_l: np.ndarray,
    skel_r: np.ndarray,
    label: int,
    pair_ids: tuple[int, int],
    source_masses: tuple[int, int],
    dilated_l: np.ndarray,
    dilated_r: np.ndarray,
    cfg: SynthConfig,
    stats: SynthStats,
) -> list[SynthSample]:
    """All acceptance-passing composites for one ordered pair, in sweep order."""
    samples = []
    shape = skel_l.shape
    # candidate offsets are found up front, then consumed most crossing
    # points first: many transversal crossings mean well-aligned parents and
    # genuine structural interchange, while shallow one-point overlaps of
    # near-parallel strokes (prone to width-doubled composites) come last.
    # Ties prefer the nearest offset, then (dy, dx), for determinism.
    candidates = sweep_offsets(skel_l, skel_r, cfg)
    stats.offsets_without_crossings += (
        len(offset_grid(cfg.sweep_radius, cfg.offset_step)) - len(candidates)
    )
    for crossings in sorted(
        candidates,
        key=lambda cs: (
            -len(cs),
            cs.offset[0] * cs.offset[0] + cs.offset[1] * cs.offset[1],
            cs.offset[1],
            cs.offset[0],
        ),
    ):
        if len(samples) >= cfg.max_samples_per_pair:
            break
        offset = crossings.offset
        frags_l = split_at_crossings(
            skel_l, crossings.points, SOURCE_LEFT, cfg.erase_radius, cfg.min_fragment_size
        )
        frags_r = split_at_crossings(
            skel_r,
            crossings.translated((-offset[0], -offset[1])),
            SOURCE_RIGHT,
            cfg.erase_radius,
            cfg.min_fragment_size,
        )
        if not frags_l or not frags_r:
            stats.offsets_without_fragments += 1
            continue
        groups_l, groups_r = group_structures(frags_l, frags_r, crossings, shape)
        forbid_here = (dilated_l, dilated_r, raster.shift_mask(dilated_r, offset, shape))
        paired = False
        for struct_l in groups_l:
            for struct_r in groups_r:
                if struct_l.index == struct_r.index:
                    continue
                paired = True
                stats.candidates += 1
                result = recombine(
                    struct_l,
                    crossings,
                    struct_r,
                    label=label,
                    source_masses=source_masses,
                    cfg=cfg,
                    provenance=Provenance(
                        pair_ids[0], pair_ids[1], tuple(offset), struct_l.index, struct_r.index
                    ),
                    forbid_copies=forbid_here,
                )
                if isinstance(result, SynthSample):
                    samples.append(result)
                    if len(samples) >= cfg.max_samples_per_pair:
                        break
                else:
                    stats.rejections[result.reason] = stats.rejections.get(result.reason, 0) + 1
            if len(samples) >= cfg.max_samples_per_pair:
                break
        if not paired:
            stats.offsets_without_pairing += 1
    return samples


def synthesize_dataset(
    seed: LabeledSet,
    target: int,
    cfg: SynthConfig = SynthConfig(),
    rng_seed: int = 0,
    record_provenance: bool = False,
) -> tuple[LabeledSet, SynthStats]:
    """Draw same-class seed pairs and collect recombined characters.

    Pairs are drawn uniformly (left uniform over the seed set, right uniform
    over the other members of its class); each pair contributes its accepted
    samples in deterministic most-crossings-first offset order, capped at
    cfg.max_samples_per_pair, until target samples exist or
    cfg.max_attempts_factor * target pairs have been drawn.
    Deterministic per rng_seed; synthesized images are 0/255 uint8.
    """
    if target < 0:
        raise ValueError(f"target must be non-negative, got {target}")
    if len(seed) == 0:
        raise ValueError("cannot synthesize from an empty seed set")
    h, w = seed.images.shape[1:]
    stats = SynthStats(target=target, provenance=[] if record_provenance else None)

    skeletons: dict[int, np.ndarray] = {}
    masses: dict[int, int] = {}
    dilated: dict[int, np.ndarray] = {}

    def prepared(i: int) -> tuple[np.ndarray, int, np.ndarray]:
        if i not in skeletons:
            skeletons[i] = raster.thin(raster.binarize(seed.images[i], cfg.binarize_threshold))
            dilated[i] = raster.dilate(skeletons[i], cfg.dilate_iterations)
            masses[i] = int(dilated[i].sum())
        return skeletons[i], masses[i], dilated[i]

    pools = seed.class_indices()
    positions = np.zeros(len(seed), dtype=int)  # index of each sample inside its class pool
    for pool in pools:
        positions[pool] = np.arange(len(pool))

    rng = np.random.default_rng(rng_seed)
    images = np.zeros((target, h, w), dtype=np.uint8)
    labels = np.zeros(target, dtype=np.uint8)
    max_attempts = cfg.max_attempts_factor * target

    while stats.accepted < target and stats.pairs_drawn < max_attempts:
        stats.pairs_drawn += 1
        left = int(rng.integers(len(seed)))
        pool = pools[seed.labels[left]]
        if len(pool) < 2:
            stats.pairs_skipped_singleton_class += 1
            continue
        k = int(rng.integers(len(pool) - 1))
        if k >= positions[left]:
            k += 1
        right = int(pool[k])

        skel_l, mass_l, dil_l = prepared(left)
        skel_r, mass_r, dil_r = prepared(right)
        label = int(seed.labels[left])
        for sample in _pair_samples(
            skel_l, skel_r, label, (left, right), (mass_l, mass_r), dil_l, dil_r, cfg, stats
        ):
            images[stats.accepted] = sample.image.astype(np.uint8) * 255
            labels[stats.accepted] = sample.label
            if stats.provenance is not None and sample.provenance is not None:
                stats.provenance.append(sample.provenance.to_dict())
            stats.accepted += 1
            if stats.accepted >= target:
                break

    if stats.accepted < target:
        images = images[: stats.accepted]
        labels = labels[: stats.accepted]
    return LabeledSet(images, labels, provenance="synthetic-crossover"), stats
