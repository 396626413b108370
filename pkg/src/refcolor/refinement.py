"""Reference refinement: per-segment nearest-neighbor candidate selection,
composed-reference assembly, and user substitutions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import color
from .descriptors import FeatureGrid, builtin_descriptor, distance, pool_segment, _descriptor_from_planes
from .imaging import sobel_gradients
from .segmentation import SegmentMap

MIN_SEGMENT_PIXELS = 4


@dataclass(frozen=True)
class CandidateSet:
    """N color candidates in Lab, all matching the input dimensions."""

    candidates: list[np.ndarray]  # (H, W, 3) Lab each
    ids: list[str]
    feature_grids: list[FeatureGrid | None] = field(default_factory=list)

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("candidate set is empty")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("candidate ids must be unique")
        shape = self.candidates[0].shape
        for cid, c in zip(self.ids, self.candidates):
            if c.shape != shape:
                raise ValueError(f"candidate {cid!r} has shape {c.shape}, expected {shape}")
        if not self.feature_grids:
            object.__setattr__(self, "feature_grids", [None] * len(self.candidates))

    @property
    def n(self) -> int:
        return len(self.candidates)

    @property
    def shape(self) -> tuple[int, int]:
        return self.candidates[0].shape[:2]

    def index_of(self, cid: str) -> int:
        try:
            return self.ids.index(cid)
        except ValueError:
            raise KeyError(f"unknown candidate id {cid!r}") from None


@dataclass(frozen=True)
class Assignment:
    """Per-segment source choice: candidate index or Lab user patch."""

    choices: tuple

    def __post_init__(self):
        for c in self.choices:
            if not isinstance(c, (int, np.integer, np.ndarray)):
                raise TypeError(f"invalid assignment entry {type(c)}")

    def __len__(self) -> int:
        return len(self.choices)


@dataclass(frozen=True)
class ComposedReference:
    image: np.ndarray  # (H, W, 3) Lab
    assignment: Assignment


def _segment_descriptors(gray: np.ndarray, cands: CandidateSet, seg: SegmentMap,
                         gray_grid: FeatureGrid | None):
    """Descriptor table: (gray_desc[j], cand_desc[i][j]).

    Uses externally supplied feature grids when present for the input and
    every candidate; otherwise the built-in luminance descriptor.
    """
    use_grids = gray_grid is not None and all(g is not None for g in cands.feature_grids)
    if use_grids:
        gray_d = [pool_segment(gray_grid, seg, j) for j in range(seg.count)]
        cand_d = [
            [pool_segment(g, seg, j) for j in range(seg.count)] for g in cands.feature_grids
        ]
        return gray_d, cand_d

    planes = [(gray, *sobel_gradients(gray))]
    for c in cands.candidates:
        lum = c[..., 0] / 100.0
        planes.append((lum, *sobel_gradients(lum)))
    masks = [seg.mask(j) for j in range(seg.count)]
    table = []
    for img, gx, gy, mag in planes:
        table.append([_descriptor_from_planes(img, gx, gy, mag, m) for m in masks])
    return table[0], table[1:]


def select_assignment(gray: np.ndarray, cands: CandidateSet, seg: SegmentMap,
                      metric: str = "cosine",
                      gray_grid: FeatureGrid | None = None) -> Assignment:
    """Choose, per segment, the candidate whose masked descriptor is nearest
    to the input's. Ties break toward the lowest candidate index.

    Segments smaller than MIN_SEGMENT_PIXELS inherit the choice of their
    largest neighboring segment.
    """
    if cands.shape != gray.shape:
        raise ValueError(f"candidate shape {cands.shape} does not match input {gray.shape}")
    gray_d, cand_d = _segment_descriptors(gray, cands, seg, gray_grid)
    sizes = seg.sizes()
    choices: list[int | None] = [None] * seg.count
    for j in range(seg.count):
        if sizes[j] < MIN_SEGMENT_PIXELS:
            continue
        dists = [distance(metric, gray_d[j], cand_d[i][j]) for i in range(cands.n)]
        choices[j] = int(np.argmin(dists))
    for j in range(seg.count):
        if choices[j] is None:
            choices[j] = choices[_largest_neighbor(seg, j, sizes)] or 0
    return Assignment(tuple(choices))


def _largest_neighbor(seg: SegmentMap, j: int, sizes: np.ndarray) -> int:
    from scipy import ndimage

    ring = ndimage.binary_dilation(seg.mask(j)) & ~seg.mask(j)
    neighbors = np.unique(seg.labels[ring])
    neighbors = neighbors[(neighbors != j) & (sizes[neighbors] >= MIN_SEGMENT_PIXELS)]
    if neighbors.size == 0:
        others = np.array([k for k in range(seg.count) if k != j and sizes[k] >= MIN_SEGMENT_PIXELS])
        if others.size == 0:
            return j
        neighbors = others
    return int(neighbors[np.argmax(sizes[neighbors])])


def compose_reference(cands: CandidateSet, seg: SegmentMap, assign: Assignment) -> ComposedReference:
    """Pixel-exact per-segment union of the assigned sources."""
    if len(assign) != seg.count:
        raise ValueError(f"assignment covers {len(assign)} segments, need {seg.count}")
    out = np.zeros(cands.candidates[0].shape)
    for j, choice in enumerate(assign.choices):
        mask = seg.mask(j)
        src = cands.candidates[int(choice)] if isinstance(choice, (int, np.integer)) else choice
        if src.shape != out.shape:
            raise ValueError(f"patch for segment {j} has shape {src.shape}, expected {out.shape}")
        out[mask] = src[mask]
    return ComposedReference(image=out, assignment=assign)


def apply_substitution(assign: Assignment, j: int, source, n_candidates: int,
                       image_shape: tuple[int, int] | None = None) -> Assignment:
    """Return a new Assignment with entry j replaced; the input is unchanged."""
    if not 0 <= j < len(assign):
        raise IndexError(f"segment index {j} out of range [0, {len(assign)})")
    if isinstance(source, (int, np.integer)):
        if not 0 <= source < n_candidates:
            raise IndexError(f"candidate index {source} out of range [0, {n_candidates})")
        source = int(source)
    else:
        source = np.asarray(source, dtype=np.float64)
        if image_shape is not None and source.shape[:2] != image_shape:
            raise ValueError(f"patch shape {source.shape[:2]} does not match image {image_shape}")
    choices = list(assign.choices)
    choices[j] = source
    return Assignment(tuple(choices))


def assignment_to_json(assign: Assignment, patch_dir: Path | None = None) -> dict:
    """Serialize; user patches are written as PNGs next to the JSON."""
    segments = []
    for j, choice in enumerate(assign.choices):
        if isinstance(choice, (int, np.integer)):
            segments.append({"j": j, "source": {"candidate": int(choice)}})
        else:
            name = f"patch_{j}.png"
            if patch_dir is not None:
                color.write_rgb(Path(patch_dir) / name, color.lab_to_rgb(choice))
            segments.append({"j": j, "source": {"patch": name}})
    return {"segments": segments}


def assignment_from_json(doc: dict, patch_dir: Path | None = None) -> Assignment:
    entries = sorted(doc["segments"], key=lambda e: e["j"])
    choices = []
    for e in entries:
        src = e["source"]
        if "candidate" in src:
            choices.append(int(src["candidate"]))
        else:
            if patch_dir is None:
                raise ValueError("patch entries require a patch directory")
            choices.append(color.rgb_to_lab(color.read_rgb(Path(patch_dir) / src["patch"])))
    return Assignment(tuple(choices))


def save_assignment(path, assign: Assignment) -> None:
    path = Path(path)
    doc = assignment_to_json(assign, patch_dir=path.parent)
    path.write_text(json.dumps(doc, indent=2))


def load_assignment(path) -> Assignment:
    path = Path(path)
    return assignment_from_json(json.loads(path.read_text()), patch_dir=path.parent)
