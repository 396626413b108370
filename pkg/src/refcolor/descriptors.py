"""Per-segment feature descriptors and distances.

The built-in descriptor is a 40-dim luminance + gradient-orientation
histogram; externally computed dense feature grids can be loaded from the
FGRD binary format and pooled per segment.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .imaging import sobel_gradients
from .segmentation import SegmentMap

LUM_BINS = 32
ORI_BINS = 8
DESCRIPTOR_DIM = LUM_BINS + ORI_BINS

_FGRD_MAGIC = b"FGRD"


class FeatureGridError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureGrid:
    """Dense descriptor grid: (gh, gw, dim) cell vectors, cell_size pixels each."""

    data: np.ndarray
    cell_size: int

    @property
    def gh(self) -> int:
        return self.data.shape[0]

    @property
    def gw(self) -> int:
        return self.data.shape[1]

    @property
    def dim(self) -> int:
        return self.data.shape[2]


def builtin_descriptor(img: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Luminance + gradient-orientation histogram over the masked region.

    32 luminance bins over [0,1] concatenated with 8 orientation bins
    weighted by Sobel magnitude; each block L1-normalized, the whole
    vector L2-normalized. dim = 40.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("descriptor mask is empty")
    img = np.asarray(img, dtype=np.float64)
    gx, gy, mag = sobel_gradients(img)
    return _descriptor_from_planes(img, gx, gy, mag, mask)


def _descriptor_from_planes(img, gx, gy, mag, mask) -> np.ndarray:
    vals = img[mask]
    lum = np.bincount(
        np.minimum((vals * LUM_BINS).astype(int), LUM_BINS - 1), minlength=LUM_BINS
    ).astype(np.float64)
    angle = np.mod(np.arctan2(gy[mask], gx[mask]), np.pi)
    bins = np.minimum((angle / np.pi * ORI_BINS).astype(int), ORI_BINS - 1)
    ori = np.bincount(bins, weights=mag[mask], minlength=ORI_BINS)
    if lum.sum() > 0:
        lum = lum / lum.sum()
    if ori.sum() > 0:
        ori = ori / ori.sum()
    vec = np.concatenate([lum, ori])
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


def load_feature_grid(path) -> FeatureGrid:
    """Load the FGRD binary format.

    Layout: magic 'FGRD', then gw, gh, dim, cell_size as little-endian
    uint32, then gw*gh*dim little-endian float32, row-major, dim fastest.
    """
    raw = Path(path).read_bytes()
    if len(raw) < 20 or raw[:4] != _FGRD_MAGIC:
        raise FeatureGridError(f"bad magic in feature grid {path}")
    gw, gh, dim, cell_size = struct.unpack("<4I", raw[4:20])
    expected = gw * gh * dim * 4
    payload = raw[20:]
    if len(payload) != expected:
        raise FeatureGridError(
            f"feature grid {path}: expected {expected} payload bytes, got {len(payload)}"
        )
    if dim < 1 or gw < 1 or gh < 1 or cell_size < 1:
        raise FeatureGridError(f"feature grid {path}: degenerate header")
    data = np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(gh, gw, dim)
    return FeatureGrid(data=data, cell_size=cell_size)


def save_feature_grid(path, grid: FeatureGrid) -> None:
    header = _FGRD_MAGIC + struct.pack("<4I", grid.gw, grid.gh, grid.dim, grid.cell_size)
    Path(path).write_bytes(header + grid.data.astype("<f4").tobytes())


def pool_segment(grid: FeatureGrid, seg: SegmentMap, j: int) -> np.ndarray:
    """Mean of cell vectors whose center lies in segment j.

    Falls back to the cell containing the segment centroid when no cell
    center lands inside the segment.
    """
    mask = seg.mask(j)
    cs = grid.cell_size
    vecs = []
    for cy in range(grid.gh):
        for cx in range(grid.gw):
            py = cy * cs + cs // 2
            px = cx * cs + cs // 2
            if py < seg.height and px < seg.width and mask[py, px]:
                vecs.append(grid.data[cy, cx])
    if not vecs:
        ys, xs = np.nonzero(mask)
        py, px = int(ys.mean()), int(xs.mean())
        vecs.append(grid.data[min(py // cs, grid.gh - 1), min(px // cs, grid.gw - 1)])
    return np.mean(vecs, axis=0)


def distance(metric: str, d1: np.ndarray, d2: np.ndarray) -> float:
    """L1 / L2 / cosine distance between two descriptors."""
    d1 = np.asarray(d1, dtype=np.float64)
    d2 = np.asarray(d2, dtype=np.float64)
    if d1.shape != d2.shape:
        raise ValueError(f"descriptor dims differ: {d1.shape} vs {d2.shape}")
    if metric == "L1":
        return float(np.abs(d1 - d2).sum())
    if metric == "L2":
        return float(np.linalg.norm(d1 - d2))
    if metric == "cosine":
        n1, n2 = np.linalg.norm(d1), np.linalg.norm(d2)
        if n1 == 0 and n2 == 0:
            return 0.0
        if n1 == 0 or n2 == 0:
            return 1.0
        return float(1.0 - np.dot(d1, d2) / (n1 * n2))
    raise ValueError(f"unknown metric {metric!r}; expected L1, L2, or cosine")
