"""Segment partitions of the grayscale input: ingestion of external label
maps and a built-in luminance-only SLIC fallback."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .imaging import resize_nearest


class SegmentMapError(ValueError):
    pass


@dataclass(frozen=True)
class SegmentMap:
    """Full partition of an image into contiguously labeled segments."""

    labels: np.ndarray  # (H, W) int32, values in {0, ..., count-1}
    count: int

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    def mask(self, j: int) -> np.ndarray:
        """Boolean mask of segment j."""
        if not 0 <= j < self.count:
            raise IndexError(f"segment index {j} out of range [0, {self.count})")
        return self.labels == j

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.count)


def segment_mask(seg: SegmentMap, j: int) -> np.ndarray:
    return seg.mask(j)


def from_labels(labels: np.ndarray) -> SegmentMap:
    """Build a SegmentMap, relabeling arbitrary labels to {0..N_S-1}."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise SegmentMapError("empty label map")
    if not np.issubdtype(labels.dtype, np.integer):
        raise SegmentMapError(f"labels must be integers, got dtype {labels.dtype}")
    uniq, dense = np.unique(labels, return_inverse=True)
    return SegmentMap(dense.reshape(labels.shape).astype(np.int32), count=len(uniq))


def load_segment_map(path, expected_size: tuple[int, int] | None = None) -> SegmentMap:
    """Load a segment map from a 16-bit label PNG or RLE JSON.

    expected_size is (width, height); smaller or larger maps are resampled
    with nearest-neighbor interpolation.
    """
    path = Path(path)
    if not path.exists():
        raise SegmentMapError(f"segment map not found: {path}")
    if path.suffix.lower() == ".json":
        labels = _labels_from_json(path)
    else:
        try:
            with Image.open(path) as im:
                labels = np.asarray(im)
        except Exception as exc:
            raise SegmentMapError(f"cannot parse segment map {path}: {exc}") from exc
    if labels.ndim != 2:
        raise SegmentMapError(f"segment map must be single-channel, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        raise SegmentMapError(f"segment map has non-integer labels ({labels.dtype})")
    if expected_size is not None:
        w, h = expected_size
        labels = resize_nearest(labels, w, h)
    return from_labels(labels)


def _labels_from_json(path: Path) -> np.ndarray:
    try:
        doc = json.loads(path.read_text())
        w, h, rle = int(doc["width"]), int(doc["height"]), doc["rle"]
    except Exception as exc:
        raise SegmentMapError(f"cannot parse segment map {path}: {exc}") from exc
    return decode_rle(rle, w, h)


def decode_rle(rle, w: int, h: int) -> np.ndarray:
    """Decode row-major alternating (label, run) pairs."""
    if len(rle) % 2 != 0:
        raise SegmentMapError("RLE must hold alternating label/run pairs")
    labels = np.repeat(np.asarray(rle[0::2], dtype=np.int64), np.asarray(rle[1::2], dtype=np.int64))
    if labels.size != w * h:
        raise SegmentMapError(f"RLE covers {labels.size} pixels, expected {w * h}")
    return labels.reshape(h, w)


def encode_rle(labels: np.ndarray) -> list[int]:
    """Row-major run-length encoding as a flat [label, run, ...] list."""
    flat = np.asarray(labels).ravel()
    changes = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate(([0], changes))
    runs = np.diff(np.concatenate((starts, [flat.size])))
    out = np.empty(2 * len(starts), dtype=np.int64)
    out[0::2] = flat[starts]
    out[1::2] = runs
    return out.tolist()


def save_segment_map(path, seg: SegmentMap) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(
            json.dumps({"width": seg.width, "height": seg.height, "rle": encode_rle(seg.labels)})
        )
    else:
        Image.fromarray(seg.labels.astype(np.uint16)).save(path)


def superpixel_segments(img: np.ndarray, n_target: int, compactness: float = 10.0) -> SegmentMap:
    """Luminance-only SLIC-style segmentation.

    k-means over (lum * compactness, x/s, y/s) with s = sqrt(H*W/n_target),
    grid-seeded centers, 10 iterations, then connectivity enforcement that
    merges disconnected fragments into their largest adjacent segment.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    if n_target < 1 or n_target > h * w:
        raise ValueError(f"n_target must be in [1, {h * w}], got {n_target}")
    if n_target == 1:
        return SegmentMap(np.zeros((h, w), dtype=np.int32), count=1)

    s = np.sqrt(h * w / n_target)
    ys, xs = np.mgrid[0:h, 0:w]
    feats = np.stack(
        [img.ravel() * compactness, xs.ravel() / s, ys.ravel() / s], axis=1
    )

    # Seed centers on a near-square grid.
    gy = max(1, int(round(np.sqrt(n_target * h / w))))
    gx = max(1, (n_target + gy - 1) // gy)
    cy = ((np.arange(gy) + 0.5) * h / gy).astype(int).clip(0, h - 1)
    cx = ((np.arange(gx) + 0.5) * w / gx).astype(int).clip(0, w - 1)
    seeds = [(y, x) for y in cy for x in cx][:n_target]
    centers = np.array([feats[y * w + x] for y, x in seeds])

    assign = np.zeros(h * w, dtype=np.int64)
    for _ in range(10):
        d2 = ((feats[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        assign = np.argmin(d2, axis=1)
        for k in range(len(centers)):
            sel = assign == k
            if sel.any():
                centers[k] = feats[sel].mean(axis=0)

    labels = _enforce_connectivity(assign.reshape(h, w).astype(np.int32))
    return from_labels(labels)


def _enforce_connectivity(labels: np.ndarray) -> np.ndarray:
    """Keep the largest connected component per label; merge fragments into
    the largest 4-adjacent neighboring segment."""
    out = labels.copy()
    struct = ndimage.generate_binary_structure(2, 1)
    for lab in np.unique(labels):
        comp, n = ndimage.label(labels == lab, structure=struct)
        if n <= 1:
            continue
        sizes = ndimage.sum_labels(np.ones_like(comp), comp, index=np.arange(1, n + 1))
        keep = int(np.argmax(sizes)) + 1
        for c in range(1, n + 1):
            if c == keep:
                continue
            frag = comp == c
            neighbor = _largest_adjacent(out, frag, lab)
            out[frag] = neighbor
    return out


def _largest_adjacent(labels: np.ndarray, frag: np.ndarray, own: int) -> int:
    ring = ndimage.binary_dilation(frag) & ~frag
    candidates = labels[ring]
    candidates = candidates[candidates != own]
    if candidates.size == 0:
        return own
    vals = np.unique(candidates)
    seg_sizes = np.bincount(labels.ravel())[vals]
    # argmax ties break toward the lowest label via np.unique ordering
    return int(vals[np.argmax(seg_sizes)])
