"""Coarse-to-fine hint color generation: cell-wise reference warping,
similarity gating, and per-segment DBSCAN outlier rejection."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .descriptors import _descriptor_from_planes
from .imaging import sobel_gradients
from .segmentation import SegmentMap

NOISE = -1


@dataclass(frozen=True)
class HintPoint:
    cx: int
    cy: int
    a: float
    b: float
    confidence: float
    segment: int


@dataclass(frozen=True)
class HintSet:
    hints: tuple[HintPoint, ...]
    cell_size: int

    def __len__(self) -> int:
        return len(self.hints)


@dataclass(frozen=True)
class WarpResult:
    warped_a: np.ndarray
    warped_b: np.ndarray
    similarity: np.ndarray  # (gh, gw) in [0, 1]
    cell_size: int


def _cell_bounds(h: int, w: int, d: int):
    gh = (h + d - 1) // d
    gw = (w + d - 1) // d
    return gh, gw


def _cell_slice(cy: int, cx: int, h: int, w: int, d: int):
    return slice(cy * d, min((cy + 1) * d, h)), slice(cx * d, min((cx + 1) * d, w))


def warp_reference(gray: np.ndarray, ref: np.ndarray, d: int = 16,
                   search_radius: int = 0) -> WarpResult:
    """Cell-wise correspondence between the input and the reference.

    Each d x d input cell is matched against reference cells within
    +-search_radius (Chebyshev, in cells) by cosine similarity of the
    built-in luminance descriptor; the matched cell's mean ab is copied
    into the input cell footprint. search_radius=0 is the identity
    correspondence.
    """
    gray = np.asarray(gray, dtype=np.float64)
    if d < 2:
        raise ValueError(f"cell size must be >= 2, got {d}")
    if ref.shape[:2] != gray.shape:
        raise ValueError(f"reference shape {ref.shape[:2]} does not match input {gray.shape}")
    h, w = gray.shape
    gh, gw = _cell_bounds(h, w, d)
    ref_lum = ref[..., 0] / 100.0

    g_planes = (gray, *sobel_gradients(gray))
    r_planes = (ref_lum, *sobel_gradients(ref_lum))

    def cell_desc(planes, cy, cx):
        sy, sx = _cell_slice(cy, cx, h, w, d)
        mask = np.zeros((h, w), dtype=bool)
        mask[sy, sx] = True
        return _descriptor_from_planes(*planes, mask)

    ref_desc = {}
    warped_a = np.zeros((h, w))
    warped_b = np.zeros((h, w))
    similarity = np.zeros((gh, gw))
    for cy in range(gh):
        for cx in range(gw):
            gd = cell_desc(g_planes, cy, cx)
            best_sim, best = -np.inf, (cy, cx)
            for ny in range(max(0, cy - search_radius), min(gh, cy + search_radius + 1)):
                for nx in range(max(0, cx - search_radius), min(gw, cx + search_radius + 1)):
                    if (ny, nx) not in ref_desc:
                        ref_desc[(ny, nx)] = cell_desc(r_planes, ny, nx)
                    sim = float(np.dot(gd, ref_desc[(ny, nx)]))
                    if sim > best_sim:
                        best_sim, best = sim, (ny, nx)
            similarity[cy, cx] = min(max(best_sim, 0.0), 1.0)
            rsy, rsx = _cell_slice(best[0], best[1], h, w, d)
            sy, sx = _cell_slice(cy, cx, h, w, d)
            warped_a[sy, sx] = ref[rsy, rsx, 1].mean()
            warped_b[sy, sx] = ref[rsy, rsx, 2].mean()
    return WarpResult(warped_a, warped_b, similarity, cell_size=d)


def extract_coarse_hints(wr: WarpResult, seg: SegmentMap, s_eps: float = 0.6) -> HintSet:
    """One hint per cell whose similarity strictly exceeds s_eps."""
    if not 0.0 <= s_eps <= 1.0:
        raise ValueError(f"s_eps must lie in [0, 1], got {s_eps}")
    h, w = seg.labels.shape
    d = wr.cell_size
    gh, gw = wr.similarity.shape
    hints = []
    for cy in range(gh):
        for cx in range(gw):
            sim = float(wr.similarity[cy, cx])
            if sim <= s_eps:
                continue
            sy, sx = _cell_slice(cy, cx, h, w, d)
            py = min(cy * d + d // 2, h - 1)
            px = min(cx * d + d // 2, w - 1)
            hints.append(
                HintPoint(
                    cx=px,
                    cy=py,
                    a=float(wr.warped_a[sy, sx].mean()),
                    b=float(wr.warped_b[sy, sx].mean()),
                    confidence=sim,
                    segment=int(seg.labels[py, px]),
                )
            )
    hints.sort(key=lambda p: (p.cy, p.cx))
    return HintSet(tuple(hints), cell_size=d)


def dbscan(points, eps: float, min_pts: int) -> list[int]:
    """Deterministic DBSCAN over 2-D points, Euclidean distance.

    Points are scanned in input order with BFS cluster expansion; the
    eps-neighborhood is the closed ball. Returns per-point cluster ids,
    NOISE (-1) for outliers.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if min_pts < 1:
        raise ValueError(f"min_pts must be >= 1, got {min_pts}")
    pts = np.asarray(list(points), dtype=np.float64)
    n = len(pts)
    if n == 0:
        return []
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
    neighbors = [np.flatnonzero(d2[i] <= eps * eps) for i in range(n)]
    labels = [None] * n
    cluster = 0
    for i in range(n):
        if labels[i] is not None:
            continue
        if len(neighbors[i]) < min_pts:
            labels[i] = NOISE
            continue
        labels[i] = cluster
        queue = list(neighbors[i])
        qi = 0
        while qi < len(queue):
            q = int(queue[qi])
            qi += 1
            if labels[q] == NOISE:
                labels[q] = cluster  # border point reached from a core
            if labels[q] is not None:
                continue
            labels[q] = cluster
            if len(neighbors[q]) >= min_pts:
                queue.extend(neighbors[q])
        cluster += 1
    return [int(l) for l in labels]


def refine_hints(coarse: HintSet, seg: SegmentMap, n_h: int = 10,
                 eps: float = 10.0, min_pts: int = 3) -> HintSet:
    """Per-segment outlier rejection for over-populated segments.

    Segments holding more than n_h hints are clustered in ab space; only
    the largest cluster survives (ties -> lowest cluster id). If every
    hint lands in noise, the single highest-confidence hint is kept.
    """
    if n_h < 1:
        raise ValueError(f"n_h must be >= 1, got {n_h}")
    by_segment: dict[int, list[HintPoint]] = {}
    for hp in coarse.hints:
        by_segment.setdefault(hp.segment, []).append(hp)
    kept: list[HintPoint] = []
    for j in sorted(by_segment):
        group = by_segment[j]
        if len(group) <= n_h:
            kept.extend(group)
            continue
        labels = dbscan([(hp.a, hp.b) for hp in group], eps=eps, min_pts=min_pts)
        counts: dict[int, int] = {}
        for lab in labels:
            if lab != NOISE:
                counts[lab] = counts.get(lab, 0) + 1
        if not counts:
            best = max(group, key=lambda hp: (hp.confidence, -hp.cy, -hp.cx))
            kept.append(best)
            continue
        winner = min(counts, key=lambda c: (-counts[c], c))
        kept.extend(hp for hp, lab in zip(group, labels) if lab == winner)
    kept.sort(key=lambda p: (p.cy, p.cx))
    return HintSet(tuple(kept), cell_size=coarse.cell_size)


def hintset_to_json(hs: HintSet) -> dict:
    return {
        "cell_size": hs.cell_size,
        "hints": [
            {"cx": hp.cx, "cy": hp.cy, "a": hp.a, "b": hp.b,
             "confidence": hp.confidence, "segment": hp.segment}
            for hp in hs.hints
        ],
    }


def hintset_from_json(doc: dict) -> HintSet:
    hints = tuple(
        HintPoint(cx=int(h["cx"]), cy=int(h["cy"]), a=float(h["a"]), b=float(h["b"]),
                  confidence=float(h["confidence"]), segment=int(h["segment"]))
        for h in doc["hints"]
    )
    return HintSet(hints, cell_size=int(doc["cell_size"]))


def save_hints(path, hs: HintSet) -> None:
    Path(path).write_text(json.dumps(hintset_to_json(hs), indent=2))


def load_hints(path) -> HintSet:
    return hintset_from_json(json.loads(Path(path).read_text()))
