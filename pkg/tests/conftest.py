"""Shared fixtures and independent oracle implementations.

The oracles here are deliberately naive (brute force, dense solves) and
never share code paths with the package internals they check.
"""

from __future__ import annotations

import numpy as np
import pytest

NOISE = -1


def brute_force_dbscan(points, eps, min_pts):
    """O(n^2) reference DBSCAN: repeatedly grow clusters from unvisited
    core points, closed eps-ball, Euclidean metric."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    labels = [None] * n
    # full O(n^2) pairwise distance table, no spatial indexing
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))

    def neighborhood(i):
        return [j for j in range(n) if dist[i, j] <= eps]

    cluster = 0
    for i in range(n):
        if labels[i] is not None:
            continue
        seeds = neighborhood(i)
        if len(seeds) < min_pts:
            labels[i] = NOISE
            continue
        labels[i] = cluster
        seeds = list(seeds)
        k = 0
        while k < len(seeds):
            q = seeds[k]
            k += 1
            if labels[q] == NOISE:
                labels[q] = cluster
            if labels[q] is None:
                labels[q] = cluster
                qn = neighborhood(q)
                if len(qn) >= min_pts:
                    seeds.extend(qn)
        cluster += 1
    return labels


def smooth_color_image(h, w, seed=0):
    """Synthetic smooth natural-looking RGB image from low-frequency waves."""
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    chans = []
    for _ in range(3):
        fy, fx = rng.uniform(0.5, 2.0, 2)
        py, px = rng.uniform(0, 2 * np.pi, 2)
        plane = 0.5 + 0.25 * np.sin(2 * np.pi * fy * ys / h + py) \
            + 0.25 * np.cos(2 * np.pi * fx * xs / w + px)
        chans.append(plane)
    rgb = np.stack(chans, axis=-1)
    rgb = (rgb - rgb.min()) / (rgb.max() - rgb.min())
    return np.clip(np.rint(40 + rgb * 175), 0, 255).astype(np.uint8)


def lowfreq_color_image(h, w, seed=0):
    """Strongly chromatic but spatially slow test image: hue-permutation
    distractors differ in luminance everywhere, and chrominance is nearly
    constant within a 16px cell."""
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    chans = []
    for _ in range(3):
        py, px = rng.uniform(0, 2 * np.pi, 2)
        plane = 0.5 + 0.25 * np.sin(2 * np.pi * 0.7 * ys / h + py) \
            + 0.25 * np.cos(2 * np.pi * 0.7 * xs / w + px)
        chans.append(plane)
    rgb = np.stack(chans, axis=-1)
    rgb = (rgb - rgb.min()) / (rgb.max() - rgb.min())
    return np.clip(np.rint(40 + rgb * 175), 0, 255).astype(np.uint8)


def hue_rotated(rgb, k):
    """Channel-permutation distractor with the k-th nontrivial permutation."""
    perms = [(1, 2, 0), (2, 0, 1), (1, 0, 2), (0, 2, 1), (2, 1, 0)]
    p = perms[k % len(perms)]
    return rgb[..., list(p)].copy()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
