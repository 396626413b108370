"""Classical image operators: Gaussian blur, Sobel gradients, Canny edges,
and nearest-neighbor label resampling."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = _SOBEL_X.T


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D normalized Gaussian kernel with radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with edge-replicate border handling."""
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(np.asarray(img, dtype=np.float64), k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return np.clip(out, 0.0, 1.0)


def sobel_gradients(img: np.ndarray):
    """3x3 Sobel gradients (gx, gy, magnitude), edge-replicate border."""
    img = np.asarray(img, dtype=np.float64)
    gx = ndimage.correlate(img, _SOBEL_X, mode="nearest")
    gy = ndimage.correlate(img, _SOBEL_Y, mode="nearest")
    return gx, gy, np.hypot(gx, gy)


def _nms(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Suppress non-maxima along the gradient direction quantized to 4 bins."""
    h, w = mag.shape
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    # bins: 0 = horizontal gradient (compare left/right), 1 = 45deg,
    # 2 = vertical gradient (compare up/down), 3 = 135deg
    d = np.floor((angle + np.pi / 8) / (np.pi / 4)).astype(int) % 4
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}
    padded = np.pad(mag, 1, mode="constant")
    keep = np.zeros_like(mag, dtype=bool)
    ys, xs = np.mgrid[0:h, 0:w]
    for b, (dy, dx) in offsets.items():
        sel = d == b
        n1 = padded[ys[sel] + 1 + dy, xs[sel] + 1 + dx]
        n2 = padded[ys[sel] + 1 - dy, xs[sel] + 1 - dx]
        m = mag[sel]
        keep[ys[sel], xs[sel]] = (m >= n1) & (m >= n2) & (m > 0)
    return keep


def canny_edges(img: np.ndarray, low: float = 0.1, high: float = 0.2, sigma: float = 1.0) -> np.ndarray:
    """Canny edge detection: blur, Sobel, NMS, double-threshold hysteresis.

    Hysteresis links weak edges to strong ones through 8-connected
    components. Returns a binary uint8 mask.
    """
    if not (0 <= low < high):
        raise ValueError(f"thresholds must satisfy 0 <= low < high, got {low}, {high}")
    smoothed = gaussian_blur(img, sigma)
    gx, gy, mag = sobel_gradients(smoothed)
    local_max = _nms(mag, gx, gy)
    weak = local_max & (mag >= low)
    strong = local_max & (mag >= high)
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        return np.zeros_like(weak, dtype=np.uint8)
    keep_ids = np.unique(labels[strong])
    keep_ids = keep_ids[keep_ids > 0]
    return np.isin(labels, keep_ids).astype(np.uint8)


def resize_nearest(arr: np.ndarray, w: int, h: int) -> np.ndarray:
    """Nearest-neighbor resampling of a label (or any 2-D) array to (h, w)."""
    if w < 1 or h < 1:
        raise ValueError(f"target size must be >= 1, got {w}x{h}")
    arr = np.asarray(arr)
    sh, sw = arr.shape
    if (sh, sw) == (h, w):
        return arr.copy()
    rows = np.minimum((np.arange(h) * sh) // h, sh - 1)
    cols = np.minimum((np.arange(w) * sw) // w, sw - 1)
    return arr[np.ix_(rows, cols)]
