"""Quantitative evaluation: Hasler-Suesstrunk colorfulness, PSNR, SSIM."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import color


def colorfulness(rgb: np.ndarray) -> float:
    """CF = sigma_rgyb + 0.3 * mu_rgyb over the rg/yb opponent planes,
    population statistics."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    rg = r - g
    yb = 0.5 * (r + g) - b
    sigma = math.sqrt(rg.var() + yb.var())
    mu = math.sqrt(rg.mean() ** 2 + yb.mean() ** 2)
    return sigma + 0.3 * mu


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB; identical images give +inf."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = np.mean((a - b) ** 2)
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def _luma(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Single-scale SSIM on luminance.

    11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03, L=255, averaged
    over valid (fully interior) windows.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    x = _luma(a) if a.ndim == 3 else a.astype(np.float64)
    y = _luma(b) if b.ndim == 3 else b.astype(np.float64)
    if min(x.shape) < 11:
        raise ValueError(f"image too small for 11x11 SSIM window: {x.shape}")

    half = 5
    g = np.exp(-(np.arange(-half, half + 1) ** 2) / (2 * 1.5**2))
    g /= g.sum()

    def win(img):
        out = ndimage.correlate1d(img, g, axis=0, mode="constant")
        out = ndimage.correlate1d(out, g, axis=1, mode="constant")
        return out[half:-half, half:-half]

    c1 = (0.01 * 255) ** 2
    c2 = (0.03 * 255) ** 2
    mx, my = win(x), win(y)
    sxx = win(x * x) - mx * mx
    syy = win(y * y) - my * my
    sxy = win(x * y) - mx * my
    num = (2 * mx * my + c1) * (2 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


def evaluate_pair(pred: np.ndarray, gt: np.ndarray) -> dict:
    return {"cf": colorfulness(pred), "psnr": psnr(pred, gt), "ssim": ssim(pred, gt)}


def evaluate_dirs(pred_dir, gt_dir) -> dict:
    """Score same-named PNGs from two directories.

    Returns the metrics.json payload: per-image scores plus the aggregate
    means (infinite PSNR entries are skipped in the mean).
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    names = sorted(p.name for p in pred_dir.glob("*.png"))
    if not names:
        raise ValueError(f"no PNG files in {pred_dir}")
    per_image = []
    for name in names:
        gt_path = gt_dir / name
        if not gt_path.exists():
            raise FileNotFoundError(f"ground truth missing for {name}")
        scores = evaluate_pair(color.read_rgb(pred_dir / name), color.read_rgb(gt_path))
        per_image.append({"name": name, **scores})
    finite_psnr = [e["psnr"] for e in per_image if math.isfinite(e["psnr"])]
    mean = {
        "cf": float(np.mean([e["cf"] for e in per_image])),
        "psnr": float(np.mean(finite_psnr)) if finite_psnr else math.inf,
        "ssim": float(np.mean([e["ssim"] for e in per_image])),
    }
    return {"per_image": per_image, "mean": mean}


def write_report(path, report: dict) -> None:
    def sanitize(o):
        if isinstance(o, float) and math.isinf(o):
            return "inf"
        if isinstance(o, dict):
            return {k: sanitize(v) for k, v in o.items()}
        if isinstance(o, list):
            return [sanitize(v) for v in o]
        return o

    Path(path).write_text(json.dumps(sanitize(report), indent=2))
