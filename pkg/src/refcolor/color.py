"""sRGB <-> CIE Lab conversions (D65 white point) and PNG image I/O.

Chrominance stays floating point end to end; quantization to 8-bit
happens only when an image is written out.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

# D65 reference white, 2 degree observer (Y normalized to 1).
_WHITE = np.array([0.95047, 1.0, 1.08883])

# Linear RGB <-> XYZ (sRGB primaries, D65).
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)

_DELTA = 6.0 / 29.0


def _srgb_expand(c: np.ndarray) -> np.ndarray:
    """Gamma expansion: sRGB-encoded [0,1] -> linear [0,1]."""
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _srgb_compress(c: np.ndarray) -> np.ndarray:
    """Gamma compression: linear [0,1] -> sRGB-encoded."""
    c = np.clip(c, 0.0, None)
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * c ** (1.0 / 2.4) - 0.055)


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA**3, np.cbrt(t), t / (3.0 * _DELTA**2) + 4.0 / 29.0)


def _lab_f_inv(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA, t**3, 3.0 * _DELTA**2 * (t - 4.0 / 29.0))


def rgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) uint8 sRGB image to float Lab planes."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) RGB image, got shape {rgb.shape}")
    linear = _srgb_expand(rgb.astype(np.float64) / 255.0)
    xyz = linear @ _RGB_TO_XYZ.T
    f = _lab_f(xyz / _WHITE)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def lab_to_rgb(lab: np.ndarray) -> np.ndarray:
    """Convert float Lab planes back to uint8 sRGB, clamping out-of-gamut."""
    lab = np.asarray(lab, dtype=np.float64)
    if lab.ndim != 3 or lab.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) Lab image, got shape {lab.shape}")
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_lab_f_inv(fx), _lab_f_inv(fy), _lab_f_inv(fz)], axis=-1) * _WHITE
    linear = xyz @ _XYZ_TO_RGB.T
    srgb = _srgb_compress(linear)
    return np.clip(np.rint(srgb * 255.0), 0, 255).astype(np.uint8)


def luminance_of(rgb: np.ndarray) -> np.ndarray:
    """L channel of the Lab conversion rescaled to [0, 1]."""
    return rgb_to_lab(rgb)[..., 0] / 100.0


def gray_to_lab(gray: np.ndarray, a: np.ndarray | None = None, b: np.ndarray | None = None) -> np.ndarray:
    """Attach chrominance planes (default neutral) to a [0,1] gray plane."""
    gray = np.asarray(gray, dtype=np.float64)
    lab = np.zeros(gray.shape + (3,))
    lab[..., 0] = gray * 100.0
    if a is not None:
        lab[..., 1] = a
    if b is not None:
        lab[..., 2] = b
    return lab


def read_rgb(path) -> np.ndarray:
    """Read a PNG (or any PIL-supported file) as an (H, W, 3) uint8 array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def read_gray(path) -> np.ndarray:
    """Read an image as a [0, 1] grayscale plane (Lab lightness of its RGB)."""
    return luminance_of(read_rgb(path))


def write_rgb(path, rgb: np.ndarray) -> None:
    Image.fromarray(np.asarray(rgb, dtype=np.uint8), mode="RGB").save(path)


def write_gray(path, gray: np.ndarray) -> None:
    data = np.clip(np.rint(np.asarray(gray) * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)
