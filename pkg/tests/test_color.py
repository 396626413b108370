import numpy as np
import pytest
from hypothesis import given, strategies as st

from refcolor import color


def solid(r, g, b, shape=(4, 4)):
    return np.tile(np.array([r, g, b], dtype=np.uint8), shape + (1,))


def test_white_point():
    lab = color.rgb_to_lab(solid(255, 255, 255))
    assert abs(lab[..., 0] - 100.0).max() < 1e-3
    assert abs(lab[..., 1]).max() < 1e-3
    assert abs(lab[..., 2]).max() < 1e-3


def test_black():
    lab = color.rgb_to_lab(solid(0, 0, 0))
    assert np.abs(lab).max() < 1e-6


def test_pure_red_reference():
    # frozen from an independent sRGB->Lab converter (skimage.color.rgb2lab)
    lab = color.rgb_to_lab(solid(255, 0, 0))[0, 0]
    assert lab == pytest.approx([53.2406, 80.0923, 67.2028], abs=0.05)


def test_round_trip_stratified_sample():
    # stride sample covering the full 8-bit cube, 16^3 = 4096 colors
    vals = np.arange(8, 256, 16, dtype=np.uint8)
    r, g, b = np.meshgrid(vals, vals, vals, indexing="ij")
    rgb = np.stack([r, g, b], axis=-1).reshape(16, -1, 3)
    back = color.lab_to_rgb(color.rgb_to_lab(rgb))
    assert np.abs(back.astype(int) - rgb.astype(int)).max() <= 1


def test_lab_white_to_rgb():
    lab = np.zeros((2, 2, 3))
    lab[..., 0] = 100.0
    assert (color.lab_to_rgb(lab) == 255).all()


def test_out_of_gamut_clamps():
    lab = np.zeros((1, 1, 3))
    lab[0, 0] = [50.0, 127.0, -128.0]
    rgb = color.lab_to_rgb(lab)
    assert rgb.dtype == np.uint8
    assert rgb.min() >= 0 and rgb.max() <= 255


@given(v=st.integers(0, 255))
def test_gray_inputs_have_no_chroma(v):
    lab = color.rgb_to_lab(solid(v, v, v, shape=(1, 1)))
    assert abs(lab[0, 0, 1]) < 0.01
    assert abs(lab[0, 0, 2]) < 0.01


def test_luminance_extremes():
    assert color.luminance_of(solid(255, 255, 255)) == pytest.approx(1.0, abs=1e-5)
    assert color.luminance_of(solid(0, 0, 0)) == pytest.approx(0.0, abs=1e-9)


def test_luminance_gray_reference():
    # L of 119-gray frozen from the independent reference converter
    lum = color.luminance_of(solid(119, 119, 119))
    assert lum == pytest.approx(0.5003444, abs=1e-4)


@given(st.integers(0, 254))
def test_luminance_monotone(v):
    l1 = color.luminance_of(solid(v, v, v, shape=(1, 1)))[0, 0]
    l2 = color.luminance_of(solid(v + 1, v + 1, v + 1, shape=(1, 1)))[0, 0]
    assert l1 < l2


def test_png_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    rgb = rng.integers(0, 256, (9, 13, 3), dtype=np.uint8)
    color.write_rgb(tmp_path / "x.png", rgb)
    assert (color.read_rgb(tmp_path / "x.png") == rgb).all()
