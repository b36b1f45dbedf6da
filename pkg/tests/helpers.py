"""Shared strategies and independent oracles used across the test suite.

The oracles here intentionally avoid the library's computation paths:
resampling is re-done as a direct (non-separable) 2-D weighted sum, SSIM as
a per-window double loop, and PSNR straight from the definition.
"""

import math

import numpy as np
from hypothesis import strategies as st

from irsr import Image


def rand_image(rng, width, height, channels=1, bit_depth=8):
    peak = (1 << bit_depth) - 1
    arr = rng.integers(0, peak + 1, size=(height, width, channels), dtype=np.int64)
    return Image(arr, bit_depth)


@st.composite
def images(draw, max_dim=12, channels=(1, 3), depths=(8, 16)):
    w = draw(st.integers(1, max_dim))
    h = draw(st.integers(1, max_dim))
    c = draw(st.sampled_from(channels))
    d = draw(st.sampled_from(depths))
    seed = draw(st.integers(0, 2**31 - 1))
    return rand_image(np.random.default_rng(seed), w, h, c, d)


@st.composite
def png_images(draw, max_dim=12):
    """Images restricted to the supported on-disk layouts."""
    c, d = draw(st.sampled_from([(1, 8), (1, 16), (3, 8)]))
    w = draw(st.integers(1, max_dim))
    h = draw(st.integers(1, max_dim))
    seed = draw(st.integers(0, 2**31 - 1))
    return rand_image(np.random.default_rng(seed), w, h, c, d)


def keys_kernel(x, a=-0.5):
    """Independent piecewise evaluation of the cubic kernel."""
    x = abs(float(x))
    if x <= 1.0:
        return (a + 2.0) * x**3 - (a + 3.0) * x**2 + 1.0
    if x < 2.0:
        return a * x**3 - 5.0 * a * x**2 + 8.0 * a * x - 4.0 * a
    return 0.0


def resize_direct_bicubic(img, out_w, out_h, a=-0.5, antialias=True):
    """Brute-force 2-D resampling oracle: one full weighted sum per output
    pixel with an outer-product kernel and a single normalization."""
    arr = img.pixels[:, :, 0].astype(np.float64)
    in_h, in_w = arr.shape
    ratio_h, ratio_w = in_h / out_h, in_w / out_w
    stretch_h = ratio_h if (antialias and ratio_h > 1.0) else 1.0
    stretch_w = ratio_w if (antialias and ratio_w > 1.0) else 1.0
    out = np.zeros((out_h, out_w))
    for oy in range(out_h):
        cy = (oy + 0.5) * ratio_h - 0.5
        ys = np.arange(math.ceil(cy - 2.0 * stretch_h), math.floor(cy + 2.0 * stretch_h) + 1)
        wy = np.array([keys_kernel((y - cy) / stretch_h, a) for y in ys])
        rows = np.clip(ys, 0, in_h - 1)
        for ox in range(out_w):
            cx = (ox + 0.5) * ratio_w - 0.5
            xs = np.arange(math.ceil(cx - 2.0 * stretch_w), math.floor(cx + 2.0 * stretch_w) + 1)
            wx = np.array([keys_kernel((x - cx) / stretch_w, a) for x in xs])
            cols = np.clip(xs, 0, in_w - 1)
            w2d = np.outer(wy, wx)
            out[oy, ox] = (w2d * arr[np.ix_(rows, cols)]).sum() / w2d.sum()
    peak = img.peak
    return np.clip(np.floor(out + 0.5), 0, peak).astype(img.pixels.dtype)


def psnr_direct(x, y, peak):
    """PSNR from the definition, plain numpy accumulation."""
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return 100.0
    return 10.0 * math.log10(peak * peak / mse)


def ssim_direct(x, y, peak):
    """Per-window SSIM oracle: valid positions, direct weighted moments."""
    g = np.exp(-((np.arange(11) - 5.0) ** 2) / (2.0 * 1.5**2))
    g /= g.sum()
    window = np.outer(g, g)
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    h, w = x.shape
    values = []
    for i in range(h - 10):
        for j in range(w - 10):
            px = x[i : i + 11, j : j + 11]
            py = y[i : i + 11, j : j + 11]
            mx = (window * px).sum()
            my = (window * py).sum()
            sxx = (window * px * px).sum() - mx * mx
            syy = (window * py * py).sum() - my * my
            sxy = (window * px * py).sum() - mx * my
            values.append(
                ((2.0 * mx * my + c1) * (2.0 * sxy + c2))
                / ((mx * mx + my * my + c1) * (sxx + syy + c2))
            )
    return sum(values) / len(values)
