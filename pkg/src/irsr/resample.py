"""Separable classical resampling (the degradation and baseline operators).

Conventions, fixed once and tested rather than left implicit:

* source mapping uses half-pixel centers, ``src = (dst + 0.5) * in/out - 0.5``;
* both passes (horizontal, then vertical) run in float64 and the result is
  quantized exactly once at the end;
* when ``antialias`` is on and a pass shrinks, the kernel is stretched by the
  shrink factor and the weights renormalized to sum 1;
* samples outside the source are clamped to the edge (their kernel mass is
  folded onto the border sample);
* ``nearest`` selects the round-half-up nearest sample and never averages,
  so the antialias flag does not apply to it.

For integer scale factors that are powers of two (in particular the x4 of
this pipeline) every bicubic/bilinear weight is a dyadic rational, all
arithmetic below is exact in float64, and resizing commutes bit-for-bit
with flips and (for square geometry) rotations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .image import FloatImage, Image, quantize, to_float

_FILTER_KINDS = ("nearest", "bilinear", "bicubic", "lanczos3")


@dataclass(frozen=True)
class Filter:
    """Resampling kernel selector; ``a`` is the bicubic coefficient (< 0)."""

    kind: str
    a: float = -0.5

    def __post_init__(self) -> None:
        if self.kind not in _FILTER_KINDS:
            raise ValidationError(f"unknown filter {self.kind!r}, expected one of {_FILTER_KINDS}")
        if self.kind == "bicubic" and not self.a < 0:
            raise ValidationError(f"bicubic coefficient must be negative, got {self.a}")


NEAREST = Filter("nearest")
BILINEAR = Filter("bilinear")
BICUBIC = Filter("bicubic")
LANCZOS3 = Filter("lanczos3")

FILTERS = {f.kind: f for f in (NEAREST, BILINEAR, BICUBIC, LANCZOS3)}


def bicubic_weight(x, a: float = -0.5):
    """Piecewise-cubic kernel of the Keys family, evaluated elementwise.

    (a+2)|x|^3 - (a+3)|x|^2 + 1 on |x| <= 1,
    a|x|^3 - 5a|x|^2 + 8a|x| - 4a on 1 < |x| < 2, zero beyond.
    """
    ax = np.abs(np.asarray(x, dtype=np.float64))
    inner = ((a + 2.0) * ax - (a + 3.0)) * ax * ax + 1.0
    outer = ((a * ax - 5.0 * a) * ax + 8.0 * a) * ax - 4.0 * a
    out = np.where(ax <= 1.0, inner, np.where(ax < 2.0, outer, 0.0))
    return out if out.ndim else float(out)


def _bilinear_weight(x):
    ax = np.abs(x)
    return np.where(ax < 1.0, 1.0 - ax, 0.0)


def _lanczos3_weight(x):
    ax = np.abs(x)
    w = np.sinc(ax) * np.sinc(ax / 3.0)
    return np.where(ax < 3.0, w, 0.0)


def _kernel(filt: Filter):
    if filt.kind == "bilinear":
        return 1.0, _bilinear_weight
    if filt.kind == "bicubic":
        return 2.0, lambda x: bicubic_weight(x, filt.a)
    if filt.kind == "lanczos3":
        return 3.0, _lanczos3_weight
    raise ValidationError(f"no convolution kernel for filter {filt.kind!r}")


def _centers(in_size: int, out_size: int) -> np.ndarray:
    return (np.arange(out_size, dtype=np.float64) + 0.5) * (in_size / out_size) - 0.5


def _contributions(in_size: int, out_size: int, filt: Filter, antialias: bool) -> np.ndarray:
    """Dense (out_size, in_size) weight matrix for one pass."""
    support, kernel = _kernel(filt)
    centers = _centers(in_size, out_size)
    stretch = in_size / out_size if (antialias and out_size < in_size) else 1.0
    radius = support * stretch
    left = np.ceil(centers - radius).astype(np.int64)
    n_taps = int(np.floor(2.0 * radius)) + 2
    taps = left[:, None] + np.arange(n_taps)[None, :]
    weights = kernel((taps - centers[:, None]) / stretch)
    clamped = np.clip(taps, 0, in_size - 1)
    matrix = np.zeros((out_size, in_size), dtype=np.float64)
    rows = np.repeat(np.arange(out_size), n_taps)
    np.add.at(matrix, (rows, clamped.ravel()), weights.ravel())
    matrix /= matrix.sum(axis=1, keepdims=True)
    return matrix


def _nearest_indices(in_size: int, out_size: int) -> np.ndarray:
    idx = np.floor(_centers(in_size, out_size) + 0.5).astype(np.int64)
    return np.clip(idx, 0, in_size - 1)


def _resample_axis(arr: np.ndarray, out_size: int, filt: Filter, antialias: bool, axis: int) -> np.ndarray:
    in_size = arr.shape[axis]
    if filt.kind == "nearest":
        return np.take(arr, _nearest_indices(in_size, out_size), axis=axis)
    if in_size == out_size:
        return arr
    matrix = _contributions(in_size, out_size, filt, antialias)
    moved = np.tensordot(arr, matrix, axes=([axis], [1]))
    return np.moveaxis(moved, -1, axis)


def resize_float(img: Image | FloatImage, out_w: int, out_h: int, filt: Filter, antialias: bool = True) -> FloatImage:
    """Resample without the final quantization (exposed for analysis/tests)."""
    if out_w < 1 or out_h < 1:
        raise ValidationError(f"output size must be >= 1, got {out_w}x{out_h}")
    f = to_float(img) if isinstance(img, Image) else img
    arr = _resample_axis(f.samples, out_w, filt, antialias, axis=1)
    arr = _resample_axis(arr, out_h, filt, antialias, axis=0)
    return FloatImage(arr, f.peak)


def resize(img: Image, out_w: int, out_h: int, filt: Filter, antialias: bool = True) -> Image:
    """Separable resampling of an integer image, quantized once at the end."""
    if out_w < 1 or out_h < 1:
        raise ValidationError(f"output size must be >= 1, got {out_w}x{out_h}")
    if filt.kind == "nearest":
        arr = np.take(img.pixels, _nearest_indices(img.width, out_w), axis=1)
        arr = np.take(arr, _nearest_indices(img.height, out_h), axis=0)
        return Image(arr, img.bit_depth)
    return quantize(resize_float(img, out_w, out_h, filt, antialias), img.bit_depth)


def degrade_x4(hr: Image) -> Image:
    """Reference degradation: antialiased bicubic downsampling by 4."""
    if hr.width % 4 or hr.height % 4:
        raise ValidationError(
            f"HR dimensions must be divisible by 4 to degrade, got {hr.width}x{hr.height}"
        )
    return resize(hr, hr.width // 4, hr.height // 4, BICUBIC, antialias=True)


def upscale_x4(lr: Image, filt: Filter = BICUBIC) -> Image:
    """Classical x4 upscaling baseline (antialias is a no-op when enlarging)."""
    return resize(lr, lr.width * 4, lr.height * 4, filt, antialias=False)
