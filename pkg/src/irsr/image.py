"""Image containers, PNG I/O, and value-domain conversions.

Rasters are 8- or 16-bit grayscale or 8-bit RGB, backed by read-only numpy
arrays of shape (height, width, channels). The on-disk format is
non-interlaced PNG; palette, alpha, and interlaced layouts are rejected
loudly instead of being silently converted.

Quantization is round-half-up (floor(x + 0.5)) followed by clamping to
[0, peak]; every module that turns floats back into integer samples goes
through :func:`quantize` so the rounding rule is fixed in one place.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as _PILImage

from .errors import UnsupportedFormatError, ValidationError

_DTYPES = {8: np.uint8, 16: np.uint16}

# BT.601 full-range luminance, kept as the exact rational
# (299 R + 587 G + 114 B) / 1000 so that R == G == B reproduces the channel
# bit-exactly (the coefficients sum to exactly 1000).
_LUMA_NUM = (299.0, 587.0, 114.0)
_LUMA_DEN = 1000.0


@dataclass(frozen=True, eq=False)
class Image:
    """Integer raster: (height, width, channels) samples in [0, 2^bit_depth - 1].

    The pixel buffer is copied on construction and marked read-only, so
    instances are safe to share across threads.
    """

    pixels: np.ndarray
    bit_depth: int

    def __post_init__(self) -> None:
        if self.bit_depth not in _DTYPES:
            raise ValidationError(f"bit depth must be 8 or 16, got {self.bit_depth}")
        arr = np.asarray(self.pixels)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValidationError(
                f"pixel buffer must be (h, w) or (h, w, c) with c in {{1, 3}}, got shape {arr.shape}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"image dimensions must be >= 1, got shape {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValidationError(f"pixel buffer must be integer-typed, got {arr.dtype}")
        peak = (1 << self.bit_depth) - 1
        if arr.size and (int(arr.min()) < 0 or int(arr.max()) > peak):
            raise ValidationError(
                f"samples out of range [0, {peak}] for bit depth {self.bit_depth}"
            )
        arr = np.array(arr, dtype=_DTYPES[self.bit_depth], order="C")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def peak(self) -> int:
        """Largest representable sample value (2^bit_depth - 1)."""
        return (1 << self.bit_depth) - 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return self.bit_depth == other.bit_depth and np.array_equal(self.pixels, other.pixels)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class FloatImage:
    """Unclamped float64 raster plus the peak value of its integer domain."""

    samples: np.ndarray
    peak: float

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValidationError(
                f"sample buffer must be (h, w) or (h, w, c) with c in {{1, 3}}, got shape {arr.shape}"
            )
        if not self.peak > 0:
            raise ValidationError(f"peak must be positive, got {self.peak}")
        arr = np.array(arr, dtype=np.float64, order="C")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "peak", float(self.peak))

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return self.samples.shape[2]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FloatImage):
            return NotImplemented
        return self.peak == other.peak and np.array_equal(self.samples, other.samples)

    __hash__ = None  # type: ignore[assignment]


def to_float(img: Image) -> FloatImage:
    """Lossless widening of an integer image into the float domain."""
    return FloatImage(img.pixels.astype(np.float64), float(img.peak))


def quantize(f: FloatImage, bit_depth: int | None = None) -> Image:
    """Round half-up, clamp to [0, peak], and narrow to integer samples.

    ``bit_depth`` defaults to the depth implied by ``f.peak``.
    """
    if bit_depth is None:
        bit_depth = _depth_from_peak(f.peak)
    if bit_depth not in _DTYPES:
        raise ValidationError(f"bit depth must be 8 or 16, got {bit_depth}")
    peak = (1 << bit_depth) - 1
    arr = np.floor(f.samples + 0.5)
    arr = np.clip(arr, 0.0, float(peak))
    return Image(arr.astype(_DTYPES[bit_depth]), bit_depth)


def _depth_from_peak(peak: float) -> int:
    for depth in (8, 16):
        if peak == float((1 << depth) - 1):
            return depth
    raise ValidationError(f"peak {peak} does not correspond to a supported bit depth")


def luma_float(img: Image) -> FloatImage:
    """Single-channel luminance without rounding, for metric computation.

    Grayscale input passes through unchanged; RGB is reduced with the
    BT.601 weights 0.299/0.587/0.114.
    """
    if img.channels == 1:
        return to_float(img)
    p = img.pixels.astype(np.float64)
    y = (_LUMA_NUM[0] * p[:, :, 0] + _LUMA_NUM[1] * p[:, :, 1] + _LUMA_NUM[2] * p[:, :, 2]) / _LUMA_DEN
    return FloatImage(y[:, :, None], float(img.peak))


def to_luma(img: Image) -> Image:
    """Integer luminance image (round-half-up), for file export.

    Returns the input unchanged when it is already single-channel. Metrics
    use :func:`luma_float` instead so no rounding choice contaminates them.
    """
    if img.channels == 1:
        return img
    return quantize(luma_float(img), img.bit_depth)


# --- PNG I/O -----------------------------------------------------------------

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

_COLOR_GRAY = 0
_COLOR_RGB = 2
_COLOR_PALETTE = 3
_COLOR_GRAY_ALPHA = 4
_COLOR_RGBA = 6


def png_header(path: Path | str) -> tuple[int, int, int, int, int]:
    """Parse the IHDR chunk: (width, height, bit_depth, color_type, interlace).

    Cheap way to learn dimensions/layout without decoding pixel data.
    """
    with open(path, "rb") as fh:
        head = fh.read(8 + 8 + 13)
    if len(head) < 29 or head[:8] != _PNG_SIGNATURE or head[12:16] != b"IHDR":
        raise UnsupportedFormatError(f"not a PNG file: {path}")
    width, height, depth, color_type, _comp, _filt, interlace = struct.unpack(
        ">IIBBBBB", head[16:29]
    )
    return width, height, depth, color_type, interlace


def _check_layout(path: Path | str) -> tuple[int, int, int, int]:
    width, height, depth, color_type, interlace = png_header(path)
    if interlace != 0:
        raise UnsupportedFormatError(f"unsupported format: interlaced PNG ({path})")
    if color_type == _COLOR_PALETTE:
        raise UnsupportedFormatError(f"unsupported format: palette ({path})")
    if color_type in (_COLOR_GRAY_ALPHA, _COLOR_RGBA):
        raise UnsupportedFormatError(f"unsupported format: alpha channel ({path})")
    if color_type == _COLOR_GRAY:
        if depth not in (8, 16):
            raise UnsupportedFormatError(
                f"unsupported format: {depth}-bit grayscale ({path})"
            )
        return width, height, depth, 1
    if color_type == _COLOR_RGB:
        if depth != 8:
            raise UnsupportedFormatError(f"unsupported format: {depth}-bit RGB ({path})")
        return width, height, depth, 3
    raise UnsupportedFormatError(f"unsupported format: color type {color_type} ({path})")


def load_image(path: Path | str) -> Image:
    """Decode a grayscale-8/16 or RGB-8 non-interlaced PNG."""
    width, height, depth, channels = _check_layout(path)
    with _PILImage.open(path) as pil:
        arr = np.asarray(pil)
    if arr.dtype == np.int32:
        # some Pillow paths widen 16-bit grayscale to mode "I"
        arr = arr.astype(np.uint16)
    if channels == 1:
        arr = arr.reshape(height, width, 1)
    img = Image(arr, depth)
    if (img.width, img.height, img.channels) != (width, height, channels):
        raise UnsupportedFormatError(f"decoded layout disagrees with header: {path}")
    return img


def save_image(img: Image, path: Path | str) -> None:
    """Encode to PNG; inverse of :func:`load_image` bit-for-bit."""
    if img.channels == 3 and img.bit_depth != 8:
        raise UnsupportedFormatError("unsupported format: 16-bit RGB PNG export")
    if img.channels == 1:
        pil = _PILImage.fromarray(img.pixels[:, :, 0])
    else:
        pil = _PILImage.fromarray(img.pixels)
    pil.save(path, format="PNG")
