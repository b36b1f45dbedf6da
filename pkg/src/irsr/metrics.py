"""Official scoring protocol: single-channel PSNR, SSIM, and PSNR + 20*SSIM.

Declared conventions (each is a default, not a hidden assumption):

* metrics run on the unrounded float luminance of each image, full frame,
  no border shave (``shave``/``round_luma`` flags change this);
* PSNR is 10*log10(peak^2 / MSE) with MSE accumulated exactly
  (``math.fsum``), and a zero-MSE pair scores the finite cap ``psnr_cap``
  (default 100 dB) so aggregates stay finite;
* SSIM uses an 11x11 Gaussian window, sigma 1.5, weights normalized to sum
  1, C1 = (0.01*peak)^2, C2 = (0.03*peak)^2, and valid windowing (map size
  (w-10) x (h-10)); ``ssim_pad="symmetric"`` switches to mirror padding
  with a full-size map.

Both metrics are exactly invariant under the eight square symmetries: PSNR
because the exact sum of squared differences is order-independent, SSIM
because the pair is brought into a canonical orientation before filtering,
which pins down the (otherwise orientation-dependent) float rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ValidationError
from .image import FloatImage, Image, luma_float

PSNR_CAP_DB = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SCORE_SSIM_WEIGHT = 20.0

_offsets = np.arange(SSIM_WINDOW, dtype=np.float64) - (SSIM_WINDOW - 1) / 2.0
_GAUSS = np.exp(-(_offsets**2) / (2.0 * SSIM_SIGMA**2))
_GAUSS /= _GAUSS.sum()


@dataclass(frozen=True)
class MetricOptions:
    """Scoring conventions surfaced as flags; defaults follow the protocol."""

    psnr_cap: float = PSNR_CAP_DB
    ssim_pad: str = "valid"  # "valid" | "symmetric"
    shave: int = 0
    round_luma: bool = False

    def __post_init__(self) -> None:
        if self.ssim_pad not in ("valid", "symmetric"):
            raise ValidationError(f"ssim_pad must be 'valid' or 'symmetric', got {self.ssim_pad!r}")
        if self.shave < 0:
            raise ValidationError(f"shave must be >= 0, got {self.shave}")


DEFAULT_OPTIONS = MetricOptions()


@dataclass(frozen=True)
class PairScore:
    image_id: str
    psnr: float
    ssim: float
    score: float


@dataclass(frozen=True)
class AggregateScore:
    mean_psnr: float
    mean_ssim: float
    mean_score: float
    n_images: int


def score(psnr_db: float, ssim_value: float) -> float:
    """Combined metric: PSNR + 20 * SSIM."""
    return psnr_db + SCORE_SSIM_WEIGHT * ssim_value


def _check_pair(a: FloatImage, b: FloatImage) -> None:
    if a.channels != 1 or b.channels != 1:
        raise ValidationError(
            f"metrics expect single-channel images, got {a.channels} and {b.channels} channels"
        )
    if (a.height, a.width) != (b.height, b.width):
        raise ValidationError(
            f"image size mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    if a.peak != b.peak:
        raise ValidationError(f"peak mismatch: {a.peak} vs {b.peak}")


def psnr(a: FloatImage, b: FloatImage, cap: float = PSNR_CAP_DB) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs score ``cap``."""
    _check_pair(a, b)
    diff = (a.samples - b.samples).ravel()
    sq = diff * diff
    mse = math.fsum(sq.tolist()) / sq.size
    if mse == 0.0:
        return cap
    return 10.0 * math.log10(a.peak * a.peak / mse)


def _filter_valid(x: np.ndarray) -> np.ndarray:
    """Separable Gaussian windowing, keeping only fully-interior windows."""
    v = sliding_window_view(x, SSIM_WINDOW, axis=1) @ _GAUSS
    return sliding_window_view(v, SSIM_WINDOW, axis=0) @ _GAUSS


def _orientations(arr: np.ndarray):
    for flip in (False, True):
        base = arr[:, ::-1] if flip else arr
        for k in range(4):
            yield np.ascontiguousarray(np.rot90(base, k))


def _canonical_pair(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orientation of a pair, invariant under joint D4 action.

    The eight jointly-transformed candidates are ranked by (shape, byte
    content); the key is symmetric in (x, y) so metric symmetry survives.
    """
    best_key = None
    best = (x, y)
    for tx, ty in zip(_orientations(x), _orientations(y)):
        bx, by = tx.tobytes(), ty.tobytes()
        key = (tx.shape[0], tx.shape[1]) + ((bx, by) if bx <= by else (by, bx))
        if best_key is None or key < best_key:
            best_key = key
            best = (tx, ty)
    return best


def ssim(a: FloatImage, b: FloatImage, pad: str = "valid") -> float:
    """Mean structural similarity over the window map; symmetric in (a, b)."""
    _check_pair(a, b)
    if pad not in ("valid", "symmetric"):
        raise ValidationError(f"pad must be 'valid' or 'symmetric', got {pad!r}")
    x = a.samples[:, :, 0]
    y = b.samples[:, :, 0]
    if pad == "valid" and (x.shape[0] < SSIM_WINDOW or x.shape[1] < SSIM_WINDOW):
        raise ValidationError(
            f"image {x.shape[1]}x{x.shape[0]} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    x, y = _canonical_pair(x, y)
    if pad == "symmetric":
        half = (SSIM_WINDOW - 1) // 2
        x = np.pad(x, half, mode="symmetric")
        y = np.pad(y, half, mode="symmetric")
    peak = a.peak
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    mu1 = _filter_valid(x)
    mu2 = _filter_valid(y)
    e11 = _filter_valid(x * x)
    e22 = _filter_valid(y * y)
    e12 = _filter_valid(x * y)
    s11 = e11 - mu1 * mu1
    s22 = e22 - mu2 * mu2
    s12 = e12 - mu1 * mu2
    num = (2.0 * mu1 * mu2 + c1) * (2.0 * s12 + c2)
    den = (mu1 * mu1 + mu2 * mu2 + c1) * (s11 + s22 + c2)
    ssim_map = num / den
    return math.fsum(ssim_map.ravel().tolist()) / ssim_map.size


def _shaved(f: FloatImage, shave: int) -> FloatImage:
    if shave == 0:
        return f
    if 2 * shave >= min(f.height, f.width):
        raise ValidationError(
            f"shave {shave} leaves no pixels in a {f.width}x{f.height} image"
        )
    return FloatImage(f.samples[shave:-shave, shave:-shave], f.peak)


def _rounded(f: FloatImage) -> FloatImage:
    return FloatImage(np.clip(np.floor(f.samples + 0.5), 0.0, f.peak), f.peak)


def evaluate_pair(
    sr: Image,
    gt: Image,
    image_id: str = "",
    options: MetricOptions = DEFAULT_OPTIONS,
) -> PairScore:
    """Score one restored image against its ground truth on the luma channel."""
    if (sr.width, sr.height) != (gt.width, gt.height):
        raise ValidationError(
            f"image size mismatch for '{image_id}': sr {sr.width}x{sr.height}, "
            f"gt {gt.width}x{gt.height}"
        )
    if sr.bit_depth != gt.bit_depth:
        raise ValidationError(
            f"bit depth mismatch for '{image_id}': sr {sr.bit_depth}, gt {gt.bit_depth}"
        )
    ya = _shaved(luma_float(sr), options.shave)
    yb = _shaved(luma_float(gt), options.shave)
    if options.round_luma:
        ya, yb = _rounded(ya), _rounded(yb)
    p = psnr(ya, yb, cap=options.psnr_cap)
    s = ssim(ya, yb, pad=options.ssim_pad)
    return PairScore(image_id=image_id, psnr=p, ssim=s, score=score(p, s))


def aggregate(scores: Sequence[PairScore]) -> AggregateScore:
    """Arithmetic means in input order; mean_score = mean_psnr + 20*mean_ssim.

    The combined-then-averaged and averaged-then-combined readings agree up
    to float rounding (linearity); the latter is taken as the definition so
    the identity holds exactly.
    """
    if not scores:
        raise ValidationError("cannot aggregate an empty score list")
    n = len(scores)
    mean_psnr = math.fsum(s.psnr for s in scores) / n
    mean_ssim = math.fsum(s.ssim for s in scores) / n
    return AggregateScore(
        mean_psnr=mean_psnr,
        mean_ssim=mean_ssim,
        mean_score=score(mean_psnr, mean_ssim),
        n_images=n,
    )
