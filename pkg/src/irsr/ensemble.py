"""Convex per-pixel fusion of SR outputs and exhaustive fusion-weight search.

Weight search is metric-driven: every candidate weight vector is applied to
the per-image float outputs, the fused results are scored against ground
truth, and the candidate with the highest mean score wins. Ties break
toward the lexicographically smallest weight vector, which makes results
deterministic in the near-flat regions weight sweeps tend to have.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .image import FloatImage, Image, quantize
from .metrics import DEFAULT_OPTIONS, MetricOptions, evaluate_pair, score

WEIGHT_SUM_TOL = 1e-12
DEFAULT_SIMPLEX_CAP = 200_000


@dataclass(frozen=True)
class EnsembleWeights:
    """Convex combination coefficients: nonnegative, summing to 1."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        ws = tuple(float(w) for w in self.weights)
        if not ws:
            raise ValidationError("weight vector is empty")
        if any(w < 0.0 for w in ws):
            raise ValidationError(f"weights must be nonnegative, got {ws}")
        if abs(math.fsum(ws) - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got {ws}")
        object.__setattr__(self, "weights", ws)

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class WeightRow:
    weights: tuple[float, ...]
    mean_psnr: float
    mean_ssim: float
    mean_score: float


@dataclass(frozen=True)
class WeightSearchResult:
    best_weights: EnsembleWeights
    table: tuple[WeightRow, ...]

    @property
    def best_row(self) -> WeightRow:
        for row in self.table:
            if row.weights == self.best_weights.weights:
                return row
        raise ValidationError("best weights missing from the result table")

    def to_csv(self) -> str:
        n = len(self.best_weights)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"w{i + 1}" for i in range(n)] + ["mean_psnr", "mean_ssim", "mean_score"])
        for row in self.table:
            writer.writerow(
                [repr(w) for w in row.weights]
                + [repr(row.mean_psnr), repr(row.mean_ssim), repr(row.mean_score)]
            )
        return buf.getvalue()


def fuse(outputs: Sequence[FloatImage], weights: EnsembleWeights | Sequence[float]) -> Image:
    """Per-pixel convex combination in float, quantized once at the end."""
    if not isinstance(weights, EnsembleWeights):
        weights = EnsembleWeights(tuple(weights))
    if len(outputs) != len(weights):
        raise ValidationError(f"{len(outputs)} outputs but {len(weights)} weights")
    first = outputs[0]
    for out in outputs[1:]:
        if out.samples.shape != first.samples.shape:
            raise ValidationError(
                f"shape mismatch in fusion inputs: {out.samples.shape} vs {first.samples.shape}"
            )
        if out.peak != first.peak:
            raise ValidationError(f"peak mismatch in fusion inputs: {out.peak} vs {first.peak}")
    acc = np.zeros_like(first.samples)
    for w, out in zip(weights.weights, outputs):
        acc += w * out.samples
    return quantize(FloatImage(acc, first.peak))


def select_best(rows: Sequence[WeightRow]) -> WeightRow:
    """Argmax of mean_score; ties go to the lexicographically smallest weights."""
    if not rows:
        raise ValidationError("cannot select from an empty table")
    best = rows[0]
    for row in rows[1:]:
        if row.mean_score > best.mean_score or (
            row.mean_score == best.mean_score and row.weights < best.weights
        ):
            best = row
    return best


def _score_candidate(
    weights: EnsembleWeights,
    per_model: Sequence[Sequence[FloatImage]],
    gts: Sequence[Image],
    ids: Sequence[str],
    options: MetricOptions,
) -> WeightRow:
    psnrs, ssims = [], []
    for i, gt in enumerate(gts):
        fused = fuse([outputs[i] for outputs in per_model], weights)
        pair = evaluate_pair(fused, gt, image_id=ids[i], options=options)
        psnrs.append(pair.psnr)
        ssims.append(pair.ssim)
    n = len(gts)
    mean_psnr = math.fsum(psnrs) / n
    mean_ssim = math.fsum(ssims) / n
    return WeightRow(weights.weights, mean_psnr, mean_ssim, score(mean_psnr, mean_ssim))


def _check_aligned(per_model: Sequence[Sequence[FloatImage]], gts: Sequence[Image],
                   ids: Sequence[str] | None) -> list[str]:
    if not gts:
        raise ValidationError("weight search needs at least one ground-truth image")
    for outputs in per_model:
        if len(outputs) != len(gts):
            raise ValidationError(
                f"misaligned manifests: {len(outputs)} outputs vs {len(gts)} ground truths"
            )
    if ids is None:
        return [f"{i:04d}" for i in range(len(gts))]
    if len(ids) != len(gts):
        raise ValidationError(f"{len(ids)} ids for {len(gts)} images")
    return list(ids)


def grid_search_alpha(
    outputs_a: Sequence[FloatImage],
    outputs_b: Sequence[FloatImage],
    gts: Sequence[Image],
    lo: float = 0.30,
    hi: float = 0.60,
    step: float = 0.01,
    *,
    candidates: Sequence[float] | None = None,
    ids: Sequence[str] | None = None,
    options: MetricOptions = DEFAULT_OPTIONS,
) -> WeightSearchResult:
    """Two-model sweep over alpha (first-model weight); fusion is (alpha, 1-alpha).

    ``candidates`` overrides the uniform grid, for sweeps over an explicit
    list of alphas.
    """
    names = _check_aligned([outputs_a, outputs_b], gts, ids)
    if candidates is None:
        if lo > hi:
            raise ValidationError(f"lo must be <= hi, got [{lo}, {hi}]")
        if step <= 0:
            raise ValidationError(f"step must be positive, got {step}")
        alphas = []
        k = 0
        while True:
            alpha = lo + k * step
            if alpha > hi + 1e-9:
                break
            alphas.append(min(alpha, 1.0))
            k += 1
    else:
        alphas = [float(a) for a in candidates]
        if not alphas:
            raise ValidationError("empty candidate list")
    rows = [
        _score_candidate(
            EnsembleWeights((alpha, 1.0 - alpha)), [outputs_a, outputs_b], gts, names, options
        )
        for alpha in alphas
    ]
    best = select_best(rows)
    return WeightSearchResult(EnsembleWeights(best.weights), tuple(rows))


def _compositions(total: int, parts: int):
    """All nonnegative integer vectors of length ``parts`` summing to ``total``,
    in lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def grid_search_simplex(
    per_model: Sequence[Sequence[FloatImage]],
    gts: Sequence[Image],
    step: float,
    *,
    max_candidates: int = DEFAULT_SIMPLEX_CAP,
    ids: Sequence[str] | None = None,
    options: MetricOptions = DEFAULT_OPTIONS,
) -> WeightSearchResult:
    """Exhaustive sweep of the N-model probability simplex at resolution ``step``."""
    n_models = len(per_model)
    if n_models < 2:
        raise ValidationError(f"simplex search needs >= 2 models, got {n_models}")
    if step <= 0:
        raise ValidationError(f"step must be positive, got {step}")
    divisions = round(1.0 / step)
    if divisions < 1 or abs(divisions * step - 1.0) > 1e-9:
        raise ValidationError(f"step {step} does not divide 1")
    names = _check_aligned(per_model, gts, ids)
    n_points = math.comb(divisions + n_models - 1, n_models - 1)
    if n_points > max_candidates:
        raise ValidationError(
            f"simplex grid has {n_points} points, exceeding the budget of {max_candidates}"
        )
    rows = [
        _score_candidate(
            EnsembleWeights(tuple(k / divisions for k in ks)), per_model, gts, names, options
        )
        for ks in _compositions(divisions, n_models)
    ]
    best = select_best(rows)
    return WeightSearchResult(EnsembleWeights(best.weights), tuple(rows))
