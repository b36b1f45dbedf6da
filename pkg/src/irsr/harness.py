"""Submission scoring, report emission, and leaderboard ranking.

Per-image work may fan out over a thread pool bounded by the
``HARNESS_WORKERS`` environment variable; results are reassembled in
manifest order, so reports are byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

from .dataset import Manifest
from .errors import ValidationError
from .image import load_image
from .metrics import (
    DEFAULT_OPTIONS,
    AggregateScore,
    MetricOptions,
    PairScore,
    aggregate,
    evaluate_pair,
    score,
)

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "HARNESS_WORKERS"


@dataclass(frozen=True)
class LeaderboardEntry:
    team: str
    mean_psnr: float
    mean_ssim: float
    total_score: float
    rank: int


def workers_from_env() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValidationError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, n)


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Order-preserving map over a bounded worker pool (1 worker = plain loop)."""
    items = list(items)
    workers = workers_from_env()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def score_submission(
    sr_dir: Path | str,
    manifest: Manifest,
    options: MetricOptions = DEFAULT_OPTIONS,
) -> tuple[list[PairScore], AggregateScore]:
    """Score one SR output per manifest entry against its ground truth."""
    sr_dir = Path(sr_dir)
    withheld = sorted(e.image_id for e in manifest.entries if e.hr_path is None)
    if withheld:
        raise ValidationError(
            f"manifest has no ground truth for: {', '.join(withheld)} (test phase?)"
        )
    missing = sorted(
        e.image_id for e in manifest.entries if not (sr_dir / f"{e.image_id}.png").is_file()
    )
    if missing:
        raise ValidationError(f"missing SR files for: {', '.join(missing)}")

    def one(entry) -> PairScore:
        sr = load_image(sr_dir / f"{entry.image_id}.png")
        gt = load_image(entry.hr_path)
        return evaluate_pair(sr, gt, image_id=entry.image_id, options=options)

    scores = parallel_map(one, manifest.entries)
    return scores, aggregate(scores)


def rank_leaderboard(
    entries: Sequence[tuple[str, float, float]],
) -> list[LeaderboardEntry]:
    """Rank (team, mean_psnr, mean_ssim) rows by recomputed total score.

    Totals are always recomputed as psnr + 20*ssim, never trusted from the
    input. Equal totals are ordered by team name and keep distinct,
    positional ranks.
    """
    if not entries:
        raise ValidationError("cannot rank an empty leaderboard")
    totals = [
        (team, float(p), float(s), score(float(p), float(s))) for team, p, s in entries
    ]
    totals.sort(key=lambda row: (-row[3], row[0]))
    return [
        LeaderboardEntry(team=t, mean_psnr=p, mean_ssim=s, total_score=total, rank=i + 1)
        for i, (t, p, s, total) in enumerate(totals)
    ]


# --- report emission ----------------------------------------------------------


def report_json(
    scores: Sequence[PairScore],
    agg: AggregateScore,
    phase: str,
    scale: int = 4,
    psnr_cap: float = DEFAULT_OPTIONS.psnr_cap,
) -> str:
    doc = {
        "meta": {
            "phase": phase,
            "scale": scale,
            "n_images": agg.n_images,
            "psnr_cap": psnr_cap,
        },
        "per_image": [
            {"image_id": s.image_id, "psnr": s.psnr, "ssim": s.ssim, "score": s.score}
            for s in scores
        ],
        "aggregate": {
            "mean_psnr": agg.mean_psnr,
            "mean_ssim": agg.mean_ssim,
            "mean_score": agg.mean_score,
        },
    }
    return json.dumps(doc, indent=2) + "\n"


def report_csv(scores: Sequence[PairScore]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["image_id", "psnr", "ssim", "score"])
    for s in scores:
        writer.writerow([s.image_id, repr(s.psnr), repr(s.ssim), repr(s.score)])
    return buf.getvalue()


def leaderboard_csv(entries: Sequence[LeaderboardEntry]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["team", "rank", "mean_psnr", "mean_ssim", "total_score"])
    for e in entries:
        writer.writerow([e.team, e.rank, repr(e.mean_psnr), repr(e.mean_ssim), repr(e.total_score)])
    return buf.getvalue()


def read_team_csv(path: Path | str) -> list[tuple[str, float, float]]:
    """Read (team, mean_psnr, mean_ssim) rows; header names are mandatory."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"team", "mean_psnr", "mean_ssim"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValidationError(
                f"team CSV must have columns {sorted(required)}, got {reader.fieldnames}"
            )
        try:
            return [
                (row["team"], float(row["mean_psnr"]), float(row["mean_ssim"]))
                for row in reader
            ]
        except (ValueError, TypeError) as exc:
            raise ValidationError(f"bad numeric value in {path}: {exc}") from exc


def format_summary(agg: AggregateScore) -> str:
    """Four-decimal display line mirroring published leaderboard formatting."""
    return (
        f"n={agg.n_images}  mean_psnr={agg.mean_psnr:.4f}  "
        f"mean_ssim={agg.mean_ssim:.4f}  mean_score={agg.mean_score:.4f}"
    )
