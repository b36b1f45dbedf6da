#!/usr/bin/env python3
"""Desk-scale baseline experiment.

Generates a seeded synthetic validation set, evaluates every built-in
classical upscaler with and without dihedral TTA, sweeps the fusion weight
of the two best engines, and prints the whole thing as a leaderboard.

Usage:
    python scripts/baseline_experiment.py [--workdir DIR] [--seed N]
"""

import argparse
import tempfile
from pathlib import Path

from irsr import (
    FILTERS,
    builtin_model,
    build_manifest,
    fuse,
    generate_synthetic_dataset,
    grid_search_alpha,
    infer,
    leaderboard_csv,
    load_image,
    quantize,
    rank_leaderboard,
    save_image,
    score_submission,
    to_float,
    tta_infer,
)


def evaluate(tag, outputs, manifest, workdir):
    sr_dir = workdir / f"SR_{tag}"
    sr_dir.mkdir(parents=True, exist_ok=True)
    for entry, sr in zip(manifest.entries, outputs):
        save_image(sr, sr_dir / f"{entry.image_id}.png")
    _, agg = score_submission(sr_dir, manifest)
    print(f"  {tag:<24s} psnr={agg.mean_psnr:8.4f}  ssim={agg.mean_ssim:.4f}  "
          f"score={agg.mean_score:8.4f}")
    return agg


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default=None)
    parser.add_argument("--seed", type=int, default=2026)
    args = parser.parse_args()

    workdir = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp(prefix="irsr-exp-"))
    print(f"workdir: {workdir}")

    manifest = generate_synthetic_dataset(workdir / "data", seed=args.seed)
    lrs = [load_image(e.lr_path) for e in manifest.entries]
    print(f"dataset: {len(manifest)} synthetic HR/LR pairs (seed {args.seed})")

    results = {}
    float_outputs = {}
    print("\nper-engine results:")
    for kind in ("nearest", "bilinear", "bicubic", "lanczos3"):
        model = builtin_model(FILTERS[kind])
        plain = [infer(model, lr) for lr in lrs]
        results[kind] = evaluate(kind, plain, manifest, workdir)
        averaged = [tta_infer(model, lr) for lr in lrs]
        float_outputs[kind] = averaged
        results[f"{kind}+tta"] = evaluate(
            f"{kind}+tta", [quantize(f) for f in averaged], manifest, workdir
        )

    ranked_engines = sorted(results, key=lambda k: -results[k].mean_score)
    first, second = ranked_engines[0].split("+")[0], None
    for name in ranked_engines[1:]:
        base = name.split("+")[0]
        if base != first:
            second = base
            break

    print(f"\nfusion sweep: {first} vs {second}, alpha in [0.30, 0.60] step 0.01")
    gts = [load_image(e.hr_path) for e in manifest.entries]
    sweep = grid_search_alpha(
        float_outputs[first], float_outputs[second], gts,
        ids=[e.image_id for e in manifest.entries],
    )
    best = sweep.best_row
    (workdir / "weight_sweep.csv").write_text(sweep.to_csv())
    print(f"  best alpha={best.weights[0]:.2f} -> score={best.mean_score:.4f} "
          f"(table: {workdir / 'weight_sweep.csv'})")

    fused = [
        fuse([a, b], best.weights)
        for a, b in zip(float_outputs[first], float_outputs[second])
    ]
    results[f"fused({first},{second})"] = evaluate(
        "fused", fused, manifest, workdir
    )

    board = rank_leaderboard(
        [(name, agg.mean_psnr, agg.mean_ssim) for name, agg in results.items()]
    )
    print("\nleaderboard:")
    for e in board:
        print(f"  {e.rank:2d}  {e.team:<28s} {e.total_score:8.4f}")
    (workdir / "leaderboard.csv").write_text(leaderboard_csv(board))
    print(f"\nartifacts under {workdir}")


if __name__ == "__main__":
    main()
