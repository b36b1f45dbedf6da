"""Command-line interface.

Subcommands: degrade, infer, tta-infer, fuse, tune-weights, score, rank,
gen-synth, run-pipeline. ``--config FILE`` reads an INI-style file whose
``[subcommand]`` section overrides any flag of that subcommand (list-valued
flags take one value per line). Exit codes: 0 success, 1 validation error,
2 I/O or engine failure. ``HARNESS_WORKERS`` bounds per-image parallelism.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

from . import __version__
from .dataset import Manifest, ManifestEntry, build_manifest, generate_synthetic_dataset, load_manifest, parse_plan
from .ensemble import EnsembleWeights, fuse, grid_search_alpha
from .errors import EngineError, UnsupportedFormatError, ValidationError
from .harness import (
    format_summary,
    leaderboard_csv,
    parallel_map,
    rank_leaderboard,
    read_team_csv,
    report_csv,
    report_json,
    score_submission,
)
from .image import load_image, quantize, save_image, to_float
from .metrics import MetricOptions
from .models import infer, infer_batch, parse_model_spec
from .resample import degrade_x4
from .tta import tta_infer


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors on stderr with exit code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_metric_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ssim-pad", choices=("valid", "symmetric"), default="valid",
                   help="SSIM windowing convention (default: valid)")
    p.add_argument("--shave", type=int, default=0,
                   help="border pixels to ignore on each side (default: 0)")
    p.add_argument("--round-luma", action="store_true",
                   help="round luminance to integers before scoring")


def _metric_options(args: argparse.Namespace) -> MetricOptions:
    return MetricOptions(ssim_pad=args.ssim_pad, shave=args.shave, round_luma=args.round_luma)


def _add_model_flags(p: argparse.ArgumentParser, multiple: bool) -> None:
    if multiple:
        p.add_argument("--model", action="append", required=True, dest="models",
                       help="engine spec (repeatable): builtin:<filter> or external:<command>")
    else:
        p.add_argument("--model", required=True,
                       help="engine spec: builtin:<filter> or external:<command>")
    p.add_argument("--window-multiple", type=int, default=1,
                   help="pad external inputs to this multiple (default: 1)")
    p.add_argument("--timeout", type=float, default=600.0,
                   help="external engine timeout in seconds (default: 600)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="irsr", description=__doc__)
    parser.add_argument("--version", action="version", version=f"irsr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("degrade", help="bicubic x4 downsampling of an HR directory")
    p.add_argument("--hr", required=True, help="directory of HR PNGs")
    p.add_argument("--out", required=True, help="output directory for LR PNGs")

    p = sub.add_parser("infer", help="run one engine over a directory of LR PNGs")
    _add_model_flags(p, multiple=False)
    p.add_argument("--lr", required=True, help="directory of LR PNGs")
    p.add_argument("--out", required=True, help="output directory for SR PNGs")

    p = sub.add_parser("tta-infer", help="like infer, with 8-fold dihedral averaging")
    _add_model_flags(p, multiple=False)
    p.add_argument("--lr", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fuse", help="weighted per-pixel fusion of aligned SR directories")
    p.add_argument("--inputs", nargs="+", required=True, help="two or more SR directories")
    p.add_argument("--weights", default=None,
                   help="comma-separated convex weights (default: equal)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("tune-weights", help="two-model fusion weight sweep against ground truth")
    p.add_argument("--a", required=True, help="SR directory of the first model")
    p.add_argument("--b", required=True, help="SR directory of the second model")
    p.add_argument("--gt", required=True, help="ground-truth HR directory")
    p.add_argument("--lo", type=float, default=0.30)
    p.add_argument("--hi", type=float, default=0.60)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--candidates", default=None,
                   help="comma-separated explicit alpha list (overrides lo/hi/step)")
    p.add_argument("--out", default=None, help="write the sensitivity table CSV here")
    _add_metric_flags(p)

    p = sub.add_parser("score", help="score an SR directory against a dataset")
    p.add_argument("--sr", required=True, help="directory of SR PNGs named <image_id>.png")
    p.add_argument("--data", required=True,
                   help="dataset root (LR/ + HR/) or a JSON manifest file")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", default=None, help="report path (default: print to stdout)")
    _add_metric_flags(p)

    p = sub.add_parser("rank", help="rank a team CSV into a leaderboard")
    p.add_argument("--input", required=True,
                   help="CSV with columns team,mean_psnr,mean_ssim")
    p.add_argument("--out", default=None, help="leaderboard CSV path")

    p = sub.add_parser("gen-synth", help="generate a seeded synthetic HR/LR dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plan", default="default", help='"WxH:count,..." or "default"')

    p = sub.add_parser("run-pipeline",
                       help="degrade -> infer (optionally TTA) -> fuse -> score, in one go")
    _add_model_flags(p, multiple=True)
    p.add_argument("--hr", required=True, help="directory of HR PNGs")
    p.add_argument("--workdir", required=True)
    p.add_argument("--tta", action="store_true", help="enable 8-fold dihedral averaging")
    p.add_argument("--weights", default=None,
                   help="fusion weights for multiple models (default: equal)")
    p.add_argument("--report", default=None, help="write the JSON report here")
    _add_metric_flags(p)

    for sp in sub.choices.values():
        sp.add_argument("--config", default=None,
                        help="INI file whose [subcommand] section overrides flags")
    return parser


def _convert_like(current, raw: str):
    if isinstance(current, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if isinstance(current, list):
        return [line.strip() for line in raw.splitlines() if line.strip()]
    return raw


def _apply_config(args: argparse.Namespace) -> None:
    path = Path(args.config)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    cfg = configparser.ConfigParser()
    try:
        cfg.read(path)
    except configparser.Error as exc:
        raise ValidationError(f"cannot parse config {path}: {exc}") from exc
    if args.command not in cfg:
        return
    for key, raw in cfg[args.command].items():
        dest = key.replace("-", "_")
        if dest == "model":
            dest = "models" if hasattr(args, "models") else "model"
        if not hasattr(args, dest) or dest in ("command", "config"):
            raise ValidationError(f"config key {key!r} is not a flag of '{args.command}'")
        try:
            setattr(args, dest, _convert_like(getattr(args, dest), raw))
        except ValueError as exc:
            raise ValidationError(f"bad config value for {key!r}: {raw!r} ({exc})") from exc


def _list_pngs(directory: Path | str) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"not a directory: {directory}")
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".png")
    if not files:
        raise ValidationError(f"no PNG files in {directory}")
    return files


def _parse_weights(raw: str | None, n: int) -> EnsembleWeights:
    if raw is None:
        return EnsembleWeights(tuple(1.0 / n for _ in range(n)))
    try:
        values = tuple(float(v) for v in raw.split(","))
    except ValueError as exc:
        raise ValidationError(f"bad weight list {raw!r}") from exc
    return EnsembleWeights(values)


def _load_dataset(data: str) -> Manifest:
    path = Path(data)
    if path.is_file():
        return load_manifest(path)
    return build_manifest(path, phase="validation")


# --- subcommands ---------------------------------------------------------------


def _cmd_degrade(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = _list_pngs(args.hr)

    def one(path: Path) -> None:
        save_image(degrade_x4(load_image(path)), out_dir / path.name)

    parallel_map(one, files)
    print(f"degraded {len(files)} images -> {out_dir}")
    return 0


def _cmd_infer(args, tta: bool = False) -> int:
    model = parse_model_spec(args.model, args.window_multiple, args.timeout)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = _list_pngs(args.lr)
    if tta:
        def one(path: Path) -> None:
            save_image(quantize(tta_infer(model, load_image(path))), out_dir / path.name)

        if model.kind == "builtin":
            parallel_map(one, files)
        else:
            for path in files:  # one engine process at a time
                one(path)
    else:
        if model.kind == "builtin":
            def one(path: Path) -> None:
                save_image(infer(model, load_image(path)), out_dir / path.name)

            parallel_map(one, files)
        else:
            images = [load_image(p) for p in files]
            for path, sr in zip(files, infer_batch(model, images)):
                save_image(sr, out_dir / path.name)
    print(f"{model.name}: wrote {len(files)} SR images -> {out_dir}")
    return 0


def _aligned_stems(dirs: list[Path]) -> list[str]:
    names = [p.name for p in _list_pngs(dirs[0])]
    for d in dirs[1:]:
        missing = sorted(set(names) - {p.name for p in _list_pngs(d)})
        if missing:
            raise ValidationError(f"{d} is missing: {', '.join(missing)}")
        extra = sorted({p.name for p in _list_pngs(d)} - set(names))
        if extra:
            raise ValidationError(f"{d} has unmatched files: {', '.join(extra)}")
    return names


def _cmd_fuse(args) -> int:
    dirs = [Path(d) for d in args.inputs]
    if len(dirs) < 2:
        raise ValidationError("fuse needs at least two input directories")
    weights = _parse_weights(args.weights, len(dirs))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = _aligned_stems(dirs)

    def one(name: str) -> None:
        outputs = [to_float(load_image(d / name)) for d in dirs]
        save_image(fuse(outputs, weights), out_dir / name)

    parallel_map(one, names)
    print(f"fused {len(names)} images with weights {weights.weights} -> {out_dir}")
    return 0


def _cmd_tune_weights(args) -> int:
    dirs = [Path(args.a), Path(args.b), Path(args.gt)]
    names = _aligned_stems([dirs[2], dirs[0], dirs[1]])
    gts = [load_image(dirs[2] / n) for n in names]
    outs_a = [to_float(load_image(dirs[0] / n)) for n in names]
    outs_b = [to_float(load_image(dirs[1] / n)) for n in names]
    candidates = None
    if args.candidates:
        try:
            candidates = [float(v) for v in args.candidates.split(",")]
        except ValueError as exc:
            raise ValidationError(f"bad candidate list {args.candidates!r}") from exc
    result = grid_search_alpha(
        outs_a, outs_b, gts, args.lo, args.hi, args.step,
        candidates=candidates, ids=[Path(n).stem for n in names],
        options=_metric_options(args),
    )
    if args.out:
        Path(args.out).write_text(result.to_csv())
    best = result.best_row
    print(f"best alpha={best.weights[0]:.4f}  mean_psnr={best.mean_psnr:.4f}  "
          f"mean_ssim={best.mean_ssim:.4f}  mean_score={best.mean_score:.4f}")
    return 0


def _cmd_score(args) -> int:
    manifest = _load_dataset(args.data)
    scores, agg = score_submission(args.sr, manifest, options=_metric_options(args))
    body = (
        report_csv(scores)
        if args.format == "csv"
        else report_json(scores, agg, phase=manifest.phase, scale=manifest.scale)
    )
    if args.out:
        Path(args.out).write_text(body)
    else:
        sys.stdout.write(body)
    print(format_summary(agg))
    return 0


def _cmd_rank(args) -> int:
    entries = rank_leaderboard(read_team_csv(args.input))
    if args.out:
        Path(args.out).write_text(leaderboard_csv(entries))
    for e in entries:
        print(f"{e.rank:2d}  {e.team:<20s} psnr={e.mean_psnr:.4f} "
              f"ssim={e.mean_ssim:.4f} score={e.total_score:.4f}")
    return 0


def _cmd_gen_synth(args) -> int:
    manifest = generate_synthetic_dataset(args.out, plan=parse_plan(args.plan), seed=args.seed)
    print(f"wrote {len(manifest)} HR/LR pairs under {args.out}")
    return 0


def _cmd_run_pipeline(args) -> int:
    workdir = Path(args.workdir)
    specs = [parse_model_spec(m, args.window_multiple, args.timeout) for m in args.models]
    weights = _parse_weights(args.weights, len(specs))
    hr_files = _list_pngs(args.hr)

    lr_dir = workdir / "LR"
    lr_dir.mkdir(parents=True, exist_ok=True)

    def degrade_one(path: Path) -> None:
        save_image(degrade_x4(load_image(path)), lr_dir / path.name)

    parallel_map(degrade_one, hr_files)

    sr_dir = workdir / "SR"
    sr_dir.mkdir(parents=True, exist_ok=True)

    def restore(model):
        lr_paths = [lr_dir / p.name for p in hr_files]
        if args.tta:
            def one(path: Path):
                return tta_infer(model, load_image(path))

            if model.kind == "builtin":
                return parallel_map(one, lr_paths)
            return [one(p) for p in lr_paths]
        if model.kind == "builtin":
            return parallel_map(lambda p: to_float(infer(model, load_image(p))), lr_paths)
        return [to_float(sr) for sr in infer_batch(model, [load_image(p) for p in lr_paths])]

    per_model = [restore(spec) for spec in specs]
    for i, path in enumerate(hr_files):
        outputs = [outs[i] for outs in per_model]
        fused = fuse(outputs, weights) if len(outputs) > 1 else quantize(outputs[0])
        save_image(fused, sr_dir / path.name)

    manifest = Manifest(
        entries=tuple(
            ManifestEntry(image_id=p.stem, lr_path=lr_dir / p.name, hr_path=p)
            for p in hr_files
        ),
        phase="validation",
    )
    scores, agg = score_submission(sr_dir, manifest, options=_metric_options(args))
    if args.report:
        Path(args.report).write_text(
            report_json(scores, agg, phase=manifest.phase, scale=manifest.scale)
        )
    print(format_summary(agg))
    return 0


_COMMANDS = {
    "degrade": _cmd_degrade,
    "infer": _cmd_infer,
    "tta-infer": lambda args: _cmd_infer(args, tta=True),
    "fuse": _cmd_fuse,
    "tune-weights": _cmd_tune_weights,
    "score": _cmd_score,
    "rank": _cmd_rank,
    "gen-synth": _cmd_gen_synth,
    "run-pipeline": _cmd_run_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            _apply_config(args)
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UnsupportedFormatError, EngineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
