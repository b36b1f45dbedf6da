"""SR engine abstraction: built-in classical upscalers and external programs.

External engines are opaque commands speaking a directory-of-PNGs protocol:
the command template is instantiated with absolute ``{input_dir}`` and
``{output_dir}`` paths (and optionally ``{scale}``), the child inherits the
parent environment plus ``HARNESS_SCALE``, exit code 0 means success, and
the engine must write exactly one PNG per input with the same filename and
x4 dimensions.

Every engine run is wrapped in reflect padding up to the engine's window
multiple and a top-left crop back to the exact x4 target, so window-based
engines never see awkward sizes. Padding mirrors interior samples without
repeating the edge and is applied on the right/bottom only, which keeps the
origin fixed for the final crop.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EngineError, ValidationError
from .image import Image, load_image, png_header, save_image
from .resample import FILTERS, Filter, upscale_x4

DEFAULT_TIMEOUT = 600.0


@dataclass(frozen=True)
class ModelSpec:
    """One SR engine: either a built-in filter or an external command."""

    name: str
    kind: str  # "builtin" | "external"
    filter: Filter | None = None
    command_template: str | None = None
    window_multiple: int = 1
    timeout: float = DEFAULT_TIMEOUT
    scale: int = 4

    def __post_init__(self) -> None:
        if self.kind not in ("builtin", "external"):
            raise ValidationError(f"model kind must be 'builtin' or 'external', got {self.kind!r}")
        if self.scale != 4:
            raise ValidationError(f"only scale 4 is supported, got {self.scale}")
        if self.kind == "builtin":
            if self.filter is None:
                raise ValidationError("builtin model needs a filter")
        else:
            if not self.command_template:
                raise ValidationError("external model needs a command template")
            for placeholder in ("{input_dir}", "{output_dir}"):
                if placeholder not in self.command_template:
                    raise ValidationError(
                        f"command template must contain {placeholder}: {self.command_template!r}"
                    )
        if self.window_multiple < 1:
            raise ValidationError(f"window multiple must be >= 1, got {self.window_multiple}")


def builtin_model(filt: Filter, name: str | None = None) -> ModelSpec:
    if name is None:
        name = f"builtin-{filt.kind}" if isinstance(filt, Filter) else "builtin"
    return ModelSpec(name=name, kind="builtin", filter=filt)


def external_model(
    command_template: str,
    window_multiple: int = 1,
    timeout: float = DEFAULT_TIMEOUT,
    name: str = "external",
) -> ModelSpec:
    return ModelSpec(
        name=name,
        kind="external",
        command_template=command_template,
        window_multiple=window_multiple,
        timeout=timeout,
    )


def parse_model_spec(
    text: str, window_multiple: int = 1, timeout: float = DEFAULT_TIMEOUT
) -> ModelSpec:
    """CLI syntax: ``builtin:<filter>`` (or a bare filter name), ``external:<command>``."""
    if text.startswith("external:"):
        return external_model(text[len("external:") :].strip(), window_multiple, timeout)
    name = text[len("builtin:") :] if text.startswith("builtin:") else text
    if name not in FILTERS:
        raise ValidationError(
            f"unknown model spec {text!r}; use builtin:<{'|'.join(FILTERS)}> or external:<command>"
        )
    return builtin_model(FILTERS[name])


def pad_reflect_to_multiple(img: Image, m: int) -> tuple[Image, int, int]:
    """Raise each dimension to the next multiple of ``m`` by mirror padding.

    Returns (padded image, original width, original height) so callers can
    crop the engine output back afterwards.
    """
    if m < 1:
        raise ValidationError(f"multiple must be >= 1, got {m}")
    pad_w = (-img.width) % m
    pad_h = (-img.height) % m
    if pad_w == 0 and pad_h == 0:
        return img, img.width, img.height
    if pad_w > img.width - 1 or pad_h > img.height - 1:
        raise ValidationError(
            f"image {img.width}x{img.height} too small to reflect-pad by "
            f"{pad_w}x{pad_h} (needs a neighbor to mirror)"
        )
    arr = np.pad(img.pixels, ((0, pad_h), (0, pad_w), (0, 0)), mode="reflect")
    return Image(arr, img.bit_depth), img.width, img.height


def crop_to_scale(sr: Image, orig_w: int, orig_h: int, scale: int) -> Image:
    """Top-left crop to exactly (scale*orig_w) x (scale*orig_h)."""
    target_w, target_h = scale * orig_w, scale * orig_h
    if sr.width < target_w or sr.height < target_h:
        raise ValidationError(
            f"SR image {sr.width}x{sr.height} smaller than target {target_w}x{target_h}"
        )
    return Image(sr.pixels[:target_h, :target_w], sr.bit_depth)


def run_external_batch(model: ModelSpec, lr_dir: Path | str, out_dir: Path | str) -> None:
    """Run one external engine over a directory of LR PNGs.

    Success requires exit code 0 and exactly one output PNG per input with
    the same filename and x4 dimensions; anything else raises EngineError
    naming the offending file.
    """
    if model.kind != "external":
        raise ValidationError(f"model '{model.name}' is not an external engine")
    lr_dir = Path(lr_dir).resolve()
    out_dir = Path(out_dir).resolve()
    inputs = sorted(p for p in lr_dir.iterdir() if p.suffix.lower() == ".png")
    if not inputs:
        raise ValidationError(f"no PNG inputs in {lr_dir}")
    in_sizes = {p.name: png_header(p)[:2] for p in inputs}
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        tokens = shlex.split(model.command_template)
        argv = [
            tok.format(input_dir=str(lr_dir), output_dir=str(out_dir), scale=model.scale)
            for tok in tokens
        ]
    except (KeyError, IndexError, ValueError) as exc:
        raise ValidationError(
            f"bad command template for '{model.name}': {model.command_template!r} ({exc})"
        ) from exc

    env = dict(os.environ, HARNESS_SCALE=str(model.scale))
    try:
        proc = subprocess.run(
            argv, capture_output=True, timeout=model.timeout, env=env, text=True
        )
    except subprocess.TimeoutExpired as exc:
        raise EngineError(
            f"engine '{model.name}' timed out after {model.timeout}s"
        ) from exc
    except OSError as exc:
        raise EngineError(f"engine '{model.name}' failed to start: {exc}") from exc
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout or "").strip()[-2000:]
        raise EngineError(
            f"engine '{model.name}' exited with code {proc.returncode}: {tail}"
        )

    produced = {p.name for p in out_dir.iterdir() if p.suffix.lower() == ".png"}
    missing = sorted(set(in_sizes) - produced)
    if missing:
        raise EngineError(f"engine '{model.name}' produced no output for: {', '.join(missing)}")
    extra = sorted(produced - set(in_sizes))
    if extra:
        raise EngineError(f"engine '{model.name}' produced unexpected outputs: {', '.join(extra)}")
    for name, (w, h) in in_sizes.items():
        ow, oh, _, _, _ = png_header(out_dir / name)
        if (ow, oh) != (model.scale * w, model.scale * h):
            raise EngineError(
                f"model output shape mismatch for '{name}': expected "
                f"{model.scale * w}x{model.scale * h}, got {ow}x{oh}"
            )


def infer(model: ModelSpec, lr: Image) -> Image:
    """Pad -> run engine -> crop; output is exactly 4w x 4h."""
    multiple = model.window_multiple if model.kind == "external" else 1
    padded, orig_w, orig_h = pad_reflect_to_multiple(lr, multiple)
    if model.kind == "builtin":
        sr = upscale_x4(padded, model.filter)
    else:
        with tempfile.TemporaryDirectory(prefix="irsr-engine-") as tmp:
            in_dir = Path(tmp) / "lr"
            out_dir = Path(tmp) / "sr"
            in_dir.mkdir()
            save_image(padded, in_dir / "input.png")
            run_external_batch(model, in_dir, out_dir)
            sr = load_image(out_dir / "input.png")
    return crop_to_scale(sr, orig_w, orig_h, model.scale)


def infer_batch(model: ModelSpec, images: Sequence[Image]) -> list[Image]:
    """Batch inference; external engines get a single invocation for all images."""
    if model.kind == "builtin":
        return [infer(model, img) for img in images]
    with tempfile.TemporaryDirectory(prefix="irsr-engine-") as tmp:
        in_dir = Path(tmp) / "lr"
        out_dir = Path(tmp) / "sr"
        in_dir.mkdir()
        originals = []
        for i, img in enumerate(images):
            padded, orig_w, orig_h = pad_reflect_to_multiple(img, model.window_multiple)
            originals.append((orig_w, orig_h))
            save_image(padded, in_dir / f"{i:05d}.png")
        run_external_batch(model, in_dir, out_dir)
        return [
            crop_to_scale(load_image(out_dir / f"{i:05d}.png"), w, h, model.scale)
            for i, (w, h) in enumerate(originals)
        ]
