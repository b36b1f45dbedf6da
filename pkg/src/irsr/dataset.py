"""Dataset manifests and synthetic paired-data generation.

The default on-disk layout is ``root/LR/*.png`` and ``root/HR/*.png`` with
pairing by filename; an explicit JSON manifest is also accepted for odd
layouts. Manifest order is always lexicographic by filename, so every
downstream report is a pure function of the dataset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import ValidationError
from .image import Image, save_image
from .resample import degrade_x4

PHASES = ("validation", "test")

# Size classes follow the published resolution inventory of the target
# benchmark, at desk-scale counts (10 images total).
DEFAULT_PLAN: tuple[tuple[tuple[int, int], int], ...] = (
    ((320, 256), 2),
    ((120, 120), 2),
    ((64, 64), 4),
    ((256, 256), 1),
    ((160, 128), 1),
)

_SYNTH_BLUR_SIGMA = 4.0  # suppresses energy above the x4-decimated Nyquist rate


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    lr_path: Path
    hr_path: Path | None = None


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]
    phase: str
    scale: int = 4

    def __post_init__(self) -> None:
        if self.phase not in PHASES:
            raise ValidationError(f"phase must be one of {PHASES}, got {self.phase!r}")
        if not self.entries:
            raise ValidationError("manifest is empty")
        ids = [e.image_id for e in self.entries]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate image ids in manifest: {', '.join(dupes)}")
        for e in self.entries:
            if not Path(e.lr_path).is_file():
                raise ValidationError(f"missing LR file for '{e.image_id}': {e.lr_path}")
            if e.hr_path is not None and not Path(e.hr_path).is_file():
                raise ValidationError(f"missing HR file for '{e.image_id}': {e.hr_path}")
            if self.phase == "validation" and e.hr_path is None:
                raise ValidationError(
                    f"validation manifest requires HR for '{e.image_id}'"
                )

    def __len__(self) -> int:
        return len(self.entries)


def build_manifest(root: Path | str, phase: str = "validation") -> Manifest:
    """Scan ``root/LR`` (+ ``root/HR``) and pair files by name, sorted."""
    root = Path(root)
    lr_dir = root / "LR"
    hr_dir = root / "HR"
    if not lr_dir.is_dir():
        raise ValidationError(f"missing LR directory: {lr_dir}")
    lr_files = sorted(p for p in lr_dir.iterdir() if p.suffix.lower() == ".png")
    if not lr_files:
        raise ValidationError(f"empty dataset: no PNG files in {lr_dir}")
    hr_files = (
        {p.name: p for p in hr_dir.iterdir() if p.suffix.lower() == ".png"}
        if hr_dir.is_dir()
        else {}
    )
    if phase == "validation":
        if not hr_dir.is_dir():
            raise ValidationError(f"missing HR directory: {hr_dir}")
        missing = sorted(p.name for p in lr_files if p.name not in hr_files)
        if missing:
            raise ValidationError(f"HR files missing for: {', '.join(missing)}")
        orphans = sorted(set(hr_files) - {p.name for p in lr_files})
        if orphans:
            raise ValidationError(f"HR files without LR counterpart: {', '.join(orphans)}")
    entries = tuple(
        ManifestEntry(image_id=p.stem, lr_path=p, hr_path=hr_files.get(p.name))
        for p in lr_files
    )
    return Manifest(entries=entries, phase=phase)


def save_manifest(manifest: Manifest, path: Path | str) -> None:
    doc = {
        "phase": manifest.phase,
        "scale": manifest.scale,
        "entries": [
            {
                "image_id": e.image_id,
                "lr_path": str(e.lr_path),
                "hr_path": None if e.hr_path is None else str(e.hr_path),
            }
            for e in manifest.entries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_manifest(path: Path | str) -> Manifest:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not a JSON manifest: {path} ({exc})") from exc
    try:
        entries = tuple(
            ManifestEntry(
                image_id=e["image_id"],
                lr_path=Path(e["lr_path"]),
                hr_path=None if e.get("hr_path") is None else Path(e["hr_path"]),
            )
            for e in doc["entries"]
        )
        return Manifest(entries=entries, phase=doc["phase"], scale=doc.get("scale", 4))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed manifest {path}: missing {exc}") from exc


def parse_plan(text: str) -> tuple[tuple[tuple[int, int], int], ...]:
    """Parse ``"320x256:2,64x64:4"`` into a resolution plan."""
    if text == "default":
        return DEFAULT_PLAN
    plan = []
    for item in text.split(","):
        item = item.strip()
        try:
            size, count = item.split(":")
            w, h = size.lower().split("x")
            plan.append(((int(w), int(h)), int(count)))
        except ValueError as exc:
            raise ValidationError(f"bad plan item {item!r}, expected WxH:count") from exc
    if not plan:
        raise ValidationError("empty resolution plan")
    return tuple(plan)


def _synthetic_field(rng: np.random.Generator, width: int, height: int) -> Image:
    """Band-limited random field, stretched to the full 8-bit range.

    White noise alone would make x4 restoration vacuous; blurring to below
    the decimated Nyquist rate keeps the degradation informative.
    """
    noise = rng.standard_normal((height, width))
    field = gaussian_filter(noise, sigma=_SYNTH_BLUR_SIGMA, mode="reflect")
    lo = field.min()
    hi = field.max()
    if hi == lo:
        arr = np.full((height, width), 128, dtype=np.uint8)
    else:
        scaled = (field - lo) / (hi - lo) * 255.0
        arr = np.clip(np.floor(scaled + 0.5), 0.0, 255.0).astype(np.uint8)
    return Image(arr[:, :, None], 8)


def generate_synthetic_dataset(
    out_dir: Path | str,
    plan: tuple[tuple[tuple[int, int], int], ...] = DEFAULT_PLAN,
    seed: int = 0,
) -> Manifest:
    """Write a seeded HR/LR pair set; byte-identical for identical (seed, plan)."""
    for (w, h), _count in plan:
        if w % 4 or h % 4:
            raise ValidationError(f"plan resolution {w}x{h} not divisible by 4")
    out_dir = Path(out_dir)
    hr_dir = out_dir / "HR"
    lr_dir = out_dir / "LR"
    hr_dir.mkdir(parents=True, exist_ok=True)
    lr_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    index = 0
    for (w, h), count in plan:
        for _ in range(count):
            hr = _synthetic_field(rng, w, h)
            name = f"synth_{index:04d}_{w}x{h}.png"
            save_image(hr, hr_dir / name)
            save_image(degrade_x4(hr), lr_dir / name)
            index += 1
    return build_manifest(out_dir, phase="validation")
