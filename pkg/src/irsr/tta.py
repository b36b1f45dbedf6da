"""Eight-fold geometric test-time augmentation with inverse-transform averaging.

Each LR image is super-resolved once per square symmetry, the outputs are
mapped back through the inverse transforms, and the eight results are
averaged in float. The average is deliberately not quantized here: fusion
across models happens downstream and should see unrounded values.

For external engines the eight transformed (and padded) copies are written
into one exchange directory and processed in a single engine invocation.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from .dihedral import ALL_TRANSFORMS, d4_apply, d4_inverse
from .image import FloatImage, Image, load_image, save_image
from .models import ModelSpec, crop_to_scale, infer, pad_reflect_to_multiple, run_external_batch


def tta_infer(model: ModelSpec, lr: Image) -> FloatImage:
    """Dihedral self-ensemble of one engine on one image (float average)."""
    if model.kind == "builtin":
        back = [
            d4_apply(infer(model, d4_apply(lr, t)), d4_inverse(t)) for t in ALL_TRANSFORMS
        ]
    else:
        back = _tta_external(model, lr)
    acc = np.zeros_like(back[0].pixels, dtype=np.float64)
    for img in back:
        acc += img.pixels
    return FloatImage(acc / float(len(back)), float(lr.peak))


def _tta_external(model: ModelSpec, lr: Image) -> list[Image]:
    with tempfile.TemporaryDirectory(prefix="irsr-tta-") as tmp:
        in_dir = Path(tmp) / "lr"
        out_dir = Path(tmp) / "sr"
        in_dir.mkdir()
        originals = []
        for i, t in enumerate(ALL_TRANSFORMS):
            transformed = d4_apply(lr, t)
            padded, orig_w, orig_h = pad_reflect_to_multiple(transformed, model.window_multiple)
            originals.append((orig_w, orig_h))
            save_image(padded, in_dir / f"t{i}.png")
        run_external_batch(model, in_dir, out_dir)
        back = []
        for i, t in enumerate(ALL_TRANSFORMS):
            orig_w, orig_h = originals[i]
            sr = crop_to_scale(load_image(out_dir / f"t{i}.png"), orig_w, orig_h, model.scale)
            back.append(d4_apply(sr, d4_inverse(t)))
        return back
