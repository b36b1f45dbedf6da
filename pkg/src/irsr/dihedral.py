"""The eight symmetries of the square, used for geometric self-ensembling.

An element is parameterized as "horizontal flip first (optional), then k
quarter-turns counterclockwise". Rotations invert by negating k; the four
flip-carrying elements are reflections and therefore their own inverses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .image import FloatImage, Image


@dataclass(frozen=True)
class D4Transform:
    rotation: int  # quarter turns counterclockwise, 0..3
    flip: bool = False  # horizontal flip applied before the rotation

    def __post_init__(self) -> None:
        if self.rotation not in (0, 1, 2, 3):
            raise ValidationError(f"rotation must be in 0..3, got {self.rotation}")


IDENTITY = D4Transform(0, False)
ALL_TRANSFORMS: tuple[D4Transform, ...] = tuple(
    D4Transform(k, f) for f in (False, True) for k in range(4)
)


def apply_to_array(arr: np.ndarray, t: D4Transform) -> np.ndarray:
    """Group action on the first two axes; returns a view where possible."""
    if t.flip:
        arr = arr[:, ::-1]
    return np.rot90(arr, t.rotation, axes=(0, 1))


def d4_apply(img: Image, t: D4Transform) -> Image:
    return Image(apply_to_array(img.pixels, t), img.bit_depth)


def d4_apply_float(f: FloatImage, t: D4Transform) -> FloatImage:
    return FloatImage(apply_to_array(f.samples, t), f.peak)


def d4_inverse(t: D4Transform) -> D4Transform:
    if t.flip:
        return t  # reflections are involutions
    return D4Transform((-t.rotation) % 4, False)


def d4_compose(after: D4Transform, before: D4Transform) -> D4Transform:
    """Element equal to applying ``before`` first, then ``after``.

    Uses flip . rot_k == rot_{-k} . flip to renormalize into flip-then-rotate
    form; the group-law tests check this against the action on arrays.
    """
    if after.flip:
        return D4Transform((after.rotation - before.rotation) % 4, not before.flip)
    return D4Transform((after.rotation + before.rotation) % 4, before.flip)
