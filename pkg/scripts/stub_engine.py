#!/usr/bin/env python3
"""Conformance stub for the external-engine protocol.

Upscales every PNG in the input directory by nearest-neighbor replication
(honoring HARNESS_SCALE, default 4) and writes same-named outputs. The
--mode flag injects protocol faults for harness tests:

    ok          normal operation (default)
    exit        fail with a nonzero exit code, writing nothing
    skip-one    silently drop the last input
    bad-shape   write a wrong-sized output for the first input

Deliberately self-contained: only numpy + Pillow, no harness imports.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np
from PIL import Image


def upscale(path: Path, out_dir: Path, scale: int) -> None:
    arr = np.asarray(Image.open(path))
    arr = np.repeat(np.repeat(arr, scale, axis=0), scale, axis=1)
    Image.fromarray(arr).save(out_dir / path.name)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("input_dir", type=Path)
    parser.add_argument("output_dir", type=Path)
    parser.add_argument("--mode", choices=("ok", "exit", "skip-one", "bad-shape"),
                        default="ok")
    args = parser.parse_args()

    if args.mode == "exit":
        print("stub engine: simulated crash", file=sys.stderr)
        return 3

    scale = int(os.environ.get("HARNESS_SCALE", "4"))
    args.output_dir.mkdir(parents=True, exist_ok=True)
    inputs = sorted(p for p in args.input_dir.iterdir() if p.suffix.lower() == ".png")
    if args.mode == "skip-one":
        inputs = inputs[:-1]
    for i, path in enumerate(inputs):
        if args.mode == "bad-shape" and i == 0:
            upscale(path, args.output_dir, max(1, scale // 2))
        else:
            upscale(path, args.output_dir, scale)
    return 0


if __name__ == "__main__":
    sys.exit(main())
