"""Synthetic moving-shapes sequences for desk-scale training and evaluation.

Each sequence holds 1-3 colored rectangles/ellipses translating at constant
integer velocity over a static textured background. Layout per sequence s:

    seq_%04d/frame_%05d.ppm   color frame
             mask_%05d.pgm    instance ids (0 = background)
             kp_%05d.txt      "id x y" geometric centers
             meta.txt         shape kind / velocity / half sizes

Shapes are drawn in id order, so overlapping pixels belong to the highest
id. Shape count cycles deterministically (1 + s mod 3); everything else is
drawn from the rng stream, so regeneration with the same stream is
byte-identical.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ParameterError
from ..numerics import Rng
from .augment import CropRect, resize_bilinear
from .ppm import save_keypoints, save_pgm, save_ppm


@dataclass
class _Shape:
    kind: str  # "rect" or "ellipse"
    color: np.ndarray
    half_w: int
    half_h: int
    cx0: int
    cy0: int
    vx: int
    vy: int


def _textured_background(rng: Rng, size: int) -> np.ndarray:
    coarse = rng.uniform(0.15, 0.75, size=(max(2, size // 8), max(2, size // 8), 3))
    base = resize_bilinear(
        coarse.astype(np.float32), CropRect(0, 0, coarse.shape[1], coarse.shape[0]), size, size
    )
    noise = rng.uniform(-0.04, 0.04, size=(size, size, 3))
    return np.clip(base + noise, 0.0, 1.0).astype(np.float32)


def _feasible_start(rng: Rng, size: int, half: int, v: int, frames: int) -> int:
    lo = half + max(0, -v * (frames - 1))
    hi = size - 1 - half - max(0, v * (frames - 1))
    if lo > hi:  # velocity too large for the span; stand still
        return int(rng.integers(half, size - half))
    return int(rng.integers(lo, hi + 1))


def _sample_shape(rng: Rng, size: int, frames: int) -> _Shape:
    kind = "rect" if rng.bernoulli(0.5) else "ellipse"
    half_w = int(rng.integers(size // 12, size // 6 + 1))
    half_h = int(rng.integers(size // 12, size // 6 + 1))
    color = rng.uniform(0.2, 1.0, size=3).astype(np.float32)
    max_vx = max(1, (size - 1 - 2 * half_w) // max(1, frames - 1))
    max_vy = max(1, (size - 1 - 2 * half_h) // max(1, frames - 1))
    vx = int(np.clip(rng.integers(-3, 4), -max_vx, max_vx))
    vy = int(np.clip(rng.integers(-3, 4), -max_vy, max_vy))
    if vx == 0 and vy == 0:
        vx = 1
    cx0 = _feasible_start(rng, size, half_w, vx, frames)
    cy0 = _feasible_start(rng, size, half_h, vy, frames)
    return _Shape(kind, color, half_w, half_h, cx0, cy0, vx, vy)


def _draw(canvas: np.ndarray, mask: np.ndarray, shape: _Shape, t: int, sid: int) -> tuple[int, int]:
    size = canvas.shape[0]
    cx = shape.cx0 + shape.vx * t
    cy = shape.cy0 + shape.vy * t
    ys, xs = np.mgrid[0:size, 0:size]
    dx = xs - cx
    dy = ys - cy
    if shape.kind == "rect":
        inside = (np.abs(dx) <= shape.half_w) & (np.abs(dy) <= shape.half_h)
    else:
        inside = (dx / shape.half_w) ** 2 + (dy / shape.half_h) ** 2 <= 1.0
    canvas[inside] = shape.color
    mask[inside] = sid
    return cx, cy


def synth_moving_shapes(
    rng: Rng, count: int, size: int, out_dir: str | os.PathLike, frames: int = 8
) -> list[Path]:
    """Generate ``count`` sequences of ``frames`` frames at ``size`` px."""
    if count < 1:
        raise ParameterError(f"sequence count must be >= 1, got {count}")
    if size < 16:
        raise ParameterError(f"frame size must be >= 16, got {size}")
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    seq_dirs = []
    for s in range(count):
        seq_dir = root / f"seq_{s:04d}"
        seq_dir.mkdir(exist_ok=True)
        background = _textured_background(rng, size)
        n_shapes = 1 + (s % 3)
        shapes = [_sample_shape(rng, size, frames) for _ in range(n_shapes)]
        with open(seq_dir / "meta.txt", "w") as meta:
            for sid, sh in enumerate(shapes, start=1):
                meta.write(
                    f"{sid} {sh.kind} vx={sh.vx} vy={sh.vy} half_w={sh.half_w} half_h={sh.half_h}\n"
                )
        for t in range(frames):
            canvas = background.copy()
            mask = np.zeros((size, size), dtype=np.uint8)
            centers = []
            for sid, sh in enumerate(shapes, start=1):
                cx, cy = _draw(canvas, mask, sh, t, sid)
                centers.append((sid, float(cx), float(cy)))
            save_ppm(canvas, seq_dir / f"frame_{t:05d}.ppm")
            save_pgm(mask, seq_dir / f"mask_{t:05d}.pgm")
            save_keypoints(centers, seq_dir / f"kp_{t:05d}.txt")
        seq_dirs.append(seq_dir)
    return seq_dirs
