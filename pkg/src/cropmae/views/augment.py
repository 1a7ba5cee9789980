"""Geometric and photometric augmentation primitives.

All sampling goes through an Rng stream, so every augmentation is a pure
function of (pixels, parameters, stream).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import ParameterError
from ..numerics import Rng


@dataclass(frozen=True)
class CropRect:
    """Axis-aligned pixel rectangle in source coordinates."""

    x: int
    y: int
    w: int
    h: int

    @property
    def area(self) -> int:
        return self.w * self.h

    def contains(self, other: "CropRect") -> bool:
        return (
            self.x <= other.x
            and self.y <= other.y
            and other.x + other.w <= self.x + self.w
            and other.y + other.h <= self.y + self.h
        )

    def shifted(self, dx: int, dy: int) -> "CropRect":
        return CropRect(self.x + dx, self.y + dy, self.w, self.h)


def sample_crop_rect(
    rng: Rng,
    src_h: int,
    src_w: int,
    area_range: tuple[float, float],
    aspect_range: tuple[float, float],
    attempts: int = 10,
) -> CropRect:
    """Random-resized-crop rectangle sampling.

    Target area is uniform in area_range * (src_h * src_w); aspect ratio is
    log-uniform in aspect_range. The integer height is clamped so the
    realized area stays inside the configured bounds exactly. After
    ``attempts`` failures to fit, falls back to a centered crop at the
    largest feasible size.
    """
    lo, hi = area_range
    if not (0.0 < lo <= hi <= 1.0):
        raise ParameterError(f"bad area range {area_range}")
    a_lo, a_hi = aspect_range
    if not (0.0 < a_lo <= a_hi):
        raise ParameterError(f"bad aspect range {aspect_range}")
    src_area = src_h * src_w

    for _ in range(attempts):
        target = rng.uniform(lo, hi) * src_area
        aspect = math.exp(rng.uniform(math.log(a_lo), math.log(a_hi)))
        w = int(round(math.sqrt(target * aspect)))
        if w < 1 or w > src_w:
            continue
        h_min = max(1, math.ceil(lo * src_area / w))
        h_max = min(src_h, math.floor(hi * src_area / w))
        if h_min > h_max:
            continue
        h = min(max(int(round(target / w)), h_min), h_max)
        x = int(rng.integers(0, src_w - w + 1))
        y = int(rng.integers(0, src_h - h + 1))
        return CropRect(x, y, w, h)

    # centered fallback: clamp the source aspect into range, biggest fit
    aspect = min(max(src_w / src_h, a_lo), a_hi)
    w = max(1, min(src_w, int(math.sqrt(hi * src_area * aspect))))
    h = max(1, min(src_h, int(math.sqrt(hi * src_area / aspect))))
    return CropRect((src_w - w) // 2, (src_h - h) // 2, w, h)


def _axis_coords(src: int, out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Half-pixel-center source coordinates for one axis (align_corners=False)."""
    pos = (np.arange(out, dtype=np.float64) + 0.5) * (src / out) - 0.5
    pos = np.clip(pos, 0.0, src - 1)
    i0 = np.floor(pos).astype(np.int64)
    i1 = np.minimum(i0 + 1, src - 1)
    frac = (pos - i0).astype(np.float32)
    return i0, i1, frac


def resize_bilinear(image: np.ndarray, rect: CropRect, out_h: int, out_w: int) -> np.ndarray:
    """Crop ``rect`` from ``image`` and resize bilinearly to (out_h, out_w)."""
    if rect.w < 1 or rect.h < 1:
        raise ParameterError(f"degenerate crop rect {rect}")
    if rect.x < 0 or rect.y < 0 or rect.x + rect.w > image.shape[1] or rect.y + rect.h > image.shape[0]:
        raise ParameterError(f"rect {rect} outside image {image.shape[:2]}")
    crop = image[rect.y : rect.y + rect.h, rect.x : rect.x + rect.w]
    y0, y1, fy = _axis_coords(rect.h, out_h)
    x0, x1, fx = _axis_coords(rect.w, out_w)
    rows = crop[y0] * (1.0 - fy)[:, None, None] + crop[y1] * fy[:, None, None]
    out = rows[:, x0] * (1.0 - fx)[None, :, None] + rows[:, x1] * fx[None, :, None]
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def hflip(image: np.ndarray) -> np.ndarray:
    """Reverse columns; an involution."""
    return image[:, ::-1].copy()


def color_jitter(image: np.ndarray, rng: Rng, strengths: tuple[float, float, float]) -> np.ndarray:
    """Multiplicative brightness/contrast/saturation jitter, clamped to [0, 1].

    Each factor is uniform in [max(0, 1-s), 1+s]; strength 0 leaves that
    component untouched (the draw still happens, keeping streams aligned).
    """
    sb, sc, ss = strengths
    if min(sb, sc, ss) < 0:
        raise ParameterError("jitter strengths must be nonnegative")
    fb = rng.uniform(max(0.0, 1.0 - sb), 1.0 + sb)
    fc = rng.uniform(max(0.0, 1.0 - sc), 1.0 + sc)
    fs = rng.uniform(max(0.0, 1.0 - ss), 1.0 + ss)
    out = image.astype(np.float32) * fb
    gray = out @ np.array([0.299, 0.587, 0.114], dtype=np.float32)
    out = gray.mean() + (out - gray.mean()) * fc
    out = gray[..., None] + (out - gray[..., None]) * fs
    return np.clip(out, 0.0, 1.0).astype(np.float32)


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Normalized 1-d Gaussian truncated at 3 sigma."""
    radius = max(1, int(math.ceil(3.0 * sigma)))
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (xs / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(image: np.ndarray, rng: Rng, sigma_range: tuple[float, float]) -> np.ndarray:
    """Separable Gaussian blur with sigma uniform in ``sigma_range``."""
    lo, hi = sigma_range
    if lo < 0 or hi < lo:
        raise ParameterError(f"bad sigma range {sigma_range}")
    sigma = float(rng.uniform(lo, hi))
    if sigma <= 0.0:
        return image
    k = gaussian_kernel1d(sigma)
    out = ndimage.convolve1d(image.astype(np.float64), k, axis=0, mode="nearest")
    out = ndimage.convolve1d(out, k, axis=1, mode="nearest")
    return np.clip(out, 0.0, 1.0).astype(np.float32)
