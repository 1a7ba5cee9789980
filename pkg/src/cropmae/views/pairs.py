"""Construction of (V1, V2) view pairs.

V1 is the unmasked context view, V2 the view that later gets masked.
Four single-image strategies plus a two-frame mode:

    same             one crop and flip shared by both views
    random           two independent crops of the original
    local-to-global  V2 crops the original, V1 crops inside V2's region
    global-to-local  V1 crops the original, V2 crops inside V1's region
    frame-pair       one shared crop applied to two different frames

Inner crops draw their area fraction relative to the outer crop's region.
Everything is a pure function of (pixels, strategy, config, rng stream).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..numerics import Rng
from .augment import CropRect, color_jitter, gaussian_blur, hflip, resize_bilinear, sample_crop_rect

STRATEGIES = ("same", "random", "local-to-global", "global-to-local", "frame-pair")


@dataclass
class AugmentConfig:
    """View-pair augmentation bounds.

    Area ranges are fractions of the source region's area (the full image
    for outer crops, the outer crop's region for inner crops).
    """

    area_range_v1: tuple[float, float] = (0.10, 1.0)
    area_range_v2: tuple[float, float] = (0.30, 0.60)
    aspect_range: tuple[float, float] = (3.0 / 4.0, 4.0 / 3.0)
    hflip_p: float = 0.5
    color_jitter_strengths: tuple[float, float, float] | None = None
    blur_sigma_range: tuple[float, float] | None = None
    output_size: int = 64


@dataclass
class ViewPair:
    v1: np.ndarray
    v2: np.ndarray
    rect1: CropRect
    rect2: CropRect
    flip1: bool
    flip2: bool
    strategy: str


def sample_view_rects(
    src_h: int, src_w: int, strategy: str, cfg: AugmentConfig, rng: Rng
) -> tuple[CropRect, CropRect, bool, bool]:
    """Crop rectangles (original-image coordinates) and flips for one pair.

    Split out from pixel resampling so geometry properties can be checked
    cheaply at scale.
    """
    if strategy == "same":
        rect = sample_crop_rect(rng, src_h, src_w, cfg.area_range_v1, cfg.aspect_range)
        flip = rng.bernoulli(cfg.hflip_p)
        return rect, rect, flip, flip
    if strategy == "random":
        rect1 = sample_crop_rect(rng, src_h, src_w, cfg.area_range_v1, cfg.aspect_range)
        rect2 = sample_crop_rect(rng, src_h, src_w, cfg.area_range_v2, cfg.aspect_range)
    elif strategy == "local-to-global":
        rect2 = sample_crop_rect(rng, src_h, src_w, cfg.area_range_v2, cfg.aspect_range)
        inner = sample_crop_rect(rng, rect2.h, rect2.w, cfg.area_range_v1, cfg.aspect_range)
        rect1 = inner.shifted(rect2.x, rect2.y)
    elif strategy == "global-to-local":
        rect1 = sample_crop_rect(rng, src_h, src_w, cfg.area_range_v1, cfg.aspect_range)
        inner = sample_crop_rect(rng, rect1.h, rect1.w, cfg.area_range_v2, cfg.aspect_range)
        rect2 = inner.shifted(rect1.x, rect1.y)
    else:
        raise ParameterError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES[:4]}")
    flip1 = rng.bernoulli(cfg.hflip_p)
    flip2 = rng.bernoulli(cfg.hflip_p)
    return rect1, rect2, flip1, flip2


def _finish_view(view: np.ndarray, flip: bool, cfg: AugmentConfig, rng: Rng) -> np.ndarray:
    if flip:
        view = hflip(view)
    if cfg.color_jitter_strengths is not None:
        view = color_jitter(view, rng, cfg.color_jitter_strengths)
    if cfg.blur_sigma_range is not None:
        view = gaussian_blur(view, rng, cfg.blur_sigma_range)
    return view


def generate_view_pair(
    image: np.ndarray, strategy: str, cfg: AugmentConfig, rng: Rng
) -> ViewPair:
    """Build one (V1, V2) pair from a single image."""
    h, w = image.shape[:2]
    if h < 2 or w < 2:
        raise ParameterError(f"image too small: {h}x{w}")
    rect1, rect2, flip1, flip2 = sample_view_rects(h, w, strategy, cfg, rng)
    size = cfg.output_size
    v1 = resize_bilinear(image, rect1, size, size)
    v1 = _finish_view(v1, flip1, cfg, rng)
    if strategy == "same":
        v2 = v1.copy()
    else:
        v2 = resize_bilinear(image, rect2, size, size)
        v2 = _finish_view(v2, flip2, cfg, rng)
    return ViewPair(v1, v2, rect1, rect2, flip1, flip2, strategy)


def generate_view_pair_from_frames(
    frame_a: np.ndarray, frame_b: np.ndarray, cfg: AugmentConfig, rng: Rng
) -> ViewPair:
    """Two-frame mode: one shared crop/flip applied to both frames.

    Gap selection between the frames is the caller's responsibility.
    """
    if frame_a.shape != frame_b.shape:
        raise ParameterError(f"frame shapes differ: {frame_a.shape} vs {frame_b.shape}")
    h, w = frame_a.shape[:2]
    rect = sample_crop_rect(rng, h, w, cfg.area_range_v1, cfg.aspect_range)
    flip = rng.bernoulli(cfg.hflip_p)
    size = cfg.output_size
    v1 = _finish_view(resize_bilinear(frame_a, rect, size, size), flip, cfg, rng)
    v2 = _finish_view(resize_bilinear(frame_b, rect, size, size), flip, cfg, rng)
    return ViewPair(v1, v2, rect, rect, flip, flip, "frame-pair")
