"""Image ingestion, augmentation, view pairs, and synthetic data."""

from .augment import (
    CropRect,
    color_jitter,
    gaussian_blur,
    gaussian_kernel1d,
    hflip,
    resize_bilinear,
    sample_crop_rect,
)
from .pairs import (
    STRATEGIES,
    AugmentConfig,
    ViewPair,
    generate_view_pair,
    generate_view_pair_from_frames,
    sample_view_rects,
)
from .ppm import load_keypoints, load_pgm, load_ppm, save_keypoints, save_pgm, save_ppm
from .synth import synth_moving_shapes

__all__ = [
    "AugmentConfig",
    "CropRect",
    "STRATEGIES",
    "ViewPair",
    "color_jitter",
    "gaussian_blur",
    "gaussian_kernel1d",
    "generate_view_pair",
    "generate_view_pair_from_frames",
    "hflip",
    "load_keypoints",
    "load_pgm",
    "load_ppm",
    "resize_bilinear",
    "sample_crop_rect",
    "sample_view_rects",
    "save_keypoints",
    "save_pgm",
    "save_ppm",
    "synth_moving_shapes",
]
