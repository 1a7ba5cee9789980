"""Patch grid conversion and fixed 2-d sine-cosine position tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError


@dataclass(frozen=True)
class PatchConfig:
    image_size: int = 224
    patch_size: int = 16

    def __post_init__(self):
        if self.image_size % self.patch_size != 0:
            raise ParameterError(
                f"patch size {self.patch_size} must divide image size {self.image_size}"
            )

    @property
    def grid(self) -> int:
        return self.image_size // self.patch_size

    @property
    def n_patches(self) -> int:
        return self.grid * self.grid

    @property
    def patch_dim(self) -> int:
        return self.patch_size * self.patch_size * 3


def patchify(images: np.ndarray, cfg: PatchConfig) -> np.ndarray:
    """(h, w, 3) or (b, h, w, 3) -> (n, p*p*3) or (b, n, p*p*3).

    Row i holds the patch at grid cell (i // grid, i % grid); pixels within
    a patch stay row-major with channels last.
    """
    single = images.ndim == 3
    if single:
        images = images[None]
    b, h, w, c = images.shape
    if h != cfg.image_size or w != cfg.image_size or c != 3:
        raise ParameterError(f"expected ({cfg.image_size}, {cfg.image_size}, 3) images, got {images.shape[1:]}")
    g, p = cfg.grid, cfg.patch_size
    out = (
        images.reshape(b, g, p, g, p, 3)
        .transpose(0, 1, 3, 2, 4, 5)
        .reshape(b, g * g, p * p * 3)
    )
    return out[0] if single else out


def unpatchify(patches: np.ndarray, cfg: PatchConfig) -> np.ndarray:
    """Exact inverse of patchify."""
    single = patches.ndim == 2
    if single:
        patches = patches[None]
    b, n, d = patches.shape
    if n != cfg.n_patches or d != cfg.patch_dim:
        raise ParameterError(f"expected (*, {cfg.n_patches}, {cfg.patch_dim}) patches, got {patches.shape}")
    g, p = cfg.grid, cfg.patch_size
    out = (
        patches.reshape(b, g, g, p, p, 3)
        .transpose(0, 1, 3, 2, 4, 5)
        .reshape(b, g * p, g * p, 3)
    )
    return out[0] if single else out


def pos_embed_2d(grid: int, dim: int) -> np.ndarray:
    """Fixed 2-d sine-cosine table, shape (1 + grid*grid, dim).

    Half the channels encode the row coordinate, half the column; each half
    is [sin(w*pos) | cos(w*pos)] over dim/4 frequencies. Row 0 is the zero
    row reserved for the CLS position.
    """
    if dim % 4 != 0:
        raise ParameterError(f"position embedding dim must be divisible by 4, got {dim}")
    quarter = dim // 4
    omega = 1.0 / (10000.0 ** (np.arange(quarter, dtype=np.float64) / quarter))
    idx = np.arange(grid * grid)
    coords = {"y": idx // grid, "x": idx % grid}
    halves = []
    for key in ("y", "x"):
        angles = np.outer(coords[key].astype(np.float64), omega)
        halves.append(np.concatenate([np.sin(angles), np.cos(angles)], axis=1))
    table = np.concatenate(halves, axis=1)
    return np.concatenate([np.zeros((1, dim)), table], axis=0)
