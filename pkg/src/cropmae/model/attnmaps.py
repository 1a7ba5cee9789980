"""CLS attention-map extraction and image exports."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from ..errors import ParameterError
from ..views.augment import CropRect, resize_bilinear
from ..views.ppm import save_ppm
from .masking import MaskPlan
from .network import ModelParams, encode
from .patches import PatchConfig, patchify, unpatchify


def extract_cls_attention(params: ModelParams, image: np.ndarray, layer: int = -1) -> np.ndarray:
    """Per-head CLS-query attention over patch keys, shape (heads, grid, grid).

    Maps are the raw softmax rows minus the CLS->CLS entry, so each head
    sums to <= 1 and renormalizes to 1 once that weight is divided out.
    """
    depth = params.enc_cfg.depth
    if not -depth <= layer < depth:
        raise ParameterError(f"layer {layer} out of range for depth {depth}")
    _, attentions = encode(image, params, collect_attention=True)
    probs = attentions[layer][0]  # (heads, tokens, tokens)
    g = params.patch_cfg.grid
    return probs[:, 0, 1:].reshape(params.enc_cfg.heads, g, g)


def upsample_map(grid_map: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear upsample of one (g, g) map to (out_h, out_w)."""
    g = grid_map.shape[0]
    stacked = grid_map.astype(np.float32)[:, :, None]
    return resize_bilinear(stacked, CropRect(0, 0, g, g), out_h, out_w)[:, :, 0]


def export_attention_maps(
    maps: np.ndarray, out_dir: str | os.PathLike, prefix: str = "attn", upsample_to: int | None = None
) -> list[Path]:
    """Write one grayscale PPM per head, normalized to its own maximum."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for h, m in enumerate(maps):
        if upsample_to is not None:
            m = upsample_map(m, upsample_to, upsample_to)
        peak = float(m.max())
        scaled = m / peak if peak > 0 else m
        gray = np.repeat(scaled[:, :, None], 3, axis=2).astype(np.float32)
        path = out / f"{prefix}_head{h}.ppm"
        save_ppm(gray, path)
        paths.append(path)
    return paths


def render_masked_view(
    view: np.ndarray, plan: MaskPlan, patch_cfg: PatchConfig, fill: float = 0.5
) -> np.ndarray:
    """The masked view as pixels: hidden patches become flat gray."""
    rows = patchify(view, patch_cfg).copy()
    rows[plan.masked] = fill
    return unpatchify(rows, patch_cfg)


def denormalize_prediction(
    pred_rows: np.ndarray, target_view: np.ndarray, patch_cfg: PatchConfig, eps: float = 1e-6
) -> np.ndarray:
    """Map normalized patch predictions back to pixels using the target
    patch statistics, then reassemble the image."""
    target_rows = patchify(target_view, patch_cfg)
    mu = target_rows.mean(axis=-1, keepdims=True)
    var = target_rows.var(axis=-1, keepdims=True)
    rows = pred_rows * np.sqrt(var + eps) + mu
    return np.clip(unpatchify(rows, patch_cfg), 0.0, 1.0).astype(np.float32)


def compose_reconstruction_grid(
    pairs, plans: list[MaskPlan], pred_rows: np.ndarray, patch_cfg: PatchConfig
) -> np.ndarray:
    """Rows top to bottom: input view, crop view, masked view, reconstruction.

    One column per sample; returns a single image array.
    """
    columns = []
    for pair, plan, rows in zip(pairs, plans, pred_rows):
        masked = render_masked_view(pair.v2, plan, patch_cfg)
        recon = denormalize_prediction(rows, pair.v2, patch_cfg)
        columns.append(np.concatenate([pair.v1, pair.v2, masked, recon], axis=0))
    return np.concatenate(columns, axis=1)
