"""Closed-form accounting of attention multiply-accumulates.

Only score/value products are counted, since those are the terms that grow
quadratically with token count. A self-attention layer over t tokens at
width d costs 2*t*t*d MACs: t*t*d for the q @ k^T scores (summed across
heads, each head contributing t*t*(d/heads)) and the same again for
probs @ v. Cross-attention with tq queries against tk keys costs
2*tq*tk*d. The unmasked view carries 1 + n_patches tokens, the masked view
1 + visible tokens; the decoder runs n_patches queries against n_patches
context tokens.
"""

from __future__ import annotations

from ..errors import ParameterError
from .network import DecoderConfig, EncoderConfig
from .patches import PatchConfig


def count_attention_ops(
    enc_cfg: EncoderConfig,
    dec_cfg: DecoderConfig,
    patch_cfg: PatchConfig,
    visible_count: int,
) -> dict[str, int]:
    """Exact integer MAC counts per component for one sample."""
    n = patch_cfg.n_patches
    if not 1 <= visible_count <= n:
        raise ParameterError(f"visible count {visible_count} outside [1, {n}]")
    t_ctx = n + 1
    t_vis = visible_count + 1
    counts = {
        "encoder_v1": enc_cfg.depth * 2 * t_ctx * t_ctx * enc_cfg.dim,
        "encoder_v2": enc_cfg.depth * 2 * t_vis * t_vis * enc_cfg.dim,
        "decoder_cross": dec_cfg.depth * 2 * n * n * dec_cfg.dim,
        "decoder_self": dec_cfg.depth * 2 * n * n * dec_cfg.dim,
    }
    counts["total"] = sum(counts.values())
    return counts
