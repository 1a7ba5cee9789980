"""Siamese encoder, cross-attention decoder, and the reconstruction loss.

One encoder parameter set serves both views (that is the Siamese part);
the decoder sees the masked view's visible tokens scattered among mask
tokens and attends over the context view's tokens. Each decoder block runs
cross-attention, feed-forward, then self-attention, in that order.

All forward paths operate on a whole batch (b, ...) at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, ParameterError
from ..numerics import (
    Rng,
    Tensor,
    broadcast_to,
    concat,
    dropout,
    gather,
    gelu,
    layer_norm,
    matmul,
    reshape,
    scatter,
    softmax,
    tmean,
    transpose,
)
from .masking import MaskPlan, make_mask_plan, stack_masked, stack_visible
from .patches import PatchConfig, patchify, pos_embed_2d


@dataclass(frozen=True)
class EncoderConfig:
    depth: int = 12
    dim: int = 384
    heads: int = 6
    mlp_ratio: float = 4.0
    with_cls: bool = True

    def __post_init__(self):
        if self.dim % self.heads != 0:
            raise ParameterError(f"encoder dim {self.dim} not divisible by {self.heads} heads")

    @property
    def mlp_dim(self) -> int:
        return int(self.dim * self.mlp_ratio)


@dataclass(frozen=True)
class DecoderConfig:
    depth: int = 4
    dim: int = 256
    ff_dim: int = 2048
    heads: int = 8
    dropout: float = 0.1

    def __post_init__(self):
        if self.dim % self.heads != 0:
            raise ParameterError(f"decoder dim {self.dim} not divisible by {self.heads} heads")


def desk_scale_configs(image_size: int = 64, patch_size: int = 8):
    """Small defaults that train in minutes on a laptop CPU."""
    return (
        PatchConfig(image_size, patch_size),
        EncoderConfig(depth=4, dim=64, heads=4, mlp_ratio=4.0),
        DecoderConfig(depth=2, dim=64, ff_dim=256, heads=4, dropout=0.1),
    )


def _trunc_normal(rng: Rng, shape, std: float = 0.02) -> np.ndarray:
    return np.clip(rng.normal(0.0, std, size=shape), -2.0 * std, 2.0 * std)


class ModelParams:
    """All trainable tensors plus the fixed position tables.

    Exactly one encoder block stack exists; encode() is called with the
    same instance for both views. Fixed sine-cosine tables are derived
    from the configs and are not trainable (checkpoints rebuild them).
    """

    def __init__(
        self,
        patch_cfg: PatchConfig,
        enc_cfg: EncoderConfig,
        dec_cfg: DecoderConfig,
        rng: Rng,
        dtype=np.float32,
    ):
        if not enc_cfg.with_cls:
            raise ParameterError("the encoder is built with a CLS token; with_cls must be true")
        self.patch_cfg = patch_cfg
        self.enc_cfg = enc_cfg
        self.dec_cfg = dec_cfg
        self.dtype = dtype

        d, dd = enc_cfg.dim, dec_cfg.dim
        p = patch_cfg.patch_dim
        tensors: dict[str, np.ndarray] = {}

        tensors["patch_embed.w"] = _trunc_normal(rng, (p, d))
        tensors["patch_embed.b"] = np.zeros(d)
        tensors["cls_token"] = _trunc_normal(rng, (1, d))
        for i in range(enc_cfg.depth):
            self._add_norm(tensors, f"enc.{i}.ln1", d)
            self._add_attention(tensors, f"enc.{i}.attn", d, rng)
            self._add_norm(tensors, f"enc.{i}.ln2", d)
            self._add_mlp(tensors, f"enc.{i}.mlp", d, enc_cfg.mlp_dim, rng)
        self._add_norm(tensors, "enc.norm", d)

        tensors["dec_embed.w"] = _trunc_normal(rng, (d, dd))
        tensors["dec_embed.b"] = np.zeros(dd)
        tensors["mask_token"] = _trunc_normal(rng, (1, dd))
        for i in range(dec_cfg.depth):
            self._add_norm(tensors, f"dec.{i}.ln_q", dd)
            self._add_norm(tensors, f"dec.{i}.ln_kv", dd)
            self._add_attention(tensors, f"dec.{i}.cross", dd, rng)
            self._add_norm(tensors, f"dec.{i}.ln_ff", dd)
            self._add_mlp(tensors, f"dec.{i}.ff", dd, dec_cfg.ff_dim, rng)
            self._add_norm(tensors, f"dec.{i}.ln_s", dd)
            self._add_attention(tensors, f"dec.{i}.self", dd, rng)
        self._add_norm(tensors, "dec.norm", dd)
        tensors["head.w"] = _trunc_normal(rng, (dd, p))
        tensors["head.b"] = np.zeros(p)

        self._params = {
            name: Tensor(arr.astype(dtype), requires_grad=True) for name, arr in tensors.items()
        }
        self.enc_pos = pos_embed_2d(patch_cfg.grid, d).astype(dtype)
        self.dec_pos = pos_embed_2d(patch_cfg.grid, dd).astype(dtype)[1:]

    @staticmethod
    def _add_norm(tensors, prefix, dim):
        tensors[f"{prefix}.g"] = np.ones(dim)
        tensors[f"{prefix}.b"] = np.zeros(dim)

    @staticmethod
    def _add_attention(tensors, prefix, dim, rng):
        for proj in ("wq", "wk", "wv", "wo"):
            tensors[f"{prefix}.{proj}"] = _trunc_normal(rng, (dim, dim))
        for bias in ("bq", "bk", "bv", "bo"):
            tensors[f"{prefix}.{bias}"] = np.zeros(dim)

    @staticmethod
    def _add_mlp(tensors, prefix, dim, hidden, rng):
        tensors[f"{prefix}.w1"] = _trunc_normal(rng, (dim, hidden))
        tensors[f"{prefix}.b1"] = np.zeros(hidden)
        tensors[f"{prefix}.w2"] = _trunc_normal(rng, (hidden, dim))
        tensors[f"{prefix}.b2"] = np.zeros(dim)

    def named(self) -> dict[str, Tensor]:
        return self._params

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def total_size(self) -> int:
        return sum(t.size for t in self._params.values())

    def all_finite(self) -> bool:
        return all(np.isfinite(t.data).all() for t in self._params.values())


def expected_parameter_count(
    patch_cfg: PatchConfig, enc_cfg: EncoderConfig, dec_cfg: DecoderConfig
) -> int:
    """Closed-form trainable scalar count for one Siamese encoder plus decoder.

    Per attention: 4 (d*d) projections and 4 d biases. Per mlp: d*m + m +
    m*d + d. Per norm: 2 d. Encoder blocks appear exactly once.
    """
    d, dd, p = enc_cfg.dim, dec_cfg.dim, patch_cfg.patch_dim
    m, f = enc_cfg.mlp_dim, dec_cfg.ff_dim
    attn = lambda k: 4 * k * k + 4 * k
    mlp = lambda k, h: k * h + h + h * k + k
    norm = lambda k: 2 * k

    total = p * d + d  # patch projection
    total += d  # cls token
    total += enc_cfg.depth * (norm(d) + attn(d) + norm(d) + mlp(d, m))
    total += norm(d)
    total += d * dd + dd  # decoder embed projection
    total += dd  # mask token
    total += dec_cfg.depth * (3 * norm(dd) + 2 * attn(dd) + norm(dd) + mlp(dd, f))
    total += norm(dd)
    total += dd * p + p  # prediction head
    return total


# ---------------------------------------------------------------------------
# forward passes
# ---------------------------------------------------------------------------


def _attention(x_q, x_kv, params, prefix, heads, collect):
    """Multi-head attention; queries from x_q, keys/values from x_kv."""
    b, tq, d = x_q.shape
    tk = x_kv.shape[1]
    dh = d // heads
    q = matmul(x_q, params[f"{prefix}.wq"]) + params[f"{prefix}.bq"]
    k = matmul(x_kv, params[f"{prefix}.wk"]) + params[f"{prefix}.bk"]
    v = matmul(x_kv, params[f"{prefix}.wv"]) + params[f"{prefix}.bv"]
    q = transpose(reshape(q, (b, tq, heads, dh)), (0, 2, 1, 3))
    k = transpose(reshape(k, (b, tk, heads, dh)), (0, 2, 1, 3))
    v = transpose(reshape(v, (b, tk, heads, dh)), (0, 2, 1, 3))
    scores = matmul(q, transpose(k, (0, 1, 3, 2))) * (1.0 / np.sqrt(dh))
    probs = softmax(scores, axis=-1)
    out = matmul(probs, v)
    out = reshape(transpose(out, (0, 2, 1, 3)), (b, tq, d))
    out = matmul(out, params[f"{prefix}.wo"]) + params[f"{prefix}.bo"]
    if collect is not None:
        collect.append(probs.data)
    return out


def _mlp(x, params, prefix):
    h = matmul(x, params[f"{prefix}.w1"]) + params[f"{prefix}.b1"]
    return matmul(gelu(h), params[f"{prefix}.w2"]) + params[f"{prefix}.b2"]


def _ln(x, params, prefix):
    return layer_norm(x, params[f"{prefix}.g"], params[f"{prefix}.b"])


def _batched(images: np.ndarray) -> np.ndarray:
    return images[None] if images.ndim == 3 else images


def encode(
    views: np.ndarray,
    params: ModelParams,
    plans: list[MaskPlan] | None = None,
    collect_attention: bool = False,
):
    """Encode one view batch through the shared encoder.

    Without plans every patch token is kept (the context view); with plans
    only each sample's visible tokens enter the blocks. Output is
    (b, 1 + kept, dim) with CLS at index 0. When ``collect_attention`` is
    set, also returns the per-layer attention probabilities as numpy
    arrays (b, heads, tokens, tokens).
    """
    cfg = params.enc_cfg
    views = _batched(views)
    patches = patchify(views, params.patch_cfg).astype(params.dtype)
    b, n, _ = patches.shape
    x = matmul(Tensor(patches), params["patch_embed.w"]) + params["patch_embed.b"]
    x = x + Tensor(params.enc_pos[1:])
    if plans is not None:
        if len(plans) != b:
            raise ContractError(f"{len(plans)} plans for batch of {b}")
        for plan in plans:
            if plan.n_patches != n:
                raise ContractError(f"plan for {plan.n_patches} patches, grid has {n}")
        idx = stack_visible(plans)[:, :, None]
        x = gather(x, idx, axis=1)
    cls_row = params["cls_token"] + Tensor(params.enc_pos[0:1])
    cls_tok = broadcast_to(reshape(cls_row, (1, 1, cfg.dim)), (b, 1, cfg.dim))
    x = concat([cls_tok, x], axis=1)

    attentions = [] if collect_attention else None
    for i in range(cfg.depth):
        h = _ln(x, params, f"enc.{i}.ln1")
        x = x + _attention(h, h, params, f"enc.{i}.attn", cfg.heads, attentions)
        h = _ln(x, params, f"enc.{i}.ln2")
        x = x + _mlp(h, params, f"enc.{i}.mlp")
    x = _ln(x, params, "enc.norm")
    if collect_attention:
        return x, attentions
    return x


def _drop_cls(tokens: Tensor) -> Tensor:
    b, t, d = tokens.shape
    idx = np.arange(1, t, dtype=np.int64)[None, :, None]
    return gather(tokens, idx, axis=1)


def decode(
    enc_v2: Tensor,
    plans: list[MaskPlan],
    enc_v1: Tensor,
    params: ModelParams,
    training: bool = False,
    rng: Rng | None = None,
) -> Tensor:
    """Predict pixel patches for every position of the masked view.

    ``enc_v2`` is the masked view's encoding (CLS + visible tokens) and
    ``enc_v1`` the context view's full encoding; both CLS tokens are
    dropped here. The decoder stream holds projected visible tokens
    scattered to their grid positions and the mask token elsewhere, all
    with decoder position rows added. Output is (b, n_patches, patch_dim).
    """
    cfg = params.dec_cfg
    n = params.patch_cfg.n_patches
    idx = stack_visible(plans)
    b, v = idx.shape
    if enc_v2.shape[0] != b or enc_v2.shape[1] != v + 1:
        raise ContractError(
            f"masked-view encoding {enc_v2.shape} inconsistent with plans (batch {b}, visible {v})"
        )
    if idx.size and idx.max() >= n:
        raise ContractError("plan index out of range for the decoder grid")

    kv = matmul(_drop_cls(enc_v1), params["dec_embed.w"]) + params["dec_embed.b"]
    kv = kv + Tensor(params.dec_pos)

    vis = matmul(_drop_cls(enc_v2), params["dec_embed.w"]) + params["dec_embed.b"]
    vis = vis + Tensor(params.dec_pos[idx].astype(params.dtype))
    stream = scatter(vis, idx[:, :, None], axis=1, extent=n)
    visible_at = np.zeros((b, n, 1), dtype=params.dtype)
    np.put_along_axis(visible_at, idx[:, :, None], 1.0, axis=1)
    mask_fill = broadcast_to(reshape(params["mask_token"], (1, 1, cfg.dim)), (b, n, cfg.dim))
    mask_fill = mask_fill + Tensor(params.dec_pos)
    x = stream + mask_fill * Tensor(1.0 - visible_at)

    p_drop = cfg.dropout
    for i in range(cfg.depth):
        q = _ln(x, params, f"dec.{i}.ln_q")
        ctx = _ln(kv, params, f"dec.{i}.ln_kv")
        x = x + dropout(_attention(q, ctx, params, f"dec.{i}.cross", cfg.heads, None), p_drop, training, rng)
        h = _ln(x, params, f"dec.{i}.ln_ff")
        x = x + dropout(_mlp(h, params, f"dec.{i}.ff"), p_drop, training, rng)
        s = _ln(x, params, f"dec.{i}.ln_s")
        x = x + dropout(_attention(s, s, params, f"dec.{i}.self", cfg.heads, None), p_drop, training, rng)
    x = _ln(x, params, "dec.norm")
    return matmul(x, params["head.w"]) + params["head.b"]


def normalize_patch_targets(patches: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Standardize each patch row by its own mean and variance."""
    mu = patches.mean(axis=-1, keepdims=True)
    var = patches.var(axis=-1, keepdims=True)
    return (patches - mu) / np.sqrt(var + eps)


def reconstruction_loss(
    pred: Tensor, targets: np.ndarray, plans: list[MaskPlan], scope: str = "masked"
) -> Tensor:
    """Mean squared error over the selected patch rows.

    scope "masked" (default) averages over masked positions only; "all"
    covers every patch row.
    """
    if pred.shape != targets.shape:
        raise ContractError(f"prediction {pred.shape} vs target {targets.shape}")
    if scope == "all":
        diff = pred - Tensor(targets.astype(pred.dtype))
        return tmean(diff * diff)
    if scope != "masked":
        raise ParameterError(f"unknown loss scope {scope!r}")
    idx = stack_masked(plans)
    if idx.shape[1] == 0:
        raise ContractError("no masked patches selected; loss scope 'masked' is empty")
    sel = idx[:, :, None]
    pred_sel = gather(pred, sel, axis=1)
    tgt_sel = np.take_along_axis(targets, sel, axis=1).astype(pred.dtype)
    diff = pred_sel - Tensor(tgt_sel)
    return tmean(diff * diff)


def forward_train(
    view_pairs,
    params: ModelParams,
    ratio: float,
    rng: Rng,
    scope: str = "masked",
    training: bool = True,
    dropout_rng: Rng | None = None,
):
    """Full pre-training forward pass.

    Accepts one ViewPair or a list of them; returns (loss, plans) where
    plans mirrors the input arity. ``rng`` draws the mask plans; dropout
    uses ``dropout_rng`` (falls back to ``rng``).
    """
    single = not isinstance(view_pairs, (list, tuple))
    pairs = [view_pairs] if single else list(view_pairs)
    if not pairs:
        raise ContractError("empty batch")
    n = params.patch_cfg.n_patches
    plans = [make_mask_plan(n, ratio, rng) for _ in pairs]
    v1 = np.stack([p.v1 for p in pairs])
    v2 = np.stack([p.v2 for p in pairs])
    enc_v1 = encode(v1, params)
    enc_v2 = encode(v2, params, plans=plans)
    pred = decode(enc_v2, plans, enc_v1, params, training=training, rng=dropout_rng or rng)
    targets = normalize_patch_targets(patchify(v2, params.patch_cfg)).astype(params.dtype)
    loss = reconstruction_loss(pred, targets, plans, scope=scope)
    return loss, (plans[0] if single else plans)
