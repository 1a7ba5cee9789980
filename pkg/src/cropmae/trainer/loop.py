"""The pre-training loop.

Deterministic by construction: the epoch shuffle, every sample's view
augmentation, each step's mask plans, and dropout all draw from streams
derived from (seed, purpose, index), so two runs with the same seed,
config, and dataset bytes produce identical metrics logs. View generation
is a pure per-sample function and could fan out across workers without
changing results; gradient work stays single-stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataContractError, NumericError
from ..model import ModelParams, forward_train, make_mask_plan, decode, encode
from ..numerics import (
    Rng,
    STREAM_DROPOUT,
    STREAM_INIT,
    STREAM_MASK,
    STREAM_SHUFFLE,
    STREAM_VIEW,
    Tape,
)
from ..optim import AdamWState, ScheduleConfig, adamw_step, lr_at
from ..views import generate_view_pair, generate_view_pair_from_frames, load_ppm
from .checkpoint import checkpoint_from_training, save_checkpoint
from .config import TrainConfig, build_augment_config, build_model_configs


@dataclass
class TrainResult:
    checkpoint_path: Path
    metrics_path: Path
    losses: list[float] = field(default_factory=list)


def list_images(data_dir: str | Path) -> list[Path]:
    """Every PPM under the dataset root: loose files plus seq_*/frame_*."""
    root = Path(data_dir)
    loose = sorted(root.glob("*.ppm"))
    frames = sorted(root.glob("seq_*/frame_*.ppm"))
    return loose + frames


def list_sequences(data_dir: str | Path) -> list[list[Path]]:
    root = Path(data_dir)
    return [sorted(d.glob("frame_*.ppm")) for d in sorted(root.glob("seq_*")) if d.is_dir()]


class _FrameCache:
    """Keeps decoded frames around; desk-scale datasets fit in memory."""

    def __init__(self):
        self._frames: dict[Path, np.ndarray] = {}

    def get(self, path: Path) -> np.ndarray:
        img = self._frames.get(path)
        if img is None:
            img = load_ppm(path)
            self._frames[path] = img
        return img


def _build_schedule(cfg: TrainConfig, steps_per_epoch: int, total_steps: int) -> ScheduleConfig:
    # expressed in optimizer steps so step- and epoch-based runs share one path
    if cfg.steps > 0:
        warmup = min(cfg.warmup_steps, total_steps)
    else:
        warmup = min(cfg.warmup_epochs * steps_per_epoch, total_steps)
    return ScheduleConfig(
        base_lr=cfg.base_lr,
        effective_batch=cfg.batch_size,
        warmup_epochs=warmup,
        total_epochs=total_steps,
        min_lr=cfg.min_lr,
        scale_lr_by_batch=cfg.scale_lr_by_batch,
    )


def _sample_pair(cfg: TrainConfig, aug, items, item_idx: int, rng: Rng, cache: _FrameCache):
    if cfg.strategy == "frame-pair":
        frames = items[item_idx]
        a = int(rng.integers(0, len(frames)))
        gap = int(rng.integers(cfg.gap_min, cfg.gap_max + 1))
        b = min(a + gap, len(frames) - 1)
        return generate_view_pair_from_frames(cache.get(frames[a]), cache.get(frames[b]), aug, rng)
    return generate_view_pair(cache.get(items[item_idx]), cfg.strategy, aug, rng)


def train(cfg: TrainConfig) -> TrainResult:
    """Run pre-training to completion; returns final checkpoint and log paths."""
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if cfg.strategy == "frame-pair":
        items = [seq for seq in list_sequences(cfg.data_dir) if seq]
    else:
        items = list_images(cfg.data_dir)
    if not items:
        raise DataContractError(f"no training frames found under {cfg.data_dir}")

    patch, enc, dec = build_model_configs(cfg)
    params = ModelParams(patch, enc, dec, Rng(cfg.seed, STREAM_INIT), dtype=np.float32)
    opt = AdamWState.init(params.named())
    aug = build_augment_config(cfg)
    cache = _FrameCache()

    per_batch = cfg.batch_size // cfg.repeated_sampling
    steps_per_epoch = max(1, math.ceil(len(items) / per_batch))
    total_steps = cfg.steps if cfg.steps > 0 else cfg.epochs * steps_per_epoch
    sched = _build_schedule(cfg, steps_per_epoch, total_steps)

    metrics_path = out / "metrics.log"
    ckpt_path = out / "checkpoint_final.cmae"
    losses: list[float] = []
    epoch_order: np.ndarray | None = None
    epoch_of_order = -1

    with open(metrics_path, "w") as log:
        for step in range(total_steps):
            epoch = step // steps_per_epoch
            if epoch != epoch_of_order:
                epoch_order = Rng(cfg.seed, STREAM_SHUFFLE + epoch).permutation(len(items))
                epoch_of_order = epoch
            start = (step % steps_per_epoch) * per_batch
            chosen = epoch_order[start : start + per_batch]

            pairs = []
            for j, item_idx in enumerate(chosen):
                for r in range(cfg.repeated_sampling):
                    sample_id = step * cfg.batch_size + j * cfg.repeated_sampling + r
                    srng = Rng(cfg.seed, STREAM_VIEW + sample_id)
                    pairs.append(_sample_pair(cfg, aug, items, int(item_idx), srng, cache))

            mask_rng = Rng(cfg.seed, STREAM_MASK + step)
            drop_rng = Rng(cfg.seed, STREAM_DROPOUT + step)
            with Tape() as tape:
                loss, _ = forward_train(
                    pairs,
                    params,
                    cfg.mask_ratio,
                    mask_rng,
                    scope=cfg.loss_scope,
                    training=True,
                    dropout_rng=drop_rng,
                )
            loss_value = loss.item()
            if not math.isfinite(loss_value):
                log.write(f"step={step} abort=non_finite_loss seed={cfg.seed} "
                          f"view_stream_base={STREAM_VIEW + step * cfg.batch_size}\n")
                log.flush()
                raise NumericError(
                    f"non-finite loss at step {step}; offending batch seed {cfg.seed}, "
                    f"view stream base {STREAM_VIEW + step * cfg.batch_size}"
                )
            grad_map = tape.gradients(loss)
            grads = {name: grad_map.get(t) for name, t in params.named().items()}
            lr = lr_at(step, 1, sched)
            adamw_step(
                params.named(),
                grads,
                opt,
                lr,
                betas=(cfg.beta1, cfg.beta2),
                weight_decay=cfg.weight_decay,
            )
            if not params.all_finite():
                raise NumericError(f"non-finite parameter after step {step}")

            losses.append(loss_value)
            log.write(f"step={step} epoch={epoch} lr={lr:.8e} loss={loss_value:.6f}\n")
            if step % 50 == 0:
                log.flush()
            if cfg.ckpt_every and (step + 1) % cfg.ckpt_every == 0 and (step + 1) < total_steps:
                snap = checkpoint_from_training(params, opt, cfg, step + 1)
                save_checkpoint(out / f"checkpoint_{step + 1:06d}.cmae", snap)

    save_checkpoint(ckpt_path, checkpoint_from_training(params, opt, cfg, total_steps))
    return TrainResult(ckpt_path, metrics_path, losses)


def probe_forward(params: ModelParams, images: np.ndarray, ratio: float = 0.5, seed: int = 1234) -> np.ndarray:
    """Deterministic eval-mode forward on a fixed batch.

    Used to confirm that a reloaded checkpoint reproduces bit-identical
    outputs.
    """
    n = params.patch_cfg.n_patches
    rng = Rng(seed, 0)
    plans = [make_mask_plan(n, ratio, rng) for _ in range(images.shape[0])]
    enc_v1 = encode(images, params)
    enc_v2 = encode(images, params, plans=plans)
    pred = decode(enc_v2, plans, enc_v1, params, training=False)
    return pred.data
