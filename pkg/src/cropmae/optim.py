"""AdamW with decoupled weight decay, plus warmup + cosine learning rates.

Weight decay applies to weight matrices only; biases, norm gains/shifts,
and the CLS/mask tokens are excluded (``is_decayed`` is the exact list and
is visible from checkpoint tensor names).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericError, ParameterError
from .numerics import Tensor

_NO_DECAY_SUFFIXES = (".b", ".bq", ".bk", ".bv", ".bo", ".b1", ".b2", ".g")
_NO_DECAY_NAMES = ("cls_token", "mask_token")


def is_decayed(name: str) -> bool:
    """True when weight decay applies to the named parameter."""
    if name in _NO_DECAY_NAMES:
        return False
    return not name.endswith(_NO_DECAY_SUFFIXES)


@dataclass
class AdamWState:
    """First/second moment estimates and the shared step counter."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0

    @classmethod
    def init(cls, params: dict[str, Tensor]) -> "AdamWState":
        return cls(
            m={k: np.zeros_like(p.data) for k, p in params.items()},
            v={k: np.zeros_like(p.data) for k, p in params.items()},
            t=0,
        )


def adamw_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: AdamWState,
    lr: float,
    betas: tuple[float, float] = (0.9, 0.95),
    eps: float = 1e-8,
    weight_decay: float = 0.05,
) -> None:
    """One in-place update; rejects the whole step on any non-finite gradient.

    p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * p, with the decay
    term computed from the pre-update parameter value.
    """
    beta1, beta2 = betas
    for name in params:
        g = grads.get(name)
        if g is not None and not np.isfinite(g).all():
            raise NumericError(f"non-finite gradient for {name}; step rejected")
    state.t += 1
    t = state.t
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p.data)
        if g.shape != p.data.shape:
            raise ParameterError(f"gradient shape {g.shape} != parameter shape {p.data.shape} for {name}")
        m = state.m[name]
        v = state.v[name]
        m[:] = beta1 * m + (1.0 - beta1) * g
        v[:] = beta2 * v + (1.0 - beta2) * (g * g)
        update = lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
        if weight_decay != 0.0 and is_decayed(name):
            update = update + lr * weight_decay * p.data
        p.data[...] = p.data - update


@dataclass
class ScheduleConfig:
    """Linear warmup to the peak rate, then cosine decay to ``min_lr``.

    The peak is base_lr scaled linearly by effective_batch / 256 when
    ``scale_lr_by_batch`` is set; disable to use base_lr directly.
    """

    base_lr: float = 1.5e-4
    effective_batch: int = 256
    warmup_epochs: int = 10
    total_epochs: int = 400
    min_lr: float = 0.0
    scale_lr_by_batch: bool = True
    reference_batch: int = 256

    def __post_init__(self):
        if self.warmup_epochs > self.total_epochs:
            raise ParameterError(
                f"warmup epochs {self.warmup_epochs} exceed total epochs {self.total_epochs}"
            )

    @property
    def peak_lr(self) -> float:
        if self.scale_lr_by_batch:
            return self.base_lr * self.effective_batch / self.reference_batch
        return self.base_lr


def lr_at(step: int, steps_per_epoch: int, cfg: ScheduleConfig) -> float:
    """Learning rate for ``step`` (0-based).

    Ramps 0 -> peak over the warmup steps, hits the peak exactly at the end
    of warmup, then follows peak * 0.5 * (1 + cos(pi * progress)) down to
    min_lr at step total_epochs * steps_per_epoch.
    """
    if step < 0:
        raise ParameterError(f"step must be nonnegative, got {step}")
    warmup_steps = cfg.warmup_epochs * steps_per_epoch
    total_steps = cfg.total_epochs * steps_per_epoch
    peak = cfg.peak_lr
    if warmup_steps > 0 and step < warmup_steps:
        return peak * step / warmup_steps
    span = max(total_steps - warmup_steps, 1)
    progress = min((step - warmup_steps) / span, 1.0)
    return cfg.min_lr + (peak - cfg.min_lr) * 0.5 * (1.0 + math.cos(math.pi * progress))
