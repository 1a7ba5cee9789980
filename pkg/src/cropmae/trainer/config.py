"""Flat training configuration and the `key = value` config file format.

Precedence is built-in defaults < config file < CLI flags; unknown keys are
rejected by name.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError
from ..model import DecoderConfig, EncoderConfig, PatchConfig
from ..views import STRATEGIES, AugmentConfig


@dataclass
class TrainConfig:
    # data and output
    data_dir: str = ""
    out_dir: str = "run"
    strategy: str = "global-to-local"
    # masking and loss
    mask_ratio: float = 0.985
    loss_scope: str = "masked"
    # model (desk-scale defaults; paper-scale values go in a config file)
    image_size: int = 64
    patch_size: int = 8
    enc_depth: int = 4
    enc_dim: int = 64
    enc_heads: int = 4
    enc_mlp_ratio: float = 4.0
    dec_depth: int = 2
    dec_dim: int = 64
    dec_ff: int = 256
    dec_heads: int = 4
    dropout: float = 0.1
    # augmentation
    area_v1_min: float = 0.10
    area_v1_max: float = 1.0
    area_v2_min: float = 0.30
    area_v2_max: float = 0.60
    aspect_min: float = 0.75
    aspect_max: float = 4.0 / 3.0
    hflip_p: float = 0.5
    # optimization
    batch_size: int = 64
    epochs: int = 10
    steps: int = 0  # when > 0, run exactly this many steps instead of epochs
    repeated_sampling: int = 1
    base_lr: float = 1.5e-4
    min_lr: float = 0.0
    warmup_epochs: int = 10
    warmup_steps: int = 100  # used when steps > 0
    scale_lr_by_batch: bool = True
    weight_decay: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.95
    # bookkeeping
    seed: int = 0
    ckpt_every: int = 0  # 0 = final checkpoint only
    gap_min: int = 4
    gap_max: int = 48

    def validate(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if not 0.0 <= self.mask_ratio < 1.0:
            raise ConfigError(f"mask_ratio must be in [0, 1), got {self.mask_ratio}")
        if self.loss_scope not in ("masked", "all"):
            raise ConfigError(f"loss_scope must be 'masked' or 'all', got {self.loss_scope!r}")
        if self.repeated_sampling < 1:
            raise ConfigError(f"repeated_sampling must be >= 1, got {self.repeated_sampling}")
        if self.batch_size % self.repeated_sampling != 0:
            raise ConfigError(
                f"batch_size {self.batch_size} not divisible by repeated_sampling {self.repeated_sampling}"
            )
        if self.gap_min < 0 or self.gap_max < self.gap_min:
            raise ConfigError(f"bad frame gap range [{self.gap_min}, {self.gap_max}]")


_FIELDS = {f.name: f for f in dataclasses.fields(TrainConfig)}


def _convert(name: str, raw: str):
    kind = _FIELDS[name].type
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for config key {name!r}: {raw!r}") from exc


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read `key = value` lines; '#' starts a comment, blanks are skipped."""
    entries: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = body.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def apply_config(cfg: TrainConfig, entries: dict[str, str]) -> TrainConfig:
    """New TrainConfig with ``entries`` applied; unknown keys are rejected."""
    updates = {}
    for key, raw in entries.items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key: {key}")
        updates[key] = _convert(key, raw)
    return dataclasses.replace(cfg, **updates)


def config_snapshot(cfg: TrainConfig) -> dict[str, str]:
    return {f.name: str(getattr(cfg, f.name)) for f in dataclasses.fields(TrainConfig)}


def config_from_snapshot(entries: dict[str, str]) -> TrainConfig:
    return apply_config(TrainConfig(), entries)


def build_model_configs(cfg: TrainConfig):
    patch = PatchConfig(cfg.image_size, cfg.patch_size)
    enc = EncoderConfig(cfg.enc_depth, cfg.enc_dim, cfg.enc_heads, cfg.enc_mlp_ratio)
    dec = DecoderConfig(cfg.dec_depth, cfg.dec_dim, cfg.dec_ff, cfg.dec_heads, cfg.dropout)
    return patch, enc, dec


def build_augment_config(cfg: TrainConfig) -> AugmentConfig:
    return AugmentConfig(
        area_range_v1=(cfg.area_v1_min, cfg.area_v1_max),
        area_range_v2=(cfg.area_v2_min, cfg.area_v2_max),
        aspect_range=(cfg.aspect_min, cfg.aspect_max),
        hflip_p=cfg.hflip_p,
        output_size=cfg.image_size,
    )
