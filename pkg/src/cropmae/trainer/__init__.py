"""Pre-training loop, checkpointing, and configuration."""

from .checkpoint import (
    CheckpointState,
    checkpoint_from_training,
    load_checkpoint,
    restore_model,
    save_checkpoint,
)
from .config import (
    TrainConfig,
    apply_config,
    build_augment_config,
    build_model_configs,
    config_from_snapshot,
    config_snapshot,
    parse_config_file,
)
from .loop import TrainResult, list_images, list_sequences, probe_forward, train

__all__ = [
    "CheckpointState",
    "TrainConfig",
    "TrainResult",
    "apply_config",
    "build_augment_config",
    "build_model_configs",
    "checkpoint_from_training",
    "config_from_snapshot",
    "config_snapshot",
    "list_images",
    "list_sequences",
    "load_checkpoint",
    "parse_config_file",
    "probe_forward",
    "restore_model",
    "save_checkpoint",
    "train",
]
