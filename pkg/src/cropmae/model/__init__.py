"""Patchify, masking, the Siamese encoder/decoder, and analysis tooling."""

from .attnmaps import (
    compose_reconstruction_grid,
    denormalize_prediction,
    export_attention_maps,
    extract_cls_attention,
    render_masked_view,
    upsample_map,
)
from .flops import count_attention_ops
from .masking import MaskPlan, make_mask_plan, stack_masked, stack_visible, visible_count
from .network import (
    DecoderConfig,
    EncoderConfig,
    ModelParams,
    decode,
    desk_scale_configs,
    encode,
    expected_parameter_count,
    forward_train,
    normalize_patch_targets,
    reconstruction_loss,
)
from .patches import PatchConfig, patchify, pos_embed_2d, unpatchify

__all__ = [
    "DecoderConfig",
    "EncoderConfig",
    "MaskPlan",
    "ModelParams",
    "PatchConfig",
    "compose_reconstruction_grid",
    "count_attention_ops",
    "decode",
    "denormalize_prediction",
    "desk_scale_configs",
    "encode",
    "expected_parameter_count",
    "export_attention_maps",
    "extract_cls_attention",
    "forward_train",
    "make_mask_plan",
    "normalize_patch_targets",
    "patchify",
    "pos_embed_2d",
    "reconstruction_loss",
    "render_masked_view",
    "stack_masked",
    "stack_visible",
    "unpatchify",
    "upsample_map",
    "visible_count",
]
