"""Array, autodiff, and deterministic-randomness substrate."""

from .gradcheck import finite_diff_check
from .rng import (
    Rng,
    STREAM_DROPOUT,
    STREAM_INIT,
    STREAM_MASK,
    STREAM_SHUFFLE,
    STREAM_SYNTH,
    STREAM_VIEW,
)
from .tensor import (
    Tape,
    Tensor,
    add,
    backward,
    broadcast_to,
    concat,
    div,
    dropout,
    gather,
    gelu,
    layer_norm,
    matmul,
    mul,
    neg,
    reshape,
    scatter,
    softmax,
    sub,
    tmean,
    transpose,
    tsum,
)

__all__ = [
    "Rng",
    "STREAM_DROPOUT",
    "STREAM_INIT",
    "STREAM_MASK",
    "STREAM_SHUFFLE",
    "STREAM_SYNTH",
    "STREAM_VIEW",
    "Tape",
    "Tensor",
    "add",
    "backward",
    "broadcast_to",
    "concat",
    "div",
    "dropout",
    "finite_diff_check",
    "gather",
    "gelu",
    "layer_norm",
    "matmul",
    "mul",
    "neg",
    "reshape",
    "scatter",
    "softmax",
    "sub",
    "tmean",
    "transpose",
    "tsum",
]
