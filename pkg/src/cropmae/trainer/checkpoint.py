"""Binary checkpoint format.

Layout: magic "CMAE", u32 LE version, u32 LE header length, utf-8 text
header, then raw little-endian tensor payloads. Header lines are either
metadata ("#cfg key = value", "#meta key = value") or one tensor entry per
line in the form ``name:dtype:shape:offset`` with dtype f32/f64, shape as
comma-separated extents, and offset in bytes from the payload start.

Loading parses and validates everything before constructing any state, so
a corrupt file never yields partial results.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import FormatError
from ..model import ModelParams
from ..numerics import Rng
from ..optim import AdamWState
from .config import TrainConfig, build_model_configs, config_from_snapshot

MAGIC = b"CMAE"
VERSION = 1

_DTYPES = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}
_DTYPE_NAMES = {np.dtype(np.float32): "f32", np.dtype(np.float64): "f64"}


@dataclass
class CheckpointState:
    config: dict[str, str] = field(default_factory=dict)
    tensors: dict[str, np.ndarray] = field(default_factory=dict)
    meta: dict[str, int] = field(default_factory=dict)


def save_checkpoint(path: str | Path, state: CheckpointState) -> None:
    header_lines = []
    for key, value in state.config.items():
        header_lines.append(f"#cfg {key} = {value}")
    for key, value in state.meta.items():
        header_lines.append(f"#meta {key} = {int(value)}")

    offset = 0
    payloads = []
    for name, arr in state.tensors.items():
        dtype_name = _DTYPE_NAMES.get(arr.dtype.newbyteorder("="))
        if ":" in name:
            raise FormatError(f"tensor name {name!r} may not contain ':'")
        if dtype_name is None:
            raise FormatError(f"unsupported tensor dtype {arr.dtype} for {name}")
        shape = ",".join(str(s) for s in arr.shape)
        header_lines.append(f"{name}:{dtype_name}:{shape}:{offset}")
        raw = np.ascontiguousarray(arr, dtype=_DTYPES[dtype_name]).tobytes()
        payloads.append(raw)
        offset += len(raw)

    header = ("\n".join(header_lines) + "\n").encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        for raw in payloads:
            f.write(raw)


def load_checkpoint(path: str | Path) -> CheckpointState:
    buf = Path(path).read_bytes()
    if len(buf) < 12:
        raise FormatError("file too short for checkpoint preamble", offset=len(buf))
    if buf[:4] != MAGIC:
        raise FormatError(f"bad magic {buf[:4]!r}", offset=0)
    (version,) = struct.unpack("<I", buf[4:8])
    if version != VERSION:
        raise FormatError(f"unsupported checkpoint version {version}", offset=4)
    (header_len,) = struct.unpack("<I", buf[8:12])
    if 12 + header_len > len(buf):
        raise FormatError(
            f"declared header length {header_len} exceeds file size", offset=12
        )
    header = buf[12 : 12 + header_len].decode("utf-8")
    payload = buf[12 + header_len :]

    state = CheckpointState()
    for line in header.splitlines():
        if not line:
            continue
        if line.startswith("#cfg "):
            key, value = line[5:].split(" = ", 1)
            state.config[key] = value
            continue
        if line.startswith("#meta "):
            key, value = line[6:].split(" = ", 1)
            state.meta[key] = int(value)
            continue
        parts = line.split(":")
        if len(parts) != 4:
            raise FormatError(f"bad tensor header line {line!r}")
        name, dtype_name, shape_text, offset_text = parts
        if dtype_name not in _DTYPES:
            raise FormatError(f"unknown dtype {dtype_name!r} for {name}")
        shape = tuple(int(s) for s in shape_text.split(",")) if shape_text else ()
        offset = int(offset_text)
        dtype = _DTYPES[dtype_name]
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        if offset < 0 or offset + nbytes > len(payload):
            raise FormatError(
                f"tensor {name} payload out of bounds", offset=12 + header_len + offset
            )
        arr = np.frombuffer(payload, dtype=dtype, count=int(np.prod(shape, dtype=np.int64)), offset=offset)
        state.tensors[name] = arr.reshape(shape).copy()
    return state


# ---------------------------------------------------------------------------
# bridges between training state and the serialized form
# ---------------------------------------------------------------------------


def checkpoint_from_training(
    params: ModelParams, opt: AdamWState, cfg: TrainConfig, step: int
) -> CheckpointState:
    from .config import config_snapshot

    state = CheckpointState(config=config_snapshot(cfg))
    for name, tensor in params.named().items():
        state.tensors[name] = tensor.data
    for name in params.named():
        state.tensors[f"opt.m.{name}"] = opt.m[name]
        state.tensors[f"opt.v.{name}"] = opt.v[name]
    state.meta["step"] = step
    state.meta["opt_t"] = opt.t
    state.meta["seed"] = cfg.seed
    return state


def restore_model(state: CheckpointState) -> tuple[ModelParams, AdamWState, TrainConfig]:
    """Rebuild model parameters and optimizer state from a checkpoint."""
    cfg = config_from_snapshot(state.config)
    patch, enc, dec = build_model_configs(cfg)
    dtype = np.float64 if state.tensors and next(iter(state.tensors.values())).dtype == np.float64 else np.float32
    params = ModelParams(patch, enc, dec, Rng(cfg.seed, 0), dtype=dtype)
    expected = set(params.named())
    stored = {n for n in state.tensors if not n.startswith("opt.")}
    if stored != expected:
        missing = sorted(expected - stored)[:3]
        extra = sorted(stored - expected)[:3]
        raise FormatError(f"checkpoint tensors do not match model (missing {missing}, extra {extra})")
    for name, tensor in params.named().items():
        arr = state.tensors[name].astype(dtype)
        if arr.shape != tensor.data.shape:
            raise FormatError(f"tensor {name} has shape {arr.shape}, expected {tensor.data.shape}")
        tensor.data = arr
    opt = AdamWState.init(params.named())
    for name in params.named():
        m = state.tensors.get(f"opt.m.{name}")
        v = state.tensors.get(f"opt.v.{name}")
        if m is not None:
            opt.m[name] = m.astype(dtype)
        if v is not None:
            opt.v[name] = v.astype(dtype)
    opt.t = state.meta.get("opt_t", 0)
    return params, opt, cfg
