import numpy as np
import pytest

from cropmae.errors import FormatError
from cropmae.model import DecoderConfig, EncoderConfig, ModelParams, PatchConfig
from cropmae.numerics import Rng
from cropmae.optim import AdamWState
from cropmae.trainer import (
    CheckpointState,
    TrainConfig,
    checkpoint_from_training,
    load_checkpoint,
    probe_forward,
    restore_model,
    save_checkpoint,
)


def _state():
    rng = np.random.default_rng(0)
    return CheckpointState(
        config={"image_size": "16", "note": "a = b"},
        tensors={
            "w.one": rng.normal(size=(3, 4)).astype(np.float32),
            "w.two": rng.normal(size=(7,)).astype(np.float64),
        },
        meta={"step": 12, "opt_t": 12, "seed": 5},
    )


def test_roundtrip_bit_identical(tmp_path):
    path = tmp_path / "ck.cmae"
    state = _state()
    save_checkpoint(path, state)
    back = load_checkpoint(path)
    assert back.config == state.config
    assert back.meta == state.meta
    assert list(back.tensors) == list(state.tensors)
    for name in state.tensors:
        assert back.tensors[name].dtype == state.tensors[name].dtype
        np.testing.assert_array_equal(back.tensors[name], state.tensors[name])


def test_bad_magic_reports_offset(tmp_path):
    path = tmp_path / "ck.cmae"
    save_checkpoint(path, _state())
    raw = bytearray(path.read_bytes())
    raw[:4] = b"XXXX"
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError) as err:
        load_checkpoint(path)
    assert err.value.offset == 0


def test_version_mismatch_rejected(tmp_path):
    path = tmp_path / "ck.cmae"
    save_checkpoint(path, _state())
    raw = bytearray(path.read_bytes())
    raw[4] = 99
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError) as err:
        load_checkpoint(path)
    assert "version" in str(err.value)


def test_truncated_payload_clean_error(tmp_path):
    path = tmp_path / "ck.cmae"
    save_checkpoint(path, _state())
    raw = path.read_bytes()
    path.write_bytes(raw[:-9])
    with pytest.raises(FormatError) as err:
        load_checkpoint(path)
    assert "offset" in str(err.value)


def test_truncated_header_clean_error(tmp_path):
    path = tmp_path / "ck.cmae"
    save_checkpoint(path, _state())
    raw = path.read_bytes()
    path.write_bytes(raw[:20])
    with pytest.raises(FormatError):
        load_checkpoint(path)


def _tiny_training_state():
    cfg = TrainConfig(image_size=8, patch_size=4, enc_depth=1, enc_dim=8, enc_heads=2,
                      dec_depth=1, dec_dim=8, dec_ff=16, dec_heads=2, seed=3)
    params = ModelParams(
        PatchConfig(8, 4),
        EncoderConfig(1, 8, 2, 4.0),
        DecoderConfig(1, 8, 16, 2, 0.1),
        Rng(3, 0),
    )
    opt = AdamWState.init(params.named())
    opt.t = 7
    opt.m["head.w"] += 0.25
    return cfg, params, opt


def test_model_checkpoint_probe_equality(tmp_path):
    cfg, params, opt = _tiny_training_state()
    state = checkpoint_from_training(params, opt, cfg, step=7)
    path = tmp_path / "model.cmae"
    save_checkpoint(path, state)

    probe = np.random.default_rng(1).uniform(size=(2, 8, 8, 3)).astype(np.float32)
    before = probe_forward(params, probe)

    restored_params, restored_opt, restored_cfg = restore_model(load_checkpoint(path))
    after = probe_forward(restored_params, probe)
    np.testing.assert_array_equal(before, after)
    assert restored_opt.t == 7
    np.testing.assert_array_equal(restored_opt.m["head.w"], opt.m["head.w"])
    assert restored_cfg.seed == cfg.seed
    for name, tensor in params.named().items():
        np.testing.assert_array_equal(restored_params[name].data, tensor.data)


def test_restore_rejects_missing_tensor(tmp_path):
    cfg, params, opt = _tiny_training_state()
    state = checkpoint_from_training(params, opt, cfg, step=1)
    del state.tensors["head.w"]
    path = tmp_path / "broken.cmae"
    save_checkpoint(path, state)
    with pytest.raises(FormatError):
        restore_model(load_checkpoint(path))
