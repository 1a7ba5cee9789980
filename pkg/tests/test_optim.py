import math

import numpy as np
import pytest

from cropmae.errors import NumericError
from cropmae.numerics import Tensor
from cropmae.optim import AdamWState, ScheduleConfig, adamw_step, is_decayed, lr_at


def _single(value=1.0):
    params = {"w": Tensor(np.array([value]), requires_grad=True)}
    return params, AdamWState.init(params)


def test_zero_grad_zero_decay_no_change():
    params, state = _single(2.5)
    adamw_step(params, {"w": np.zeros(1)}, state, lr=0.1, weight_decay=0.0)
    np.testing.assert_allclose(params["w"].data, 2.5)


def test_hand_evaluated_first_step():
    # p=1, g=0.5, lr=0.1, betas (0.9, 0.95), wd=0.05:
    # m_hat = 0.5, v_hat = 0.25 -> p - 0.1*(0.5/0.5) - 0.1*0.05*1 = 0.895
    params, state = _single(1.0)
    adamw_step(params, {"w": np.array([0.5])}, state, lr=0.1)
    np.testing.assert_allclose(params["w"].data, [0.895], atol=1e-9)
    assert state.t == 1


def test_pure_decay_shrinks_by_factor():
    params, state = _single(3.0)
    adamw_step(params, {"w": np.zeros(1)}, state, lr=0.1, weight_decay=0.05)
    np.testing.assert_allclose(params["w"].data, [3.0 * (1 - 0.005)], atol=1e-12)


def test_non_finite_gradient_rejects_whole_step():
    params = {
        "a": Tensor(np.ones(2), requires_grad=True),
        "b": Tensor(np.ones(2), requires_grad=True),
    }
    state = AdamWState.init(params)
    with pytest.raises(NumericError):
        adamw_step(params, {"a": np.ones(2), "b": np.array([1.0, np.nan])}, state, lr=0.1)
    np.testing.assert_allclose(params["a"].data, 1.0)  # nothing applied
    assert state.t == 0


def test_step_is_deterministic():
    pa, sa = _single(1.0)
    pb, sb = _single(1.0)
    for _ in range(5):
        adamw_step(pa, {"w": np.array([0.3])}, sa, lr=0.01)
        adamw_step(pb, {"w": np.array([0.3])}, sb, lr=0.01)
    np.testing.assert_array_equal(pa["w"].data, pb["w"].data)


def test_decay_exclusions_exact():
    decayed = ["patch_embed.w", "enc.0.attn.wq", "dec.1.ff.w1", "head.w", "dec_embed.w"]
    excluded = [
        "patch_embed.b",
        "enc.0.attn.bq",
        "enc.0.ln1.g",
        "enc.0.ln1.b",
        "cls_token",
        "mask_token",
        "dec.0.ff.b2",
        "head.b",
    ]
    assert all(is_decayed(n) for n in decayed)
    assert not any(is_decayed(n) for n in excluded)


def test_tokens_not_decayed_in_step():
    params = {"cls_token": Tensor(np.array([2.0]), requires_grad=True)}
    state = AdamWState.init(params)
    adamw_step(params, {"cls_token": np.zeros(1)}, state, lr=0.1, weight_decay=0.05)
    np.testing.assert_allclose(params["cls_token"].data, [2.0])


class TestSchedule:
    def _cfg(self, **kw):
        defaults = dict(
            base_lr=1.5e-4,
            effective_batch=256,
            warmup_epochs=10,
            total_epochs=100,
            min_lr=0.0,
        )
        defaults.update(kw)
        return ScheduleConfig(**defaults)

    def test_endpoints(self):
        cfg = self._cfg()
        spe = 7
        assert lr_at(0, spe, cfg) == 0.0
        np.testing.assert_allclose(lr_at(10 * spe, spe, cfg), cfg.peak_lr, atol=1e-18)
        np.testing.assert_allclose(lr_at(100 * spe, spe, cfg), 0.0, atol=1e-18)

    def test_midpoint_of_decay(self):
        cfg = self._cfg(min_lr=1e-6)
        spe = 4
        mid = (10 * spe + 100 * spe) // 2
        expected = (cfg.peak_lr + cfg.min_lr) / 2
        assert abs(lr_at(mid, spe, cfg) - expected) < 1e-12

    def test_continuous_at_warmup_boundary(self):
        cfg = self._cfg()
        spe = 13
        before = lr_at(10 * spe - 1, spe, cfg)
        at = lr_at(10 * spe, spe, cfg)
        assert at >= before
        assert abs(at - before) < cfg.peak_lr / (10 * spe) + 1e-15

    def test_monotone_nonincreasing_after_warmup(self):
        cfg = self._cfg()
        spe = 3
        values = [lr_at(s, spe, cfg) for s in range(10 * spe, 100 * spe + 1)]
        assert all(a >= b - 1e-18 for a, b in zip(values, values[1:]))

    def test_linear_batch_scaling(self):
        scaled = self._cfg(effective_batch=2048)
        assert abs(scaled.peak_lr - 1.5e-4 * 8) < 1e-15
        flat = self._cfg(effective_batch=2048, scale_lr_by_batch=False)
        assert flat.peak_lr == 1.5e-4

    def test_closed_form_cosine_values(self):
        cfg = self._cfg()
        spe = 1
        for step in (20, 37, 64, 99):
            progress = (step - 10) / 90
            expected = cfg.peak_lr * 0.5 * (1 + math.cos(math.pi * progress))
            assert abs(lr_at(step, spe, cfg) - expected) < 1e-18
