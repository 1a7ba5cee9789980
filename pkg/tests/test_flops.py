import numpy as np
import pytest

from cropmae.errors import ParameterError
from cropmae.model import DecoderConfig, EncoderConfig, PatchConfig, count_attention_ops


def _cfgs():
    return (
        EncoderConfig(depth=12, dim=384, heads=6),
        DecoderConfig(depth=4, dim=256, ff_dim=2048, heads=8),
        PatchConfig(224, 16),
    )


def test_masked_view_ratio_9_vs_2_visible():
    enc, dec, patch = _cfgs()
    at9 = count_attention_ops(enc, dec, patch, 9)
    at2 = count_attention_ops(enc, dec, patch, 2)
    ratio = at9["encoder_v2"] / at2["encoder_v2"]
    np.testing.assert_allclose(ratio, (10 / 3) ** 2, rtol=1e-12)
    assert abs(ratio - 11.1) < 0.05


def test_full_visibility_degenerates_to_context_cost():
    enc, dec, patch = _cfgs()
    counts = count_attention_ops(enc, dec, patch, patch.n_patches)
    assert counts["encoder_v2"] == counts["encoder_v1"]


def test_doubling_tokens_quadruples_layer_cost():
    enc, dec, patch = _cfgs()
    # visible 3 -> 4 tokens, visible 7 -> 8 tokens
    small = count_attention_ops(enc, dec, patch, 3)["encoder_v2"]
    large = count_attention_ops(enc, dec, patch, 7)["encoder_v2"]
    assert large == 4 * small


def test_counts_are_exact_integers_and_total():
    enc, dec, patch = _cfgs()
    counts = count_attention_ops(enc, dec, patch, 2)
    for key, value in counts.items():
        assert isinstance(value, int), key
    assert counts["total"] == sum(v for k, v in counts.items() if k != "total")
    n = patch.n_patches
    assert counts["encoder_v1"] == 12 * 2 * 197 * 197 * 384
    assert counts["decoder_cross"] == 4 * 2 * n * n * 256


def test_visible_count_validated():
    enc, dec, patch = _cfgs()
    with pytest.raises(ParameterError):
        count_attention_ops(enc, dec, patch, 0)
    with pytest.raises(ParameterError):
        count_attention_ops(enc, dec, patch, 197)
