"""Forward-value tests for the tensor primitives."""

import numpy as np
import pytest

from cropmae.errors import NumericError, ParameterError, ShapeError
from cropmae.numerics import (
    Rng,
    Tensor,
    concat,
    dropout,
    gather,
    gelu,
    layer_norm,
    matmul,
    reshape,
    scatter,
    softmax,
    tmean,
    transpose,
    tsum,
)


def test_matmul_identity():
    b = Tensor(np.arange(9, dtype=np.float64).reshape(3, 3))
    out = matmul(Tensor(np.eye(3)), b)
    np.testing.assert_allclose(out.data, b.data)


def test_matmul_hand_case():
    a = Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]))
    b = Tensor(np.array([[1.0], [1.0]]))
    np.testing.assert_allclose(matmul(a, b).data, [[3.0], [7.0]])


def test_matmul_shape_mismatch():
    with pytest.raises(ShapeError):
        matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))
    with pytest.raises(ShapeError):
        matmul(Tensor(np.zeros(3)), Tensor(np.zeros((3, 2))))


def test_matmul_batched_matches_loop():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(2, 3, 4, 5))
    b = rng.normal(size=(2, 3, 5, 6))
    out = matmul(Tensor(a), Tensor(b)).data
    for i in range(2):
        for j in range(3):
            np.testing.assert_allclose(out[i, j], a[i, j] @ b[i, j], rtol=1e-6)


def test_softmax_symmetry():
    out = softmax(Tensor(np.array([0.0, 0.0])), axis=-1)
    np.testing.assert_allclose(out.data, [0.5, 0.5])


def test_softmax_closed_form():
    out = softmax(Tensor(np.log(np.array([1.0, 3.0]))), axis=-1)
    np.testing.assert_allclose(out.data, [0.25, 0.75], atol=1e-12)


def test_softmax_stability():
    out = softmax(Tensor(np.array([1000.0, 0.0])), axis=-1)
    assert np.isfinite(out.data).all()
    np.testing.assert_allclose(out.data, [1.0, 0.0], atol=1e-12)


def test_softmax_rows_sum_to_one():
    rng = np.random.default_rng(1)
    x = Tensor(rng.normal(size=(4, 7, 5)))
    out = softmax(x, axis=-1).data
    assert (out >= 0).all()
    np.testing.assert_allclose(out.sum(axis=-1), np.ones((4, 7)), atol=1e-6)


def test_softmax_rejects_non_finite():
    with pytest.raises(NumericError):
        softmax(Tensor(np.array([np.nan, 0.0])), axis=-1)


def test_layer_norm_constant_slice_is_zero():
    gamma = Tensor(np.ones(4))
    beta = Tensor(np.zeros(4))
    out = layer_norm(Tensor(np.full((2, 4), 3.0)), gamma, beta)
    np.testing.assert_allclose(out.data, np.zeros((2, 4)), atol=1e-3)


def test_layer_norm_hand_case():
    gamma = Tensor(np.ones(2))
    beta = Tensor(np.zeros(2))
    out = layer_norm(Tensor(np.array([[1.0, 3.0]])), gamma, beta)
    np.testing.assert_allclose(out.data, [[-1.0, 1.0]], atol=1e-3)


def test_layer_norm_statistics():
    rng = np.random.default_rng(2)
    x = Tensor(rng.normal(size=(5, 16)) * 3 + 1)
    out = layer_norm(x, Tensor(np.ones(16)), Tensor(np.zeros(16))).data
    np.testing.assert_allclose(out.mean(axis=-1), np.zeros(5), atol=1e-6)
    np.testing.assert_allclose(out.var(axis=-1), np.ones(5), atol=1e-3)


def test_gelu_zero_and_asymptotes():
    x = Tensor(np.array([0.0, 20.0, -20.0]))
    out = gelu(x).data
    assert out[0] == 0.0
    np.testing.assert_allclose(out[1], 20.0, atol=1e-6)
    np.testing.assert_allclose(out[2], 0.0, atol=1e-6)


def test_gelu_scalar_hand_value():
    # independent scalar evaluation of the tanh form at x = 1
    import math

    c = math.sqrt(2.0 / math.pi)
    expected = 0.5 * (1.0 + math.tanh(c * (1.0 + 0.044715)))
    out = gelu(Tensor(np.array([1.0]))).data[0]
    np.testing.assert_allclose(out, expected, rtol=1e-12)


def test_dropout_eval_identity():
    x = Tensor(np.arange(6, dtype=np.float32))
    out = dropout(x, 0.5, training=False)
    assert out is x


def test_dropout_p_zero_identity():
    x = Tensor(np.arange(6, dtype=np.float32))
    assert dropout(x, 0.0, training=True, rng=Rng(0)) is x


def test_dropout_zero_fraction_concentrates():
    x = Tensor(np.ones(1_000_000, dtype=np.float32))
    out = dropout(x, 0.1, training=True, rng=Rng(7, 1)).data
    frac = float((out == 0).mean())
    assert abs(frac - 0.1) < 0.003
    survivors = out[out != 0]
    np.testing.assert_allclose(survivors, 1.0 / 0.9, rtol=1e-5)


def test_dropout_rejects_bad_p():
    x = Tensor(np.ones(3))
    with pytest.raises(ParameterError):
        dropout(x, 1.0, training=True, rng=Rng(0))
    with pytest.raises(ParameterError):
        dropout(x, -0.1, training=True, rng=Rng(0))


def test_gather_scatter_roundtrip():
    rng = np.random.default_rng(3)
    x = Tensor(rng.normal(size=(2, 8, 4)))
    idx = np.array([[1, 3, 6], [0, 2, 7]])[:, :, None]
    picked = gather(x, idx, axis=1)
    assert picked.shape == (2, 3, 4)
    back = scatter(picked, idx, axis=1, extent=8)
    np.testing.assert_allclose(
        np.take_along_axis(back.data, idx, axis=1), picked.data
    )
    # non-selected entries are zero
    mask = np.ones((2, 8, 4), dtype=bool)
    np.put_along_axis(mask, np.broadcast_to(idx, (2, 3, 4)), False, axis=1)
    assert (back.data[mask] == 0).all()


def test_concat_and_split_shapes():
    a = Tensor(np.ones((2, 3)))
    b = Tensor(np.zeros((2, 2)))
    out = concat([a, b], axis=1)
    assert out.shape == (2, 5)
    np.testing.assert_allclose(out.data[:, :3], 1.0)
    np.testing.assert_allclose(out.data[:, 3:], 0.0)


def test_transpose_reshape_reductions():
    x = Tensor(np.arange(24, dtype=np.float64).reshape(2, 3, 4))
    assert transpose(x, (2, 0, 1)).shape == (4, 2, 3)
    assert reshape(x, (6, 4)).shape == (6, 4)
    np.testing.assert_allclose(tsum(x).data, 276.0)
    np.testing.assert_allclose(tmean(x, axis=-1).data, x.data.mean(axis=-1))


def test_python_scalars_keep_dtype():
    x = Tensor(np.ones(3, dtype=np.float32))
    assert (x * 0.5).dtype == np.float32
    assert (x + 1).dtype == np.float32
    assert (1.0 / x).dtype == np.float32
