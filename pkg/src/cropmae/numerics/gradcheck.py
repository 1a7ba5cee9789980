"""Finite-difference gradient verification.

The analytic gradient from the tape is compared against central
differences coordinate by coordinate. This module is the independent
oracle the rest of the test suite leans on; it never uses the tape for
the numeric side.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import ContractError, ParameterError
from .tensor import Tape, Tensor


def finite_diff_check(f: Callable[[Tensor], Tensor], x: Tensor, h: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``f`` must be scalar-valued and a pure function of ``x`` (and constants).
    Relative error per coordinate is |a - n| / (|a| + |n| + 1e-12).
    """
    if h <= 0:
        raise ParameterError(f"step size must be positive, got {h}")
    if not x.requires_grad:
        raise ContractError("finite_diff_check needs x.requires_grad")

    with Tape() as tape:
        out = f(x)
    if out.data.size != 1:
        raise ContractError(f"f must be scalar-valued, got shape {out.shape}")
    analytic = tape.gradients(out).get(x)
    if analytic is None:
        analytic = np.zeros_like(x.data)

    flat = x.data.reshape(-1)
    numeric = np.zeros_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        f_plus = f(x).item()
        flat[i] = orig - h
        f_minus = f(x).item()
        flat[i] = orig
        numeric[i] = (f_plus - f_minus) / (2.0 * h)

    a = analytic.reshape(-1)
    denom = np.abs(a) + np.abs(numeric) + 1e-12
    return float(np.max(np.abs(a - numeric) / denom))
