"""Mask planning: which patch tokens of the target view stay visible."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, ParameterError
from ..numerics import Rng


@dataclass
class MaskPlan:
    """Sorted visible indices for a patch grid of ``n_patches`` tokens."""

    n_patches: int
    ratio: float
    visible: np.ndarray

    @property
    def masked(self) -> np.ndarray:
        hidden = np.ones(self.n_patches, dtype=bool)
        hidden[self.visible] = False
        return np.nonzero(hidden)[0]


def visible_count(n_patches: int, ratio: float) -> int:
    """floor((1 - ratio) * n_patches)."""
    if not 0.0 <= ratio < 1.0:
        raise ParameterError(f"mask ratio must be in [0, 1), got {ratio}")
    return math.floor((1.0 - ratio) * n_patches)


def make_mask_plan(n_patches: int, ratio: float, rng: Rng) -> MaskPlan:
    """Draw visible indices uniformly without replacement, sorted ascending."""
    count = visible_count(n_patches, ratio)
    if count < 1:
        raise ParameterError(
            f"ratio {ratio} leaves no visible patch of {n_patches}; at least one visible patch is required"
        )
    picks = np.sort(rng.choice_without_replacement(n_patches, count)).astype(np.int64)
    return MaskPlan(n_patches, ratio, picks)


def stack_visible(plans: list[MaskPlan]) -> np.ndarray:
    """(batch, v) visible-index matrix; all plans must agree on the count."""
    counts = {len(p.visible) for p in plans}
    if len(counts) != 1:
        raise ContractError(f"plans have differing visible counts: {sorted(counts)}")
    return np.stack([p.visible for p in plans])


def stack_masked(plans: list[MaskPlan]) -> np.ndarray:
    counts = {p.n_patches - len(p.visible) for p in plans}
    if len(counts) != 1:
        raise ContractError(f"plans have differing masked counts: {sorted(counts)}")
    return np.stack([p.masked for p in plans])
