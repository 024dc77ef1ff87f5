"""Inverted-dropout mask construction for the recurrent layers.

Two training-time variants:

* naive: a fresh mask on the layer output at every timestep, nothing on
  the recurrent path;
* variational: one input mask and one recurrent mask per sequence per
  directional layer, reused across all timesteps.

Masks are Bernoulli(1-rate) scaled by 1/(1-rate), so evaluation mode is
exactly the identity (no rescaling at inference).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from ..rng import Rng

MODES = ("none", "naive", "variational")


@dataclass
class LayerMasks:
    input: np.ndarray | None = None      # [B, D], variational only
    recurrent: np.ndarray | None = None  # [B, H], variational only
    output: np.ndarray | None = None     # [B, T, H], naive only


def dropout_masks(mode: str, rate: float, shapes: dict[str, tuple[int, ...]], rng: Rng) -> LayerMasks:
    """Build the mask set one directional LSTM layer needs for one batch.

    ``shapes`` supplies "input" [B, D], "recurrent" [B, H] and "output"
    [B, T, H]; only the entries the mode uses are consumed.
    """
    if mode not in MODES:
        raise InvalidInputError(f"unknown dropout mode {mode!r}")
    if not 0.0 <= rate < 1.0:
        raise InvalidInputError(f"dropout rate {rate} outside [0, 1)")
    if mode == "none" or rate == 0.0:
        return LayerMasks()
    scale = 1.0 / (1.0 - rate)
    if mode == "naive":
        return LayerMasks(output=rng.bernoulli_mask(shapes["output"], 1.0 - rate) * scale)
    return LayerMasks(
        input=rng.bernoulli_mask(shapes["input"], 1.0 - rate) * scale,
        recurrent=rng.bernoulli_mask(shapes["recurrent"], 1.0 - rate) * scale,
    )
