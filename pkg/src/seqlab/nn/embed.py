"""Trainable embedding table with scatter-add gradients."""

from __future__ import annotations

import numpy as np

from .params import Parameter


class Embedding:
    def __init__(self, name: str, table: np.ndarray):
        self.weight = Parameter(name, table)

    @property
    def dim(self) -> int:
        return self.weight.value.shape[1]

    def params(self) -> list[Parameter]:
        return [self.weight]

    def forward(self, ids: np.ndarray) -> np.ndarray:
        return self.weight.value[ids]

    def backward(self, ids: np.ndarray, d_out: np.ndarray, mask: np.ndarray | None = None) -> None:
        if mask is not None:
            d_out = d_out * mask[..., None]
        np.add.at(self.weight.grad, ids.reshape(-1), d_out.reshape(-1, self.dim))
