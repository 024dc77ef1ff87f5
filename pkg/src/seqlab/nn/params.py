"""Parameters, initialization, and whole-model gradient treatments."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from ..errors import InvalidInputError
from ..rng import Rng


class Parameter:
    """A named dense float64 tensor with a same-shape gradient buffer."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.value.shape})"


def glorot_init(shape: Sequence[int], rng: Rng) -> np.ndarray:
    """Uniform init in +/- sqrt(6 / (fan_in + fan_out)).

    fan_in is the product of all leading dimensions (1 for vectors),
    fan_out the trailing dimension.
    """
    shape = tuple(int(d) for d in shape)
    if len(shape) < 1 or any(d < 1 for d in shape):
        raise InvalidInputError(f"cannot initialize zero-sized shape {shape}")
    fan_in = int(np.prod(shape[:-1])) if len(shape) > 1 else 1
    fan_out = shape[-1]
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform_array(shape, -bound, bound)


def zero_grads(params: Iterable[Parameter]) -> None:
    for p in params:
        p.zero_grad()


def clip_gradients(params: Iterable[Parameter], threshold: float) -> None:
    """Clamp every gradient component to [-threshold, threshold]."""
    if threshold <= 0:
        raise InvalidInputError("clip threshold must be positive")
    for p in params:
        np.clip(p.grad, -threshold, threshold, out=p.grad)


def normalize_gradients(params: Iterable[Parameter], threshold: float) -> None:
    """Rescale all gradients jointly if the global L2 norm exceeds threshold."""
    if threshold <= 0:
        raise InvalidInputError("norm threshold must be positive")
    params = list(params)
    sq = 0.0
    for p in params:
        sq += float((p.grad * p.grad).sum())
    norm = math.sqrt(sq)
    if norm > threshold:
        scale = threshold / norm
        for p in params:
            p.grad *= scale


def global_grad_norm(params: Iterable[Parameter]) -> float:
    return math.sqrt(sum(float((p.grad * p.grad).sum()) for p in params))


def grads_finite(params: Iterable[Parameter]) -> bool:
    return all(np.isfinite(p.grad).all() for p in params)
