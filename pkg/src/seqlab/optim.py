"""The six first-order optimizers evaluated by the lab.

Each optimizer binds to one list of parameters and keeps per-parameter
slot tensors. Defaults are the values recommended by each method's
original description; the learning rate is overridable through the
network configuration. Updates consume no randomness: trajectories are
deterministic functions of (state, gradients).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError, InvalidInputError
from .nn.params import Parameter

OPTIMIZER_KINDS = ("sgd", "adagrad", "adadelta", "rmsprop", "adam", "nadam")

DEFAULT_LEARNING_RATES = {
    "sgd": 0.1,
    "adagrad": 0.01,
    "adadelta": 1.0,
    "rmsprop": 0.001,
    "adam": 0.001,
    "nadam": 0.002,
}


class Optimizer:
    kind = "base"

    def __init__(self, params: list[Parameter], lr: float):
        if lr <= 0:
            raise InvalidInputError("learning rate must be positive")
        self.params = params
        self.lr = lr
        self.t = 0

    def _slots(self) -> list[np.ndarray]:
        return [np.zeros_like(p.value) for p in self.params]

    def step(self) -> None:
        self.t += 1
        self._apply()

    def _apply(self) -> None:
        raise NotImplementedError

    def reset(self) -> None:
        self.t = 0
        for slot_list in self._slot_lists():
            for s in slot_list:
                s.fill(0.0)

    def _slot_lists(self) -> list[list[np.ndarray]]:
        return []


class Sgd(Optimizer):
    kind = "sgd"

    def _apply(self) -> None:
        for p in self.params:
            p.value -= self.lr * p.grad


class Adagrad(Optimizer):
    kind = "adagrad"

    def __init__(self, params, lr, eps: float = 1e-8):
        super().__init__(params, lr)
        self.eps = eps
        self.acc = self._slots()

    def _slot_lists(self):
        return [self.acc]

    def _apply(self) -> None:
        for p, acc in zip(self.params, self.acc):
            acc += p.grad * p.grad
            p.value -= self.lr * p.grad / (np.sqrt(acc) + self.eps)


class Adadelta(Optimizer):
    kind = "adadelta"

    def __init__(self, params, lr, rho: float = 0.95, eps: float = 1e-6):
        super().__init__(params, lr)
        if not 0.0 < rho < 1.0:
            raise InvalidInputError("rho must be in (0, 1)")
        self.rho = rho
        self.eps = eps
        self.acc_grad = self._slots()
        self.acc_update = self._slots()

    def _slot_lists(self):
        return [self.acc_grad, self.acc_update]

    def _apply(self) -> None:
        rho, eps = self.rho, self.eps
        for p, ag, au in zip(self.params, self.acc_grad, self.acc_update):
            ag *= rho
            ag += (1.0 - rho) * p.grad * p.grad
            update = np.sqrt(au + eps) / np.sqrt(ag + eps) * p.grad
            au *= rho
            au += (1.0 - rho) * update * update
            p.value -= self.lr * update


class RmsProp(Optimizer):
    kind = "rmsprop"

    def __init__(self, params, lr, rho: float = 0.9, eps: float = 1e-8):
        super().__init__(params, lr)
        if not 0.0 < rho < 1.0:
            raise InvalidInputError("rho must be in (0, 1)")
        self.rho = rho
        self.eps = eps
        self.acc = self._slots()

    def _slot_lists(self):
        return [self.acc]

    def _apply(self) -> None:
        for p, acc in zip(self.params, self.acc):
            acc *= self.rho
            acc += (1.0 - self.rho) * p.grad * p.grad
            p.value -= self.lr * p.grad / (np.sqrt(acc) + self.eps)


class Adam(Optimizer):
    kind = "adam"

    def __init__(self, params, lr, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8, nesterov: bool = False):
        super().__init__(params, lr)
        if not (0.0 < beta1 < 1.0 and 0.0 < beta2 < 1.0):
            raise InvalidInputError("betas must be in (0, 1)")
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.nesterov = nesterov
        self.m = self._slots()
        self.v = self._slots()

    def _slot_lists(self):
        return [self.m, self.v]

    def _apply(self) -> None:
        b1, b2, t = self.beta1, self.beta2, self.t
        bc1 = 1.0 - b1**t
        bc2 = 1.0 - b2**t
        for p, m, v in zip(self.params, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * p.grad
            v *= b2
            v += (1.0 - b2) * p.grad * p.grad
            m_hat = m / bc1
            v_hat = v / bc2
            if self.nesterov:
                # look-ahead first moment: blend current gradient in
                m_hat = b1 * m_hat + (1.0 - b1) * p.grad / bc1
            p.value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class Nadam(Adam):
    kind = "nadam"

    def __init__(self, params, lr, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8, nesterov: bool = True):
        super().__init__(params, lr, beta1, beta2, eps, nesterov=nesterov)


_CLASSES = {
    "sgd": Sgd,
    "adagrad": Adagrad,
    "adadelta": Adadelta,
    "rmsprop": RmsProp,
    "adam": Adam,
    "nadam": Nadam,
}


def build_optimizer(kind: str, params: list[Parameter], lr: float | None = None) -> Optimizer:
    if kind not in _CLASSES:
        raise ConfigurationError(f"unknown optimizer {kind!r}; pick one of {OPTIMIZER_KINDS}")
    if lr is None:
        lr = DEFAULT_LEARNING_RATES[kind]
    return _CLASSES[kind](params, lr)
