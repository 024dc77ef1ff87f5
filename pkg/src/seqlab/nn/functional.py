"""Elementwise nonlinearities and the softmax cross-entropy head."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError


def sigmoid(x: np.ndarray) -> np.ndarray:
    # Branch on sign to stay overflow-free in both tails.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise log softmax over the last axis, max-shifted."""
    m = logits.max(axis=-1, keepdims=True)
    z = logits - m
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax_nll(logits: np.ndarray, gold: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean per-token NLL of the gold labels plus gradient wrt logits.

    ``logits`` is [T, L]; gradient is (softmax - onehot) / T.
    """
    logits = np.asarray(logits, dtype=np.float64)
    gold = np.asarray(gold, dtype=np.int64)
    t, n_labels = logits.shape
    if gold.shape != (t,):
        raise InvalidInputError(f"gold shape {gold.shape} does not match {t} tokens")
    if gold.min(initial=0) < 0 or gold.max(initial=-1) >= n_labels:
        raise InvalidInputError("gold label id outside [0, L)")
    logp = log_softmax(logits)
    loss = -float(logp[np.arange(t), gold].mean())
    grad = np.exp(logp)
    grad[np.arange(t), gold] -= 1.0
    grad /= t
    return loss, grad


def softmax_nll_batch(
    logits: np.ndarray, gold: np.ndarray, tmask: np.ndarray
) -> tuple[float, np.ndarray]:
    """Batched masked head loss: mean over sentences of per-token means.

    ``logits`` is [B, T, L]; padded positions (tmask 0) contribute
    nothing to loss or gradient.
    """
    b = logits.shape[0]
    lengths = tmask.sum(axis=1)
    logp = log_softmax(logits)
    tok_nll = -np.take_along_axis(logp, gold[:, :, None], axis=2)[:, :, 0] * tmask
    loss = float((tok_nll.sum(axis=1) / lengths).mean())
    grad = np.exp(logp)
    np.put_along_axis(
        grad,
        gold[:, :, None],
        np.take_along_axis(grad, gold[:, :, None], axis=2) - 1.0,
        axis=2,
    )
    grad *= (tmask / lengths[:, None])[:, :, None] / b
    return loss, grad
