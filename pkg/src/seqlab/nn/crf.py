"""Linear-chain CRF with virtual start/end states.

The transition matrix is [L+2, L+2]; index L is the virtual start
state, L+1 the virtual end. Transitions into start and out of end are
forbidden: the effective matrix holds a large negative constant there
(kept finite so every tensor stays finite), and their gradients are
pinned to zero.

The partition function runs entirely in log space (max-shifted
log-sum-exp); gradients for emissions and transitions come from the
forward-backward marginals and are exact.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError

FORBIDDEN_SCORE = -1e4


def start_index(n_labels: int) -> int:
    return n_labels


def end_index(n_labels: int) -> int:
    return n_labels + 1


def valid_transition_mask(n_labels: int) -> np.ndarray:
    """Boolean [L+2, L+2]: True where a transition may carry weight."""
    size = n_labels + 2
    start, end = n_labels, n_labels + 1
    mask = np.zeros((size, size), dtype=bool)
    mask[:n_labels, :n_labels] = True
    mask[start, :n_labels] = True
    mask[:n_labels, end] = True
    return mask


def effective_transitions(raw: np.ndarray) -> np.ndarray:
    """Apply the forbidden-entry penalty to a raw [L+2, L+2] matrix."""
    n_labels = raw.shape[0] - 2
    return np.where(valid_transition_mask(n_labels), raw, FORBIDDEN_SCORE)


def _logsumexp(v: np.ndarray, axis: int) -> np.ndarray:
    m = v.max(axis=axis, keepdims=True)
    return np.squeeze(m, axis=axis) + np.log(np.exp(v - m).sum(axis=axis))


def path_score(emissions: np.ndarray, transitions: np.ndarray, path: np.ndarray) -> float:
    """Score of one label path including start/end transitions."""
    t_len, n_labels = emissions.shape
    start, end = n_labels, n_labels + 1
    score = transitions[start, path[0]] + emissions[0, path[0]]
    for t in range(1, t_len):
        score += transitions[path[t - 1], path[t]] + emissions[t, path[t]]
    return float(score + transitions[path[t_len - 1], end])


def log_partition(emissions: np.ndarray, transitions: np.ndarray) -> tuple[float, np.ndarray]:
    """Forward algorithm; returns (logZ, alphas [T, L])."""
    t_len, n_labels = emissions.shape
    if t_len < 1:
        raise InvalidInputError("need at least one timestep")
    start, end = n_labels, n_labels + 1
    inner = transitions[:n_labels, :n_labels]
    alphas = np.empty((t_len, n_labels))
    alphas[0] = transitions[start, :n_labels] + emissions[0]
    for t in range(1, t_len):
        alphas[t] = _logsumexp(alphas[t - 1][:, None] + inner, axis=0) + emissions[t]
    log_z = float(_logsumexp(alphas[t_len - 1] + transitions[:n_labels, end], axis=0))
    return log_z, alphas


def crf_nll(
    emissions: np.ndarray, transitions: np.ndarray, gold: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Sentence NLL = logZ - score(gold); exact grads for both inputs.

    ``transitions`` is the effective [L+2, L+2] matrix. The returned
    transition gradient is zero on forbidden entries.
    """
    emissions = np.asarray(emissions, dtype=np.float64)
    gold = np.asarray(gold, dtype=np.int64)
    t_len, n_labels = emissions.shape
    if gold.shape != (t_len,):
        raise InvalidInputError(f"gold shape {gold.shape} does not match {t_len} timesteps")
    start, end = n_labels, n_labels + 1
    inner = transitions[:n_labels, :n_labels]

    log_z, alphas = log_partition(emissions, transitions)
    betas = np.empty((t_len, n_labels))
    betas[t_len - 1] = transitions[:n_labels, end]
    for t in range(t_len - 2, -1, -1):
        betas[t] = _logsumexp(inner + (emissions[t + 1] + betas[t + 1])[None, :], axis=1)

    marginals = np.exp(alphas + betas - log_z)  # [T, L]
    d_emissions = marginals.copy()
    d_emissions[np.arange(t_len), gold] -= 1.0

    d_trans = np.zeros_like(transitions)
    d_trans[start, :n_labels] = marginals[0]
    d_trans[start, gold[0]] -= 1.0
    d_trans[:n_labels, end] = np.exp(alphas[t_len - 1] + transitions[:n_labels, end] - log_z)
    d_trans[gold[t_len - 1], end] -= 1.0
    for t in range(1, t_len):
        pair = np.exp(
            alphas[t - 1][:, None] + inner + (emissions[t] + betas[t])[None, :] - log_z
        )
        d_trans[:n_labels, :n_labels] += pair
        d_trans[gold[t - 1], gold[t]] -= 1.0

    loss = log_z - path_score(emissions, transitions, gold)
    d_trans[~valid_transition_mask(n_labels)] = 0.0
    return float(loss), d_emissions, d_trans


def viterbi(emissions: np.ndarray, transitions: np.ndarray) -> list[int]:
    """Best path including start/end transitions; ties -> lower label id."""
    emissions = np.asarray(emissions, dtype=np.float64)
    t_len, n_labels = emissions.shape
    if t_len < 1:
        raise InvalidInputError("need at least one timestep")
    start, end = n_labels, n_labels + 1
    inner = transitions[:n_labels, :n_labels]
    delta = transitions[start, :n_labels] + emissions[0]
    back = np.empty((t_len, n_labels), dtype=np.int64)
    for t in range(1, t_len):
        scores = delta[:, None] + inner  # [from, to]
        back[t] = scores.argmax(axis=0)  # argmax picks the lowest index on ties
        delta = scores.max(axis=0) + emissions[t]
    final = delta + transitions[:n_labels, end]
    last = int(final.argmax())
    path = [last]
    for t in range(t_len - 1, 0, -1):
        last = int(back[t, last])
        path.append(last)
    path.reverse()
    return path


def crf_nll_batch(
    emissions: np.ndarray,
    transitions: np.ndarray,
    gold: np.ndarray,
    tmask: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean sentence NLL over a padded batch.

    ``emissions`` [B, T, L], ``gold`` [B, T], ``tmask`` [B, T] with
    trailing padding. Alphas carry their last real value across padded
    steps; betas are re-anchored at each sentence's final position, so
    padded entries never reach the marginals. Matches the per-sentence
    ``crf_nll`` summed and divided by B.
    """
    b_sz, t_len, n_labels = emissions.shape
    start, end = n_labels, n_labels + 1
    inner = transitions[:n_labels, :n_labels]
    lengths = tmask.sum(axis=1).astype(np.int64)
    if (lengths < 1).any():
        raise InvalidInputError("every sentence needs at least one token")

    trans_end = transitions[:n_labels, end]

    alphas = np.empty((b_sz, t_len, n_labels))
    alpha = transitions[start, :n_labels][None, :] + emissions[:, 0]
    alphas[:, 0] = alpha
    for t in range(1, t_len):
        cand = _logsumexp(alpha[:, :, None] + inner[None], axis=1) + emissions[:, t]
        alpha = np.where(tmask[:, t][:, None].astype(bool), cand, alpha)
        alphas[:, t] = alpha
    log_z = _logsumexp(alpha + trans_end[None, :], axis=1)  # [B]

    betas = np.empty((b_sz, t_len, n_labels))
    betas[:, t_len - 1] = trans_end[None, :]
    for t in range(t_len - 2, -1, -1):
        nxt = emissions[:, t + 1] + betas[:, t + 1]
        cand = _logsumexp(inner[None] + nxt[:, None, :], axis=2)
        here_last = lengths - 1 == t
        betas[:, t] = np.where(here_last[:, None], trans_end[None, :], cand)

    mask_f = tmask.astype(np.float64)
    marginals = np.exp(alphas + betas - log_z[:, None, None]) * mask_f[:, :, None]

    d_emissions = marginals.copy()
    rows = np.arange(b_sz)
    for t in range(t_len):
        d_emissions[rows, t, gold[:, t]] -= mask_f[:, t]
    d_emissions /= b_sz

    d_trans = np.zeros_like(transitions)
    # start edges
    d_trans[start, :n_labels] += marginals[:, 0].sum(axis=0)
    np.add.at(d_trans[start], gold[:, 0], -1.0)
    # end edges
    last_alpha = alphas[rows, lengths - 1]
    end_marg = np.exp(last_alpha + trans_end[None, :] - log_z[:, None])
    d_trans[:n_labels, end] += end_marg.sum(axis=0)
    np.add.at(d_trans[:, end], gold[rows, lengths - 1], -1.0)
    # inner edges
    for t in range(1, t_len):
        live = tmask[:, t].astype(bool)
        if not live.any():
            break
        nxt = emissions[live, t] + betas[live, t]
        pair = np.exp(
            alphas[live, t - 1][:, :, None]
            + inner[None]
            + nxt[:, None, :]
            - log_z[live][:, None, None]
        )
        d_trans[:n_labels, :n_labels] += pair.sum(axis=0)
        np.add.at(d_trans, (gold[live, t - 1], gold[live, t]), -1.0)
    d_trans[~valid_transition_mask(n_labels)] = 0.0
    d_trans /= b_sz

    # gold path scores
    scores = transitions[start, gold[:, 0]] + emissions[rows, 0, gold[:, 0]]
    for t in range(1, t_len):
        step = transitions[gold[:, t - 1], gold[:, t]] + emissions[rows, t, gold[:, t]]
        scores = scores + step * mask_f[:, t]
    scores = scores + transitions[gold[rows, lengths - 1], end]
    loss = float((log_z - scores).mean())
    return loss, d_emissions, d_trans
