"""Character-level word encoders.

Two shapes of evidence: a width-3 convolution with max-pooling (sees
character trigrams, position-independent by construction) and a single
bidirectional LSTM over the characters (sees the whole word, position
aware). Both map a batch of words, padded to a common character count,
to fixed-size vectors.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..rng import Rng
from .embed import Embedding
from .lstm import LstmDirection
from .dropout import LayerMasks
from .params import Parameter, glorot_init

_POOL_NEG = -1e30  # blocks padded positions from winning the max-pool


class CharCnnEncoder:
    """Char trigram convolution + max over positions."""

    def __init__(self, name: str, n_chars: int, pad_id: int, rng: Rng,
                 char_dim: int = 30, filters: int = 30):
        self.pad_id = pad_id
        self.emb = Embedding(f"{name}.emb", glorot_init((n_chars, char_dim), rng))
        self.filt = Parameter(f"{name}.filt", glorot_init((3, char_dim, filters), rng))
        self.bias = Parameter(f"{name}.bias", np.zeros(filters))
        self.output_dim = filters

    def params(self):
        return [self.emb.weight, self.filt, self.bias]

    def forward(self, char_ids: np.ndarray, char_mask: np.ndarray):
        """char_ids [W, C] (short words padded with pad_id); returns ([W, F], cache)."""
        if char_ids.shape[1] < 1:
            raise InvalidInputError("words must have at least one character")
        w_cnt, c_len = char_ids.shape
        padded = np.full((w_cnt, c_len + 2), self.pad_id, dtype=np.int64)
        padded[:, 1:-1] = char_ids
        emb = self.emb.forward(padded)  # [W, C+2, dc]
        pre = np.zeros((w_cnt, c_len, self.output_dim))
        for k in range(3):
            pre += emb[:, k : k + c_len, :] @ self.filt.value[k]
        pre += self.bias.value
        act = np.tanh(pre)
        blocked = np.where(char_mask[:, :, None].astype(bool), act, _POOL_NEG)
        winners = blocked.argmax(axis=1)  # [W, F]
        vec = np.take_along_axis(blocked, winners[:, None, :], axis=1)[:, 0, :]
        return vec, (padded, emb, act, winners, c_len)

    def backward(self, d_vec: np.ndarray, cache) -> None:
        padded, emb, act, winners, c_len = cache
        d_act = np.zeros_like(act)
        np.put_along_axis(d_act, winners[:, None, :], d_vec[:, None, :], axis=1)
        d_pre = d_act * (1.0 - act * act)
        self.bias.grad += d_pre.sum(axis=(0, 1))
        d_emb = np.zeros_like(emb)
        dc, filters = self.filt.value.shape[1], self.filt.value.shape[2]
        flat_pre = d_pre.reshape(-1, filters)
        for k in range(3):
            window = emb[:, k : k + c_len, :].reshape(-1, dc)
            self.filt.grad[k] += window.T @ flat_pre
            d_emb[:, k : k + c_len, :] += d_pre @ self.filt.value[k].T
        self.emb.backward(padded, d_emb)


class CharLstmEncoder:
    """BiLSTM over characters; final forward and backward states."""

    def __init__(self, name: str, n_chars: int, rng: Rng, char_dim: int = 30, units: int = 25):
        self.emb = Embedding(f"{name}.emb", glorot_init((n_chars, char_dim), rng))
        self.fwd = LstmDirection(f"{name}.fwd", char_dim, units, rng)
        self.bwd = LstmDirection(f"{name}.bwd", char_dim, units, rng)
        self.units = units
        self.output_dim = 2 * units

    def params(self):
        return [self.emb.weight] + self.fwd.params() + self.bwd.params()

    def forward(self, char_ids: np.ndarray, char_mask: np.ndarray):
        if char_ids.shape[1] < 1:
            raise InvalidInputError("words must have at least one character")
        lengths = char_mask.sum(axis=1).astype(np.int64)
        if (lengths < 1).any():
            raise InvalidInputError("every word needs at least one character")
        emb = self.emb.forward(char_ids)
        no_drop = LayerMasks()
        h_f, cache_f = self.fwd.forward(emb, char_mask, reverse=False, masks=no_drop)
        h_b, cache_b = self.bwd.forward(emb, char_mask, reverse=True, masks=no_drop)
        rows = np.arange(char_ids.shape[0])
        vec = np.concatenate([h_f[rows, lengths - 1], h_b[:, 0]], axis=1)
        return vec, (char_ids, char_mask, cache_f, cache_b, lengths, h_f.shape)

    def backward(self, d_vec: np.ndarray, cache) -> None:
        char_ids, char_mask, cache_f, cache_b, lengths, h_shape = cache
        rows = np.arange(char_ids.shape[0])
        d_hf = np.zeros(h_shape)
        d_hb = np.zeros(h_shape)
        d_hf[rows, lengths - 1] = d_vec[:, : self.units]
        d_hb[:, 0] = d_vec[:, self.units :]
        d_emb = self.fwd.backward(d_hf, cache_f) + self.bwd.backward(d_hb, cache_b)
        self.emb.backward(char_ids, d_emb, mask=char_mask)
