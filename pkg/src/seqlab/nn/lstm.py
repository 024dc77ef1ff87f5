"""Forget-gate LSTM (no peepholes) and stacked bidirectional layers.

Layout is batch-first: sequences [B, T, D] with a 0/1 token mask
[B, T]; padding is trailing. Cell and hidden state are forced to zero
at padded steps, which both keeps pad garbage out of real outputs and
gives the reversed direction a correct zero initial state when it scans
leading pads.

Gate preactivations are a single [*, 4H] block in i|f|g|o order; the
forget-gate bias block is initialized to 1.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from ..rng import Rng
from .dropout import LayerMasks, dropout_masks
from .functional import sigmoid
from .params import Parameter, glorot_init


def lstm_step(
    w: np.ndarray,
    u: np.ndarray,
    b: np.ndarray,
    x_t: np.ndarray,
    h_prev: np.ndarray,
    c_prev: np.ndarray,
    recurrent_mask: np.ndarray | None = None,
    pad_mask: np.ndarray | None = None,
):
    """One LSTM step; returns (h, c, cache) with everything backward needs.

    ``recurrent_mask`` is the variational dropout mask on h_prev;
    ``pad_mask`` zeroes the cell at padded positions (h follows through
    tanh, so both states stay zero across padding).
    """
    if x_t.shape[-1] != w.shape[0] or h_prev.shape[-1] != u.shape[0]:
        raise InvalidInputError(
            f"dimension mismatch: x {x_t.shape}, w {w.shape}, h {h_prev.shape}, u {u.shape}"
        )
    units = u.shape[0]
    h_in = h_prev * recurrent_mask if recurrent_mask is not None else h_prev
    a = x_t @ w + h_in @ u + b
    i = sigmoid(a[..., :units])
    f = sigmoid(a[..., units : 2 * units])
    g = np.tanh(a[..., 2 * units : 3 * units])
    o = sigmoid(a[..., 3 * units :])
    c = f * c_prev + i * g
    if pad_mask is not None:
        c = c * pad_mask
    tc = np.tanh(c)
    h = o * tc
    return h, c, (h_in, c_prev, i, f, g, o, tc)


class LstmDirection:
    """One direction of one layer: owns W [D,4H], U [H,4H], b [4H]."""

    def __init__(self, name: str, input_dim: int, units: int, rng: Rng):
        self.units = units
        self.w = Parameter(f"{name}.w", glorot_init((input_dim, 4 * units), rng))
        self.u = Parameter(f"{name}.u", glorot_init((units, 4 * units), rng))
        bias = np.zeros(4 * units)
        bias[units : 2 * units] = 1.0
        self.b = Parameter(f"{name}.b", bias)

    def params(self) -> list[Parameter]:
        return [self.w, self.u, self.b]

    def forward(
        self,
        x: np.ndarray,
        tmask: np.ndarray,
        reverse: bool,
        masks: LayerMasks,
    ):
        """Run the direction over [B, T, D]; returns ([B, T, H], cache)."""
        b_sz, t_len, _ = x.shape
        if t_len == 0:
            raise InvalidInputError("empty sequence (T=0)")
        x_eff = x * masks.input[:, None, :] if masks.input is not None else x
        h = np.zeros((b_sz, self.units))
        c = np.zeros((b_sz, self.units))
        hs = np.empty((b_sz, t_len, self.units))
        caches: list[tuple] = [()] * t_len
        times = range(t_len - 1, -1, -1) if reverse else range(t_len)
        for t in times:
            m = tmask[:, t][:, None]
            h, c, cache = lstm_step(
                self.w.value,
                self.u.value,
                self.b.value,
                x_eff[:, t],
                h,
                c,
                recurrent_mask=masks.recurrent,
                pad_mask=m,
            )
            caches[t] = cache + (m,)
            hs[:, t] = h
        return hs, (x_eff, caches, times, masks)

    def backward(self, d_hs: np.ndarray, cache) -> np.ndarray:
        """Accumulate parameter grads; return grad wrt the layer input."""
        x_eff, caches, times, masks = cache
        b_sz, t_len, _ = x_eff.shape
        units = self.units
        dx = np.zeros_like(x_eff)
        dh_next = np.zeros((b_sz, units))
        dc_next = np.zeros((b_sz, units))
        dw, du, db = self.w.grad, self.u.grad, self.b.grad
        for t in reversed(list(times)):
            h_in, c_prev, i, f, g, o, tc, m = caches[t]
            dh = d_hs[:, t] + dh_next
            do = dh * tc
            dc = dc_next + dh * o * (1.0 - tc * tc)
            dc_raw = dc * m
            df = dc_raw * c_prev
            di = dc_raw * g
            dg = dc_raw * i
            dc_next = dc_raw * f
            da = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    dg * (1.0 - g * g),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            dw += x_eff[:, t].T @ da
            du += h_in.T @ da
            db += da.sum(axis=0)
            dx[:, t] = da @ self.w.value.T
            dh_next = da @ self.u.value.T
            if masks.recurrent is not None:
                dh_next = dh_next * masks.recurrent
        if masks.input is not None:
            dx *= masks.input[:, None, :]
        return dx


class BiLstmStack:
    """1-3 stacked bidirectional layers with per-layer dropout."""

    def __init__(self, name: str, input_dim: int, units_per_layer: tuple[int, ...], rng: Rng):
        if not 1 <= len(units_per_layer) <= 3:
            raise InvalidInputError("stack depth must be 1-3 layers")
        if any(u < 1 for u in units_per_layer):
            raise InvalidInputError("unit counts must be positive")
        self.layers: list[tuple[LstmDirection, LstmDirection]] = []
        dim = input_dim
        for idx, units in enumerate(units_per_layer):
            fwd = LstmDirection(f"{name}.l{idx}.fwd", dim, units, rng)
            bwd = LstmDirection(f"{name}.l{idx}.bwd", dim, units, rng)
            self.layers.append((fwd, bwd))
            dim = 2 * units
        self.output_dim = dim

    def params(self) -> list[Parameter]:
        out = []
        for fwd, bwd in self.layers:
            out.extend(fwd.params())
            out.extend(bwd.params())
        return out

    def forward(
        self,
        x: np.ndarray,
        tmask: np.ndarray,
        train: bool,
        dropout_kind: str = "none",
        dropout_rate: float = 0.0,
        rng: Rng | None = None,
    ):
        """Stack forward; returns ([B, T, 2*units_top], cache)."""
        if x.shape[1] == 0:
            raise InvalidInputError("empty sequence (T=0)")
        b_sz, t_len = x.shape[0], x.shape[1]
        mode = dropout_kind if train else "none"
        if mode != "none" and rng is None:
            raise InvalidInputError("training dropout requires an rng")
        layer_caches = []
        cur = x
        for fwd, bwd in self.layers:
            in_dim, units = fwd.w.value.shape[0], fwd.units
            shapes = {
                "input": (b_sz, in_dim),
                "recurrent": (b_sz, units),
                "output": (b_sz, t_len, 2 * units),
            }
            m_f = dropout_masks(mode, dropout_rate, shapes, rng) if mode != "none" else LayerMasks()
            m_b = (
                dropout_masks("variational", dropout_rate, shapes, rng)
                if mode == "variational"
                else LayerMasks()
            )
            h_f, cache_f = fwd.forward(cur, tmask, reverse=False, masks=m_f)
            h_b, cache_b = bwd.forward(cur, tmask, reverse=True, masks=m_b)
            out = np.concatenate([h_f, h_b], axis=2)
            out_mask = m_f.output  # naive mode only
            if out_mask is not None:
                out = out * out_mask
            layer_caches.append((fwd, bwd, cache_f, cache_b, out_mask))
            cur = out
        return cur, layer_caches

    def backward(self, d_out: np.ndarray, layer_caches) -> np.ndarray:
        for fwd, bwd, cache_f, cache_b, out_mask in reversed(layer_caches):
            if out_mask is not None:
                d_out = d_out * out_mask
            units = fwd.units
            dx_f = fwd.backward(d_out[:, :, :units], cache_f)
            dx_b = bwd.backward(d_out[:, :, units:], cache_b)
            d_out = dx_f + dx_b
        return d_out
