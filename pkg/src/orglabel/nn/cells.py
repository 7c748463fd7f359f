"""Recurrent cell math: Elman RNN, GRU, and LSTM steps with exact backward.

Weights per cell are stacked gate blocks: ``w_x`` (input_dim, G*hidden),
``w_h`` (hidden, G*hidden), ``b`` (G*hidden,) where G is the gate count
(rnn 1; gru 3 ordered r, z, n; lstm 4 ordered i, f, g, o). Steps operate on
(batch, dim) arrays in float64. The GRU candidate mixes the reset-gated
state: n = tanh(x W_xn + (r * h) W_hn + b_n), h' = (1 - z) * n + z * h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GATE_COUNTS = {"rnn": 1, "gru": 3, "lstm": 4}


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class CellParams:
    kind: str
    input_dim: int
    hidden_dim: int
    w_x: np.ndarray
    w_h: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.kind not in GATE_COUNTS:
            raise ValueError(f"unknown cell kind {self.kind!r}")
        g = GATE_COUNTS[self.kind]
        d, h = self.input_dim, self.hidden_dim
        if self.w_x.shape != (d, g * h):
            raise ValueError(f"w_x shape {self.w_x.shape} != {(d, g * h)}")
        if self.w_h.shape != (h, g * h):
            raise ValueError(f"w_h shape {self.w_h.shape} != {(h, g * h)}")
        if self.b.shape != (g * h,):
            raise ValueError(f"b shape {self.b.shape} != {(g * h,)}")
        for arr in (self.w_x, self.w_h, self.b):
            if not np.all(np.isfinite(arr)):
                raise ValueError("cell parameters contain non-finite entries")

    def zero_state(self, batch: int):
        h = np.zeros((batch, self.hidden_dim), dtype=np.float64)
        if self.kind == "lstm":
            return h, np.zeros_like(h)
        return (h,)

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {
            "w_x": np.zeros_like(self.w_x),
            "w_h": np.zeros_like(self.w_h),
            "b": np.zeros_like(self.b),
        }


def glorot_uniform(rng, fan_in, fan_out, shape):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape)


def init_cell(kind: str, input_dim: int, hidden_dim: int, rng) -> CellParams:
    """Glorot-uniform gate blocks, zero biases; LSTM forget bias starts at 1."""
    g = GATE_COUNTS[kind]
    d, h = input_dim, hidden_dim
    w_x = np.concatenate(
        [glorot_uniform(rng, d, h, (d, h)) for _ in range(g)], axis=1
    )
    w_h = np.concatenate(
        [glorot_uniform(rng, h, h, (h, h)) for _ in range(g)], axis=1
    )
    b = np.zeros(g * h, dtype=np.float64)
    if kind == "lstm":
        b[h : 2 * h] = 1.0
    return CellParams(kind=kind, input_dim=d, hidden_dim=h, w_x=w_x, w_h=w_h, b=b)


def step_forward(cell: CellParams, x, state):
    """One unmasked step. Returns (new_state, cache).

    ``state`` and the returned state are tuples: (h,) for rnn/gru and (h, c)
    for lstm. The caller owns any length masking.
    """
    h = cell.hidden_dim
    if cell.kind == "rnn":
        h_prev, = state
        a = x @ cell.w_x + h_prev @ cell.w_h + cell.b
        h_new = np.tanh(a)
        return (h_new,), (x, h_prev, h_new)

    if cell.kind == "lstm":
        h_prev, c_prev = state
        z = x @ cell.w_x + h_prev @ cell.w_h + cell.b
        i = _sigmoid(z[:, :h])
        f = _sigmoid(z[:, h : 2 * h])
        g = np.tanh(z[:, 2 * h : 3 * h])
        o = _sigmoid(z[:, 3 * h :])
        c_new = f * c_prev + i * g
        tanh_c = np.tanh(c_new)
        h_new = o * tanh_c
        return (h_new, c_new), (x, h_prev, c_prev, i, f, g, o, tanh_c)

    # gru
    h_prev, = state
    x_proj = x @ cell.w_x + cell.b
    rz = _sigmoid(x_proj[:, : 2 * h] + h_prev @ cell.w_h[:, : 2 * h])
    r, zg = rz[:, :h], rz[:, h:]
    rh = r * h_prev
    n = np.tanh(x_proj[:, 2 * h :] + rh @ cell.w_h[:, 2 * h :])
    h_new = (1.0 - zg) * n + zg * h_prev
    return (h_new,), (x, h_prev, r, zg, n, rh)


def step_backward(cell: CellParams, cache, d_state, grads):
    """Backward through one step given gradients of the unmasked new state.

    Accumulates parameter gradients into ``grads`` (keys w_x, w_h, b) and
    returns (d_x, d_prev_state).
    """
    h = cell.hidden_dim
    if cell.kind == "rnn":
        x, h_prev, h_new = cache
        dh_new, = d_state
        da = dh_new * (1.0 - h_new * h_new)
        grads["w_x"] += x.T @ da
        grads["w_h"] += h_prev.T @ da
        grads["b"] += da.sum(axis=0)
        dx = da @ cell.w_x.T
        dh_prev = da @ cell.w_h.T
        return dx, (dh_prev,)

    if cell.kind == "lstm":
        x, h_prev, c_prev, i, f, g, o, tanh_c = cache
        dh_new, dc_new = d_state
        do = dh_new * tanh_c
        dc = dc_new + dh_new * o * (1.0 - tanh_c * tanh_c)
        di = dc * g
        df = dc * c_prev
        dg = dc * i
        dc_prev = dc * f
        dz = np.concatenate(
            [
                di * i * (1.0 - i),
                df * f * (1.0 - f),
                dg * (1.0 - g * g),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        grads["w_x"] += x.T @ dz
        grads["w_h"] += h_prev.T @ dz
        grads["b"] += dz.sum(axis=0)
        dx = dz @ cell.w_x.T
        dh_prev = dz @ cell.w_h.T
        return dx, (dh_prev, dc_prev)

    # gru
    x, h_prev, r, zg, n, rh = cache
    dh_new, = d_state
    dn = dh_new * (1.0 - zg)
    dzg = dh_new * (h_prev - n)
    dh_prev = dh_new * zg

    dan = dn * (1.0 - n * n)
    drh = dan @ cell.w_h[:, 2 * h :].T
    dr = drh * h_prev
    dh_prev = dh_prev + drh * r

    daz = dzg * zg * (1.0 - zg)
    dar = dr * r * (1.0 - r)
    dh_prev = dh_prev + daz @ cell.w_h[:, h : 2 * h].T + dar @ cell.w_h[:, :h].T

    da = np.concatenate([dar, daz, dan], axis=1)
    grads["w_x"] += x.T @ da
    grads["b"] += da.sum(axis=0)
    grads["w_h"][:, :h] += h_prev.T @ dar
    grads["w_h"][:, h : 2 * h] += h_prev.T @ daz
    grads["w_h"][:, 2 * h :] += rh.T @ dan
    dx = da @ cell.w_x.T
    return dx, (dh_prev,)


def cell_step(kind: str, params: CellParams, x, state):
    """Single-vector convenience step: x (d,), state of (h,)-shaped arrays."""
    if params.kind != kind:
        raise ValueError(f"params are for {params.kind!r}, not {kind!r}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.input_dim,):
        raise ValueError(f"x shape {x.shape} != ({params.input_dim},)")
    expected = 2 if kind == "lstm" else 1
    if len(state) != expected:
        raise ValueError(f"{kind} state must have {expected} arrays")
    batched = []
    for arr in state:
        arr = np.asarray(arr, dtype=np.float64)
        if arr.shape != (params.hidden_dim,):
            raise ValueError(f"state shape {arr.shape} != ({params.hidden_dim},)")
        batched.append(arr.reshape(1, -1))
    new_state, _ = step_forward(params, x.reshape(1, -1), tuple(batched))
    return tuple(arr[0] for arr in new_state)
