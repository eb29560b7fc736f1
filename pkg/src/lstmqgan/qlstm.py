"""Quantum LSTM: classical LSTM gating with variational circuits as gate transforms.

Each cell projects ``concat(h, x)`` to one encoder angle per qubit
(``pi * tanh(W v + b)``), runs four copies of the hardware-efficient ansatz
(forget, input, update, output) on those angles, and reads out either the
``2**n`` outcome probabilities (scaled by ``2**n``) or the ``n`` Pauli-Z
expectations.

All arrays carry a leading batch dimension ``B``. Gradients flow through the
circuits with the parameter-shift rule; the Jacobians are computed lazily on
the first backward call and memoized on the cache, so repeated backward
passes through the same step only cost matrix products.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
from scipy.special import expit

from ._params import ArrayParams, uniform_fan_in
from .ansatz import AnsatzSpec, build_hw_efficient, default_entangler
from .qsim import encoded_probabilities, z_signs

GATES = ("forget", "input", "update", "output")


class HiddenMode(str, Enum):
    PROBABILITIES = "probabilities"
    PAULI_Z = "pauliz"


@dataclass(frozen=True)
class QlstmConfig:
    n_qubits: int
    reps: int = 2
    hidden_mode: HiddenMode = HiddenMode.PROBABILITIES
    input_dim: int = 1
    layers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "hidden_mode", HiddenMode(self.hidden_mode))
        if min(self.n_qubits, self.reps, self.input_dim, self.layers) < 1:
            raise ValueError(f"all QLSTM dimensions must be >= 1: {self}")

    @property
    def hidden_dim(self):
        return hidden_dim(self.n_qubits, self.hidden_mode)

    def layer_input_dims(self):
        return [self.input_dim] + [self.hidden_dim] * (self.layers - 1)


def hidden_dim(n_qubits, mode):
    return 2**n_qubits if HiddenMode(mode) is HiddenMode.PROBABILITIES else n_qubits


@dataclass
class QlstmCellParams(ArrayParams):
    proj_weights: np.ndarray  # (n_qubits, hidden_dim + input_dim)
    proj_bias: np.ndarray  # (n_qubits,)
    vqc_params: np.ndarray  # (4, 3 * n_qubits * reps), rows in GATES order

    @property
    def n_qubits(self):
        return self.proj_bias.shape[0]

    @property
    def reps(self):
        return self.vqc_params.shape[1] // (3 * self.n_qubits)


def init_cell_params(rng, n_qubits, reps, input_dim, hidden):
    fan_in = hidden + input_dim
    return QlstmCellParams(
        proj_weights=uniform_fan_in(rng, (n_qubits, fan_in), fan_in),
        proj_bias=uniform_fan_in(rng, (n_qubits,), fan_in),
        vqc_params=rng.uniform(0.0, np.pi, size=(4, 3 * n_qubits * reps)),
    )


def init_stack(config: QlstmConfig, rng) -> List[QlstmCellParams]:
    return [
        init_cell_params(rng, config.n_qubits, config.reps, d_in, config.hidden_dim)
        for d_in in config.layer_input_dims()
    ]


@dataclass
class QlstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, batch, dim):
        return cls(np.zeros((batch, dim)), np.zeros((batch, dim)))


@dataclass
class CellCache:
    params: QlstmCellParams
    snapshot: np.ndarray
    mode: HiddenMode
    v: np.ndarray
    pre: np.ndarray
    angles: np.ndarray
    acts: np.ndarray  # (4, B, hidden): f, i, u, o after nonlinearity
    c_prev: np.ndarray
    tanh_c: np.ndarray
    _jac_params: Optional[np.ndarray] = field(default=None, repr=False)
    _jac_inputs: Optional[np.ndarray] = field(default=None, repr=False)

    def jacobians(self):
        if self._jac_params is None:
            _, self._jac_params, self._jac_inputs = encoded_probabilities(
                _circuit(self.params), self.params.vqc_params, self.angles, jacobians=True
            )
        return self._jac_params, self._jac_inputs


_CIRCUITS = {}


def _circuit(params):
    key = (params.n_qubits, params.reps)
    if key not in _CIRCUITS:
        _CIRCUITS[key] = build_hw_efficient(AnsatzSpec(*key, entangler=default_entangler(key[0])))
    return _CIRCUITS[key]


def _readout(probs, n, mode):
    if mode is HiddenMode.PROBABILITIES:
        return probs * 2.0**n
    return probs @ z_signs(n)


def cell_forward(params: QlstmCellParams, x_t, state: QlstmState, mode=HiddenMode.PROBABILITIES):
    """One QLSTM step for a batch. Returns ``(new_state, cache)``."""
    mode = HiddenMode(mode)
    n = params.n_qubits
    hdim = hidden_dim(n, mode)
    x_t = np.atleast_2d(np.asarray(x_t, dtype=np.float64))
    h, c = np.atleast_2d(state.h), np.atleast_2d(state.c)
    if h.shape[-1] != hdim or c.shape != h.shape:
        raise ValueError(f"state must have hidden_dim {hdim}, got h{h.shape} c{c.shape}")
    if h.shape[0] != x_t.shape[0]:
        raise ValueError("state and input batch sizes differ")
    if params.proj_weights.shape != (n, hdim + x_t.shape[-1]):
        raise ValueError(
            f"proj_weights {params.proj_weights.shape} does not fit hidden {hdim} + input {x_t.shape[-1]}"
        )
    if not (np.all(np.isfinite(x_t)) and np.all(np.isfinite(h)) and np.all(np.isfinite(c))):
        raise ValueError("non-finite input to QLSTM cell")

    v = np.concatenate([h, x_t], axis=-1)
    pre = v @ params.proj_weights.T + params.proj_bias
    angles = np.pi * np.tanh(pre)
    probs = encoded_probabilities(_circuit(params), params.vqc_params, angles)
    m = _readout(probs, n, mode)  # (4, B, hidden)
    f = expit(m[0])
    i = expit(m[1])
    u = np.tanh(m[2])
    o = expit(m[3])
    c_new = f * c + i * u
    tanh_c = np.tanh(c_new)
    h_new = o * tanh_c
    cache = CellCache(
        params=params,
        snapshot=params.flat(),
        mode=mode,
        v=v,
        pre=pre,
        angles=angles,
        acts=np.stack([f, i, u, o]),
        c_prev=c,
        tanh_c=tanh_c,
    )
    return QlstmState(h_new, c_new), cache


def cell_backward(cache: CellCache, dh, dc):
    """Reverse-mode step. Returns ``(dparams, dx_t, QlstmState(dh_prev, dc_prev))``.

    Parameter gradients are summed over the batch.
    """
    params = cache.params
    if not np.array_equal(params.flat(), cache.snapshot):
        raise ValueError("stale cache: parameters changed since the forward pass")
    f, i, u, o = cache.acts
    dh = np.broadcast_to(np.asarray(dh, dtype=np.float64), f.shape)
    dc = np.broadcast_to(np.asarray(dc, dtype=np.float64), f.shape)
    n = params.n_qubits
    hdim = f.shape[-1]

    if not (np.any(dh) or np.any(dc)):
        dx = np.zeros((f.shape[0], cache.v.shape[-1] - hdim))
        return params.zeros_like(), dx, QlstmState(np.zeros_like(f), np.zeros_like(f))

    dc_total = dc + dh * o * (1.0 - cache.tanh_c**2)
    dm = np.stack([
        dc_total * cache.c_prev * f * (1.0 - f),
        dc_total * u * i * (1.0 - i),
        dc_total * i * (1.0 - u**2),
        dh * cache.tanh_c * o * (1.0 - o),
    ])
    if cache.mode is HiddenMode.PROBABILITIES:
        dprobs = dm * 2.0**n
    else:
        dprobs = dm @ z_signs(n).T

    jac_p, jac_a = cache.jacobians()
    d_vqc = np.einsum("gbk,gbkp->gp", dprobs, jac_p)
    d_angles = np.einsum("gbk,gbka->ba", dprobs, jac_a)
    d_pre = d_angles * np.pi * (1.0 - np.tanh(cache.pre) ** 2)
    grads = QlstmCellParams(
        proj_weights=d_pre.T @ cache.v,
        proj_bias=d_pre.sum(axis=0),
        vqc_params=d_vqc,
    )
    dv = d_pre @ params.proj_weights
    return grads, dv[:, hdim:], QlstmState(dv[:, :hdim], dc_total * f)


def stack_forward(layers: List[QlstmCellParams], x_seq, mode=HiddenMode.PROBABILITIES):
    """Unroll a stack over ``x_seq`` of shape ``(T, B, input_dim)``.

    Returns ``(outputs, caches)``: ``outputs[t]`` is the top layer's ``h`` at
    step t, ``caches[t][l]`` the cell cache of layer l at step t.
    """
    mode = HiddenMode(mode)
    x_seq = np.asarray(x_seq, dtype=np.float64)
    if x_seq.ndim == 2:
        x_seq = x_seq[:, None, :]
    n_steps = x_seq.shape[0]
    if n_steps == 0:
        return [], []
    batch = x_seq.shape[1]
    for lower, upper in zip(layers, layers[1:]):
        hdim = hidden_dim(lower.n_qubits, mode)
        expected = hidden_dim(upper.n_qubits, mode) + hdim
        if upper.proj_weights.shape[1] != expected:
            raise ValueError("layer input dim does not match the previous layer's hidden dim")
    states = [QlstmState.zeros(batch, hidden_dim(p.n_qubits, mode)) for p in layers]
    outputs, caches = [], []
    for t in range(n_steps):
        inp = x_seq[t]
        step_caches = []
        for l, p in enumerate(layers):
            states[l], cache = cell_forward(p, inp, states[l], mode)
            step_caches.append(cache)
            inp = states[l].h
        outputs.append(inp)
        caches.append(step_caches)
    return outputs, caches


def stack_backward(layers: List[QlstmCellParams], caches, d_outputs):
    """Backpropagation through time for :func:`stack_forward`.

    ``d_outputs[t]`` is the gradient w.r.t. ``outputs[t]`` or None. The
    unroll stops at the last step carrying a gradient. Returns per-layer
    gradients and ``dx_seq``.
    """
    grads = [p.zeros_like() for p in layers]
    active = [t for t, d in enumerate(d_outputs) if d is not None]
    dx_seq = [None] * len(caches)
    if not active:
        return grads, dx_seq
    last = max(active)
    dh = [np.zeros_like(caches[last][l].tanh_c) for l in range(len(layers))]
    dc = [np.zeros_like(caches[last][l].tanh_c) for l in range(len(layers))]
    for t in range(last, -1, -1):
        upstream = d_outputs[t]
        for l in range(len(layers) - 1, -1, -1):
            if l == len(layers) - 1 and upstream is not None:
                dh[l] = dh[l] + upstream
            g, dx, dstate = cell_backward(caches[t][l], dh[l], dc[l])
            for acc, part in zip(grads[l].arrays(), g.arrays()):
                acc += part
            dh[l], dc[l] = dstate.h, dstate.c
            if l > 0:
                dh[l - 1] = dh[l - 1] + dx
            else:
                dx_seq[t] = dx
    return grads, dx_seq
