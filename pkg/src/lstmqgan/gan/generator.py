"""Patch generators: the QLSTM generator and the PatchGAN-style baseline.

Both expose the same small surface used by the training loop:

- ``sample_noise(rng, batch)`` -> latent noise ``(batch, T, z_dim)``
- ``forward(z)`` -> ``(patches (batch, T, patch_dim), cache)``
- ``patch_gradients(cache, d_patches)`` -> one gradient container per patch
- ``params`` -> an :class:`ArrayParams` container
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.special import expit

from .._params import ArrayParams, uniform_fan_in
from ..ansatz import AnsatzSpec, build_hw_efficient, default_entangler
from ..qlstm import (
    HiddenMode,
    QlstmConfig,
    init_stack,
    stack_backward,
    stack_forward,
)
from ..qsim import encoded_probabilities


@dataclass
class GeneratorParams(ArrayParams):
    cells: list
    out_weights: np.ndarray  # (patch_dim, hidden_dim)
    out_bias: np.ndarray  # (patch_dim,)


def generate(gen: GeneratorParams, z, mode=HiddenMode.PROBABILITIES):
    """Image(s) from latent noise ``z`` of shape ``(T, z_dim)`` or ``(B, T, z_dim)``.

    Patch t comes from the top QLSTM layer's hidden state at step t through
    ``sigmoid(out_weights @ h + out_bias)``; patches are concatenated in
    order, so whole-row patches stack as consecutive row strips.
    """
    z = np.asarray(z, dtype=np.float64)
    single = z.ndim == 2
    patches, _ = _qlstm_forward(gen, z[None] if single else z, mode)
    images = patches.reshape(patches.shape[0], -1)
    return images[0] if single else images


def _qlstm_forward(gen, z, mode):
    if z.ndim != 3:
        raise ValueError(f"noise must be (B, T, z_dim), got {z.shape}")
    expected = gen.cells[0].proj_weights.shape[1] - gen.out_weights.shape[1]
    if z.shape[-1] != expected:
        raise ValueError(f"noise dim {z.shape[-1]} does not match generator input dim {expected}")
    outputs, caches = stack_forward(gen.cells, np.swapaxes(z, 0, 1), mode)
    hs = np.stack(outputs, axis=1)  # (B, T, hidden)
    patches = expit(hs @ gen.out_weights.T + gen.out_bias)
    return patches, (caches, hs, patches)


class QlstmGenerator:
    """QLSTM generator: one noise row of length ``n_qubits`` per time step."""

    def __init__(self, config: QlstmConfig, n_patches, patch_dim, params=None, rng=None):
        if config.input_dim != config.n_qubits:
            raise ValueError("generator noise dim must equal n_qubits")
        self.config = config
        self.n_patches = n_patches
        self.patch_dim = patch_dim
        if params is None:
            rng = np.random.default_rng(rng)
            hdim = config.hidden_dim
            params = GeneratorParams(
                cells=init_stack(config, rng),
                out_weights=uniform_fan_in(rng, (patch_dim, hdim), hdim),
                out_bias=uniform_fan_in(rng, (patch_dim,), hdim),
            )
        self.params = params

    @property
    def z_dim(self):
        return self.config.n_qubits

    def sample_noise(self, rng, batch):
        return rng.standard_normal((batch, self.n_patches, self.z_dim))

    def forward(self, z):
        return _qlstm_forward(self.params, np.asarray(z, dtype=np.float64), self.config.hidden_mode)

    def patch_gradients(self, cache, d_patches) -> List[GeneratorParams]:
        """Gradient of each patch's loss separately, in patch order.

        ``d_patches[t]`` is the gradient of patch t's loss w.r.t. patch t,
        shape ``(B, patch_dim)``. Each entry backpropagates through the
        output projection and the QLSTM unroll up to step t.
        """
        caches, hs, patches = cache
        p = self.params
        out = []
        for t, d in enumerate(d_patches):
            d_logit = d * patches[:, t] * (1.0 - patches[:, t])
            d_out = [None] * len(caches)
            d_out[t] = d_logit @ p.out_weights
            cell_grads, _ = stack_backward(p.cells, caches, d_out)
            out.append(GeneratorParams(
                cells=cell_grads,
                out_weights=d_logit.T @ hs[:, t],
                out_bias=d_logit.sum(axis=0),
            ))
        return out


@dataclass
class PatchGanParams(ArrayParams):
    subgen_params: np.ndarray  # (n_subgens, 3 * n_qubits * reps)


def generate_patchgan_baseline(params: PatchGanParams, z, n_qubits, reps, patch_pixels):
    """Baseline image(s): each sub-generator angle-encodes its noise slice,
    runs the hardware-efficient ansatz, keeps the first ``patch_pixels``
    probabilities and divides them by their maximum."""
    z = np.asarray(z, dtype=np.float64)
    single = z.ndim == 2
    patches, _ = _patchgan_forward(params, z[None] if single else z, n_qubits, reps, patch_pixels)
    images = patches.reshape(patches.shape[0], -1)
    return images[0] if single else images


def _patchgan_forward(params, z, n_qubits, reps, patch_pixels):
    n_sub = params.subgen_params.shape[0]
    if z.ndim != 3 or z.shape[1:] != (n_sub, n_qubits):
        raise ValueError(f"noise must be (B, {n_sub}, {n_qubits}), got {z.shape}")
    if not 1 <= patch_pixels <= 2**n_qubits:
        raise ValueError(f"patch_pixels must be in [1, {2 ** n_qubits}]")
    circuit = _baseline_circuit(n_qubits, reps)
    theta = params.subgen_params
    angles = np.swapaxes(z, 0, 1)  # (S, B, n)
    probs = encoded_probabilities(circuit, theta, angles)[..., :patch_pixels]
    peak = probs.max(axis=-1, keepdims=True)
    patches = probs / peak
    return np.swapaxes(patches, 0, 1), (circuit, theta, angles, probs, peak)


_BASELINE_CIRCUITS = {}


def _baseline_circuit(n_qubits, reps):
    key = (n_qubits, reps)
    if key not in _BASELINE_CIRCUITS:
        _BASELINE_CIRCUITS[key] = build_hw_efficient(AnsatzSpec(n_qubits, reps, default_entangler(n_qubits)))
    return _BASELINE_CIRCUITS[key]


class PatchGanGenerator:
    """PatchGAN-style baseline: one independent quantum sub-generator per patch."""

    def __init__(self, n_qubits, reps, n_subgens, patch_pixels, params=None, rng=None):
        self.n_qubits = n_qubits
        self.reps = reps
        self.n_patches = n_subgens
        self.patch_dim = patch_pixels
        if params is None:
            rng = np.random.default_rng(rng)
            params = PatchGanParams(
                rng.uniform(0.0, np.pi, size=(n_subgens, 3 * n_qubits * reps))
            )
        self.params = params

    @property
    def z_dim(self):
        return self.n_qubits

    def sample_noise(self, rng, batch):
        return rng.standard_normal((batch, self.n_patches, self.z_dim))

    def forward(self, z):
        return _patchgan_forward(
            self.params, np.asarray(z, dtype=np.float64), self.n_qubits, self.reps, self.patch_dim
        )

    def patch_gradients(self, cache, d_patches):
        circuit, theta, angles, probs, peak = cache
        d = np.swapaxes(np.stack(d_patches, axis=1), 0, 1)  # (S, B, k)
        # y = p / max(p): dy/dp = I / M - e_argmax p^T / M^2
        d_probs = d / peak
        arg = probs.argmax(axis=-1)
        corr = (d * probs).sum(axis=-1) / peak[..., 0] ** 2
        np.put_along_axis(
            d_probs, arg[..., None],
            np.take_along_axis(d_probs, arg[..., None], axis=-1) - corr[..., None], axis=-1,
        )
        full = np.zeros(d_probs.shape[:-1] + (2**self.n_qubits,))
        full[..., : self.patch_dim] = d_probs
        _, jac, _ = encoded_probabilities(circuit, theta, angles, jacobians=True)  # (S, B, 2^n, P)
        per_sub = np.einsum("sbk,sbkp->sp", full, jac)
        out = []
        for s in range(self.n_patches):
            g = np.zeros_like(self.params.subgen_params)
            g[s] = per_sub[s]
            out.append(PatchGanParams(g))
        return out
