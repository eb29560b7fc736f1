"""Fully connected patch discriminator with exact gradient-penalty gradients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._params import ArrayParams, uniform_fan_in

LEAK = 0.2


@dataclass
class DiscriminatorParams(ArrayParams):
    w1: np.ndarray  # (64, patch_dim)
    b1: np.ndarray
    w2: np.ndarray  # (16, 64)
    b2: np.ndarray
    w3: np.ndarray  # (1, 16)
    b3: np.ndarray  # (1,)

    @property
    def patch_dim(self):
        return self.w1.shape[1]


def init_discriminator(patch_dim, rng, hidden=(64, 16)) -> DiscriminatorParams:
    h1, h2 = hidden
    return DiscriminatorParams(
        w1=uniform_fan_in(rng, (h1, patch_dim), patch_dim),
        b1=uniform_fan_in(rng, (h1,), patch_dim),
        w2=uniform_fan_in(rng, (h2, h1), h1),
        b2=uniform_fan_in(rng, (h2,), h1),
        w3=uniform_fan_in(rng, (1, h2), h2),
        b3=uniform_fan_in(rng, (1,), h2),
    )


def _slope(z):
    return np.where(z > 0, 1.0, LEAK)


def discriminate(disc: DiscriminatorParams, patches):
    """Raw critic scores, shape ``(M,)``, for patches ``(M, patch_dim)``.

    Returns ``(scores, cache)``. BCE callers apply the sigmoid themselves.
    """
    x = np.atleast_2d(np.asarray(patches, dtype=np.float64))
    if x.shape[-1] != disc.patch_dim:
        raise ValueError(f"patch length {x.shape[-1]} != discriminator input {disc.patch_dim}")
    z1 = x @ disc.w1.T + disc.b1
    s1 = _slope(z1)
    a1 = s1 * z1
    z2 = a1 @ disc.w2.T + disc.b2
    s2 = _slope(z2)
    a2 = s2 * z2
    scores = (a2 @ disc.w3.T + disc.b3)[:, 0]
    return scores, (x, a1, s1, a2, s2)


def discriminator_backward(disc: DiscriminatorParams, cache, d_scores):
    """Gradients of ``sum(d_scores * scores)`` w.r.t. parameters and inputs."""
    x, a1, s1, a2, s2 = cache
    d = np.asarray(d_scores, dtype=np.float64)[:, None]
    dz2 = (d @ disc.w3) * s2
    dz1 = (dz2 @ disc.w2) * s1
    grads = DiscriminatorParams(
        w1=dz1.T @ x,
        b1=dz1.sum(axis=0),
        w2=dz2.T @ a1,
        b2=dz2.sum(axis=0),
        w3=d.T @ a2,
        b3=d.sum(axis=0),
    )
    return grads, dz1 @ disc.w1


def input_gradient(disc: DiscriminatorParams, patches):
    """``dD/dx`` per patch, shape ``(M, patch_dim)``."""
    scores, cache = discriminate(disc, patches)
    _, dx = discriminator_backward(disc, cache, np.ones_like(scores))
    return dx


def gradient_penalty(disc: DiscriminatorParams, x_hat):
    """``mean((||dD/dx||_2 - 1)**2)`` over ``x_hat`` and its exact parameter gradient.

    The leaky-rectifier slopes are piecewise constant, so the input gradient
    ``W1^T (s1 * (W2^T (s2 * w3)))`` is linear in each weight matrix for
    fixed activation pattern; the bias gradients vanish almost everywhere.
    """
    _, (x, _a1, s1, _a2, s2) = discriminate(disc, x_hat)
    m = x.shape[0]
    g2 = s2 * disc.w3[0]  # (M, 16)
    g1 = s1 * (g2 @ disc.w2)  # (M, 64)
    gx = g1 @ disc.w1  # (M, patch_dim)
    norm = np.linalg.norm(gx, axis=1)
    value = float(np.mean((norm - 1.0) ** 2))

    safe = np.where(norm > 0, norm, 1.0)
    r = np.where(norm[:, None] > 0, (2.0 / m) * ((norm - 1.0) / safe)[:, None] * gx, 0.0)
    q1 = s1 * (r @ disc.w1.T)  # (M, 64)
    q2 = q1 @ disc.w2.T  # (M, 16)
    grads = DiscriminatorParams(
        w1=g1.T @ r,
        b1=np.zeros_like(disc.b1),
        w2=g2.T @ q1,
        b2=np.zeros_like(disc.b2),
        w3=(s2 * q2).sum(axis=0, keepdims=True),
        b3=np.zeros_like(disc.b3),
    )
    return value, grads
