"""Adversarial losses on patch scores.

Every function returns loss values together with the gradients the
training loop needs, so the caller never differentiates twice.
"""
from __future__ import annotations

from enum import Enum

import numpy as np
from scipy.special import expit

from .discriminator import discriminate, discriminator_backward, gradient_penalty

LOG_FLOOR = 1e-12


class LossKind(str, Enum):
    BCE = "bce"
    WGAN_GP = "wgan-gp"


def bce_losses(real_scores, fake_scores):
    """``(disc_loss, gen_loss)`` for raw scores; logs are clamped at 1e-12."""
    real = np.asarray(real_scores, dtype=np.float64)
    fake = np.asarray(fake_scores, dtype=np.float64)
    if real.size == 0 or fake.size == 0:
        raise ValueError("score batches must be nonempty")
    p_real, p_fake = expit(real), expit(fake)
    disc = -np.mean(np.log(np.maximum(p_real, LOG_FLOOR))) - np.mean(
        np.log(np.maximum(1.0 - p_fake, LOG_FLOOR))
    )
    gen = -np.mean(np.log(np.maximum(p_fake, LOG_FLOOR)))
    return float(disc), float(gen)


def wgan_gp_losses(disc, real_patches, fake_patches, lam, eps):
    """``(disc_loss, gen_loss, penalty)`` with interpolates ``eps*x + (1-eps)*x_fake``."""
    real = np.atleast_2d(np.asarray(real_patches, dtype=np.float64))
    fake = np.atleast_2d(np.asarray(fake_patches, dtype=np.float64))
    if real.shape != fake.shape:
        raise ValueError(f"real {real.shape} and fake {fake.shape} batches differ")
    eps = np.asarray(eps, dtype=np.float64).reshape(-1, 1)
    if eps.shape[0] != real.shape[0]:
        raise ValueError("need one epsilon per real/fake pair")
    d_real, _ = discriminate(disc, real)
    d_fake, _ = discriminate(disc, fake)
    penalty, _ = gradient_penalty(disc, eps * real + (1.0 - eps) * fake)
    disc_loss = np.mean(d_fake) - np.mean(d_real) + lam * penalty
    return float(disc_loss), float(-np.mean(d_fake)), penalty


def critic_step_gradient(disc, real, fake, kind, lam=10.0, eps=None):
    """Discriminator loss, penalty and parameter gradient for one critic update."""
    kind = LossKind(kind)
    m = real.shape[0]
    s_real, c_real = discriminate(disc, real)
    s_fake, c_fake = discriminate(disc, fake)
    if kind is LossKind.BCE:
        disc_loss, _ = bce_losses(s_real, s_fake)
        # d/ds of -log(sigmoid(s)) and -log(1 - sigmoid(s))
        g_real, _ = discriminator_backward(disc, c_real, -(1.0 - expit(s_real)) / m)
        g_fake, _ = discriminator_backward(disc, c_fake, expit(s_fake) / fake.shape[0])
        penalty = 0.0
        parts = [g_real, g_fake]
    else:
        if eps is None:
            raise ValueError("WGAN-GP needs epsilon samples")
        eps = np.asarray(eps, dtype=np.float64).reshape(-1, 1)
        penalty, g_pen = gradient_penalty(disc, eps * real + (1.0 - eps) * fake)
        disc_loss = float(np.mean(s_fake) - np.mean(s_real) + lam * penalty)
        g_real, _ = discriminator_backward(disc, c_real, np.full(m, -1.0 / m))
        g_fake, _ = discriminator_backward(disc, c_fake, np.full(fake.shape[0], 1.0 / fake.shape[0]))
        parts = [g_real, g_fake, g_pen.map(lambda a: lam * a)]
    grads = disc.zeros_like()
    for part in parts:
        for acc, g in zip(grads.arrays(), part.arrays()):
            acc += g
    return disc_loss, penalty, grads


def generator_patch_loss(disc, fake_patch, kind):
    """Loss of one patch position over a batch and its gradient w.r.t. the patch."""
    kind = LossKind(kind)
    b = fake_patch.shape[0]
    scores, cache = discriminate(disc, fake_patch)
    if kind is LossKind.BCE:
        loss = -np.mean(np.log(np.maximum(expit(scores), LOG_FLOOR)))
        d_scores = -(1.0 - expit(scores)) / b
    else:
        loss = -np.mean(scores)
        d_scores = np.full(b, -1.0 / b)
    _, dx = discriminator_backward(disc, cache, d_scores)
    return float(loss), dx
