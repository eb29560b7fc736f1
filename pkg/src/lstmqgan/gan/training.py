"""Adversarial training loop with per-patch generator gradient averaging."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..seeding import stream
from .losses import LossKind, critic_step_gradient, generator_patch_loss
from .optim import AdamState, adam_step


@dataclass
class TrainConfig:
    learning_rate: float = 2e-4
    batch_size: int = 128
    epochs: int = 1
    loss_kind: LossKind = LossKind.WGAN_GP
    lambda_gp: float = 10.0
    critic_steps: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        self.loss_kind = LossKind(self.loss_kind)
        if self.critic_steps is None:
            self.critic_steps = 5 if self.loss_kind is LossKind.WGAN_GP else 1
        if self.learning_rate < 0 or self.batch_size < 1 or self.epochs < 0 or self.critic_steps < 1:
            raise ValueError(f"invalid training configuration: {self}")
        if self.lambda_gp < 0:
            raise ValueError("lambda_gp must be >= 0")


def average_patch_gradients(per_patch):
    """``(1/T) * sum_t grad_t``, summed in patch order."""
    total = per_patch[0].copy()
    for g in per_patch[1:]:
        for acc, part in zip(total.arrays(), g.arrays()):
            acc += part
    scale = 1.0 / len(per_patch)
    for acc in total.arrays():
        acc *= scale
    return total


def generator_gradient(generator, disc, z, kind):
    """Generator loss (mean over patches) and its averaged per-patch gradient."""
    patches, cache = generator.forward(z)
    losses, d_patches = [], []
    for t in range(patches.shape[1]):
        loss_t, d_t = generator_patch_loss(disc, patches[:, t], kind)
        losses.append(loss_t)
        d_patches.append(d_t)
    grads = average_patch_gradients(generator.patch_gradients(cache, d_patches))
    return float(np.mean(losses)), grads


def train_epoch(generator, disc, patches, cfg: TrainConfig, gen_opt: AdamState,
                disc_opt: AdamState, epoch: int):
    """One pass over ``patches`` (N, T, patch_dim). Returns the epoch's mean metrics."""
    patches = np.asarray(patches, dtype=np.float64)
    n = patches.shape[0]
    if n == 0:
        raise ValueError("empty dataset")
    start = time.perf_counter()
    order = stream(cfg.seed, "shuffle", epoch).permutation(n)
    noise_rng = stream(cfg.seed, "noise", epoch)
    eps_rng = stream(cfg.seed, "epsilon", epoch)
    disc_arrays = disc.arrays()
    gen_arrays = generator.params.arrays()
    gl, dl, pen = [], [], []
    for lo in range(0, n, cfg.batch_size):
        idx = order[lo: lo + cfg.batch_size]
        b = len(idx)
        real = patches[idx].reshape(-1, patches.shape[-1])
        for _ in range(cfg.critic_steps):
            fake, _ = generator.forward(generator.sample_noise(noise_rng, b))
            fake = fake.reshape(-1, fake.shape[-1])
            eps = eps_rng.uniform(size=real.shape[0])
            d_loss, penalty, d_grads = critic_step_gradient(
                disc, real, fake, cfg.loss_kind, cfg.lambda_gp, eps
            )
            adam_step(disc_arrays, d_grads.arrays(), disc_opt, cfg.learning_rate)
        g_loss, g_grads = generator_gradient(
            generator, disc, generator.sample_noise(noise_rng, b), cfg.loss_kind
        )
        adam_step(gen_arrays, g_grads.arrays(), gen_opt, cfg.learning_rate)
        gl.append(g_loss)
        dl.append(d_loss)
        pen.append(penalty)
    return {
        "epoch": epoch,
        "gl": float(np.mean(gl)),
        "dl": float(np.mean(dl)),
        "penalty": float(np.mean(pen)),
        "wall_seconds": time.perf_counter() - start,
    }
