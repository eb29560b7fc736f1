"""Scikit-learn style wrappers around the QGAN training machinery.

Both estimators take flat images ``X`` of shape ``(n_samples, rows * cols)``
with pixels in [0, 1]; ``fit`` trains from scratch, ``partial_fit`` runs one
more epoch, and ``sample`` draws new images.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .data import PatchLayout, extract_patches
from .gan.discriminator import init_discriminator
from .gan.generator import PatchGanGenerator, QlstmGenerator
from .gan.losses import LossKind
from .gan.optim import AdamState
from .gan.training import TrainConfig, train_epoch
from .qlstm import HiddenMode, QlstmConfig
from .seeding import stream


def check_images(X, image_dim):
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != image_dim:
        raise ValueError(f"expected {image_dim} pixels per image, got {X.shape[1]}")
    if X.min() < 0 or X.max() > 1:
        raise ValueError("pixel values must lie in [0, 1]")
    return X


class _QGANBase(BaseEstimator):
    arch = None

    @property
    def image_dim(self):
        return int(self.image_shape[0] * self.image_shape[1])

    def _train_config(self):
        return TrainConfig(
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            epochs=self.epochs,
            loss_kind=LossKind(self.loss),
            lambda_gp=self.lambda_gp,
            critic_steps=self.critic_steps,
            seed=self.random_state,
        )

    def _initialize(self):
        self._train_config()  # validates hyperparameters before allocating anything
        rng = stream(self.random_state, "init")
        self.generator_ = self._make_generator(rng)
        self.discriminator_ = init_discriminator(self.generator_.patch_dim, rng)
        self.gen_opt_ = AdamState.zeros_for(self.generator_.params.arrays())
        self.disc_opt_ = AdamState.zeros_for(self.discriminator_.arrays())
        self.history_ = []
        self.n_epochs_done_ = 0
        return self

    def _patches(self, X):
        return check_images(X, self.image_dim).reshape(
            -1, self.generator_.n_patches, self.generator_.patch_dim
        )

    def fit(self, X, y=None):
        self._initialize()
        patches = self._patches(X)
        for _ in range(self.epochs):
            self._run_epoch(patches)
        return self

    def partial_fit(self, X, y=None):
        """Train one more epoch, initializing on first use."""
        if not hasattr(self, "generator_"):
            self._initialize()
        self._run_epoch(self._patches(X))
        return self

    def _run_epoch(self, patches):
        metrics = train_epoch(
            self.generator_, self.discriminator_, patches, self._train_config(),
            self.gen_opt_, self.disc_opt_, self.n_epochs_done_,
        )
        self.history_.append(metrics)
        self.n_epochs_done_ += 1
        if self.verbose:
            print("epoch {epoch}: GL={gl:.4f} DL={dl:.4f} penalty={penalty:.4f}".format(**metrics))
        return metrics

    def sample(self, n_samples, random_state=0, batch_size=256):
        """``(n_samples, rows * cols)`` generated images, deterministic in ``random_state``."""
        check_is_fitted(self, "generator_")
        rng = stream(random_state, "sample")
        z = self.generator_.sample_noise(rng, n_samples)
        out = np.empty((n_samples, self.image_dim))
        for lo in range(0, n_samples, batch_size):
            patches, _ = self.generator_.forward(z[lo: lo + batch_size])
            out[lo: lo + batch_size] = patches.reshape(len(patches), -1)
        return out


class LSTMQGAN(_QGANBase):
    """QLSTM patch generator against a classical patch critic.

    The image is split into ``n_patches`` whole-row strips; one stacked QLSTM
    generates them in sequence from fresh Gaussian noise each step.
    """

    arch = "lstm-qgan"

    def __init__(self, image_shape=(8, 8), n_patches=4, n_qubits=3, reps=2, n_layers=2,
                 hidden_mode="probabilities", loss="wgan-gp", lambda_gp=10.0, critic_steps=None,
                 learning_rate=2e-4, batch_size=128, epochs=10, random_state=0, verbose=False):
        self.image_shape = image_shape
        self.n_patches = n_patches
        self.n_qubits = n_qubits
        self.reps = reps
        self.n_layers = n_layers
        self.hidden_mode = hidden_mode
        self.loss = loss
        self.lambda_gp = lambda_gp
        self.critic_steps = critic_steps
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.random_state = random_state
        self.verbose = verbose

    @property
    def layout(self):
        return PatchLayout(self.n_patches, *self.image_shape)

    def _make_generator(self, rng):
        config = QlstmConfig(
            n_qubits=self.n_qubits, reps=self.reps, hidden_mode=HiddenMode(self.hidden_mode),
            input_dim=self.n_qubits, layers=self.n_layers,
        )
        return QlstmGenerator(config, self.n_patches, self.layout.patch_dim, rng=rng)

    def _patches(self, X):
        return extract_patches(check_images(X, self.image_dim), self.layout)


class PatchQGAN(_QGANBase):
    """PatchGAN-style baseline: one quantum sub-generator per contiguous pixel chunk."""

    arch = "patchgan-baseline"

    def __init__(self, image_shape=(8, 8), n_qubits=3, patch_pixels=8, reps=2,
                 loss="wgan-gp", lambda_gp=10.0, critic_steps=None, learning_rate=2e-4,
                 batch_size=128, epochs=10, random_state=0, verbose=False):
        self.image_shape = image_shape
        self.n_qubits = n_qubits
        self.patch_pixels = patch_pixels
        self.reps = reps
        self.loss = loss
        self.lambda_gp = lambda_gp
        self.critic_steps = critic_steps
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.random_state = random_state
        self.verbose = verbose

    @property
    def n_subgens(self):
        if self.image_dim % self.patch_pixels:
            raise ValueError(
                f"{self.patch_pixels}-pixel patches do not tile a {self.image_dim}-pixel image"
            )
        return self.image_dim // self.patch_pixels

    def _make_generator(self, rng):
        return PatchGanGenerator(self.n_qubits, self.reps, self.n_subgens, self.patch_pixels, rng=rng)


ESTIMATORS = {cls.arch: cls for cls in (LSTMQGAN, PatchQGAN)}
