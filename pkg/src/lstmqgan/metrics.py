"""Fréchet distance between Gaussian fits of feature sets."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .pca import StandardizedPCA


@dataclass(frozen=True)
class FrechetScore:
    value: float
    n_real: int
    n_gen: int


class FeatureKind(str, Enum):
    RAW = "raw"
    PCA = "pca"


class FeatureMap:
    """Deterministic image embedding standing in for an Inception network.

    ``raw`` uses pixels unchanged; ``pca`` projects onto ``k`` principal
    components fitted on a reference (real) image set.
    """

    def __init__(self, kind=FeatureKind.RAW, k=32):
        self.kind = FeatureKind(kind)
        self.k = k
        self.pca_ = None

    def fit(self, reference):
        if self.kind is FeatureKind.PCA:
            reference = np.asarray(reference, dtype=np.float64)
            self.pca_ = StandardizedPCA(min(self.k, reference.shape[1])).fit(reference)
        return self

    def __call__(self, images):
        images = np.asarray(images, dtype=np.float64)
        if self.kind is FeatureKind.RAW:
            return images
        if self.pca_ is None:
            raise RuntimeError("PCA feature map used before fit()")
        return self.pca_.transform(images)


def _sqrt_psd(mat):
    vals, vecs = np.linalg.eigh((mat + mat.T) / 2.0)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def frechet_distance(real_feats, gen_feats) -> FrechetScore:
    """``|mu_r - mu_g|^2 + tr(S_r + S_g - 2 (S_r S_g)^(1/2))`` with unbiased covariances.

    The cross term uses ``tr((S_r S_g)^(1/2)) = tr((A S_g A)^(1/2))`` with
    ``A = S_r^(1/2)``; both square roots come from symmetric
    eigendecompositions with negative eigenvalues clamped to 0.
    """
    real = np.atleast_2d(np.asarray(real_feats, dtype=np.float64))
    gen = np.atleast_2d(np.asarray(gen_feats, dtype=np.float64))
    if real.shape[1] != gen.shape[1]:
        raise ValueError(f"feature dims differ: {real.shape[1]} vs {gen.shape[1]}")
    if len(real) < 2 or len(gen) < 2:
        raise ValueError("each set needs at least 2 samples")
    mu_r, mu_g = real.mean(axis=0), gen.mean(axis=0)
    cov_r = np.atleast_2d(np.cov(real, rowvar=False))
    cov_g = np.atleast_2d(np.cov(gen, rowvar=False))
    root_r = _sqrt_psd(cov_r)
    middle = root_r @ cov_g @ root_r
    cross = np.sqrt(np.clip(np.linalg.eigvalsh((middle + middle.T) / 2.0), 0.0, None)).sum()
    diff = mu_r - mu_g
    value = float(diff @ diff + np.trace(cov_r) + np.trace(cov_g) - 2.0 * cross)
    return FrechetScore(max(value, 0.0), len(real), len(gen))


def nearest_neighbor_correlation(images, reference):
    """Mean over ``images`` of the highest Pearson correlation with any reference image."""
    def standardize(a):
        a = np.asarray(a, dtype=np.float64)
        a = a - a.mean(axis=1, keepdims=True)
        norm = np.linalg.norm(a, axis=1, keepdims=True)
        return a / np.where(norm > 0, norm, 1.0)

    corr = standardize(images) @ standardize(reference).T
    return float(corr.max(axis=1).mean())
