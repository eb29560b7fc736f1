"""Standardized PCA and the random inverse-PCA image study."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .seeding import stream


class StandardizedPCA(TransformerMixin, BaseEstimator):
    """PCA on standardized features.

    Features are shifted to zero mean and divided by their population
    standard deviation (constant features keep scale 1). The components are
    the top eigenvectors of the covariance of the standardized data.

    Attributes
    ----------
    mean_, scale_ : ndarray of shape (n_features,)
    components_ : ndarray of shape (n_features, n_components)
        Orthonormal columns, sorted by decreasing eigenvalue. Note the
        column layout: ``Z = standardize(X) @ components_``.
    eigenvalues_ : ndarray of shape (n_components,)
    spectrum_ : ndarray of shape (n_features,)
        All covariance eigenvalues, descending.
    score_mean_, score_std_ : ndarray of shape (n_components,)
        Statistics of the training scores.
    """

    def __init__(self, n_components=2):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        n, d = X.shape
        if n < 2:
            raise ValueError("PCA needs at least 2 samples")
        if not 1 <= self.n_components <= d:
            raise ValueError(f"n_components must be in [1, {d}], got {self.n_components}")
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        self.scale_ = np.where(scale > 0, scale, 1.0)
        Xs = (X - self.mean_) / self.scale_
        cov = Xs.T @ Xs / n
        vals, vecs = np.linalg.eigh(cov)
        order = np.argsort(vals)[::-1]
        vals, vecs = vals[order], vecs[:, order]
        # deterministic sign: largest-magnitude entry of each column positive
        signs = np.sign(vecs[np.abs(vecs).argmax(axis=0), np.arange(d)])
        vecs = vecs * np.where(signs == 0, 1.0, signs)
        k = self.n_components
        self.spectrum_ = vals
        self.eigenvalues_ = vals[:k]
        self.components_ = vecs[:, :k]
        scores = Xs @ self.components_
        self.score_mean_ = scores.mean(axis=0)
        self.score_std_ = scores.std(axis=0)
        self.n_features_in_ = d
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return ((X - self.mean_) / self.scale_) @ self.components_

    def inverse_transform(self, Z):
        check_is_fitted(self)
        Z = check_array(Z, dtype=np.float64)
        if Z.shape[1] != self.components_.shape[1]:
            raise ValueError(f"Z has {Z.shape[1]} columns, expected {self.components_.shape[1]}")
        return (Z @ self.components_.T) * self.scale_ + self.mean_


def random_inverse_study(model: StandardizedPCA, n_images, seed=0):
    """Images decoded from random score vectors.

    Scores are drawn per component from a normal with the training scores'
    mean and standard deviation; decoded pixels are clipped to [0, 1].
    """
    check_is_fitted(model)
    rng = stream(seed, "study")
    z = rng.normal(model.score_mean_, model.score_std_, size=(n_images, len(model.score_mean_)))
    return np.clip(model.inverse_transform(z), 0.0, 1.0)
