"""Sufficient dimension reduction with weighted sign covariance directions.

The reduction ``Gamma_1`` holds the top ``d`` eigenvectors of the WSCM of
``X``.  Responses are predicted by Gaussian-kernel regression in the reduced
space,

    Y_hat(x) = sum_i w_i y_i / sum_i w_i,
    w_i = exp(-|Gamma_1' (x - X_i)|^2 / sigma2),

with ``sigma2`` the within-slice spread of the projected predictors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .depth_weights import WeightKind, WeightSpec, resolve_spec, weights
from .errors import ValidationError
from .location import weighted_spatial_median
from .scatter import sample_cov, wscm

__all__ = ["SdrModel", "fit_sdr", "fit_sdr_classical", "predict", "predict_many", "slice_indices"]

_UNDERFLOW = 1e-300


@dataclass(frozen=True)
class SdrModel:
    gamma1_hat: np.ndarray
    sigma2_hat: float
    train_x: np.ndarray
    train_y: np.ndarray
    d: int

    def __post_init__(self):
        g = np.asarray(self.gamma1_hat, dtype=float)
        if g.ndim != 2 or g.shape[1] != self.d:
            raise ValidationError(f"gamma1_hat must be p x {self.d}")
        if np.max(np.abs(g.T @ g - np.eye(self.d))) > 1e-10:
            raise ValidationError("gamma1_hat columns are not orthonormal")
        if not self.sigma2_hat > 0:
            raise ValidationError(f"sigma2_hat must be positive, got {self.sigma2_hat}")

    @property
    def train_scores(self):
        return np.asarray(self.train_x) @ self.gamma1_hat


def slice_indices(y, n_slices=None):
    """Equal-count slices of the indices sorted by ``y`` (``ceil(sqrt(n))`` by default)."""
    y = np.asarray(y, dtype=float)
    n = y.size
    k = n_slices or math.ceil(math.sqrt(n))
    slices = np.array_split(np.argsort(y, kind="stable"), k)
    if min(len(s) for s in slices) < 2:
        raise ValidationError(f"{k} slices of {n} responses leave a slice with fewer than 2 points")
    return slices


def _check_xy(x, y, d):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    n, p = x.shape
    if y.size != n:
        raise ValidationError(f"x has {n} rows but y has {y.size} entries")
    if not 1 <= d < p:
        raise ValidationError(f"d must satisfy 1 <= d < p={p}, got {d}")
    if n <= p:
        raise ValidationError(f"need n > p, got n={n}, p={p}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("non-finite training data")
    return x, y


def fit_sdr(x, y, d: int, spec: WeightSpec | str = "PD", n_slices=None) -> SdrModel:
    """Robust SDR fit.

    ``X`` is centered at its weighted spatial median and ``Gamma_1`` taken
    from the WSCM.  ``sigma2`` is the median over response slices of the
    mean squared distance of ``Gamma_1' X`` to its weighted spatial median
    within the slice (weights fixed at their full-sample values).
    """
    x, y = _check_xy(x, y, d)
    if not isinstance(spec, WeightSpec):
        spec = WeightSpec(spec)
    spec = resolve_spec(spec, x)
    w = weights(spec, x)
    mu = weighted_spatial_median(x, spec, w=w).q_hat
    gamma = wscm(x, spec, mu, w=w).eigvecs[:, :d]
    spreads = []
    for idx in slice_indices(y, n_slices):
        proj = x[idx] @ gamma
        dev = proj - weighted_spatial_median(proj, w=w[idx]).q_hat
        spreads.append(np.mean(np.einsum("ij,ij->i", dev, dev)))
    return SdrModel(gamma, float(np.median(spreads)), x, y, d)


def fit_sdr_classical(x, y, d: int, n_slices=None) -> SdrModel:
    """Classical counterpart: covariance eigenvectors and slice means."""
    x, y = _check_xy(x, y, d)
    gamma = sample_cov(x).eigvecs[:, :d]
    spreads = []
    for idx in slice_indices(y, n_slices):
        dev = (x[idx] - x[idx].mean(axis=0)) @ gamma
        spreads.append(np.mean(np.einsum("ij,ij->i", dev, dev)))
    return SdrModel(gamma, float(np.median(spreads)), x, y, d)


def predict_many(model: SdrModel, x_new) -> np.ndarray:
    """Kernel predictions for the rows of ``x_new``."""
    x_new = np.atleast_2d(np.asarray(x_new, dtype=float))
    train = model.train_scores
    new = x_new @ model.gamma1_hat
    d2 = (
        np.einsum("ij,ij->i", new, new)[:, None]
        - 2.0 * new @ train.T
        + np.einsum("ij,ij->i", train, train)[None, :]
    )
    d2 = np.maximum(d2, 0.0)
    w = np.exp(-d2 / model.sigma2_hat)
    total = w.sum(axis=1)
    out = np.empty(x_new.shape[0])
    ok = total >= _UNDERFLOW
    out[ok] = (w[ok] @ model.train_y) / total[ok]
    # every kernel weight underflowed: nearest training point in the reduced space
    out[~ok] = model.train_y[np.argmin(d2[~ok], axis=1)]
    return out


def predict(model: SdrModel, x_new) -> float:
    """Kernel prediction at a single point."""
    x_new = np.asarray(x_new, dtype=float).reshape(1, -1)
    return float(predict_many(model, x_new)[0])
