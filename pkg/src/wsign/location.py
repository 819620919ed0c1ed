"""Weighted spatial median and its asymptotic covariance."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _core
from .depth_weights import WeightSpec, resolve_spec, spatial_sign, weights
from .errors import ValidationError

__all__ = [
    "LocationFit",
    "weighted_spatial_median",
    "objective",
    "median_are",
    "are_lower_bound",
    "psi_matrices",
]


@dataclass(frozen=True)
class LocationFit:
    q_hat: np.ndarray
    iterations: int
    final_gradient_norm: float
    psi1w_hat: np.ndarray
    psi2w_hat: np.ndarray
    avar_hat: np.ndarray
    weights: np.ndarray = field(repr=False)
    spec: WeightSpec | None = field(default=None, repr=False)
    tol: float = 1e-9
    trace: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "q_hat": self.q_hat.tolist(),
            "iterations": self.iterations,
            "final_gradient_norm": self.final_gradient_norm,
            "avar": self.avar_hat.tolist(),
            "psi1w": self.psi1w_hat.tolist(),
            "psi2w": self.psi2w_hat.tolist(),
        }


def objective(x, w, q) -> float:
    """``sum_i w_i |x_i - q|``."""
    return _core.weighted_objective(np.asarray(x, float), np.asarray(w, float), np.asarray(q, float))


def psi_matrices(x, w, q, guard=1e-8):
    """Plug-in gradient outer product and Hessian of the objective at ``q``.

    Observations within ``guard`` of ``q`` are left out of the Hessian
    average.
    """
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    s = spatial_sign(x, q)
    ws = w[:, None] * s
    psi1 = ws.T @ ws / n
    dist = np.linalg.norm(x - q, axis=1)
    keep = dist > guard
    c = w[keep] / dist[keep]
    sk = s[keep]
    psi2 = (np.sum(c) * np.eye(p) - (c[:, None] * sk).T @ sk) / n
    return _core.sym(psi1), _core.sym(psi2)


def weighted_spatial_median(x, spec: WeightSpec | None = None, tol: float = 1e-9, max_iter: int = 500,
                            w=None, keep_trace: bool = False) -> LocationFit:
    """Minimize ``sum_i W(X_i) |X_i - q|`` over ``q``.

    Weights are evaluated once, in empirical mode, from the spec's
    standardization (estimated from ``x`` if the spec is unresolved) and held
    fixed during the iteration, so the objective stays convex.  Pass ``w`` to
    supply precomputed weights instead.

    Raises :class:`~wsign.errors.ConvergenceError` if ``max_iter`` is hit.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n, p = x.shape
    if not np.all(np.isfinite(x)):
        raise ValidationError("data contain non-finite values")
    if n < p + 1:
        raise ValidationError(f"need n >= p + 1 observations, got n={n}, p={p}")
    if spec is None:
        spec = WeightSpec()
    if w is None:
        spec = resolve_spec(spec, x)
        w = weights(spec, x)
    else:
        w = np.asarray(w, dtype=float)
        if w.shape != (n,) or np.any(w < 0):
            raise ValidationError("weights must be a nonnegative vector of length n")
    trace = [] if keep_trace else None
    q, it, g = _core.weiszfeld(x, w, tol=tol, max_iter=max_iter, trace=trace)
    psi1, psi2 = psi_matrices(x, w, q)
    inv2 = np.linalg.pinv(psi2)
    avar = _core.sym(inv2 @ psi1 @ inv2)
    return LocationFit(q, it, g, psi1, psi2, avar, w, spec, tol, tuple(trace or ()))


def median_are(weighted: LocationFit | np.ndarray, unweighted: LocationFit | np.ndarray) -> float:
    """``(det V_1 / det V_W)^{1/p}`` from two fits or two covariance matrices."""
    vw = weighted.avar_hat if isinstance(weighted, LocationFit) else np.asarray(weighted, float)
    v1 = unweighted.avar_hat if isinstance(unweighted, LocationFit) else np.asarray(unweighted, float)
    p = vw.shape[0]
    sw, ldw = np.linalg.slogdet(vw)
    s1, ld1 = np.linalg.slogdet(v1)
    if sw <= 0 or s1 <= 0:
        raise ValidationError("asymptotic covariance is singular or indefinite")
    return float(np.exp((ld1 - ldw) / p))


def are_lower_bound(psi1, psi1w, psi2, psi2w, w_max: float) -> float:
    """Eigenvalue lower bound on the weighted-vs-unweighted median ARE.

    ``lmin(psi1) lmin(psi2w)^2 / (w_max lmax(psi1w) lmax(psi2)^2)``.
    """
    mats = {}
    for name, m in (("psi1", psi1), ("psi1w", psi1w), ("psi2", psi2), ("psi2w", psi2w)):
        m = np.asarray(m, dtype=float)
        if np.max(np.abs(m - m.T)) > 1e-10 * max(1.0, np.max(np.abs(m))):
            raise ValidationError(f"{name} is not symmetric")
        ev = np.linalg.eigvalsh(m)
        if ev[0] <= 0:
            raise ValidationError(f"{name} is not positive definite (eigenvalue {ev[0]:.3g})")
        mats[name] = ev
    if not w_max > 0:
        raise ValidationError("w_max must be positive")
    return float(
        mats["psi1"][0] * mats["psi2w"][0] ** 2 / (w_max * mats["psi1w"][-1] * mats["psi2"][-1] ** 2)
    )
