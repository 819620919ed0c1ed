"""Sign-based scatter estimators and robust eigenvalue recovery.

``wscm``
    Weighted sign covariance ``mean(W_i^2 S_i S_i^T)``.  Shares eigenvectors
    with the covariance under ellipticity; eigenvalues differ.
``adcm``
    Affine-equivariant depth-weighted M-estimator: the fixed point of
    ``Sigma = c * mean(W_i^2 d_i d_i^T / d_i^T Sigma^{-1} d_i)``.
``recover_eigenvalues``
    Median of groupwise variances of the data projected on estimated
    eigenvectors, giving the plug-in ``Sigma^dagger``.

``scm``, ``tyler`` and ``sample_cov`` are the classical baselines.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import _core
from .depth_weights import (
    WeightKind,
    WeightSpec,
    radial_profile,
    resolve_spec,
    spatial_sign,
    standardized_radii,
    weights,
)
from .elliptical import make_rng
from .errors import ConvergenceError, ValidationError
from .location import weighted_spatial_median

log = logging.getLogger(__name__)

__all__ = [
    "Estimator",
    "ScatterFit",
    "EigenvalueRecoverySpec",
    "eigen_sorted",
    "wscm",
    "scm",
    "tyler",
    "tyler_residual",
    "adcm",
    "adcm_residual",
    "sample_cov",
    "recover_eigenvalues",
    "fit_scatter",
]


class Estimator(str, enum.Enum):
    SCM = "SCM"
    TYLER = "TYLER"
    WSCM = "WSCM"
    ADCM = "ADCM"
    PLUGIN = "PLUGIN"
    SAMPLE_COV = "SAMPLE_COV"


def _canonical_sign(v):
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def eigen_sorted(matrix, tie_tol=1e-10):
    """Descending eigen-decomposition with deterministic signs and tie order.

    Every eigenvector is flipped so its first nonzero entry is positive.
    Within a block of eigenvalues closer than ``tie_tol`` the vectors are
    ordered lexicographically.
    """
    m = _core.sym(np.asarray(matrix, dtype=float))
    w, v = np.linalg.eigh(m)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    v = np.column_stack([_canonical_sign(v[:, j]) for j in range(v.shape[1])])
    start = 0
    p = w.size
    while start < p:
        stop = start + 1
        while stop < p and abs(w[stop - 1] - w[stop]) < tie_tol:
            stop += 1
        if stop - start > 1:
            block = v[:, start:stop]
            idx = sorted(range(block.shape[1]), key=lambda j: tuple(-block[:, j]))
            v[:, start:stop] = block[:, idx]
        start = stop
    return w, v


@dataclass(frozen=True)
class ScatterFit:
    matrix: np.ndarray
    eigvecs: np.ndarray
    eigvals: np.ndarray
    estimator: Estimator
    weight_spec: WeightSpec | None = None
    iterations: int | None = None
    residual: float | None = None
    info: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_matrix(cls, matrix, estimator, **kw):
        m = _core.sym(np.asarray(matrix, dtype=float))
        w, v = eigen_sorted(m)
        return cls(m, v, w, Estimator(estimator), **kw)

    @property
    def first_eigvec(self):
        return self.eigvecs[:, 0]


@dataclass(frozen=True)
class EigenvalueRecoverySpec:
    k_groups: int | None = None
    seed: int = 0

    def groups_for(self, n):
        k = self.k_groups if self.k_groups is not None else int(math.isqrt(n))
        if k < 2 or k > n // 2:
            raise ValidationError(f"k_groups must be in [2, n/2] = [2, {n // 2}], got {k}")
        return k


def _check(x, mu):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(x)):
        raise ValidationError("data contain non-finite values")
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.shape[0] != x.shape[1] or not np.all(np.isfinite(mu)):
        raise ValidationError("location must be a finite vector matching the data dimension")
    return x, mu


def wscm(x, spec: WeightSpec, mu_hat, model=None, w=None) -> ScatterFit:
    """Weighted sign covariance matrix ``n^{-1} sum_i W_i^2 S_i S_i^T``.

    Weights are empirical unless ``model`` is given (population mode) or
    ``w`` is passed explicitly.  Rows equal to ``mu_hat`` contribute zero.
    """
    x, mu = _check(x, mu_hat)
    n, p = x.shape
    if n < p:
        raise ValidationError(f"need n >= p, got n={n}, p={p}")
    if w is None:
        spec = resolve_spec(spec, x)
        w = weights(spec, x, model)
    s = spatial_sign(x, mu)
    if not np.any(np.any(s != 0, axis=1)):
        raise ValidationError("degenerate data: every row equals the location")
    ws = w[:, None] * s
    m = ws.T @ ws / n
    est = Estimator.SCM if spec.kind == WeightKind.UNIT else Estimator.WSCM
    return ScatterFit.from_matrix(m, est, weight_spec=spec, info={"weights": w})


def scm(x, mu_hat) -> ScatterFit:
    """Spatial sign covariance matrix."""
    return wscm(x, WeightSpec(WeightKind.UNIT), mu_hat)


def sample_cov(x, mu_hat=None) -> ScatterFit:
    """Covariance about ``mu_hat`` (divisor n), or the usual unbiased one."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if mu_hat is None:
        m = np.cov(x, rowvar=False).reshape(x.shape[1], x.shape[1])
    else:
        x, mu = _check(x, mu_hat)
        d = x - mu
        m = d.T @ d / x.shape[0]
    return ScatterFit.from_matrix(m, Estimator.SAMPLE_COV)


def _mahalanobis_sq(d, sigma):
    chol = np.linalg.cholesky(sigma)
    y = np.linalg.solve(chol, d.T)
    return np.einsum("ij,ij->j", y, y)


def tyler_residual(x, mu_hat, sigma) -> float:
    """Relative Frobenius residual of Tyler's defining equation at ``sigma``."""
    d = np.asarray(x, float) - mu_hat
    d = d[np.einsum("ij,ij->i", d, d) > 0]
    q = _mahalanobis_sq(d, sigma)
    rhs = d.shape[1] * ((d / q[:, None]).T @ d) / d.shape[0]
    return float(np.linalg.norm(sigma - rhs) / np.linalg.norm(sigma))


def tyler(x, mu_hat, tol=1e-10, max_iter=1000) -> ScatterFit:
    """Tyler's shape matrix about ``mu_hat``, normalized to trace ``p``.

    Solves ``Sigma = (p/n) sum d_i d_i^T / (d_i^T Sigma^{-1} d_i)``.
    """
    x, mu = _check(x, mu_hat)
    s, it, _ = _core.tyler_fixed_point(x - mu, tol=tol, max_iter=max_iter)
    res = tyler_residual(x, mu, s)
    return ScatterFit.from_matrix(s, Estimator.TYLER, iterations=it, residual=res)


def adcm_residual(x, mu_hat, sigma, w) -> float:
    """Relative Frobenius residual of the ADCM fixed-point equation."""
    d = np.asarray(x, float) - mu_hat
    keep = np.einsum("ij,ij->i", d, d) > 0
    d, w2 = d[keep], np.asarray(w, float)[keep] ** 2
    q = _mahalanobis_sq(d, sigma)
    rhs = (d.shape[1] / np.mean(w2)) * (((w2 / q)[:, None] * d).T @ d) / d.shape[0]
    return float(np.linalg.norm(sigma - rhs) / np.linalg.norm(sigma))


def huber_conditions(spec: WeightSpec, w, profile=None, p=None) -> dict:
    """Numerical check of the M-estimation existence conditions C1-C5.

    ``u(r) = W(r)^2`` and ``v = Var(W)/p``; checked on a radius grid.
    """
    w = np.asarray(w, dtype=float)
    vw = float(np.var(w))
    grid = np.geomspace(1e-3, 1e3, 120)
    u = profile(grid) ** 2
    ratio = u / grid**2
    c1 = bool(np.all(np.diff(ratio) <= 1e-12 * ratio[:-1]) and np.all(u > 0))
    c3 = bool(np.all(np.isfinite(u)) and u[-1] < np.inf and np.ptp(u[-15:]) < 0.05 * max(u[-1], 1e-300))
    u0 = float(profile(np.array([0.0]))[0] ** 2)
    c4 = bool(vw > 0 and u0 / (vw / p) < p)
    return {"C1": c1, "C2": vw > 0, "C3": c3, "C4": c4, "C5": True, "var_w": vw}


def adcm(x, spec: WeightSpec, mu_hat, tol=1e-8, max_iter=200, w=None, check_conditions=True) -> ScatterFit:
    """Affine-equivariant depth-weighted M-estimator of scatter.

    Weights come from the spec's (pilot) standardization and are held fixed.
    The fixed point of ``Sigma -> (p / mean W^2) mean(W^2 d d^T / d^T Sigma^{-1} d)``
    is determined up to scale; the returned matrix is scaled so that the
    median squared Mahalanobis radius matches the chi-square(p) median.
    ``residual`` is the relative Frobenius residual of that equation.
    The existence conditions C1-C5 are checked on a radius grid and
    reported in ``info['conditions']`` unless ``check_conditions`` is false.
    """
    x, mu = _check(x, mu_hat)
    n, p = x.shape
    if n <= p:
        raise ValidationError(f"need n > p, got n={n}, p={p}")
    spec = resolve_spec(spec, x)
    if spec.kind == WeightKind.UNIT:
        raise ValidationError("ADCM needs a depth weight: UNIT weights have zero variance")
    if w is None:
        w = weights(spec, x)
    vw = float(np.var(w))
    if vw < 1e-12:
        raise ValidationError(f"weight variance {vw:.3g} is below 1e-12 (near-constant weights)")
    w2 = w**2
    d = x - mu
    sweeps = []
    s, it, _ = _core.tyler_fixed_point(d, tol=tol / 10, max_iter=max_iter, weights2=w2, trace=sweeps)
    if any(b > a * (1 + 1e-6) for a, b in zip(sweeps[3:], sweeps[4:])):
        log.info("ADCM sweep changes not monotone after iteration 3")
    res = adcm_residual(x, mu, s, w)
    extra = 0
    while res > tol and extra < max_iter:
        s, more, _ = _core.tyler_fixed_point(d, tol=tol / 100, max_iter=max_iter, weights2=w2, init=s,
                                             trace=sweeps)
        it += more
        extra += more
        res = adcm_residual(x, mu, s, w)
    if res > tol:
        raise ConvergenceError(f"ADCM residual {res:.3g} above tolerance", best=s, residual=res, iterations=it)
    r2 = _mahalanobis_sq(d, s)
    s = s * (np.median(r2) / stats.chi2.ppf(0.5, p))
    res = adcm_residual(x, mu, s, w)
    if spec.kind == WeightKind.NORM or not check_conditions:
        conditions = {}
    else:
        ref = standardized_radii(spec, x)
        from .depth_weights import SphericalMarginal

        profile = radial_profile(spec, reference=SphericalMarginal(ref, p))
        conditions = huber_conditions(spec, w, profile, p)
        failed = [k for k, v in conditions.items() if v is False]
        if failed:
            log.debug("ADCM with %s weights: conditions %s not met", spec.kind.value, failed)
    return ScatterFit.from_matrix(
        s, Estimator.ADCM, weight_spec=spec, iterations=it, residual=res,
        info={"weights": w, "var_w": vw, "conditions": conditions, "trace": sweeps},
    )


def recover_eigenvalues(x, base: ScatterFit, rec: EigenvalueRecoverySpec | None = None, center=None):
    """Median-of-group-variances eigenvalues along ``base``'s eigenvectors.

    Indices are randomly split into ``k`` disjoint groups of size
    ``floor(n/k)`` (leftovers discarded).  Returns ``(lambda_dagger, fit)``
    with ``lambda_dagger`` in the column order of ``base.eigvecs`` and
    ``fit`` the plug-in ``Gamma diag(lambda_dagger) Gamma^T``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n, p = x.shape
    gamma = np.asarray(base.eigvecs, dtype=float)
    if np.max(np.abs(gamma.T @ gamma - np.eye(gamma.shape[1]))) > 1e-8:
        raise ValidationError("base eigenvectors are not orthonormal")
    rec = rec or EigenvalueRecoverySpec()
    k = rec.groups_for(n)
    size = n // k
    perm = make_rng(rec.seed).permutation(n)[: k * size].reshape(k, size)
    if center is not None:
        x = x - np.asarray(center, dtype=float)
    proj = x @ gamma
    groups = proj[perm]  # k x size x p
    var = groups.var(axis=1)  # divisor |G_j|
    lam = np.median(var, axis=0)
    fit = ScatterFit.from_matrix((gamma * lam) @ gamma.T, Estimator.PLUGIN, weight_spec=base.weight_spec,
                                 info={"group_variances": var, "k_groups": k})
    return lam, fit


def fit_scatter(x, estimator: str, weight="unit", *, tol=1e-8, max_iter=200, k_groups=None, seed=0,
                spec: WeightSpec | None = None):
    """Location plus scatter in one call, as used by the CLI and benchmarks.

    Each estimator is centered at the weighted spatial median for its
    weight kind (unit weights for ``scm``, ``tyler`` and ``cov``).
    Returns ``(location_fit, scatter_fit)``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    est = estimator.lower()
    if est in ("scm", "tyler", "cov"):
        spec = WeightSpec(WeightKind.UNIT)
    elif spec is None:
        spec = resolve_spec(WeightSpec(weight), x)
    else:
        spec = resolve_spec(spec, x)
    w = weights(spec, x)
    loc = weighted_spatial_median(x, spec, w=w)
    mu = loc.q_hat
    if est == "scm":
        fit = scm(x, mu)
    elif est == "tyler":
        fit = tyler(x, mu)
    elif est == "cov":
        fit = sample_cov(x)
    elif est == "wscm":
        fit = wscm(x, spec, mu, w=w)
    elif est == "adcm":
        fit = adcm(x, spec, mu, tol=tol, max_iter=max_iter, w=w)
    elif est == "plugin":
        base = wscm(x, spec, mu, w=w)
        _, fit = recover_eigenvalues(x, base, EigenvalueRecoverySpec(k_groups, seed), center=mu)
    else:
        raise ValidationError(f"unknown estimator {estimator!r}")
    return loc, fit
