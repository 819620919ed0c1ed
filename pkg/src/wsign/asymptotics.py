"""Influence functions, asymptotic eigen-variances and efficiency calculators.

All population expectations are Monte-Carlo averages over a seeded pool of
spherical draws ``Z`` (identity covariance).  Points are mapped to the model
through ``x = mu + Gamma Lambda^{1/2} z`` with ``Gamma, Lambda`` the model's
descending eigen-decomposition, and weights use the population
standardization ``(mu, Sigma)``.  Eigenvector indices are 0-based.

Monte-Carlo standard errors come from batch means over ``n_batches``
equal slices of the pool.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .depth_weights import WeightKind, WeightSpec, radial_profile, spatial_sign
from .elliptical import EllipticalModel, make_rng, radius_fourth_moment, sample_spherical
from .errors import ValidationError

__all__ = [
    "IfEstimator",
    "InfluenceGrid",
    "AsymptoticEigenReport",
    "AreEstimate",
    "population_spec",
    "MonteCarloPool",
    "if_wscm_eigenvector",
    "if_scm_eigenvector",
    "if_tyler_eigenvector",
    "if_cov_eigenvector",
    "if_wscm_eigenvector_numeric",
    "if_adcm_eigenvector_numeric",
    "eigen_asymptotic_report",
    "classical_inflation",
    "evec_avar",
    "evec_are",
    "evec_are_wscm",
    "evec_are_adcm",
    "polar_grid",
    "cartesian_grid",
    "influence_grid",
]

_TIE = 1e-10


class IfEstimator(str, enum.Enum):
    SAMPLE_COV_EVEC = "SAMPLE_COV_EVEC"
    SCM_EVEC = "SCM_EVEC"
    TYLER_EVEC = "TYLER_EVEC"
    WSCM_EVEC = "WSCM_EVEC"
    ADCM_EVEC = "ADCM_EVEC"


def _estimator_label(est, kind=None):
    est = IfEstimator(est)
    if est in (IfEstimator.WSCM_EVEC, IfEstimator.ADCM_EVEC):
        return f"{est.value}({WeightKind.parse(kind).value})"
    return est.value


def parse_estimator_label(label):
    """``"WSCM_EVEC(PD)"`` -> ``(IfEstimator.WSCM_EVEC, WeightKind.PD)``."""
    label = label.strip()
    if "(" in label:
        head, kind = label.rstrip(")").split("(", 1)
        return IfEstimator(head.upper()), WeightKind.parse(kind)
    return IfEstimator(label.upper()), None


@dataclass(frozen=True)
class InfluenceGrid:
    grid_points: np.ndarray
    if_norms: dict
    estimators: list

    def __post_init__(self):
        m = len(self.grid_points)
        for key, vals in self.if_norms.items():
            if len(vals) != m:
                raise ValidationError(f"{key}: {len(vals)} norms for {m} grid points")
            if np.any(np.asarray(vals) < 0):
                raise ValidationError(f"{key}: negative norm")

    def radii(self, center=None):
        pts = np.asarray(self.grid_points, dtype=float)
        c = np.zeros(pts.shape[1]) if center is None else np.asarray(center, float)
        return np.linalg.norm(pts - c, axis=1)

    def argmax_radius(self, label, center=None, rtol=1e-12):
        """Radius of the grid maximizer, ties broken toward the smallest radius."""
        v = np.asarray(self.if_norms[label])
        top = v.max()
        r = self.radii(center)
        tied = v >= top - rtol * abs(top)
        return float(r[tied].min())

    def max_at_radius(self, label, radius, center=None, atol=1e-9):
        r = self.radii(center)
        sel = np.abs(r - radius) <= atol * max(1.0, radius)
        if not sel.any():
            raise ValidationError(f"no grid points at radius {radius}")
        return float(np.max(np.asarray(self.if_norms[label])[sel]))


@dataclass(frozen=True)
class AsymptoticEigenReport:
    evec_var_blocks: dict
    eval_cov: np.ndarray
    mc_samples: int
    tilde_eigvals: np.ndarray = None
    fourth_moments: np.ndarray = None
    fourth_moments_se: np.ndarray = None
    zero_terms: dict = field(default_factory=dict)

    def evec_var(self, i):
        return self.evec_var_blocks[(i, i)]


@dataclass(frozen=True)
class AreEstimate:
    value: float
    se: float

    def __float__(self):
        return float(self.value)


def population_spec(spec: WeightSpec | str, model: EllipticalModel) -> WeightSpec:
    """Weight spec standardized by the model's own ``(mu, Sigma)``."""
    if not isinstance(spec, WeightSpec):
        spec = WeightSpec(spec)
    if spec.kind == WeightKind.UNIT:
        return spec
    return WeightSpec(spec.kind, model.mu, model.sigma, spec.scale_factor)


class MonteCarloPool:
    """Seeded pool of spherical draws with population weights attached.

    Attributes ``z`` (standardized), ``y = Lambda^{1/2} z`` (eigen
    coordinates), ``s`` (signs of ``y``), ``r = |z|`` and ``w`` (weights).
    """

    def __init__(self, model: EllipticalModel, spec: WeightSpec, mc: int, seed=0, n_batches=10):
        if mc < n_batches * 2:
            raise ValidationError(f"mc must be at least {2 * n_batches}, got {mc}")
        self.model = model
        self.spec = population_spec(spec, model)
        self.lam, self.gamma = model.eigh()
        self.z = sample_spherical(model, mc, make_rng(seed))
        self.r = np.linalg.norm(self.z, axis=1)
        self.y = self.z * np.sqrt(self.lam)
        self.s = spatial_sign(self.y, np.zeros(model.p))
        self.profile = radial_profile(self.spec, model) if self.spec.kind != WeightKind.UNIT else None
        self.w = self.weight_of_radius(self.r)
        self.n_batches = n_batches

    @property
    def mc(self):
        return self.z.shape[0]

    def weight_of_radius(self, r):
        if self.profile is None:
            return np.full(np.shape(r), self.spec.scale_factor, dtype=float)
        return self.profile(r)

    def weight_at(self, x0):
        """Population weight of a point in original coordinates."""
        z0 = self.to_standard(x0)
        return float(self.weight_of_radius(np.linalg.norm(z0)))

    def to_standard(self, x0):
        x0 = np.asarray(x0, dtype=float) - self.model.mu
        return (self.gamma.T @ x0) / np.sqrt(self.lam)

    def to_original(self, y):
        return self.model.mu + y @ self.gamma.T

    def batches(self):
        return np.array_split(np.arange(self.mc), self.n_batches)

    def batch_mean(self, values):
        """Mean over axis 0 and its batch-means standard error."""
        values = np.asarray(values, dtype=float)
        means = np.stack([values[idx].mean(axis=0) for idx in self.batches()])
        return values.mean(axis=0), means.std(axis=0, ddof=1) / math.sqrt(len(means))

    def tilde_eigvals(self):
        """``E[W^2 S_kk]`` in eigen coordinates, with standard errors."""
        return self.batch_mean(self.w[:, None] ** 2 * self.s**2)


def _check_distinct(vals, what):
    gaps = np.abs(np.diff(np.sort(vals)))
    if np.any(gaps < _TIE):
        raise ValidationError(f"{what} are tied within {_TIE:g}: {np.round(vals, 12)}")


def _check_index(i, p):
    if not 0 <= i < p:
        raise ValidationError(f"eigenvector index must be in [0, {p - 1}], got {i}")


def _pool_for(model, spec, mc, seed, pool):
    if pool is not None:
        return pool
    return MonteCarloPool(model, spec, mc, seed)


def _perturbation_if(x0, i, gamma, lam_t, scale, mu):
    """``sum_{k != i} scale * (g_k' s0)(g_i' s0) / (lam_i - lam_k) g_k`` with ``s0`` the sign of ``x0``."""
    s0 = spatial_sign(np.asarray(x0, float)[None, :], mu)[0]
    c = gamma.T @ s0
    out = np.zeros(gamma.shape[0])
    for k in range(gamma.shape[1]):
        if k != i:
            out += scale * c[k] * c[i] / (lam_t[i] - lam_t[k]) * gamma[:, k]
    return out


def if_wscm_eigenvector(x0, i, model: EllipticalModel, spec: WeightSpec, mc=100_000, seed=0, pool=None):
    """Influence function of the ``i``-th WSCM eigenvector at ``x0``.

    ``sum_{k != i} W^2(x0) (g_k' S(x0) g_i) / (lt_i - lt_k) g_k`` with the
    WSCM eigenvalues ``lt`` estimated from the Monte-Carlo pool.
    """
    _check_index(i, model.p)
    _check_distinct(model.eigh()[0], "model eigenvalues")
    pool = _pool_for(model, spec, mc, seed, pool)
    lam_t, _ = pool.tilde_eigvals()
    _check_distinct(lam_t, "WSCM eigenvalues")
    w0 = pool.weight_at(x0)
    return _perturbation_if(x0, i, pool.gamma, lam_t, w0**2, model.mu)


def if_scm_eigenvector(x0, i, model: EllipticalModel, mc=100_000, seed=0, pool=None):
    """Influence function of the ``i``-th SCM eigenvector (unit weights)."""
    pool = pool or MonteCarloPool(model, WeightSpec(WeightKind.UNIT), mc, seed)
    return if_wscm_eigenvector(x0, i, model, WeightSpec(WeightKind.UNIT), pool=pool)


def if_tyler_eigenvector(x0, i, model: EllipticalModel):
    """Closed-form influence function of the ``i``-th Tyler eigenvector.

    ``(p+2) sum_{k != i} sqrt(l_i l_k)/(l_i - l_k) S_ik(z0) g_k`` with
    ``z0`` the standardized ``x0`` in eigen coordinates.
    """
    p = model.p
    _check_index(i, p)
    lam, gamma = model.eigh()
    _check_distinct(lam, "model eigenvalues")
    z0 = (gamma.T @ (np.asarray(x0, float) - model.mu)) / np.sqrt(lam)
    nz = float(z0 @ z0)
    out = np.zeros(p)
    if nz == 0.0:
        return out
    for k in range(p):
        if k != i:
            out += (p + 2) * math.sqrt(lam[i] * lam[k]) / (lam[i] - lam[k]) * (z0[i] * z0[k] / nz) * gamma[:, k]
    return out


def if_cov_eigenvector(x0, i, model: EllipticalModel):
    """Influence function of the ``i``-th sample-covariance eigenvector."""
    _check_index(i, model.p)
    lam, gamma = model.eigh()
    _check_distinct(lam, "model eigenvalues")
    c = gamma.T @ (np.asarray(x0, float) - model.mu)
    out = np.zeros(model.p)
    for k in range(model.p):
        if k != i:
            out += c[k] * c[i] / (lam[i] - lam[k]) * gamma[:, k]
    return out


def _align(v, ref):
    dot = float(v @ ref)
    if abs(dot) < 0.5:
        raise ValidationError(f"eigenvector sign alignment failed (|dot| = {abs(dot):.3f} < 0.5)")
    return v if dot > 0 else -v


def _leading(matrix, i, ref):
    w, v = np.linalg.eigh(_core.sym(matrix))
    order = np.argsort(w)[::-1]
    return _align(v[:, order[i]], ref)


def _check_eps(eps):
    if not 1e-5 <= eps <= 1e-2:
        raise ValidationError(f"eps must be in [1e-5, 1e-2], got {eps}")


def if_wscm_eigenvector_numeric(x0, i, model, spec, eps=1e-4, mc=100_000, seed=0, pool=None, return_se=False):
    """Finite-contamination influence function of the ``i``-th WSCM eigenvector.

    ``(g_i(F_eps) - g_i(F)) / eps`` with ``F`` the Monte-Carlo pool and
    ``F_eps = (1 - eps) F + eps delta_x0``; weights stay those of ``F``.
    """
    _check_index(i, model.p)
    _check_eps(eps)
    pool = _pool_for(model, spec, mc, seed, pool)
    x0 = np.asarray(x0, float)
    s0 = spatial_sign(x0[None, :], model.mu)[0]
    point = pool.weight_at(x0) ** 2 * np.outer(s0, s0)
    ref = pool.gamma[:, i]
    ws = pool.w[:, None] * pool.s

    def one(idx):
        base = pool.gamma @ (ws[idx].T @ ws[idx] / len(idx)) @ pool.gamma.T
        g0 = _leading(base, i, ref)
        g1 = _leading((1 - eps) * base + eps * point, i, ref)
        return (g1 - g0) / eps

    est = one(np.arange(pool.mc))
    if not return_se:
        return est
    reps = np.stack([one(idx) for idx in pool.batches()])
    return est, reps.std(axis=0, ddof=1) / math.sqrt(len(reps))


def _weighted_shape(d, w2, mass, init=None, tol=1e-13, max_iter=2000):
    """Fixed point of ``S = p sum m w2 d d'/(d' S^-1 d) / sum m w2`` up to scale."""
    p = d.shape[1]
    keep = np.einsum("ij,ij->i", d, d) > 0
    d, c = d[keep], (mass * w2)[keep]
    norm = p / np.sum(mass * w2)
    s = np.eye(p) if init is None else init.copy()
    for _ in range(max_iter):
        chol = np.linalg.cholesky(s)
        y = np.linalg.solve(chol, d.T)
        q = np.einsum("ij,ij->j", y, y)
        new = _core.sym(norm * ((c / q)[:, None] * d).T @ d)
        new *= p / np.trace(new)
        delta = np.linalg.norm(new - s) / np.linalg.norm(s)
        s = new
        if delta <= tol:
            return s
    return s


def if_adcm_eigenvector_numeric(x0, i, model, spec, eps=1e-4, mc=100_000, seed=0, pool=None, return_se=False):
    """Finite-contamination influence function of the ``i``-th ADCM eigenvector.

    The ADCM functional of the Monte-Carlo pool, with and without a point mass
    ``eps`` at ``x0``, is solved as a weighted fixed point (weights held at
    their population values) and the aligned eigenvector difference divided
    by ``eps``.
    """
    _check_index(i, model.p)
    _check_eps(eps)
    pool = _pool_for(model, spec, mc, seed, pool)
    if pool.spec.kind == WeightKind.UNIT:
        raise ValidationError("ADCM needs a depth weight")
    x0 = np.asarray(x0, float)
    ref = pool.gamma[:, i]
    w0sq = pool.weight_at(x0) ** 2
    # eigen coordinates throughout; rotate back at the end
    y0 = pool.gamma.T @ (x0 - model.mu)
    ref_y = pool.gamma.T @ ref

    def one(idx):
        y, w2 = pool.y[idx], pool.w[idx] ** 2
        m = np.full(len(idx), 1.0 / len(idx))
        s0 = _weighted_shape(y, w2, m)
        s1 = _weighted_shape(np.vstack([y, y0]), np.append(w2, w0sq), np.append((1 - eps) * m, eps), init=s0)
        g0 = _leading(s0, i, ref_y)
        g1 = _leading(s1, i, ref_y)
        return pool.gamma @ ((g1 - g0) / eps)

    est = one(np.arange(pool.mc))
    if not return_se:
        return est
    reps = np.stack([one(idx) for idx in pool.batches()])
    return est, reps.std(axis=0, ddof=1) / math.sqrt(len(reps))


def eigen_asymptotic_report(model: EllipticalModel, spec: WeightSpec, mc=100_000, seed=0, pool=None):
    """Limiting covariances of WSCM eigenvectors and eigenvalues.

    Eigenvector block ``(i, i)`` is
    ``sum_{k != i} (lt_i - lt_k)^{-2} E[W^4 S_ik^2] g_k g_k'`` and block
    ``(i, j)`` is ``-(lt_i - lt_j)^{-2} E[W^4 S_ij^2] g_j g_i'``.
    Eigenvalue covariance is ``E[W^4 S_ii S_jj] - lt_i lt_j``.  For ``p <= 6``
    the fourth-moment terms that vanish by symmetry are estimated too and
    returned in ``zero_terms`` as ``(index tuple) -> (estimate, se)``.
    """
    if mc < 100_000 and pool is None:
        raise ValidationError(f"mc must be >= 1e5, got {mc}")
    pool = _pool_for(model, spec, mc, seed, pool)
    p = model.p
    lam_t, _ = pool.tilde_eigvals()
    _check_distinct(lam_t, "WSCM eigenvalues")
    a = pool.w[:, None] ** 2 * pool.s**2  # W^2 S_kk per draw
    m4, m4_se = pool.batch_mean(np.einsum("ni,nj->nij", a, a))
    g = pool.gamma
    blocks = {}
    for i in range(p):
        for j in range(p):
            if i == j:
                blk = np.zeros((p, p))
                for k in range(p):
                    if k != i:
                        blk += m4[i, k] / (lam_t[i] - lam_t[k]) ** 2 * np.outer(g[:, k], g[:, k])
            else:
                blk = -m4[i, j] / (lam_t[i] - lam_t[j]) ** 2 * np.outer(g[:, j], g[:, i])
            blocks[(i, j)] = blk
    eval_cov = _core.sym(m4 - np.outer(lam_t, lam_t))
    zero = {}
    if p <= 6:
        w4 = pool.w**4
        for a_ in range(p):
            for b in range(a_, p):
                for c in range(p):
                    for d in range(c, p):
                        if (a_, b) > (c, d):
                            continue
                        counts = np.bincount([a_, b, c, d], minlength=p)
                        if np.all(counts % 2 == 0):
                            continue
                        vals = w4 * pool.s[:, a_] * pool.s[:, b] * pool.s[:, c] * pool.s[:, d]
                        est, se = pool.batch_mean(vals)
                        zero[(a_, b, c, d)] = (float(est), float(se))
    return AsymptoticEigenReport(blocks, eval_cov, pool.mc, lam_t, m4, m4_se, zero)


def classical_inflation(model: EllipticalModel) -> float:
    """``E R^4 / (p (p+2))``: the factor by which ellipticity inflates the
    sample-covariance eigenvector variance over its normal-theory value."""
    p = model.p
    return radius_fourth_moment(model) / (p * (p + 2.0))


def _cov_evec_var(model, i, kurtosis_adjusted=True):
    lam, _ = model.eigh()
    _check_distinct(lam, "model eigenvalues")
    total = sum(lam[i] * lam[k] / (lam[i] - lam[k]) ** 2 for k in range(model.p) if k != i)
    return total * (classical_inflation(model) if kurtosis_adjusted else 1.0)


def _u_profile(pool):
    return lambda r: pool.weight_of_radius(r) ** 2


def _adcm_v12_terms(pool, idx):
    """Per-draw ingredients of the off-diagonal ADCM variance ``V12``."""
    p = pool.model.p
    r = pool.r[idx]
    u = _u_profile(pool)
    h = 1e-5 * r
    du = (u(r + h) - u(r - h)) / (2 * h)
    zr = pool.z[idx]
    s12 = (zr[:, 0] * zr[:, 1] / r**2) ** 2
    num = np.mean(p * u(r) + du * r) ** 2
    den = p**2 * (p + 2) ** 2 * np.mean(u(r) ** 2) * np.mean(s12)
    return den / num


def evec_avar(model: EllipticalModel, estimator, spec: WeightSpec | None = None, i=0, mc=100_000, seed=0,
              kurtosis_adjusted=True, pool=None):
    """Trace of the asymptotic covariance of ``sqrt(n) * gamma_hat_i``.

    ``estimator`` is one of ``cov``, ``scm``, ``wscm``, ``tyler``, ``adcm``.
    Returns an :class:`AreEstimate` holding the value and its Monte-Carlo
    standard error (zero for closed forms).
    """
    est = str(estimator).lower()
    p = model.p
    _check_index(i, p)
    lam, _ = model.eigh()
    _check_distinct(lam, "model eigenvalues")
    if est == "cov":
        return AreEstimate(_cov_evec_var(model, i, kurtosis_adjusted), 0.0)
    base = sum(lam[i] * lam[k] / (lam[i] - lam[k]) ** 2 for k in range(p) if k != i)
    if est == "tyler":
        return AreEstimate(base * (p + 2.0) / p, 0.0)
    if est == "scm":
        spec = WeightSpec(WeightKind.UNIT)
        est = "wscm"
    if spec is None:
        raise ValidationError(f"{estimator} needs a weight spec")
    pool = _pool_for(model, spec, mc, seed, pool)
    if est == "wscm":
        def value(idx):
            a = pool.w[idx, None] ** 2 * pool.s[idx] ** 2
            lt = a.mean(axis=0)
            m4 = a.T @ a / len(idx)
            return sum(m4[i, k] / (lt[i] - lt[k]) ** 2 for k in range(p) if k != i)
    elif est == "adcm":
        if pool.spec.kind == WeightKind.UNIT:
            return AreEstimate(base * (p + 2.0) / p, 0.0)
        if p < 2:
            raise ValidationError("ADCM eigenvectors need p >= 2")

        def value(idx):
            return base * _adcm_v12_terms(pool, idx)
    else:
        raise ValidationError(f"unknown estimator {estimator!r}")
    full = value(np.arange(pool.mc))
    parts = np.array([value(idx) for idx in pool.batches()])
    return AreEstimate(float(full), float(parts.std(ddof=1) / math.sqrt(len(parts))))


def evec_are(model, estimator, spec=None, i=0, mc=100_000, seed=0, kurtosis_adjusted=True, pool=None,
             reference="cov"):
    """Asymptotic efficiency of ``estimator``'s ``i``-th eigenvector relative
    to ``reference`` (sample covariance by default): the variance ratio."""
    num = evec_avar(model, reference, spec, i, mc, seed, kurtosis_adjusted, pool)
    den = evec_avar(model, estimator, spec, i, mc, seed, kurtosis_adjusted, pool)
    value = num.value / den.value
    se = value * math.hypot(num.se / num.value, den.se / den.value)
    return AreEstimate(value, se)


def evec_are_wscm(model, spec, i=0, mc=100_000, seed=0, kurtosis_adjusted=True, pool=None):
    """Eigenvector efficiency of the WSCM relative to the sample covariance.

    With ``kurtosis_adjusted=False`` the classical variance is the
    normal-theory ``sum l_i l_k / (l_i - l_k)^2``; by default it is inflated
    by :func:`classical_inflation`, the correct value under ``model``.
    """
    return evec_are(model, "wscm", spec, i, mc, seed, kurtosis_adjusted, pool)


def evec_are_adcm(model, spec, mc=1_000_000, seed=0, kurtosis_adjusted=True, pool=None):
    """Eigenvector efficiency of the ADCM relative to the sample covariance.

    ``[E(p u + u' r)]^2 / (p^2 (p+2)^2 E u^2 E S_12^2)`` with ``u = W^2`` as a
    function of the standardized radius and ``u'`` by central differences
    (step ``1e-5 r``).  By default multiplied by :func:`classical_inflation`;
    the unadjusted value is the ratio against normal-theory sample
    covariance variance.  Index-free: the ratio is the same for every
    eigenvector.
    """
    pool = _pool_for(model, spec, mc, seed, pool)
    full = 1.0 / _adcm_v12_terms(pool, np.arange(pool.mc))
    parts = np.array([1.0 / _adcm_v12_terms(pool, idx) for idx in pool.batches()])
    factor = classical_inflation(model) if kurtosis_adjusted else 1.0
    se = parts.std(ddof=1) / math.sqrt(len(parts))
    return AreEstimate(float(full * factor), float(se * factor))


def polar_grid(radii, n_angles=72, center=None):
    """Points on circles of the given radii (2-D), same angles on each circle."""
    radii = np.asarray(radii, dtype=float)
    theta = np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False)
    pts = np.array([[r * np.cos(t), r * np.sin(t)] for r in radii for t in theta])
    return pts if center is None else pts + np.asarray(center, float)


def cartesian_grid(limit=5.0, step=0.25, p=2):
    ax = np.arange(-limit, limit + step / 2, step)
    mesh = np.meshgrid(*([ax] * p), indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def influence_grid(model: EllipticalModel, grid_points, estimators, i=0, mc=100_000, seed=0, eps=1e-4):
    """Eigenvector influence-function norms over a set of points.

    ``estimators`` holds labels such as ``"SAMPLE_COV_EVEC"``, ``"TYLER_EVEC"``
    or ``"WSCM_EVEC(PD)"``.  The ADCM entries are numerical and therefore
    slow on large grids.
    """
    pts = np.atleast_2d(np.asarray(grid_points, dtype=float))
    labels, norms = [], {}
    pools = {}
    for label in estimators:
        est, kind = parse_estimator_label(label) if isinstance(label, str) else label
        key = _estimator_label(est, kind)
        labels.append(key)
        if est in (IfEstimator.WSCM_EVEC, IfEstimator.ADCM_EVEC, IfEstimator.SCM_EVEC):
            k = kind if kind is not None else WeightKind.UNIT
            if k not in pools:
                pools[k] = MonteCarloPool(model, WeightSpec(k), mc, seed)
            pool = pools[k]
        if est == IfEstimator.SAMPLE_COV_EVEC:
            f = lambda x: if_cov_eigenvector(x, i, model)  # noqa: E731
        elif est == IfEstimator.TYLER_EVEC:
            f = lambda x: if_tyler_eigenvector(x, i, model)  # noqa: E731
        elif est in (IfEstimator.SCM_EVEC, IfEstimator.WSCM_EVEC):
            f = lambda x, pool=pool: if_wscm_eigenvector(x, i, model, pool.spec, pool=pool)  # noqa: E731
        else:
            f = lambda x, pool=pool: if_adcm_eigenvector_numeric(x, i, model, pool.spec, eps, pool=pool)  # noqa: E731
        norms[key] = [float(np.linalg.norm(f(x))) for x in pts]
    return InfluenceGrid(pts, norms, labels)
