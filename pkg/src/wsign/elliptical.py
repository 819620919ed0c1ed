"""Elliptical models: sampling, standardization and marginal CDFs.

A draw is ``X = mu + R * Gamma Lambda^{1/2} U`` with ``U`` uniform on the unit
sphere and ``R`` an independent radius with ``E R^2 = p``, so ``sigma`` is the
covariance matrix.  Two square roots of ``sigma`` appear in the package:

* the symmetric root ``Gamma Lambda^{1/2} Gamma^T`` (used for sampling and
  for standardizing data, see :func:`sqrt_psd` / :func:`inv_sqrt_psd`), and
* the eigen-coordinate root ``Lambda^{-1/2} Gamma^T`` used by the asymptotic
  formulas, which rotates standardized points into the eigenbasis.

They differ by the rotation ``Gamma``; everything built on radii or on
spatial signs in the eigenbasis is invariant to that choice.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import ValidationError

__all__ = [
    "EllipticalModel",
    "SphericalSample",
    "make_rng",
    "sample",
    "sample_spherical",
    "radial_cdf",
    "radial_ppf",
    "marginal_mad",
    "radius_fourth_moment",
    "sqrt_psd",
    "inv_sqrt_psd",
    "check_spd",
]


def make_rng(seed) -> np.random.Generator:
    """Counter-based Philox generator; ``seed`` may be an int or a sequence."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def check_spd(matrix, name="matrix", rtol=1e-12) -> np.ndarray:
    """Validate a symmetric positive definite matrix and return it as float array."""
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    scale = max(np.max(np.abs(a)), 1e-300)
    if np.max(np.abs(a - a.T)) > rtol * scale:
        raise ValidationError(f"{name} is not symmetric")
    evals = np.linalg.eigvalsh(a)
    if evals[0] <= 0:
        raise ValidationError(
            f"{name} is not positive definite: smallest eigenvalue {evals[0]:.6g} "
            f"(eigenvalues {np.array2string(evals, precision=6)})"
        )
    return a


def sqrt_psd(a) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.T


def inv_sqrt_psd(a) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    if w[0] <= 0:
        raise ValidationError(f"matrix not positive definite (eigenvalue {w[0]:.6g})")
    return (v / np.sqrt(w)) @ v.T


@dataclass(frozen=True)
class EllipticalModel:
    """Normal or Student-t elliptical law with covariance ``sigma``.

    ``dof=None`` means Normal.  For Student-t the scale matrix is
    ``sigma * (dof - 2) / dof`` so that ``sigma`` is the covariance.
    """

    mu: np.ndarray
    sigma: np.ndarray
    dof: int | None = None
    p: int = field(init=False)

    def __post_init__(self):
        sigma = check_spd(self.sigma, "sigma")
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        if mu.shape[0] != sigma.shape[0]:
            raise ValidationError(f"mu has length {mu.shape[0]}, sigma is {sigma.shape}")
        if self.dof is not None:
            if int(self.dof) != self.dof or self.dof < 3:
                raise ValidationError(f"Student-t dof must be an integer >= 3, got {self.dof}")
            object.__setattr__(self, "dof", int(self.dof))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "p", mu.shape[0])

    @classmethod
    def normal(cls, mu, sigma):
        return cls(mu, sigma, None)

    @classmethod
    def student_t(cls, dof, mu, sigma):
        return cls(mu, sigma, dof)

    @property
    def family(self) -> str:
        return "normal" if self.dof is None else "t"

    @property
    def name(self) -> str:
        return "MVN" if self.dof is None else f"t{self.dof}"

    def eigh(self):
        """Eigenvalues (descending) and matching eigenvector columns of sigma."""
        w, v = np.linalg.eigh(self.sigma)
        order = np.argsort(w)[::-1]
        return w[order], v[:, order]

    def standardize(self, x) -> np.ndarray:
        """Symmetric-root standardization ``sigma^{-1/2} (x - mu)``, rowwise."""
        return (np.asarray(x, dtype=float) - self.mu) @ inv_sqrt_psd(self.sigma)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "dof": self.dof,
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EllipticalModel":
        family = d.get("family", "normal")
        sigma = np.asarray(d["sigma"], dtype=float)
        if sigma.ndim == 1:
            sigma = np.diag(sigma)
        mu = d.get("mu")
        mu = np.zeros(sigma.shape[0]) if mu is None else mu
        if family == "normal":
            return cls.normal(mu, sigma)
        if family == "t":
            return cls.student_t(d["dof"], mu, sigma)
        raise ValidationError(f"unknown family {family!r}")

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class SphericalSample:
    """Standardized draw split into radius and direction."""

    z: np.ndarray
    r: float
    u: np.ndarray

    @classmethod
    def from_z(cls, z):
        z = np.asarray(z, dtype=float)
        r = float(np.linalg.norm(z))
        if r == 0.0:
            return cls(z, 0.0, np.zeros_like(z))
        return cls(z, r, z / r)


def sample_spherical(model: EllipticalModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` draws of ``Z`` with identity covariance for ``model``'s family."""
    z = rng.standard_normal((n, model.p))
    if model.dof is not None:
        nu = model.dof
        # scale-mixture of normals, rescaled to unit variance
        w = np.sqrt(rng.chisquare(nu, size=n) / (nu - 2))
        z /= w[:, None]
    return z


def sample(model: EllipticalModel, n: int, seed=None, rng: np.random.Generator | None = None):
    """Draw ``n`` i.i.d. rows from ``model``.

    Deterministic for a fixed ``seed``; pass ``rng`` instead to continue an
    existing stream.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if rng is None:
        rng = make_rng(seed)
    z = sample_spherical(model, n, rng)
    return model.mu + z @ sqrt_psd(model.sigma)


def _t_scale(dof):
    return np.sqrt((dof - 2.0) / dof)


def radial_cdf(model: EllipticalModel, r):
    """CDF of the standardized univariate marginal ``Z_1``, evaluated at ``r``.

    Standard normal for Normal models; a Student-t rescaled to unit variance
    otherwise.  Accepts scalars or arrays.
    """
    r = np.asarray(r, dtype=float)
    if model.dof is None:
        out = stats.norm.cdf(r)
    else:
        out = stats.t.cdf(r / _t_scale(model.dof), model.dof)
    return out if out.ndim else float(out)


def radial_ppf(model: EllipticalModel, q):
    q = np.asarray(q, dtype=float)
    if model.dof is None:
        out = stats.norm.ppf(q)
    else:
        out = stats.t.ppf(q, model.dof) * _t_scale(model.dof)
    return out if out.ndim else float(out)


def marginal_mad(model: EllipticalModel) -> float:
    """Unscaled median absolute deviation of ``Z_1`` (0.6744898 for Normal)."""
    return float(radial_ppf(model, 0.75))


def radius_fourth_moment(model: EllipticalModel) -> float:
    """``E R^4`` for the standardized radius (``E R^2 = p``)."""
    p = model.p
    base = p * (p + 2.0)
    if model.dof is None:
        return base
    nu = model.dof
    if nu <= 4:
        return np.inf
    return base * (nu - 2.0) / (nu - 4.0)
