"""Spatial signs and depth-derived peripherality weights.

Weights are functions of the standardized radius
``r = |shape^{-1/2} (x - center)|``:

========  ==========================  ============================
kind      weight                      bound
========  ==========================  ============================
UNIT      1                           1
MHD       r^2 / (1 + r^2)             1
HSD       F_{Z1}(r)                   1
PD        r / (1 + r / m)             m
NORM      |x - center| (unstandard.)  unbounded, tests only
========  ==========================  ============================

``F_{Z1}`` is the CDF of one coordinate of the standardized spherical law and
``m`` its median absolute deviation.  In *population* mode both come from an
:class:`~wsign.elliptical.EllipticalModel`.  In *empirical* mode they are
reconstructed from the standardized radii of a reference sample: for a
spherical law ``Z_1 = R U_1`` with ``U_1`` the first coordinate of a uniform
point on the sphere, so ``F_{Z1}(t) = E G_p(t / R)`` and the plug-in replaces
the expectation with the average over observed radii.  This keeps the
empirical weights affine invariant.  All weights are multiplied by
``scale_factor``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize, special, stats

from . import _core
from .elliptical import EllipticalModel, check_spd, inv_sqrt_psd, marginal_mad, radial_cdf
from .errors import ValidationError

__all__ = [
    "WeightKind",
    "WeightSpec",
    "WeightedSign",
    "SphericalMarginal",
    "spatial_sign",
    "standardized_radii",
    "weight",
    "weights",
    "weighted_signs",
    "pilot_spec",
    "resolve_spec",
    "weight_bound",
]


class WeightKind(str, enum.Enum):
    UNIT = "UNIT"
    HSD = "HSD"
    MHD = "MHD"
    PD = "PD"
    NORM = "NORM"

    @classmethod
    def parse(cls, value) -> "WeightKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValidationError(f"unknown weight kind {value!r}") from None

    @property
    def is_depth(self) -> bool:
        return self in (WeightKind.HSD, WeightKind.MHD, WeightKind.PD)


@dataclass(frozen=True)
class WeightSpec:
    """Weight function plus the standardization pair it is evaluated in.

    ``center``/``shape`` may be left as ``None`` and filled in from data by
    :func:`resolve_spec`.
    """

    kind: WeightKind = WeightKind.UNIT
    center: np.ndarray | None = None
    shape: np.ndarray | None = None
    scale_factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", WeightKind.parse(self.kind))
        if not self.scale_factor > 0:
            raise ValidationError(f"scale_factor must be positive, got {self.scale_factor}")
        if self.center is not None:
            object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(-1))
        if self.shape is not None:
            object.__setattr__(self, "shape", check_spd(self.shape, "shape"))
            if self.center is not None and self.center.shape[0] != self.shape.shape[0]:
                raise ValidationError("center and shape dimensions differ")

    @property
    def resolved(self) -> bool:
        return self.center is not None and (self.shape is not None or self.kind == WeightKind.NORM)

    def transformed(self, a, b) -> "WeightSpec":
        """Spec for data mapped by ``x -> a x + b``."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        center = None if self.center is None else a @ self.center + b
        shape = None if self.shape is None else a @ self.shape @ a.T
        return replace(self, center=center, shape=shape)

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "scale": self.scale_factor}
        if self.center is not None:
            d["center"] = self.center.tolist()
        if self.shape is not None:
            d["shape"] = self.shape.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSpec":
        return cls(
            kind=d.get("kind", "UNIT"),
            center=d.get("center"),
            shape=d.get("shape"),
            scale_factor=float(d.get("scale", 1.0)),
        )


@dataclass(frozen=True)
class WeightedSign:
    sign: np.ndarray
    weight: float
    product: np.ndarray


def spatial_sign(x, mu):
    """``(x - mu) / |x - mu|``, or zero where ``x == mu``.

    Works on a single vector or rowwise on a matrix.
    """
    d = np.asarray(x, dtype=float) - np.asarray(mu, dtype=float)
    norm = np.linalg.norm(d, axis=-1, keepdims=True)
    out = np.zeros_like(d)
    np.divide(d, norm, out=out, where=norm > 1e-300)
    return out


def _sphere_coordinate_cdf(s, p):
    """CDF of the first coordinate of a uniform point on the unit sphere in R^p."""
    s = np.asarray(s, dtype=float)
    if p == 1:
        return np.where(s >= 1, 1.0, np.where(s >= -1, 0.5, 0.0))
    a = (p - 1) / 2.0
    return special.betainc(a, a, np.clip((s + 1) / 2, 0.0, 1.0))


class SphericalMarginal:
    """Plug-in CDF of ``Z_1`` built from standardized radii.

    ``cdf(t) = mean_i G_p(t / r_i)``.  In one dimension this is the empirical
    CDF of the symmetrized sample ``{+-z_i}``.
    """

    _exact_limit = 2_000_000

    def __init__(self, radii, p: int):
        r = np.sort(np.asarray(radii, dtype=float).reshape(-1))
        if r.size == 0:
            raise ValidationError("empty radius sample")
        self.radii = r
        self.p = int(p)
        self._grid = None

    def _exact(self, t):
        t = np.asarray(t, dtype=float).reshape(-1)
        out = np.empty_like(t)
        r = self.radii
        pos = r > 0
        n0 = np.count_nonzero(~pos)
        rp = r[pos]
        step = max(1, self._exact_limit // max(rp.size, 1))
        for lo in range(0, t.size, step):
            tt = t[lo:lo + step]
            s = _sphere_coordinate_cdf(tt[:, None] / rp[None, :], self.p).sum(axis=1)
            # a zero radius is a point mass of Z_1 at 0
            s += n0 * np.where(tt > 0, 1.0, np.where(tt == 0, 0.5, 0.0))
            out[lo:lo + step] = s / r.size
        return out

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        flat = np.abs(t.reshape(-1))
        if self.p == 1:
            k = np.searchsorted(self.radii, flat, side="right")
            vals = 0.5 + 0.5 * k / self.radii.size
        elif flat.size * self.radii.size <= self._exact_limit:
            vals = self._exact(flat)
        else:
            if self._grid is None:
                g = np.unique(np.concatenate([[0.0], np.quantile(self.radii, np.linspace(0, 1, 801))]))
                g = np.concatenate([g, [g[-1] * 2 + 1.0]])
                self._grid = (g, self._exact(g))
            g, v = self._grid
            vals = np.interp(flat, g, v, right=1.0)
        vals = np.where(t.reshape(-1) < 0, 1.0 - vals, vals)
        vals = vals.reshape(t.shape)
        return vals if vals.ndim else float(vals)

    def ppf(self, q: float) -> float:
        hi = float(self.radii[-1]) * 2 + 1.0
        if self.cdf(0.0) >= q:
            return 0.0
        return float(optimize.brentq(lambda t: self.cdf(t) - q, 0.0, hi, xtol=1e-12, rtol=1e-12))

    def mad(self) -> float:
        return self.ppf(0.75)


def standardized_radii(spec: WeightSpec, x) -> np.ndarray:
    """Mahalanobis radii of rows of ``x`` under ``(spec.center, spec.shape)``."""
    x = np.asarray(x, dtype=float)
    d = x - spec.center
    if spec.kind == WeightKind.NORM:
        return np.linalg.norm(d, axis=-1)
    z = d @ inv_sqrt_psd(spec.shape)
    return np.linalg.norm(z, axis=-1)


def _radial_weight(kind, r, cdf, mad):
    if kind == WeightKind.UNIT:
        return np.ones_like(r)
    if kind == WeightKind.MHD:
        r2 = r * r
        return r2 / (1.0 + r2)
    if kind == WeightKind.PD:
        return r / (1.0 + r / mad)
    if kind == WeightKind.HSD:
        return cdf(r)
    if kind == WeightKind.NORM:
        return r
    raise ValidationError(f"unsupported weight kind {kind}")


def radial_profile(spec: WeightSpec, model: EllipticalModel | None = None, reference=None, p=None):
    """Return ``r -> W(r)`` for the spec's kind.

    ``model`` selects population mode.  Otherwise ``reference`` (rows of data)
    or a :class:`SphericalMarginal` supplies the empirical marginal.
    """
    kind = spec.kind
    cdf = mad = None
    if kind in (WeightKind.HSD, WeightKind.PD):
        if model is not None:
            cdf = lambda r: radial_cdf(model, r)  # noqa: E731
            mad = marginal_mad(model) if kind == WeightKind.PD else None
        else:
            if isinstance(reference, SphericalMarginal):
                marg = reference
            elif reference is None:
                raise ValidationError(f"{kind.value} weights need a model or reference data")
            else:
                ref = np.atleast_2d(np.asarray(reference, dtype=float))
                marg = SphericalMarginal(standardized_radii(spec, ref), ref.shape[1])
            cdf = marg.cdf
            mad = marg.mad() if kind == WeightKind.PD else None
    factor = spec.scale_factor

    def profile(r):
        return factor * _radial_weight(kind, np.asarray(r, dtype=float), cdf, mad)

    profile.mad = mad
    return profile


def weights(spec: WeightSpec, x, model: EllipticalModel | None = None, reference=None) -> np.ndarray:
    """Vectorized weights of the rows of ``x``.

    Empirical mode (no ``model``) uses ``reference`` data, defaulting to
    ``x`` itself.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if not np.all(np.isfinite(x)):
        raise ValidationError("non-finite input")
    if spec.kind == WeightKind.UNIT:
        return np.full(x.shape[0], spec.scale_factor)
    if not spec.resolved:
        raise ValidationError("weight spec has no center/shape; call resolve_spec first")
    if spec.center.shape[0] != x.shape[1]:
        raise ValidationError(f"spec dimension {spec.center.shape[0]} != data dimension {x.shape[1]}")
    r = standardized_radii(spec, x)
    if model is None and reference is None:
        reference = SphericalMarginal(r, x.shape[1]) if spec.kind != WeightKind.NORM else None
    return radial_profile(spec, model, reference)(r)


def weight(spec: WeightSpec, x, model: EllipticalModel | None = None, reference=None) -> float:
    """Weight of a single point ``x``; see :func:`weights`."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if model is None and reference is None and spec.kind in (WeightKind.HSD, WeightKind.PD):
        raise ValidationError(f"{spec.kind.value} weight of a single point needs a model or reference data")
    return float(weights(spec, x, model, reference)[0])


def weight_bound(spec: WeightSpec, mad: float | None = None) -> float:
    """Upper bound of the weight function (``inf`` for NORM)."""
    if spec.kind == WeightKind.PD:
        return spec.scale_factor * mad
    if spec.kind == WeightKind.NORM:
        return np.inf
    return spec.scale_factor


def weighted_signs(x, spec: WeightSpec, mu, model=None) -> list[WeightedSign]:
    """Rowwise weighted signs ``W(X_i) S(X_i; mu)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.shape[0] != x.shape[1]:
        raise ValidationError(f"mu has length {mu.shape[0]}, data has {x.shape[1]} columns")
    spec = resolve_spec(spec, x)
    w = weights(spec, x, model)
    s = spatial_sign(x, mu)
    return [WeightedSign(s[i], float(w[i]), w[i] * s[i]) for i in range(x.shape[0])]


def pilot_spec(x, kind, scale_factor=1.0, tol=1e-9, max_iter=500) -> WeightSpec:
    """Robust standardization pair estimated from the data.

    Coordinatewise median, then Tyler's shape about it; one refinement step
    replaces the center by the spatial median computed in the standardized
    coordinates and recomputes the shape.  The shape is finally scaled so
    the median squared radius equals the chi-square(p) median, which makes
    radii comparable to Mahalanobis distances under normality.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n, p = x.shape
    if n <= p:
        raise ValidationError(f"need n > p for a pilot standardization, got n={n}, p={p}")
    center = np.median(x, axis=0)
    shape, _, _ = _core.tyler_fixed_point(x - center, tol=tol, max_iter=max_iter)
    root = inv_sqrt_psd(shape)
    z = (x - center) @ root
    zc, _, _ = _core.weiszfeld(z, np.ones(n), init=np.zeros(p), tol=tol, max_iter=max_iter)
    center = center + zc @ np.linalg.inv(root)
    shape, _, _ = _core.tyler_fixed_point(x - center, tol=tol, max_iter=max_iter, init=shape)
    r2 = np.einsum("ij,ij->i", (x - center) @ np.linalg.inv(shape), x - center)
    shape = shape * (np.median(r2) / stats.chi2.ppf(0.5, p))
    return WeightSpec(kind, center, _core.sym(shape), scale_factor)


def resolve_spec(spec: WeightSpec, x) -> WeightSpec:
    """Fill a spec's missing center/shape from data via :func:`pilot_spec`."""
    if spec.kind == WeightKind.UNIT or spec.resolved:
        return spec
    if spec.kind == WeightKind.NORM:
        raise ValidationError("NORM weights need an explicit center")
    pilot = pilot_spec(x, spec.kind, spec.scale_factor)
    return replace(spec, center=pilot.center, shape=pilot.shape)
