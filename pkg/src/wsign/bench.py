"""Monte-Carlo experiments: first-eigenvector efficiency and SDR prediction.

Replications are paired (every estimator sees the same sample) and seeded
by ``SeedSequence([seed, n, rep])`` so results do not depend on the number
of worker processes.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .depth_weights import WeightKind, WeightSpec, pilot_spec, weights
from .elliptical import EllipticalModel, sample
from .errors import ConvergenceError, ValidationError
from .location import weighted_spatial_median
from .scatter import adcm, sample_cov, scm, tyler, wscm

log = logging.getLogger(__name__)

__all__ = [
    "FSE_ESTIMATORS",
    "FseExperiment",
    "FseResult",
    "prediction_angle",
    "fit_first_eigvecs",
    "run_fse",
    "SdrBenchmark",
    "SdrBenchmarkResult",
    "sdr_data",
    "run_sdr_benchmark",
]

FSE_ESTIMATORS = (
    "scm", "tyler",
    "wscm-HSD", "wscm-MHD", "wscm-PD",
    "adcm-HSD", "adcm-MHD", "adcm-PD",
    "cov",
)
SDR_P_VALUES = (5, 10, 25, 50, 75, 100, 125, 150)


def prediction_angle(gamma_true, gamma_hat) -> float:
    """Smallest angle between two unit vectors' lines, in ``[0, pi/2]``."""
    a = np.asarray(gamma_true, dtype=float)
    b = np.asarray(gamma_hat, dtype=float)
    for v, name in ((a, "gamma_true"), (b, "gamma_hat")):
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ValidationError(f"{name} must have unit norm, got {np.linalg.norm(v):.12g}")
    return float(np.arccos(np.clip(abs(a @ b), 0.0, 1.0)))


def _rep_rng(seed, *keys):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


def _split(label):
    if "-" in label:
        est, kind = label.split("-", 1)
        return est.lower(), WeightKind.parse(kind)
    return label.lower(), None


@dataclass(frozen=True)
class FseExperiment:
    model: EllipticalModel
    n_list: tuple = (20, 50, 100, 300, 500)
    reps: int = 2000
    estimators: tuple = FSE_ESTIMATORS
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.reps < 100:
            raise ValidationError(f"reps must be >= 100, got {self.reps}")
        lam, _ = self.model.eigh()
        if np.any(np.abs(np.diff(lam)) < 1e-10):
            raise ValidationError("model covariance must have distinct eigenvalues")
        if any(n <= self.model.p for n in self.n_list):
            raise ValidationError("every n must exceed p")
        for label in self.estimators:
            est, kind = _split(label)
            if est not in ("scm", "tyler", "cov", "wscm", "adcm"):
                raise ValidationError(f"unknown estimator {label!r}")
            if est in ("wscm", "adcm") and (kind is None or not kind.is_depth):
                raise ValidationError(f"{label!r} needs a depth weight suffix (-HSD, -MHD or -PD)")
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "estimators", tuple(self.estimators))

    def to_dict(self):
        return {
            "model": self.model.to_dict(),
            "n_list": list(self.n_list),
            "reps": self.reps,
            "estimators": list(self.estimators),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d, threads=None):
        return cls(
            model=EllipticalModel.from_dict(d["model"]),
            n_list=tuple(d.get("n_list", (20, 50, 100, 300, 500))),
            reps=int(d.get("reps", 2000)),
            estimators=tuple(d.get("estimators", FSE_ESTIMATORS)),
            seed=int(d.get("seed", 0)),
            threads=threads,
        )


@dataclass(frozen=True)
class FseResult:
    mspa: dict
    fse: dict
    mc_standard_errors: dict
    failures: dict = field(default_factory=dict)
    reps_used: dict = field(default_factory=dict)
    angles: dict = field(default_factory=dict, repr=False)

    def table_rows(self, estimators=None):
        """Rows ``(n, fse...)`` one per sample size (sample covariance omitted)."""
        estimators = [e for e in (estimators or self.fse) if e != "cov"]
        n_list = sorted(next(iter(self.fse.values())))
        return estimators, [(n, [self.fse[e][n] for e in estimators]) for n in n_list]


def fit_first_eigvecs(x, estimators=FSE_ESTIMATORS):
    """First eigenvector of each estimator on one sample.

    The pilot standardization is shared by all depth kinds; every estimator
    is centered at the weighted spatial median of its own weight kind.
    """
    labels = [_split(lab) for lab in estimators]
    kinds = sorted({k for _, k in labels if k is not None}, key=lambda k: k.value)
    unit_loc = None
    if any(e in ("scm", "tyler") for e, _ in labels):
        unit_loc = weighted_spatial_median(x).q_hat
    fits = {}
    if kinds:
        base = pilot_spec(x, kinds[0])
        for kind in kinds:
            spec = WeightSpec(kind, base.center, base.shape)
            w = weights(spec, x)
            fits[kind] = (spec, w, weighted_spatial_median(x, spec, w=w).q_hat)
    out = {}
    for label, (est, kind) in zip(estimators, labels):
        if est == "scm":
            f = scm(x, unit_loc)
        elif est == "tyler":
            f = tyler(x, unit_loc)
        elif est == "cov":
            f = sample_cov(x)
        else:
            spec, w, mu = fits[kind]
            f = wscm(x, spec, mu, w=w) if est == "wscm" else adcm(x, spec, mu, w=w, check_conditions=False)
        out[label] = f.first_eigvec
    return out


def _fse_chunk(args):
    model, n, estimators, seed, reps = args
    gamma = model.eigh()[1][:, 0]
    rows, failed = [], []
    for rep in reps:
        x = sample(model, n, rng=_rep_rng(seed, n, rep))
        try:
            vecs = fit_first_eigvecs(x, estimators)
        except (ConvergenceError, ValidationError, np.linalg.LinAlgError) as exc:
            log.debug("replication %d (n=%d) dropped: %s", rep, n, exc)
            failed.append(rep)
            continue
        rows.append((rep, [prediction_angle(gamma, vecs[e]) for e in estimators]))
    return rows, failed


def _jackknife_ratio(a, b):
    """Delete-one jackknife SE of ``mean(a) / mean(b)``."""
    m = len(a)
    sa, sb = a.sum(), b.sum()
    loo = (sa - a) / (sb - b)
    return float(math.sqrt((m - 1) / m * np.sum((loo - loo.mean()) ** 2)))


def _map(fn, tasks, threads):
    threads = threads or os.cpu_count() or 1
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, tasks))


def run_fse(exp: FseExperiment, chunk=50) -> FseResult:
    """Finite-sample efficiency of first eigenvectors against the sample covariance.

    ``MSPA = mean(angle^2)`` over replications and ``FSE = MSPA(cov) / MSPA``.
    Standard errors are delete-one jackknife over replications.  A
    replication where any estimator fails is dropped for all of them.
    """
    estimators = list(exp.estimators)
    if "cov" not in estimators:
        estimators.append("cov")
    mspa, fse, se, failures, used, angles = {}, {}, {}, {}, {}, {}
    for e in estimators:
        mspa[e], fse[e], se[e], angles[e] = {}, {}, {}, {}
    for n in exp.n_list:
        tasks = [(exp.model, n, estimators, exp.seed, range(s, min(s + chunk, exp.reps)))
                 for s in range(0, exp.reps, chunk)]
        rows, failed = [], []
        for r, f in _map(_fse_chunk, tasks, exp.threads):
            rows.extend(r)
            failed.extend(f)
        rows.sort()
        failures[n], used[n] = len(failed), len(rows)
        if not rows:
            raise ConvergenceError(f"every replication failed at n={n}")
        ang = np.array([a for _, a in rows])
        sq = ang**2
        base = sq[:, estimators.index("cov")]
        for j, e in enumerate(estimators):
            angles[e][n] = ang[:, j]
            mspa[e][n] = float(sq[:, j].mean())
            fse[e][n] = float(base.mean() / sq[:, j].mean())
            se[e][n] = _jackknife_ratio(base, sq[:, j]) if e != "cov" else 0.0
        log.info("n=%d: %d replications, %d dropped", n, len(rows), len(failed))
    return FseResult(mspa, fse, se, failures, used, angles)


# --- sufficient dimension reduction benchmark ---------------------------------

def sdr_data(p, n, rng, outliers=False):
    """Draw ``(x, y)`` with ``Y ~ N(0,1)`` and ``X | Y ~ N((Y + Y^2 + Y^3) 1_p, 25 I)``.

    With ``outliers`` the first ``p // 5`` coordinates of the first 10 rows
    get 100 added.
    """
    y = rng.standard_normal(n)
    x = (y + y**2 + y**3)[:, None] + 5.0 * rng.standard_normal((n, p))
    if outliers:
        x[:10, : p // 5] += 100.0
    return x, y


@dataclass(frozen=True)
class SdrBenchmark:
    p_list: tuple = (5, 25, 100)
    n: int = 200
    n_test: int = 200
    reps: int = 100
    outliers: bool = False
    seed: int = 0
    weight: str = "PD"
    d: int = 1
    threads: int | None = None

    def __post_init__(self):
        bad = [p for p in self.p_list if p not in SDR_P_VALUES]
        if bad:
            raise ValidationError(f"p values {bad} not in {SDR_P_VALUES}")
        if self.reps < 1:
            raise ValidationError("reps must be >= 1")


@dataclass(frozen=True)
class SdrBenchmarkResult:
    p_list: tuple
    robust: dict
    classical: dict
    robust_se: dict
    classical_se: dict


def _sdr_rep(args):
    from .sdr import fit_sdr, fit_sdr_classical, predict_many

    bench, p, rep = args
    rng = _rep_rng(bench.seed, p, rep, int(bench.outliers))
    x, y = sdr_data(p, bench.n, rng, bench.outliers)
    xt, yt = sdr_data(p, bench.n_test, rng, False)
    robust = fit_sdr(x, y, bench.d, WeightSpec(bench.weight))
    classical = fit_sdr_classical(x, y, bench.d)
    e_r = float(np.mean((predict_many(robust, xt) - yt) ** 2))
    e_c = float(np.mean((predict_many(classical, xt) - yt) ** 2))
    return p, rep, e_r, e_c


def run_sdr_benchmark(bench: SdrBenchmark) -> SdrBenchmarkResult:
    """Test-set mean squared prediction error of robust and classical SDR.

    Training sets optionally carry the planted outliers; test sets are clean.
    """
    tasks = [(bench, p, rep) for p in bench.p_list for rep in range(bench.reps)]
    out = sorted(_map(_sdr_rep, tasks, bench.threads), key=lambda t: (t[0], t[1]))
    robust, classical, rse, cse = {}, {}, {}, {}
    for p in bench.p_list:
        er = np.array([o[2] for o in out if o[0] == p])
        ec = np.array([o[3] for o in out if o[0] == p])
        robust[p], classical[p] = float(er.mean()), float(ec.mean())
        k = len(er)
        rse[p] = float(er.std(ddof=1) / math.sqrt(k)) if k > 1 else float("nan")
        cse[p] = float(ec.std(ddof=1) / math.sqrt(k)) if k > 1 else float("nan")
    return SdrBenchmarkResult(tuple(bench.p_list), robust, classical, rse, cse)
