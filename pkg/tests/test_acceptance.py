"""Acceptance suite: one test per criterion, each recording a pass/fail line.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary block at
the end lists every criterion.  Monte-Carlo sizes and tolerances are the
ones stated for each criterion.
"""
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from conftest import DIAG4, record_criterion
from wsign.asymptotics import (
    MonteCarloPool,
    evec_are_adcm,
    if_wscm_eigenvector,
    if_wscm_eigenvector_numeric,
    influence_grid,
    cartesian_grid,
    polar_grid,
)
from wsign.bench import FseExperiment, SdrBenchmark, prediction_angle, run_fse, run_sdr_benchmark
from wsign.depth_weights import WeightSpec, pilot_spec, weights
from wsign.elliptical import EllipticalModel, make_rng, sample
from wsign.fdata import outlier_report, planted_curves, project_curves, robust_fpca, sd_cutoff
from wsign.location import objective, weighted_spatial_median
from wsign.scatter import EigenvalueRecoverySpec, adcm, fit_scatter, recover_eigenvalues, tyler, wscm

pytestmark = pytest.mark.slow

P4 = np.zeros(4)
T5 = EllipticalModel.student_t(5, P4, DIAG4)
MVN4 = EllipticalModel.normal(P4, DIAG4)
EIGHT = ("scm", "tyler", "wscm-HSD", "wscm-MHD", "wscm-PD", "adcm-HSD", "adcm-MHD", "adcm-PD")


def within(value, target, tol):
    return abs(value - target) <= tol


@pytest.fixture(scope="module")
def fse_t5():
    return run_fse(FseExperiment(T5, n_list=(500,), reps=2000, estimators=EIGHT, seed=20240))


@pytest.fixture(scope="module")
def fse_mvn():
    return run_fse(FseExperiment(MVN4, n_list=(500,), reps=2000, estimators=EIGHT, seed=20240))


def test_criterion_01_table1_t5(fse_t5):
    fse = {e: fse_t5.fse[e][500] for e in EIGHT}
    targets = {"wscm-PD": (2.31, 0.35), "scm": (1.92, 0.30), "adcm-PD": (2.39, 0.36)}
    ok = all(within(fse[e], t, tol) for e, (t, tol) in targets.items())
    detail = ", ".join(f"{e} {fse[e]:.3f} (target {t}±{tol})" for e, (t, tol) in targets.items())
    assert record_criterion(1, ok, detail), detail


def test_criterion_02_table1_normal_signs(fse_mvn):
    fse = {e: fse_mvn.fse[e][500] for e in EIGHT}
    below = all(v < 1 for v in fse.values())
    order = fse["adcm-PD"] >= fse["scm"] - 0.05
    detail = f"max FSE {max(fse.values()):.3f} < 1: {below}; adcm-PD {fse['adcm-PD']:.3f} vs scm {fse['scm']:.3f}"
    assert record_criterion(2, below and order, detail), detail


def test_criterion_03_table2_are():
    cases = [
        ("t5 p=2 PD", EllipticalModel.student_t(5, np.zeros(2), np.eye(2)), "PD", 4.73, 0.40),
        ("MVN p=2 HSD", EllipticalModel.normal(np.zeros(2), np.eye(2)), "HSD", 0.68, 0.08),
        ("t10 p=10 PD", EllipticalModel.student_t(10, np.zeros(10), np.eye(10)), "PD", 1.49, 0.12),
    ]
    parts, ok = [], True
    for name, model, kind, target, tol in cases:
        est = evec_are_adcm(model, WeightSpec(kind), mc=1_000_000, seed=3)
        hit = within(est.value, target, tol)
        ok &= hit
        parts.append(f"{name} {est.value:.3f}±{est.se:.3f} (target {target}±{tol}) {'ok' if hit else 'MISS'}")
    detail = "; ".join(parts)
    assert record_criterion(3, ok, detail), detail


FAMILIES = [("t5", 5), ("t6", 6), ("t10", 10), ("t15", 15), ("t25", 25), ("MVN", None)]


def _max_eigvec_angle(truth, est):
    return max(prediction_angle(truth[:, j], est[:, j]) for j in range(truth.shape[1]))


def test_criterion_04_eigenvector_agreement():
    rng = make_rng(404)
    worst, lines = 1.0, []
    for name, dof in FAMILIES:
        model = EllipticalModel.normal(P4, DIAG4) if dof is None else EllipticalModel.student_t(dof, P4, DIAG4)
        truth = model.eigh()[1]
        hits = {k: 0 for k in ("HSD", "MHD", "PD")}
        for _ in range(20):
            x = sample(model, 10_000, rng=rng)
            base = pilot_spec(x, "PD")
            for kind in hits:
                spec = WeightSpec(kind, base.center, base.shape)
                w = weights(spec, x)
                mu = weighted_spatial_median(x, spec, w=w).q_hat
                hits[kind] += _max_eigvec_angle(truth, wscm(x, spec, mu, w=w).eigvecs) < 0.05
        for kind, h in hits.items():
            worst = min(worst, h / 20)
        lines.append(f"{name} " + "/".join(f"{h / 20:.2f}" for h in hits.values()))
    detail = f"fraction of reps with all angles < 0.05 rad (HSD/MHD/PD): {'; '.join(lines)}; need >= 0.95"
    assert record_criterion(4, worst >= 0.95, detail), detail


def _tyler_rhs(d, sigma, w2):
    inv = np.linalg.inv(sigma)
    q = np.einsum("ij,jk,ik->i", d, inv, d)
    return d.shape[1] / np.mean(w2) * (((w2 / q)[:, None] * d).T @ d) / d.shape[0]


def test_criterion_05_fixed_point_residuals():
    rng = make_rng(505)
    worst = 0.0
    count = 0
    for model_fn in (EllipticalModel.normal, lambda m, s: EllipticalModel.student_t(5, m, s)):
        for p in (2, 4, 8):
            sigma = np.diag(np.arange(p, 0, -1, dtype=float))
            x = sample(model_fn(np.zeros(p), sigma), 400, rng=rng)
            mu = weighted_spatial_median(x).q_hat
            fits = [(tyler(x, mu), np.ones(len(x)), mu)]
            for kind in ("HSD", "MHD", "PD"):
                spec = pilot_spec(x, kind)
                w = weights(spec, x)
                m = weighted_spatial_median(x, spec, w=w).q_hat
                fits.append((adcm(x, spec, m, w=w), w, m))
            for fit, w, m in fits:
                d = x - m
                keep = np.einsum("ij,ij->i", d, d) > 0
                rhs = _tyler_rhs(d[keep], fit.matrix, w[keep] ** 2)
                worst = max(worst, np.linalg.norm(fit.matrix - rhs) / np.linalg.norm(fit.matrix))
                count += 1
    detail = f"max relative residual over {count} fits {worst:.2e} (limit 1e-8)"
    assert record_criterion(5, worst <= 1e-8, detail), detail


FIG2 = EllipticalModel.normal(np.zeros(2), np.diag([2.0, 1.0]))


def test_criterion_06_influence_suite():
    rings = influence_grid(FIG2, polar_grid([1.0, 5.0, 10.0, 100.0], 72),
                           ["SAMPLE_COV_EVEC", "WSCM_EVEC(PD)"], mc=200_000, seed=6)
    cov_ratio = rings.max_at_radius("SAMPLE_COV_EVEC", 5.0) / rings.max_at_radius("SAMPLE_COV_EVEC", 1.0)
    pd_ratio = rings.max_at_radius("WSCM_EVEC(PD)", 100.0) / rings.max_at_radius("WSCM_EVEC(PD)", 10.0)
    # Tyler's IF is constant along rays, so the maximum is tied across radii;
    # a polar grid inside [-5, 5]^2 shares angles across circles, making the
    # ties exact, and the tie-break reports the innermost maximizer
    disc = influence_grid(FIG2, polar_grid(np.arange(0.25, 5.01, 0.25), 72), ["TYLER_EVEC"])
    tyler_r = disc.argmax_radius("TYLER_EVEC")
    inner, outer = disc.max_at_radius("TYLER_EVEC", 0.25), disc.max_at_radius("TYLER_EVEC", 5.0)
    square = influence_grid(FIG2, cartesian_grid(5.0, 0.25), ["TYLER_EVEC"])
    ok = cov_ratio >= 3 and pd_ratio < 1.2 and tyler_r < 1 and np.isclose(inner, outer, rtol=1e-12)
    detail = (f"(a) cov IF ratio r=5/r=1 {cov_ratio:.2f} (>= 3); (b) WSCM-PD ratio r=100/r=10 {pd_ratio:.4f} (< 1.2); "
              f"(c) Tyler argmax radius {tyler_r:.3f} (< 1) with max {inner:.4f} at r=0.25 equal to {outer:.4f} "
              f"at r=5 [cartesian grid argmax r={square.argmax_radius('TYLER_EVEC'):.2f}, set by angular sampling]")
    assert record_criterion(6, ok, detail), detail


def test_criterion_07_exact_vs_numerical_if():
    spec = WeightSpec("PD")
    pool = MonteCarloPool(FIG2, spec, 1_000_000, 7)
    points = [(1.0, 1.0), (2.0, 0.5), (-1.5, 2.0), (0.3, -0.7), (3.0, 3.0)]
    parts, ok = [], True
    for x0 in points:
        exact = if_wscm_eigenvector(x0, 0, FIG2, spec, pool=pool)
        num, se = if_wscm_eigenvector_numeric(x0, 0, FIG2, spec, eps=1e-4, pool=pool, return_se=True)
        gap = np.linalg.norm(num - exact)
        allow = max(0.02 * np.linalg.norm(exact), 3 * np.linalg.norm(se))
        ok &= gap <= allow
        parts.append(f"{x0}: {gap:.2e}/{allow:.2e}")
    detail = "gap/allowed " + "; ".join(parts)
    assert record_criterion(7, ok, detail), detail


def _plugin_error(n, rng):
    x = sample(MVN4, n, rng=rng)
    loc, base = fit_scatter(x, "wscm", "pd")
    _, fit = recover_eigenvalues(x, base, EigenvalueRecoverySpec(int(np.sqrt(n)), int(rng.integers(2**31))),
                                 center=loc.q_hat)
    return np.linalg.norm(fit.matrix - DIAG4)


def test_criterion_08_plugin_consistency():
    rng = make_rng(808)
    small = np.median([_plugin_error(1_000, rng) for _ in range(50)])
    large = np.median([_plugin_error(10_000, rng) for _ in range(50)])
    detail = f"median Frobenius error n=1e3 {small:.4f}, n=1e4 {large:.4f}"
    assert record_criterion(8, large < small, detail), detail


def _grid_minimum(x, w, rounds=60, size=41):
    """Zooming grid search for the minimum of the convex objective."""
    lo, hi = x.min(axis=0), x.max(axis=0)
    best = None
    for _ in range(rounds):
        axes = [np.linspace(a, b, size) for a, b in zip(lo, hi)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, x.shape[1])
        vals = np.array([objective(x, w, q) for q in pts])
        k = int(np.argmin(vals))
        best = (pts[k], vals[k])
        half = (hi - lo) / (size - 1) * 2
        lo, hi = best[0] - half, best[0] + half
    return best


def test_criterion_09_median_oracle():
    rng = make_rng(909)
    worst = 0.0
    for case in range(20):
        p = 1 + case % 2
        n = int(rng.integers(3, 13))
        x = rng.standard_normal((n, p)) * rng.uniform(0.5, 3.0, p)
        w = rng.uniform(0.1, 2.0, n)
        fit = weighted_spatial_median(x, w=w, tol=1e-12, max_iter=5000)
        solver = objective(x, w, fit.q_hat)
        _, brute = _grid_minimum(x, w)
        worst = max(worst, (solver - brute) / brute)
    detail = f"max relative excess of solver over brute force {worst:.2e} (limit 1e-6)"
    assert record_criterion(9, worst <= 1e-6, detail), detail


def test_criterion_10_sdr_benchmark():
    clean = run_sdr_benchmark(SdrBenchmark(p_list=(5, 25, 100), reps=30, outliers=False, seed=2024))
    dirty = run_sdr_benchmark(SdrBenchmark(p_list=(5, 25, 100), reps=30, outliers=True, seed=2024))
    parts, ok = [], True
    for p in (5, 25, 100):
        gap = abs(clean.robust[p] - clean.classical[p]) / clean.classical[p]
        wins = dirty.robust[p] < dirty.classical[p]
        ok &= gap < 0.05 and wins
        parts.append(f"p={p}: clean gap {gap:.1%}, contaminated {dirty.robust[p]:.3f} vs {dirty.classical[p]:.3f}")
    detail = "; ".join(parts)
    assert record_criterion(10, ok, detail), detail


def test_criterion_11_functional_outliers():
    curves, planted = planted_curves(seed=0)
    proj = project_curves(curves, 20)
    rep = outlier_report(proj, robust_fpca(proj, 1, "PD"))
    flagged = set(rep.flagged_indices)
    missed = set(planted) - flagged
    false_pos = flagged - set(planted)
    cut = sd_cutoff()
    ok = not missed and len(false_pos) <= 2 and within(cut, 2.71620, 1e-4)
    detail = f"flagged {sorted(flagged)}, planted {planted}, false positives {len(false_pos)}, SD cutoff {cut:.5f}"
    assert record_criterion(11, ok, detail), detail


PROPERTY_TESTS = [
    "test_depth_weights.py::test_sign_scale_invariance",
    "test_depth_weights.py::test_sign_norm_is_zero_or_one",
    "test_depth_weights.py::test_weight_boundedness",
    "test_depth_weights.py::test_center_inward_ordering",
    "test_depth_weights.py::test_affine_invariance",
    "test_location.py::test_orthogonal_equivariance",
    "test_location.py::test_translation_equivariance_unit",
    "test_scatter.py::test_wscm_orthogonal_equivariance",
    "test_scatter.py::test_tyler_fixed_point_and_trace",
    "test_fdata.py::test_flags_permutation_equivariant",
]


def test_criterion_12_property_suites():
    here = Path(__file__).parent
    res = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                          *[str(here / t) for t in PROPERTY_TESTS]],
                         capture_output=True, text=True, cwd=here.parent, check=False)
    tail = res.stdout.strip().splitlines()[-1] if res.stdout.strip() else res.stderr.strip()[-200:]
    detail = f"{len(PROPERTY_TESTS)} property suites standalone: {tail}"
    assert record_criterion(12, res.returncode == 0, detail), detail
