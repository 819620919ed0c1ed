import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wsign.asymptotics import (
    AreEstimate,
    IfEstimator,
    InfluenceGrid,
    MonteCarloPool,
    cartesian_grid,
    classical_inflation,
    eigen_asymptotic_report,
    evec_are,
    evec_are_adcm,
    evec_are_wscm,
    evec_avar,
    if_adcm_eigenvector_numeric,
    if_cov_eigenvector,
    if_scm_eigenvector,
    if_tyler_eigenvector,
    if_wscm_eigenvector,
    if_wscm_eigenvector_numeric,
    influence_grid,
    parse_estimator_label,
    polar_grid,
)
from wsign.depth_weights import WeightKind, WeightSpec, weights
from wsign.elliptical import EllipticalModel, sample
from wsign.errors import ValidationError
from wsign.scatter import wscm

FIG2 = EllipticalModel.normal(np.zeros(2), np.diag([2.0, 1.0]))
PD = WeightSpec("PD")


@pytest.fixture(scope="module")
def fig2_pool():
    return MonteCarloPool(FIG2, PD, 200_000, seed=3)


# exact influence functions -----------------------------------------------------

def test_wscm_if_vanishes_at_center(fig2_pool):
    assert np.array_equal(if_wscm_eigenvector([0.0, 0.0], 0, FIG2, PD, pool=fig2_pool), [0.0, 0.0])


@pytest.mark.parametrize("x0", [[3.0, 0.0], [0.0, 2.0], [-0.5, 0.0]])
def test_ifs_vanish_on_eigen_axes(x0, fig2_pool):
    assert np.allclose(if_wscm_eigenvector(x0, 0, FIG2, PD, pool=fig2_pool), 0.0, atol=1e-15)
    assert np.allclose(if_tyler_eigenvector(x0, 0, FIG2), 0.0, atol=1e-15)
    assert np.allclose(if_cov_eigenvector(x0, 0, FIG2), 0.0, atol=1e-15)


@given(x=st.tuples(st.floats(-5, 5), st.floats(-5, 5)), c=st.floats(1e-3, 1e3))
def test_tyler_if_scale_invariant(x, c):
    x = np.array(x)
    if np.linalg.norm(x) < 1e-6:
        return
    assert np.allclose(if_tyler_eigenvector(c * x, 0, FIG2), if_tyler_eigenvector(x, 0, FIG2), atol=1e-12)


def test_scm_eigenvalues_under_sphericity():
    m = EllipticalModel.normal(np.zeros(3), np.eye(3))
    lam, se = MonteCarloPool(m, WeightSpec(), 100_000, seed=1).tilde_eigvals()
    assert np.allclose(lam, 1 / 3, atol=3 * se.max() + 1e-3)
    assert lam.sum() == pytest.approx(1.0, abs=1e-12)


def test_scm_if_is_unit_weight_wscm(fig2_pool):
    pool = MonteCarloPool(FIG2, WeightSpec(), 100_000, seed=3)
    a = if_scm_eigenvector([1.0, 2.0], 0, FIG2, pool=pool)
    b = if_wscm_eigenvector([1.0, 2.0], 0, FIG2, WeightSpec(), pool=pool)
    assert np.array_equal(a, b)


def test_cov_if_grows_quadratically():
    v = [np.linalg.norm(if_cov_eigenvector(r * np.array([1.0, 1.0]), 0, FIG2)) for r in (1.0, 10.0)]
    assert v[1] / v[0] == pytest.approx(100.0)


def test_wscm_if_matches_contamination_at_one_point():
    pool = MonteCarloPool(FIG2, PD, 1_000_000, seed=11)
    exact = if_wscm_eigenvector([1.0, 1.0], 0, FIG2, PD, pool=pool)
    numeric, se = if_wscm_eigenvector_numeric([1.0, 1.0], 0, FIG2, PD, eps=1e-4, pool=pool, return_se=True)
    assert np.linalg.norm(numeric) == pytest.approx(np.linalg.norm(exact), rel=0.02)


def test_tied_eigenvalues_rejected():
    m = EllipticalModel.normal(np.zeros(2), np.eye(2))
    with pytest.raises(ValidationError, match="tied"):
        if_tyler_eigenvector([1.0, 1.0], 0, m)
    with pytest.raises(ValidationError, match="tied"):
        if_wscm_eigenvector([1.0, 1.0], 0, m, PD, mc=20_000)


def test_index_range():
    with pytest.raises(ValidationError, match="index"):
        if_cov_eigenvector([1.0, 1.0], 2, FIG2)


# numerical ADCM influence ------------------------------------------------------

@pytest.fixture(scope="module")
def adcm_pool():
    return MonteCarloPool(FIG2, WeightSpec("HSD"), 40_000, seed=5)


def test_adcm_if_small_at_center(adcm_pool):
    est, se = if_adcm_eigenvector_numeric([0.0, 0.0], 0, FIG2, WeightSpec("HSD"), pool=adcm_pool, return_se=True)
    assert np.linalg.norm(est) < 3 * np.linalg.norm(se) + 1e-9


def test_adcm_if_bounded_where_covariance_grows(adcm_pool):
    d = np.array([1.0, 1.0]) / np.sqrt(2)
    adcm_norms, cov_norms = [], []
    for r in (1.0, 10.0, 100.0, 1000.0):
        adcm_norms.append(np.linalg.norm(
            if_adcm_eigenvector_numeric(r * d, 0, FIG2, WeightSpec("HSD"), pool=adcm_pool)))
        cov_norms.append(np.linalg.norm(if_cov_eigenvector(r * d, 0, FIG2)))
    last = adcm_norms[-2:]
    assert max(last) / min(last) < 1.2
    assert all(b >= 10 * a for a, b in zip(cov_norms, cov_norms[1:]))


def test_eps_range(adcm_pool):
    with pytest.raises(ValidationError, match="eps"):
        if_adcm_eigenvector_numeric([1.0, 1.0], 0, FIG2, WeightSpec("HSD"), eps=0.1, pool=adcm_pool)


def test_adcm_numeric_needs_depth_weight():
    with pytest.raises(ValidationError, match="depth weight"):
        if_adcm_eigenvector_numeric([1.0, 1.0], 0, FIG2, WeightSpec(), mc=1000)


# asymptotic eigen report -------------------------------------------------------

M3 = EllipticalModel.normal(np.zeros(3), np.diag([3.0, 2.0, 1.0]))


@pytest.fixture(scope="module")
def report3():
    return eigen_asymptotic_report(M3, PD, mc=200_000, seed=1)


def test_vanishing_fourth_moments(report3):
    assert report3.zero_terms
    for est, se in report3.zero_terms.values():
        assert abs(est) < 3 * se


def test_report_structure(report3):
    assert np.allclose(report3.eval_cov, report3.eval_cov.T)
    for i in range(3):
        assert np.linalg.eigvalsh(report3.evec_var(i))[0] >= -1e-12
    # the (i, j) block is a multiple of g_j g_i'
    blk = report3.evec_var_blocks[(0, 1)]
    assert blk[1, 0] < 0 and np.count_nonzero(np.abs(blk) > 1e-12) == 1


def test_unit_weight_report_is_finite():
    rep = eigen_asymptotic_report(M3, WeightSpec(), mc=100_000, seed=2)
    for blk in rep.evec_var_blocks.values():
        assert np.all(np.isfinite(blk))
    for i in range(3):
        assert np.linalg.eigvalsh(rep.evec_var(i))[0] >= -1e-12


def test_report_needs_enough_draws():
    with pytest.raises(ValidationError, match="1e5"):
        eigen_asymptotic_report(M3, PD, mc=1000)


@pytest.mark.slow
def test_report_matches_replication(report3):
    # population-fixed weights are the setting of the limit theory
    n, reps = 2000, 500
    spec = WeightSpec("PD", M3.mu, M3.sigma)
    g = []
    for r in range(reps):
        x = sample(M3, n, seed=(9, r))
        f = wscm(x, spec, np.zeros(3), w=weights(spec, x, model=M3))
        g.append(f.eigvecs * np.sign(np.diag(f.eigvecs)))
    g = np.array(g)
    for i in range(3):
        emp = n * np.cov(g[:, :, i].T)
        pred = report3.evec_var(i)
        big = np.abs(pred) > 0.1
        assert np.allclose(emp[big], pred[big], rtol=0.20)
    cross = n * np.cov(g[:, :, 0].T, g[:, :, 1].T)[:3, 3:]
    pred = report3.evec_var_blocks[(0, 1)]
    assert cross[1, 0] == pytest.approx(pred[1, 0], rel=0.20)
    # the transposed orientation would put the mass at (0, 1)
    assert abs(cross[0, 1]) < 0.05 * abs(pred[1, 0])


# efficiencies -----------------------------------------------------------------

DIAG4 = np.diag([4.0, 3.0, 2.0, 1.0])


def test_wscm_are_below_one_under_normality():
    are = evec_are_wscm(EllipticalModel.normal(np.zeros(4), DIAG4), PD, mc=200_000, seed=1)
    assert are.value < 1.0
    assert are.value == pytest.approx(0.62, abs=0.03)


def test_self_ratio_is_one():
    m = EllipticalModel.normal(np.zeros(4), DIAG4)
    assert evec_are(m, "wscm", PD, mc=100_000, reference="wscm").value == pytest.approx(1.0, abs=1e-12)


def test_wscm_are_above_one_for_t5():
    are = evec_are_wscm(EllipticalModel.student_t(5, np.zeros(4), DIAG4), PD, mc=200_000, seed=1)
    assert are.value > 1.0


def test_closed_forms():
    m = EllipticalModel.normal(np.zeros(4), DIAG4)
    base = 4 * 3 / 1 + 4 * 2 / 4 + 4 * 1 / 9
    assert evec_avar(m, "cov").value == pytest.approx(base)
    assert evec_avar(m, "tyler").value == pytest.approx(base * 6 / 4)
    t5 = EllipticalModel.student_t(5, np.zeros(4), DIAG4)
    assert classical_inflation(t5) == pytest.approx(3.0)
    assert evec_avar(t5, "cov").value == pytest.approx(3 * base)
    assert evec_avar(t5, "cov", kurtosis_adjusted=False).value == pytest.approx(base)


def test_adcm_are_mvn_hsd():
    are = evec_are_adcm(EllipticalModel.normal(np.zeros(2), np.eye(2)), WeightSpec("HSD"), mc=1_000_000)
    assert are.value == pytest.approx(0.68, abs=0.08)
    assert isinstance(are, AreEstimate) and are.se > 0


def test_adcm_are_t25_p20():
    are = evec_are_adcm(EllipticalModel.student_t(25, np.zeros(20), np.eye(20)), PD, mc=1_000_000)
    assert are.value == pytest.approx(1.11, abs=0.1)


def test_adcm_are_matches_tyler_limit_for_unit_like_weights():
    # u constant gives the Tyler efficiency p/(p+2) under normality
    m = EllipticalModel.normal(np.zeros(3), np.diag([3.0, 2.0, 1.0]))
    assert evec_are(m, "tyler").value == pytest.approx(3 / 5)


def test_are_deterministic_given_seed():
    m = EllipticalModel.student_t(6, np.zeros(2), np.eye(2))
    a = evec_are_adcm(m, PD, mc=100_000, seed=4)
    b = evec_are_adcm(m, PD, mc=100_000, seed=4)
    assert a == b


# grids --------------------------------------------------------------------------

def test_grid_helpers():
    g = cartesian_grid(1.0, 0.5, 2)
    assert g.shape == (25, 2)
    p = polar_grid([1.0, 2.0], 8)
    assert np.allclose(np.linalg.norm(p, axis=1), [1.0] * 8 + [2.0] * 8)


def test_influence_grid_container():
    pts = polar_grid([0.5, 1.0], 4)
    grid = InfluenceGrid(pts, {"TYLER_EVEC": [1, 2, 2, 1, 0, 2, 0, 0]}, ["TYLER_EVEC"])
    assert grid.argmax_radius("TYLER_EVEC") == pytest.approx(0.5)
    assert grid.max_at_radius("TYLER_EVEC", 1.0) == 2
    with pytest.raises(ValidationError):
        InfluenceGrid(pts, {"A": [1.0]}, ["A"])
    with pytest.raises(ValidationError):
        InfluenceGrid(pts[:1], {"A": [-1.0]}, ["A"])


def test_label_parsing():
    assert parse_estimator_label("WSCM_EVEC(pd)") == (IfEstimator.WSCM_EVEC, WeightKind.PD)
    assert parse_estimator_label("tyler_evec") == (IfEstimator.TYLER_EVEC, None)


def test_influence_grid_runs():
    pts = polar_grid([1.0, 3.0], 6)
    grid = influence_grid(FIG2, pts, ["SAMPLE_COV_EVEC", "TYLER_EVEC", "SCM_EVEC", "WSCM_EVEC(MHD)"],
                          mc=20_000, seed=1)
    assert set(grid.if_norms) == {"SAMPLE_COV_EVEC", "TYLER_EVEC", "SCM_EVEC", "WSCM_EVEC(MHD)"}
    assert all(len(v) == len(pts) for v in grid.if_norms.values())
