import numpy as np
import pytest

from wsign import bench
from wsign.bench import (
    FSE_ESTIMATORS,
    FseExperiment,
    SdrBenchmark,
    fit_first_eigvecs,
    prediction_angle,
    run_fse,
    run_sdr_benchmark,
    sdr_data,
)
from wsign.elliptical import EllipticalModel, make_rng, sample
from wsign.errors import ConvergenceError, ValidationError

E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
T5 = EllipticalModel.student_t(5, np.zeros(4), np.diag([4.0, 3.0, 2.0, 1.0]))


def test_prediction_angle_examples():
    assert prediction_angle(E1, E1) == 0.0
    assert prediction_angle(E1, -E1) == 0.0
    assert prediction_angle(E1, (E1 + E2) / np.sqrt(2)) == pytest.approx(np.pi / 4, abs=1e-15)
    assert prediction_angle(E1, E2) == pytest.approx(np.pi / 2)


def test_prediction_angle_rejects_non_unit():
    with pytest.raises(ValidationError, match="unit norm"):
        prediction_angle(E1, 2 * E1)


def test_first_eigvecs_all_estimators():
    x = sample(T5, 200, seed=1)
    vecs = fit_first_eigvecs(x)
    assert set(vecs) == set(FSE_ESTIMATORS)
    for v in vecs.values():
        assert abs(np.linalg.norm(v) - 1) < 1e-12
        assert abs(v[0]) > 0.8


@pytest.fixture(scope="module")
def small_run():
    return run_fse(FseExperiment(T5, (20, 200), reps=100, seed=3, threads=1))


def test_fse_self_ratio_and_ranges(small_run):
    for n in (20, 200):
        assert small_run.fse["cov"][n] == 1.0
        assert small_run.mc_standard_errors["cov"][n] == 0.0
        for e in FSE_ESTIMATORS:
            assert 0 < small_run.mspa[e][n] <= (np.pi / 2) ** 2
            assert small_run.fse[e][n] > 0
            assert small_run.mc_standard_errors[e][n] >= 0
        assert small_run.reps_used[n] + small_run.failures[n] == 100


def test_mspa_decreases_with_n(small_run):
    for e in FSE_ESTIMATORS:
        assert small_run.mspa[e][200] < small_run.mspa[e][20]


def test_paired_design(small_run):
    # every estimator is scored on the same replications
    lengths = {len(small_run.angles[e][200]) for e in small_run.angles}
    assert lengths == {small_run.reps_used[200]}


def test_table_rows_layout(small_run):
    names, rows = small_run.table_rows()
    assert "cov" not in names and names == list(FSE_ESTIMATORS[:-1])
    assert [n for n, _ in rows] == [20, 200]


def test_fse_deterministic_across_worker_counts():
    exp = FseExperiment(T5, (30,), reps=100, estimators=("scm", "wscm-PD"), seed=9, threads=1)
    a = run_fse(exp)
    b = run_fse(exp)
    c = run_fse(FseExperiment(T5, (30,), reps=100, estimators=("scm", "wscm-PD"), seed=9, threads=2))
    assert a.mspa == b.mspa == c.mspa


def test_failed_replications_dropped_pairwise(monkeypatch):
    real = bench.fit_first_eigvecs
    calls = {"k": 0}

    def flaky(x, estimators):
        calls["k"] += 1
        if calls["k"] % 10 == 0:
            raise ConvergenceError("synthetic failure")
        return real(x, estimators)

    monkeypatch.setattr(bench, "fit_first_eigvecs", flaky)
    res = run_fse(FseExperiment(T5, (30,), reps=100, estimators=("scm",), seed=1, threads=1))
    assert res.failures[30] == 10 and res.reps_used[30] == 90
    assert all(len(v[30]) == 90 for v in res.angles.values())


@pytest.mark.parametrize(
    "kwargs, msg",
    [
        ({"reps": 99}, "reps"),
        ({"estimators": ("wscm",)}, "depth weight"),
        ({"estimators": ("mcd",)}, "unknown estimator"),
        ({"n_list": (4,)}, "exceed p"),
    ],
)
def test_experiment_validation(kwargs, msg):
    with pytest.raises(ValidationError, match=msg):
        FseExperiment(T5, **kwargs)


def test_experiment_rejects_tied_eigenvalues():
    with pytest.raises(ValidationError, match="distinct"):
        FseExperiment(EllipticalModel.normal(np.zeros(3), np.eye(3)))


def test_experiment_round_trip():
    exp = FseExperiment(T5, (20, 50), reps=200, estimators=("scm", "adcm-PD"), seed=5)
    back = FseExperiment.from_dict(exp.to_dict())
    assert back.to_dict() == exp.to_dict()


# SDR benchmark ----------------------------------------------------------------

def test_sdr_data_design():
    x, y = sdr_data(25, 200, make_rng(0), outliers=True)
    assert x.shape == (200, 25) and y.shape == (200,)
    clean, _ = sdr_data(25, 200, make_rng(0), outliers=False)
    diff = x - clean
    assert np.array_equal(diff[:10, :5], np.full((10, 5), 100.0))
    assert not diff[10:].any() and not diff[:, 5:].any()


def test_sdr_benchmark_deterministic():
    cfg = SdrBenchmark(p_list=(5,), reps=1, seed=2, threads=1)
    a, b = run_sdr_benchmark(cfg), run_sdr_benchmark(cfg)
    # one replication has no standard error (nan), so compare the means
    assert a.robust == b.robust and a.classical == b.classical


def test_sdr_benchmark_validation():
    with pytest.raises(ValidationError, match="not in"):
        SdrBenchmark(p_list=(7,))
    with pytest.raises(ValidationError, match="reps"):
        SdrBenchmark(reps=0)
