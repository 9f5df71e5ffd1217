import csv

import numpy as np
import pytest

from pdbas import KernelSpec, build_grid, build_layout
from pdbas.analysis import (StudyCase, benchmark_laplacian, error_peak, fit_loglog_slope,
                            max_relative_error, operator_discrepancy, relative_error_profile,
                            run_case, sweep_epsilon, sweep_grid, write_benchmark_csv,
                            write_convergence_csv, write_error_series_csv, write_profile_csv)


def test_error_profile():
    omega = np.array([False, True, True, True, False])
    y = np.arange(5.0)
    np.testing.assert_array_equal(relative_error_profile(y, y, 2.0, omega), np.zeros(3))
    np.testing.assert_allclose(relative_error_profile(y + 0.3, y, 1.5, omega), 0.2)
    assert max_relative_error(y + np.array([9, 0.1, 0.4, 0.2, 9]), y, 2.0, omega) == \
        pytest.approx(0.2)
    with pytest.raises(ValueError):
        relative_error_profile(y, y, 0.0, omega)


def test_fit_exact_power():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    slope, intercept, r2 = fit_loglog_slope(x, x**2)
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert intercept == pytest.approx(0.0, abs=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)
    slope, _, r2 = fit_loglog_slope(x, np.full(4, 3.0))
    assert slope == pytest.approx(0.0, abs=1e-12)
    assert r2 == 1.0


def test_fit_noisy(rng):
    x = np.logspace(-3, 0, 12)
    y = 3 * x**1.5 * (1 + 0.01 * rng.standard_normal(x.size))
    slope, intercept, r2 = fit_loglog_slope(x, y)
    assert abs(slope - 1.5) <= 0.05
    assert np.exp(intercept) == pytest.approx(3.0, rel=0.05)
    assert r2 > 0.999


def test_fit_rejects():
    with pytest.raises(ValueError):
        fit_loglog_slope([1, 2], [1, 2])
    with pytest.raises(ValueError):
        fit_loglog_slope([1, 2, -3], [1, 2, 3])


def test_sweep_epsilon_preconditions():
    case = StudyCase(n=256, t_max=0.1)
    with pytest.raises(ValueError, match="monotone"):
        sweep_epsilon(case, [1e-2, 1e-3, 1e-3])
    with pytest.raises(ValueError, match="three"):
        sweep_epsilon(case, [1e-2, 1e-4])
    with pytest.raises(ValueError, match="decades"):
        sweep_epsilon(case, [1e-2, 5e-3, 2e-3])
    with pytest.raises(ValueError):
        sweep_grid(case, [128, 256, 384])


def test_small_epsilon_sweep():
    # coarse grid: keep eps large enough that penalization dominates the spatial error
    case = StudyCase(n=512, t_max=0.5)
    rep = sweep_epsilon(case, [1e-1, 1e-2, 1e-3])
    assert rep.kind == "epsilon"
    assert np.all(np.diff(rep.errors) < 0)
    assert rep.dt == pytest.approx(0.9 * 2 / (1e3 + 120))
    assert 0.5 < rep.slope < 1.5
    again = sweep_epsilon(case, [1e-1, 1e-2, 1e-3], jobs=2)
    np.testing.assert_array_equal(rep.errors, again.errors)


def test_small_grid_sweep():
    case = StudyCase(eps=1e-5, t_max=0.05)
    ns = [64, 128, 256, 512, 1024]
    rep = sweep_grid(case, ns)
    np.testing.assert_allclose(rep.params, 2.4 / np.array(ns), rtol=1e-15)
    np.testing.assert_allclose(rep.params[:-1] / rep.params[1:], 2.0, rtol=1e-15)
    assert np.all(np.isfinite(rep.errors)) and np.all(rep.errors > 0)
    assert 1.7 <= rep.slope <= 2.3
    # leave-one-out stability of the fitted slope
    for k in range(len(ns)):
        keep = np.arange(len(ns)) != k
        assert abs(fit_loglog_slope(rep.params[keep], rep.errors[keep])[0] - rep.slope) < 0.15


def test_error_peak_interior_for_coarse_grid():
    case = StudyCase(n=64, eps=1e-5, t_max=0.2)
    res = run_case(case)
    lay = build_layout(case.L, case.delta)
    xp, dist = error_peak(res, case.build_problem(), lay, build_grid(lay, case.n))
    assert -1 <= xp <= 1
    assert dist == pytest.approx(min(xp + 1, 1 - xp))


@pytest.fixture(scope="module")
def small_bench():
    return benchmark_laplacian([128, 256, 512], repetitions=3)


def test_benchmark_small(small_bench):
    rep = small_bench
    assert np.all(rep.quadrature_seconds > 0) and np.all(rep.spectral_seconds > 0)
    assert set(rep.exponents) == {"quadrature", "spectral"}
    assert len(rep.rows()) == 6
    assert rep.speedup(512) > 0
    with pytest.raises(ValueError):
        benchmark_laplacian([128, 256, 512], repetitions=2)


def test_operator_discrepancy():
    grid = build_grid(build_layout(2.0, 0.2), 256)
    assert operator_discrepancy(KernelSpec.triangular(0.2), grid, trials=20) <= 1e-10


def test_csv_writers(tmp_path, small_bench):
    case = StudyCase(n=256, t_max=0.05)
    res = run_case(case)
    p = write_error_series_csv(res, tmp_path / "series.csv")
    with open(p) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "max_rel_error"]
    assert float(rows[-1][1]) == res.error_values[-1]
    with open(write_benchmark_csv(small_bench, tmp_path / "b.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "method", "seconds"] and len(rows) == 7
    x = np.array([0.1, 1 / 3])
    with open(write_profile_csv(x, x * 2, tmp_path / "p.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "rel_error"]
    assert float(rows[2][0]) == 1 / 3
    rep = sweep_epsilon(StudyCase(n=256, t_max=0.05), [1e-1, 1e-2, 1e-3])
    with open(write_convergence_csv(rep, tmp_path / "c.csv")) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["param", "error"]
    assert [float(r[1]) for r in rows[1:]] == rep.errors.tolist()
