import numpy as np
import pytest

from pdbas import (BoundarySpec, Dirichlet, build_grid, build_layout, custom_problem,
                   dirichlet_problem, neumann_problem, pde_residual)
from pdbas.problems import forcing_amplitude, load_initial_csv

# -nu (1 + lambda(2 pi / L)) with lambda from adaptive quadrature, L = 2, nu = delta = 0.2
AMPLITUDE = 1.748127443495261068
# max |x + sin(pi x)| on [-1, 1], attained at x = 0.603115..., by root finding
U0_NORM = 1.5511019658223668133


def test_forcing_amplitude():
    assert forcing_amplitude(2.0, 0.2, 0.2) == pytest.approx(AMPLITUDE, rel=1e-12)


def test_dirichlet_values(rng):
    p = dirichlet_problem(2.0, 0.2, 0.2)
    for t in (0.0, 0.7, 15.0):
        assert p.exact(0.0, t) == pytest.approx(0.0, abs=1e-15)
        assert p.exact(1.0, t) == pytest.approx(1.0, abs=1e-15)
        assert p.exact(-1.0, t) == pytest.approx(-1.0, abs=1e-15)
    x = rng.uniform(-1.2, 1.2, 1000)
    np.testing.assert_allclose(p.initial(x), p.exact(x, 0.0), rtol=0, atol=1e-12)
    np.testing.assert_allclose(p.exact(x, 200.0), x, atol=1e-15)
    assert p.bcs == BoundarySpec(Dirichlet(-1.0), Dirichlet(1.0))
    np.testing.assert_allclose(p.source(x, 0.5),
                               AMPLITUDE * np.exp(-0.1) * np.sin(np.pi * x), rtol=1e-12)


def test_initial_norm():
    assert dirichlet_problem(2.0, 0.2, 0.2).initial_norm() == pytest.approx(U0_NORM, rel=1e-7)
    assert neumann_problem(2.0, 0.2, 0.2).initial_norm() == pytest.approx(2.0, rel=1e-12)


def test_neumann_values(rng):
    p = neumann_problem(2.0, 0.2, 0.2)
    assert p.initial(0.0) == pytest.approx(1.0)
    h = 1e-6
    for xb in (-1.0, 1.0):
        for t in (0.0, 3.0):
            slope = (p.exact(xb + h, t) - p.exact(xb - h, t)) / (2 * h)
            assert slope == pytest.approx(1.0, abs=1e-8)
    x = rng.uniform(-1, 1, 50)
    np.testing.assert_allclose(p.exact(x, 300.0), x, atol=1e-12)


@pytest.mark.parametrize("factory", [dirichlet_problem, neumann_problem])
def test_reflection_relations_exact(factory, rng):
    # the analytic fields satisfy the reflection formulas pointwise
    p = factory(2.0, 0.2, 0.2)
    for side, xb in (("left", -1.0), ("right", 1.0)):
        bc = p.bcs.left if side == "left" else p.bcs.right
        off = rng.uniform(0, 0.2, 200)
        xg = xb - off if side == "left" else xb + off
        t = rng.uniform(0, 10)
        mirror = p.exact(2 * xb - xg, t)
        if isinstance(bc, Dirichlet):
            expected = 2 * bc.value - mirror
        else:
            expected = 2 * bc.slope * (xg - xb) + mirror
        np.testing.assert_allclose(p.exact(xg, t), expected, rtol=0, atol=1e-13)


@pytest.mark.parametrize("factory", [dirichlet_problem, neumann_problem])
def test_pde_residual(factory):
    p = factory(2.0, 0.2, 0.2)
    f_inf = abs(AMPLITUDE) * np.exp(-0.2)
    res = []
    for n in (1024, 2048, 4096, 8192):
        res.append(pde_residual(p, build_grid(build_layout(2.0, 0.2), n), 1.0))
    res = np.array(res)
    assert res[2] < 1e-3 * f_inf
    ratios = res[:-1] / res[1:]
    assert np.all((ratios > 3) & (ratios < 5)), ratios


def test_zero_problem_residual():
    p = custom_problem([-2.0, 2.0], [0.0, 0.0], BoundarySpec(Dirichlet(0.0), Dirichlet(0.0)),
                       2.0, 0.2, 0.2)
    assert pde_residual(p, build_grid(build_layout(2.0, 0.2), 256), 0.3) == 0.0
    assert not p.has_exact


def test_bad_parameters():
    with pytest.raises(ValueError):
        dirichlet_problem(0.0, 0.2, 0.2)
    with pytest.raises(ValueError):
        neumann_problem(2.0, -0.2, 0.2)


def test_load_initial_csv(tmp_path):
    path = tmp_path / "ic.csv"
    path.write_text("x,value\n1,3\n-1,1\n0,2\n")
    xs, vs = load_initial_csv(path)
    np.testing.assert_array_equal(xs, [-1, 0, 1])
    np.testing.assert_array_equal(vs, [1, 2, 3])
    p = custom_problem(xs, vs, BoundarySpec(Dirichlet(1.0), Dirichlet(3.0)), 2.0, 0.2, 0.2)
    np.testing.assert_allclose(p.initial(np.array([-0.5, 0.5, 1.1])), [1.5, 2.5, 3.0])
    path.write_text("x,value\n0,1\n")
    with pytest.raises(ValueError):
        load_initial_csv(path)
