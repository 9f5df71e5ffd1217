import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdbas import LayoutError, Region, build_grid, build_layout, build_mask


def test_layout_reference_setup():
    lay = build_layout(2.0, 0.2)
    assert (lay.omega_left, lay.omega_right) == (-1.0, 1.0)
    assert lay.x0 == pytest.approx(-1.2)
    assert lay.S == pytest.approx(2.4)
    assert build_layout(1.0, 0.5).S == 2.0
    assert build_layout(2.0, 0.2, center=3.0).omega_left == 2.0


@pytest.mark.parametrize("L, delta", [(2.0, 0.0), (0.0, 0.2), (-1.0, 0.2), (2.0, -0.1)])
def test_layout_rejects(L, delta):
    with pytest.raises(LayoutError):
        build_layout(L, delta)


def test_grid_spacing(layout):
    grid = build_grid(layout, 512)
    assert grid.dx == pytest.approx(0.0046875, rel=1e-15)
    assert grid.x[0] == layout.x0
    g = build_grid(build_layout(2 * np.pi - 0.4, 0.2), 64)
    assert g.dx == pytest.approx(2 * np.pi / 64, rel=1e-14)
    with pytest.raises(LayoutError):
        build_grid(layout, 4)


def test_mask_count(layout, grid512):
    # brute-force count in exact rationals: 43 nodes left of -1, 42 right of 1
    mask = build_mask(layout, grid512)
    assert int(mask.chi.sum()) == 85
    assert int(mask.gamma1.sum()) == 43
    assert int(mask.gamma2.sum()) == 42
    assert mask.chi[mask.omega].sum() == 0
    assert set(np.unique(mask.chi)) <= {0.0, 1.0}


@given(st.floats(0.5, 5.0), st.floats(0.05, 0.5), st.integers(32, 4096), st.floats(-3, 3))
def test_mask_partition(L, delta, n, center):
    lay = build_layout(L, delta, center)
    grid = build_grid(lay, n)
    mask = build_mask(lay, grid)
    counts = mask.omega.astype(int) + mask.gamma1 + mask.gamma2
    assert np.all(counts == 1)
    np.testing.assert_array_equal(mask.chi == 1.0, mask.region != Region.OMEGA)
    assert abs(mask.chi.sum() - 2 * delta / grid.dx) <= 2
    # half-open right end
    assert np.all(grid.x < lay.x0 + lay.S - 0.5 * grid.dx)
    assert grid.dx * grid.n == pytest.approx(lay.S, rel=1e-12)


def test_boundary_nodes_belong_to_omega():
    # L = 2, delta = 0.25, n = 20: dx = 0.125 puts nodes on both boundaries
    lay = build_layout(2.0, 0.25)
    grid = build_grid(lay, 20)
    mask = build_mask(lay, grid)
    on_left = np.isclose(grid.x, -1.0)
    on_right = np.isclose(grid.x, 1.0)
    assert on_left.any() and on_right.any()
    assert mask.omega[on_left].all() and mask.omega[on_right].all()


def test_wrap(grid512):
    i = np.arange(-600, 600)
    np.testing.assert_array_equal(grid512.wrap(i), i % 512)
    assert grid512.wrap(512) == 0


def test_mask_read_only(layout, grid512):
    mask = build_mask(layout, grid512)
    with pytest.raises(ValueError):
        mask.chi[0] = 0.0
