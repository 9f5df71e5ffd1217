"""Volume-constraint values on the fictitious pads.

Local boundary conditions at the ends of Omega are reproduced by
reflecting the current solution about the boundary point ``x_b``:

* Dirichlet ``u(x_b) = u_b``:  ``u_G(x) = 2 u_b - u(2 x_b - x)``
* Neumann ``u'(x_b) = q_b``:   ``u_G(x) = 2 q_b (x - x_b) + u(2 x_b - x)``

The Neumann form is the same on both sides once written in terms of
``x - x_b``. Mirror points are generally off-grid and are evaluated by
linear interpolation over Omega nodes only (see :func:`mirror_stencil`).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from .exceptions import MirrorOutOfRangeError
from .grid import BOUNDARY_TOL, DomainLayout, MaskField, PeriodicGrid, build_mask

Side = Literal["left", "right"]


@dataclass(frozen=True)
class Dirichlet:
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("Dirichlet value must be finite")


@dataclass(frozen=True)
class Neumann:
    """Prescribed slope ``du/dx`` at the boundary point."""

    slope: float

    def __post_init__(self):
        if not np.isfinite(self.slope):
            raise ValueError("Neumann slope must be finite")


BCKind = Union[Dirichlet, Neumann]


@dataclass(frozen=True)
class BoundarySpec:
    left: BCKind
    right: BCKind


@dataclass(frozen=True, eq=False)
class ConstraintField:
    values: np.ndarray
    time: float | None = None


def _omega_span(layout: DomainLayout, grid: PeriodicGrid) -> tuple[int, int]:
    idx = np.flatnonzero(build_mask(layout, grid).omega)
    if idx.size < 2:
        raise MirrorOutOfRangeError("Omega holds fewer than two grid nodes")
    return int(idx[0]), int(idx[-1])


def mirror_stencil(grid: PeriodicGrid, layout: DomainLayout, x_mirror):
    """Two-point interpolation stencil ``(i0, i1, w0, w1)`` for points in Omega.

    Points that coincide with a node (within ``1e-9 dx``) take that node's
    value exactly. Otherwise the bracketing pair is used, except that the
    pair is shifted inward when one of its nodes lies on a pad; the value
    is then linearly extrapolated from the two outermost Omega nodes over
    less than one cell. Ghost values therefore never depend on pad values,
    which would otherwise feed back on themselves through the penalization.
    """
    xm = np.atleast_1d(np.asarray(x_mirror, dtype=float))
    tol = BOUNDARY_TOL * grid.dx
    bad = (xm < layout.omega_left - tol) | (xm > layout.omega_right + tol)
    if np.any(bad):
        raise MirrorOutOfRangeError(
            f"mirror point {xm[bad][0]!r} lies outside Omega "
            f"[{layout.omega_left!r}, {layout.omega_right!r}]; is delta larger than L?")
    a, b = _omega_span(layout, grid)
    frac = (xm - grid.x0) / grid.dx
    nearest = np.rint(frac)
    on_node = np.abs(frac - nearest) <= BOUNDARY_TOL
    j = np.clip(np.floor(frac).astype(int), a, b - 1)
    theta = frac - j
    i0 = np.where(on_node, nearest.astype(int), j)
    i1 = np.where(on_node, nearest.astype(int), j + 1)
    w1 = np.where(on_node, 0.0, theta)
    w0 = np.where(on_node, 1.0, 1.0 - theta)
    return i0, i1, w0, w1


def mirror_value(y, grid: PeriodicGrid, layout: DomainLayout, x_mirror):
    """Linearly interpolated value of the nodal field ``y`` at ``x_mirror``."""
    y = np.asarray(y, dtype=float)
    i0, i1, w0, w1 = mirror_stencil(grid, layout, x_mirror)
    out = w0 * y[i0] + w1 * y[i1]
    return float(out[0]) if np.ndim(x_mirror) == 0 else out


def _side_nodes(mask: MaskField, side: Side) -> np.ndarray:
    if side == "left":
        return np.flatnonzero(mask.gamma1)
    if side == "right":
        return np.flatnonzero(mask.gamma2)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def dirichlet_ghost(y, grid: PeriodicGrid, layout: DomainLayout,
                    x_b: float, u_b: float, side: Side) -> np.ndarray:
    """Ghost values on one pad enforcing ``u(x_b) = u_b``, ordered by node index."""
    xg = grid.x[_side_nodes(build_mask(layout, grid), side)]
    return 2.0 * u_b - mirror_value(y, grid, layout, 2.0 * x_b - xg)


def neumann_ghost(y, grid: PeriodicGrid, layout: DomainLayout,
                  x_b: float, q_b: float, side: Side) -> np.ndarray:
    """Ghost values on one pad enforcing ``u'(x_b) = q_b``, ordered by node index."""
    xg = grid.x[_side_nodes(build_mask(layout, grid), side)]
    return 2.0 * q_b * (xg - x_b) + mirror_value(y, grid, layout, 2.0 * x_b - xg)


class ConstraintPlan:
    """Precomputed affine map ``y -> u_G`` for a fixed grid and boundary spec.

    Every ghost value is ``offset + sign * (w0 * y[i0] + w1 * y[i1])``, so
    assembling the constraint field each step is two gathers and a few
    vector operations.
    """

    def __init__(self, grid: PeriodicGrid, layout: DomainLayout, bcs: BoundarySpec,
                 mask: MaskField | None = None):
        self.grid = grid
        self.layout = layout
        self.bcs = bcs
        mask = build_mask(layout, grid) if mask is None else mask
        x = grid.x
        nodes, offset, sign, x_mirror = [], [], [], []
        for side, bc, x_b in (("left", bcs.left, layout.omega_left),
                              ("right", bcs.right, layout.omega_right)):
            idx = _side_nodes(mask, side)
            xg = x[idx]
            if isinstance(bc, Dirichlet):
                offset.append(np.full(idx.size, 2.0 * bc.value))
                sign.append(np.full(idx.size, -1.0))
            elif isinstance(bc, Neumann):
                offset.append(2.0 * bc.slope * (xg - x_b))
                sign.append(np.full(idx.size, 1.0))
            else:
                raise TypeError(f"unsupported boundary condition {bc!r}")
            nodes.append(idx)
            x_mirror.append(2.0 * x_b - xg)
        self.nodes = np.concatenate(nodes)
        self.offset = np.concatenate(offset)
        i0, i1, w0, w1 = mirror_stencil(grid, layout, np.concatenate(x_mirror))
        s = np.concatenate(sign)
        self.i0, self.i1 = i0, i1
        self.w0, self.w1 = s * w0, s * w1

    def ghost_values(self, y: np.ndarray) -> np.ndarray:
        return self.offset + self.w0 * y[self.i0] + self.w1 * y[self.i1]

    def apply(self, y: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Constraint values for all nodes, zero on Omega."""
        if out is None:
            out = np.zeros(self.grid.n)
        out[self.nodes] = self.ghost_values(y)
        return out


def assemble_constraints(y, grid: PeriodicGrid, layout: DomainLayout, bcs: BoundarySpec,
                         time: float | None = None) -> ConstraintField:
    plan = ConstraintPlan(grid, layout, bcs)
    return ConstraintField(plan.apply(np.asarray(y, dtype=float)), time)
