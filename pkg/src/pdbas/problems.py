"""Manufactured test problems with known nonlocal solutions.

Both reference problems have the separable form

    u(x, t) = 2 x / L + exp(-nu t) * m(x),    f(x, t) = A * exp(-nu t) * m(x)

with ``m = sin(2 pi x / L)`` (Dirichlet ends, u = -1 and +1) or
``m = cos(2 pi x / L)`` (Neumann ends, u' = 1 at both). The linear part is
annihilated by the even kernel and ``m`` is an eigenfunction, which makes
``A`` a constant. Both fields also satisfy the reflection relations of the
fictitious-node scheme exactly, so the analytic field can be sampled on the
pads.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .constraints import BoundarySpec, Dirichlet, Neumann
from .grid import PeriodicGrid, build_layout, build_mask
from .kernel import KernelSpec
from .laplacian import laplacian_quadrature


@dataclass(frozen=True)
class ManufacturedProblem:
    """Problem data in separable form.

    ``exact = steady(x) + exp(-rate t) * transient(x)`` and
    ``source = exp(-rate t) * forcing(x)``. ``transient`` and ``forcing``
    may be ``None`` (treated as zero). ``has_exact`` is false for problems
    built from initial data only, where ``exact`` is just the frozen
    initial state and must not be used as a reference.
    """

    name: str
    L: float
    nu: float
    delta: float
    bcs: BoundarySpec
    steady: Callable
    transient: Callable | None = None
    forcing: Callable | None = None
    rate: float = 0.0
    center: float = 0.0
    has_exact: bool = True

    def _zeros(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def source_profile(self, x):
        return self._zeros(x) if self.forcing is None else self.forcing(np.asarray(x, float))

    def exact(self, x, t: float):
        x = np.asarray(x, dtype=float)
        out = self.steady(x)
        if self.transient is not None:
            out = out + np.exp(-self.rate * t) * self.transient(x)
        return out

    def time_derivative(self, x, t: float):
        if self.transient is None:
            return self._zeros(x)
        return -self.rate * np.exp(-self.rate * t) * self.transient(np.asarray(x, float))

    def source(self, x, t: float):
        return np.exp(-self.rate * t) * self.source_profile(x)

    def initial(self, x):
        return self.exact(x, 0.0)

    def initial_norm(self, samples: int = 20001) -> float:
        """``max |u(x, 0)|`` over Omega by dense sampling (grid independent)."""
        xs = np.linspace(self.center - 0.5 * self.L, self.center + 0.5 * self.L, samples)
        return float(np.max(np.abs(self.initial(xs))))


def forcing_amplitude(L: float, nu: float, delta: float) -> float:
    """``nu * {6 L^2/(delta^4 pi^2) [cos(2 pi delta/L) - 1] + 12/delta^2 - 1}``."""
    return nu * (6.0 * L**2 / (delta**4 * np.pi**2) * (np.cos(2.0 * np.pi * delta / L) - 1.0)
                 + 12.0 / delta**2 - 1.0)


def _check(L, nu, delta):
    for name, v in (("L", L), ("nu", nu), ("delta", delta)):
        if not (np.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be positive, got {v!r}")


def dirichlet_problem(L: float, nu: float, delta: float, center: float = 0.0) -> ManufacturedProblem:
    _check(L, nu, delta)
    c = 2.0 * np.pi / L
    amp = forcing_amplitude(L, nu, delta)
    return ManufacturedProblem(
        name="dirichlet_manufactured", L=L, nu=nu, delta=delta, center=center,
        bcs=BoundarySpec(Dirichlet(-1.0), Dirichlet(1.0)),
        steady=lambda x: 2.0 * (x - center) / L,
        transient=lambda x: np.sin(c * (x - center)),
        forcing=lambda x: amp * np.sin(c * (x - center)),
        rate=nu,
    )


def neumann_problem(L: float, nu: float, delta: float, center: float = 0.0) -> ManufacturedProblem:
    _check(L, nu, delta)
    c = 2.0 * np.pi / L
    amp = forcing_amplitude(L, nu, delta)
    return ManufacturedProblem(
        name="neumann_manufactured", L=L, nu=nu, delta=delta, center=center,
        bcs=BoundarySpec(Neumann(1.0), Neumann(1.0)),
        steady=lambda x: 2.0 * (x - center) / L,
        transient=lambda x: np.cos(c * (x - center)),
        forcing=lambda x: amp * np.cos(c * (x - center)),
        rate=nu,
    )


def load_initial_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``x,value`` rows (header optional) sorted by ``x``."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if lineno == 1:
                    continue
                raise ValueError(f"{path}:{lineno}: expected 'x,value'")
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two samples")
    data = np.array(sorted(rows))
    return data[:, 0], data[:, 1]


def custom_problem(x_samples, values, bcs: BoundarySpec, L: float, nu: float,
                   delta: float, center: float = 0.0) -> ManufacturedProblem:
    """Zero-source problem started from tabulated initial data.

    The table is interpolated linearly and held constant beyond its ends.
    """
    _check(L, nu, delta)
    xs = np.asarray(x_samples, dtype=float)
    vs = np.asarray(values, dtype=float)
    return ManufacturedProblem(
        name="custom", L=L, nu=nu, delta=delta, center=center, bcs=bcs,
        steady=lambda x: np.interp(x, xs, vs), has_exact=False,
    )


def pde_residual(problem: ManufacturedProblem, grid: PeriodicGrid, t: float) -> float:
    """Max over Omega of ``|du/dt - nu L u - f|`` with the exact field on all nodes.

    The Laplacian is the direct quadrature with the triangular kernel; the
    time derivative is analytic.
    """
    layout = build_layout(problem.L, problem.delta, problem.center)
    omega = build_mask(layout, grid).omega
    x = grid.x
    u = problem.exact(x, t)
    lap = laplacian_quadrature(u, KernelSpec.triangular(problem.delta), grid)
    res = problem.time_derivative(x, t) - problem.nu * lap - problem.source(x, t)
    return float(np.max(np.abs(res[omega])))
