"""Penalized right-hand side and forward Euler time stepping.

The semi-discrete system on the periodic grid is

    dy/dt = nu * (mu * y - beta * y) + f - (chi / eps) * (y - y_G)

where ``chi`` marks the pad nodes and ``y_G`` holds the ghost values built
from the previous step's solution. Each step updates ``y``, then samples
the source at the new time, then rebuilds ``y_G`` from the new ``y``.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .constraints import BoundarySpec, ConstraintPlan
from .exceptions import DivergenceError
from .grid import DomainLayout, MaskField, PeriodicGrid, build_mask
from .kernel import KernelSpec
from .laplacian import kernel_rspectrum, laplacian_spectral, laplacian_spectral_real
from .problems import ManufacturedProblem

log = logging.getLogger(__name__)

#: Abort threshold on the sup norm of the solution.
DIVERGENCE_THRESHOLD = 1e12


def stable_dt(nu: float, beta: float, eps: float, safety: float = 1.0) -> float:
    """Largest forward Euler step ``safety * 2 / (1/eps + 2 nu beta)``."""
    if min(nu, beta, eps, safety) <= 0:
        raise ValueError("nu, beta, eps and safety must all be positive")
    return safety * 2.0 / (1.0 / eps + 2.0 * nu * beta)


@dataclass(frozen=True)
class SolverConfig:
    nu: float
    eps: float
    t_max: float
    dt: float | None = None
    dt_safety: float = 0.9
    snapshot_times: tuple[float, ...] = ()
    record_error_series: bool = False
    #: Record the error every this many steps (the final step is always recorded).
    error_every: int = 1
    #: Reject an explicit ``dt`` above the stability bound. Only switched off
    #: to probe the instability on purpose.
    enforce_bound: bool = True

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu!r}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps!r}")
        if not self.t_max >= 0:
            raise ValueError(f"t_max must be nonnegative, got {self.t_max!r}")
        if not 0 < self.dt_safety <= 1:
            raise ValueError(f"dt_safety must lie in (0, 1], got {self.dt_safety!r}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if int(self.error_every) < 1:
            raise ValueError("error_every must be >= 1")
        object.__setattr__(self, "snapshot_times", tuple(float(t) for t in self.snapshot_times))

    def resolve_dt(self, beta: float) -> float:
        bound = stable_dt(self.nu, beta, self.eps)
        if self.dt is None:
            return self.dt_safety * bound
        if self.enforce_bound and self.dt > bound * (1 + 1e-12):
            raise ValueError(f"dt={self.dt!r} exceeds the stability bound {bound!r}")
        return float(self.dt)


@dataclass(frozen=True, eq=False)
class Discretization:
    """Everything about the spatial discretization that stays fixed in time."""

    layout: DomainLayout
    grid: PeriodicGrid
    kernel: KernelSpec
    mask: MaskField
    kernel_rhat: np.ndarray
    constraints: ConstraintPlan

    @classmethod
    def build(cls, layout: DomainLayout, grid: PeriodicGrid, kernel: KernelSpec,
              bcs: BoundarySpec) -> Discretization:
        mask = build_mask(layout, grid)
        return cls(layout, grid, kernel, mask, kernel_rspectrum(kernel, grid),
                   ConstraintPlan(grid, layout, bcs, mask))


@dataclass(frozen=True, eq=False)
class SolveState:
    step: int
    t: float
    y: np.ndarray
    y_gamma: np.ndarray
    f: np.ndarray


@dataclass(eq=False)
class SolveResult:
    status: str
    dt: float
    steps: int
    x: np.ndarray
    final: SolveState
    snapshots: dict[float, np.ndarray] = field(default_factory=dict)
    error_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    error_values: np.ndarray = field(default_factory=lambda: np.empty(0))
    u0_norm: float | None = None
    timings: dict[str, float] = field(default_factory=dict)
    message: str = ""

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    @property
    def max_error(self) -> float:
        """Largest recorded relative error over time."""
        return float(np.max(self.error_values)) if self.error_values.size else float("nan")

    @property
    def final_error(self) -> float:
        return float(self.error_values[-1]) if self.error_values.size else float("nan")


def penalized_rhs(y, y_gamma, f, chi, nu: float, eps: float, kernel_hat,
                  beta: float, dx: float) -> np.ndarray:
    """``nu * L y + f - (chi/eps) (y - y_gamma)`` with the full-spectrum Laplacian."""
    chi = chi.chi if isinstance(chi, MaskField) else np.asarray(chi, dtype=float)
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise DivergenceError("solution is not finite")
    rhs = nu * laplacian_spectral(y, kernel_hat, beta, dx) + f - chi / eps * (y - y_gamma)
    if not np.all(np.isfinite(rhs)):
        raise DivergenceError("right-hand side is not finite")
    return rhs


def _rhs(y, y_gamma, f, disc: Discretization, nu: float, penalty: np.ndarray) -> np.ndarray:
    rhs = laplacian_spectral_real(y, disc.kernel_rhat, disc.kernel.beta)
    rhs *= nu
    rhs += f
    rhs -= penalty * (y - y_gamma)
    return rhs


def step_forward_euler(state: SolveState, dt: float, nu: float, eps: float,
                       disc: Discretization, source: Callable[[float], np.ndarray],
                       penalty: np.ndarray | None = None) -> SolveState:
    """Advance one forward Euler step.

    Order: update ``y`` from the current rhs, sample the source at the new
    time, rebuild the ghost values from the new ``y``. Raises
    :class:`DivergenceError` (carrying ``state``) if the new solution is
    non-finite or exceeds ``DIVERGENCE_THRESHOLD``.
    """
    if penalty is None:
        penalty = disc.mask.chi / eps
    y = state.y + dt * _rhs(state.y, state.y_gamma, state.f, disc, nu, penalty)
    norm = np.max(np.abs(y))
    if not norm <= DIVERGENCE_THRESHOLD:
        raise DivergenceError(f"sup norm {norm:.3e} at step {state.step + 1}", state)
    step = state.step + 1
    t = step * dt
    return SolveState(step, t, y, disc.constraints.apply(y), source(t))


def solve(problem: ManufacturedProblem, layout: DomainLayout, grid: PeriodicGrid,
          kernel: KernelSpec, bcs: BoundarySpec | None, config: SolverConfig) -> SolveResult:
    """Run the penalized problem from ``t = 0`` while ``t < t_max``.

    The initial condition is sampled on every node (pads included); the
    ghost values are then assembled from it before the first step.
    Snapshot times are rounded to the nearest step. When requested and the
    problem has an exact solution, the max relative error over Omega is
    recorded against ``max |u(x, 0)|``.
    """
    t_start = time.perf_counter()
    bcs = problem.bcs if bcs is None else bcs
    disc = Discretization.build(layout, grid, kernel, bcs)
    dt = config.resolve_dt(kernel.beta)
    nu, eps = config.nu, config.eps
    x = grid.x
    omega = disc.mask.omega
    x_omega = x[omega]
    penalty = disc.mask.chi / eps

    profile = problem.source_profile(x)
    rate = problem.rate

    def source(t):
        return profile * np.exp(-rate * t)

    n_steps = int(np.ceil(config.t_max / dt * (1 - 1e-12)))
    snap_steps = {}
    for ts in config.snapshot_times:
        snap_steps.setdefault(min(int(round(ts / dt)), n_steps), []).append(ts)

    y0 = np.asarray(problem.initial(x), dtype=float)
    state = SolveState(0, 0.0, y0, disc.constraints.apply(y0), source(0.0))

    track = config.record_error_series and problem.has_exact
    u0_norm = problem.initial_norm() if problem.has_exact else None
    steady = problem.steady(x_omega) if track else None
    transient = (problem.transient(x_omega) if track and problem.transient is not None
                 else None)
    err_t, err_v = [], []
    every = int(config.error_every)

    def record_error(s: SolveState):
        exact = steady if transient is None else steady + np.exp(-rate * s.t) * transient
        err_t.append(s.t)
        err_v.append(float(np.max(np.abs(s.y[omega] - exact))) / u0_norm)

    snapshots = {0.0: y0.copy()}
    if track:
        record_error(state)
    t_setup = time.perf_counter()

    status, message = "completed", ""
    try:
        while state.step < n_steps:
            state = step_forward_euler(state, dt, nu, eps, disc, source, penalty)
            if track and (state.step % every == 0 or state.step == n_steps):
                record_error(state)
            if state.step in snap_steps:
                snapshots[state.t] = state.y.copy()
    except DivergenceError as exc:
        status, message = "diverged", str(exc)
        state = exc.state
        log.warning("solve diverged: %s", exc)
    t_end = time.perf_counter()

    return SolveResult(
        status=status, dt=dt, steps=state.step, x=x, final=state,
        snapshots=snapshots, error_times=np.array(err_t), error_values=np.array(err_v),
        u0_norm=u0_norm, message=message,
        timings={"setup": t_setup - t_start, "time_loop": t_end - t_setup,
                 "total": t_end - t_start},
    )
