"""Error metrics, convergence sweeps, operator benchmark and CSV output."""
from __future__ import annotations

import csv
import logging
import timeit
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .exceptions import SweepError
from .grid import PeriodicGrid, build_grid, build_layout, build_mask
from .kernel import KernelSpec, sample_circular_kernel
from .laplacian import kernel_spectrum, laplacian_quadrature, laplacian_spectral
from .problems import ManufacturedProblem, dirichlet_problem, neumann_problem
from .solver import SolveResult, SolverConfig, solve, stable_dt

log = logging.getLogger(__name__)

PROBLEMS = {"dirichlet": dirichlet_problem, "neumann": neumann_problem}


def relative_error_profile(y, exact, u0_norm: float, omega) -> np.ndarray:
    """``|y - exact| / u0_norm`` on the Omega nodes only."""
    if not u0_norm > 0:
        raise ValueError("u0_norm must be positive")
    omega = np.asarray(omega, dtype=bool)
    return np.abs(np.asarray(y)[omega] - np.asarray(exact)[omega]) / u0_norm


def max_relative_error(y, exact, u0_norm: float, omega) -> float:
    return float(np.max(relative_error_profile(y, exact, u0_norm, omega)))


def fit_loglog_slope(x, y) -> tuple[float, float, float]:
    """Least-squares line through ``(log x, log y)``; returns slope, intercept, R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size or x.size < 3:
        raise ValueError("need at least three points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive coordinates")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


@dataclass(frozen=True)
class StudyCase:
    """Parameters of one manufactured-problem run, kept picklable for worker pools."""

    problem: str = "dirichlet"
    L: float = 2.0
    nu: float = 0.2
    delta: float = 0.2
    center: float = 0.0
    n: int = 512
    eps: float = 5e-4
    t_max: float = 15.0
    dt: float | None = None
    dt_safety: float = 0.9
    error_every: int = 1

    def build_problem(self) -> ManufacturedProblem:
        try:
            factory = PROBLEMS[self.problem]
        except KeyError:
            raise ValueError(f"unknown problem {self.problem!r}") from None
        return factory(self.L, self.nu, self.delta, self.center)


def run_case(case: StudyCase) -> SolveResult:
    layout = build_layout(case.L, case.delta, case.center)
    grid = build_grid(layout, case.n)
    config = SolverConfig(nu=case.nu, eps=case.eps, t_max=case.t_max, dt=case.dt,
                          dt_safety=case.dt_safety, record_error_series=True,
                          error_every=case.error_every)
    return solve(case.build_problem(), layout, grid, KernelSpec.triangular(case.delta),
                 None, config)


def _run_all(cases: list[StudyCase], jobs: int) -> list[SolveResult]:
    if jobs > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(cases))) as pool:
            return list(pool.map(run_case, cases))
    return [run_case(c) for c in cases]


@dataclass
class ConvergenceReport:
    kind: str
    params: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float
    r2: float
    dt: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.params.size < 3:
            raise ValueError("a convergence report needs at least three rows")

    def rows(self):
        return list(zip(self.params.tolist(), self.errors.tolist()))


def _check_diverged(cases, results):
    for case, res in zip(cases, results):
        if not res.completed:
            raise SweepError(f"run {case} diverged after {res.steps} steps: {res.message}")


def sweep_epsilon(case: StudyCase, eps_values, dt: float | None = None,
                  jobs: int = 1) -> ConvergenceReport:
    """Error at ``t_max`` for each penalization factor, at fixed ``n`` and ``dt``.

    ``dt`` defaults to ``case.dt_safety`` times the stability bound for the
    smallest factor, so every run shares the same time step.
    """
    eps = np.asarray(eps_values, dtype=float)
    if eps.size < 3:
        raise ValueError("need at least three eps values")
    steps = np.diff(eps)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("eps values must be strictly monotone (no repeats)")
    if np.any(eps <= 0):
        raise ValueError("eps values must be positive")
    if eps.max() / eps.min() < 100:
        raise ValueError("eps values should span at least two decades")
    if dt is None:
        beta = KernelSpec.triangular(case.delta).beta
        dt = case.dt_safety * stable_dt(case.nu, beta, float(eps.min()))
    # only the final-time error is needed
    every = 1 << 62
    cases = [replace(case, eps=float(e), dt=dt, error_every=every) for e in eps]
    results = _run_all(cases, jobs)
    _check_diverged(cases, results)
    errors = np.array([r.final_error for r in results])
    slope, intercept, r2 = fit_loglog_slope(eps, errors)
    return ConvergenceReport("epsilon", eps, errors, slope, intercept, r2, dt=dt,
                             extra={"n": case.n, "t_max": case.t_max})


def sweep_grid(case: StudyCase, n_values, jobs: int = 1) -> ConvergenceReport:
    """Max-over-time error for each grid size, at fixed ``eps`` and ``dt``.

    The parameter recorded is ``dx = S / n``.
    """
    ns = np.asarray(n_values, dtype=int)
    if ns.size < 3:
        raise ValueError("need at least three grid sizes")
    if np.any(ns[1:] != 2 * ns[:-1]):
        raise ValueError("grid sizes must double from one entry to the next")
    dt = case.dt
    if dt is None:
        dt = case.dt_safety * stable_dt(case.nu, KernelSpec.triangular(case.delta).beta, case.eps)
    cases = [replace(case, n=int(n), dt=dt, error_every=1) for n in ns]
    results = _run_all(cases, jobs)
    _check_diverged(cases, results)
    S = case.L + 2 * case.delta
    dx = S / ns
    errors = np.array([r.max_error for r in results])
    slope, intercept, r2 = fit_loglog_slope(dx, errors)
    return ConvergenceReport("dx", dx, errors, slope, intercept, r2, dt=dt,
                             extra={"n": ns.tolist(), "eps": case.eps, "t_max": case.t_max})


def error_peak(result: SolveResult, problem: ManufacturedProblem, layout, grid) -> tuple[float, float]:
    """Location of the largest final-time error on Omega and its distance to the boundary."""
    omega = build_mask(layout, grid).omega
    x = grid.x[omega]
    err = np.abs(result.final.y[omega] - problem.exact(x, result.final.t))
    xp = float(x[np.argmax(err)])
    return xp, min(xp - layout.omega_left, layout.omega_right - xp)


@dataclass
class BenchmarkReport:
    n: np.ndarray
    quadrature_seconds: np.ndarray
    spectral_seconds: np.ndarray
    repetitions: int
    exponents: dict[str, float]

    def rows(self):
        out = []
        for n, q, s in zip(self.n.tolist(), self.quadrature_seconds.tolist(),
                           self.spectral_seconds.tolist()):
            out.append((n, "quadrature", q))
            out.append((n, "spectral", s))
        return out

    def speedup(self, n: int) -> float:
        i = int(np.flatnonzero(self.n == n)[0])
        return float(self.quadrature_seconds[i] / self.spectral_seconds[i])


def _best_time(fn, repetitions: int) -> float:
    timer = timeit.Timer(fn)
    # autorange doubles as the warm-up run
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repetitions, number=number)) / number


def benchmark_laplacian(n_values, repetitions: int = 3, delta: float = 0.2,
                        half_width: float = 1.0) -> BenchmarkReport:
    """Time both Laplacian evaluations of ``sin(pi x)`` on ``[-half_width, half_width)``.

    Each entry is checked for agreement (1e-10 relative) before it is timed.
    Entries run sequentially; numpy's FFT and the compiled quadrature loop are
    both single-threaded. Reported times are the minimum over
    ``repetitions`` after a warm-up.
    """
    if repetitions < 3:
        raise ValueError("need at least three repetitions")
    kernel = KernelSpec.triangular(delta)
    ns = np.asarray(n_values, dtype=int)
    tq, ts = [], []
    for n in ns:
        grid = PeriodicGrid(int(n), -half_width, 2.0 * half_width / int(n))
        u = np.sin(np.pi * grid.x)
        khat = np.array(kernel_spectrum(kernel, grid))
        quad = laplacian_quadrature(u, kernel, grid)
        spec = laplacian_spectral(u, khat, kernel.beta, grid.dx)
        gap = np.max(np.abs(quad - spec)) / np.max(np.abs(quad))
        if gap > 1e-10:
            raise SweepError(f"n={n}: spectral and quadrature disagree by {gap:.2e}")
        tq.append(_best_time(lambda: laplacian_quadrature(u, kernel, grid), repetitions))
        ts.append(_best_time(lambda: laplacian_spectral(u, khat, kernel.beta, grid.dx),
                             repetitions))
        log.info("n=%d quadrature %.3e s spectral %.3e s", n, tq[-1], ts[-1])
    tq, ts = np.array(tq), np.array(ts)
    exps = {}
    if ns.size >= 3:
        exps = {"quadrature": fit_loglog_slope(ns, tq)[0],
                "spectral": fit_loglog_slope(ns, ts)[0]}
    return BenchmarkReport(ns, tq, ts, repetitions, exps)


def operator_discrepancy(kernel: KernelSpec, grid: PeriodicGrid, trials: int = 100,
                         seed: int = 0) -> float:
    """Worst relative gap between the two Laplacians over random fields."""
    rng = np.random.default_rng(seed)
    khat = kernel_spectrum(kernel, grid)
    worst = 0.0
    for _ in range(trials):
        u = rng.standard_normal(grid.n)
        quad = laplacian_quadrature(u, kernel, grid)
        spec = laplacian_spectral(u, khat, kernel.beta, grid.dx)
        worst = max(worst, float(np.max(np.abs(spec - quad)) / np.max(np.abs(quad))))
    return worst


def quadrature_defect(kernel: KernelSpec, grid: PeriodicGrid) -> float:
    """``sum_p w_p dx - beta``: how far the sampled kernel misses its integral."""
    return float(sample_circular_kernel(kernel, grid).sum() * grid.dx - kernel.beta)


# CSV output -----------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return v


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_convergence_csv(report: ConvergenceReport, path) -> Path:
    return write_csv(path, ["param", "error"], report.rows())


def write_benchmark_csv(report: BenchmarkReport, path) -> Path:
    return write_csv(path, ["n", "method", "seconds"], report.rows())


def write_error_series_csv(result: SolveResult, path) -> Path:
    return write_csv(path, ["t", "max_rel_error"],
                     zip(result.error_times.tolist(), result.error_values.tolist()))


def write_profile_csv(x, profile, path) -> Path:
    return write_csv(path, ["x", "rel_error"], zip(np.asarray(x).tolist(),
                                                   np.asarray(profile).tolist()))
