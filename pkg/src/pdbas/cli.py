"""Command-line front end.

Exit codes: 0 success, 1 configuration error or failed check, 2 diverged run.
"""
from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (StudyCase, benchmark_laplacian, operator_discrepancy, quadrature_defect,
                       relative_error_profile, sweep_epsilon, sweep_grid, write_benchmark_csv,
                       write_convergence_csv, write_csv, write_error_series_csv,
                       write_profile_csv)
from .config import RunConfig, load_config
from .exceptions import ConfigError, PDBASError, SweepError
from .grid import build_mask
from .kernel import KernelFamily, check_kernel_admissibility
from .laplacian import kernel_spectrum, laplacian_spectral, pd_laplacian_eigenvalue
from .solver import solve, stable_dt

log = logging.getLogger("pdbas")

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2
OPERATOR_RTOL = 1e-10

DETERMINISM_NOTE = ("solve and the sweeps use no random numbers; check-operator draws its "
                    "random fields from numpy.random.default_rng(analysis.seed)")


def _outdir(args, cfg: RunConfig) -> Path:
    out = Path(args.out if args.out is not None else cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, command: str, cfg: RunConfig, derived: dict, **extra) -> Path:
    config = cfg.to_dict()
    if "dt" in derived and command == "solve":
        config.setdefault("solver", {})["dt"] = derived["dt"]
    manifest = {
        "pdbas_version": __version__,
        "command": command,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "determinism": DETERMINISM_NOTE,
        "config": config,
        "derived": derived,
        **extra,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _case(cfg: RunConfig, **kw) -> StudyCase:
    kind = cfg["problem.kind"]
    if kind not in ("dirichlet_manufactured", "neumann_manufactured"):
        raise ConfigError("sweeps need a manufactured problem (problem.kind)")
    return StudyCase(problem=kind.split("_")[0], L=cfg["domain.L"], nu=cfg["solver.nu"],
                     delta=cfg["kernel.delta"], center=cfg["domain.center"],
                     dt_safety=cfg["solver.dt_safety"], **kw)


def cmd_solve(args, cfg: RunConfig) -> int:
    layout, grid, kernel = cfg.layout(), cfg.grid(), cfg.kernel()
    problem = cfg.problem()
    config = cfg.solver_config()
    result = solve(problem, layout, grid, kernel, None, config)
    out = _outdir(args, cfg)

    x = grid.x
    rows = []
    for t, y in sorted(result.snapshots.items()):
        ex = problem.exact(x, t) if problem.has_exact else None
        for i in range(grid.n):
            row = [t, x[i], y[i]]
            if ex is not None:
                row.append(ex[i])
            rows.append(row)
    header = ["t", "x", "y"] + (["exact"] if problem.has_exact else [])
    write_csv(out / "snapshots.csv", header, rows)
    if result.error_values.size:
        write_error_series_csv(result, out / "error_series.csv")
        omega = build_mask(layout, grid).omega
        for t, y in sorted(result.snapshots.items()):
            prof = relative_error_profile(y, problem.exact(x, t), result.u0_norm, omega)
            write_profile_csv(x[omega], prof, out / f"profile_t{t:.6g}.csv")

    derived = {"dt": result.dt, "dt_bound": stable_dt(config.nu, kernel.beta, config.eps),
               "beta": kernel.beta, "dx": grid.dx, "n": grid.n, "S": layout.S,
               "eps": config.eps, "steps": result.steps, "u0_norm": result.u0_norm}
    _write_manifest(out, "solve", cfg, derived, status=result.status,
                    max_rel_error=result.max_error if result.error_values.size else None,
                    timings=result.timings)
    if not args.quiet:
        print(f"status={result.status} steps={result.steps} dt={result.dt:.6g} "
              f"t_final={result.final.t:.6g}")
        if result.error_values.size:
            print(f"max relative error over time: {result.max_error:.6e} "
                  f"(final {result.final_error:.6e})")
        print(f"outputs written to {out}")
    if not result.completed:
        print(f"error: run diverged: {result.message}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_check_operator(args, cfg: RunConfig) -> int:
    grid, kernel = cfg.grid(), cfg.kernel()
    out = _outdir(args, cfg)
    gap = operator_discrepancy(kernel, grid, trials=cfg["analysis.trials"],
                               seed=cfg["analysis.seed"])
    report = check_kernel_admissibility(kernel, grid)
    write_csv(out / "admissibility.csv", ["k", "margin"],
              zip(report.wavenumbers.tolist(), report.margins.tolist()))
    derived = {"n": grid.n, "dx": grid.dx, "beta": kernel.beta,
               "max_discrepancy": gap, "worst_margin": report.worst_margin,
               "margin_tolerance": report.tolerance,
               "kernel_sum_minus_beta": quadrature_defect(kernel, grid)}
    if kernel.family is KernelFamily.TRIANGULAR_ALPHA0:
        c = 2.0 * np.pi * 2 / grid.S
        u = np.sin(c * grid.x)
        lam = pd_laplacian_eigenvalue(c, kernel)
        lu = laplacian_spectral(u, kernel_spectrum(kernel, grid), kernel.beta, grid.dx)
        derived["eigen_wavenumber"] = c
        derived["eigen_rel_error"] = float(np.max(np.abs(lu - lam * u)) / abs(lam))
    _write_manifest(out, "check-operator", cfg, derived)
    ok = gap <= OPERATOR_RTOL and report.admissible
    if not args.quiet:
        print(f"max spectral/quadrature discrepancy: {gap:.3e} (limit {OPERATOR_RTOL:g})")
        print(f"kernel admissibility: worst margin {report.worst_margin:.3e} "
              f"(tolerance {report.tolerance:.3e}) -> "
              f"{'ok' if report.admissible else 'VIOLATED'}")
        if "eigen_rel_error" in derived:
            print(f"eigen-relation error at c={derived['eigen_wavenumber']:.6g}: "
                  f"{derived['eigen_rel_error']:.3e}")
    if not ok:
        print("error: operator check failed", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cmd_bench(args, cfg: RunConfig) -> int:
    out = _outdir(args, cfg)
    report = benchmark_laplacian(cfg["analysis.bench_n"], cfg["analysis.bench_repetitions"],
                                 delta=cfg["kernel.delta"])
    write_benchmark_csv(report, out / "benchmark.csv")
    derived = {"exponents": report.exponents, "repetitions": report.repetitions}
    _write_manifest(out, "bench", cfg, derived)
    if not args.quiet:
        print(f"{'n':>8} {'quadrature [s]':>15} {'spectral [s]':>13} {'ratio':>8}")
        for n, q, s in zip(report.n, report.quadrature_seconds, report.spectral_seconds):
            print(f"{n:>8d} {q:>15.3e} {s:>13.3e} {q / s:>8.1f}")
        for method, e in report.exponents.items():
            print(f"fitted exponent ({method}): {e:.3f}")
    return EXIT_OK


def _print_report(report, label):
    print(f"{label:>12} {'error':>14}")
    for p, e in report.rows():
        print(f"{p:>12.4e} {e:>14.6e}")
    print(f"fitted slope: {report.slope:.3f} (R^2 = {report.r2:.4f})")


def cmd_sweep_eps(args, cfg: RunConfig) -> int:
    case = _case(cfg, n=cfg["analysis.sweep_eps_n"], t_max=cfg["analysis.sweep_eps_t_max"])
    report = sweep_epsilon(case, cfg["analysis.sweep_eps"], jobs=cfg["analysis.jobs"])
    out = _outdir(args, cfg)
    write_convergence_csv(report, out / "convergence_eps.csv")
    _write_manifest(out, "sweep-eps", cfg, {"dt": report.dt, "slope": report.slope,
                                             "intercept": report.intercept, "r2": report.r2,
                                             **report.extra})
    if not args.quiet:
        _print_report(report, "eps")
    return EXIT_OK


def cmd_sweep_grid(args, cfg: RunConfig) -> int:
    case = _case(cfg, eps=cfg["analysis.sweep_grid_eps"], t_max=cfg["analysis.sweep_grid_t_max"])
    report = sweep_grid(case, cfg["analysis.sweep_grid_n"], jobs=cfg["analysis.jobs"])
    out = _outdir(args, cfg)
    write_convergence_csv(report, out / "convergence_dx.csv")
    _write_manifest(out, "sweep-grid", cfg, {"dt": report.dt, "slope": report.slope,
                                              "intercept": report.intercept, "r2": report.r2,
                                              **report.extra})
    if not args.quiet:
        _print_report(report, "dx")
    return EXIT_OK


COMMANDS = {
    "solve": (cmd_solve, "run the penalized solver and write snapshots"),
    "check-operator": (cmd_check_operator, "compare spectral and quadrature Laplacians"),
    "bench": (cmd_bench, "time both Laplacian evaluations over a range of n"),
    "sweep-eps": (cmd_sweep_eps, "convergence study in the penalization factor"),
    "sweep-grid": (cmd_sweep_grid, "convergence study in the grid spacing"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file or a manifest.json from an earlier run")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. --set solver.eps=1e-4 (repeatable)")
    common.add_argument("--quiet", action="store_true", help="only report errors")
    parser = argparse.ArgumentParser(prog="pdbas", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.set)
        return COMMANDS[args.command][0](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (PDBASError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
