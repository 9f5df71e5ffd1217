"""Run configuration: loading, overrides, validation and object builders.

A configuration is a TOML file whose tables mirror the dotted keys below
(``[solver]`` holds ``solver.nu`` and so on). A ``manifest.json`` written by a
previous run is accepted as well; its ``config`` block is used. Missing keys
take the defaults, which reproduce the Dirichlet example (L = 2, nu = 0.2,
delta = 0.2, n = 512, eps = 5e-4, t_max = 15).
"""
from __future__ import annotations

import json
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .constraints import BoundarySpec, Dirichlet, Neumann
from .exceptions import ConfigError, InvalidKernelError
from .grid import build_grid, build_layout
from .kernel import KernelSpec, load_kernel_table
from .problems import custom_problem, dirichlet_problem, load_initial_csv, neumann_problem
from .solver import SolverConfig, stable_dt

_NUM = (int, float)

#: dotted key -> (accepted types, default). ``None`` default means optional.
SCHEMA: dict[str, tuple[tuple[type, ...], Any]] = {
    "domain.L": (_NUM, 2.0),
    "domain.center": (_NUM, 0.0),
    "grid.n": ((int,), 512),
    "kernel.family": ((str,), "triangular_alpha0"),
    "kernel.delta": (_NUM, 0.2),
    "kernel.samples_path": ((str,), None),
    "kernel.beta": (_NUM, None),
    "bc.left.kind": ((str,), None),
    "bc.left.value": (_NUM, None),
    "bc.right.kind": ((str,), None),
    "bc.right.value": (_NUM, None),
    "solver.nu": (_NUM, 0.2),
    "solver.eps": (_NUM, 5e-4),
    "solver.dt": (_NUM, None),
    "solver.dt_safety": (_NUM, 0.9),
    "solver.t_max": (_NUM, 15.0),
    "solver.snapshots": ((list,), [0.0, 5.0, 10.0, 15.0]),
    "solver.record_error": ((bool,), True),
    "problem.kind": ((str,), "dirichlet_manufactured"),
    "problem.initial_path": ((str,), None),
    "analysis.seed": ((int,), 0),
    "analysis.trials": ((int,), 100),
    "analysis.bench_n": ((list,), [2**k for k in range(8, 15)]),
    "analysis.bench_repetitions": ((int,), 3),
    "analysis.sweep_eps": ((list,), [1e-2, 1e-3, 1e-4]),
    "analysis.sweep_eps_n": ((int,), 4096),
    "analysis.sweep_eps_t_max": (_NUM, 5.0),
    "analysis.sweep_grid_n": ((list,), [128, 256, 512, 1024]),
    "analysis.sweep_grid_eps": (_NUM, 1e-5),
    "analysis.sweep_grid_t_max": (_NUM, 2.0),
    "analysis.jobs": ((int,), 1),
    "output.dir": ((str,), "pdbas-out"),
}

PROBLEM_KINDS = ("dirichlet_manufactured", "neumann_manufactured", "custom")
KERNEL_FAMILIES = ("triangular_alpha0", "custom")
BC_KINDS = ("dirichlet", "neumann")


def _flatten(tree: dict, prefix: str = "") -> dict[str, Any]:
    flat = {}
    for key, value in tree.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, path + "."))
        else:
            flat[path] = value
    return flat


def _nest(flat: dict[str, Any]) -> dict:
    tree: dict = {}
    for path, value in flat.items():
        node = tree
        *parents, leaf = path.split(".")
        for p in parents:
            node = node.setdefault(p, {})
        node[leaf] = value
    return tree


def _line_of(text: str | None, key: str) -> str:
    if not text:
        return ""
    leaf = re.escape(key.rsplit(".", 1)[-1])
    for lineno, line in enumerate(text.splitlines(), start=1):
        if re.match(rf'\s*"?{leaf}"?\s*[=:]', line):
            return f"line {lineno}: "
    return ""


def _coerce(key: str, value: Any, text: str | None = None) -> Any:
    types, _ = SCHEMA[key]
    if value is None:
        return None
    if isinstance(value, bool) and bool not in types:
        raise ConfigError(f"{_line_of(text, key)}{key} must be a number, got {value!r}")
    if not isinstance(value, types):
        names = "/".join(t.__name__ for t in types)
        raise ConfigError(f"{_line_of(text, key)}{key} must be {names}, got {value!r}")
    if types is _NUM:
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{_line_of(text, key)}{key} must be finite")
    return value


def _parse_override(item: str) -> tuple[str, Any]:
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, raw = (s.strip() for s in item.split("=", 1))
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return key, value


@dataclass(frozen=True)
class RunConfig:
    """Validated, fully resolved configuration (flat dotted keys)."""

    values: dict[str, Any]
    source: str | None = None

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def to_dict(self) -> dict:
        return _nest({k: v for k, v in self.values.items() if v is not None})

    # builders -------------------------------------------------------------
    def layout(self):
        return build_layout(self["domain.L"], self["kernel.delta"], self["domain.center"])

    def grid(self):
        return build_grid(self.layout(), self["grid.n"])

    def kernel(self) -> KernelSpec:
        if self["kernel.family"] == "triangular_alpha0":
            return KernelSpec.triangular(self["kernel.delta"])
        off, val = load_kernel_table(self["kernel.samples_path"])
        return KernelSpec.custom(off, val, self["kernel.beta"])

    def boundary_spec(self) -> BoundarySpec:
        def one(side):
            kind, value = self[f"bc.{side}.kind"], self[f"bc.{side}.value"]
            return Dirichlet(value) if kind == "dirichlet" else Neumann(value)
        return BoundarySpec(one("left"), one("right"))

    def problem(self):
        L, nu, d, c = (self["domain.L"], self["solver.nu"], self["kernel.delta"],
                       self["domain.center"])
        kind = self["problem.kind"]
        if kind == "dirichlet_manufactured":
            return dirichlet_problem(L, nu, d, c)
        if kind == "neumann_manufactured":
            return neumann_problem(L, nu, d, c)
        xs, vs = load_initial_csv(self["problem.initial_path"])
        return custom_problem(xs, vs, self.boundary_spec(), L, nu, d, c)

    def solver_config(self) -> SolverConfig:
        return SolverConfig(nu=self["solver.nu"], eps=self["solver.eps"],
                            t_max=self["solver.t_max"], dt=self["solver.dt"],
                            dt_safety=self["solver.dt_safety"],
                            snapshot_times=tuple(self["solver.snapshots"]),
                            record_error_series=self["solver.record_error"])

    def resolved_dt(self) -> float:
        return self.solver_config().resolve_dt(self.kernel().beta)


def validate(raw: dict[str, Any], text: str | None = None, source: str | None = None) -> RunConfig:
    """Check keys, types and cross-field constraints; fill defaults."""
    vals = {}
    for key, value in raw.items():
        if key not in SCHEMA:
            raise ConfigError(f"{_line_of(text, key)}unknown configuration key {key!r}")
        vals[key] = _coerce(key, value, text)
    for key, (_, default) in SCHEMA.items():
        vals.setdefault(key, list(default) if isinstance(default, list) else default)

    def fail(key, msg):
        raise ConfigError(f"{_line_of(text, key)}{key}: {msg}")

    L, delta, n = vals["domain.L"], vals["kernel.delta"], vals["grid.n"]
    if L <= 0:
        fail("domain.L", "must be positive")
    if delta <= 0:
        fail("kernel.delta", "must be positive")
    if n < 8:
        fail("grid.n", "must be at least 8")
    if delta > L:
        fail("kernel.delta", f"horizon {delta} exceeds the domain length {L}; "
             "mirror points would leave the domain")
    dx = (L + 2 * delta) / n
    if dx >= delta:
        fail("grid.n", f"dx = {dx:.6g} does not resolve the horizon {delta}")

    family = vals["kernel.family"]
    if family not in KERNEL_FAMILIES:
        fail("kernel.family", f"expected one of {KERNEL_FAMILIES}")
    if family == "custom":
        if vals["kernel.samples_path"] is None or vals["kernel.beta"] is None:
            fail("kernel.family", "custom kernels need kernel.samples_path and kernel.beta")
        try:
            off, val = load_kernel_table(_resolve_path(vals["kernel.samples_path"], source))
            spec = KernelSpec.custom(off, val, vals["kernel.beta"])
        except (OSError, InvalidKernelError) as exc:
            fail("kernel.samples_path", str(exc))
        if abs(spec.delta - delta) > 1e-9 * delta:
            fail("kernel.delta", f"custom table support {spec.delta} differs from kernel.delta")
        vals["kernel.samples_path"] = _resolve_path(vals["kernel.samples_path"], source)
        beta = spec.beta
    else:
        beta = 12.0 / delta**2

    kind = vals["problem.kind"]
    if kind not in PROBLEM_KINDS:
        fail("problem.kind", f"expected one of {PROBLEM_KINDS}")
    has_bc = any(vals[f"bc.{s}.{f}"] is not None for s in ("left", "right")
                 for f in ("kind", "value"))
    if kind == "custom":
        if vals["problem.initial_path"] is None:
            fail("problem.initial_path", "required for custom problems")
        vals["problem.initial_path"] = _resolve_path(vals["problem.initial_path"], source)
        for side in ("left", "right"):
            if vals[f"bc.{side}.kind"] not in BC_KINDS:
                fail(f"bc.{side}.kind", f"expected one of {BC_KINDS}")
            if vals[f"bc.{side}.value"] is None:
                fail(f"bc.{side}.value", "required for custom problems")
    else:
        if has_bc:
            fail("problem.kind", "bc.* keys only apply to custom problems; "
                 "manufactured problems carry their own boundary data")
        if family != "triangular_alpha0":
            fail("kernel.family", "manufactured sources are derived for the triangular kernel")

    nu, eps = vals["solver.nu"], vals["solver.eps"]
    if nu <= 0:
        fail("solver.nu", "must be positive")
    if eps <= 0:
        fail("solver.eps", "must be positive")
    if vals["solver.t_max"] < 0:
        fail("solver.t_max", "must be nonnegative")
    if not 0 < vals["solver.dt_safety"] <= 1:
        fail("solver.dt_safety", "must lie in (0, 1]")
    bound = stable_dt(nu, beta, eps)
    dt = vals["solver.dt"]
    if dt is not None and (dt <= 0 or dt > bound * (1 + 1e-12)):
        fail("solver.dt", f"{dt} violates the stability bound 0 < dt <= {bound:.6g}")
    snaps = vals["solver.snapshots"]
    if not all(isinstance(s, _NUM) and not isinstance(s, bool) and 0 <= s <= vals["solver.t_max"]
               for s in snaps):
        fail("solver.snapshots", "entries must be numbers in [0, t_max]")
    vals["solver.snapshots"] = [float(s) for s in snaps]

    for key in ("analysis.bench_n", "analysis.sweep_grid_n"):
        if not all(isinstance(v, int) and v >= 8 for v in vals[key]):
            fail(key, "entries must be integers >= 8")
    if not all(isinstance(v, _NUM) and v > 0 for v in vals["analysis.sweep_eps"]):
        fail("analysis.sweep_eps", "entries must be positive numbers")
    vals["analysis.sweep_eps"] = [float(v) for v in vals["analysis.sweep_eps"]]
    for key in ("analysis.trials", "analysis.bench_repetitions", "analysis.jobs",
                "analysis.sweep_eps_n"):
        if vals[key] < 1:
            fail(key, "must be positive")
    return RunConfig(vals, source)


def _resolve_path(path: str, source: str | None) -> str:
    p = Path(path)
    if not p.is_absolute() and source is not None:
        p = Path(source).parent / p
    return str(p.resolve())


def load_config(path: str | Path | None = None, overrides: list[str] = ()) -> RunConfig:
    """Read a TOML config (or a JSON manifest), apply ``key=value`` overrides, validate."""
    text, raw = None, {}
    source = None
    if path is not None:
        source = str(path)
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if str(path).endswith(".json"):
            try:
                data = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
            data = data.get("config", data)
        else:
            try:
                data = tomllib.loads(text)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
        raw = {k: v for k, v in _flatten(data).items() if v is not None}
    for item in overrides:
        key, value = _parse_override(item)
        raw[key] = value
    try:
        return validate(raw, text, source)
    except ConfigError as exc:
        prefix = f"{path}: " if path is not None else ""
        raise ConfigError(f"{prefix}{exc}") from None
