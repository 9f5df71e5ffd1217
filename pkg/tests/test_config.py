import json

import pytest

from pdbas import ConfigError
from pdbas.config import SCHEMA, load_config


def _write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_defaults():
    cfg = load_config()
    assert cfg["domain.L"] == 2.0 and cfg["kernel.delta"] == 0.2
    assert cfg["grid.n"] == 512 and cfg["solver.eps"] == 5e-4
    assert cfg.kernel().beta == pytest.approx(300.0, rel=1e-15)
    assert cfg.grid().dx == pytest.approx(0.0046875)
    assert cfg.resolved_dt() == pytest.approx(0.9 * 2 / 2120)
    assert set(cfg.values) == set(SCHEMA)


def test_overrides():
    cfg = load_config(overrides=["solver.eps=1e-4", "grid.n=1024", "output.dir=somewhere",
                                 "solver.snapshots=[0, 0.5]"])
    assert cfg["solver.eps"] == 1e-4 and cfg["grid.n"] == 1024
    assert cfg["output.dir"] == "somewhere"
    assert cfg["solver.snapshots"] == [0.0, 0.5]
    with pytest.raises(ConfigError, match="key=value"):
        load_config(overrides=["solver.eps"])


def test_unknown_key_has_line(tmp_path):
    p = _write(tmp_path, "[solver]\nnu = 0.2\nepsilon = 1e-3\n")
    with pytest.raises(ConfigError, match=r"line 3: unknown configuration key 'solver.epsilon'"):
        load_config(p)


def test_malformed_has_line(tmp_path):
    p = _write(tmp_path, "[solver]\nnu = 0.2\neps = \n")
    with pytest.raises(ConfigError, match="line 3"):
        load_config(p)
    p = _write(tmp_path, '{\n "config": {\n  "solver": {"nu": }\n }\n}\n', "m.json")
    with pytest.raises(ConfigError, match="line 3"):
        load_config(p)


def test_type_errors(tmp_path):
    p = _write(tmp_path, '[grid]\nn = "many"\n')
    with pytest.raises(ConfigError, match="line 2: grid.n must be int"):
        load_config(p)
    with pytest.raises(ConfigError, match="number"):
        load_config(overrides=["solver.nu=true"])


def test_dt_bound_checked(tmp_path):
    p = _write(tmp_path, "[solver]\neps = 5e-4\ndt = 1e-3\n")
    with pytest.raises(ConfigError, match="line 3: solver.dt: .*stability bound"):
        load_config(p)
    assert load_config(overrides=["solver.dt=5e-4"]).resolved_dt() == 5e-4


@pytest.mark.parametrize("override, key", [
    ("grid.n=10", "grid.n"),             # dx = 0.24 does not resolve delta
    ("kernel.delta=3.0", "kernel.delta"),
    ("domain.L=-1", "domain.L"),
    ("solver.snapshots=[20.0]", "solver.snapshots"),
    ("problem.kind='heat'", "problem.kind"),
    ("kernel.family='custom'", "kernel.family"),
    ("bc.left.kind='dirichlet'", "problem.kind"),
    ("analysis.trials=0", "analysis.trials"),
])
def test_cross_field_checks(override, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        load_config(overrides=[override])


def test_custom_problem_and_kernel(tmp_path):
    (tmp_path / "ic.csv").write_text("x,value\n-1,0\n1,0\n")
    (tmp_path / "k.csv").write_text("offset,value\n0,1500\n0.2,0\n")
    text = """
[kernel]
family = "custom"
delta = 0.2
samples_path = "k.csv"
beta = 300.0

[problem]
kind = "custom"
initial_path = "ic.csv"

[bc.left]
kind = "dirichlet"
value = 0.0

[bc.right]
kind = "neumann"
value = 1.0
"""
    cfg = load_config(_write(tmp_path, text))
    assert cfg["problem.initial_path"] == str((tmp_path / "ic.csv").resolve())
    assert cfg.kernel().beta == 300.0
    bcs = cfg.boundary_spec()
    assert bcs.left.value == 0.0 and bcs.right.slope == 1.0
    assert not cfg.problem().has_exact
    with pytest.raises(ConfigError, match="bc.right.value"):
        load_config(_write(tmp_path, text.replace("value = 1.0", "")))
    with pytest.raises(ConfigError, match="differs"):
        load_config(_write(tmp_path, text.replace("delta = 0.2", "delta = 0.3")))


def test_manifest_roundtrip(tmp_path):
    cfg = load_config(overrides=["solver.eps=1e-3", "grid.n=256"])
    p = tmp_path / "manifest.json"
    p.write_text(json.dumps({"config": cfg.to_dict(), "derived": {}}))
    again = load_config(p)
    assert again.values == cfg.values
