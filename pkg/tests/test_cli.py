import json
import re

import pytest
import yaml
from click.testing import CliRunner

from mna import cli
from mna.errors import NumericalError

BASE = {
    "weight": {"kind": "standard-power", "a": 0},
    "lattice": {"K": 2, "J_max": 3, "M_sub": 2},
    "exponents": {"p": 2, "q": 2, "s": 2, "n": 0},
    "function": {"monomials": [[0, 1], [1, 0.5]]},
    "quadrature": {"N_circle": 256},
    "atoms": {"n_iter": 3},
    "carleson": {"trials": 10, "grid": 4},
    "measure": {"random": {"atoms": 5}},
    "hardy": {"N": [8, 16]},
    "seed": 0,
}


def _run(tmp_path, command, cfg=BASE, *args, out=True):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(cfg))
    argv = [command, "--config", str(path)]
    if out:
        argv += ["--out", str(tmp_path / "out")]
    return CliRunner().invoke(cli.main, argv + list(args))


def _report(tmp_path, name):
    return json.loads((tmp_path / "out" / f"{name}.json").read_text())


def test_norm_constant_function(tmp_path):
    cfg = BASE | {"function": {"monomials": [[0, 1]]}}
    res = _run(tmp_path, "norm", cfg, out=False)
    assert res.exit_code == 0
    assert json.loads(res.stdout)["mixed_norm"] == pytest.approx(1.0)


def test_weight_exponential_is_a_finding(tmp_path):
    res = _run(tmp_path, "weight", BASE | {"weight": {"kind": "exponential", "c": 1.0}})
    assert res.exit_code == 0
    assert _report(tmp_path, "weight")["member_Dhat"] is False


@pytest.mark.parametrize("field,value,message", [("p", -1, "exponents.p"), ("q", "x", "exponents.q")])
def test_config_errors_exit_2(tmp_path, field, value, message):
    cfg = BASE | {"exponents": BASE["exponents"] | {field: value}}
    res = _run(tmp_path, "norm", cfg)
    assert res.exit_code == 2 and message in res.stderr


def test_missing_config_file_exit_2(tmp_path):
    res = CliRunner().invoke(cli.main, ["norm", "--config", str(tmp_path / "nope.yaml")])
    assert res.exit_code == 2


def test_numerical_abort_exit_3(tmp_path, monkeypatch):
    def abort(*args, **kwargs):
        raise NumericalError("M_sub too small for contraction")

    monkeypatch.setattr(cli, "atomic_decompose", abort)
    res = _run(tmp_path, "decompose")
    assert res.exit_code == 3 and "contraction" in res.stderr


@pytest.mark.parametrize("command,files", [
    ("weight", ["weight.json"]),
    ("lattice", ["lattice.json", "lattice.csv"]),
    ("norm", ["norm.json"]),
    ("synth", ["synth.json"]),
    ("analyze", ["analyze.json", "coefficients.csv"]),
    ("decompose", ["decompose.json", "coefficients.csv"]),
    ("carleson", ["carleson.json", "measure.csv"]),
    ("hardy", ["hardy.json", "hardy.csv"]),
])
def test_subcommands_write_reports(tmp_path, command, files):
    res = _run(tmp_path, command)
    assert res.exit_code == 0, res.stderr
    for name in files + [f"{command}.meta.json"]:
        assert (tmp_path / "out" / name).is_file()
    meta = json.loads((tmp_path / "out" / f"{command}.meta.json").read_text())
    assert meta["command"] == command and "timestamp" in meta


@pytest.mark.parametrize("command", ["hardy", "carleson", "decompose"])
def test_reports_byte_identical(tmp_path, command):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    assert _run(a, command).exit_code == 0
    assert _run(b, command).exit_code == 0
    assert (a / "out" / f"{command}.json").read_bytes() == (b / "out" / f"{command}.json").read_bytes()


def test_decompose_report_fields(tmp_path):
    assert _run(tmp_path, "decompose").exit_code == 0
    rep = _report(tmp_path, "decompose")
    assert len(rep["residual_history"]) == 4
    assert {"coefficient_norm", "reconstruction_error", "fitted_ratio", "params"} <= set(rep)


def test_verify_single_check(tmp_path):
    res = _run(tmp_path, "verify", BASE, "--check", "1")
    assert res.exit_code == 0
    assert re.match(r"PASS\s+1\s+closed-form norms", res.stderr)
    rep = _report(tmp_path, "verify")
    assert rep["all_passed"] and [c["id"] for c in rep["checks"]] == [1]
