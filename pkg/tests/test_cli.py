import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import fsolve

from unfoldiso.cli import run
from unfoldiso.connection import connection_from_N, make_spec, random_N
from unfoldiso.serialize import dumps

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, payload, name="cfg.json"):
    p = tmp_path / name
    p.write_text(payload if isinstance(payload, str) else dumps(payload))
    return str(p)


def report(out):
    return json.loads((Path(out) / "report.json").read_text())


SMALL_SPEC = {"spec": {"r": 2, "m": 2, "epsilon": 0.2, "mu": [1.0, -1.0],
                       "c": [[0.21, 0.31], [0.12, 0.17]]}}


@pytest.mark.parametrize("command", ["validate", "unfold"])
def test_shipped_configs(tmp_path, command):
    for cfg in sorted(CONFIGS.glob("hypergeom_*.json")):
        out = tmp_path / f"{command}-{cfg.stem}"
        assert run([command, "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
        rep = report(out)
        assert rep["all_pass"] and rep["exit_code"] == 0


def test_unfold_random_is_deterministic(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_SPEC)
    assert run(["unfold", "--config", cfg, "--seed", "3", "--out", str(tmp_path / "a"), "--quiet"]) == 0
    assert run(["unfold", "--config", cfg, "--seed", "3", "--out", str(tmp_path / "b"), "--quiet"]) == 0
    a = (tmp_path / "a" / "report.json").read_text()
    assert a == (tmp_path / "b" / "report.json").read_text()
    run(["unfold", "--config", cfg, "--seed", "4", "--out", str(tmp_path / "c"), "--quiet"])
    assert a != (tmp_path / "c" / "report.json").read_text()
    assert capsys.readouterr().out == ""


def test_flag_overrides(tmp_path, capsys):
    cfg = write(tmp_path, {**SMALL_SPEC, "seed": 1, "order": 12})
    assert run(["unfold", "--config", cfg, "--order", "20", "--tol", "1e-8", "--out", str(tmp_path / "o")]) == 0
    rep = report(tmp_path / "o")
    assert rep["config"] == {"seed": 1, "tol": 1e-8, "order": 20}
    assert rep["result"]["order"] == 20
    summary = json.loads(capsys.readouterr().out)
    assert summary == {"command": "unfold", "all_pass": True, "exit_code": 0}


def test_rank_one_unfold(tmp_path):
    cfg = write(tmp_path, {"spec": {"r": 1, "m": 3, "epsilon": 0.3, "mu": [0.5], "c": [[0.1, 0.2, 0.5]]}})
    assert run(["unfold", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == 0
    R = np.array(report(tmp_path / "o")["result"]["R"])
    assert not np.any(R)


def resonant_config():
    # solve for c[1,1] so that the eigenvalues of A_1 differ by exactly one
    mu, eps = [1.0, -1.0], 0.2
    c = np.array([[0.1, 0.2], [0.3, 0.0]], complex)
    N = random_N(np.random.default_rng(5), make_spec(2, 2, mu, c, eps), 0.4)
    N0, N1 = N.data

    def gap(x):
        w = np.linalg.eigvals(c[1, 0] * N1 + (x[0] + 1j * x[1]) * N0)
        d = w[0] - w[1]
        d = d if d.real > 0 else -d
        return [d.real - 1, d.imag]

    x = fsolve(gap, [0.5, 0.0])
    c[1, 1] = x[0] + 1j * x[1]
    conn = connection_from_N(N, make_spec(2, 2, mu, c, eps))
    return {"spec": {"r": 2, "m": 2, "epsilon": eps, "mu": mu, "c": c, "A": conn.A}}


@pytest.mark.parametrize(
    "payload,argv,code,error",
    [
        (resonant_config(), ["unfold"], 3, "Resonance"),
        ({"spec": {**SMALL_SPEC["spec"], "mu": [1.0, 1.0]}}, ["validate"], 2, "DuplicateMu"),
        ('{"spec": {"r": 2,', ["validate"], 64, "JSONDecodeError"),
        (SMALL_SPEC, ["unfold", "--order", "999"], 2, "ValidationError"),
        ({"hypergeom": {"spread_z": 0.0}}, ["hypergeom-demo"], 3, "IntegralityViolation"),
        ({"spec": {**SMALL_SPEC["spec"], "bogus": 1}}, ["validate"], 2, None),
        ({}, ["validate"], 2, None),
    ],
)
def test_error_exit_codes(tmp_path, payload, argv, code, error):
    cfg = write(tmp_path, payload)
    out = tmp_path / "o"
    assert run(argv + ["--config", cfg, "--out", str(out), "--quiet"]) == code
    rep = report(out)
    assert rep["exit_code"] == code
    if error is not None:
        assert rep["error"]["error"] == error


def test_usage_errors(tmp_path, capsys):
    assert run(["frobnicate"]) == 64
    assert run(["unfold", "--order", "many"]) == 64
    assert run(["unfold", "--config", str(tmp_path / "missing.json"), "--quiet"]) == 64
    err = capsys.readouterr().err
    assert "UsageError" in err


def test_flow_outputs(tmp_path):
    cfg = write(tmp_path, {"flow": {"n_starts": 12, "ms": [2, 3], "epsilons": [0.0, 0.1]}})
    out = tmp_path / "o"
    assert run(["flow", "--config", cfg, "--seed", "2", "--out", str(out), "--quiet"]) == 0
    res = report(out)["result"]
    assert res["summary"]["starts"] == 12 and res["summary"]["fraction"] == 1.0
    lines = (out / "trajectories.csv").read_text().splitlines()
    assert lines[0] == "run,t,re_z,im_z,dist"
    assert {int(x.split(",")[0]) for x in lines[1:]} == set(range(12))


def test_monodromy_outputs(tmp_path):
    cfg = write(tmp_path, {"monodromy": {"instances": 2}})
    out = tmp_path / "o"
    assert run(["monodromy", "--config", cfg, "--seed", "100", "--out", str(out), "--quiet"]) == 0
    mono = json.loads((out / "monodromy.json").read_text())
    assert len(mono["instances"]) == 2
    assert all(c["pass"] for c in mono["checks"])


def test_demo_epsilon_flag(tmp_path):
    out = tmp_path / "o"
    assert run(["hypergeom-demo", "--epsilon", "0.1", "--out", str(out), "--quiet"]) == 0
    names = [c["name"] for c in report(out)["result"]["checks"]]
    assert names and all(n.startswith("eps=0.1:") for n in names)


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, SMALL_SPEC)
    proc = subprocess.run([sys.executable, "-m", "unfoldiso", "validate", "--config", cfg],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["all_pass"] is True
    ver = subprocess.run([sys.executable, "-m", "unfoldiso", "--version"], capture_output=True, text=True, check=False)
    assert ver.returncode == 0 and ver.stdout.strip()
