import json
import os
import subprocess
import sys

import pytest

from schmidt_forge.cli import main

STATE = '{"schmidt":[0.4,0.35,0.25]}'


def run_cli(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("SCHMIDT_FORGE_SEED", None)
    full_env.update(env or {})
    return subprocess.run(
        [sys.executable, "-m", "schmidt_forge", *args], capture_output=True, text=True, env=full_env
    )


def test_pmax_example():
    proc = run_cli("pmax", "--state", '{"schmidt":[0.8,0.2]}', "--m", "2")
    assert proc.returncode == 0
    assert "p_max 0.4\n" in proc.stdout and "r1 1\n" in proc.stdout


def test_pmax_product(capsys):
    assert main(["pmax", "--state", '{"schmidt":[1.0]}', "--m", "2"]) == 0
    assert "p_max 0\n" in capsys.readouterr().out


def test_verify_exit_zero():
    proc = run_cli("verify", "--corpus", "random", "--n", "200", "--seed", "7")
    assert proc.returncode == 0, proc.stdout
    assert proc.stdout.strip().endswith("verify: ok")


@pytest.mark.parametrize(
    "args, needle",
    [
        (["pmax", "--state", '{"schmidt":[0.5,0.6]}', "--m", "2"], "'schmidt'"),
        (["pmax", "--state", '{"dim_a":2,"dim_b":2}', "--m", "2"], "'amplitudes'"),
        (["pmax", "--state", "{broken", "--m", "2"], "'<json>'"),
        (["pmax", "--m", "2"], "--state"),
        (["pmax", "--state", STATE, "--m", "0"], "--m"),
        (["bogus"], "invalid choice"),
        (["necessity", "--a2", "0.3"], "PreconditionError"),
        (["prop1", "--state", STATE, "--bob-op", "[[1,0],[0,1]]"], "'bob-op'"),
    ],
)
def test_usage_errors_exit_two(args, needle, capsys):
    assert main(args) == 2
    assert needle in capsys.readouterr().err


def test_compile_and_run_byte_identical(tmp_path):
    outs = []
    for tag in "ab":
        s, r, h = (tmp_path / f"{x}{tag}" for x in ("s", "r", "h"))
        assert main(["compile", "--state", STATE, "--m", "2", "--out", str(s)]) == 0
        assert main(["run", "--strategy", str(s), "--state", STATE, "--shots", "20000",
                     "--seed", "9", "--hist-out", str(h), "--out", str(r)]) == 0
        outs.append([p.read_bytes() for p in (s, r, h)])
    assert outs[0] == outs[1]
    report = json.loads(outs[0][1])
    assert report["total_success"] == pytest.approx(1.0)
    assert outs[0][2].startswith(b"label,count\n")


def test_seed_env_fallback(tmp_path):
    s = tmp_path / "s.json"
    main(["compile", "--state", '{"schmidt":[0.8,0.2]}', "--m", "2", "--out", str(s)])
    hists = []
    for env, flag in (({"SCHMIDT_FORGE_SEED": "42"}, []), ({}, ["--seed", "42"])):
        h = tmp_path / f"h{len(hists)}.csv"
        proc = run_cli("run", "--strategy", str(s), "--shots", "5000", "--hist-out", str(h), *flag, env=env)
        assert proc.returncode == 0
        hists.append(h.read_text())
    assert hists[0] == hists[1]


def test_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    args = ["sweep", "--state", '{"schmidt":[0.8,0.2]}', "--n-values", "5,10", "--k-values", "0.5,0.95", "--out", str(out)]
    assert main(args) == 0
    first = out.read_bytes()
    assert main(args + ["--jobs", "2"]) == 0
    assert out.read_bytes() == first
    lines = first.decode().splitlines()
    assert lines[0] == "n,K,m,p_max,entropy" and len(lines) == 5


def test_reports(tmp_path, capsys):
    out = tmp_path / "x.json"
    assert main(["necessity", "--a2", "0.8", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["support_fidelity_positive"] is True
    assert main(["universality", "--state", '{"schmidt":[0.5,0.3,0.2]}', "--out", str(out)]) == 0
    assert json.loads(out.read_text())["p2_after_optimal_3"] == pytest.approx(0.5)
    assert main(["prop1", "--state", '{"schmidt":[0.8,0.2]}', "--bob-op", "[[0.5,0.5],[0.5,0.5]]", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["residual_error"] < 1e-9
    assert main(["schmidt", "--state", '{"schmidt":[0.5,0.5]}']) == 0
    assert "entropy 1\n" in capsys.readouterr().out


def test_run_flags_spectrum_mismatch(tmp_path):
    s = tmp_path / "s.json"
    main(["compile", "--state", '{"schmidt":[0.8,0.2]}', "--m", "2", "--out", str(s)])
    assert main(["run", "--strategy", str(s), "--state", '{"schmidt":[0.7,0.3]}']) == 2


def test_help_lists_tolerance_defaults():
    proc = run_cli("pmax", "--help")
    assert "--degen-tol" in proc.stdout and "1e-09" in proc.stdout and "1e-12" in proc.stdout
