import json
import math
import subprocess
import sys

import pytest

from annulus_dirichlet.cli import main
from annulus_dirichlet.mapio import load_map
from annulus_dirichlet.polargrid import dirichlet_energy

CRIT = ["--b", "2", "--d", "2.125", "--j", "2"]
BELOW = ["--a", "0.5", "--b", "2", "--d", "2.125", "--j", "2"]
CONF = ["--b", "2", "--d", "4", "--j", "2"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_solve_critical(capsys):
    code, rep = run(capsys, "solve", "--a", "1", "--c", "1", *CRIT)
    assert code == 0
    assert rep["bound"] == "critical" and rep["minimizer"] == "harmonic"
    assert rep["energy"] == pytest.approx(255 * math.pi / 16, rel=1e-13)


def test_solve_conformal(capsys):
    code, rep = run(capsys, "solve", *CONF)
    assert code == 0 and rep["regime"] == "conformal"
    assert rep["energy"] == pytest.approx(60 * math.pi, rel=1e-13)


def test_solve_below(capsys):
    code, rep = run(capsys, "solve", *BELOW)
    assert code == 0 and rep["bound"] == "below"
    assert rep["rho"] == pytest.approx(0.5) and rep["r_crit"] == pytest.approx(2.0)


def test_solve_problem_file(capsys, tmp_path):
    f = tmp_path / "p.json"
    f.write_text(json.dumps({"a": 0.5, "b": 2, "c": 1, "d": 2.125, "j": 2}))
    code, rep = run(capsys, "solve", "--problem", str(f))
    assert code == 0 and rep["minimizer"] == "hybrid"


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--b", "0.5", "--d", "2", "--j", "2"],
        ["solve", "--d", "2", "--j", "2"],
        ["solve", "--b", "2", "--d", "2", "--j", "0"],
        ["energy", *CRIT, "--map", "missing.bin"],
        ["energy", *BELOW, "--map", "g_circ"],
        ["certify", *CRIT, "--map", "g_diamond"],
        ["solve", "--problem", "missing.json"],
    ],
)
def test_bad_input_exit_2(capsys, argv):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_minimize_writes_round_trip_map(capsys, tmp_path):
    code, rep = run(capsys, "minimize", *CRIT, "--nr", "33", "--nt", "64", "--out", str(tmp_path), "--format", "csv", "--seed", "1")
    assert code == 0 and rep["converged"]
    assert abs(rep["gap_rel"]) < 1e-2
    assert json.loads((tmp_path / "minimize.json").read_text()) == rep
    m = load_map(tmp_path / "map.bin")
    assert abs(dirichlet_energy(m) - rep["energy"]) <= 1e-12 * rep["energy"]
    code, erep = run(capsys, "energy", *CRIT, "--map", str(tmp_path / "map.bin"))
    assert code == 0 and abs(erep["energy"] - rep["energy"]) <= 1e-12 * rep["energy"]
    code, crep = run(capsys, "energy", *CRIT, "--map", str(tmp_path / "map.csv"))
    assert abs(crep["energy"] - rep["energy"]) <= 1e-12 * rep["energy"]


def test_minimize_non_converged_exit_3(capsys):
    code, rep = run(capsys, "minimize", *CRIT, "--nr", "17", "--nt", "32", "--iters", "1")
    assert code == 3 and not rep["converged"]


def test_minimize_deterministic(capsys):
    args = ["minimize", *CRIT, "--nr", "17", "--nt", "32", "--seed", "3"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first


def test_certify_equality_case(capsys):
    code, rep = run(capsys, "certify", *CRIT, "--map", "g_circ")
    assert code == 0 and rep["ok"]
    assert abs(rep["slack"]) < 1e-3
    code, rep = run(capsys, "certify", *CRIT, "--map", "g_circ", "--nr", "65", "--nt", "128", "--exact")
    assert code == 0 and abs(rep["slack"]) < 1e-4


def test_certify_violation_exit_4(capsys):
    # discretization puts the coarse sample slightly below the bound
    code, rep = run(capsys, "certify", *CRIT, "--map", "g_circ", "--nr", "9", "--nt", "16", "--tol", "1e-9")
    assert code == 4 and not rep["ok"]


def test_energy_power_map(capsys):
    code, rep = run(capsys, "energy", *CONF, "--map", "power", "--nr", "129", "--nt", "256")
    assert code == 0
    assert rep["energy"] == pytest.approx(60 * math.pi, rel=1e-3)


def test_figure(capsys, tmp_path):
    code = main(["figure", *BELOW, "--nr", "64", "--nt", "128", "--out", str(tmp_path)])
    capsys.readouterr()
    assert code == 0
    svg = (tmp_path / "figure.svg").read_text()
    assert svg.count("<polygon") == 8 and svg.count("<polyline") == 8
    assert (tmp_path / "figure.csv").read_text().startswith("t,tau,u,v")


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "annulus_dirichlet", "solve", *CONF], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["regime"] == "conformal"
    assert "solve:" in out.stderr
