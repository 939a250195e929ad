import asyncio
import json

import numpy as np
import pytest

import command_handler
from conftest import FIXTURES
from constants import ENV_THREADS
from eddeg import main
from homotopy_solver import CONVERGED, SolutionSet, SolverOptions, TrackedPath

CIRCLE = str(FIXTURES / "circle.ed")
CONIC = str(FIXTURES / "conic.ed")


def run(*argv):
    return asyncio.run(main(list(argv)))


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(ENV_THREADS, raising=False)


def test_bound_command(capsys):
    assert run("bound", CIRCLE) == 0
    assert "ED degree bound: 4" in capsys.readouterr().out


def test_bound_command_json(capsys):
    assert run("bound", CIRCLE, "--algorithm", "cells", "--json") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["bound"]["value"] == 4
    assert data["bound"]["algorithm"] == "cells"
    assert data["bound"]["mixed_cells"] >= 1


def test_count_command(capsys):
    assert run("count", CIRCLE, "--json") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["counts"]["regular"] == 2
    assert data["counts"]["torus"] == 2
    assert data["tolerances"]["residual"] == 1e-10


def test_count_with_merged_endpoints_is_unreliable(capsys, monkeypatch):
    def merged(problem, seed=None, options=None):
        paths = [TrackedPath(k, (0j,), None, CONVERGED, 0.0, 3, 10, 1.0) for k in range(3)]
        points = [np.array([1.0, 0.0, 0.5]), np.array([-1.0, 0.0, 0.5])]
        return 2, SolutionSet(points, [2, 1], [False, False], paths, SolverOptions(), seed=1)

    monkeypatch.setattr(command_handler, "count_ed_critical_points", merged)
    assert run("count", CIRCLE) == 3
    assert "regular critical points: 2" in capsys.readouterr().out


def test_count_tolerance_flag(capsys):
    assert run("count", CIRCLE, "--tol", "1e-9", "--json") == 0
    assert json.loads(capsys.readouterr().out)["tolerances"]["residual"] == 1e-9


def test_verify_circle_exits_below_bound(capsys):
    assert run("verify", CIRCLE) == 2
    out = capsys.readouterr().out
    assert "verdict: COUNT_BELOW_BOUND" in out
    assert "regular count: 2" in out


def test_verify_conic_is_equal(capsys):
    assert run("verify", CONIC, "--seed", "1", "--json") == 0
    data = json.loads(capsys.readouterr().out)
    assert data["verdict"] == "EQUAL"
    assert data["bound"]["value"] == data["counts"]["regular"] == 4


def test_verify_json_independent_of_thread_count(capsys, monkeypatch):
    outputs = []
    for threads in ("1", "3"):
        monkeypatch.setenv(ENV_THREADS, threads)
        run("verify", CONIC, "--json")
        data = json.loads(capsys.readouterr().out)
        data.pop("timings")
        outputs.append(json.dumps(data, sort_keys=True))
    assert outputs[0] == outputs[1]


def test_report_rerun_reproduces_counts(tmp_path, capsys):
    report_path = tmp_path / "conic.json"
    run("verify", CONIC, "--out", str(report_path), "--json")
    first = json.loads(capsys.readouterr().out)
    assert json.loads(report_path.read_text())["verdict"] == first["verdict"]
    run("verify", str(report_path), "--json")
    again = json.loads(capsys.readouterr().out)
    assert again["counts"] == first["counts"]
    assert again["bound"]["value"] == first["bound"]["value"]


def test_faces_command(capsys):
    assert run("faces", CIRCLE, "--w", "0,0,-1") == 0
    out = capsys.readouterr().out
    assert "case C5" in out
    assert "classifier agrees with direct faces: True" in out


def test_polytopes_command(capsys):
    assert run("polytopes", CIRCLE, "--json") == 0
    data = json.loads(capsys.readouterr().out)
    assert sorted(map(tuple, data["P1"])) == [(0, 0, 0), (0, 2, 0), (2, 0, 0)]


def test_errors_exit_with_one(tmp_path, capsys):
    assert run("bound", str(tmp_path / "absent.ed")) == 1
    bad = tmp_path / "bad.ed"
    bad.write_text("vars = x, y\nf1 = x + z\n")
    assert run("bound", str(bad)) == 1
    assert "line 2, column 10" in capsys.readouterr().err
    assert run("faces", CIRCLE, "--w", "1,one,0") == 1


def test_usage_errors_exit_with_one():
    with pytest.raises(SystemExit) as info:
        run("bound")
    assert info.value.code == 1
