import json

import pytest

from soundrange.cli import main

CONFIG = """
[scenario]
algorithm = rc
[space]
dim = 1
p = 2
[sensors]
kind = explicit
points = 0, 1
[source]
point = 0.5
[solver]
delta = 0.001
max_level = {levels}
[initial]
center = {center}
radius = 1.5
"""


def write(tmp_path, **kw):
    path = tmp_path / "scenario.ini"
    path.write_text(CONFIG.format(**{"levels": 60, "center": 0.5, **kw}))
    return str(path)


def test_solve_writes_outputs(tmp_path, capsys):
    trace, report = tmp_path / "trace.txt", tmp_path / "report.json"
    code = main(["solve", "--config", write(tmp_path), "--trace", str(trace), "--json-report", str(report)])
    assert code == 0
    out = capsys.readouterr().out
    assert "Approximated source:" in out and "Status: precision_reached" in out
    lines = trace.read_text().splitlines()
    assert lines and all(line.startswith("iter ") for line in lines)
    body = json.loads(report.read_text())
    assert body["trace"] == lines and body["error"] < 1e-3


def test_missing_config_is_config_error(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.ini")]) == 2


def test_a5_violation_is_config_error(tmp_path):
    assert main(["solve", "--config", write(tmp_path, center=9)]) == 2


def test_budget_exhaustion_is_solver_error(tmp_path):
    assert main(["solve", "--config", write(tmp_path, levels=3)]) == 3


def test_demo_appendix(tmp_path, capsys):
    assert main(["demo-appendix", "--seed", "2", "--trace", str(tmp_path / "t.txt")]) == 0
    out = capsys.readouterr().out
    assert out.startswith("Iteration 1:")


def test_selftest(capsys):
    assert main(["selftest", "--seed", "3"]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["bogus"])
