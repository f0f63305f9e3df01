import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from motivic.cli import main

DATA = Path(__file__).parent / "data"


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, [str(a) for a in args])

    return invoke


def test_volume_unit_square(run):
    r = run("volume", DATA / "unit_square.json")
    assert r.exit_code == 0, r.output
    lines = r.output.splitlines()
    assert lines[0] == "class: i(1)*i(1)"
    assert lines[1] == "filtration degree: 2"
    counts = [tuple(map(int, ln.split("\t"))) for ln in lines[3:]]
    assert counts == [(1, 1, 1), (2, 4, 4), (3, 9, 9), (4, 16, 16)]


def test_volume_empty(run):
    r = run("volume", DATA / "empty.json")
    assert r.exit_code == 0
    assert r.output.splitlines()[0] == "class: 0"


def test_volume_unbounded(run):
    r = run("volume", DATA / "half_space.json")
    assert r.exit_code == 2
    assert "unbounded" in r.output


def test_volume_bad_file(run, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert run("volume", p).exit_code == 2


def test_volume_rank2_needs_spec(run, tmp_path):
    assert run("volume", DATA / "triangle_rank2.json").exit_code == 2
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"rank": 2, "spec": [40, 1]}))
    r = run("volume", DATA / "triangle_rank2.json", "--config", cfg, "--m-range", "1..2")
    assert r.exit_code == 0, r.output
    # x, y >= 0, x + y < 2*40 + 1 = 81 at level 1
    assert r.output.splitlines()[3] == "1\t3321\t3321"


def test_volume_graded_and_m_range(run):
    r = run("volume", DATA / "unit_square.json", "--mode", "graded", "--m-range", "5..6")
    assert r.exit_code == 0
    assert [ln.split("\t")[0] for ln in r.output.splitlines()[3:]] == ["5", "6"]


@pytest.mark.parametrize("bad", ["3", "0..2", "4..1", "a..b"])
def test_bad_m_range(run, bad):
    assert run("volume", DATA / "unit_square.json", "--m-range", bad).exit_code == 2


def test_bad_config_values(run, tmp_path):
    cfg = tmp_path / "job.json"
    cfg.write_text(json.dumps({"a0": [-1]}))
    assert run("check", "theta", "--config", cfg).exit_code == 2


def test_check_theta(run):
    r = run("check", "theta")
    assert r.exit_code == 0, r.output
    assert r.output.rstrip().endswith("passed")
    assert "FAIL" not in r.output


def test_check_example_counts(run):
    r = run("check", "example-counts")
    assert r.exit_code == 0, r.output
    assert "FAIL" not in r.output


def test_check_unknown_suite(run):
    r = run("check", "nothing")
    assert r.exit_code == 2
    assert "unknown suite" in r.output


def test_check_output_is_deterministic(run):
    assert run("check", "round-trips").output == run("check", "round-trips").output


@pytest.mark.parametrize("expr,want", [
    ("R*R", "(q-1)*R + q"),
    ("T(1)*T(-1)", "1"),
    ("R*T(1)", "T(-1)*R + (q-1)*int((-1,1])"),
])
def test_hecke_expressions(run, expr, want):
    r = run("hecke", expr)
    assert r.exit_code == 0
    assert r.output.strip() == want


def test_hecke_bad_expression(run):
    assert run("hecke", "R*(").exit_code == 2
    assert run("hecke").exit_code == 2


def test_hecke_oracle(run):
    r = run("hecke", "--oracle", 2, 3, -1)
    assert r.exit_code == 0, r.output
    rows = dict(ln.split("\t")[0:2] for ln in r.output.splitlines()[1:])
    assert rows["e0.R_-1:f_0"] == "1/2"
    assert rows["f0.R:e_0"] == "2"


def test_hecke_oracle_too_shallow(run):
    assert run("hecke", "--oracle", 2, 2, -1).exit_code == 2
