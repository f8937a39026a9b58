"""Command line behaviour: subcommands, exit codes and configuration precedence."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from cubicsplit.cli import ConfigError, main, parse_grid, read_config


def run(capsys, *argv: str) -> tuple[int, str, str]:
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_prints_the_claim(capsys):
    code, out, _ = run(capsys, "classify", "--family", "P5", "--n", "2", "--m", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["claim"]["label"] == "Z_4 *_Z_2 D_6"
    assert doc["presentation"].startswith("<a,b |")


def test_build_then_export(capsys, tmp_path):
    ball_file = tmp_path / "ball.json"
    code, _, _ = run(capsys, "build", "--family", "P1", "--n", "3", "--radius", "2", "--out", str(ball_file))
    assert code == 0
    assert len(json.loads(ball_file.read_text())["vertices"]) == 10
    code, out, _ = run(capsys, "export", "--in", str(ball_file), "--format", "dot")
    assert code == 0 and out.startswith("graph ")
    graphml = tmp_path / "ball.graphml"
    assert run(capsys, "export", "--in", str(ball_file), "--format", "graphml", "--out", str(graphml))[0] == 0
    assert graphml.read_bytes().startswith(b"<?xml")


def test_analyze_writes_a_deterministic_report(capsys, tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    args = ["analyze", "--family", "P3", "--n", "2", "--m", "2"]
    assert run(capsys, *args, "--report", str(first))[0] == 0
    assert run(capsys, *args, "--report", str(second))[0] == 0
    assert first.read_bytes() == second.read_bytes()
    assert json.loads(first.read_text())["status"] == "pass"


def test_analyze_timings_flag(capsys):
    code, out, _ = run(capsys, "analyze", "--family", "P1", "--n", "2", "--timings")
    assert code == 0
    assert "seconds" in json.loads(out)["runtime"]


def test_discrepancy_exits_zero(capsys):
    code, out, _ = run(capsys, "verify", "--family", "P4", "--n", "2")
    assert code == 0
    assert "discrepancy=abelianization,generation,stabilizers" in out


def test_structural_failure_exits_one(capsys):
    code, out, _ = run(capsys, "verify", "--family", "P2", "--n", "4")
    assert code == 1
    assert "failing=connectivity" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["classify", "--family", "P1", "--n", "1"],
        ["classify", "--family", "P3", "--n", "2"],
        ["classify", "--n", "2"],
        ["export", "--in", "/nonexistent/ball.json", "--format", "json"],
        ["verify", "--family", "P1", "--all-params", "n=4..2"],
        ["verify", "--family", "P1", "--all-params", "k=1"],
    ],
)
def test_configuration_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")


def test_unknown_export_format_exits_two(capsys, tmp_path):
    ball_file = tmp_path / "ball.json"
    run(capsys, "build", "--family", "P1", "--n", "3", "--radius", "1", "--out", str(ball_file))
    assert run(capsys, "export", "--in", str(ball_file), "--format", "svg")[0] == 2


def test_resource_cap_exits_three(capsys):
    code, _, err = run(capsys, "build", "--family", "P5", "--n", "3", "--m", "3", "--rule-cap", "1")
    assert code == 3
    assert "resource cap" in err
    assert run(capsys, "analyze", "--family", "P5", "--n", "3", "--m", "3", "--rule-cap", "1")[0] == 3


def test_verify_grid_writes_reports(capsys, tmp_path):
    code, out, _ = run(capsys, "verify", "--family", "P3", "--all-params", "n=2..3,m=2", "--report-dir", str(tmp_path))
    assert code == 0
    assert out.count(": pass") == 2
    assert sorted(p.name for p in tmp_path.iterdir()) == ["P3_n2_m2.json", "P3_n3_m2.json"]


def test_grid_skips_inadmissible_cells(capsys):
    code, out, _ = run(capsys, "verify", "--family", "P1", "--all-params", "n=1..2")
    assert code == 0
    assert out.splitlines() == ["family=P1 n=2: pass"]


def test_config_file_and_flag_precedence(capsys, tmp_path):
    config = tmp_path / "cell.conf"
    config.write_text('[cell]\nfamily = "P1"  # comment\nn = 3\nradius = 1\n')
    out_file = tmp_path / "ball.json"
    assert run(capsys, "build", "--config", str(config), "--out", str(out_file))[0] == 0
    assert len(json.loads(out_file.read_text())["vertices"]) == 4
    assert run(capsys, "build", "--config", str(config), "--radius", "2", "--out", str(out_file))[0] == 0
    assert len(json.loads(out_file.read_text())["vertices"]) == 10


def test_read_config_rejects_unknown_keys(tmp_path):
    config = tmp_path / "bad.conf"
    config.write_text("colour = blue\n")
    with pytest.raises(ConfigError):
        read_config(config)
    config.write_text("radius = ten\n")
    with pytest.raises(ConfigError):
        read_config(config)
    config.write_text("radius\n")
    with pytest.raises(ConfigError):
        read_config(config)


def test_parse_grid():
    assert parse_grid("n=2..4,m=2..3") == {"n": [2, 3, 4], "m": [2, 3]}
    assert parse_grid("n=3") == {"n": [3]}


def test_module_entry_point():
    done = subprocess.run(
        [sys.executable, "-m", "cubicsplit", "classify", "--family", "P1", "--n", "3"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert done.returncode == 0
    assert json.loads(done.stdout)["claim"]["label"] == "Z_3 * Z_2"
