"""Command-line interface: topology export, matrix runs, summaries."""

from __future__ import annotations

import json

from click.testing import CliRunner

from denseslice.cli import main
from denseslice.experiments import read_rows


def test_topology_command_prints_line_oriented_placement():
    runner = CliRunner()
    result = runner.invoke(
        main, ["topology", "--mode", "non-sliced", "--density", "ultra"]
    )
    assert result.exit_code == 0
    lines = result.output.strip().splitlines()
    assert len(lines) == 98  # 97 sensors + 1 border router
    for line in lines:
        fields = line.split()
        assert len(fields) == 6
        assert fields[0] == "node"
        int(fields[1])
        float(fields[2])
        float(fields[3])
        assert fields[4] in ("sensor", "border-router")


def test_run_command_writes_results_csv(tmp_path):
    config = {
        "name": "tiny",
        "densities": ["ultra"],
        "modes": ["non-sliced"],
        "traffic": {"rates_per_min": [10], "payload_bytes": 128},
        "seeds": 1,
        "duration_min": 1,
        "range_preset": "table1-calibrated",
    }
    config_path = tmp_path / "tiny.scenario"
    config_path.write_text(json.dumps(config))
    out_dir = tmp_path / "out"
    runner = CliRunner()
    result = runner.invoke(
        main, ["run", "--config", str(config_path), "--out", str(out_dir)]
    )
    assert result.exit_code == 0, result.output
    rows = read_rows(out_dir / "results.csv")
    assert len(rows) == 1
    assert rows[0]["density"] == "ultra"
    assert rows[0]["conservation_ok"]
    assert "[1/1]" in result.output


def test_summarize_command_prints_comparison(tmp_path):
    config = {
        "name": "tiny",
        "densities": ["ultra"],
        "modes": ["non-sliced", "physical"],
        "traffic": {"rates_per_min": [10], "payload_bytes": 128},
        "seeds": 1,
        "duration_min": 1,
        "range_preset": "table1-calibrated",
    }
    config_path = tmp_path / "tiny.scenario"
    config_path.write_text(json.dumps(config))
    out_dir = tmp_path / "out"
    runner = CliRunner()
    assert runner.invoke(
        main, ["run", "--config", str(config_path), "--out", str(out_dir)]
    ).exit_code == 0
    result = runner.invoke(main, ["summarize", "--in", str(out_dir)])
    assert result.exit_code == 0, result.output
    assert (out_dir / "summary.csv").exists()
    assert "non-sliced=" in result.output
    assert "physical=" in result.output


def test_run_rejects_bad_config(tmp_path):
    config_path = tmp_path / "bad.scenario"
    config_path.write_text('{"densities": ["mythical"]}')
    runner = CliRunner()
    result = runner.invoke(
        main, ["run", "--config", str(config_path), "--out", str(tmp_path)]
    )
    assert result.exit_code != 0
