"""Experiment matrix runner, CSV round-trip, replay and summaries."""

from __future__ import annotations

import pytest

from denseslice.experiments import (
    CSV_COLUMNS,
    MatrixConfig,
    load_config,
    mode_comparison,
    parse_slice_pdr,
    read_rows,
    replay_fate_counts,
    run_cell,
    run_matrix,
    summarize,
    write_rows,
)
from denseslice.scenarios import build_arena
from denseslice.topology import ConfigurationError


@pytest.fixture(scope="module")
def tiny_rows():
    config = MatrixConfig(
        densities=["ultra"],
        modes=["non-sliced", "physical"],
        rates=[10.0],
        seeds=[1, 2],
        duration_min=2.0,
    )
    return run_matrix(config), config


def test_matrix_produces_one_row_per_cell(tiny_rows):
    rows, _ = tiny_rows
    assert len(rows) == 1 * 2 * 1 * 2
    keys = {(r["density"], r["mode"], r["rate"], r["seed"]) for r in rows}
    assert len(keys) == 4


def test_rows_carry_every_csv_column(tiny_rows):
    rows, _ = tiny_rows
    for row in rows:
        assert list(row) == CSV_COLUMNS


def test_rows_survive_csv_round_trip(tmp_path, tiny_rows):
    rows, _ = tiny_rows
    path = tmp_path / "results.csv"
    write_rows(rows, path)
    assert read_rows(path) == rows


def test_conservation_flag_true_on_all_rows(tiny_rows):
    rows, _ = tiny_rows
    assert all(row["conservation_ok"] for row in rows)


def test_run_cell_replay_matches_reported_counts():
    scenario = build_arena(
        "logical", density="high", range_preset="table1-calibrated"
    )
    config = MatrixConfig(duration_min=2.0)
    row = run_cell(scenario, 10.0, seed=3, config=config)
    drops = row["drop_collision"] + row["drop_retry"] + row["drop_queue"]
    assert row["sent"] == row["received"] + drops + row["in_flight"]
    assert row["conservation_ok"]


def test_summary_has_mean_min_max_per_cell(tiny_rows):
    rows, _ = tiny_rows
    summary = summarize(rows)
    assert set(summary) == {
        ("ultra", "non-sliced", 10.0), ("ultra", "physical", 10.0),
    }
    for cell in summary.values():
        assert cell["runs"] == 2
        assert cell["min_pdr"] <= cell["mean_pdr"] <= cell["max_pdr"]
        assert not cell["empty"]


def test_summary_flags_empty_cells():
    rows = [{
        "density": "ultra", "mode": "physical", "rate": 6.0, "seed": 1,
        "sent": 0, "received": 0, "pdr": None, "slice_pdr": "",
        "drop_collision": 0, "drop_retry": 0, "drop_queue": 0,
        "in_flight": 0, "collisions": 0, "cross_slice_collisions": 0,
        "conservation_ok": True,
    }]
    summary = summarize(rows)
    cell = summary[("ultra", "physical", 6.0)]
    assert cell["empty"]
    assert cell["mean_pdr"] is None


def test_mode_comparison_orders_rows_by_density_rank(tiny_rows):
    rows, _ = tiny_rows
    table = mode_comparison(summarize(rows))
    assert len(table) == 1
    row = table[0]
    assert row["density"] == "ultra"
    assert set(row) == {"density", "rate", "non-sliced", "physical"}


def test_parse_slice_pdr_round_trip():
    assert parse_slice_pdr("A=0.970000;B=nan") == {"A": 0.97, "B": None}


def test_replay_counts_sum_to_generated():
    log = [
        (0.1, "generate", 5, 1, "A", 26, ""),
        (0.2, "tx", 5, 1, "A", 26, ""),
        (0.3, "rx", 0, 1, "A", 26, ""),
        (0.4, "generate", 6, 2, "A", 26, ""),
        (0.5, "drop", 6, 2, "A", 26, "dropped_queue"),
        (0.6, "generate", 7, 3, "A", 26, ""),
    ]
    counts = replay_fate_counts(log, router_ids={0})
    assert counts == {
        "generated": 3, "delivered": 1, "drops": 1, "in_flight": 1,
    }


# --------------------------------------------------------------- config


def test_invalid_density_aborts_before_any_run():
    with pytest.raises(ConfigurationError):
        run_matrix(MatrixConfig(densities=["mythical"]))


def test_invalid_sim_field_in_config_rejected(tmp_path):
    path = tmp_path / "bad.scenario"
    path.write_text('{"name": "x", "sim": {"warp_speed": 9}}')
    with pytest.raises(ConfigurationError):
        load_config(path)


def test_arena_scenario_file_loads_with_expected_shape():
    config = load_config("configs/arena.scenario")
    assert config.name == "arena"
    assert config.rates == [6.0, 10.0]
    assert config.duration_min == 30.0
    assert config.seeds == [1, 2, 3, 4, 5]
    assert config.range_preset == "table1-calibrated"
    assert set(config.modes) == {"non-sliced", "logical", "physical"}
    assert len(config.densities) == 5


def test_matrix_writes_results_csv(tmp_path):
    config = MatrixConfig(
        densities=["medium"], modes=["non-sliced"], rates=[6.0],
        seeds=[1], duration_min=1.0,
    )
    rows = run_matrix(config, out_dir=tmp_path)
    assert (tmp_path / "results.csv").exists()
    assert read_rows(tmp_path / "results.csv") == rows
