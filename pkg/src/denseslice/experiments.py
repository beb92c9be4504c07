"""Batch experiment harness: run the density x mode x traffic matrix,
write one CSV row per run, and summarize per-cell statistics.

The scenario config file shares the northbound plan schema and adds the
simulation sweep fields (densities, modes, rates, seeds, duration).
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from . import simulator
from .scenarios import Scenario, build_arena
from .simulator import SimConfig, TrafficProfile
from .slicing import MODES, plan_from_json
from .topology import DENSITY_ORDER, DENSITY_PRESETS, RANGE_PRESETS, ConfigurationError

CSV_COLUMNS = [
    "density", "mode", "rate", "seed",
    "sent", "received", "pdr", "slice_pdr",
    "drop_collision", "drop_retry", "drop_queue", "in_flight",
    "collisions", "cross_slice_collisions", "conservation_ok",
]


@dataclass
class MatrixConfig:
    name: str = "arena"
    densities: list[str] = field(default_factory=lambda: list(DENSITY_ORDER))
    modes: list[str] = field(default_factory=lambda: list(MODES))
    rates: list[float] = field(default_factory=lambda: [6.0, 10.0])
    seeds: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    duration_min: float = 30.0
    payload_bytes: int = 128
    range_preset: str = "table1-calibrated"
    sim: SimConfig = field(default_factory=SimConfig)

    def validate(self) -> None:
        for d in self.densities:
            if d not in DENSITY_PRESETS:
                raise ConfigurationError(f"unknown density {d!r}")
        for m in self.modes:
            if m not in MODES:
                raise ConfigurationError(f"unknown mode {m!r}")
        if self.range_preset not in RANGE_PRESETS:
            raise ConfigurationError(
                f"unknown range preset {self.range_preset!r}"
            )
        if self.duration_min <= 0:
            raise ConfigurationError("duration must be positive")
        if not self.seeds:
            raise ConfigurationError("at least one seed required")
        for r in self.rates:
            if r <= 0:
                raise ConfigurationError(f"bad traffic rate {r}")


def load_config(path: str | Path) -> MatrixConfig:
    """Parse and fully validate a scenario config; any invalid field
    aborts before the first run."""
    data = json.loads(Path(path).read_text())
    sim_overrides = data.get("sim", {})
    unknown = set(sim_overrides) - set(SimConfig.__dataclass_fields__)
    if unknown:
        raise ConfigurationError(f"unknown sim fields {sorted(unknown)}")
    traffic = data.get("traffic", {})
    seeds = data.get("seeds", 5)
    if isinstance(seeds, int):
        seeds = list(range(1, seeds + 1))
    config = MatrixConfig(
        name=data.get("name", "scenario"),
        densities=data.get("densities", list(DENSITY_ORDER)),
        modes=data.get("modes", list(MODES)),
        rates=[float(r) for r in traffic.get("rates_per_min", [6, 10])],
        seeds=[int(s) for s in seeds],
        duration_min=float(data.get("duration_min", 30)),
        payload_bytes=int(traffic.get("payload_bytes", 128)),
        range_preset=data.get("range_preset", "table1-calibrated"),
        sim=SimConfig(**sim_overrides),
    )
    config.validate()
    # plans embedded in the config must parse against the northbound schema
    for mode, plan_json in data.get("plans", {}).items():
        if mode not in MODES:
            raise ConfigurationError(f"plan for unknown mode {mode!r}")
        plan_from_json(plan_json)
    return config


def replay_fate_counts(event_log: list[tuple], router_ids: set[int]) -> dict:
    """Independent recount of packet fates from the raw event log."""
    generated = 0
    delivered = 0
    drops = 0
    for _t, kind, node, _pkt, _slice, _ch, _detail in event_log:
        if kind == "generate":
            generated += 1
        elif kind == "rx" and node in router_ids:
            delivered += 1
        elif kind == "drop":
            drops += 1
    return {
        "generated": generated,
        "delivered": delivered,
        "drops": drops,
        "in_flight": generated - delivered - drops,
    }


def run_cell(
    scenario: Scenario,
    rate: float,
    seed: int,
    config: MatrixConfig,
    keep_log: bool = True,
) -> dict:
    """One simulation run -> one result row."""
    profile = TrafficProfile(rate, config.payload_bytes)
    result = simulator.run(
        scenario.graph, scenario.plan, scenario.flow_tables,
        profile, config.duration_min, seed,
        config=config.sim, keep_log=keep_log,
        sense_graph=scenario.sense_graph,
    )
    report = result.report
    routers = {s.border_router for s in scenario.plan.slices}
    if keep_log:
        recount = replay_fate_counts(result.event_log, routers)
        conservation_ok = (
            recount["generated"] == report.sent
            and recount["delivered"] == report.received
            and recount["drops"] == sum(report.drops.values())
            and recount["in_flight"] == report.in_flight
            and report.sent
            == report.received + sum(report.drops.values())
            + report.in_flight
        )
    else:
        conservation_ok = report.sent == (
            report.received + sum(report.drops.values()) + report.in_flight
        )
    slice_pdr = ";".join(
        f"{sid}={bucket['pdr']:.6f}" if bucket["pdr"] is not None
        else f"{sid}=nan"
        for sid, bucket in sorted(report.per_slice.items())
    )
    return {
        "density": scenario.density,
        "mode": scenario.mode,
        "rate": rate,
        "seed": seed,
        "sent": report.sent,
        "received": report.received,
        "pdr": report.pdr,
        "slice_pdr": slice_pdr,
        "drop_collision": report.drops["dropped_collision"],
        "drop_retry": report.drops["dropped_retry"],
        "drop_queue": report.drops["dropped_queue"],
        "in_flight": report.in_flight,
        "collisions": result.collisions,
        "cross_slice_collisions": result.cross_slice_collisions,
        "conservation_ok": conservation_ok,
    }


def run_matrix(
    config: MatrixConfig,
    out_dir: str | Path | None = None,
    progress=None,
) -> list[dict]:
    """Run every (density, mode, rate, seed) cell; returns the row list
    and, when out_dir is given, writes results.csv."""
    config.validate()
    # validate every cell before the first run
    scenarios = {
        (mode, density): build_arena(mode, density, config.range_preset)
        for mode in config.modes
        for density in config.densities
    }
    rows = []
    for density in config.densities:
        for mode in config.modes:
            scenario = scenarios[(mode, density)]
            for rate in config.rates:
                for seed in config.seeds:
                    row = run_cell(scenario, rate, seed, config)
                    rows.append(row)
                    if progress is not None:
                        progress(row)
    if out_dir is not None:
        write_rows(rows, Path(out_dir) / "results.csv")
    return rows


def write_rows(rows: list[dict], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_rows(path: str | Path) -> list[dict]:
    with Path(path).open() as fh:
        raw = list(csv.DictReader(fh))
    rows = []
    for r in raw:
        rows.append({
            "density": r["density"],
            "mode": r["mode"],
            "rate": float(r["rate"]),
            "seed": int(r["seed"]),
            "sent": int(r["sent"]),
            "received": int(r["received"]),
            "pdr": float(r["pdr"]) if r["pdr"] not in ("", "None") else None,
            "slice_pdr": r["slice_pdr"],
            "drop_collision": int(r["drop_collision"]),
            "drop_retry": int(r["drop_retry"]),
            "drop_queue": int(r["drop_queue"]),
            "in_flight": int(r["in_flight"]),
            "collisions": int(r["collisions"]),
            "cross_slice_collisions": int(r["cross_slice_collisions"]),
            "conservation_ok": str(r["conservation_ok"]) == "True",
        })
    return rows


def parse_slice_pdr(text: str) -> dict[str, float | None]:
    out = {}
    for part in text.split(";"):
        if not part:
            continue
        sid, value = part.split("=")
        out[sid] = None if value == "nan" else float(value)
    return out


def summarize(rows: list[dict]) -> dict:
    """Per-cell mean/min/max PDR plus per-slice means.

    Keys are (density, mode, rate); empty cells are flagged, never filled.
    """
    cells: dict[tuple, list[dict]] = {}
    for row in rows:
        cells.setdefault(
            (row["density"], row["mode"], row["rate"]), []
        ).append(row)
    summary = {}
    for key, cell_rows in sorted(cells.items()):
        pdrs = [r["pdr"] for r in cell_rows if r["pdr"] is not None]
        slice_values: dict[str, list[float]] = {}
        for r in cell_rows:
            for sid, value in parse_slice_pdr(r["slice_pdr"]).items():
                if value is not None:
                    slice_values.setdefault(sid, []).append(value)
        summary[key] = {
            "runs": len(cell_rows),
            "mean_pdr": statistics.mean(pdrs) if pdrs else None,
            "min_pdr": min(pdrs) if pdrs else None,
            "max_pdr": max(pdrs) if pdrs else None,
            "empty": not pdrs,
            "slice_mean_pdr": {
                sid: statistics.mean(vals)
                for sid, vals in sorted(slice_values.items())
            },
        }
    return summary


def mode_comparison(summary: dict) -> list[dict]:
    """Fig-style comparison table: one row per (density, rate) with the
    mean PDR of each operating mode."""
    table: dict[tuple, dict] = {}
    for (density, mode, rate), cell in summary.items():
        row = table.setdefault(
            (density, rate), {"density": density, "rate": rate}
        )
        row[mode] = cell["mean_pdr"]
    ordered = []
    for density in DENSITY_ORDER:
        for key in sorted(k for k in table if k[0] == density):
            ordered.append(table[key])
    return ordered


def write_summary(summary: dict, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "summary.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "density", "mode", "rate", "runs",
            "mean_pdr", "min_pdr", "max_pdr", "slice_mean_pdr",
        ])
        for (density, mode, rate), cell in summary.items():
            slice_text = ";".join(
                f"{sid}={v:.6f}"
                for sid, v in cell["slice_mean_pdr"].items()
            )
            writer.writerow([
                density, mode, rate, cell["runs"],
                cell["mean_pdr"], cell["min_pdr"], cell["max_pdr"],
                slice_text,
            ])
    return path
