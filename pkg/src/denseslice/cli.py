"""Command-line entry points: batch matrix runs, summaries, and the
controller API server."""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from . import experiments
from .api import create_app
from .controller import Controller
from .scenarios import build_arena
from .topology import BORDER_ROUTER


@click.group()
def main():
    """Dense-IoT network slicing toolkit."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True), help="Scenario config (JSON).")
@click.option("--seeds", type=int, default=None,
              help="Override the number of seeds per cell.")
@click.option("--out", "out_dir", required=True, type=click.Path(),
              help="Output directory for results.csv.")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Parallel worker processes for matrix cells.")
def run(config_path, seeds, out_dir, workers):
    """Run the density x mode x traffic experiment matrix."""
    config = experiments.load_config(config_path)
    if seeds is not None:
        config.seeds = list(range(1, seeds + 1))
    started = time.monotonic()
    total = (len(config.densities) * len(config.modes)
             * len(config.rates) * len(config.seeds))
    done = [0]

    def progress(row):
        done[0] += 1
        click.echo(
            f"[{done[0]}/{total}] {row['density']}/{row['mode']}"
            f"/{row['rate']:g}pkt-min seed={row['seed']}"
            f" pdr={row['pdr']:.4f}"
        )

    if workers > 1:
        rows = _run_parallel(config, workers, progress)
        experiments.write_rows(rows, Path(out_dir) / "results.csv")
    else:
        rows = experiments.run_matrix(config, out_dir, progress=progress)
    elapsed = time.monotonic() - started
    click.echo(f"{len(rows)} runs in {elapsed:.1f}s -> {out_dir}/results.csv")


def _run_parallel(config, workers, progress):
    import multiprocessing as mp

    jobs = [
        (config, mode, density, rate, seed)
        for density in config.densities
        for mode in config.modes
        for rate in config.rates
        for seed in config.seeds
    ]
    with mp.Pool(workers) as pool:
        rows = []
        for row in pool.imap(_run_one_job, jobs):
            progress(row)
            rows.append(row)
    # deterministic row order regardless of scheduling
    rows.sort(key=lambda r: (
        config.densities.index(r["density"]),
        config.modes.index(r["mode"]),
        r["rate"], r["seed"],
    ))
    return rows


def _run_one_job(job):
    config, mode, density, rate, seed = job
    scenario = build_arena(mode, density, config.range_preset)
    return experiments.run_cell(scenario, rate, seed, config)


@main.command()
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True),
              help="Directory containing results.csv.")
def summarize(in_dir):
    """Aggregate a results directory into per-cell summary statistics."""
    rows = experiments.read_rows(Path(in_dir) / "results.csv")
    summary = experiments.summarize(rows)
    path = experiments.write_summary(summary, in_dir)
    click.echo(f"wrote {path}")
    for line in _comparison_lines(summary):
        click.echo(line)


def _comparison_lines(summary):
    lines = ["", "mean PDR by density and mode:"]
    for row in experiments.mode_comparison(summary):
        cells = "  ".join(
            f"{mode}={row[mode]:.4f}" for mode in
            ("non-sliced", "logical", "physical") if mode in row
        )
        lines.append(
            f"  {row['density']:<8} {row['rate']:>4g} pkt/min  {cells}"
        )
    return lines


@main.command()
@click.option("--bind", default="127.0.0.1:8000", show_default=True,
              help="host:port for the northbound API.")
@click.option("--mode", default="physical", show_default=True,
              type=click.Choice(["non-sliced", "logical", "physical"]))
@click.option("--density", default="ultra", show_default=True)
@click.option("--range-preset", default="default", show_default=True)
@click.option("--rate", type=float, default=6.0, show_default=True,
              help="Traffic rate (packets/min/node) for the attached sim.")
@click.option("--duration", type=float, default=30.0, show_default=True,
              help="Simulation duration in minutes.")
@click.option("--seed", type=int, default=1, show_default=True)
@click.option("--static-dir", type=click.Path(exists=True), default=None,
              help="Serve a dashboard build from this directory.")
def serve(bind, mode, density, range_preset, rate, duration, seed,
          static_dir):
    """Start the controller API with a paused simulator attached."""
    import uvicorn

    from .simulator import TrafficProfile

    scenario = build_arena(mode, density, range_preset)
    ctrl = Controller(scenario.nodes, scenario.comm_range, scenario.plan)
    ctrl.attach_sim(TrafficProfile(rate), duration, seed)
    app = create_app(ctrl, static_dir=static_dir)
    host, _, port = bind.partition(":")
    uvicorn.run(app, host=host, port=int(port or 8000))


@main.command()
@click.option("--mode", default="non-sliced", show_default=True,
              type=click.Choice(["non-sliced", "logical", "physical"]))
@click.option("--density", default="ultra", show_default=True)
@click.option("--range-preset", default="default", show_default=True)
def topology(mode, density, range_preset):
    """Print the node placement in the line-oriented topology format."""
    from .topology import export_topology

    scenario = build_arena(mode, density, range_preset)
    sys.stdout.write(export_topology(scenario.nodes))


if __name__ == "__main__":
    main()
