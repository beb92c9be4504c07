"""Canonical arena deployment: 97 sensors in three operating modes.

Non-sliced: one 97-node grid and a single border router at the area's
mid-south edge.  Sliced (logical/physical): 21 corridor nodes in a line
(slice A) plus a 76-node chair grid (slice B), each with its own border
router adjacent to its cluster.  Physical mode puts slice A on channel 15
and slice B on channel 26.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import routing, slicing, topology
from .slicing import (
    MODE_LOGICAL,
    MODE_NON_SLICED,
    MODE_PHYSICAL,
    SlicePlan,
    SliceSpec,
)
from .topology import (
    CARRIER_SENSE_FACTOR,
    DENSITY_PRESETS,
    RANGE_PRESETS,
    ConfigurationError,
    ConnectivityGraph,
    NodeRecord,
    Position,
    as_border_router,
)

TOTAL_SENSORS = 97
CORRIDOR_COUNT = 21
CHAIR_COUNT = 76
ROUTER_A = 98
ROUTER_B = 99
CHANNEL_A = 15
CHANNEL_B = 26


@dataclass
class Scenario:
    name: str
    mode: str
    density: str
    comm_range: float
    nodes: list[NodeRecord]
    graph: ConnectivityGraph
    sense_graph: ConnectivityGraph
    plan: SlicePlan
    slice_graphs: dict[str, ConnectivityGraph]
    flow_tables: dict

    @property
    def sensor_ids(self) -> set[int]:
        return {n.id for n in self.nodes if n.role == topology.SENSOR}


def _non_sliced_nodes(spacing: float) -> list[NodeRecord]:
    grid = topology.build_grid(
        TOTAL_SENSORS, spacing,
        origin=Position(0.0, spacing), first_id=1, category="chair",
    )
    cols = 10
    router = NodeRecord(
        ROUTER_A,
        Position((cols - 1) / 2 * spacing, 0.0),
        topology.BORDER_ROUTER,
        "control-room",
    )
    return grid + [router]


def _sliced_nodes(spacing: float) -> list[NodeRecord]:
    corridor = topology.build_linear(
        CORRIDOR_COUNT, spacing,
        origin=Position(0.0, spacing), axis="x",
        first_id=1, category="corridor",
    )
    chairs = topology.build_grid(
        CHAIR_COUNT, spacing,
        origin=Position(0.0, 3 * spacing), first_id=CORRIDOR_COUNT + 1,
        category="chair",
    )
    router_a = NodeRecord(
        ROUTER_A,
        Position((CORRIDOR_COUNT - 1) / 2 * spacing, 0.0),
        topology.BORDER_ROUTER,
        "control-room",
    )
    # centred one row below the chair block, whose bottom row is always
    # fully populated regardless of the chair count
    router_b = NodeRecord(
        ROUTER_B,
        Position(4 * spacing, 2 * spacing),
        topology.BORDER_ROUTER,
        "control-room",
    )
    return corridor + chairs + [router_a, router_b]


def arena_plan(mode: str) -> SlicePlan:
    """Slice plan for the arena deployment in the given operating mode."""
    if mode == MODE_NON_SLICED:
        return SlicePlan(
            mode=mode,
            slices=(
                SliceSpec(
                    "all",
                    frozenset(range(1, TOTAL_SENSORS + 1)),
                    border_router=ROUTER_A,
                ),
            ),
            default_slice_id="all",
        )
    if mode not in (MODE_LOGICAL, MODE_PHYSICAL):
        raise ConfigurationError(f"unknown mode {mode!r}")
    plan = SlicePlan(
        mode=mode,
        slices=(
            SliceSpec(
                "A",
                frozenset(range(1, CORRIDOR_COUNT + 1)),
                border_router=ROUTER_A,
            ),
            SliceSpec(
                "B",
                frozenset(range(CORRIDOR_COUNT + 1, TOTAL_SENSORS + 1)),
                border_router=ROUTER_B,
            ),
        ),
        default_slice_id="B",
    )
    if mode == MODE_PHYSICAL:
        plan = slicing.assign_channels(
            plan, {"A": CHANNEL_A, "B": CHANNEL_B}
        )
    return plan


def build_arena(
    mode: str,
    density: str = "ultra",
    range_preset: str = "default",
) -> Scenario:
    """Assemble the arena scenario: nodes, graphs, plan and flow tables."""
    if density not in DENSITY_PRESETS:
        raise ConfigurationError(f"unknown density preset {density!r}")
    if range_preset not in RANGE_PRESETS:
        raise ConfigurationError(f"unknown range preset {range_preset!r}")
    spacing = DENSITY_PRESETS[density].spacing
    comm_range = RANGE_PRESETS[range_preset]
    if mode == MODE_NON_SLICED:
        nodes = _non_sliced_nodes(spacing)
    else:
        nodes = _sliced_nodes(spacing)
    nodes = [
        as_border_router(n) if n.role == topology.BORDER_ROUTER else n
        for n in nodes
    ]
    graph = topology.derive_connectivity(nodes, comm_range)
    sense_graph = topology.derive_connectivity(
        nodes, comm_range * CARRIER_SENSE_FACTOR
    )
    sensors = {n.id for n in nodes if n.role == topology.SENSOR}
    plan = slicing.normalize_plan(arena_plan(mode), sensors)
    slice_graphs = slicing.partition(graph, plan)
    governing = (
        {s.slice_id: graph for s in plan.slices}
        if mode == MODE_NON_SLICED
        else slice_graphs
    )
    routes = []
    for s in plan.slices:
        routes.extend(
            routing.compute_slice_routes(
                governing[s.slice_id], s.border_router, s.slice_id
            )
        )
    flow_tables = routing.install_flows(routes, graph)
    return Scenario(
        name=f"arena-{mode}-{density}",
        mode=mode,
        density=density,
        comm_range=comm_range,
        nodes=nodes,
        graph=graph,
        sense_graph=sense_graph,
        plan=plan,
        slice_graphs=slice_graphs,
        flow_tables=flow_tables,
    )
