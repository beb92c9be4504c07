"""Node placement generators and radio-connectivity graphs.

Placements are deterministic functions of their inputs.  Radio connectivity
uses the unit-disk model: two nodes are neighbors iff their Euclidean
distance is within the effective communication range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

SENSOR = "sensor"
BORDER_ROUTER = "border-router"

#: Effective communication range presets (meters).  "default" follows the
#: nominal 2.4 GHz mote radio range; "table1-calibrated" back-fits the
#: published max-neighbor counts for the wider-spaced deployments.
RANGE_PRESETS = {
    "default": 25.0,
    "table1-calibrated": 10.0,
}

#: Carrier sensing detects channel energy well below the decode threshold,
#: so the sensing radius exceeds the communication radius by this factor.
CARRIER_SENSE_FACTOR = 2.0


class ConfigurationError(ValueError):
    """Invalid topology or scenario parameters."""


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class NodeRecord:
    id: int
    position: Position
    role: str = SENSOR
    category: str = ""


@dataclass(frozen=True)
class DensityScenario:
    name: str
    spacing: float
    area: tuple[float, float]
    expected_max_neighbors: int


#: The five named density presets: node spacing, deployment area and the
#: published per-node max neighbor count.
DENSITY_PRESETS = {
    "ultra": DensityScenario("ultra", 1.0, (10.0, 10.0), 96),
    "extra": DensityScenario("extra", 2.0, (20.0, 20.0), 69),
    "high": DensityScenario("high", 3.0, (30.0, 30.0), 36),
    "dense": DensityScenario("dense", 4.0, (40.0, 40.0), 20),
    "medium": DensityScenario("medium", 4.5, (45.0, 45.0), 12),
}

DENSITY_ORDER = ["medium", "dense", "high", "extra", "ultra"]


@dataclass
class ConnectivityGraph:
    """Undirected radio-connectivity graph over node ids."""

    nodes: set[int] = field(default_factory=set)
    adjacency: dict[int, set[int]] = field(default_factory=dict)

    def add_node(self, node_id: int) -> None:
        self.nodes.add(node_id)
        self.adjacency.setdefault(node_id, set())

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            return
        self.add_node(u)
        self.add_node(v)
        self.adjacency[u].add(v)
        self.adjacency[v].add(u)

    def neighbors(self, node_id: int) -> set[int]:
        if node_id not in self.adjacency:
            raise KeyError(f"unknown node {node_id}")
        return self.adjacency[node_id]

    def degree(self, node_id: int) -> int:
        return len(self.neighbors(node_id))

    def edges(self) -> set[tuple[int, int]]:
        return {
            (u, v)
            for u, nbrs in self.adjacency.items()
            for v in nbrs
            if u < v
        }

    def induced(self, members: set[int]) -> "ConnectivityGraph":
        sub = ConnectivityGraph()
        for n in self.nodes & members:
            sub.add_node(n)
        for u, v in self.edges():
            if u in members and v in members:
                sub.add_edge(u, v)
        return sub

    def copy(self) -> "ConnectivityGraph":
        g = ConnectivityGraph()
        g.nodes = set(self.nodes)
        g.adjacency = {n: set(nbrs) for n, nbrs in self.adjacency.items()}
        return g


def build_grid(
    count: int,
    spacing: float,
    origin: Position = Position(0.0, 0.0),
    first_id: int = 1,
    category: str = "",
) -> list[NodeRecord]:
    """Lay out `count` sensors on a near-square row-major grid.

    Columns = ceil(sqrt(count)); the last row may be partial.
    """
    if count < 1:
        raise ConfigurationError(f"node count must be >= 1, got {count}")
    if spacing <= 0:
        raise ConfigurationError(f"spacing must be positive, got {spacing}")
    cols = math.ceil(math.sqrt(count))
    nodes = []
    for i in range(count):
        row, col = divmod(i, cols)
        pos = Position(origin.x + col * spacing, origin.y + row * spacing)
        nodes.append(NodeRecord(first_id + i, pos, SENSOR, category))
    return nodes


def build_linear(
    count: int,
    spacing: float,
    origin: Position = Position(0.0, 0.0),
    axis: str = "x",
    first_id: int = 1,
    category: str = "",
) -> list[NodeRecord]:
    """Lay out `count` sensors equally spaced along one axis."""
    if count < 1:
        raise ConfigurationError(f"node count must be >= 1, got {count}")
    if spacing <= 0:
        raise ConfigurationError(f"spacing must be positive, got {spacing}")
    if axis not in ("x", "y"):
        raise ConfigurationError(f"axis must be 'x' or 'y', got {axis!r}")
    nodes = []
    for i in range(count):
        if axis == "x":
            pos = Position(origin.x + i * spacing, origin.y)
        else:
            pos = Position(origin.x, origin.y + i * spacing)
        nodes.append(NodeRecord(first_id + i, pos, SENSOR, category))
    return nodes


def derive_connectivity(
    nodes: list[NodeRecord], comm_range: float
) -> ConnectivityGraph:
    """Unit-disk connectivity: edge iff distance <= comm_range."""
    if comm_range <= 0:
        raise ConfigurationError(
            f"communication range must be positive, got {comm_range}"
        )
    g = ConnectivityGraph()
    for n in nodes:
        g.add_node(n.id)
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            if a.position.distance_to(b.position) <= comm_range:
                g.add_edge(a.id, b.id)
    return g


def max_neighbor_count(g: ConnectivityGraph) -> int:
    if not g.nodes:
        return 0
    return max(len(g.adjacency[n]) for n in g.nodes)


def as_border_router(node: NodeRecord) -> NodeRecord:
    return replace(node, role=BORDER_ROUTER)


def export_topology(nodes: list[NodeRecord]) -> str:
    """Line-oriented export: `node <id> <x> <y> <role> <category>`."""
    lines = []
    for n in sorted(nodes, key=lambda n: n.id):
        category = n.category or "-"
        lines.append(
            f"node {n.id} {n.position.x:g} {n.position.y:g} {n.role} {category}"
        )
    return "\n".join(lines) + "\n"


def import_topology(text: str) -> list[NodeRecord]:
    """Parse the line-oriented topology format produced by export_topology."""
    nodes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 6 or parts[0] != "node":
            raise ConfigurationError(f"bad topology line {lineno}: {raw!r}")
        _, node_id, x, y, role, category = parts
        if role not in (SENSOR, BORDER_ROUTER):
            raise ConfigurationError(f"bad role on line {lineno}: {role!r}")
        nodes.append(
            NodeRecord(
                int(node_id),
                Position(float(x), float(y)),
                role,
                "" if category == "-" else category,
            )
        )
    ids = [n.id for n in nodes]
    if len(ids) != len(set(ids)):
        raise ConfigurationError("duplicate node ids in topology")
    return nodes
