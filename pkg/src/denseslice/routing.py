"""Hop-count routing confined to slice graphs, and flow-rule tables.

Routes lead from a sensor to its slice's border router over the governing
graph (the full graph in non-sliced mode, the slice sub-graph otherwise).
Ties at each BFS layer are broken by lowest next-hop node id, so flow
tables are a deterministic function of topology and plan.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .connectivity import detect
from .topology import ConnectivityGraph


class RouteUnavailableError(RuntimeError):
    """No path from a source to its border router; carries the
    connectivity diagnosis for the slice."""

    def __init__(self, source: int, slice_id: str, report):
        super().__init__(
            f"node {source} has no route to the border router of"
            f" slice {slice_id!r}; disconnected={list(report.disconnected)}"
        )
        self.source = source
        self.slice_id = slice_id
        self.report = report


class FlowConsistencyError(RuntimeError):
    """A flow rule references a next hop that is not a radio neighbor."""


@dataclass(frozen=True)
class Route:
    source: int
    destination: int
    hops: tuple[int, ...]  # source .. destination inclusive
    slice_id: str

    @property
    def hop_count(self) -> int:
        return len(self.hops) - 1


@dataclass(frozen=True)
class FlowRule:
    node: int
    match_destination: int
    action_next_hop: int
    slice_id: str


def bfs_distances(g: ConnectivityGraph, root: int) -> dict[int, int]:
    """Hop distance from every reachable node to the root."""
    dist = {root: 0}
    queue = deque([root])
    while queue:
        current = queue.popleft()
        for nbr in g.adjacency[current]:
            if nbr not in dist:
                dist[nbr] = dist[current] + 1
                queue.append(nbr)
    return dist


def next_hops_toward(g: ConnectivityGraph, root: int) -> dict[int, int]:
    """For each node reachable from root, the lowest-id neighbor one hop
    closer to the root."""
    dist = bfs_distances(g, root)
    hops = {}
    for node, d in dist.items():
        if node == root:
            continue
        hops[node] = min(
            nbr for nbr in g.adjacency[node] if dist.get(nbr) == d - 1
        )
    return hops


def compute_route(
    g: ConnectivityGraph, source: int, border_router: int, slice_id: str
) -> Route:
    """Minimum-hop route from source to the border router within g."""
    next_hop = next_hops_toward(g, border_router)
    if source != border_router and source not in next_hop:
        report = detect(g, border_router, slice_id=slice_id)
        raise RouteUnavailableError(source, slice_id, report)
    hops = [source]
    while hops[-1] != border_router:
        hops.append(next_hop[hops[-1]])
    return Route(source, border_router, tuple(hops), slice_id)


def compute_slice_routes(
    slice_graph: ConnectivityGraph, border_router: int, slice_id: str
) -> list[Route]:
    """Routes for every sensor in the slice, ascending by source id."""
    sources = sorted(slice_graph.nodes - {border_router})
    return [
        compute_route(slice_graph, src, border_router, slice_id)
        for src in sources
    ]


def install_flows(
    routes: list[Route], g: ConnectivityGraph
) -> dict[int, dict[int, FlowRule]]:
    """Build per-node flow tables keyed by match destination.

    Later installs overwrite earlier rules for the same (node, destination).
    """
    tables: dict[int, dict[int, FlowRule]] = {}
    for route in routes:
        for node, nxt in zip(route.hops, route.hops[1:]):
            if nxt not in g.adjacency.get(node, ()):
                raise FlowConsistencyError(
                    f"rule at node {node} names non-neighbor {nxt}"
                )
            tables.setdefault(node, {})[route.destination] = FlowRule(
                node, route.destination, nxt, route.slice_id
            )
    return tables


def flow_rules(tables: dict[int, dict[int, FlowRule]]) -> list[FlowRule]:
    """Flatten flow tables into a deterministic rule list."""
    return [
        tables[node][dest]
        for node in sorted(tables)
        for dest in sorted(tables[node])
    ]
