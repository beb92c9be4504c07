"""Minimum-hop routing and flow-table installation."""

from __future__ import annotations

import random

import pytest

from denseslice import routing, topology
from denseslice.routing import (
    FlowConsistencyError,
    FlowRule,
    Route,
    RouteUnavailableError,
    compute_route,
    compute_slice_routes,
    flow_rules,
    install_flows,
)
from denseslice.scenarios import build_arena
from denseslice.topology import ConnectivityGraph, NodeRecord, Position

from conftest import oracle_bfs_distances, random_geometric_graph


def linear_graph(n: int, spacing: float = 5.0) -> ConnectivityGraph:
    nodes = [
        NodeRecord(i, Position(i * spacing, 0.0), topology.SENSOR, "line")
        for i in range(n)
    ]
    return topology.derive_connectivity(nodes, spacing * 1.5)


# ---------------------------------------------------------------- routes


def test_linear_chain_far_end_is_twenty_hops():
    g = linear_graph(21)
    route = compute_route(g, 20, 0, "A")
    assert route.hop_count == 20
    assert route.hops == tuple(range(20, -1, -1))


def test_adjacent_pair_is_single_hop():
    g = linear_graph(2)
    route = compute_route(g, 1, 0, "A")
    assert route.hops == (1, 0)
    assert route.hop_count == 1


def test_route_at_router_is_zero_hops():
    g = linear_graph(3)
    route = compute_route(g, 0, 0, "A")
    assert route.hops == (0,)
    assert route.hop_count == 0


def test_ties_break_toward_lowest_next_hop_id():
    # Diamond: 3 can go via 1 or 2 to reach 0; must pick 1.
    g = ConnectivityGraph()
    g.add_edge(0, 1)
    g.add_edge(0, 2)
    g.add_edge(1, 3)
    g.add_edge(2, 3)
    route = compute_route(g, 3, 0, "A")
    assert route.hops == (3, 1, 0)


def test_route_lengths_match_bfs_oracle_on_random_graphs():
    rng = random.Random(77)
    for _ in range(30):
        g = random_geometric_graph(rng.randint(10, 80), rng)
        root = min(g.nodes)
        dist = oracle_bfs_distances(g.adjacency, root)
        for src in sorted(g.nodes):
            if src not in dist:
                with pytest.raises(RouteUnavailableError):
                    compute_route(g, src, root, "A")
                continue
            route = compute_route(g, src, root, "A")
            assert route.hop_count == dist[src]
            # every step must use a real edge
            for a, b in zip(route.hops, route.hops[1:]):
                assert b in g.adjacency[a]


@pytest.mark.parametrize("mode", ["non-sliced", "logical", "physical"])
def test_arena_hop_counts_match_oracle(mode):
    scenario = build_arena(mode, density="extra", range_preset="table1-calibrated")
    for s in scenario.plan.slices:
        governing = (
            scenario.graph
            if mode == "non-sliced"
            else scenario.slice_graphs[s.slice_id]
        )
        dist = oracle_bfs_distances(governing.adjacency, s.border_router)
        for src in sorted(s.members):
            route = compute_route(governing, src, s.border_router, s.slice_id)
            assert route.hop_count == dist[src]


def test_unroutable_source_error_carries_diagnosis():
    g = ConnectivityGraph()
    g.add_edge(0, 1)
    g.add_node(9)  # isolated
    with pytest.raises(RouteUnavailableError) as exc:
        compute_route(g, 9, 0, "B")
    err = exc.value
    assert err.source == 9
    assert err.slice_id == "B"
    assert 9 in err.report.disconnected


def test_slice_routes_cover_every_member_in_ascending_order():
    g = linear_graph(6)
    routes = compute_slice_routes(g, 0, "A")
    assert [r.source for r in routes] == [1, 2, 3, 4, 5]
    assert all(r.destination == 0 for r in routes)


# ---------------------------------------------------------------- flows


def test_three_hop_route_installs_three_rules():
    g = linear_graph(4)
    route = compute_route(g, 3, 0, "A")
    tables = install_flows([route], g)
    rules = flow_rules(tables)
    assert len(rules) == 3
    assert rules == [
        FlowRule(1, 0, 0, "A"),
        FlowRule(2, 0, 1, "A"),
        FlowRule(3, 0, 2, "A"),
    ]


def test_shared_prefix_overwrites_to_single_rule_per_node():
    g = linear_graph(5)
    routes = compute_slice_routes(g, 0, "A")
    tables = install_flows(routes, g)
    # every relay holds exactly one rule for the single destination
    for node, table in tables.items():
        assert list(table) == [0]


@pytest.mark.parametrize("mode", ["non-sliced", "logical", "physical"])
def test_every_arena_sensor_has_a_rule(mode):
    scenario = build_arena(mode, density="dense", range_preset="table1-calibrated")
    ruled = set(scenario.flow_tables)
    assert scenario.sensor_ids <= ruled


def test_non_neighbor_next_hop_rejected():
    g = linear_graph(4)
    bogus = Route(3, 0, (3, 1, 0), "A")  # 3-1 is not an edge
    with pytest.raises(FlowConsistencyError):
        install_flows([bogus], g)


def test_flow_tables_are_deterministic():
    def build():
        scenario = build_arena(
            "physical", density="ultra", range_preset="table1-calibrated"
        )
        return repr(flow_rules(scenario.flow_tables)).encode()

    assert build() == build()
