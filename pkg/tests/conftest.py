"""Shared fixtures and independent oracles used across the test suite.

The oracles deliberately avoid the library's own graph code: reachability
is recomputed with plain DFS and union-find, induced subgraphs by filtering
the full edge list, and distances with a stand-alone BFS.
"""
from __future__ import annotations

import math
import random

import pytest

from denseslice import topology
from denseslice.topology import ConnectivityGraph, NodeRecord, Position


# -- independent oracles ----------------------------------------------------

def brute_force_edges(nodes: list[NodeRecord], comm_range: float) -> set:
    """O(n^2) pairwise-distance edge oracle."""
    edges = set()
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            d = math.dist((a.position.x, a.position.y),
                          (b.position.x, b.position.y))
            if d <= comm_range:
                edges.add((min(a.id, b.id), max(a.id, b.id)))
    return edges


def dfs_reachable(adjacency: dict, start: int) -> set:
    """Iterative depth-first search, independent of the BFS under test."""
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adjacency[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def union_find_component(g: ConnectivityGraph, target: int) -> set:
    uf = UnionFind(g.nodes)
    for u, v in g.edges():
        uf.union(u, v)
    root = uf.find(target)
    return {n for n in g.nodes if uf.find(n) == root}


def oracle_bfs_distances(adjacency: dict, root: int) -> dict:
    dist = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adjacency[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


# -- graph generators -------------------------------------------------------

def random_geometric_graph(
    n: int, rng: random.Random, side: float = 100.0, radius: float = 18.0,
) -> ConnectivityGraph:
    """Random geometric graph with mixed connectivity (often disconnected)."""
    nodes = [
        NodeRecord(i, Position(rng.uniform(0, side), rng.uniform(0, side)),
                   topology.SENSOR, "rgg")
        for i in range(1, n + 1)
    ]
    return topology.derive_connectivity(nodes, radius)


def star_graph(leaves: int = 10) -> ConnectivityGraph:
    """Hub node 0 adjacent to every leaf; leaves mutually non-adjacent."""
    g = ConnectivityGraph()
    for i in range(1, leaves + 1):
        g.add_edge(0, i)
    return g


def star_nodes() -> list[NodeRecord]:
    """Geometric layout whose top-degree node is the unique hub: five
    leaves on a ring only the hub reaches (ring radius 9 < range 10 <
    leaf-to-leaf chord), plus isolated stragglers pushing the hub's
    degree past the red percentile threshold."""
    nodes = [NodeRecord(0, Position(50.0, 50.0), topology.SENSOR, "hub")]
    for i in range(1, 6):
        angle = 2 * math.pi * i / 5
        nodes.append(NodeRecord(
            i,
            Position(50.0 + 9.0 * math.cos(angle),
                     50.0 + 9.0 * math.sin(angle)),
            topology.SENSOR, "leaf",
        ))
    for i in range(6, 10):
        nodes.append(NodeRecord(
            i, Position(200.0 + 30.0 * i, 200.0), topology.SENSOR, "far",
        ))
    return nodes


@pytest.fixture(scope="session")
def rgg_corpus_200():
    """200 random geometric graphs, 10-200 nodes, mixed connectivity."""
    rng = random.Random(2024)
    return [random_geometric_graph(rng.randint(10, 200), rng)
            for _ in range(200)]
