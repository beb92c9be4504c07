"""Control plane coordinator: owns the topology, the active slice plan,
per-slice graphs, routes and flow tables, and the attached simulator.

All mutations (plan replacement, reconfiguration deltas) are serialized
behind one lock and applied atomically: a rejected change leaves every
piece of controller state untouched.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from . import routing, simulator, slicing, topology
from .connectivity import CheckScheduler, detect
from .slicing import MODE_NON_SLICED, PlanDelta, SlicePlan
from .topology import CARRIER_SENSE_FACTOR, ConnectivityGraph, NodeRecord


@dataclass(frozen=True)
class ReconfigurationEvent:
    """Emitted after a successful plan change."""

    recomputed_slices: tuple[str, ...]
    channel_retunes: tuple[tuple[int, int], ...]  # (node id, new channel)


@dataclass
class SimHandle:
    sim: simulator.Simulator
    thread: threading.Thread | None = None
    pause_requested: bool = False
    status: str = "idle"
    result: simulator.SimResult | None = None


class Controller:
    def __init__(
        self,
        nodes: list[NodeRecord],
        comm_range: float,
        plan: SlicePlan,
    ):
        self._lock = threading.RLock()
        self.nodes = {n.id: n for n in nodes}
        self.comm_range = comm_range
        self.graph = topology.derive_connectivity(nodes, comm_range)
        self.sense_graph = topology.derive_connectivity(
            nodes, comm_range * CARRIER_SENSE_FACTOR
        )
        self.sensors = {
            n.id for n in nodes if n.role == topology.SENSOR
        }
        self.codet = CheckScheduler()
        self.events: list[ReconfigurationEvent] = []
        self.sim_handle: SimHandle | None = None
        self.plan: SlicePlan | None = None
        self.slice_graphs: dict[str, ConnectivityGraph] = {}
        self.routes: list[routing.Route] = []
        self.flow_tables: dict[int, dict[int, routing.FlowRule]] = {}
        self.set_plan(plan)

    # -- plan management -------------------------------------------------

    def _governing_graph(self, slice_id: str) -> ConnectivityGraph:
        if self.plan.mode == MODE_NON_SLICED:
            return self.graph
        return self.slice_graphs[slice_id]

    def _recompute(self, plan: SlicePlan):
        """Derive slice graphs, routes and flow tables for a plan; raises
        without touching state when any slice has unreachable sensors."""
        slice_graphs = slicing.partition(self.graph, plan)
        governing = (
            {s.slice_id: self.graph for s in plan.slices}
            if plan.mode == MODE_NON_SLICED
            else slice_graphs
        )
        routes = []
        for s in plan.slices:
            routes.extend(
                routing.compute_slice_routes(
                    governing[s.slice_id], s.border_router, s.slice_id
                )
            )
        flow_tables = routing.install_flows(routes, self.graph)
        return slice_graphs, routes, flow_tables

    def set_plan(self, plan: SlicePlan) -> ReconfigurationEvent:
        with self._lock:
            normalized = slicing.normalize_plan(plan, set(self.sensors))
            slice_graphs, routes, flow_tables = self._recompute(normalized)
            retunes = self._channel_retunes(self.plan, normalized)
            self.plan = normalized
            self.slice_graphs = slice_graphs
            self.routes = routes
            self.flow_tables = flow_tables
            event = ReconfigurationEvent(
                tuple(s.slice_id for s in normalized.slices), retunes
            )
            self.events.append(event)
            return event

    def apply_delta(self, delta: PlanDelta) -> ReconfigurationEvent:
        with self._lock:
            new_plan = slicing.apply_reconfiguration(
                self.plan, delta, set(self.sensors)
            )
            return self.set_plan(new_plan)

    def _channel_retunes(
        self, old: SlicePlan | None, new: SlicePlan
    ) -> tuple[tuple[int, int], ...]:
        retunes = []
        for s in new.slices:
            channel = new.channel_of(s.slice_id)
            for node in sorted(s.members) + [s.border_router]:
                if old is None:
                    previous = None
                else:
                    try:
                        previous = old.channel_of(old.slice_of(node).slice_id)
                    except KeyError:
                        previous = None
                if previous != channel:
                    retunes.append((node, channel))
        return tuple(retunes)

    # -- read-side views ---------------------------------------------------

    def topology_json(self) -> dict:
        return {
            "comm_range": self.comm_range,
            "nodes": [
                {
                    "id": n.id,
                    "x": n.position.x,
                    "y": n.position.y,
                    "role": n.role,
                    "category": n.category,
                }
                for n in sorted(self.nodes.values(), key=lambda n: n.id)
            ],
            "edges": sorted(self.graph.edges()),
        }

    def density_json(self) -> dict:
        routers = {s.border_router for s in self.plan.slices}
        classes = slicing.classify_density(self.graph, exclude=routers)
        return {
            str(node): {
                "tier": dc.tier,
                "percentile": dc.adjacency_percentile,
            }
            for node, dc in sorted(classes.items())
        }

    def flow_rules_json(self) -> list[dict]:
        return [
            {
                "node": r.node,
                "match_destination": r.match_destination,
                "action_next_hop": r.action_next_hop,
                "slice": r.slice_id,
            }
            for r in routing.flow_rules(self.flow_tables)
        ]

    # -- connectivity checks -----------------------------------------------

    def run_codet(self, slice_id: str | None = None, at: float = 0.0):
        with self._lock:
            targets = {
                s.slice_id: (
                    self._governing_graph(s.slice_id), s.border_router
                )
                for s in self.plan.slices
                if slice_id is None or s.slice_id == slice_id
            }
            if slice_id is not None and not targets:
                raise KeyError(f"unknown slice {slice_id!r}")
            return self.codet.run_once(targets, at=at)

    def diagnose(self, slice_id: str):
        s = self.plan.slice_by_id(slice_id)
        return detect(
            self._governing_graph(slice_id), s.border_router,
            slice_id=slice_id,
        )

    # -- simulation control --------------------------------------------------

    def attach_sim(
        self,
        profile: simulator.TrafficProfile,
        duration_min: float,
        seed: int,
        config: simulator.SimConfig = simulator.SimConfig(),
    ) -> SimHandle:
        with self._lock:
            sim = simulator.Simulator(
                self.graph, self.plan, self.flow_tables, profile,
                duration_s=duration_min * 60.0, seed=seed, config=config,
                sense_graph=self.sense_graph,
            )
            sim.prepare()
            self.sim_handle = SimHandle(sim=sim, status="paused")
            return self.sim_handle

    def sim_status(self) -> dict:
        handle = self.sim_handle
        if handle is None:
            return {"status": "idle"}
        sim = handle.sim
        report = simulator.compute_pdr(sim.records)
        return {
            "status": handle.status,
            "time": sim.now,
            "duration": sim.duration,
            "sent": report.sent,
            "received": report.received,
            "pdr": report.pdr,
        }

    def sim_start(self) -> dict:
        with self._lock:
            handle = self.sim_handle
            if handle is None:
                raise RuntimeError("no simulation attached")
            if handle.status in ("running", "finished"):
                return self.sim_status()
            handle.pause_requested = False
            handle.status = "running"
            handle.thread = threading.Thread(
                target=self._sim_loop, args=(handle,), daemon=True
            )
            handle.thread.start()
        return self.sim_status()

    def _sim_loop(self, handle: SimHandle) -> None:
        sim = handle.sim
        while not sim.finished and not handle.pause_requested:
            sim.step(20_000)
        if sim.finished:
            handle.result = sim.result()
            handle.status = "finished"
        else:
            handle.status = "paused"

    def sim_pause(self) -> dict:
        handle = self.sim_handle
        if handle is None:
            raise RuntimeError("no simulation attached")
        handle.pause_requested = True
        if handle.thread is not None:
            handle.thread.join()
        return self.sim_status()

    def sim_step(self, events: int = 1000) -> dict:
        handle = self.sim_handle
        if handle is None:
            raise RuntimeError("no simulation attached")
        if handle.status == "running":
            raise RuntimeError("pause the simulation before stepping")
        handle.sim.step(events)
        if handle.sim.finished:
            handle.result = handle.sim.result()
            handle.status = "finished"
        return self.sim_status()

    def pdr_json(self) -> dict:
        handle = self.sim_handle
        if handle is None:
            return {"sent": 0, "received": 0, "pdr": None,
                    "undefined": True, "per_slice": {}, "drops": {}}
        report = simulator.compute_pdr(handle.sim.records)
        return {
            "sent": report.sent,
            "received": report.received,
            "pdr": report.pdr,
            "undefined": report.undefined,
            "per_slice": report.per_slice,
            "drops": report.drops,
            "in_flight": report.in_flight,
        }
