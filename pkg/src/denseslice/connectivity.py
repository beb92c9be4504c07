"""Connectivity detector: verify that every node in a slice graph has a
path to the target border router.

Two interchangeable detection strategies exist: a single reverse BFS from
the target (default), and the exhaustive per-node BFS loop (one search per
node) kept for cross-checking; both return identical reports.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .topology import ConfigurationError, ConnectivityGraph


class NodeLookupError(KeyError):
    """A node id was not present in the graph."""


@dataclass(frozen=True)
class ConnectivityReport:
    slice_id: str
    target: int
    disconnected: tuple[int, ...]
    checked_at: float

    @property
    def fully_connected(self) -> bool:
        return not self.disconnected


def path_exists(g: ConnectivityGraph, start: int, target: int) -> bool:
    """Breadth-first reachability from start to target."""
    if start not in g.nodes:
        raise NodeLookupError(start)
    if target not in g.nodes:
        raise NodeLookupError(target)
    if start == target:
        return True
    visited = {start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for nbr in g.adjacency[current]:
            if nbr == target:
                return True
            if nbr not in visited:
                visited.add(nbr)
                queue.append(nbr)
    return False


def _reachable_from(g: ConnectivityGraph, target: int) -> set[int]:
    visited = {target}
    queue = deque([target])
    while queue:
        current = queue.popleft()
        for nbr in g.adjacency[current]:
            if nbr not in visited:
                visited.add(nbr)
                queue.append(nbr)
    return visited


def detect(
    g: ConnectivityGraph,
    target: int,
    slice_id: str = "",
    checked_at: float = 0.0,
    per_node: bool = False,
) -> ConnectivityReport:
    """List the nodes with no path to the target, ascending by id.

    `per_node` selects the exhaustive one-BFS-per-node strategy instead of
    the single reverse BFS; output is identical.
    """
    if target not in g.nodes:
        raise NodeLookupError(target)
    if per_node:
        disconnected = [
            n for n in sorted(g.nodes)
            if n != target and not path_exists(g, n, target)
        ]
    else:
        reachable = _reachable_from(g, target)
        disconnected = sorted(g.nodes - reachable)
    return ConnectivityReport(
        slice_id=slice_id,
        target=target,
        disconnected=tuple(disconnected),
        checked_at=checked_at,
    )


DEFAULT_CHECK_INTERVAL = 600.0  # seconds; 10 minutes


@dataclass
class CheckScheduler:
    """Periodic connectivity checks over a set of slices.

    Reports are retained in a bounded per-slice ring; a non-empty
    disconnected list triggers the notification callback.
    """

    interval: float = DEFAULT_CHECK_INTERVAL
    ring_size: int = 100
    notify: object = None  # callable(report) or None
    _reports: dict[str, deque] = field(default_factory=dict)

    def __post_init__(self):
        if self.interval <= 0:
            raise ConfigurationError(
                f"check interval must be positive, got {self.interval}"
            )

    def run_once(
        self,
        slices: dict[str, tuple[ConnectivityGraph, int]],
        at: float,
    ) -> list[ConnectivityReport]:
        reports = []
        for slice_id in sorted(slices):
            graph, target = slices[slice_id]
            report = detect(graph, target, slice_id=slice_id, checked_at=at)
            self._record(report)
            if report.disconnected and self.notify is not None:
                self.notify(report)
            reports.append(report)
        return reports

    def run_for(
        self,
        slices_at: object,
        duration: float,
    ):
        """Yield reports at t = interval, 2*interval, ... <= duration.

        `slices_at` is called with the check time and returns the slice map,
        so checks always observe the current graphs.
        """
        ticks = int(duration // self.interval)
        for k in range(1, ticks + 1):
            t = k * self.interval
            yield from self.run_once(slices_at(t), at=t)

    def reports(self, slice_id: str) -> list[ConnectivityReport]:
        return list(self._reports.get(slice_id, ()))

    def all_reports(self) -> list[ConnectivityReport]:
        merged = [r for ring in self._reports.values() for r in ring]
        return sorted(merged, key=lambda r: (r.checked_at, r.slice_id))

    def _record(self, report: ConnectivityReport) -> None:
        ring = self._reports.setdefault(
            report.slice_id, deque(maxlen=self.ring_size)
        )
        ring.append(report)
