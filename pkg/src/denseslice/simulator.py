"""Deterministic discrete-event simulator of the 802.15.4 data plane.

Model summary:

* Unit-disk radio; interference range equals communication range.
* Low-power-listening receivers: every mote wakes on its own fixed period
  and listens for a short window; a sender holds each frame until its next
  hop's listen window, then contends for the medium inside that window.
* CSMA-lite medium access: carrier-sense, random slotted backoff while
  busy, a bounded number of backoffs per round and rounds (retries) per
  frame, no acknowledgment frames.  Collisions and busy rounds are known
  to the sender directly.
* Reception fails when two or more same-channel transmissions overlap in
  range of the receiver (no capture), or when the receiver is mid-
  transmission itself.
* Per-node drop-tail FIFO queue.

Identical inputs and seed produce an identical event log.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field

from .slicing import SlicePlan
from .topology import ConnectivityGraph

FATE_DELIVERED = "delivered"
FATE_COLLISION = "dropped_collision"
FATE_RETRY = "dropped_retry"
FATE_QUEUE = "dropped_queue"
FATE_IN_FLIGHT = "in_flight"
DROP_FATES = (FATE_COLLISION, FATE_RETRY, FATE_QUEUE)


class SimConfigError(ValueError):
    """Simulation inputs are inconsistent (e.g. missing flow rules)."""


@dataclass(frozen=True)
class TrafficProfile:
    rate_per_min: float  # data packets per minute per node
    payload_bytes: int = 128

    def __post_init__(self):
        if self.rate_per_min <= 0:
            raise SimConfigError(
                f"traffic rate must be positive, got {self.rate_per_min}"
            )


@dataclass(frozen=True)
class SimConfig:
    """MAC and radio timing knobs (defaults follow 802.15.4 at 250 kbps
    with a low-power-listening duty cycle)."""

    bitrate_bps: float = 250_000.0
    header_bytes: int = 23
    slot_s: float = 0.00032            # backoff quantum
    backoff_slots_max: int = 8         # uniform 1..8 slots = 0.32..2.56 ms
    max_backoffs: int = 4              # busy senses per round
    max_retries: int = 3               # rounds per frame after the first
    turnaround_s: float = 0.000192     # CCA-to-TX blind window
    queue_limit: int = 8
    wake_interval_s: float = 0.25      # receiver listen period
    listen_window_s: float = 0.060     # receiver awake span per period
    routers_always_awake: bool = False
    reactive_routing: bool = False
    beacon_interval_s: float = 0.9
    beacon_payload_bytes: int = 128

    def airtime(self, payload_bytes: int) -> float:
        return (payload_bytes + self.header_bytes) * 8.0 / self.bitrate_bps


@dataclass
class PacketRecord:
    packet_id: int
    origin: int
    slice_id: str
    generated_at: float
    fate: str = FATE_IN_FLIGHT
    hops_traversed: int = 0
    delivered_at: float | None = None


@dataclass(frozen=True)
class PdrReport:
    sent: int
    received: int
    pdr: float | None  # None when sent == 0 (undefined)
    per_slice: dict
    drops: dict
    in_flight: int

    @property
    def undefined(self) -> bool:
        return self.pdr is None


def compute_pdr(records: list[PacketRecord]) -> PdrReport:
    """Aggregate packet fates into sent/received counters and PDR."""
    sent = len(records)
    received = 0
    drops = {fate: 0 for fate in DROP_FATES}
    in_flight = 0
    per_slice: dict[str, dict] = {}
    for rec in records:
        bucket = per_slice.setdefault(
            rec.slice_id, {"sent": 0, "received": 0, "pdr": None}
        )
        bucket["sent"] += 1
        if rec.fate == FATE_DELIVERED:
            received += 1
            bucket["received"] += 1
        elif rec.fate == FATE_IN_FLIGHT:
            in_flight += 1
        else:
            drops[rec.fate] += 1
    for bucket in per_slice.values():
        if bucket["sent"]:
            bucket["pdr"] = bucket["received"] / bucket["sent"]
    return PdrReport(
        sent=sent,
        received=received,
        pdr=(received / sent) if sent else None,
        per_slice=per_slice,
        drops=drops,
        in_flight=in_flight,
    )


def generate_traffic(
    profile: TrafficProfile,
    node_ids: list[int],
    duration_s: float,
    seed: int,
) -> list[tuple[float, int]]:
    """Periodic per-node generation times with one uniform random phase
    offset per node; returns (time, node) pairs in event order."""
    rng = random.Random(seed)
    period = 60.0 / profile.rate_per_min
    events = []
    for node in sorted(node_ids):
        phase = rng.uniform(0.0, period)
        t = phase
        while t < duration_s:
            events.append((t, node))
            t += period
    events.sort()
    return events


@dataclass
class SimResult:
    report: PdrReport
    records: list[PacketRecord]
    event_log: list[tuple]
    collisions: int
    cross_slice_collisions: int

    def event_log_lines(self) -> list[str]:
        """Render the log as `time kind node packet slice channel detail`."""
        return [
            f"{t:.6f} {kind} {node} {packet} {slice_id} {channel} {detail}"
            for (t, kind, node, packet, slice_id, channel, detail)
            in self.event_log
        ]


# internal event ranks for deterministic tie-breaking
_RANK_GEN = 0
_RANK_ATTEMPT = 1
_RANK_TXEND = 2


class _Mote:
    __slots__ = (
        "node_id", "channel", "slice_id", "queue", "busy", "is_router",
    )

    def __init__(self, node_id, channel, slice_id, is_router):
        self.node_id = node_id
        self.channel = channel
        self.slice_id = slice_id
        self.queue = []
        self.busy = False
        self.is_router = is_router


class _Frame:
    __slots__ = (
        "packet_id", "origin", "slice_id", "dest",
        "retries", "backoffs", "record",
    )

    def __init__(self, packet_id, origin, slice_id, dest, record):
        self.packet_id = packet_id
        self.origin = origin
        self.slice_id = slice_id
        self.dest = dest
        self.retries = 0
        self.backoffs = 0
        self.record = record


class _Transmission:
    __slots__ = ("sender", "receiver", "start", "end", "channel",
                 "frame", "slice_id", "corrupted")

    def __init__(self, sender, receiver, start, end, channel, frame,
                 slice_id):
        self.sender = sender
        self.receiver = receiver
        self.start = start
        self.end = end
        self.channel = channel
        self.frame = frame
        self.slice_id = slice_id
        self.corrupted = False


class Simulator:
    """One deterministic simulation run over an event queue."""

    def __init__(
        self,
        graph: ConnectivityGraph,
        plan: SlicePlan,
        flow_tables: dict[int, dict[int, object]],
        profile: TrafficProfile,
        duration_s: float,
        seed: int,
        config: SimConfig = SimConfig(),
        route_resolver=None,
        keep_log: bool = True,
        sense_graph: ConnectivityGraph | None = None,
    ):
        self.graph = graph
        # carrier sensing can have a wider reach than frame decoding
        self.sense_adj = (sense_graph or graph).adjacency
        self.plan = plan
        self.profile = profile
        self.duration = duration_s
        self.config = config
        self.rng = random.Random(seed ^ 0x5EED)
        self.seed = seed
        self.keep_log = keep_log
        self.route_resolver = route_resolver

        self.airtime = config.airtime(profile.payload_bytes)
        if config.listen_window_s < self.airtime + config.turnaround_s + \
                config.backoff_slots_max * config.slot_s:
            raise SimConfigError(
                "listen window too short for one backoff plus one frame"
            )

        routers = {s.border_router for s in plan.slices}
        self.next_hop: dict[int, dict[int, int]] = {}
        for node, table in flow_tables.items():
            self.next_hop[node] = {
                dest: rule.action_next_hop for dest, rule in table.items()
            }
        self.dest_of: dict[int, int] = {}
        self.motes: dict[int, _Mote] = {}
        for s in plan.slices:
            channel = plan.channel_of(s.slice_id)
            for node in sorted(s.members):
                self.dest_of[node] = s.border_router
                self.motes[node] = _Mote(node, channel, s.slice_id, False)
            self.motes[s.border_router] = _Mote(
                s.border_router, channel, s.slice_id, True
            )
        if not config.reactive_routing:
            for node, dest in self.dest_of.items():
                if dest not in self.next_hop.get(node, ()):
                    raise SimConfigError(
                        f"no flow rule at node {node} for destination {dest}"
                        " and reactive routing is disabled"
                    )

        self.records: list[PacketRecord] = []
        self.event_log: list[tuple] = []
        self.active: list[_Transmission] = []
        self.collisions = 0
        self.cross_slice_collisions = 0
        self.collision_slice_pairs: list[tuple] = []
        self._heap: list[tuple] = []
        self._seq = 0
        self._prepared = False
        self.now = 0.0

    # -- event plumbing ------------------------------------------------

    def _push(self, time, rank, action, payload):
        self._seq += 1
        heapq.heappush(self._heap, (time, rank, self._seq, action, payload))

    def _log(self, kind, node, packet, slice_id, channel, detail):
        if self.keep_log:
            self.event_log.append(
                (self.now, kind, node, packet, slice_id, channel, detail)
            )

    # -- medium state ---------------------------------------------------

    def _channel_busy(self, node_id: int, channel: int) -> bool:
        nbrs = self.sense_adj[node_id]
        return any(
            tx.channel == channel and tx.sender in nbrs
            for tx in self.active
        )

    def _busy_until(self, node_id: int, channel: int) -> float | None:
        """End time of the last sensable transmission on the channel, or
        None when the medium is clear."""
        nbrs = self.sense_adj[node_id]
        end = None
        for tx in self.active:
            if tx.channel == channel and tx.sender in nbrs:
                if end is None or tx.end > end:
                    end = tx.end
        return end

    def _mark_interference(self, new_tx: _Transmission) -> None:
        """Mutual corruption between the new transmission and every active
        same-channel transmission in range of either receiver.

        Broadcast control frames have no receiver of their own; they can
        corrupt unicast receptions in range but are never corrupted."""
        nbrs_of_new_rx = (
            self.graph.adjacency[new_tx.receiver]
            if new_tx.receiver is not None else ()
        )
        for tx in self.active:
            if tx is new_tx or tx.channel != new_tx.channel:
                continue
            hit = False
            if tx.sender in nbrs_of_new_rx:
                new_tx.corrupted = True
                hit = True
            if tx.receiver is not None and \
                    new_tx.sender in self.graph.adjacency[tx.receiver]:
                tx.corrupted = True
                hit = True
            # a node cannot receive while transmitting
            if tx.sender == new_tx.receiver:
                new_tx.corrupted = True
                hit = True
            if hit:
                self._note_collision(tx.slice_id, new_tx.slice_id)

    def _note_collision(self, slice_a: str, slice_b: str) -> None:
        self.collisions += 1
        self.collision_slice_pairs.append((slice_a, slice_b))
        if slice_a != slice_b:
            self.cross_slice_collisions += 1

    # -- listen windows ---------------------------------------------------

    def _window_start(self, receiver: int, k: int) -> float:
        """Start of receiver's k-th listen window.

        Receivers duty-cycle independently and their clocks are not
        synchronized, so the window floats uniformly inside each period
        (deterministic per receiver, period and seed).
        """
        interval = self.config.wake_interval_s
        slack = interval - self.config.listen_window_s
        # cheap deterministic per-(receiver, period) uniform draw
        x = (self.seed * 1000003) ^ (receiver * 8191) ^ (k * 2654435761)
        x &= 0xFFFFFFFF
        x ^= x >> 13
        x = (x * 1274126177) & 0xFFFFFFFF
        x ^= x >> 16
        return k * interval + (x / 4294967296.0) * slack

    def _window_for(self, receiver: int, t: float) -> float:
        """Earliest time >= t at which a frame to `receiver` may start its
        contention (the receiver is awake long enough for a full frame)."""
        mote = self.motes[receiver]
        if self.config.routers_always_awake and mote.is_router:
            return t
        interval = self.config.wake_interval_s
        need = self.airtime + self.config.turnaround_s
        k = max(0, int(t // interval))
        while True:
            start = self._window_start(receiver, k)
            latest = start + self.config.listen_window_s - need
            if t <= latest:
                return max(t, start)
            k += 1

    def _window_deadline(self, receiver: int, t: float) -> float:
        """Latest sense time inside the listen window containing t."""
        mote = self.motes[receiver]
        if self.config.routers_always_awake and mote.is_router:
            return float("inf")
        interval = self.config.wake_interval_s
        k = int(t // interval)
        start = self._window_start(receiver, k)
        if t < start and k > 0:
            start = self._window_start(receiver, k - 1)
        return start + self.config.listen_window_s - (
            self.airtime + self.config.turnaround_s
        )

    # -- frame service ------------------------------------------------------

    def _resolve_next_hop(self, node: int, frame: _Frame) -> int:
        hop = self.next_hop.get(node, {}).get(frame.dest)
        if hop is None:
            if self.route_resolver is None:
                raise SimConfigError(
                    f"node {node} has no rule for destination {frame.dest}"
                )
            hop = self.route_resolver(node, frame.dest)
            self.next_hop.setdefault(node, {})[frame.dest] = hop
        return hop

    def _start_service(self, node: int) -> None:
        mote = self.motes[node]
        if mote.busy or not mote.queue:
            return
        mote.busy = True
        frame = mote.queue[0]
        receiver = self._resolve_next_hop(node, frame)
        self._push(
            self._contention_time(receiver, self.now),
            _RANK_ATTEMPT, "attempt", (node, receiver),
        )

    def _contention_time(self, receiver: int, t: float) -> float:
        """Pick a sense time uniformly over what remains of the receiver's
        next usable listen window (desynchronizes hidden contenders)."""
        when = self._window_for(receiver, t)
        deadline = self._window_deadline(receiver, when)
        if deadline > when and deadline != float("inf"):
            when += self.rng.uniform(0.0, deadline - when)
        return when

    def _finish_frame(self, node: int, frame: _Frame, fate: str,
                      detail: str) -> None:
        mote = self.motes[node]
        assert mote.queue and mote.queue[0] is frame
        mote.queue.pop(0)
        mote.busy = False
        if fate != FATE_DELIVERED:
            frame.record.fate = fate
            self._log("drop", node, frame.packet_id, frame.slice_id,
                      mote.channel, detail)
        self._start_service(node)

    def _consume_retry(self, node: int, frame: _Frame, receiver: int,
                       cause: str) -> None:
        """One transmission round failed; retry at the receiver's next
        listen window or drop after the retry budget is exhausted."""
        mote = self.motes[node]
        frame.backoffs = 0
        frame.retries += 1
        self._log("retry", node, frame.packet_id, frame.slice_id,
                  mote.channel, f"{cause} n={frame.retries}")
        if frame.retries > self.config.max_retries:
            fate = FATE_COLLISION if cause == "collision" else FATE_RETRY
            self._finish_frame(node, frame, fate, cause)
            return
        self._push(
            self._contention_time(receiver, self.now + self.config.turnaround_s),
            _RANK_ATTEMPT, "attempt", (node, receiver),
        )

    # -- control-plane beacons ------------------------------------------------

    def _schedule_beacon(self, node: int, t: float) -> None:
        if self.config.beacon_interval_s > 0 and t <= self.duration:
            self._push(t, _RANK_GEN, "beacon", node)

    def _on_beacon(self, node: int) -> None:
        """Periodic broadcast control frame (route advertisement /
        keep-alive). Broadcasts are strobed without clear-channel
        assessment and are never retried, so their interference footprint
        grows directly with neighbourhood size."""
        mote = self.motes[node]
        jitter = self.rng.uniform(0.5, 1.5)
        self._schedule_beacon(
            node, self.now + self.config.beacon_interval_s * jitter
        )
        start = self.now + self.config.turnaround_s
        tx = _Transmission(
            node, None, start,
            start + self.config.airtime(self.config.beacon_payload_bytes),
            mote.channel, None, mote.slice_id,
        )
        self._mark_interference(tx)
        self.active.append(tx)
        self._push(tx.end, _RANK_TXEND, "txend", tx)

    # -- event handlers ------------------------------------------------------

    def _on_generate(self, node: int) -> None:
        mote = self.motes[node]
        packet_id = len(self.records) + 1
        record = PacketRecord(
            packet_id, node, mote.slice_id, generated_at=self.now
        )
        self.records.append(record)
        self._log("generate", node, packet_id, mote.slice_id,
                  mote.channel, "-")
        frame = _Frame(packet_id, node, mote.slice_id,
                       self.dest_of[node], record)
        if len(mote.queue) >= self.config.queue_limit:
            record.fate = FATE_QUEUE
            self._log("drop", node, packet_id, mote.slice_id,
                      mote.channel, "queue-full")
            return
        mote.queue.append(frame)
        self._start_service(node)

    def _on_attempt(self, node: int, receiver: int) -> None:
        mote = self.motes[node]
        if not mote.busy or not mote.queue:
            return
        frame = mote.queue[0]
        deadline = self._window_deadline(receiver, self.now)
        if self.now > deadline:
            self._consume_retry(node, frame, receiver, "window-missed")
            return
        blocker_end = self._busy_until(node, mote.channel)
        if blocker_end is not None:
            frame.backoffs += 1
            if frame.backoffs >= self.config.max_backoffs:
                self._consume_retry(node, frame, receiver, "busy")
                return
            # defer until the blocking frame ends, then re-sense after a
            # short random backoff; contenders re-cluster at idle onset
            delay = self.rng.randint(1, self.config.backoff_slots_max)
            self._push(
                blocker_end + delay * self.config.slot_s,
                _RANK_ATTEMPT, "attempt", (node, receiver),
            )
            return
        # clear channel: transmit after the turnaround blind window
        start = self.now + self.config.turnaround_s
        tx = _Transmission(
            node, receiver, start, start + self.airtime,
            mote.channel, frame, frame.slice_id,
        )
        self._mark_interference(tx)
        self.active.append(tx)
        self._log("tx_attempt", node, frame.packet_id, frame.slice_id,
                  mote.channel, f"to={receiver}")
        self._push(tx.end, _RANK_TXEND, "txend", tx)

    def _on_txend(self, tx: _Transmission) -> None:
        self.active.remove(tx)
        if tx.frame is None:
            return
        frame = tx.frame
        node = tx.sender
        mote = self.motes[node]
        if tx.corrupted:
            self._log("tx_end", node, frame.packet_id, frame.slice_id,
                      tx.channel, "collision")
            self._consume_retry(node, frame, tx.receiver, "collision")
            return
        self._log("tx_end", node, frame.packet_id, frame.slice_id,
                  tx.channel, "ok")
        self._log("rx", tx.receiver, frame.packet_id, frame.slice_id,
                  tx.channel, f"from={node}")
        frame.record.hops_traversed += 1
        receiver_mote = self.motes[tx.receiver]
        if tx.receiver == frame.dest:
            frame.record.fate = FATE_DELIVERED
            frame.record.delivered_at = self.now
            self._finish_frame(node, frame, FATE_DELIVERED, "-")
            return
        # relay hop: hand the frame over to the receiver's queue
        mote_done_frame = frame
        if len(receiver_mote.queue) >= self.config.queue_limit:
            frame.record.fate = FATE_QUEUE
            self._log("drop", tx.receiver, frame.packet_id, frame.slice_id,
                      receiver_mote.channel, "queue-full")
            # the sender is done with it either way
            receiver_has_it = False
        else:
            relay = _Frame(frame.packet_id, frame.origin, frame.slice_id,
                           frame.dest, frame.record)
            receiver_mote.queue.append(relay)
            receiver_has_it = True
        mote.queue.pop(0)
        mote.busy = False
        self._start_service(node)
        if receiver_has_it:
            self._start_service(tx.receiver)
        del mote_done_frame

    # -- run ------------------------------------------------------------------

    def prepare(self) -> None:
        if self._prepared:
            return
        self._prepared = True
        node_ids = sorted(self.dest_of)
        for t, node in generate_traffic(
            self.profile, node_ids, self.duration, self.seed
        ):
            self._push(t, _RANK_GEN, "gen", node)
        for node in node_ids:
            self._schedule_beacon(
                node, self.rng.uniform(0.0, self.config.beacon_interval_s)
            )

    @property
    def finished(self) -> bool:
        return self._prepared and (
            not self._heap or self._heap[0][0] > self.duration
        )

    def step(self, max_events: int = 1) -> int:
        """Process up to max_events events; returns how many ran."""
        self.prepare()
        processed = 0
        while processed < max_events and not self.finished:
            time, _rank, _seq, action, payload = heapq.heappop(self._heap)
            self.now = time
            if action == "gen":
                self._on_generate(payload)
            elif action == "beacon":
                self._on_beacon(payload)
            elif action == "attempt":
                self._on_attempt(*payload)
            else:
                self._on_txend(payload)
            processed += 1
        return processed

    def result(self) -> SimResult:
        return SimResult(
            report=compute_pdr(self.records),
            records=self.records,
            event_log=self.event_log,
            collisions=self.collisions,
            cross_slice_collisions=self.cross_slice_collisions,
        )

    def run(self) -> SimResult:
        self.prepare()
        while not self.finished:
            self.step(100_000)
        return self.result()


def run(
    graph: ConnectivityGraph,
    plan: SlicePlan,
    flow_tables: dict,
    profile: TrafficProfile,
    duration_min: float,
    seed: int,
    config: SimConfig = SimConfig(),
    route_resolver=None,
    keep_log: bool = True,
    sense_graph: ConnectivityGraph | None = None,
) -> SimResult:
    """Run one simulation; identical inputs and seed give an identical
    event log and report."""
    sim = Simulator(
        graph, plan, flow_tables, profile,
        duration_s=duration_min * 60.0,
        seed=seed, config=config,
        route_resolver=route_resolver, keep_log=keep_log,
        sense_graph=sense_graph,
    )
    return sim.run()
