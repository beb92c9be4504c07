"""Network density control: slice plans, graph partitioning, channel
assignment and adjacency-based RAG density classification.

A slice plan assigns every sensor node to exactly one slice.  In physical
mode each slice additionally owns a distinct radio channel in the 2.4 GHz
band (channels 11..26, 16 total).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .topology import ConnectivityGraph

MODE_NON_SLICED = "non-sliced"
MODE_LOGICAL = "logical"
MODE_PHYSICAL = "physical"
MODES = (MODE_NON_SLICED, MODE_LOGICAL, MODE_PHYSICAL)

CHANNEL_MIN = 11
CHANNEL_MAX = 26
MAX_PHYSICAL_SLICES = CHANNEL_MAX - CHANNEL_MIN + 1

#: Shared data channel used when the plan does not isolate slices physically.
DEFAULT_SHARED_CHANNEL = 26

TIER_GREEN = "green"
TIER_YELLOW = "yellow"
TIER_AMBER = "amber"
TIER_RED = "red"
TIER_ORDER = (TIER_GREEN, TIER_YELLOW, TIER_AMBER, TIER_RED)

# Percentile-rank thresholds for the RAG tiers (ties take the lowest rank).
YELLOW_AT = 0.40
AMBER_AT = 0.70
RED_AT = 0.90


class PlanValidationError(ValueError):
    """A slice plan violates a structural invariant."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


@dataclass(frozen=True)
class SliceSpec:
    slice_id: str
    members: frozenset[int]
    border_router: int
    channel: int | None = None

    def with_members(self, members: frozenset[int]) -> "SliceSpec":
        return replace(self, members=members)


@dataclass(frozen=True)
class SlicePlan:
    mode: str
    slices: tuple[SliceSpec, ...]
    default_slice_id: str

    def slice_by_id(self, slice_id: str) -> SliceSpec:
        for s in self.slices:
            if s.slice_id == slice_id:
                return s
        raise KeyError(f"unknown slice {slice_id!r}")

    def slice_of(self, node_id: int) -> SliceSpec:
        for s in self.slices:
            if node_id in s.members:
                return s
        raise KeyError(f"node {node_id} is not in any slice")

    def channel_of(self, slice_id: str) -> int:
        if self.mode != MODE_PHYSICAL:
            return DEFAULT_SHARED_CHANNEL
        channel = self.slice_by_id(slice_id).channel
        if channel is None:
            raise PlanValidationError(
                "channel-missing", f"slice {slice_id} has no channel"
            )
        return channel


@dataclass(frozen=True)
class DensityClass:
    tier: str
    adjacency_percentile: float


@dataclass(frozen=True)
class PlanDelta:
    """Atomic reconfiguration request against a slice plan."""

    moves: tuple[tuple[int, str], ...] = ()        # (node id, new slice id)
    channel_changes: tuple[tuple[str, int], ...] = ()  # (slice id, channel)


def validate_plan(plan: SlicePlan, all_sensors: set[int]) -> None:
    """Check every structural invariant; raise PlanValidationError on the
    first violation."""
    if plan.mode not in MODES:
        raise PlanValidationError("bad-mode", repr(plan.mode))
    if not plan.slices:
        raise PlanValidationError("no-slices", "plan defines no slices")
    ids = [s.slice_id for s in plan.slices]
    if len(ids) != len(set(ids)):
        raise PlanValidationError("duplicate-slice-id", repr(ids))
    if plan.default_slice_id not in ids:
        raise PlanValidationError(
            "bad-default-slice", repr(plan.default_slice_id)
        )
    seen: dict[int, str] = {}
    for s in plan.slices:
        for node in s.members:
            if node in seen:
                raise PlanValidationError(
                    "node-in-two-slices",
                    f"node {node} in slices {seen[node]!r} and {s.slice_id!r}",
                )
            seen[node] = s.slice_id
    for s in plan.slices:
        if s.border_router in all_sensors:
            raise PlanValidationError(
                "router-is-sensor",
                f"slice {s.slice_id} border router {s.border_router}"
                " is a sensor node",
            )
    covered = set(seen)
    if covered != all_sensors:
        missing = sorted(all_sensors - covered)
        extra = sorted(covered - all_sensors)
        raise PlanValidationError(
            "coverage", f"missing={missing} unknown={extra}"
        )
    if plan.mode == MODE_NON_SLICED and len(plan.slices) != 1:
        raise PlanValidationError(
            "non-sliced-multi", f"{len(plan.slices)} slices in non-sliced mode"
        )
    if plan.mode == MODE_PHYSICAL:
        if len(plan.slices) > MAX_PHYSICAL_SLICES:
            raise PlanValidationError(
                "slice-capacity",
                f"{len(plan.slices)} slices > {MAX_PHYSICAL_SLICES}",
            )
        channels = [s.channel for s in plan.slices]
        if any(c is None for c in channels):
            raise PlanValidationError(
                "channel-missing", "physical mode requires a channel per slice"
            )
        for c in channels:
            if not CHANNEL_MIN <= c <= CHANNEL_MAX:
                raise PlanValidationError(
                    "channel-range",
                    f"channel {c} outside [{CHANNEL_MIN}, {CHANNEL_MAX}]",
                )
        if len(channels) != len(set(channels)):
            raise PlanValidationError("channel-conflict", repr(channels))
    else:
        for s in plan.slices:
            if s.channel is not None:
                raise PlanValidationError(
                    "channel-in-non-physical",
                    f"slice {s.slice_id} carries channel {s.channel}"
                    f" in {plan.mode} mode",
                )


def normalize_plan(plan: SlicePlan, all_sensors: set[int]) -> SlicePlan:
    """Move sensors not explicitly assigned anywhere into the default slice,
    then validate.  Idempotent."""
    assigned: dict[int, str] = {}
    for s in plan.slices:
        for node in s.members:
            if node in assigned:
                raise PlanValidationError(
                    "node-in-two-slices",
                    f"node {node} in slices {assigned[node]!r}"
                    f" and {s.slice_id!r}",
                )
            assigned[node] = s.slice_id
    unassigned = all_sensors - set(assigned)
    slices = []
    for s in plan.slices:
        members = s.members & all_sensors
        if s.slice_id == plan.default_slice_id:
            members = members | unassigned
        slices.append(s.with_members(frozenset(members)))
    normalized = replace(plan, slices=tuple(slices))
    validate_plan(normalized, all_sensors)
    return normalized


def partition(
    g: ConnectivityGraph, plan: SlicePlan
) -> dict[str, ConnectivityGraph]:
    """Induced sub-graph per slice over its members plus its border router."""
    return {
        s.slice_id: g.induced(set(s.members) | {s.border_router})
        for s in plan.slices
    }


def assign_channels(
    plan: SlicePlan, requested: dict[str, int] | None = None
) -> SlicePlan:
    """Give every slice a distinct channel in [11, 26].

    Explicit requests are honored; the rest are filled from the lowest free
    channel upward.
    """
    if plan.mode != MODE_PHYSICAL:
        raise PlanValidationError(
            "bad-mode", f"channel assignment requires physical mode,"
            f" plan is {plan.mode}"
        )
    if len(plan.slices) > MAX_PHYSICAL_SLICES:
        raise PlanValidationError(
            "slice-capacity",
            f"{len(plan.slices)} slices > {MAX_PHYSICAL_SLICES}",
        )
    requested = dict(requested or {})
    for slice_id, channel in requested.items():
        plan.slice_by_id(slice_id)  # raises KeyError on unknown slice
        if not CHANNEL_MIN <= channel <= CHANNEL_MAX:
            raise PlanValidationError(
                "channel-range",
                f"channel {channel} outside [{CHANNEL_MIN}, {CHANNEL_MAX}]",
            )
    if len(set(requested.values())) != len(requested):
        raise PlanValidationError("channel-conflict", repr(requested))

    taken = set(requested.values())
    free = (c for c in range(CHANNEL_MIN, CHANNEL_MAX + 1) if c not in taken)
    slices = []
    for s in plan.slices:
        channel = requested.get(s.slice_id)
        if channel is None:
            channel = next(free)
        slices.append(replace(s, channel=channel))
    return replace(plan, slices=tuple(slices))


def classify_density(
    g: ConnectivityGraph, exclude: set[int] | None = None
) -> dict[int, DensityClass]:
    """RAG-classify nodes by the percentile rank of their degree.

    Ties take the lowest rank, so a uniform-degree graph is all green.
    `exclude` removes infrastructure nodes (border routers) from the ranking.
    """
    exclude = exclude or set()
    ranked = sorted(g.nodes - exclude)
    if not ranked:
        return {}
    degrees = {n: g.degree(n) for n in ranked}
    values = sorted(degrees.values())
    total = len(values)
    result = {}
    for n in ranked:
        below = _count_less_than(values, degrees[n])
        percentile = below / total
        result[n] = DensityClass(_tier_for(percentile), percentile)
    return result


def _count_less_than(sorted_values: list[int], value: int) -> int:
    import bisect

    return bisect.bisect_left(sorted_values, value)


def _tier_for(percentile: float) -> str:
    if percentile >= RED_AT:
        return TIER_RED
    if percentile >= AMBER_AT:
        return TIER_AMBER
    if percentile >= YELLOW_AT:
        return TIER_YELLOW
    return TIER_GREEN


def apply_reconfiguration(
    plan: SlicePlan, delta: PlanDelta, all_sensors: set[int]
) -> SlicePlan:
    """Apply a membership/channel delta atomically.

    Any invariant violation raises and leaves the input plan untouched
    (plans are immutable, so atomicity is structural).
    """
    members = {s.slice_id: set(s.members) for s in plan.slices}
    for node, target in delta.moves:
        if target not in members:
            raise PlanValidationError("unknown-slice", repr(target))
        if node not in all_sensors:
            raise PlanValidationError("unknown-node", repr(node))
        for slice_id in members:
            members[slice_id].discard(node)
        members[target].add(node)
    channels = {s.slice_id: s.channel for s in plan.slices}
    for slice_id, channel in delta.channel_changes:
        if slice_id not in channels:
            raise PlanValidationError("unknown-slice", repr(slice_id))
        channels[slice_id] = channel
    slices = tuple(
        replace(
            s,
            members=frozenset(members[s.slice_id]),
            channel=channels[s.slice_id],
        )
        for s in plan.slices
    )
    new_plan = replace(plan, slices=slices)
    return normalize_plan(new_plan, all_sensors)


# --- northbound JSON wire format -------------------------------------------

def plan_to_json(plan: SlicePlan) -> dict:
    return {
        "mode": plan.mode,
        "default_slice": plan.default_slice_id,
        "slices": [
            {
                "id": s.slice_id,
                "members": sorted(s.members),
                "channel": s.channel,
                "border_router": s.border_router,
            }
            for s in plan.slices
        ],
    }


def plan_from_json(data: dict) -> SlicePlan:
    try:
        slices = tuple(
            SliceSpec(
                slice_id=str(s["id"]),
                members=frozenset(int(m) for m in s["members"]),
                border_router=int(s["border_router"]),
                channel=None if s.get("channel") is None else int(s["channel"]),
            )
            for s in data["slices"]
        )
        return SlicePlan(
            mode=str(data["mode"]),
            slices=slices,
            default_slice_id=str(data["default_slice"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise PlanValidationError("malformed-plan", str(exc)) from exc
