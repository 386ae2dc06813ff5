"""Per-timeslot admission control over waveguide segments and crossing nodes.

A :class:`SlotAllocation` is owned by one caller at a time. ``allocate`` and
``release`` mutate it in place and are all-or-nothing; the module-level
:func:`try_allocate` and :func:`release` work on a copy instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

from .errors import AllocationConflict, InvariantViolation, NotFoundError, RouteValidationError
from .routing import Route, validate_route
from .topology import NodeId, PanelTopology, WgSegment
from .xbar import NodeKind, SwitchLossModel, XbarNodeState, granularity, Granularity, resolve


class WdmPlan(NamedTuple):
    wg_index: tuple[int, ...]
    lambda_set: frozenset[int]


class Clash(NamedTuple):
    resource: WgSegment | NodeId
    holder: Route


class InterfaceState(str, Enum):
    ENABLED = "ENABLED"
    DISABLED = "DISABLED"


class InterfaceSetting(NamedTuple):
    eic_id: str
    interface: str  # "TX" or "RX"
    wg_index: int
    state: InterfaceState


@dataclass
class SlotAllocation:
    panel: PanelTopology
    slot: int = 0
    granted: list[tuple[Route, WdmPlan]] = field(default_factory=list)
    node_states: dict[NodeId, XbarNodeState] = field(default_factory=dict)
    loss_model: SwitchLossModel = SwitchLossModel()
    node_kind: NodeKind = NodeKind.RTR
    max_turns: int | None = None
    _segment_owner: dict[WgSegment, Route] = field(default_factory=dict, repr=False)
    _node_owner: dict[NodeId, Route] = field(default_factory=dict, repr=False)

    def copy(self) -> "SlotAllocation":
        return SlotAllocation(self.panel, self.slot, list(self.granted), dict(self.node_states),
                              self.loss_model, self.node_kind, self.max_turns,
                              dict(self._segment_owner), dict(self._node_owner))

    @property
    def routes(self) -> list[Route]:
        return [r for r, _ in self.granted]

    def clashes(self, route: Route) -> list[Clash]:
        found = [Clash(s, self._segment_owner[s]) for s in sorted(route.claimed_segments)
                 if s in self._segment_owner]
        found += [Clash(n, self._node_owner[n]) for n in sorted(route.claimed_nodes)
                  if n in self._node_owner]
        return found

    def allocate(self, route: Route) -> WdmPlan:
        """Grant ``route`` in place, or raise without touching any state."""
        validate_route(self.panel, route, self.max_turns)
        if granularity(self.node_kind) is not Granularity.PER_WAVEGUIDE:
            raise RouteValidationError("per-wavelength switching is not schedulable")
        clashes = self.clashes(route)
        if clashes:
            raise AllocationConflict(clashes)
        plan = WdmPlan((route.wg_index,) * max(route.hops, 1),
                       frozenset(range(self.panel.lambdas_per_wg)))
        for seg in route.claimed_segments:
            self._segment_owner[seg] = route
        for hop in route.interactions:
            node = route.node_at(hop.tile)
            self._node_owner[node] = route
            self.node_states[node] = XbarNodeState.for_path(hop.in_dir, hop.out_dir, node,
                                                            self.loss_model)
        self.granted.append((route, plan))
        return plan

    def free(self, route: Route) -> None:
        for i, (r, _) in enumerate(self.granted):
            if r == route:
                del self.granted[i]
                break
        else:
            raise NotFoundError(f"route {route.src}->{route.dst} is not granted")
        for seg in route.claimed_segments:
            del self._segment_owner[seg]
        for node in route.claimed_nodes:
            del self._node_owner[node]
            del self.node_states[node]

    def state_of(self, node: NodeId) -> XbarNodeState:
        """Node configuration; nodes no route holds rest with both resonators OFF."""
        return self.node_states.get(node) or XbarNodeState(node, False, False, self.loss_model)


def empty_allocation(panel: PanelTopology, slot: int = 0, **kwargs) -> SlotAllocation:
    return SlotAllocation(panel, slot, **kwargs)


def try_allocate(current: SlotAllocation, route: Route) -> SlotAllocation:
    """New allocation with ``route`` granted; raises :class:`AllocationConflict`
    listing every contested resource otherwise."""
    nxt = current.copy()
    nxt.allocate(route)
    return nxt


def release(allocation: SlotAllocation, route: Route) -> SlotAllocation:
    nxt = allocation.copy()
    nxt.free(route)
    return nxt


def validate_allocation(allocation: SlotAllocation) -> None:
    """Check disjointness and that node states carry every granted route end to end."""
    seen_segments: set[WgSegment] = set()
    seen_nodes: set[NodeId] = set()
    for route, _ in allocation.granted:
        if seen_segments & route.claimed_segments:
            raise InvariantViolation(f"segment shared by {route.src}->{route.dst}")
        if seen_nodes & route.claimed_nodes:
            raise InvariantViolation(f"node shared by {route.src}->{route.dst}")
        seen_segments |= route.claimed_segments
        seen_nodes |= route.claimed_nodes
        for hop in route.interactions:
            state = allocation.node_states.get(route.node_at(hop.tile))
            if state is None:
                raise InvariantViolation(f"no state for node at {hop.tile}")
            out = resolve(state, hop.in_dir)
            if out.out_dir != hop.out_dir or out.kind != hop.kind:
                raise InvariantViolation(f"node at {hop.tile} does not realize {hop}")
    if set(allocation._segment_owner) != seen_segments or set(allocation._node_owner) != seen_nodes:
        raise InvariantViolation("ownership index out of sync with granted routes")
    for node, state in allocation.node_states.items():
        state.check()
        if node not in seen_nodes and (state.resonator_a_on or state.resonator_b_on):
            raise InvariantViolation(f"unowned node {node} left ON")


def interface_discipline(allocation: SlotAllocation,
                         panel: PanelTopology | None = None) -> list[InterfaceSetting]:
    """Interface enables implied by the granted routes.

    On each granted waveguide only the source transmitter and destination
    receiver stay on; every other EIC on a traversed tile has both its
    interfaces to that waveguide switched off.
    """
    panel = panel or allocation.panel
    settings: dict[tuple[str, str, int], InterfaceState] = {}
    for route, _ in allocation.granted:
        w = route.wg_index
        for tile in route.waypoints:
            for site in panel.eics_on(tile):
                for iface in ("TX", "RX"):
                    settings.setdefault((site.id, iface, w), InterfaceState.DISABLED)
        settings[(route.src, "TX", w)] = InterfaceState.ENABLED
        settings[(route.dst, "RX", w)] = InterfaceState.ENABLED
    return [InterfaceSetting(e, i, w, s) for (e, i, w), s in sorted(settings.items())]


def _conflicts(a: Route, b: Route) -> bool:
    return bool(a.claimed_segments & b.claimed_segments or a.claimed_nodes & b.claimed_nodes)


EXACT_LIMIT = 20


def max_concurrent(panel: PanelTopology, route_set: Sequence[Route],
                   exact: bool | None = None) -> tuple[int, SlotAllocation]:
    """Largest set of mutually disjoint routes and an allocation granting it.

    Exact branch-and-bound for up to ``EXACT_LIMIT`` routes, otherwise a
    greedy pass preferring routes that claim the fewest resources.
    """
    routes = list(route_set)
    if exact is None:
        exact = len(routes) <= EXACT_LIMIT
    if exact:
        chosen = _exact_independent(routes)
    else:
        chosen = _greedy_independent(routes)
    alloc = empty_allocation(panel)
    for i in chosen:
        alloc.allocate(routes[i])
    return len(chosen), alloc


def _exact_independent(routes: list[Route]) -> list[int]:
    n = len(routes)
    if n > EXACT_LIMIT:
        raise ValueError(f"exact mode limited to {EXACT_LIMIT} routes")
    clash_mask = [0] * n
    for i, j in itertools.combinations(range(n), 2):
        if _conflicts(routes[i], routes[j]):
            clash_mask[i] |= 1 << j
            clash_mask[j] |= 1 << i
    best: list[int] = []

    def search(i: int, picked: list[int], banned: int):
        nonlocal best
        if len(picked) + (n - i) <= len(best):
            return
        if i == n:
            best = list(picked)
            return
        if not banned >> i & 1:
            picked.append(i)
            search(i + 1, picked, banned | clash_mask[i])
            picked.pop()
        search(i + 1, picked, banned)

    search(0, [], 0)
    return best


def _greedy_independent(routes: list[Route]) -> list[int]:
    order = sorted(range(len(routes)),
                   key=lambda i: (len(routes[i].claimed_segments) + len(routes[i].claimed_nodes), i))
    picked: list[int] = []
    for i in order:
        if all(not _conflicts(routes[i], routes[j]) for j in picked):
            picked.append(i)
    return sorted(picked)


def grant_all(allocation: SlotAllocation, routes: Iterable[Route]) -> tuple[list[Route], list[tuple[Route, list[Clash]]]]:
    """Offer routes in order; returns (granted, denied-with-clashes)."""
    granted, denied = [], []
    for r in routes:
        try:
            allocation.allocate(r)
        except AllocationConflict as exc:
            denied.append((r, exc.clashes))
        else:
            granted.append(r)
    return granted, denied
