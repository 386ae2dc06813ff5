"""Slotted, time-multiplexed traffic simulation on the photonic fabric.

Each slot: finished transfers release their routes, new arrivals join the
queue, queued requests are offered to the allocator, and every active
transfer moves up to one waveguide's worth of bits. A granted transfer holds
its route for ``ceil(size / capacity)`` slots plus ``reconfig_slots``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import Any, Callable, Mapping, NamedTuple, Sequence

import numpy as np

from .allocator import SlotAllocation, validate_allocation
from .devices import Photodetector
from .errors import AllocationConflict, InfeasibleRouteError, InvariantViolation
from .routing import DEFAULT_FIXED_LOSS_DB, Policy, Route, loss_budget, plan
from .topology import EicKind, PanelTopology, build_panel
from .xbar import SwitchLossModel


class Request(NamedTuple):
    arrival_slot: int
    src: str
    dst: str
    size_bits: int


@dataclass(frozen=True)
class WorkloadParams:
    rate: float = 0.5
    nearby_fraction: float = 0.5
    xpu_duty: float = 0.7
    mean_size_bits: float = 2.0e6
    slots: int = 1000

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("rate must be >= 0")
        if not 0 <= self.nearby_fraction <= 1:
            raise ValueError("nearby_fraction must lie in [0, 1]")
        if not 0.5 <= self.xpu_duty <= 0.9:
            raise ValueError("xpu_duty must lie in [0.5, 0.9]")
        if self.mean_size_bits <= 0 or self.slots < 0:
            raise ValueError("mean_size_bits must be positive and slots >= 0")


@dataclass(frozen=True)
class Workload:
    requests: tuple[Request, ...]
    params: WorkloadParams
    seed: int

    @property
    def offered_bits(self) -> int:
        return sum(r.size_bits for r in self.requests)


def generate(panel: PanelTopology, params: WorkloadParams, seed: int) -> Workload:
    """Poisson arrivals of XPU-centred transfers.

    Every request involves one XPU and a partner EIC: with probability
    ``nearby_fraction`` an HBM stack on the same tile, otherwise any XPU or
    HBM stack on another tile. Direction (read or write) is a fair coin. Mean
    transfer size scales with ``xpu_duty``: a busier XPU moves more data.
    """
    rng = np.random.default_rng(seed)
    live = [e for e in panel.eics() if e.tile not in panel.masked]
    xpus = [e for e in live if e.kind is EicKind.XPU]
    near_pool = {x.tile: [e for e in live if e.tile == x.tile and e.kind is EicKind.HBM_STACK]
                 for x in xpus}
    far_pool = {x.tile: [e for e in live if e.tile != x.tile
                         and e.kind in (EicKind.XPU, EicKind.HBM_STACK)] for x in xpus}
    requests = []
    if params.rate == 0 or not xpus:
        return Workload((), params, seed)
    scale = params.mean_size_bits * params.xpu_duty
    for slot in range(params.slots):
        for _ in range(rng.poisson(params.rate)):
            xpu = xpus[rng.integers(len(xpus))]
            near = rng.random() < params.nearby_fraction
            size = max(1, int(round(rng.exponential(1.0) * scale)))
            outbound = rng.random() < 0.5
            pool = near_pool[xpu.tile] if near else far_pool[xpu.tile]
            pool = pool or near_pool[xpu.tile] or far_pool[xpu.tile]
            if not pool:
                continue
            peer = pool[rng.integers(len(pool))]
            src, dst = (xpu.id, peer.id) if outbound else (peer.id, xpu.id)
            requests.append(Request(slot, src, dst, size))
    return Workload(tuple(requests), params, seed)


class QueueOrder(str, Enum):
    FIFO = "fifo"
    RANDOM_ORDER = "random"


class BlockedMode(str, Enum):
    QUEUE = "queue"
    DROP = "drop"


@dataclass(frozen=True)
class SimPolicy:
    route_policy: Policy = Policy.MIN_LOSS
    queue_order: QueueOrder = QueueOrder.FIFO
    blocked: BlockedMode = BlockedMode.QUEUE
    rate_gbps: float = 32.0
    slot_seconds: float = 1e-6
    reconfig_slots: int = 0
    max_turns: int = 2
    fixed_loss_db: float = DEFAULT_FIXED_LOSS_DB
    loss_model: SwitchLossModel = SwitchLossModel()
    photodetector: Photodetector = Photodetector()
    power_per_carrier_w: float = 0.5e-3

    def capacity_bits(self, panel: PanelTopology) -> int:
        """Bits one waveguide moves per slot (all carriers)."""
        return int(panel.lambdas_per_wg * self.rate_gbps * 1e9 * self.slot_seconds)


@dataclass(frozen=True)
class SimReport:
    slots_run: int = 0
    requests: int = 0
    offered_bits: int = 0
    delivered_bits: int = 0
    in_flight_bits: int = 0
    dropped_bits: int = 0
    blocking_probability: float = 0.0
    mean_wait_slots: float = 0.0
    mean_path_loss_db: float = 0.0
    peak_concurrent_routes: int = 0
    peak_wg_rate_tbps: float = 0.0
    carrier_power_w_slots: float = 0.0
    reconfig_slots: int = 0


class SlotRecord(NamedTuple):
    slot: int
    granted: tuple[dict, ...]
    denied: tuple[dict, ...]
    offered_bits: int
    delivered_bits: int
    in_flight_bits: int
    dropped_bits: int
    active_routes: int


@dataclass
class _Transfer:
    request: Request
    route: Route
    remaining: int
    setup: int
    loss_db: float


@dataclass
class _Queued:
    request: Request
    attempted: bool = False


def run(panel: PanelTopology, workload: Workload, policy: SimPolicy = SimPolicy(), *,
        slots: int | None = None, seed: int | None = None, check: bool = False,
        on_slot: Callable[[SlotRecord, SlotAllocation], None] | None = None) -> SimReport:
    """Simulate ``slots`` slots (default: the workload horizon).

    ``seed`` drives only the RANDOM_ORDER queue shuffle. With ``check`` the
    allocation and bit conservation are verified after every slot. ``on_slot``
    receives one :class:`SlotRecord` per slot.
    """
    horizon = workload.params.slots if slots is None else slots
    rng = np.random.default_rng(workload.seed if seed is None else seed)
    capacity = policy.capacity_bits(panel)
    if capacity < 1:
        raise ValueError("slot too short to carry a single bit")
    alloc = SlotAllocation(panel, loss_model=policy.loss_model, max_turns=policy.max_turns)
    arrivals = sorted(workload.requests, key=lambda r: r.arrival_slot)
    next_arrival = 0
    queue: list[_Queued] = []
    active: list[_Transfer] = []
    route_cache: dict[tuple[str, str], Route | None] = {}

    offered = delivered = dropped = 0
    arrived = attempted = blocked = 0
    waits: list[int] = []
    losses: list[float] = []
    peak_routes = 0
    peak_rate = 0.0
    carrier_w_slots = 0.0

    def route_for(req: Request) -> Route | None:
        key = (req.src, req.dst)
        if key not in route_cache:
            try:
                route_cache[key] = plan(panel, req.src, req.dst, policy.route_policy,
                                        loss_model=policy.loss_model, max_turns=policy.max_turns)
            except InfeasibleRouteError:
                route_cache[key] = None
        return route_cache[key]

    def try_grant(req: Request) -> _Transfer | None:
        # first-fit over waveguide indices of the planned tile path
        base = route_for(req)
        if base is None:
            return None
        for w in range(panel.wg_per_bundle):
            route = base if w == base.wg_index else base.on_waveguide(w)
            try:
                alloc.allocate(route)
            except AllocationConflict:
                continue
            budget = loss_budget(route, policy.loss_model, policy.fixed_loss_db,
                                 policy.photodetector)
            return _Transfer(req, route, req.size_bits, policy.reconfig_slots,
                             budget.total_loss_db)
        return None

    for slot in range(horizon):
        alloc.slot = slot
        for tr in [t for t in active if t.remaining == 0]:
            alloc.free(tr.route)
            active.remove(tr)

        while next_arrival < len(arrivals) and arrivals[next_arrival].arrival_slot <= slot:
            req = arrivals[next_arrival]
            next_arrival += 1
            offered += req.size_bits
            arrived += 1
            queue.append(_Queued(req))

        order = list(range(len(queue)))
        if policy.queue_order is QueueOrder.RANDOM_ORDER:
            rng.shuffle(order)
        granted_rec, denied_rec = [], []
        gone: set[int] = set()
        for idx in order:
            entry = queue[idx]
            req = entry.request
            tr = try_grant(req)
            first = not entry.attempted
            entry.attempted = True
            if first:
                attempted += 1
            if tr is not None:
                active.append(tr)
                gone.add(idx)
                waits.append(slot - req.arrival_slot)
                losses.append(tr.loss_db)
                granted_rec.append({"src": req.src, "dst": req.dst, "turns": tr.route.n_turns,
                                    "wg_index": tr.route.wg_index, "loss_db": tr.loss_db})
                continue
            if first:
                blocked += 1
            denied_rec.append({"src": req.src, "dst": req.dst})
            if policy.blocked is BlockedMode.DROP:
                dropped += req.size_bits
                gone.add(idx)
            elif policy.queue_order is QueueOrder.FIFO:
                break  # head-of-line blocking
        queue = [q for i, q in enumerate(queue) if i not in gone]

        slot_rate = 0.0
        for tr in active:
            if tr.setup > 0:
                tr.setup -= 1
                continue
            moved = min(capacity, tr.remaining)
            tr.remaining -= moved
            delivered += moved
            slot_rate = max(slot_rate, moved / policy.slot_seconds / 1e12)
        peak_rate = max(peak_rate, slot_rate)
        peak_routes = max(peak_routes, len(active))
        carrier_w_slots += len(active) * panel.lambdas_per_wg * policy.power_per_carrier_w

        in_flight = (sum(t.remaining for t in active)
                     + sum(q.request.size_bits for q in queue))
        if check:
            validate_allocation(alloc)
            if delivered + in_flight + dropped != offered:
                raise InvariantViolation(f"slot {slot}: bit conservation broken")
        if on_slot is not None:
            on_slot(SlotRecord(slot, tuple(granted_rec), tuple(denied_rec), offered, delivered,
                               in_flight, dropped, len(active)), alloc)

    in_flight = sum(t.remaining for t in active) + sum(q.request.size_bits for q in queue)
    return SimReport(
        slots_run=horizon,
        requests=arrived,
        offered_bits=offered,
        delivered_bits=delivered,
        in_flight_bits=in_flight,
        dropped_bits=dropped,
        blocking_probability=blocked / attempted if attempted else 0.0,
        mean_wait_slots=float(np.mean(waits)) if waits else 0.0,
        mean_path_loss_db=float(np.mean(losses)) if losses else 0.0,
        peak_concurrent_routes=peak_routes,
        peak_wg_rate_tbps=peak_rate,
        carrier_power_w_slots=carrier_w_slots,
        reconfig_slots=policy.reconfig_slots,
    )


_PANEL_KEYS = {"rows", "cols", "wg_per_bundle", "lambdas_per_wg"}
_WORKLOAD_KEYS = {f.name for f in fields(WorkloadParams)}
_POLICY_KEYS = {f.name for f in fields(SimPolicy)}


def sweep(panel: PanelTopology, param_grid: Sequence[Mapping[str, Any]],
          base_params: WorkloadParams = WorkloadParams(), policy: SimPolicy = SimPolicy(), *,
          seed: int = 0, paired: bool = False) -> list[tuple[dict, SimReport]]:
    """One simulation per grid point, in grid order.

    Grid keys may name panel dimensions, :class:`WorkloadParams` fields or
    :class:`SimPolicy` fields. Each point draws its own seed from ``seed``;
    ``paired=True`` gives every point the same seed instead, so points differ
    only in the swept parameters.
    """
    if not param_grid:
        raise ValueError("parameter grid is empty")
    children = np.random.SeedSequence(seed).spawn(len(param_grid))
    rows = []
    for point, child in zip(param_grid, children):
        unknown = set(point) - _PANEL_KEYS - _WORKLOAD_KEYS - _POLICY_KEYS
        if unknown:
            raise KeyError(f"unknown sweep parameter(s): {sorted(unknown)}")
        panel_kw = {k: point[k] for k in _PANEL_KEYS & set(point)}
        p = panel
        if panel_kw:
            dims = {"rows": panel.rows, "cols": panel.cols, "wg_per_bundle": panel.wg_per_bundle,
                    "lambdas_per_wg": panel.lambdas_per_wg, **panel_kw}
            p = build_panel(dims.pop("rows"), dims.pop("cols"), panel.template,
                            masked=panel.masked, **dims)
        params = replace(base_params, **{k: point[k] for k in _WORKLOAD_KEYS & set(point)})
        pol = replace(policy, **{k: point[k] for k in _POLICY_KEYS & set(point)})
        point_seed = seed if paired else int(child.generate_state(1)[0])
        workload = generate(p, params, point_seed)
        rows.append((dict(point), run(p, workload, pol)))
    return rows
