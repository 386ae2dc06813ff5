"""Optical path planning over the tile grid and per-path loss budgets.

A route injects at its source tile, crosses one switch node per tile until
the destination tile, and is dropped there into the local receiver. The
source tile's node is a bypass in the launch direction; the destination's
drop is covered by the fixed loss allowance. Hence a route makes exactly
``manhattan_hops(src, dst)`` node interactions.

Routes are shortest (monotone) Manhattan paths. Light keeps one waveguide
index ``wg_index`` for its whole trip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

from .devices import Photodetector, dbm_to_mw
from .errors import (DegenerateRouteError, InfeasibleRouteError, RouteValidationError,
                     SizeGuardError)
from .topology import Axis, Coord, NodeId, PanelTopology, WgSegment, locate_eic, manhattan_hops
from .xbar import Direction, InteractionKind, SwitchLossModel, leakage, XbarNodeState

MAX_ENUMERATION_TILES = 400
DEFAULT_MAX_TURNS = 2
DEFAULT_FIXED_LOSS_DB = 3.0
# unit-interposer footprint, 62 mm (east-west) by 57 mm (north-south)
TILE_PITCH_CM = {Axis.HORIZONTAL: 6.2, Axis.VERTICAL: 5.7}


class Policy(str, Enum):
    MIN_LOSS = "min-loss"
    MIN_TURNS = "min-turns"


_STEP = {
    (-1, 0): Direction.NORTH,
    (1, 0): Direction.SOUTH,
    (0, 1): Direction.EAST,
    (0, -1): Direction.WEST,
}
_DELTA = {d: step for step, d in _STEP.items()}


def _heading(a: Coord, b: Coord) -> Direction:
    try:
        return _STEP[(b[0] - a[0], b[1] - a[1])]
    except KeyError:
        raise RouteValidationError(f"tiles {a} and {b} are not adjacent") from None


def _axis(d: Direction) -> Axis:
    return Axis.VERTICAL if d in (Direction.NORTH, Direction.SOUTH) else Axis.HORIZONTAL


class Interaction(NamedTuple):
    tile: Coord
    kind: InteractionKind
    in_dir: Direction
    out_dir: Direction


@dataclass(frozen=True)
class Route:
    src: str
    dst: str
    waypoints: tuple[Coord, ...]
    interactions: tuple[Interaction, ...]
    claimed_segments: frozenset[WgSegment]
    claimed_nodes: frozenset[NodeId]
    wg_index: int = 0

    @property
    def n_turns(self) -> int:
        return sum(1 for i in self.interactions if i.kind is InteractionKind.TURN)

    @property
    def n_bypass(self) -> int:
        return len(self.interactions) - self.n_turns

    @property
    def hops(self) -> int:
        return len(self.waypoints) - 1

    def node_at(self, tile: Coord) -> NodeId:
        return NodeId(tile[0], tile[1], self.wg_index)

    def on_waveguide(self, wg_index: int) -> "Route":
        return make_route(self.src, self.dst, self.waypoints, wg_index)


def make_route(src: str, dst: str, waypoints: Sequence[Coord], wg_index: int = 0) -> Route:
    """Derive interactions and claimed resources from a tile path."""
    tiles = tuple(tuple(t) for t in waypoints)
    if not tiles:
        raise RouteValidationError("route needs at least one tile")
    if wg_index < 0:
        raise RouteValidationError("wg_index must be >= 0")
    headings = [_heading(a, b) for a, b in zip(tiles, tiles[1:])]
    if len(set(tiles)) != len(tiles):
        raise RouteValidationError("route revisits a tile")
    interactions = []
    segments = set()
    for i, tile in enumerate(tiles[:-1]):
        out = headings[i]
        arriving = headings[i - 1] if i else out
        if out == arriving.opposite:
            raise RouteValidationError(f"U-turn at {tile}")
        kind = InteractionKind.BYPASS if out == arriving else InteractionKind.TURN
        interactions.append(Interaction(tile, kind, arriving.opposite, out))
        segments.add(WgSegment(tile[0], tile[1], _axis(out), wg_index))
        segments.add(WgSegment(tile[0], tile[1], _axis(arriving), wg_index))
    last = tiles[-1]
    last_axis = _axis(headings[-1]) if headings else Axis.HORIZONTAL
    segments.add(WgSegment(last[0], last[1], last_axis, wg_index))
    nodes = frozenset(NodeId(t[0], t[1], wg_index) for t in tiles[:-1])
    return Route(src, dst, tiles, tuple(interactions), frozenset(segments), nodes, wg_index)


def validate_route(panel: PanelTopology, route: Route, max_turns: int | None = None) -> None:
    """Raise :class:`RouteValidationError` unless ``route`` is well formed on ``panel``."""
    try:
        src = locate_eic(panel, route.src)
        dst = locate_eic(panel, route.dst)
    except KeyError as exc:
        raise RouteValidationError(str(exc)) from None
    if route.waypoints[0] != src.tile or route.waypoints[-1] != dst.tile:
        raise RouteValidationError("waypoints do not start/end at the EIC tiles")
    for t in route.waypoints:
        if not panel.usable(t):
            raise RouteValidationError(f"tile {t} is outside the panel or masked")
    if not 0 <= route.wg_index < panel.wg_per_bundle:
        raise RouteValidationError(f"wg_index {route.wg_index} outside bundle")
    if len(route.interactions) != manhattan_hops(src.tile, dst.tile):
        raise RouteValidationError("route is not a shortest Manhattan path")
    if max_turns is not None and route.n_turns > max_turns:
        raise RouteValidationError(f"{route.n_turns} turns exceeds limit {max_turns}")
    if make_route(route.src, route.dst, route.waypoints, route.wg_index) != route:
        raise RouteValidationError("claimed resources do not match the traversed path")


def _straight(a: Coord, b: Coord) -> list[Coord]:
    """Tiles from a to b inclusive along a shared row or column."""
    (r1, c1), (r2, c2) = a, b
    if r1 == r2:
        step = 1 if c2 >= c1 else -1
        return [(r1, c) for c in range(c1, c2 + step, step)]
    step = 1 if r2 >= r1 else -1
    return [(r, c1) for r in range(r1, r2 + step, step)]


def _chain(*corners: Coord) -> list[Coord]:
    path = [corners[0]]
    for a, b in zip(corners, corners[1:]):
        path.extend(_straight(a, b)[1:])
    return path


def candidate_paths(s: Coord, d: Coord) -> list[list[Coord]]:
    """Every shortest path with at most two turns, built from its corners."""
    (r1, c1), (r2, c2) = s, d
    if s == d:
        return [[s]]
    if r1 == r2 or c1 == c2:
        return [_straight(s, d)]
    paths = [_chain(s, (r1, c2), d), _chain(s, (r2, c1), d)]
    cstep = 1 if c2 > c1 else -1
    for c in range(c1 + cstep, c2, cstep):
        paths.append(_chain(s, (r1, c), (r2, c), d))
    rstep = 1 if r2 > r1 else -1
    for r in range(r1 + rstep, r2, rstep):
        paths.append(_chain(s, (r, c1), (r, c2), d))
    return paths


def _endpoints(panel: PanelTopology, src: str, dst: str) -> tuple[Coord, Coord]:
    a = locate_eic(panel, src)
    b = locate_eic(panel, dst)
    if src == dst:
        raise DegenerateRouteError(f"source and destination are both {src!r}")
    for site in (a, b):
        if site.tile in panel.masked:
            raise InfeasibleRouteError(f"{site.id} sits on masked tile {site.tile}")
    return a.tile, b.tile


@dataclass(frozen=True)
class LossBudget:
    n_bypass: int
    n_turn: int
    switch_loss_db: float
    propagation_loss_db: float
    fixed_loss_db: float
    total_loss_db: float
    required_carrier_dbm: float
    required_carrier_mw: float


def loss_budget(route: Route, loss_model: SwitchLossModel = SwitchLossModel(),
                fixed_loss_db: float = DEFAULT_FIXED_LOSS_DB,
                pd: Photodetector = Photodetector(), db_per_cm: float = 0.0) -> LossBudget:
    """Carrier power needed at the comb so the receiver sees its sensitivity."""
    n_turn = route.n_turns
    n_bypass = route.n_bypass
    switch = n_bypass * loss_model.thru_off_db + n_turn * loss_model.drop_on_db
    propagation = 0.0
    if db_per_cm:
        for a, b in zip(route.waypoints, route.waypoints[1:]):
            propagation += db_per_cm * TILE_PITCH_CM[_axis(_heading(a, b))]
    total = switch + propagation + fixed_loss_db
    required = pd.sensitivity_dbm + total
    return LossBudget(n_bypass, n_turn, switch, propagation, fixed_loss_db, total,
                      required, dbm_to_mw(required))


def _path_loss(path: Sequence[Coord], lm: SwitchLossModel) -> tuple[float, int]:
    r = make_route("", "", path)
    return r.n_bypass * lm.thru_off_db + r.n_turns * lm.drop_on_db, r.n_turns


def plan(panel: PanelTopology, src: str, dst: str, policy: Policy = Policy.MIN_LOSS, *,
         loss_model: SwitchLossModel = SwitchLossModel(), max_turns: int = DEFAULT_MAX_TURNS,
         turns: int | None = None, wg_index: int = 0) -> Route:
    """Choose a route between two EICs.

    ``MIN_LOSS`` minimizes switch loss then turn count; ``MIN_TURNS`` the
    reverse. Remaining ties go to the lexicographically smallest waypoint
    list. ``turns`` forces an exact turn count.
    """
    s, d = _endpoints(panel, src, dst)
    best = None
    for path in candidate_paths(s, d):
        if not all(panel.usable(t) for t in path):
            continue
        loss, n_turns = _path_loss(path, loss_model)
        if n_turns > max_turns or (turns is not None and n_turns != turns):
            continue
        if Policy(policy) is Policy.MIN_LOSS:
            key = (round(loss, 12), n_turns, path)
        else:
            key = (n_turns, round(loss, 12), path)
        if best is None or key < best:
            best = key
    if best is None:
        want = f"exactly {turns}" if turns is not None else f"at most {max_turns}"
        raise InfeasibleRouteError(f"no route {src} -> {dst} with {want} turns")
    return make_route(src, dst, best[-1], wg_index)


def enumerate_routes(panel: PanelTopology, src: str, dst: str,
                     max_turns: int = DEFAULT_MAX_TURNS) -> list[Route]:
    """All shortest routes with at most ``max_turns`` turns, by depth-first search."""
    if panel.rows * panel.cols > MAX_ENUMERATION_TILES:
        raise SizeGuardError(
            f"{panel.rows}x{panel.cols} panel exceeds {MAX_ENUMERATION_TILES} tiles")
    s, d = _endpoints(panel, src, dst)
    dr = (d[0] > s[0]) - (d[0] < s[0])
    dc = (d[1] > s[1]) - (d[1] < s[1])
    moves = [m for m in ((dr, 0), (0, dc)) if m != (0, 0)]
    found = []

    def walk(path, last_move, n_turns):
        here = path[-1]
        if here == d:
            found.append(list(path))
            return
        for m in moves:
            nxt = (here[0] + m[0], here[1] + m[1])
            if abs(d[0] - nxt[0]) > abs(d[0] - here[0]) or abs(d[1] - nxt[1]) > abs(d[1] - here[1]):
                continue
            if not panel.usable(nxt):
                continue
            t = n_turns + (last_move is not None and m != last_move)
            if t > max_turns:
                continue
            path.append(nxt)
            walk(path, m, t)
            path.pop()

    walk([s], None, 0)
    found.sort()
    return [make_route(src, dst, p) for p in found]


def crosstalk_floor(route: Route, other_active: Sequence[Route],
                    loss_model: SwitchLossModel = SwitchLossModel()) -> float:
    """Worst-case crosstalk at the receiver of ``route``, in dBc.

    Every node interaction of another route leaks residual power out of its
    unused ports. A leak counts when it enters a segment of ``route`` in the
    neighbouring tile on the same waveguide index. Leak power is referenced to
    the launch carrier less the switch loss the aggressor suffered upstream;
    the result is the power sum relative to the signal's switch loss.
    """
    mine = route.claimed_segments
    total = 0.0
    for other in other_active:
        upstream = 0.0
        for hop in other.interactions:
            state = XbarNodeState.for_path(hop.in_dir, hop.out_dir, other.node_at(hop.tile),
                                           loss_model)
            for out_dir, leak_db in leakage(state, hop.in_dir):
                dr, dc = _DELTA[out_dir]
                seg = WgSegment(hop.tile[0] + dr, hop.tile[1] + dc, _axis(out_dir), other.wg_index)
                if seg in mine:
                    total += 10 ** (-(upstream + leak_db) / 10)
            upstream += loss_model.drop_on_db if hop.kind is InteractionKind.TURN else loss_model.thru_off_db
    if total == 0.0:
        return -math.inf
    signal = route.n_bypass * loss_model.thru_off_db + route.n_turns * loss_model.drop_on_db
    return 10 * math.log10(total) + signal
