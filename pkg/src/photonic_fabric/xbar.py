"""Crossing-node switch built from two add-drop resonators.

A direction names the side of the node a signal enters or leaves through, so
light entering from WEST and passing straight leaves through EAST.

Resonator A sits at the southwestern corner of the node and resonator B at
the northwestern corner. Each one realizes the four straight-through paths
plus four of the eight 90-degree turns; together they cover all twelve
ordered (in, out) pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Hashable, NamedTuple

from .errors import InvalidStateError, UnreachablePathError


class Direction(str, Enum):
    NORTH = "N"
    SOUTH = "S"
    EAST = "E"
    WEST = "W"

    @property
    def opposite(self) -> "Direction":
        return _OPPOSITE[self]

    def rotate_cw(self, quarter_turns: int = 1) -> "Direction":
        order = [Direction.NORTH, Direction.EAST, Direction.SOUTH, Direction.WEST]
        return order[(order.index(self) + quarter_turns) % 4]


_OPPOSITE = {
    Direction.NORTH: Direction.SOUTH,
    Direction.SOUTH: Direction.NORTH,
    Direction.EAST: Direction.WEST,
    Direction.WEST: Direction.EAST,
}


class Placement(str, Enum):
    A_SOUTHWEST = "A"
    B_NORTHWEST = "B"


class InteractionKind(str, Enum):
    BYPASS = "BYPASS"
    TURN = "TURN"


class NodeKind(str, Enum):
    MRR = "MRR"
    RTR = "RTR"


class Granularity(str, Enum):
    PER_WAVELENGTH = "PER_WAVELENGTH"
    PER_WAVEGUIDE = "PER_WAVEGUIDE"


class PathId(NamedTuple):
    in_dir: Direction
    out_dir: Direction


N, S, E, W = Direction.NORTH, Direction.SOUTH, Direction.EAST, Direction.WEST

STRAIGHT_PATHS = frozenset(PathId(d, d.opposite) for d in Direction)
_TURNS = {
    Placement.A_SOUTHWEST: frozenset({PathId(W, N), PathId(N, W), PathId(E, S), PathId(S, E)}),
    Placement.B_NORTHWEST: frozenset({PathId(W, S), PathId(S, W), PathId(E, N), PathId(N, E)}),
}

# Numbering used only for display; A covers #1-#8, B covers #2,4,6,8,9-12.
PATH_NUMBERS = {
    PathId(W, N): 1, PathId(W, E): 2, PathId(N, W): 3, PathId(N, S): 4,
    PathId(E, S): 5, PathId(E, W): 6, PathId(S, E): 7, PathId(S, N): 8,
    PathId(W, S): 9, PathId(S, W): 10, PathId(E, N): 11, PathId(N, E): 12,
}


def all_paths() -> frozenset[PathId]:
    return frozenset(PathId(i, o) for i in Direction for o in Direction if i != o)


def coverage_set(placement: Placement) -> frozenset[PathId]:
    return STRAIGHT_PATHS | _TURNS[Placement(placement)]


def turn_target(placement: Placement, in_dir: Direction) -> Direction:
    """Exit side when ``placement`` is ON and light enters from ``in_dir``."""
    for p in _TURNS[placement]:
        if p.in_dir == in_dir:
            return p.out_dir
    raise UnreachablePathError(f"resonator {placement.value} cannot turn light from {in_dir.name}")


def placement_for_turn(in_dir: Direction, out_dir: Direction) -> Placement:
    path = PathId(in_dir, out_dir)
    for placement, turns in _TURNS.items():
        if path in turns:
            return placement
    raise UnreachablePathError(f"{in_dir.name}->{out_dir.name} is not a 90-degree turn")


@dataclass(frozen=True)
class SwitchLossModel:
    """Per-interaction loss levels in dB (positive numbers mean attenuation)."""

    drop_on_db: float = 0.5
    thru_off_db: float = 0.25
    thru_on_isolation_db: float = 24.0
    drop_off_isolation_db: float = 15.0

    def __post_init__(self):
        for name in ("drop_on_db", "thru_off_db", "thru_on_isolation_db", "drop_off_isolation_db"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0")
        if self.thru_on_isolation_db < self.thru_off_db:
            raise ValueError("thru_on_isolation_db must be >= thru_off_db")
        if self.drop_off_isolation_db < self.drop_on_db:
            raise ValueError("drop_off_isolation_db must be >= drop_on_db")


@dataclass(frozen=True)
class XbarNodeState:
    node_id: Hashable = None
    resonator_a_on: bool = False
    resonator_b_on: bool = False
    loss_model: SwitchLossModel = SwitchLossModel()

    @classmethod
    def for_path(cls, in_dir: Direction, out_dir: Direction, node_id: Hashable = None,
                 loss_model: SwitchLossModel = SwitchLossModel()) -> "XbarNodeState":
        """The node configuration that routes ``in_dir`` to ``out_dir``."""
        if in_dir == out_dir:
            raise UnreachablePathError("a node cannot send light back where it came from")
        if out_dir == in_dir.opposite:
            return cls(node_id, False, False, loss_model)
        placement = placement_for_turn(in_dir, out_dir)
        return cls(node_id, placement is Placement.A_SOUTHWEST,
                   placement is Placement.B_NORTHWEST, loss_model)

    @property
    def on_placement(self) -> Placement | None:
        self.check()
        if self.resonator_a_on:
            return Placement.A_SOUTHWEST
        if self.resonator_b_on:
            return Placement.B_NORTHWEST
        return None

    def check(self) -> None:
        if self.resonator_a_on and self.resonator_b_on:
            raise InvalidStateError(f"node {self.node_id}: both resonators ON")


class Resolution(NamedTuple):
    out_dir: Direction
    loss_db: float
    kind: InteractionKind


def resolve(state: XbarNodeState, in_dir: Direction,
            out_dir: Direction | None = None) -> Resolution:
    """Where light entering from ``in_dir`` leaves the node, and at what loss.

    If ``out_dir`` is given, the state must realize exactly that exit.
    """
    in_dir = Direction(in_dir)
    placement = state.on_placement
    lm = state.loss_model
    if placement is None:
        res = Resolution(in_dir.opposite, lm.thru_off_db, InteractionKind.BYPASS)
    else:
        res = Resolution(turn_target(placement, in_dir), lm.drop_on_db, InteractionKind.TURN)
    if out_dir is not None and res.out_dir != Direction(out_dir):
        raise UnreachablePathError(
            f"node {state.node_id}: state sends {in_dir.name} to {res.out_dir.name}, "
            f"not {Direction(out_dir).name}")
    return res


def leakage(state: XbarNodeState, in_dir: Direction) -> list[tuple[Direction, float]]:
    """Residual outputs besides the intended one, as (exit side, attenuation dB)."""
    in_dir = Direction(in_dir)
    placement = state.on_placement
    lm = state.loss_model
    if placement is not None:
        if math.isinf(lm.thru_on_isolation_db):
            return []
        return [(in_dir.opposite, lm.thru_on_isolation_db)]
    if math.isinf(lm.drop_off_isolation_db):
        return []
    return [(turn_target(p, in_dir), lm.drop_off_isolation_db) for p in Placement]


def granularity(node_kind: NodeKind = NodeKind.RTR) -> Granularity:
    """Racetrack nodes switch a whole waveguide; micro-rings switch one carrier."""
    if NodeKind(node_kind) is NodeKind.MRR:
        return Granularity.PER_WAVELENGTH
    return Granularity.PER_WAVEGUIDE
