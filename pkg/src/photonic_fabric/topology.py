"""Panel topology: a grid of unit-interposer tiles joined by waveguide bundles.

Coordinates are ``(row, col)`` with row 0 on the north edge and col 0 on the
west edge. Every tile carries one vertical and one horizontal bundle of
``wg_per_bundle`` waveguides; bundles continue straight into adjacent tiles.
Waveguide index ``w`` of a tile's horizontal bundle meets index ``w`` of its
vertical bundle at crossing node ``NodeId(row, col, w)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple

from .errors import CoordinateError, DimensionError, NotFoundError

Coord = tuple[int, int]


class EicKind(str, Enum):
    XPU = "XPU"
    HBM_STACK = "HBM_STACK"
    SWITCH_CONTROLLER = "SWITCH_CONTROLLER"
    OTHER = "OTHER"


class Axis(str, Enum):
    VERTICAL = "V"
    HORIZONTAL = "H"


class WgSegment(NamedTuple):
    """One waveguide of one tile's bundle; the unit of conflict accounting."""

    row: int
    col: int
    axis: Axis
    index: int

    @property
    def tile(self) -> Coord:
        return (self.row, self.col)


class NodeId(NamedTuple):
    row: int
    col: int
    wg: int

    @property
    def tile(self) -> Coord:
        return (self.row, self.col)


@dataclass(frozen=True)
class EicSite:
    id: str
    kind: EicKind
    tile: Coord
    tx_ports: int
    rx_ports: int

    def __post_init__(self):
        if self.tx_ports < 0 or self.rx_ports < 0:
            raise DimensionError(f"{self.id}: port counts must be >= 0")


@dataclass(frozen=True)
class TileTemplate:
    """EIC population stamped onto every tile by :func:`build_panel`.

    Link counts are split evenly between transmit and receive interfaces.
    """

    hbm_stacks: int = 12
    xpu_links: int = 832
    hbm_links: int = 32
    switch_controller: bool = True

    def __post_init__(self):
        if min(self.hbm_stacks, self.xpu_links, self.hbm_links) < 0:
            raise DimensionError("tile template counts must be >= 0")


@dataclass(frozen=True)
class UnitTile:
    coord: Coord
    eic_sites: tuple[EicSite, ...]
    switch_region: str


@dataclass(frozen=True)
class PanelTopology:
    rows: int
    cols: int
    wg_per_bundle: int = 26
    lambdas_per_wg: int = 32
    tiles: dict[Coord, UnitTile] = field(default_factory=dict, repr=False, compare=False)
    masked: frozenset[Coord] = frozenset()
    template: TileTemplate | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("rows", "cols", "wg_per_bundle", "lambdas_per_wg"):
            if getattr(self, name) < 1:
                raise DimensionError(f"{name} must be >= 1, got {getattr(self, name)}")
        for t in self.masked:
            self.check_coord(t)
        index: dict[str, EicSite] = {}
        for tile in self.tiles.values():
            for site in tile.eic_sites:
                if site.id in index:
                    raise DimensionError(f"duplicate EIC id {site.id!r}")
                index[site.id] = site
        object.__setattr__(self, "_eic_index", index)

    @property
    def shape(self) -> Coord:
        return (self.rows, self.cols)

    def contains(self, coord: Coord) -> bool:
        r, c = coord
        return 0 <= r < self.rows and 0 <= c < self.cols

    def check_coord(self, coord: Coord) -> Coord:
        if not self.contains(coord):
            raise CoordinateError(f"tile {coord} outside {self.rows}x{self.cols} grid")
        return coord

    def usable(self, coord: Coord) -> bool:
        return self.contains(coord) and coord not in self.masked

    def eics(self) -> list[EicSite]:
        return list(self._eic_index.values())

    def eics_on(self, coord: Coord) -> tuple[EicSite, ...]:
        tile = self.tiles.get(coord)
        return tile.eic_sites if tile else ()


def _template_sites(coord: Coord, tmpl: TileTemplate) -> tuple[EicSite, ...]:
    r, c = coord
    sites = [EicSite(f"XPU_{r}_{c}", EicKind.XPU, coord,
                     tmpl.xpu_links // 2, tmpl.xpu_links - tmpl.xpu_links // 2)]
    for k in range(tmpl.hbm_stacks):
        sites.append(EicSite(f"HBM_{r}_{c}_{k}", EicKind.HBM_STACK, coord,
                             tmpl.hbm_links // 2, tmpl.hbm_links - tmpl.hbm_links // 2))
    if tmpl.switch_controller:
        sites.append(EicSite(f"CTRL_{r}_{c}", EicKind.SWITCH_CONTROLLER, coord, 0, 0))
    return tuple(sites)


def build_panel(rows: int, cols: int, tile_template: TileTemplate | None = None, *,
                wg_per_bundle: int = 26, lambdas_per_wg: int = 32,
                masked: Iterable[Coord] = ()) -> PanelTopology:
    """Build a fully populated ``rows`` x ``cols`` panel.

    Each tile gets one XPU, ``hbm_stacks`` HBM stacks and a switch controller
    under the default template. EIC ids are ``XPU_r_c``, ``HBM_r_c_k`` and
    ``CTRL_r_c``.
    """
    if rows < 1 or cols < 1:
        raise DimensionError(f"panel needs rows, cols >= 1, got {rows}x{cols}")
    tmpl = tile_template or TileTemplate()
    tiles = {}
    for r in range(rows):
        for c in range(cols):
            tiles[(r, c)] = UnitTile((r, c), _template_sites((r, c), tmpl), f"XBAR_{r}_{c}")
    return PanelTopology(rows, cols, wg_per_bundle, lambdas_per_wg, tiles,
                         frozenset(tuple(m) for m in masked), tmpl)


def manhattan_hops(a: Coord, b: Coord, panel: PanelTopology | None = None) -> int:
    """Crossing-node interactions between two tiles: ``|drow| + |dcol|``."""
    if panel is not None:
        panel.check_coord(a)
        panel.check_coord(b)
    elif min(a) < 0 or min(b) < 0:
        raise CoordinateError(f"negative coordinate in {a} or {b}")
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def locate_eic(panel: PanelTopology, eic_id: str) -> EicSite:
    try:
        return panel._eic_index[eic_id]
    except KeyError:
        raise NotFoundError(f"no EIC named {eic_id!r}") from None


def enumerate_resources(panel: PanelTopology) -> tuple[list[WgSegment], list[NodeId]]:
    """All waveguide segments and crossing nodes, in row-major order."""
    segments = []
    nodes = []
    for r in range(panel.rows):
        for c in range(panel.cols):
            for axis in (Axis.VERTICAL, Axis.HORIZONTAL):
                segments.extend(WgSegment(r, c, axis, w) for w in range(panel.wg_per_bundle))
            nodes.extend(NodeId(r, c, w) for w in range(panel.wg_per_bundle))
    return segments, nodes
