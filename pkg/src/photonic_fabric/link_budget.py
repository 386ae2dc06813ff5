"""Unit-interposer data-link budgets: silicon (HBM + UCIe + XSR) versus photonic WDM.

All arithmetic is exact (``fractions.Fraction``); rounding happens only when a
report is rendered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Sequence

Number = int | float | str | Fraction | Decimal


def exact(x: Number) -> Fraction:
    """Exact rational from a decimal literal; floats go through their repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(Decimal(repr(x)))
    return Fraction(x)


class Wiring(str, Enum):
    TL_SINGLE = "TL_SINGLE"
    TL_DIFF = "TL_DIFF"
    WG = "WG"


_DEFAULT_LINKS_PER_WIRE = {Wiring.TL_SINGLE: 1, Wiring.TL_DIFF: Fraction(1, 2), Wiring.WG: 32}


@dataclass(frozen=True)
class LinkClass:
    """One population of identical data links.

    A ``relay`` class forwards traffic another class already carries (a SerDes
    hop after a die-to-die hop): its power, area, bumps and wires count, its
    bandwidth does not.
    """

    name: str
    link_count: int
    rate_gbps: Fraction
    energy_pj_per_bit: Fraction
    area_mm2_per_link: Fraction
    bumps_per_link: Fraction = Fraction(1)
    wiring: Wiring = Wiring.TL_SINGLE
    links_per_wire: Fraction | None = None
    relay: bool = False

    def __post_init__(self):
        for name in ("rate_gbps", "energy_pj_per_bit", "area_mm2_per_link", "bumps_per_link"):
            object.__setattr__(self, name, exact(getattr(self, name)))
        object.__setattr__(self, "wiring", Wiring(self.wiring))
        lpw = self.links_per_wire
        lpw = _DEFAULT_LINKS_PER_WIRE[self.wiring] if lpw is None else exact(lpw)
        object.__setattr__(self, "links_per_wire", lpw)
        if self.link_count <= 0 or self.rate_gbps <= 0 or self.energy_pj_per_bit <= 0:
            raise ValueError(f"{self.name}: link count, rate and energy must be positive")
        if self.area_mm2_per_link < 0 or self.bumps_per_link < 0 or self.links_per_wire <= 0:
            raise ValueError(f"{self.name}: area, bumps and links_per_wire out of range")

    @property
    def bandwidth_tbps(self) -> Fraction:
        return self.link_count * self.rate_gbps / 1000

    @property
    def power_w(self) -> Fraction:
        # pJ/b x Tb/s = W
        return self.energy_pj_per_bit * self.bandwidth_tbps

    @property
    def area_mm2(self) -> Fraction:
        return self.link_count * self.area_mm2_per_link

    @property
    def bumps(self) -> Fraction:
        return self.link_count * self.bumps_per_link

    @property
    def wires(self) -> int:
        return math.ceil(self.link_count / self.links_per_wire)


@dataclass(frozen=True)
class LinkBudgetReport:
    total_links: int
    total_bumps: Fraction
    total_wires: int
    wire_kind: str
    total_bandwidth_tbps: Fraction
    carrier_power_w: Fraction
    total_power_w: Fraction
    total_area_mm2: Fraction
    energy_pj_per_bit: Fraction
    bw_density_tbps_mm2: Fraction
    power_density_w_mm2: Fraction
    max_reach_mm: Fraction | None = None

    def numeric_fields(self) -> list[str]:
        return [f.name for f in fields(self) if f.name != "wire_kind"]


def analyze(classes: Sequence[LinkClass], carrier_power_w: Number = 0,
            max_reach_mm: Number | None = None) -> LinkBudgetReport:
    if not classes:
        raise ValueError("need at least one link class")
    carrier = exact(carrier_power_w)
    bandwidth = sum((c.bandwidth_tbps for c in classes if not c.relay), Fraction(0))
    power = sum((c.power_w for c in classes), Fraction(0)) + carrier
    area = sum((c.area_mm2 for c in classes), Fraction(0))
    if bandwidth == 0:
        raise ZeroDivisionError("total bandwidth is zero; energy per bit undefined")
    kinds = sorted({"WG" if c.wiring is Wiring.WG else "TL" for c in classes})
    return LinkBudgetReport(
        total_links=sum(c.link_count for c in classes),
        total_bumps=sum((c.bumps for c in classes), Fraction(0)),
        total_wires=sum(c.wires for c in classes),
        wire_kind="+".join(kinds),
        total_bandwidth_tbps=bandwidth,
        carrier_power_w=carrier,
        total_power_w=power,
        total_area_mm2=area,
        energy_pj_per_bit=power / bandwidth,
        bw_density_tbps_mm2=bandwidth / area if area else Fraction(0),
        power_density_w_mm2=power / area if area else Fraction(0),
        max_reach_mm=None if max_reach_mm is None else exact(max_reach_mm),
    )


class Preset(str, Enum):
    SILICON_UNIT = "silicon"
    PHOTONIC_UNIT = "photonic"


@dataclass(frozen=True)
class PresetSpec:
    classes: tuple[LinkClass, ...]
    carrier_power_w: Fraction
    max_reach_mm: Fraction


CARRIER_POWER_MW = Fraction(1, 2)
LAMBDAS_PER_WG = 32


def preset(name: Preset | str) -> PresetSpec:
    name = Preset(name)
    if name is Preset.SILICON_UNIT:
        classes = (
            LinkClass("HBM PHY", 12 * 32, 16, "1.01", "0.03525"),
            LinkClass("UCIe PHY", 2 * 112, 32, "0.6", "0.0045"),
            # the SerDes dies' 224 UCIe-side micro-bumps are booked against this class
            LinkClass("XSR SerDes PHY", 2 * 32, 112, "1.1", "0.12",
                      bumps_per_link=Fraction(224, 64), wiring=Wiring.TL_DIFF, relay=True),
        )
        return PresetSpec(classes, Fraction(0), Fraction(50))
    classes = (
        LinkClass("nearby WDM", 12 * 32, 32, "1.15", "0.04", wiring=Wiring.WG,
                  links_per_wire=LAMBDAS_PER_WG),
        LinkClass("far-off WDM", 448, 32, "1.15", "0.04", wiring=Wiring.WG,
                  links_per_wire=LAMBDAS_PER_WG),
    )
    carriers = sum(c.wires for c in classes) * LAMBDAS_PER_WG
    return PresetSpec(classes, carriers * CARRIER_POWER_MW / 1000, Fraction(500))


def analyze_preset(name: Preset | str) -> LinkBudgetReport:
    spec = preset(name)
    return analyze(spec.classes, spec.carrier_power_w, spec.max_reach_mm)


@dataclass(frozen=True)
class Comparison:
    ratios: dict[str, Fraction | None]
    deltas: dict[str, Fraction | None]


def compare(a: LinkBudgetReport, b: LinkBudgetReport) -> Comparison:
    """Per-metric ratios ``b / a`` and differences ``b - a``."""
    ratios, deltas = {}, {}
    for name in a.numeric_fields():
        x, y = getattr(a, name), getattr(b, name)
        if x is None or y is None:
            ratios[name] = deltas[name] = None
            continue
        x, y = Fraction(x), Fraction(y)
        deltas[name] = y - x
        ratios[name] = y / x if x else None
    return Comparison(ratios, deltas)
