"""Run configuration: one JSON document, validated strictly.

Unknown keys are rejected. Wavelengths are given in nm, powers in mW and
frequencies in GHz; builders convert to SI units.
"""

from __future__ import annotations

import json
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .devices import Photodetector, SrnMaterial, WdmCarrierGrid
from .errors import ConfigSyntaxError, ConfigValueError, UnknownKeyError
from .link_budget import LinkClass, PresetSpec, Wiring, exact
from .routing import Policy
from .topology import PanelTopology, TileTemplate, build_panel
from .traffic import BlockedMode, QueueOrder, SimPolicy, WorkloadParams
from .xbar import SwitchLossModel


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class TileTemplateConfig(_Strict):
    hbm_stacks: int = Field(12, ge=0)
    xpu_links: int = Field(832, ge=0)
    hbm_links: int = Field(32, ge=0)
    switch_controller: bool = True


class PanelConfig(_Strict):
    rows: int = Field(1, ge=1)
    cols: int = Field(1, ge=1)
    wg_per_bundle: int = Field(26, ge=1)
    lambdas_per_wg: int = Field(32, ge=1)
    masked: list[tuple[int, int]] = []
    tile_template: TileTemplateConfig = TileTemplateConfig()

    @model_validator(mode="after")
    def _masked_inside(self):
        for r, c in self.masked:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"masked tile ({r}, {c}) outside the grid")
        return self


class SwitchConfig(_Strict):
    drop_on_db: float = Field(0.5, ge=0)
    thru_off_db: float = Field(0.25, ge=0)
    thru_on_isolation_db: float = Field(24.0, ge=0)
    drop_off_isolation_db: float = Field(15.0, ge=0)


class RoutingConfig(_Strict):
    policy: Literal["min-loss", "min-turns"] = "min-loss"
    max_turns: int = Field(2, ge=0)
    fixed_loss_db: float = Field(3.0, ge=0)
    db_per_cm: float = Field(0.0, ge=0)


class PhotodetectorConfig(_Strict):
    responsivity: float = Field(0.8, gt=0)
    sensitivity_dbm: float = -10.0


class CombConfig(_Strict):
    carrier_count: int = Field(32, ge=1)
    spacing_nm: float = Field(0.8, gt=0)
    center_nm: float = Field(1550.0, gt=0)
    power_per_carrier_mw: float = Field(0.5, gt=0)


class MaterialConfig(_Strict):
    chi2: float = 0.0
    chi3: float = 12.6e-19
    base_index: float = Field(3.1, gt=1)
    breakdown_field: float = Field(1e8, gt=0)
    field_per_volt: float = Field(3e5, gt=0)


class DevicesConfig(_Strict):
    photodetector: PhotodetectorConfig = PhotodetectorConfig()
    comb: CombConfig = CombConfig()
    material: MaterialConfig = MaterialConfig()
    switch_fsr_ghz: float = Field(100.0, gt=0)
    group_index: float = Field(3.59, gt=0)


class LinkClassConfig(_Strict):
    name: str
    link_count: int = Field(gt=0)
    rate_gbps: float = Field(gt=0)
    energy_pj_per_bit: float = Field(gt=0)
    area_mm2_per_link: float = Field(ge=0)
    bumps_per_link: float = Field(1.0, ge=0)
    wiring: Literal["TL_SINGLE", "TL_DIFF", "WG"] = "TL_SINGLE"
    links_per_wire: Optional[float] = Field(None, gt=0)
    relay: bool = False


class LinkBudgetConfig(_Strict):
    classes: list[LinkClassConfig] = Field(min_length=1)
    carrier_power_w: float = Field(0.0, ge=0)
    max_reach_mm: Optional[float] = Field(None, gt=0)


class WorkloadConfig(_Strict):
    rate: float = Field(0.5, ge=0)
    nearby_fraction: float = Field(0.5, ge=0, le=1)
    xpu_duty: float = Field(0.7, ge=0.5, le=0.9)
    mean_size_bits: float = Field(2.0e6, gt=0)
    slots: int = Field(1000, ge=0)


class SimConfig(_Strict):
    slot_seconds: float = Field(1e-6, gt=0)
    rate_gbps: float = Field(32.0, gt=0)
    queue: Literal["fifo", "random"] = "fifo"
    blocked: Literal["queue", "drop"] = "queue"
    reconfig_slots: int = Field(0, ge=0)


class RunConfig(_Strict):
    panel: PanelConfig = PanelConfig()
    switch: SwitchConfig = SwitchConfig()
    routing: RoutingConfig = RoutingConfig()
    devices: DevicesConfig = DevicesConfig()
    link_budget: Optional[LinkBudgetConfig] = None
    workload: WorkloadConfig = WorkloadConfig()
    sim: SimConfig = SimConfig()
    sweep: list[dict[str, Union[int, float]]] = []
    output: Literal["table", "json", "csv"] = "table"
    seed: int = 0

    # builders -----------------------------------------------------------

    def build_panel(self) -> PanelTopology:
        p = self.panel
        t = p.tile_template
        return build_panel(p.rows, p.cols,
                           TileTemplate(t.hbm_stacks, t.xpu_links, t.hbm_links, t.switch_controller),
                           wg_per_bundle=p.wg_per_bundle, lambdas_per_wg=p.lambdas_per_wg,
                           masked=[tuple(m) for m in p.masked])

    def loss_model(self) -> SwitchLossModel:
        return SwitchLossModel(**self.switch.model_dump())

    def photodetector(self) -> Photodetector:
        return Photodetector(**self.devices.photodetector.model_dump())

    def comb(self) -> WdmCarrierGrid:
        c = self.devices.comb
        return WdmCarrierGrid(c.carrier_count, c.spacing_nm * 1e-9, c.center_nm * 1e-9,
                              c.power_per_carrier_mw * 1e-3)

    def material(self) -> SrnMaterial:
        return SrnMaterial(**self.devices.material.model_dump())

    def workload_params(self) -> WorkloadParams:
        return WorkloadParams(**self.workload.model_dump())

    def sim_policy(self) -> SimPolicy:
        s = self.sim
        return SimPolicy(route_policy=Policy(self.routing.policy), queue_order=QueueOrder(s.queue),
                         blocked=BlockedMode(s.blocked), rate_gbps=s.rate_gbps,
                         slot_seconds=s.slot_seconds, reconfig_slots=s.reconfig_slots,
                         max_turns=self.routing.max_turns,
                         fixed_loss_db=self.routing.fixed_loss_db,
                         loss_model=self.loss_model(), photodetector=self.photodetector(),
                         power_per_carrier_w=self.devices.comb.power_per_carrier_mw * 1e-3)

    def link_classes(self) -> PresetSpec | None:
        lb = self.link_budget
        if lb is None:
            return None
        classes = tuple(
            LinkClass(c.name, c.link_count, exact(c.rate_gbps), exact(c.energy_pj_per_bit),
                      exact(c.area_mm2_per_link), exact(c.bumps_per_link), Wiring(c.wiring),
                      None if c.links_per_wire is None else exact(c.links_per_wire), c.relay)
            for c in lb.classes)
        reach = None if lb.max_reach_mm is None else exact(lb.max_reach_mm)
        return PresetSpec(classes, exact(lb.carrier_power_w), reach)


def _path(loc) -> str:
    return ".".join(str(p) for p in loc)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config, reporting the first error with its key path."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(f"invalid JSON: {exc.msg} at line {exc.lineno} column {exc.colno}")
    if not isinstance(data, dict):
        raise ConfigSyntaxError("top level must be a JSON object")
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        path = _path(err["loc"])
        if err["type"] == "extra_forbidden":
            raise UnknownKeyError("unknown key", path) from None
        raise ConfigValueError(err["msg"], path) from None
    try:
        # constructing the domain objects runs their own invariant checks
        cfg.build_panel()
        cfg.loss_model()
        cfg.link_classes()
    except ValueError as exc:
        raise ConfigValueError(str(exc)) from None
    return cfg


def dump_config(cfg: RunConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json"), indent=2, sort_keys=True)
