"""Behavioral model of a photonic interposer fabric.

Tiles joined by waveguide bundles, two-resonator crossbar switches, route
planning with loss budgets, per-slot allocation, data-link budgets and a
slotted traffic simulator.
"""

from .allocator import (SlotAllocation, empty_allocation, interface_discipline, max_concurrent,
                        release, try_allocate, validate_allocation)
from .config import RunConfig, parse_config
from .devices import (AddDropResonator, Photodetector, SrnMaterial, WdmCarrierGrid,
                      calibrate_switch, carrier_wavelengths, delta_n_terms, fsr, switch_levels,
                      transfer, trim)
from .errors import (AllocationConflict, CalibrationError, ConfigError, DegenerateRouteError,
                     FabricError, InfeasibleRouteError, InvariantViolation)
from .link_budget import LinkClass, Preset, analyze, analyze_preset, compare, preset
from .render import Format, render
from .routing import Policy, Route, enumerate_routes, loss_budget, make_route, plan
from .topology import PanelTopology, build_panel, enumerate_resources, locate_eic, manhattan_hops
from .traffic import SimPolicy, SimReport, WorkloadParams, generate, run, sweep
from .xbar import Direction, Placement, SwitchLossModel, XbarNodeState, coverage_set, resolve

__version__ = "0.1.0"

__all__ = [
    "AddDropResonator", "AllocationConflict", "CalibrationError", "ConfigError",
    "DegenerateRouteError", "Direction", "FabricError", "Format", "InfeasibleRouteError",
    "InvariantViolation", "LinkClass", "PanelTopology", "Photodetector", "Placement", "Policy",
    "Preset", "Route", "RunConfig", "SimPolicy", "SimReport", "SlotAllocation", "SrnMaterial",
    "SwitchLossModel", "WdmCarrierGrid", "WorkloadParams", "XbarNodeState", "analyze",
    "analyze_preset", "build_panel", "calibrate_switch", "carrier_wavelengths", "compare",
    "coverage_set", "delta_n_terms", "empty_allocation", "enumerate_resources",
    "enumerate_routes", "fsr", "generate", "interface_discipline", "locate_eic", "loss_budget",
    "make_route", "manhattan_hops", "max_concurrent", "parse_config", "plan", "preset",
    "release", "render", "resolve", "run", "sweep", "switch_levels", "transfer", "trim",
    "try_allocate", "validate_allocation",
]
