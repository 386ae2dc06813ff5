"""Command line entry point: ``photonic-fabric <command> ...``.

Exit codes: 0 success, 2 config error, 3 infeasible route or denied
allocation, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, replace
from pathlib import Path
from typing import Sequence

from . import devices as dev
from .allocator import empty_allocation, grant_all, interface_discipline
from .config import RunConfig, parse_config
from .errors import (AllocationConflict, ConfigError, DegenerateRouteError, FabricError,
                     InfeasibleRouteError, InvariantViolation, NotFoundError,
                     RouteValidationError)
from .link_budget import analyze, analyze_preset
from .render import Format, render, trace_line
from .routing import Policy, loss_budget, plan
from .traffic import generate, run, sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INVARIANT = 4

SEED_ENV = "PHOTONIC_FABRIC_SEED"


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    return parse_config(text)


def _with_panel_flags(cfg: RunConfig, args) -> RunConfig:
    updates = {k: v for k in ("rows", "cols", "wg_per_bundle")
               if (v := getattr(args, k, None)) is not None}
    if not updates:
        return cfg
    data = cfg.model_dump(mode="json")
    data["panel"].update(updates)
    return parse_config(json.dumps(data))


def _fmt(args, cfg: RunConfig | None = None) -> Format:
    if getattr(args, "json", False):
        return Format.JSON
    if getattr(args, "csv", None) is True:
        return Format.CSV
    return Format(cfg.output) if cfg is not None and args.config else Format.TABLE


def _emit(text: str) -> None:
    sys.stdout.write(text)


def cmd_budget(args) -> int:
    if args.preset:
        report = analyze_preset(args.preset)
    else:
        cfg = _load_config(args.config)
        spec = cfg.link_classes()
        if spec is None:
            raise ConfigError("no link classes given", "link_budget")
        report = analyze(spec.classes, spec.carrier_power_w, spec.max_reach_mm)
    _emit(render(report, _fmt(args)))
    return EXIT_OK


def cmd_route(args) -> int:
    cfg = _with_panel_flags(_load_config(args.config), args)
    panel = cfg.build_panel()
    policy = Policy(args.policy or cfg.routing.policy)
    route = plan(panel, args.src, args.dst, policy, loss_model=cfg.loss_model(),
                 max_turns=max(cfg.routing.max_turns, args.turns or 0),
                 turns=args.turns)
    budget = loss_budget(route, cfg.loss_model(), cfg.routing.fixed_loss_db,
                         cfg.photodetector(), cfg.routing.db_per_cm)
    record = {
        "src": route.src,
        "dst": route.dst,
        "policy": policy.value,
        "wg_index": route.wg_index,
        "waypoints": [list(t) for t in route.waypoints],
        "interactions": [{"tile": list(i.tile), "kind": i.kind.value,
                          "in": i.in_dir.value, "out": i.out_dir.value}
                         for i in route.interactions],
        **_budget_fields(budget),
    }
    fmt = _fmt(args, cfg)
    if fmt is Format.TABLE:
        _emit(_route_table(record))
    else:
        _emit(render(record, fmt))
    return EXIT_OK


def _route_table(rec: dict) -> str:
    lines = [f"route {rec['src']} -> {rec['dst']} ({rec['policy']}, wg {rec['wg_index']})"]
    for i in rec["interactions"]:
        lines.append(f"  tile {tuple(i['tile'])}  {i['kind']:<6}  {i['in']} -> {i['out']}")
    lines.append(f"  end at tile {tuple(rec['waypoints'][-1])}")
    lines += [
        f"bypasses: {rec['n_bypass']}   turns: {rec['n_turn']}",
        f"switch loss (dB): {rec['switch_loss_db']:.2f}",
        f"propagation loss (dB): {rec['propagation_loss_db']:.2f}",
        f"fixed loss (dB): {rec['fixed_loss_db']:.2f}",
        f"total loss (dB): {rec['total_loss_db']:.2f}",
        f"required carrier power: {rec['required_carrier_dbm']:.2f} dBm"
        f" ({rec['required_carrier_mw']:.3f} mW)",
    ]
    return "\n".join(lines) + "\n"


def _budget_fields(budget) -> dict:
    return {
        "n_bypass": budget.n_bypass,
        "n_turn": budget.n_turn,
        "switch_loss_db": budget.switch_loss_db,
        "propagation_loss_db": budget.propagation_loss_db,
        "fixed_loss_db": budget.fixed_loss_db,
        "total_loss_db": budget.total_loss_db,
        "required_carrier_dbm": budget.required_carrier_dbm,
        "required_carrier_mw": budget.required_carrier_mw,
    }


def cmd_allocate(args) -> int:
    cfg = _with_panel_flags(_load_config(args.config), args)
    panel = cfg.build_panel()
    alloc = empty_allocation(panel, loss_model=cfg.loss_model(), max_turns=cfg.routing.max_turns)
    routes = []
    for pair in args.pair:
        src, sep, dst = pair.partition(":")
        if not sep:
            raise ConfigError(f"expected SRC:DST, got {pair!r}", "--pair")
        routes.append(plan(panel, src, dst, Policy(cfg.routing.policy),
                           loss_model=cfg.loss_model(), max_turns=cfg.routing.max_turns))
    # first fit over waveguide indices, like the simulator
    granted, denied = [], []
    for r in routes:
        for w in range(panel.wg_per_bundle if args.first_fit else 1):
            got, _ = grant_all(alloc, [r.on_waveguide(w)])
            if got:
                granted.append(got[0])
                break
        else:
            denied.append((r, alloc.clashes(r)))
    record = {
        "slot": 0,
        "granted": [{"src": r.src, "dst": r.dst, "turns": r.n_turns, "wg_index": r.wg_index,
                     "loss_db": loss_budget(r, cfg.loss_model(), cfg.routing.fixed_loss_db,
                                            cfg.photodetector()).total_loss_db}
                    for r in granted],
        "denied": [{"src": r.src, "dst": r.dst,
                    "clashes": [f"{type(c.resource).__name__}{tuple(c.resource)}" for c in cl]}
                   for r, cl in denied],
    }
    if args.interfaces:
        record["interfaces"] = [s._asdict() | {"state": s.state.value}
                                for s in interface_discipline(alloc)]
    if _fmt(args, cfg) is Format.JSON or args.trace:
        _emit(json.dumps(record, sort_keys=True) + "\n")
    else:
        _emit(render({"granted": len(granted), "denied": len(denied)}, Format.TABLE))
        for g in record["granted"]:
            _emit(f"  GRANT {g['src']} -> {g['dst']} wg {g['wg_index']} turns {g['turns']} "
                  f"loss {g['loss_db']:.2f} dB\n")
        for d in record["denied"]:
            _emit(f"  DENY  {d['src']} -> {d['dst']} ({len(d['clashes'])} clashes)\n")
    return EXIT_INFEASIBLE if denied else EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _with_panel_flags(_load_config(args.config), args)
    seed = args.seed
    if seed is None:
        env = os.environ.get(SEED_ENV)
        seed = int(env) if env not in (None, "") else cfg.seed
    panel = cfg.build_panel()
    params = cfg.workload_params()
    if args.slots is not None:
        params = replace(params, slots=args.slots)
    policy = cfg.sim_policy()
    if cfg.sweep:
        rows = sweep(panel, cfg.sweep, params, policy, seed=seed, paired=args.paired)
        reports = [{**{f"param_{k}": v for k, v in point.items()}, **_report_dict(rep)}
                   for point, rep in rows]
    else:
        workload = generate(panel, params, seed)
        trace = open(args.trace, "w", encoding="utf-8") if args.trace else None
        try:
            hook = (lambda rec, _a: trace.write(trace_line(rec) + "\n")) if trace else None
            rep = run(panel, workload, policy, check=args.check, on_slot=hook)
        finally:
            if trace:
                trace.close()
        reports = [_report_dict(rep)]
    if args.csv:
        Path(args.csv).write_text(render(reports, Format.CSV), encoding="utf-8")
    fmt = Format.JSON if args.json else Format.TABLE
    _emit(render(reports if len(reports) > 1 else reports[0], fmt))
    return EXIT_OK


def _report_dict(rep) -> dict:
    return asdict(rep)


def cmd_devices(args) -> int:
    cfg = _load_config(args.config)
    ring = dev.calibrate_switch(cfg.loss_model(), cfg.devices.switch_fsr_ghz * 1e9,
                                cfg.devices.group_index)
    levels = dev.switch_levels(ring)
    span = dev.fsr(ring)
    mat = cfg.material()
    comb = cfg.comb()
    waves = dev.carrier_wavelengths(comb)
    record = {
        "ring_self_coupling": ring.self_coupling_in,
        "ring_round_trip_amplitude": ring.round_trip_amplitude,
        "ring_length_m": ring.round_trip_length,
        "fsr_hz": span.frequency,
        "fsr_m": span.wavelength,
        **levels._asdict(),
        "comb_first_m": waves[0],
        "comb_last_m": waves[-1],
        "comb_total_power_w": comb.total_power,
        "breakdown_voltage_v": dev.breakdown_voltage(mat),
        "dc_field_at_5v_v_per_m": dev.dc_field_from_voltage(mat, 5.0),
    }
    _emit(render(record, Format.JSON if args.json else Format.TABLE))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with 2 on bad usage, the same code as a config error
    p = argparse.ArgumentParser(prog="photonic-fabric", description="Photonic interposer fabric model")
    sub = p.add_subparsers(dest="command", required=True)

    def panel_flags(sp):
        sp.add_argument("--config", help="JSON run config")
        sp.add_argument("--rows", type=int)
        sp.add_argument("--cols", type=int)
        sp.add_argument("--wg-per-bundle", dest="wg_per_bundle", type=int)

    b = sub.add_parser("budget", help="data-link budget for a preset or config")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=["silicon", "photonic"])
    src.add_argument("--config")
    out = b.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true")
    out.add_argument("--csv", action="store_true")
    b.set_defaults(func=cmd_budget)

    r = sub.add_parser("route", help="plan one route and its power budget")
    r.add_argument("--from", dest="src", required=True, help="source EIC id, e.g. XPU_0_0")
    r.add_argument("--to", dest="dst", required=True)
    r.add_argument("--policy", choices=[p.value for p in Policy])
    r.add_argument("--turns", type=int, help="force an exact turn count")
    r.add_argument("--json", action="store_true")
    panel_flags(r)
    r.set_defaults(func=cmd_route)

    a = sub.add_parser("allocate", help="admit a set of routes into one slot")
    a.add_argument("--pair", action="append", required=True, metavar="SRC:DST")
    a.add_argument("--first-fit", action="store_true",
                   help="try every waveguide index before denying")
    a.add_argument("--interfaces", action="store_true", help="include EIC interface settings")
    a.add_argument("--json", action="store_true")
    a.add_argument("--trace", action="store_true", help="emit the slot as one JSON line")
    panel_flags(a)
    a.set_defaults(func=cmd_allocate)

    s = sub.add_parser("simulate", help="run the slotted traffic simulation")
    s.add_argument("--slots", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--csv", metavar="OUT", help="write report rows as CSV")
    s.add_argument("--trace", metavar="OUT", help="write the allocation trace as JSON lines")
    s.add_argument("--paired", action="store_true", help="same seed for every sweep point")
    s.add_argument("--check", action="store_true", help="verify invariants every slot")
    s.add_argument("--json", action="store_true")
    panel_flags(s)
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("devices", help="calibrate the switch ring and report device figures")
    d.add_argument("--config")
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_devices)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateRouteError, InfeasibleRouteError, AllocationConflict,
            RouteValidationError, NotFoundError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except FabricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
