"""Acceptance criteria, one test each. Run alone with ``pytest tests/test_acceptance.py``;
a PASS/FAIL line per criterion is printed in the terminal summary."""

import itertools
import json
import math
import random
import time

import numpy as np
import pytest

from photonic_fabric.allocator import (empty_allocation, release, try_allocate,
                                       validate_allocation)
from photonic_fabric.cli import main
from photonic_fabric.devices import (C_LIGHT, AddDropResonator, SrnMaterial, breakdown_voltage,
                                     calibrate_switch, dc_field_from_voltage, delta_n_terms, fsr,
                                     switch_levels, transfer, transfer_at_phase)
from photonic_fabric.errors import AllocationConflict, InvalidStateError
from photonic_fabric.routing import enumerate_routes, loss_budget, make_route, plan
from photonic_fabric.topology import build_panel
from photonic_fabric.traffic import SimPolicy, WorkloadParams, generate, run, sweep
from photonic_fabric.xbar import (Direction, Placement, SwitchLossModel, XbarNodeState,
                                  all_paths, coverage_set, resolve)

TOL = 0.005


def xpu(r, c):
    return f"XPU_{r}_{c}"


def cli_json(capsys, argv):
    start = time.perf_counter()
    code = main(argv)
    elapsed = time.perf_counter() - start
    assert code == 0
    return json.loads(capsys.readouterr().out), elapsed


def test_criterion_1_silicon_table_reproduction(capsys):
    out, elapsed = cli_json(capsys, ["budget", "--preset", "silicon", "--json"])
    printed = {"total_bandwidth_tbps": 13.312, "total_power_w": 18.391,
               "total_area_mm2": 22.224, "energy_pj_per_bit": 1.38,
               "bw_density_tbps_mm2": 0.60, "power_density_w_mm2": 0.83,
               "total_bumps": 832, "total_wires": 736}
    for key, value in printed.items():
        assert abs(out[key] - value) <= TOL, key
    assert out["wire_kind"] == "TL"
    assert elapsed < 1.0


def test_criterion_2_photonic_table_reproduction(capsys):
    out, elapsed = cli_json(capsys, ["budget", "--preset", "photonic", "--json"])
    printed = {"total_bandwidth_tbps": 26.624, "total_power_w": 31.033,
               "carrier_power_w": 0.416, "total_area_mm2": 33.28,
               "energy_pj_per_bit": 1.17, "bw_density_tbps_mm2": 0.80,
               "power_density_w_mm2": 0.93, "total_bumps": 832, "total_wires": 26}
    for key, value in printed.items():
        assert abs(out[key] - value) <= TOL, key
    assert out["wire_kind"] == "WG"
    assert elapsed < 1.0


def test_criterion_3_worst_case_corner_budget():
    start = time.perf_counter()
    route = plan(build_panel(8, 8), xpu(0, 0), xpu(7, 7), turns=2)
    budget = loss_budget(route, SwitchLossModel(), fixed_loss_db=3.0)
    elapsed = time.perf_counter() - start
    assert (budget.n_bypass, budget.n_turn) == (12, 2)
    assert budget.total_loss_db == pytest.approx(7.0, abs=1e-12)
    # 0.5 mW within 1%, and the dBm figure within the same 1% power band
    assert budget.required_carrier_mw == pytest.approx(0.5, rel=0.01)
    assert abs(budget.required_carrier_dbm - (-3.01)) <= 10 * math.log10(1.01)
    assert elapsed < 1.0


def test_criterion_4_brown_path_switch_loss():
    brown = make_route(xpu(1, 0), xpu(0, 2), [(1, 0), (1, 1), (0, 1), (0, 2)])
    assert (brown.n_bypass, brown.n_turns) == (1, 2)
    assert loss_budget(brown, SwitchLossModel(), fixed_loss_db=0.0).switch_loss_db == 1.25


def test_criterion_5_switch_coverage():
    a, b = coverage_set(Placement.A_SOUTHWEST), coverage_set(Placement.B_NORTHWEST)
    assert (len(a), len(b), len(a | b)) == (8, 8, 12)
    pairs = list(itertools.permutations(Direction, 2))
    assert len(pairs) == 12 and set(pairs) == all_paths()
    states = [XbarNodeState(None, x, y) for x, y in itertools.product([False, True], repeat=2)]
    for i, o in pairs:
        realizing = []
        for s in states:
            try:
                res = resolve(s, i)
            except InvalidStateError:
                continue
            assert res.out_dir != i
            if res.out_dir == o:
                realizing.append(s)
        assert realizing, (i, o)


def test_criterion_6_resonator_calibration():
    start = time.perf_counter()
    ring = calibrate_switch(SwitchLossModel(), 100e9)
    drop_on, thru_on, thru_off, drop_off = switch_levels(ring)
    assert abs(drop_on + 0.5) <= 0.05
    assert thru_on <= -24
    assert thru_off >= -0.25 - 0.05
    assert drop_off <= -15
    assert abs(fsr(ring).frequency - 100e9) <= 0.01 * 100e9
    # dense (t, a) sweep: the feasible set is nonempty and contains the fitted ring's neighbourhood
    ts = np.linspace(0.5, 0.999, 600)[:, None]
    As = np.linspace(0.9, 0.999999, 600)[None, :]
    t_on, d_on = transfer_at_phase(ts, ts, As, 0.0)
    t_off, d_off = transfer_at_phase(ts, ts, As, math.pi)
    ok = ((np.abs(10 * np.log10(d_on) + 0.5) <= 0.05) & (10 * np.log10(t_on) <= -24)
          & (10 * np.log10(t_off) >= -0.3) & (10 * np.log10(d_off) <= -15))
    assert ok.any()
    i = np.abs(ts[:, 0] - ring.self_coupling_in).argmin()
    j = np.abs(As[0] - ring.round_trip_amplitude).argmin()
    assert ok[max(i - 2, 0):i + 3, max(j - 2, 0):j + 3].any()
    assert time.perf_counter() - start < 10


def test_criterion_7_passivity_and_periodicity():
    rng = np.random.default_rng(2024)
    length = 2 * math.pi * 133e-6
    f0 = C_LIGHT / 1550e-9
    for k in range(1000):
        lossless = k % 4 == 0
        ring = AddDropResonator(rng.uniform(0.05, 0.999), rng.uniform(0.05, 0.999),
                                1.0 if lossless else rng.uniform(0.5, 1.0),
                                length * rng.uniform(0.5, 2.0))
        f = f0 + np.linspace(0, fsr(ring).frequency, 257)
        thru, drop = transfer(ring, C_LIGHT / f)
        total = thru + drop
        assert np.all(total <= 1 + 1e-12)
        if lossless:
            assert np.all(np.abs(total - 1) <= 1e-9)
        # one full FSR later the response repeats
        assert np.allclose(transfer(ring, C_LIGHT / f[0]), (thru[-1], drop[-1]), atol=1e-9)


def test_criterion_8_index_change_and_field_model():
    rng = random.Random(8)
    for _ in range(500):
        chi2 = rng.uniform(1e-12, 1e-9)
        e_dc, e_ac = rng.uniform(-1e8, 1e8), rng.uniform(-1e7, 1e7)
        mat = SrnMaterial(chi2=chi2, chi3=0.0)
        assert delta_n_terms(mat, e_dc, e_ac).ac_total == chi2 * e_ac / mat.base_index
    mat = SrnMaterial()
    for _ in range(500):
        e_dc, e_ac = rng.uniform(1e3, 1e8), rng.uniform(1e-3, 1e7)
        d = delta_n_terms(mat, e_dc, e_ac)
        assert d.mixed / d.ac_chi3 == pytest.approx(2 * e_dc / e_ac, rel=1e-12)
    for _ in range(500):
        e_dc = rng.uniform(1e5, 1e8)
        e_ac = rng.uniform(0, 1e-3) * e_dc
        one = delta_n_terms(mat, e_dc, e_ac).ac_total
        two = delta_n_terms(mat, e_dc, 2 * e_ac).ac_total
        if one:
            assert abs(two / one - 2) <= 2e-3
    assert dc_field_from_voltage(mat, 5.0) / 1e6 == pytest.approx(1.5)
    assert abs(breakdown_voltage(mat) - 333) <= 5


def test_criterion_9_planner_oracle_equivalence():
    rng = random.Random(9)
    lm = SwitchLossModel()
    start = time.perf_counter()
    cases = 0
    while cases < 500:
        rows, cols = rng.randint(1, 20), rng.randint(1, 20)
        s = (rng.randrange(rows), rng.randrange(cols))
        d = (rng.randrange(rows), rng.randrange(cols))
        if s == d:
            continue
        panel = build_panel(rows, cols, wg_per_bundle=1)
        got = plan(panel, xpu(*s), xpu(*d))
        routes = enumerate_routes(panel, xpu(*s), xpu(*d))
        loss = [r.n_bypass * lm.thru_off_db + r.n_turns * lm.drop_on_db for r in routes]
        best = min(loss)
        best_turns = min(r.n_turns for r, x in zip(routes, loss) if x == best)
        assert got.n_bypass * 0.25 + got.n_turns * 0.5 == best
        assert got.n_turns == best_turns
        cases += 1
    assert time.perf_counter() - start < 30


def test_criterion_10_allocator_safety():
    panel = build_panel(4, 4, wg_per_bundle=2)
    rng = random.Random(10)
    pool = []
    for s, d in itertools.permutations(itertools.product(range(4), range(4)), 2):
        for w in range(2):
            pool.append(plan(panel, xpu(*s), xpu(*d), wg_index=w))
    alloc = empty_allocation(panel)
    held: list = []
    owner: dict = {}
    for op in range(100_000):
        if held and rng.random() < 0.45:
            route = held.pop(rng.randrange(len(held)))
            alloc = release(alloc, route)
            for res in route.claimed_segments | route.claimed_nodes:
                del owner[res]
        else:
            route = rng.choice(pool)
            free = not any(res in owner for res in route.claimed_segments | route.claimed_nodes)
            try:
                alloc = try_allocate(alloc, route)
            except AllocationConflict as exc:
                assert not free and exc.clashes
            else:
                assert free
                held.append(route)
                for res in route.claimed_segments | route.claimed_nodes:
                    owner[res] = route
        if op % 97 == 0:
            validate_allocation(alloc)
    validate_allocation(alloc)

    tri = build_panel(3, 3)
    out = plan(tri, xpu(1, 1), xpu(1, 2))
    inb = plan(tri, xpu(0, 1), xpu(1, 1))
    both = try_allocate(try_allocate(empty_allocation(tri), out), inb)
    assert both.routes == [out, inb]

    brown = make_route(xpu(1, 0), xpu(0, 2), [(1, 0), (1, 1), (0, 1), (0, 2)])
    pink = make_route(xpu(2, 1), xpu(0, 1), [(2, 1), (1, 1), (0, 1)])
    with pytest.raises(AllocationConflict) as info:
        try_allocate(try_allocate(empty_allocation(tri), brown), pink)
    assert info.value.clashes


def test_criterion_11_simulator_conservation_and_determinism():
    panel = build_panel(3, 3, wg_per_bundle=2)
    params = WorkloadParams(rate=2.5, slots=400)
    policy = SimPolicy()
    workload = generate(panel, params, 11)
    traces = [[], []]
    reports = []
    for trace in traces:
        def on_slot(rec, _alloc, trace=trace):
            assert rec.delivered_bits + rec.in_flight_bits + rec.dropped_bits == rec.offered_bits
            trace.append(rec)
        reports.append(run(panel, generate(panel, params, 11), policy, check=True,
                           on_slot=on_slot))
    assert reports[0] == reports[1]
    assert traces[0] == traces[1]
    assert reports[0] == run(panel, workload, policy)
    assert reports[0].peak_wg_rate_tbps <= 1.024
    assert reports[0].delivered_bits > 0

    grid = [{"wg_per_bundle": w} for w in (1, 2, 3, 4, 8, 26)]
    rows = sweep(build_panel(4, 4), grid, WorkloadParams(rate=3.0, slots=400), seed=11,
                 paired=True)
    blocking = [rep.blocking_probability for _, rep in rows]
    assert all(a >= b for a, b in zip(blocking, blocking[1:])), blocking
    assert all(rep.peak_wg_rate_tbps <= 1.024 for _, rep in rows)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
