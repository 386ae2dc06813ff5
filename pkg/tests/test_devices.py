import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photonic_fabric.devices import (C_LIGHT, TRIM_STEP, AddDropResonator, Photodetector,
                                     SrnMaterial, WdmCarrierGrid, breakdown_voltage,
                                     calibrate_switch, carrier_wavelengths, dc_field_from_voltage,
                                     delta_n_terms, fsr, nearest_resonance, photocurrent,
                                     switch_levels, transfer, transfer_at_phase, trim)
from photonic_fabric.errors import BreakdownError, CalibrationError, OutOfRangeError
from photonic_fabric.xbar import SwitchLossModel

RING_L = 2 * math.pi * 133e-6


def field_sum(t1, t2, a, theta, trips=4000):
    """Through/drop powers by summing the circulating field trip by trip."""
    k1, k2 = math.sqrt(1 - t1 ** 2), math.sqrt(1 - t2 ** 2)
    loop = t1 * t2 * a * np.exp(1j * theta)
    series = sum(loop ** n for n in range(trips))
    thru = t1 - k1 ** 2 * t2 * a * np.exp(1j * theta) * series
    drop = -k1 * k2 * math.sqrt(a) * np.exp(1j * theta / 2) * series
    return abs(thru) ** 2, abs(drop) ** 2


@pytest.mark.parametrize("t1,t2,a,theta", [(0.9, 0.9, 1.0, 0.0), (0.8, 0.85, 0.97, 0.3),
                                           (0.6, 0.7, 0.92, math.pi), (0.95, 0.9, 0.99, 2.0)])
def test_closed_form_matches_field_sum(t1, t2, a, theta):
    thru, drop = transfer_at_phase(t1, t2, a, theta)
    ref = field_sum(t1, t2, a, theta)
    assert thru == pytest.approx(ref[0], abs=1e-9)
    assert drop == pytest.approx(ref[1], abs=1e-9)


def test_lossless_symmetric_drops_everything():
    thru, drop = transfer_at_phase(0.9, 0.9, 1.0, 0.0)
    assert drop == pytest.approx(1.0, abs=1e-12)
    assert thru == pytest.approx(0.0, abs=1e-12)


def test_anti_resonance_passes_through():
    thru, drop = transfer_at_phase(0.9, 0.9, 1.0, math.pi)
    assert thru > 0.97
    assert drop < 0.03
    assert thru + drop == pytest.approx(1.0)


def test_default_ring_fsr_is_100ghz():
    ring = AddDropResonator(0.9, 0.9, 0.99, RING_L)
    assert fsr(ring).frequency == pytest.approx(100e9, rel=0.01)


def test_fsr_scaling():
    ring = AddDropResonator(0.9, 0.9, 0.99, RING_L)
    double = AddDropResonator(0.9, 0.9, 0.99, 2 * RING_L)
    long = AddDropResonator(0.9, 0.9, 0.99, 32 * RING_L)
    assert fsr(double).frequency == pytest.approx(fsr(ring).frequency / 2)
    assert fsr(long).frequency == pytest.approx(fsr(ring).frequency / 32)
    assert fsr(ring).wavelength == pytest.approx(1550e-9 ** 2 * fsr(ring).frequency / C_LIGHT)


def test_transfer_is_periodic_in_frequency():
    ring = AddDropResonator(0.85, 0.9, 0.98, RING_L)
    f = np.linspace(193.0e12, 193.1e12, 50)
    a = transfer(ring, C_LIGHT / f)
    b = transfer(ring, C_LIGHT / (f + fsr(ring).frequency))
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_transfer_rejects_nonpositive_wavelength():
    ring = AddDropResonator(0.9, 0.9, 0.99, RING_L)
    with pytest.raises(ValueError):
        transfer(ring, 0.0)


def test_resonator_validation():
    with pytest.raises(ValueError):
        AddDropResonator(1.0, 0.9, 0.9, RING_L)
    with pytest.raises(ValueError):
        AddDropResonator(0.9, 0.9, 1.1, RING_L)


rings = st.builds(AddDropResonator, st.floats(0.05, 0.999), st.floats(0.05, 0.999),
                  st.floats(0.5, 1.0), st.just(RING_L))


@settings(max_examples=200, deadline=None)
@given(rings)
def test_passive_over_one_fsr(ring):
    f0 = C_LIGHT / 1550e-9
    f = f0 + np.linspace(0, fsr(ring).frequency, 401)
    thru, drop = transfer(ring, C_LIGHT / f)
    assert np.all(thru + drop <= 1 + 1e-12)
    assert np.all(thru >= -1e-12) and np.all(drop >= -1e-12)


# calibration -----------------------------------------------------------------

TARGETS = SwitchLossModel()


def levels_oracle(t, a):
    """On/off levels from the field sum, independent of the closed form."""
    thru_on, drop_on = field_sum(t, t, a, 0.0, trips=20000)
    thru_off, drop_off = field_sum(t, t, a, math.pi, trips=20000)
    return tuple(10 * math.log10(x) for x in (drop_on, thru_on, thru_off, drop_off))


def meets(levels, tol=0.05):
    drop_on, thru_on, thru_off, drop_off = levels
    return (abs(drop_on + TARGETS.drop_on_db) <= tol
            and thru_on <= -TARGETS.thru_on_isolation_db
            and thru_off >= -TARGETS.thru_off_db - tol
            and drop_off <= -TARGETS.drop_off_isolation_db)


@pytest.fixture(scope="module")
def ring():
    return calibrate_switch(TARGETS, 100e9)


def test_calibrated_levels(ring):
    drop_on, thru_on, thru_off, drop_off = switch_levels(ring)
    assert drop_on == pytest.approx(-0.5, abs=0.05)
    assert thru_on <= -24
    assert thru_off >= -0.25 - 0.05
    assert drop_off <= -15
    assert fsr(ring).frequency == pytest.approx(100e9, rel=0.01)
    assert meets(levels_oracle(ring.self_coupling_in, ring.round_trip_amplitude))


def test_dense_sweep_oracle_agrees(ring):
    # the feasible region of a (t, a) grid, evaluated with the closed form
    ts = np.linspace(0.5, 0.999, 400)[:, None]
    As = np.linspace(0.9, 0.999999, 400)[None, :]
    thru_on, drop_on = transfer_at_phase(ts, ts, As, 0.0)
    thru_off, drop_off = transfer_at_phase(ts, ts, As, math.pi)
    ok = ((np.abs(10 * np.log10(drop_on) + 0.5) <= 0.05)
          & (10 * np.log10(thru_on) <= -24)
          & (10 * np.log10(thru_off) >= -0.3)
          & (10 * np.log10(drop_off) <= -15))
    assert ok.any()
    feasible_t = ts[:, 0][ok.any(axis=1)]
    t = ring.self_coupling_in
    assert feasible_t.min() - 0.01 <= t <= feasible_t.max() + 0.01
    # neighbours of the chosen point on the grid are feasible too
    i = np.abs(ts[:, 0] - t).argmin()
    j = np.abs(As[0] - ring.round_trip_amplitude).argmin()
    assert ok[max(i - 2, 0):i + 3, max(j - 2, 0):j + 3].any()


def test_zero_db_drop_cannot_be_calibrated():
    with pytest.raises(CalibrationError) as info:
        calibrate_switch(SwitchLossModel(drop_on_db=0.0))
    assert math.isfinite(info.value.best_residual_db)


def test_doubling_fsr_halves_optical_length(ring):
    other = calibrate_switch(TARGETS, 200e9)
    assert other.optical_length == pytest.approx(ring.optical_length / 2)


_RING = calibrate_switch(TARGETS, 100e9)


# comb and trimming -----------------------------------------------------------

def test_comb_span():
    waves = carrier_wavelengths(WdmCarrierGrid(32, 0.8e-9, 1550e-9))
    assert min(waves) == pytest.approx(1537.6e-9)
    assert max(waves) == pytest.approx(1562.4e-9)
    assert carrier_wavelengths(WdmCarrierGrid(1)) == [pytest.approx(1550e-9)]
    wide = carrier_wavelengths(WdmCarrierGrid(32, 1e-9))
    assert max(wide) - min(wide) == pytest.approx(31e-9)


def test_comb_total_power():
    assert WdmCarrierGrid().total_power == pytest.approx(16e-3)


def test_trim_zero_adjustment():
    res = AddDropResonator(0.9, 0.9, 0.99, RING_L)
    here = nearest_resonance(res, 1550e-9)
    assert trim(res, here).resonance_offset == 0.0


def test_trim_accuracy():
    res = AddDropResonator(0.9, 0.9, 0.99, RING_L)
    target = nearest_resonance(res, 1550e-9) + 0.4e-9
    out = trim(res, target)
    assert abs(nearest_resonance(out, target) - target) <= TRIM_STEP
    assert out.resonance_offset != 0.0


def test_trim_out_of_range():
    res = AddDropResonator(0.9, 0.9, 0.99, RING_L)
    far = nearest_resonance(res, 1550e-9) + 2 * fsr(res).wavelength
    with pytest.raises(OutOfRangeError):
        trim(res, far)


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.35e-9, 0.35e-9))
def test_trimmed_ring_tracks_fsr_matched_comb(shift):
    grid = WdmCarrierGrid.from_fsr(fsr(_RING).frequency, 32, 1550e-9 + shift)
    waves = carrier_wavelengths(grid)
    tuned = trim(_RING, waves[16])
    for w in waves:
        assert abs(nearest_resonance(tuned, w) - w) <= TRIM_STEP



# index change -----------------------------------------------------------------

def test_mixed_term_value():
    d = delta_n_terms(SrnMaterial(), 1e8, 1e6)
    assert d.mixed == pytest.approx(1.219e-4, rel=1e-3)


@given(st.floats(-1e8, 1e8), st.floats(-1e7, 1e7), st.floats(1e-12, 1e-9))
def test_chi3_zero_collapses_to_chi2(e_dc, e_ac, chi2):
    mat = SrnMaterial(chi2=chi2, chi3=0.0)
    assert delta_n_terms(mat, e_dc, e_ac).ac_total == chi2 * e_ac / mat.base_index


@given(st.floats(1e3, 1e8), st.floats(1e-3, 1e7))
def test_heterodyne_ratio(e_dc, e_ac):
    d = delta_n_terms(SrnMaterial(), e_dc, e_ac)
    assert d.mixed / d.ac_chi3 == pytest.approx(2 * e_dc / e_ac, rel=1e-12)


@given(st.floats(1e5, 1e8), st.floats(1e-6, 1e-3))
def test_small_signal_linearity(e_dc, frac):
    mat = SrnMaterial()
    e_ac = frac * e_dc
    one = delta_n_terms(mat, e_dc, e_ac).ac_total
    two = delta_n_terms(mat, e_dc, 2 * e_ac).ac_total
    assert two / one == pytest.approx(2.0, rel=1e-3)


def test_breakdown():
    with pytest.raises(BreakdownError):
        delta_n_terms(SrnMaterial(), 2e8, 0.0)


def test_field_model():
    mat = SrnMaterial()
    assert dc_field_from_voltage(mat, 5.0) == pytest.approx(1.5e6)
    assert dc_field_from_voltage(mat, 0.0) == 0.0
    assert breakdown_voltage(mat) == pytest.approx(333, abs=5)


def test_photocurrent():
    pd = Photodetector()
    assert photocurrent(pd, 0.5e-3) == pytest.approx(0.4e-3)
    assert photocurrent(pd, 0.0) == 0.0
    assert photocurrent(pd, 1e-4) == pytest.approx(80e-6)
