"""Device-level models: add-drop resonators, comb grid, trimming, detection,
and the field-induced refractive index change of silicon-rich nitride.

All lengths are in meters, frequencies in Hz, fields in V/m.

Resonator transfer uses the two-coupler add-drop model with round-trip phase

    theta(lam) = 2*pi*n_g*L * (1/lam + offset/lam_ref**2)

so a positive ``resonance_offset`` red-shifts every resonance by roughly
``offset`` near ``lam_ref`` while keeping resonances equally spaced in
frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import BreakdownError, CalibrationError, OutOfRangeError
from .xbar import SwitchLossModel

C_LIGHT = 299_792_458.0
TRIM_STEP = 10e-12
DEFAULT_GROUP_INDEX = 3.59
REFERENCE_WAVELENGTH = 1550e-9


def db(ratio):
    """Power ratio to dB; zero maps to -inf."""
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(ratio)


def dbm_to_mw(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw) if mw > 0 else -math.inf


@dataclass(frozen=True)
class AddDropResonator:
    self_coupling_in: float
    self_coupling_drop: float
    round_trip_amplitude: float
    round_trip_length: float
    group_index: float = DEFAULT_GROUP_INDEX
    resonance_offset: float = 0.0
    reference_wavelength: float = REFERENCE_WAVELENGTH

    def __post_init__(self):
        if not 0 < self.self_coupling_in < 1 or not 0 < self.self_coupling_drop < 1:
            raise ValueError("self-coupling amplitudes must lie in (0, 1)")
        if not 0 < self.round_trip_amplitude <= 1:
            raise ValueError("round-trip amplitude must lie in (0, 1]")
        if self.round_trip_length <= 0 or self.group_index <= 0:
            raise ValueError("round-trip length and group index must be positive")

    @property
    def optical_length(self) -> float:
        return self.group_index * self.round_trip_length

    def phase(self, wavelength):
        lam = np.asarray(wavelength, dtype=float)
        return 2 * np.pi * self.optical_length * (
            1.0 / lam + self.resonance_offset / self.reference_wavelength ** 2)


def transfer_at_phase(t1, t2, a, theta):
    """Through and drop power ratios of an add-drop ring at round-trip phase theta."""
    cos = np.cos(theta)
    den = 1 - 2 * t1 * t2 * a * cos + (t1 * t2 * a) ** 2
    thru = (t2 ** 2 * a ** 2 - 2 * t1 * t2 * a * cos + t1 ** 2) / den
    drop = (1 - t1 ** 2) * (1 - t2 ** 2) * a / den
    return thru, drop


def transfer(res: AddDropResonator, wavelength):
    """(through, drop) power ratios at ``wavelength``; arrays broadcast."""
    if np.any(np.asarray(wavelength) <= 0):
        raise ValueError("wavelength must be positive")
    return transfer_at_phase(res.self_coupling_in, res.self_coupling_drop,
                             res.round_trip_amplitude, res.phase(wavelength))


class Fsr(NamedTuple):
    wavelength: float
    frequency: float


def fsr(res: AddDropResonator, around_wavelength: float = REFERENCE_WAVELENGTH) -> Fsr:
    return Fsr(around_wavelength ** 2 / res.optical_length, C_LIGHT / res.optical_length)


def nearest_resonance(res: AddDropResonator, wavelength: float) -> float:
    """Resonance wavelength closest (in phase) to ``wavelength``."""
    shift = res.resonance_offset / res.reference_wavelength ** 2
    order = round(res.optical_length * (1.0 / wavelength + shift))
    return 1.0 / (order / res.optical_length - shift)


class SwitchLevels(NamedTuple):
    """ON levels are at resonance, OFF levels half an FSR away; all in dB."""

    drop_on_db: float
    thru_on_db: float
    thru_off_db: float
    drop_off_db: float


def switch_levels(res: AddDropResonator) -> SwitchLevels:
    t1, t2, a = res.self_coupling_in, res.self_coupling_drop, res.round_trip_amplitude
    thru_on, drop_on = transfer_at_phase(t1, t2, a, 0.0)
    thru_off, drop_off = transfer_at_phase(t1, t2, a, np.pi)
    return SwitchLevels(float(db(drop_on)), float(db(thru_on)),
                        float(db(thru_off)), float(db(drop_off)))


# Calibration works on symmetric rings (t1 = t2 = t) with a strictly lossy
# round trip; a lossless ring trivially has a 0 dB drop and is excluded.
_T_RANGE = (0.5, 0.999)
_A_RANGE = (0.9, 1.0 - 1e-6)
DESIGN_MARGIN_DB = 0.5
OFF_THRU_TOLERANCE_DB = 0.05


def _solve_amplitude(t: float, drop_target: float) -> float | None:
    """Round-trip amplitude giving on-resonance drop ratio ``drop_target``."""
    x = t * t

    def drop(a):
        return (1 - x) ** 2 * a / (1 - x * a) ** 2

    lo, hi = _A_RANGE
    if drop(hi) < drop_target or drop(lo) > drop_target:
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if drop(mid) < drop_target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return 0.5 * (lo + hi)


def _margins(t: float, a: float, targets: SwitchLossModel) -> tuple[float, float, float]:
    _, thru_on, thru_off, drop_off = switch_levels(
        AddDropResonator(t, t, a, 1.0))
    return (-thru_on - targets.thru_on_isolation_db - DESIGN_MARGIN_DB,
            -drop_off - targets.drop_off_isolation_db - DESIGN_MARGIN_DB,
            thru_off + targets.thru_off_db + OFF_THRU_TOLERANCE_DB)


def calibrate_switch(loss_targets: SwitchLossModel = SwitchLossModel(),
                     fsr_target: float = 100e9,
                     group_index: float = DEFAULT_GROUP_INDEX) -> AddDropResonator:
    """Fit a symmetric add-drop ring to the switch loss levels and FSR.

    The on-resonance drop is pinned exactly to ``-drop_on_db`` by bisection on
    the round-trip amplitude. Among self-couplings that then keep both
    isolations ``DESIGN_MARGIN_DB`` past target and the off-state through
    loss within tolerance, the weakest (broadest passband) is chosen: a grid
    scan brackets it and bisection refines it.
    """
    drop_target = 10 ** (-loss_targets.drop_on_db / 10)
    ts = np.linspace(*_T_RANGE, 500)
    best = -math.inf
    prev_t = None
    chosen = None
    for t in ts:
        a = _solve_amplitude(float(t), drop_target)
        if a is None:
            # shortfall of the closest reachable on-resonance drop
            x = float(t) ** 2
            reach = [float(db((1 - x) ** 2 * am / (1 - x * am) ** 2)) for am in _A_RANGE]
            target_db = -loss_targets.drop_on_db
            best = max(best, -min(abs(target_db - r) for r in reach))
            prev_t = float(t)
            continue
        worst = min(_margins(float(t), a, loss_targets))
        best = max(best, worst)
        if worst >= 0:
            chosen = float(t)
            break
        prev_t = float(t)
    if chosen is None:
        raise CalibrationError("no ring meets the switch loss targets", -best)

    if prev_t is not None:
        lo, hi = prev_t, chosen
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            a = _solve_amplitude(mid, drop_target)
            if a is not None and min(_margins(mid, a, loss_targets)) >= 0:
                hi = mid
            else:
                lo = mid
        chosen = hi
    a = _solve_amplitude(chosen, drop_target)
    length = C_LIGHT / (fsr_target * group_index)
    return AddDropResonator(chosen, chosen, a, length, group_index)


@dataclass(frozen=True)
class WdmCarrierGrid:
    """Comb output grid.

    ``spacing`` is a wavelength step. A grid built with :meth:`from_fsr` is
    equally spaced in frequency instead (``spacing_hz`` set), as comb lines
    follow the source cavity FSR.
    """

    carrier_count: int = 32
    spacing: float = 0.8e-9
    center_wavelength: float = 1550e-9
    power_per_carrier: float = 0.5e-3
    spacing_hz: float | None = None

    def __post_init__(self):
        if self.carrier_count < 1:
            raise ValueError("carrier_count must be >= 1")
        if self.spacing <= 0 or self.power_per_carrier <= 0:
            raise ValueError("spacing and power_per_carrier must be positive")

    @classmethod
    def from_fsr(cls, fsr_hz: float, carrier_count: int = 32,
                 center_wavelength: float = 1550e-9,
                 power_per_carrier: float = 0.5e-3) -> "WdmCarrierGrid":
        spacing = center_wavelength ** 2 * fsr_hz / C_LIGHT
        return cls(carrier_count, spacing, center_wavelength, power_per_carrier, fsr_hz)

    @property
    def total_power(self) -> float:
        return self.carrier_count * self.power_per_carrier


def carrier_wavelengths(grid: WdmCarrierGrid) -> list[float]:
    offsets = np.arange(grid.carrier_count) - (grid.carrier_count - 1) / 2
    if grid.spacing_hz is None:
        return list(grid.center_wavelength + offsets * grid.spacing)
    f0 = C_LIGHT / grid.center_wavelength
    return list(C_LIGHT / (f0 - offsets * grid.spacing_hz))


def trim(res: AddDropResonator, target_resonance: float) -> AddDropResonator:
    """Move the nearest resonance onto ``target_resonance``.

    The offset change is quantized to 10 pm steps. Targets more than one FSR
    from the resonance nearest ``reference_wavelength`` are rejected.
    """
    current = nearest_resonance(res, res.reference_wavelength)
    span = fsr(res, current).wavelength
    if abs(target_resonance - current) > span:
        raise OutOfRangeError(
            f"target {target_resonance * 1e9:.4f} nm is more than one FSR "
            f"({span * 1e9:.4f} nm) from {current * 1e9:.4f} nm")
    shift = target_resonance - nearest_resonance(res, target_resonance)
    delta = shift * (res.reference_wavelength / target_resonance) ** 2
    steps = round(delta / TRIM_STEP)
    return replace(res, resonance_offset=res.resonance_offset + steps * TRIM_STEP)


@dataclass(frozen=True)
class SrnMaterial:
    chi2: float = 0.0
    chi3: float = 12.6e-19
    base_index: float = 3.1
    breakdown_field: float = 1e8
    field_per_volt: float = 3e5

    def __post_init__(self):
        if self.base_index <= 1:
            raise ValueError("base_index must exceed 1")
        if self.breakdown_field <= 0 or self.field_per_volt <= 0:
            raise ValueError("breakdown_field and field_per_volt must be positive")


class DeltaN(NamedTuple):
    dc_chi2: float
    dc_chi3: float
    ac_chi2: float
    ac_chi3: float
    mixed: float

    @property
    def dc_total(self) -> float:
        return self.dc_chi2 + self.dc_chi3

    @property
    def ac_total(self) -> float:
        return self.ac_chi2 + self.ac_chi3 + self.mixed


def delta_n_terms(mat: SrnMaterial, e_dc: float, e_ac: float) -> DeltaN:
    """Index change contributions for collinear DC and AC fields."""
    if not (math.isfinite(e_dc) and math.isfinite(e_ac)):
        raise ValueError("fields must be finite")
    if abs(e_dc) > mat.breakdown_field:
        raise BreakdownError(
            f"DC field {e_dc:.3g} V/m exceeds breakdown {mat.breakdown_field:.3g} V/m")
    n = mat.base_index
    return DeltaN(
        dc_chi2=mat.chi2 * e_dc / n,
        dc_chi3=3 * mat.chi3 * e_dc ** 2 / (2 * n),
        ac_chi2=mat.chi2 * e_ac / n,
        ac_chi3=3 * mat.chi3 * e_ac ** 2 / (2 * n),
        mixed=3 * mat.chi3 * e_ac * e_dc / n,
    )


def dc_field_from_voltage(mat: SrnMaterial, volts: float) -> float:
    if volts < 0:
        raise ValueError("volts must be >= 0")
    return mat.field_per_volt * volts


def breakdown_voltage(mat: SrnMaterial) -> float:
    return mat.breakdown_field / mat.field_per_volt


@dataclass(frozen=True)
class Photodetector:
    responsivity: float = 0.8
    sensitivity_dbm: float = -10.0

    def __post_init__(self):
        if self.responsivity <= 0:
            raise ValueError("responsivity must be positive")


def photocurrent(pd: Photodetector, optical_power: float) -> float:
    if optical_power < 0:
        raise ValueError("optical power must be >= 0")
    return pd.responsivity * optical_power
