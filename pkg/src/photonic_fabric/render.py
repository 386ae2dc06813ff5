"""Text rendering of reports as human tables, JSON or CSV.

JSON and CSV are byte-stable: keys are sorted or fixed, exact fractions are
emitted as shortest-repr floats, and nothing depends on the environment.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import fields, is_dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable

from .link_budget import LinkBudgetReport
from .traffic import SimReport, SlotRecord


class Format(str, Enum):
    TABLE = "table"
    JSON = "json"
    CSV = "csv"


# field -> (row label, unit, decimals shown in the table)
BUDGET_ROWS = {
    "total_links": ("Total # of data links", "count", 0),
    "total_bumps": ("Total # of micro-bumps for data links", "count", 0),
    "total_wires": ("Total # of {wires} for data links", "count", 0),
    "total_bandwidth_tbps": ("Total data bandwidth per XPU (Tb/s)", "Tb/s", 3),
    "carrier_power_w": ("Total WDM carrier power for data links (W)", "W", 3),
    "total_power_w": ("Total power of data links (W)", "W", 3),
    "total_area_mm2": ("Total area of data links (mm2)", "mm2", 3),
    "energy_pj_per_bit": ("Energy efficiency of data links (pJ/b)", "pJ/b", 2),
    "bw_density_tbps_mm2": ("Bandwidth density of data links (Tb/s/mm2)", "Tb/s/mm2", 2),
    "power_density_w_mm2": ("Power density of data links (W/mm2)", "W/mm2", 2),
    "max_reach_mm": ("Maximum far-off interconnect distance (mm)", "mm", 0),
}

def _plain(value: Any) -> Any:
    """JSON-ready value: fractions become floats, enums their values."""
    if isinstance(value, Fraction):
        return float(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def to_record(report: Any) -> dict[str, Any]:
    if isinstance(report, dict):
        return {k: _plain(v) for k, v in report.items()}
    if is_dataclass(report):
        return {f.name: _plain(getattr(report, f.name)) for f in fields(report)}
    if hasattr(report, "_asdict"):
        return {k: _plain(v) for k, v in report._asdict().items()}
    raise TypeError(f"cannot render {type(report).__name__}")


def _json(record: Any) -> str:
    return json.dumps(record, sort_keys=True, indent=2) + "\n"


def _fmt(value: Any, decimals: int | None = None) -> str:
    if value is None:
        return "-"
    if isinstance(value, Fraction):
        value = float(value)
    if isinstance(value, float):
        if decimals is not None:
            return f"{value:.{decimals}f}"
        return f"{value:.6g}"
    return str(value)


def _budget_table(report: LinkBudgetReport) -> str:
    wires = "WGs" if report.wire_kind == "WG" else "TLs" if report.wire_kind == "TL" else "wires"
    lines = []
    for name, (label, _unit, decimals) in BUDGET_ROWS.items():
        value = getattr(report, name)
        if value is None:
            continue
        lines.append(f"{label.format(wires=wires)}: {_fmt(float(value), decimals)}")
    return "\n".join(lines) + "\n"


def _budget_csv(report: LinkBudgetReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "value", "unit"])
    for name, (_label, unit, _d) in BUDGET_ROWS.items():
        value = getattr(report, name)
        w.writerow([name, _csv_number(value), unit])
    w.writerow(["wire_kind", report.wire_kind, "text"])
    return buf.getvalue()


def _csv_number(value) -> str:
    if value is None:
        return ""
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else repr(float(value))


def _rows_csv(records: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    header = list(records[0])
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    for rec in records:
        w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in rec.items()})
    return buf.getvalue()


def _kv_table(record: dict[str, Any]) -> str:
    width = max((len(k) for k in record), default=0)
    return "".join(f"{k.ljust(width)}  {_fmt(v)}\n" for k, v in record.items())


def render(report: Any, fmt: Format | str = Format.TABLE) -> str:
    """Render a report (or a list of same-typed reports) as text."""
    fmt = Format(fmt)
    if isinstance(report, LinkBudgetReport):
        if fmt is Format.TABLE:
            return _budget_table(report)
        if fmt is Format.CSV:
            return _budget_csv(report)
        return _json(to_record(report))
    if isinstance(report, list):
        records = [to_record(r) for r in report]
        if fmt is Format.JSON:
            return _json(records)
        if not records:
            return ""
        if fmt is Format.CSV:
            return _rows_csv(records)
        return "\n".join(_kv_table(r) for r in records)
    record = to_record(report)
    if fmt is Format.JSON:
        return _json(record)
    if fmt is Format.CSV:
        return _rows_csv([record])
    return _kv_table(record)


def parse_sim_report(text: str) -> SimReport:
    return SimReport(**json.loads(text))


def trace_line(record: SlotRecord) -> str:
    """One allocation-trace JSON line for a slot."""
    return json.dumps({"slot": record.slot, "granted": _plain(list(record.granted)),
                       "denied": _plain(list(record.denied))}, sort_keys=True)


def trace_lines(records: Iterable[SlotRecord]) -> str:
    return "".join(trace_line(r) + "\n" for r in records)
