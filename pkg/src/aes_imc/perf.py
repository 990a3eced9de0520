"""Throughput and energy model.

    Thr  = F_max * B / L
    Thr* = F_RF  * B / L
    E    = P * L / F_RF          (one block)

Units are SI throughout (Hz, bits, W, J). ``Mbps`` means 1e6 bit/s and
``GB/s`` means 1e9 byte/s. Rounding happens only when formatting.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources

F_RF = 13.56e6
TABLE_IV_FREQ = 30e6
DEFAULT_TOLERANCE = 0.005

CSV_FIELDS = ("design", "f_max_hz", "l_cycles", "b_bits", "p_w",
              "thr_bps", "thr_rf_bps", "e_j", "e_per_bit_j")
EXPECTED_FIELDS = ("thr_bps", "thr_rf_bps", "e_j", "e_per_bit_j")
OPTIONAL_INPUTS = ("f_rf_hz",)


class DomainError(ValueError):
    pass


class ParamsFileError(ValueError):
    pass


@dataclass(frozen=True)
class PerfParams:
    f_max: float
    b_size: float
    latency: float
    power: float = 0.0
    f_rf: float = F_RF

    def __post_init__(self):
        for name in ("f_max", "b_size", "latency", "power", "f_rf"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise DomainError(f"{name} must be finite and non-negative, got {v!r}")


@dataclass(frozen=True)
class PerfReport:
    thr: float
    thr_rf: float
    energy_per_block: float
    energy_per_bit: float


def throughput(p: PerfParams) -> float:
    if p.latency == 0:
        raise DomainError("latency must be > 0")
    return p.f_max * p.b_size / p.latency


def throughput_rf(p: PerfParams) -> float:
    if p.latency == 0:
        raise DomainError("latency must be > 0")
    return p.f_rf * p.b_size / p.latency


def energy_per_block(p: PerfParams) -> float:
    if p.f_rf == 0:
        raise DomainError("f_rf must be > 0")
    return p.power * p.latency / p.f_rf


def energy_per_bit(p: PerfParams) -> float:
    if p.b_size == 0:
        raise DomainError("b_size must be > 0")
    return energy_per_block(p) / p.b_size


def evaluate(p: PerfParams) -> PerfReport:
    return PerfReport(throughput(p), throughput_rf(p), energy_per_block(p), energy_per_bit(p))


def table_iv_row(p: PerfParams) -> PerfReport:
    """Single-engine row of the 30 MHz technology comparison.

    That comparison runs everything at one clock, so the energy term uses
    ``f_max`` as its frequency too.
    """
    if p.f_max != TABLE_IV_FREQ:
        raise DomainError(f"technology comparison is evaluated at {TABLE_IV_FREQ:g} Hz, got {p.f_max:g}")
    return evaluate(replace(p, f_rf=p.f_max))


def aggregate_dpr(per_engine_thr: float, n_engines: int) -> float:
    """Aggregate data processing rate of ``n_engines`` identical engines, in bytes/s."""
    if n_engines < 1:
        raise DomainError("n_engines must be >= 1")
    return n_engines * per_engine_thr / 8


def engines_for_dpr(target_bytes_per_s: float, per_engine_thr: float) -> int:
    return math.ceil(target_bytes_per_s * 8 / per_engine_thr)


# -- parameter files and reports -------------------------------------------------

@dataclass
class DesignRow:
    design: str
    params: PerfParams
    has_power: bool
    expected: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    line: int = 0


def _num(text, name, line, required=True):
    text = (text or "").strip()
    if not text:
        if required:
            raise ParamsFileError(f"line {line}: missing value for {name}")
        return None
    try:
        return float(text)
    except ValueError:
        raise ParamsFileError(f"line {line}: {name} is not a number: {text!r}") from None


def read_params(stream) -> list[DesignRow]:
    """Parse a parameter CSV.

    Required columns: design, f_max_hz, l_cycles, b_bits. ``p_w`` may be
    blank (no energy figures). The four result columns, when filled, are
    the printed values used by :func:`check_row`. ``f_rf_hz`` overrides
    the 13.56 MHz reference clock. Any other column is carried through
    untouched.
    """
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        return []
    missing = [c for c in ("design", "f_max_hz", "l_cycles", "b_bits") if c not in reader.fieldnames]
    if missing:
        raise ParamsFileError(f"line 1: missing columns {missing}")
    rows = []
    for rec in reader:
        line = reader.line_num
        if None in rec:
            raise ParamsFileError(f"line {line}: more fields than header columns")
        power = _num(rec.get("p_w"), "p_w", line, required=False)
        f_rf = _num(rec.get("f_rf_hz"), "f_rf_hz", line, required=False)
        try:
            params = PerfParams(
                f_max=_num(rec["f_max_hz"], "f_max_hz", line),
                b_size=_num(rec["b_bits"], "b_bits", line),
                latency=_num(rec["l_cycles"], "l_cycles", line),
                power=power or 0.0,
                f_rf=F_RF if f_rf is None else f_rf,
            )
        except DomainError as exc:
            raise ParamsFileError(f"line {line}: {exc}") from None
        if params.latency == 0 or params.f_rf == 0 or params.b_size == 0:
            raise ParamsFileError(f"line {line}: l_cycles, b_bits and f_rf_hz must be > 0")
        expected = {}
        for name in EXPECTED_FIELDS:
            v = _num(rec.get(name), name, line, required=False)
            if v is not None:
                expected[name] = v
        known = set(CSV_FIELDS) | set(OPTIONAL_INPUTS)
        meta = {k: v for k, v in rec.items() if k not in known}
        rows.append(DesignRow(rec["design"], params, power is not None, expected, meta, line))
    return rows


def load_reported_designs() -> list[DesignRow]:
    """The published comparison rows bundled with the package."""
    text = resources.files("aes_imc").joinpath("data/reported_designs.csv").read_text()
    return read_params(io.StringIO(text))


def row_values(row: DesignRow) -> dict:
    rep = evaluate(row.params)
    out = {"thr_bps": rep.thr, "thr_rf_bps": rep.thr_rf}
    if row.has_power:
        out["e_j"] = rep.energy_per_block
        out["e_per_bit_j"] = rep.energy_per_bit
    return out


def check_row(row: DesignRow, tolerance=DEFAULT_TOLERANCE) -> list[str]:
    """Compare computed figures with the printed ones; returns mismatch notes."""
    computed = row_values(row)
    notes = []
    for name, printed in row.expected.items():
        if name not in computed:
            notes.append(f"{name}: printed {printed:.6g} but no power given")
            continue
        got = computed[name]
        rel = abs(got - printed) / abs(printed) if printed else abs(got)
        if rel > tolerance:
            notes.append(f"{name}: computed {got:.6g} vs printed {printed:.6g} ({rel:.1%} off)")
    return notes


def build_report(rows, check=False, tolerance=DEFAULT_TOLERANCE) -> list[dict]:
    out = []
    for row in rows:
        p = row.params
        rec = {"design": row.design, "f_max_hz": p.f_max, "l_cycles": p.latency,
               "b_bits": p.b_size, "p_w": p.power if row.has_power else None}
        vals = row_values(row)
        for name in EXPECTED_FIELDS:
            rec[name] = vals.get(name)
        if p.f_rf != F_RF:
            rec["f_rf_hz"] = p.f_rf
        if check:
            notes = check_row(row, tolerance)
            rec["check"] = "ok" if not notes else "mismatch"
            rec["mismatches"] = notes
        rec["metadata"] = dict(row.metadata)
        out.append(rec)
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if not v.is_integer() else str(int(v))
    return str(v)


def report_csv(records) -> str:
    buf = io.StringIO()
    if not records:
        csv.writer(buf, lineterminator="\n").writerow(CSV_FIELDS)
        return buf.getvalue()
    extra = []
    if any("f_rf_hz" in r for r in records):
        extra.append("f_rf_hz")
    if any("check" in r for r in records):
        extra += ["check", "mismatches"]
    meta_keys = sorted({k for r in records for k in r["metadata"]})
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(CSV_FIELDS) + extra + meta_keys)
    for r in records:
        row = [_fmt(r.get(k)) for k in CSV_FIELDS]
        for k in extra:
            v = r.get(k)
            row.append("; ".join(v) if isinstance(v, list) else _fmt(v))
        row += [r["metadata"].get(k, "") for k in meta_keys]
        writer.writerow(row)
    return buf.getvalue()


def report_json(records) -> str:
    return json.dumps(records, indent=2)
