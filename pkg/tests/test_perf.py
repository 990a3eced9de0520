import io
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aes_imc import perf
from aes_imc.perf import PerfParams

MBPS = 1e6

pos = st.floats(1e-3, 1e12, allow_nan=False, allow_infinity=False)


def params(f_max=108.9e6, latency=26, power=0.098, b=128, f_rf=perf.F_RF):
    return PerfParams(f_max=f_max, b_size=b, latency=latency, power=power, f_rf=f_rf)


@pytest.mark.parametrize("f_max, latency, want", [
    (108.9e6, 26, 536.12),   # Table I, AES-IMC
    (60.94e6, 26, 300.01),   # Table I, Vertex II
    (96.04e6, 26, 472.81),   # Table I, Vertex V
    (220e6, 10, 2816.0),     # Table I, XCZU9EG
])
def test_throughput_table_i(f_max, latency, want):
    assert perf.throughput(params(f_max, latency)) / MBPS == pytest.approx(want, abs=0.01)


def test_throughput_trivial():
    assert perf.throughput(PerfParams(f_max=1, b_size=128, latency=128)) == 1.0


@pytest.mark.parametrize("latency, want", [(26, 66.76), (59, 29.41), (10, 173.56)])
def test_throughput_rf(latency, want):
    assert perf.throughput_rf(params(latency=latency)) / MBPS == pytest.approx(want, abs=0.01)


def test_throughput_rf_equals_thr_at_same_clock():
    p = params(f_max=perf.F_RF)
    assert perf.throughput_rf(p) == perf.throughput(p)


def test_zero_latency_domain_error():
    with pytest.raises(perf.DomainError):
        perf.throughput(params(latency=0))
    with pytest.raises(perf.DomainError):
        perf.throughput_rf(params(latency=0))
    with pytest.raises(perf.DomainError):
        perf.energy_per_block(params(f_rf=0))
    with pytest.raises(perf.DomainError):
        params(f_max=-1)


def test_energy_row_17():
    assert perf.energy_per_block(params(power=0.261, latency=1000)) * 1e6 == pytest.approx(19.247, abs=0.01)


def test_energy_aes_imc_block():
    assert perf.energy_per_block(params()) * 1e6 == pytest.approx(0.18, abs=0.01)


def test_zero_power_zero_energy():
    assert perf.energy_per_block(params(power=0)) == 0


def test_energy_per_bit_is_block_over_size():
    p = params()
    assert perf.energy_per_bit(p) == perf.energy_per_block(p) / 128


def test_table_iv_throughput():
    rep = perf.table_iv_row(params(f_max=30e6))
    assert rep.thr / MBPS == pytest.approx(147.6, abs=0.1)
    assert rep.thr == rep.thr_rf


def test_table_iv_cmos_latency():
    assert perf.table_iv_row(params(f_max=30e6, latency=336)).thr / MBPS == pytest.approx(11.43, abs=0.005)


def test_table_iv_wrong_clock():
    with pytest.raises(perf.DomainError):
        perf.table_iv_row(params())


def test_aggregate_dpr():
    one = perf.aggregate_dpr(147.6e6, 1)
    assert one == 147.6e6 / 8
    assert perf.aggregate_dpr(147.6e6, 2) == 2 * one
    n = perf.engines_for_dpr(445e9, 147.6e6)
    assert n == math.ceil(445e9 * 8 / 147.6e6) == 24120
    assert perf.aggregate_dpr(147.6e6, n) >= 445e9 > perf.aggregate_dpr(147.6e6, n - 1)
    with pytest.raises(perf.DomainError):
        perf.aggregate_dpr(1.0, 0)


# -- properties -------------------------------------------------------------------

@given(pos, pos, st.integers(1, 10_000), pos, pos)
def test_rf_is_thr_at_rf_clock(f_max, b, latency, power, f_rf):
    p = PerfParams(f_max, b, latency, power, f_rf)
    q = PerfParams(f_rf, b, latency, power, f_rf)
    assert perf.throughput_rf(p) == perf.throughput(q)
    rep = perf.evaluate(p)
    assert rep.thr / rep.thr_rf == pytest.approx(f_max / f_rf, rel=1e-12)
    assert rep.energy_per_bit == rep.energy_per_block / b


@given(pos, st.integers(1, 10_000), pos)
def test_scaling(f_max, latency, power):
    p = PerfParams(f_max, 128, latency, power)
    fast = PerfParams(2 * f_max, 128, latency, power)
    slow = PerfParams(f_max, 128, 2 * latency, power)
    assert perf.throughput(fast) == pytest.approx(2 * perf.throughput(p), rel=1e-12)
    assert perf.throughput(slow) == pytest.approx(perf.throughput(p) / 2, rel=1e-12)
    assert perf.energy_per_block(slow) == pytest.approx(2 * perf.energy_per_block(p), rel=1e-12)


# -- published tables -------------------------------------------------------------

def aes_imc_rows(table):
    return [r for r in perf.load_reported_designs()
            if r.design == "AES-IMC" and r.metadata["table"] == table]


@pytest.mark.parametrize("table", ["I", "III"])
def test_aes_imc_rows_round_trip(table):
    """Printed AES-IMC values of Tables I and III must back-compute within 0.5 %."""
    (row,) = aes_imc_rows(table)
    assert perf.check_row(row, tolerance=0.005) == []


def test_table_iv_energy_flagged():
    (row,) = aes_imc_rows("IV")
    notes = perf.check_row(row)
    assert len(notes) == 1 and notes[0].startswith("e_j")


def test_other_table_i_rows_reproduce():
    rows = [r for r in perf.load_reported_designs() if r.metadata["table"] == "I"]
    assert len(rows) == 8
    assert all(perf.check_row(r) == [] for r in rows)


# -- CSV ----------------------------------------------------------------------------

HEADER = "design,f_max_hz,l_cycles,b_bits,p_w,thr_bps,thr_rf_bps,e_j,e_per_bit_j\n"


def test_read_params_minimal():
    rows = perf.read_params(io.StringIO(HEADER + "x,108.9e6,26,128,,,,,\n"))
    assert len(rows) == 1 and not rows[0].has_power
    rec = perf.build_report(rows)[0]
    assert rec["e_j"] is None
    assert rec["thr_bps"] / MBPS == pytest.approx(536.12, abs=0.01)


def test_read_params_empty():
    assert perf.read_params(io.StringIO("")) == []
    assert perf.read_params(io.StringIO(HEADER)) == []


@pytest.mark.parametrize("body, line", [
    ("x,abc,26,128,,,,,\n", 2),
    ("ok,1e6,26,128,,,,,\nx,1e6,,128,,,,,\n", 3),
    ("x,1e6,0,128,,,,,\n", 2),
    ("x,1e6,26,128,,,,,,extra\n", 2),
])
def test_read_params_errors_name_line(body, line):
    with pytest.raises(perf.ParamsFileError, match=f"line {line}"):
        perf.read_params(io.StringIO(HEADER + body))


def test_metadata_echoed():
    text = "design,f_max_hz,l_cycles,b_bits,lut\nx,1e6,26,128,2836\n"
    out = perf.report_csv(perf.build_report(perf.read_params(io.StringIO(text))))
    header, row = out.splitlines()
    assert header.split(",")[:9] == HEADER.strip().split(",")
    assert header.endswith("lut") and row.endswith("2836")


def test_report_csv_empty():
    assert perf.report_csv([]) == HEADER
