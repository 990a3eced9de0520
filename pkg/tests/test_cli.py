import json
import subprocess
import sys

import pytest

from aes_imc import reference as ref
from aes_imc.cli import main

from conftest import FIPS_CIPHER, FIPS_KEY, FIPS_PLAIN

KEY = FIPS_KEY.hex()
PLAIN = FIPS_PLAIN.hex()

HEADER = "design,f_max_hz,l_cycles,b_bits,p_w,thr_bps,thr_rf_bps,e_j,e_per_bit_j\n"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- encrypt ------------------------------------------------------------------------

def test_encrypt_fips(capsys):
    code, out, err = run(capsys, "encrypt", "--key", KEY, "--in", PLAIN)
    assert (code, out, err) == (0, FIPS_CIPHER + "\n", "")


def test_encrypt_empty_file(capsys, tmp_path):
    f = tmp_path / "empty.hex"
    f.write_text("")
    assert run(capsys, "encrypt", "--key", KEY, "--in", str(f)) == (0, "", "")


def test_encrypt_three_blocks_with_trace(capsys, tmp_path):
    blocks = [bytes([i]) * 16 for i in range(3)]
    f = tmp_path / "in.hex"
    f.write_text("\n".join(b.hex() for b in blocks) + "\n")
    trace = tmp_path / "trace.jsonl"
    code, out, _ = run(capsys, "encrypt", "--key", KEY, "--in", str(f), "--trace", str(trace))
    assert code == 0
    assert out.splitlines() == [ref.aes128_encrypt(b, FIPS_KEY).hex() for b in blocks]
    events = [json.loads(line) for line in trace.read_text().splitlines()]
    assert {e["detail"]["block"] for e in events} == {0, 1, 2}
    assert max(e["cycle"] for e in events) == 2 * 26 + 23


def test_encrypt_schedule_file(capsys, tmp_path):
    sched = tmp_path / "s.json"
    sched.write_text(json.dumps({"stage_costs": {"mixcolumn": 4}, "fused": []}))
    trace = tmp_path / "t.jsonl"
    code, out, _ = run(capsys, "encrypt", "--key", KEY, "--in", PLAIN, "--schedule", str(sched),
                       "--m2-par", "1", "--trace", str(trace))
    assert (code, out.strip()) == (0, FIPS_CIPHER)
    last = json.loads(trace.read_text().splitlines()[-1])
    assert last["stage"] == "store" and last["cycle"] == 2 + 11 + 10 + 10 + 36


def test_encrypt_overlap(capsys, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, out, _ = run(capsys, "encrypt", "--key", KEY, "--in", PLAIN * 4, "--overlap", "--ii", "5",
                       "--trace", str(trace))
    assert code == 0 and out.splitlines() == [FIPS_CIPHER] * 4
    starts = {json.loads(x)["detail"]["block"]: json.loads(x)["cycle"]
              for x in reversed(trace.read_text().splitlines())}
    assert starts == {0: 0, 1: 5, 2: 10, 3: 15}


@pytest.mark.parametrize("argv, needle", [
    (["--key", "0011", "--in", PLAIN], "--key"),
    (["--key", "zz" * 16, "--in", PLAIN], "--key"),
    (["--key", KEY, "--in", PLAIN[:-2]], "multiple of 16"),
    (["--key", KEY, "--in", "xyz"], "not a hex"),
    (["--key", KEY, "--in", PLAIN, "--schedule", "/nonexistent.json"], "--schedule"),
])
def test_encrypt_errors(capsys, argv, needle):
    code, out, err = run(capsys, "encrypt", *argv)
    assert code != 0 and out == ""
    assert needle in err


def test_invalid_schedule_reports_diagnostic(capsys, tmp_path):
    sched = tmp_path / "s.json"
    sched.write_text(json.dumps({"stage_costs": {"mixcolumn": 0}}))
    code, out, err = run(capsys, "encrypt", "--key", KEY, "--in", PLAIN, "--schedule", str(sched))
    assert code != 0 and out == "" and "mixcolumn" in err


# -- verify -------------------------------------------------------------------------

def test_verify_one(capsys):
    assert run(capsys, "verify", "--trials", "1", "--seed", "3") == (0, "1/1 pass\n", "")


def test_verify_deterministic(capsys):
    a = run(capsys, "verify", "--trials", "20", "--seed", "9")
    b = run(capsys, "verify", "--trials", "20", "--seed", "9")
    assert a == b == (0, "20/20 pass\n", "")


def test_verify_corrupt_sbox(capsys):
    code, out, err = run(capsys, "verify", "--trials", "50", "--seed", "1", "--corrupt-sbox")
    assert code != 0
    passed, total = out.strip().split()[0].split("/")
    assert int(passed) < int(total) == 50
    assert err.startswith("divergence: key=")


def test_verify_rejects_zero_trials(capsys):
    code, _, err = run(capsys, "verify", "--trials", "0")
    assert code != 0 and "--trials" in err


# -- metrics ------------------------------------------------------------------------

def test_metrics_table_rows(capsys, tmp_path):
    f = tmp_path / "p.csv"
    f.write_text(HEADER + "AES-IMC,108.9e6,26,128,0.098,,,,\n")
    code, out, _ = run(capsys, "metrics", "--params", str(f), "--format", "json")
    assert code == 0
    (rec,) = json.loads(out)
    assert rec["thr_bps"] / 1e6 == pytest.approx(536.12, abs=0.01)
    assert rec["thr_rf_bps"] / 1e6 == pytest.approx(66.76, abs=0.01)
    assert rec["e_j"] * 1e6 == pytest.approx(0.18, abs=0.01)


def test_metrics_empty_file(capsys, tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("")
    code, out, err = run(capsys, "metrics", "--params", str(f))
    assert code == 0 and out.strip() == HEADER.strip() and err == ""


def test_metrics_malformed_row(capsys, tmp_path):
    f = tmp_path / "p.csv"
    f.write_text(HEADER + "a,1e6,26,128,,,,,\nb,oops,26,128,,,,,\n")
    code, out, err = run(capsys, "metrics", "--params", str(f))
    assert code != 0 and out == "" and "line 3" in err


def test_metrics_check_flags(capsys, tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("design,f_max_hz,l_cycles,b_bits,p_w,f_rf_hz,thr_bps,e_j\n"
                 "AES-IMC,30e6,26,128,0.098,30e6,147.6e6,0.9e-9\n")
    code, out, err = run(capsys, "metrics", "--params", str(f), "--check")
    assert code == 0
    header, row = out.splitlines()
    assert "check" in header and ",mismatch," in row
    assert "e_j" in err and "thr_bps" not in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "aes_imc", "encrypt", "--key", KEY, "--in", PLAIN],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.strip() == FIPS_CIPHER
