"""Command-line entry point: ``encrypt``, ``verify`` and ``metrics``.

Data goes to stdout, diagnostics to stderr. Every failure exits nonzero.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import perf
from . import reference as ref
from .pipeline import CycleSchedule, EngineConfig, ScheduleError, encrypt_many, run_stream


class InputError(ValueError):
    pass


def parse_key(text):
    try:
        return ref.parse_hex_block(text, "key")
    except ValueError as exc:
        raise InputError(f"--key: {exc}") from None


def parse_input(value):
    """``--in`` is a file of hex text or a literal hex string; returns a list of blocks."""
    if os.path.exists(value):
        with open(value) as fh:
            text = fh.read()
        origin = value
    else:
        text = value
        origin = "--in"
    digits = "".join(text.split())
    try:
        data = bytes.fromhex(digits)
    except ValueError:
        raise InputError(f"{origin}: not a hex string") from None
    if len(data) % ref.BLOCK_BYTES:
        raise InputError(f"{origin}: {len(data)} bytes is not a multiple of 16 (no padding is applied)")
    return [data[i:i + 16] for i in range(0, len(data), 16)]


def load_schedule(value):
    if value in (None, "default"):
        return CycleSchedule()
    try:
        return CycleSchedule.load(value)
    except (OSError, ValueError) as exc:
        raise InputError(f"--schedule: {exc}") from None


def cmd_encrypt(args):
    key = parse_key(args.key)
    blocks = parse_input(args.input)
    schedule = load_schedule(args.schedule)
    config = EngineConfig(m2_parallelism=args.m2_par)
    cts, trace = run_stream(blocks, key, schedule, overlap=args.overlap, ii=args.ii, config=config)
    for ct in cts:
        print(ct.hex())
    if args.trace:
        trace.write(args.trace)
    return 0


def cmd_verify(args):
    if args.trials < 1:
        raise InputError("--trials must be >= 1")
    rng = np.random.default_rng(args.seed)
    keys = rng.integers(0, 256, (args.trials, 16), dtype=np.uint8)
    plains = rng.integers(0, 256, (args.trials, 16), dtype=np.uint8)
    sbox = None
    if args.corrupt_sbox:
        bad = bytearray(ref.SBOX)
        bad[args.corrupt_sbox_index] ^= 0x01
        sbox = bytes(bad)
    config = EngineConfig(m2_parallelism=args.m2_par)
    got = encrypt_many(plains, keys, config, sbox=sbox)
    passed = 0
    first_bad = None
    for k, p, c in zip(keys, plains, got):
        want = ref.aes128_encrypt(bytes(p), bytes(k))
        if bytes(c) == want:
            passed += 1
        elif first_bad is None:
            first_bad = (bytes(k), bytes(p), bytes(c), want)
    print(f"{passed}/{args.trials} pass")
    if first_bad is not None:
        k, p, c, want = first_bad
        print(f"divergence: key={k.hex()} plain={p.hex()} imc={c.hex()} reference={want.hex()}",
              file=sys.stderr)
        return 1
    return 0


def cmd_metrics(args):
    try:
        with open(args.params, newline="") as fh:
            rows = perf.read_params(fh)
    except OSError as exc:
        raise InputError(f"--params: {exc}") from None
    records = perf.build_report(rows, check=args.check, tolerance=args.tolerance)
    if args.format == "json":
        print(perf.report_json(records))
    else:
        sys.stdout.write(perf.report_csv(records))
    if args.check:
        flagged = [r for r in records if r["check"] != "ok"]
        for r in flagged:
            for note in r["mismatches"]:
                print(f"mismatch: {r['design']}: {note}", file=sys.stderr)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="aes-imc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encrypt", help="encrypt hex blocks on the crossbar engine")
    enc.add_argument("--key", required=True, help="32 hex digits")
    enc.add_argument("--in", dest="input", required=True, help="hex string or file of hex text")
    enc.add_argument("--trace", help="write the JSON-lines trace here")
    enc.add_argument("--schedule", default="default", help="schedule JSON file or 'default'")
    enc.add_argument("--m2-par", type=int, default=4, help="concurrent M-2 lookups")
    enc.add_argument("--overlap", action="store_true", help="enable block overlap")
    enc.add_argument("--ii", type=int, help="initiation interval in cycles when overlapping")
    enc.set_defaults(func=cmd_encrypt)

    ver = sub.add_parser("verify", help="compare the engine against the reference cipher")
    ver.add_argument("--trials", type=int, default=1000)
    ver.add_argument("--seed", type=int, default=None)
    ver.add_argument("--m2-par", type=int, default=4)
    ver.add_argument("--corrupt-sbox", action="store_true",
                     help="debug: flip one bit of an S-box LUT entry (negative control)")
    ver.add_argument("--corrupt-sbox-index", type=int, default=0x00, help=argparse.SUPPRESS)
    ver.set_defaults(func=cmd_verify)

    met = sub.add_parser("metrics", help="throughput/energy report from a parameter CSV")
    met.add_argument("--params", required=True)
    met.add_argument("--check", action="store_true", help="compare against printed columns")
    met.add_argument("--tolerance", type=float, default=perf.DEFAULT_TOLERANCE)
    met.add_argument("--format", choices=("csv", "json"), default="csv")
    met.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ScheduleError, perf.ParamsFileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
