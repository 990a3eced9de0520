"""Behavioural simulator of an AES-128 engine built from memristor crossbars.

Two 64-bit units hold the cipher state in 4-bit multi-level cells and run
AddRoundKey, SubBytes, ShiftRows and MixColumns as in-array operations.
A small analytic model turns latency, clock and power into throughput and
energy figures.
"""

from .crossbar import CrossbarArray, RowBuffer, SenseAmpBank, SummingAmp
from .perf import PerfParams, PerfReport, aggregate_dpr, energy_per_block, throughput, throughput_rf
from .pipeline import (
    CycleSchedule,
    EngineConfig,
    ImcEngine,
    TraceLog,
    encrypt_block_imc,
    encrypt_many,
    run_stream,
    validate_schedule,
)
from .reference import aes128_encrypt, expand_key, gen_m2, gen_sbox

__all__ = [
    "CrossbarArray", "RowBuffer", "SenseAmpBank", "SummingAmp",
    "PerfParams", "PerfReport", "aggregate_dpr", "energy_per_block", "throughput", "throughput_rf",
    "CycleSchedule", "EngineConfig", "ImcEngine", "TraceLog", "encrypt_block_imc", "encrypt_many",
    "run_stream", "validate_schedule",
    "aes128_encrypt", "expand_key", "gen_m2", "gen_sbox",
]
