"""Cycle-level controller for the two-unit engine.

The controller walks a fixed slot sequence (load, initial AddRoundKey, ten
rounds, store). A :class:`CycleSchedule` says how many cycles each stage
takes and which adjacent stages share a slot. Timing never feeds back into
the data path: the same operations run in the same order under every
schedule, only the cycle stamps in the trace move.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import reference as ref
from .transforms import (
    ExchangeChannel,
    ImcUnit,
    addroundkey_step,
    mixcolumn_step,
    post_crossing,
    shiftrow_step,
    subbyte_step,
)

STAGES = ("load", "addroundkey", "subbyte", "shiftrow", "mixcolumn", "store")
ROUND_STAGES = ("subbyte", "shiftrow", "mixcolumn", "addroundkey")
DEFAULT_COSTS = {"load": 2, "addroundkey": 1, "subbyte": 1, "shiftrow": 1, "mixcolumn": 1, "store": 3}
DEFAULT_FUSED = (("subbyte", "shiftrow"), ("mixcolumn", "addroundkey"))
DEFAULT_LATENCY = 26


class ScheduleError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


@dataclass(frozen=True)
class Slot:
    round: int
    stages: tuple
    cycles: int


@dataclass(frozen=True)
class CycleSchedule:
    """Per-stage cycle costs plus which adjacent round stages share a slot.

    A fused slot lasts as long as its slowest stage. ``exchange_cycles`` is
    the cost of the cross-unit link and is added to ShiftRows.
    ``declared_total`` is optional and, when given, must match the
    structural sum.
    """

    stage_costs: dict = field(default_factory=lambda: dict(DEFAULT_COSTS))
    fused: tuple = DEFAULT_FUSED
    exchange_cycles: int = 0
    declared_total: int | None = None

    def cost(self, stage):
        c = self.stage_costs[stage]
        return c + self.exchange_cycles if stage == "shiftrow" else c

    def slots(self) -> list[Slot]:
        fused = {tuple(p) for p in self.fused}
        out = [Slot(0, ("load",), self.cost("load")), Slot(0, ("addroundkey",), self.cost("addroundkey"))]
        for rnd in range(1, ref.N_ROUNDS + 1):
            seq = [s for s in ROUND_STAGES if not (rnd == ref.N_ROUNDS and s == "mixcolumn")]
            groups = [[seq[0]]]
            for prev, cur in zip(seq, seq[1:]):
                if (prev, cur) in fused:
                    groups[-1].append(cur)
                else:
                    groups.append([cur])
            out += [Slot(rnd, tuple(g), max(self.cost(s) for s in g)) for g in groups]
        out.append(Slot(ref.N_ROUNDS, ("store",), self.cost("store")))
        return out

    @property
    def total_latency(self) -> int:
        return sum(s.cycles for s in self.slots())

    # -- file format -----------------------------------------------------------

    def to_dict(self):
        d = {"stage_costs": dict(self.stage_costs), "fused": [list(p) for p in self.fused],
             "exchange_cycles": self.exchange_cycles}
        if self.declared_total is not None:
            d["total_latency"] = self.declared_total
        return d

    @classmethod
    def from_dict(cls, d):
        costs = dict(DEFAULT_COSTS)
        costs.update(d.get("stage_costs", {}))
        return cls(
            stage_costs=costs,
            fused=tuple(tuple(p) for p in d.get("fused", DEFAULT_FUSED)),
            exchange_cycles=d.get("exchange_cycles", 0),
            declared_total=d.get("total_latency"),
        )

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def validate_schedule(schedule: CycleSchedule) -> list[str]:
    """Return a list of violated constraints; an empty list means the schedule is usable."""
    diags = []
    costs = schedule.stage_costs
    for stage in STAGES:
        if stage not in costs:
            diags.append(f"missing cost for stage {stage!r}")
    for stage, c in costs.items():
        if stage not in STAGES:
            diags.append(f"unknown stage {stage!r}")
        elif isinstance(c, bool) or not isinstance(c, (int, np.integer)) or c < 1:
            diags.append(f"stage {stage!r} cost must be an integer >= 1, got {c!r}")
    ex = schedule.exchange_cycles
    if isinstance(ex, bool) or not isinstance(ex, (int, np.integer)) or ex < 0:
        diags.append(f"exchange_cycles must be an integer >= 0, got {ex!r}")
    adjacent = set(zip(ROUND_STAGES, ROUND_STAGES[1:]))
    for pair in schedule.fused:
        if tuple(pair) not in adjacent:
            diags.append(f"cannot fuse {tuple(pair)}: stages are not adjacent within a round")
    if diags:
        return diags
    total = schedule.total_latency
    if schedule.declared_total is not None and schedule.declared_total != total:
        diags.append(f"declared total {schedule.declared_total} != structural sum {total}")
    return diags


# -- trace ---------------------------------------------------------------------

@dataclass(frozen=True)
class TraceEvent:
    cycle: int
    unit: str
    stage: str
    detail: dict

    def to_json(self) -> str:
        return json.dumps({"cycle": self.cycle, "unit": self.unit, "stage": self.stage,
                           "detail": self.detail}, separators=(",", ":"))


@dataclass(frozen=True)
class BlockSpan:
    block: int
    start: int
    end: int

    @property
    def latency(self):
        return self.end - self.start


@dataclass
class TraceLog:
    events: list = field(default_factory=list)
    per_block: list = field(default_factory=list)

    @property
    def makespan(self) -> int:
        return max((b.end for b in self.per_block), default=0)

    def lines(self):
        return [e.to_json() for e in self.events]

    def write(self, path):
        with open(path, "w") as fh:
            for line in self.lines():
                fh.write(line + "\n")


# -- engine --------------------------------------------------------------------

@dataclass(frozen=True)
class EngineConfig:
    rows: int = 64
    cols: int = 32
    m2_parallelism: int = 4
    unit_columns: tuple = ((0, 1), (2, 3))
    exchange: bool = True

    def __post_init__(self):
        cols = sorted(c for pair in self.unit_columns for c in pair)
        if len(self.unit_columns) != 2 or cols != [0, 1, 2, 3]:
            raise ValueError(f"unit_columns must split columns 0..3 into two pairs, got {self.unit_columns}")


class ImcEngine:
    """Two 64-bit units plus the controller that sequences them.

    ``lanes`` independent engine copies run in lock step; each lane may hold
    its own key and block.
    """

    def __init__(self, config: EngineConfig | None = None, lanes=1):
        self.config = config or EngineConfig()
        self.lanes = lanes
        self.units = [
            ImcUnit(name, cols, self.config.rows, self.config.cols, lanes,
                    m2_parallelism=self.config.m2_parallelism)
            for name, cols in zip("AB", self.config.unit_columns)
        ]
        for u in self.units:
            u.program_luts()

    def program_luts(self, sbox=ref.SBOX, m2=ref.M2):
        for u in self.units:
            u.program_luts(sbox, m2)

    def load_keys(self, round_keys):
        for u in self.units:
            u.load_round_keys(round_keys)

    def load_state(self, state):
        return {u.name: u.load_state(state) for u in self.units}

    def read_state(self) -> np.ndarray:
        state = np.empty((self.lanes, 4, 4), dtype=np.uint8)
        for u in self.units:
            state[:, :, list(u.state_cols)] = u.read_state()
        return state

    def _exchange(self):
        return ExchangeChannel() if self.config.exchange else None

    def _run_stage(self, stage, rnd):
        if stage == "addroundkey":
            return [addroundkey_step(u, rnd) for u in self.units]
        if stage == "subbyte":
            return [subbyte_step(u, hold=True) for u in self.units]
        if stage == "shiftrow":
            link = self._exchange()
            if link is not None:
                for u in self.units:
                    post_crossing(u, link)
            return [shiftrow_step(u, link) for u in self.units]
        if stage == "mixcolumn":
            return [mixcolumn_step(u) for u in self.units]
        raise ValueError(stage)

    def encrypt(self, plains, schedule: CycleSchedule | None = None):
        """Encrypt one block per lane with the resident round keys.

        Returns ``(ciphertexts (lanes, 16), events)`` where events carry
        cycles relative to the block's start.
        """
        schedule = schedule or CycleSchedule()
        plains = np.asarray(plains, dtype=np.uint8).reshape(self.lanes, 16)
        state = plains.reshape(self.lanes, 4, 4).transpose(0, 2, 1)
        events = []
        cycle = 0
        out = None
        for slot in schedule.slots():
            for stage in slot.stages:
                if stage == "load":
                    writes = self.load_state(state)
                    events += [TraceEvent(cycle, u.name, "load",
                                          {"operation": "load", "rows": list(u.layout.data_rows),
                                           "writes": writes[u.name]}) for u in self.units]
                elif stage == "store":
                    out = self.read_state().transpose(0, 2, 1).reshape(self.lanes, 16)
                    events += [TraceEvent(cycle, u.name, "store",
                                          {"operation": "store", "rows": list(u.layout.data_rows),
                                           "writes": 0}) for u in self.units]
                else:
                    for u, rep in zip(self.units, self._run_stage(stage, slot.round)):
                        d = {"round": slot.round}
                        d.update(rep.detail())
                        events.append(TraceEvent(cycle, u.name, stage, d))
            cycle += slot.cycles
        return out, events


def _check_schedule(schedule):
    diags = validate_schedule(schedule)
    if diags:
        raise ScheduleError(diags)


def encrypt_block_imc(plain, key, config: EngineConfig | None = None,
                      schedule: CycleSchedule | None = None):
    """Encrypt a single 16-byte block on the crossbar engine.

    ``key`` is either the 16-byte cipher key or an already expanded list of
    11 round keys.
    """
    schedule = schedule or CycleSchedule()
    _check_schedule(schedule)
    plain = bytes(plain)
    if len(plain) != ref.BLOCK_BYTES:
        raise ref.BlockLengthError(f"plaintext must be 16 bytes, got {len(plain)}")
    round_keys = ref.expand_key(key) if len(key) == ref.BLOCK_BYTES else list(key)
    engine = ImcEngine(config)
    engine.load_keys([list(k) for k in round_keys])
    ct, events = engine.encrypt(np.frombuffer(plain, dtype=np.uint8), schedule)
    for e in events:
        e.detail["block"] = 0
    log = TraceLog(events, [BlockSpan(0, 0, schedule.total_latency)])
    return bytes(ct[0]), log


def encrypt_many(plains, keys, config: EngineConfig | None = None,
                 schedule: CycleSchedule | None = None, batch=4096, sbox=None):
    """Encrypt ``plains[i]`` under ``keys[i]`` using lock-stepped engine lanes.

    ``sbox`` overrides the S-box programmed into the LUT rows (negative controls).
    """
    plains = np.asarray(plains, dtype=np.uint8).reshape(-1, 16)
    keys = np.asarray(keys, dtype=np.uint8).reshape(-1, 16)
    if len(plains) != len(keys):
        raise ValueError("need one key per plaintext")
    out = np.empty_like(plains)
    for lo in range(0, len(plains), batch):
        hi = min(lo + batch, len(plains))
        engine = ImcEngine(config, lanes=hi - lo)
        if sbox is not None:
            engine.program_luts(sbox=sbox)
        rks = np.array([[list(k) for k in ref.expand_key(bytes(key))] for key in keys[lo:hi]],
                       dtype=np.uint8)
        engine.load_keys(rks)
        out[lo:hi], _ = engine.encrypt(plains[lo:hi], schedule)
    return out


def run_stream(blocks, key, schedule: CycleSchedule | None = None, overlap=False, ii=None,
               config: EngineConfig | None = None):
    """Encrypt a stream of blocks under one key and build the timed trace.

    With ``overlap`` off, block ``i`` starts when block ``i-1`` finishes.
    With it on, blocks start every ``ii`` cycles (default: the full latency,
    i.e. no overlap); this is an analytic initiation-interval model.
    """
    schedule = schedule or CycleSchedule()
    _check_schedule(schedule)
    blocks = [bytes(b) for b in blocks]
    for i, b in enumerate(blocks):
        if len(b) != ref.BLOCK_BYTES:
            raise ref.BlockLengthError(f"block {i} has {len(b)} bytes, expected 16")
    latency = schedule.total_latency
    interval = latency
    if overlap and ii is not None:
        if ii < 1:
            raise ScheduleError([f"initiation interval must be >= 1, got {ii}"])
        interval = ii
    if not blocks:
        return [], TraceLog()

    round_keys = [list(k) for k in ref.expand_key(key)]
    engine = ImcEngine(config, lanes=len(blocks))
    engine.load_keys(round_keys)
    ct, rel_events = engine.encrypt(np.frombuffer(b"".join(blocks), dtype=np.uint8), schedule)

    events, spans = [], []
    for i in range(len(blocks)):
        start = i * interval
        spans.append(BlockSpan(i, start, start + latency))
        for e in rel_events:
            detail = {"block": i}
            detail.update(e.detail)
            events.append(TraceEvent(start + e.cycle, e.unit, e.stage, detail))
    events.sort(key=lambda e: e.cycle)  # stable: block order kept within a cycle
    return [bytes(c) for c in ct], TraceLog(events, spans)
