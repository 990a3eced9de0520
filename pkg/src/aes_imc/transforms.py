"""AES round transformations executed as crossbar operations on one 64-bit unit.

A unit owns two of the four state columns. Inside its array:

* data rows: one word line per state row ``r``; the unit's two bytes sit in
  bit lines 0..3 (byte ``j`` -> high nibble at ``2j``, low nibble at ``2j+1``).
* key rows: one word line per round; state row ``r`` of the round-key half
  sits at bit lines ``4r .. 4r+3``.
* LUT rows (S-box, M-2): entry ``x`` lives on word line ``lut_rows[x >> 4]``,
  bit lines ``2*(x & 15)`` and ``2*(x & 15) + 1``. The high nibble decodes
  the word line and the low nibble the column pair.
* buffer rows: scratch rows for MixColumns intermediates.

Amplifier group ``r`` (amps ``4r .. 4r+3``) holds state row ``r`` while a
step keeps values latched across rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .crossbar import (
    CrossbarArray,
    RowBuffer,
    RowClass,
    SenseAmpBank,
    write_back,
)
from .reference import M2, SBOX, N_ROUNDS

STATE_ROWS = 4
UNIT_BYTES_PER_ROW = 2
ROW_NIBBLES = 2 * UNIT_BYTES_PER_ROW
LUT_ROWS = 16
MIXCOLUMN_BUFFER_ROWS = 2


class ConfigurationError(RuntimeError):
    pass


class InterconnectError(RuntimeError):
    pass


class ResourceError(RuntimeError):
    pass


def split_nibbles(values) -> np.ndarray:
    """``(..., n)`` bytes -> ``(..., 2n)`` nibbles, high nibble first."""
    values = np.asarray(values, dtype=np.uint8)
    out = np.empty(values.shape[:-1] + (2 * values.shape[-1],), dtype=np.uint8)
    out[..., 0::2] = values >> 4
    out[..., 1::2] = values & 0x0F
    return out


def join_nibbles(nibbles) -> np.ndarray:
    nibbles = np.asarray(nibbles, dtype=np.uint8)
    return (nibbles[..., 0::2] << 4) | nibbles[..., 1::2]


def _group(r):
    return np.arange(ROW_NIBBLES * r, ROW_NIBBLES * (r + 1))


DATA_COLS = np.arange(ROW_NIBBLES)


@dataclass(frozen=True)
class UnitLayout:
    data_rows: tuple
    key_rows: tuple
    sbox_rows: tuple
    m2_rows: tuple
    buffer_rows: tuple
    m2_parallelism: int = 4

    @classmethod
    def default(cls, rows=64, cols=32, m2_parallelism=4):
        if cols < 2 * LUT_ROWS:
            raise ConfigurationError(f"LUT rows need {2 * LUT_ROWS} bit lines, array has {cols}")
        need = STATE_ROWS + N_ROUNDS + 1 + 2 * LUT_ROWS + MIXCOLUMN_BUFFER_ROWS
        if rows < need:
            raise ConfigurationError(f"layout needs at least {need} word lines, array has {rows}")
        it = iter(range(rows))
        take = lambda n: tuple(next(it) for _ in range(n))  # noqa: E731
        return cls(
            data_rows=take(STATE_ROWS),
            key_rows=take(N_ROUNDS + 1),
            sbox_rows=take(LUT_ROWS),
            m2_rows=take(LUT_ROWS),
            buffer_rows=tuple(it),
            m2_parallelism=m2_parallelism,
        )

    def validate(self, rows, cols):
        groups = [self.data_rows, self.key_rows, self.sbox_rows, self.m2_rows, self.buffer_rows]
        flat = [r for g in groups for r in g]
        if len(flat) != len(set(flat)):
            raise ConfigurationError("row classes overlap")
        if any(not 0 <= r < rows for r in flat):
            raise ConfigurationError("layout row outside the array")
        if len(self.data_rows) != STATE_ROWS or len(self.key_rows) != N_ROUNDS + 1:
            raise ConfigurationError("need 4 data rows and 11 key rows")
        if len(self.sbox_rows) != LUT_ROWS or len(self.m2_rows) != LUT_ROWS:
            raise ConfigurationError("each LUT needs 16 word lines")
        if cols < 2 * LUT_ROWS:
            raise ConfigurationError(f"LUT rows need {2 * LUT_ROWS} bit lines")
        if self.m2_parallelism < 1:
            raise ConfigurationError("m2_parallelism must be >= 1")


class BufferRowAllocator:
    """Round-robin allocation over the free rows; rows return after their consumer runs."""

    def __init__(self, rows):
        self.rows = list(rows)
        self.cursor = 0
        self.busy = set()

    def allocate(self, n):
        if len(self.rows) - len(self.busy) < n:
            raise ResourceError(f"need {n} free buffer rows, {len(self.rows) - len(self.busy)} available")
        got = []
        while len(got) < n:
            r = self.rows[self.cursor]
            self.cursor = (self.cursor + 1) % len(self.rows)
            if r not in self.busy:
                self.busy.add(r)
                got.append(r)
        return got

    def release(self, rows):
        self.busy.difference_update(rows)


class ImcUnit:
    """One 64-bit processing unit: array, amplifiers, row buffer and layout."""

    def __init__(self, name, state_cols, rows=64, cols=32, lanes=1, layout=None,
                 m2_parallelism=4):
        self.name = name
        self.state_cols = tuple(state_cols)
        if len(self.state_cols) != UNIT_BYTES_PER_ROW:
            raise ConfigurationError("a unit owns exactly two state columns")
        self.layout = layout or UnitLayout.default(rows, cols, m2_parallelism)
        self.layout.validate(rows, cols)
        self.lanes = lanes
        self.array = CrossbarArray(rows, cols, lanes)
        self.amps = SenseAmpBank(cols, lanes)
        self.buffer = RowBuffer(cols, lanes)
        self.allocator = BufferRowAllocator(self.layout.buffer_rows)
        self.array.designate(self.layout.data_rows, RowClass.DATA)
        self.array.designate(self.layout.key_rows, RowClass.KEY)
        self.array.designate(self.layout.sbox_rows + self.layout.m2_rows, RowClass.LUT)
        self.array.designate(self.layout.buffer_rows, RowClass.BUFFER)
        self.sbox_ready = False
        self.m2_ready = False
        self.loaded_rounds = set()

    def __repr__(self):
        return f"ImcUnit({self.name!r}, state_cols={self.state_cols}, lanes={self.lanes})"

    # -- programming (host side) ---------------------------------------------

    def program_lut(self, which, table):
        table = np.frombuffer(bytes(table), dtype=np.uint8)
        if table.size != 256:
            raise ConfigurationError("LUT table must have 256 entries")
        rows = self.layout.sbox_rows if which == "sbox" else self.layout.m2_rows
        nibbles = split_nibbles(table.reshape(LUT_ROWS, LUT_ROWS))
        for hi, row in enumerate(rows):
            self.array.program_row(row, nibbles[hi])
        if which == "sbox":
            self.sbox_ready = True
        else:
            self.m2_ready = True

    def program_luts(self, sbox=SBOX, m2=M2):
        self.program_lut("sbox", sbox)
        self.program_lut("m2", m2)

    def load_round_keys(self, round_keys):
        """``round_keys``: ``(11, 16)`` or ``(lanes, 11, 16)`` bytes."""
        rk = np.asarray(round_keys, dtype=np.uint8)
        if rk.ndim == 2:
            rk = np.broadcast_to(rk, (self.lanes,) + rk.shape)
        if rk.shape[1:] != (N_ROUNDS + 1, 16):
            raise ConfigurationError(f"round keys must be (11, 16) per lane, got {rk.shape}")
        # (lanes, round, col, row) -> unit half laid out row-major
        half = rk.reshape(rk.shape[0], N_ROUNDS + 1, 4, 4)[:, :, self.state_cols, :]
        half = half.transpose(0, 1, 3, 2)  # (lanes, round, row, unit col)
        nibbles = split_nibbles(half).reshape(rk.shape[0], N_ROUNDS + 1, STATE_ROWS * ROW_NIBBLES)
        for k, row in enumerate(self.layout.key_rows):
            self.array.program_row(row, nibbles[:, k])
        self.loaded_rounds = set(range(N_ROUNDS + 1))

    # -- state I/O -------------------------------------------------------------

    def load_state(self, state) -> int:
        """Write this unit's half of a ``(lanes, 4, 4)`` state through the row buffer."""
        state = np.asarray(state, dtype=np.uint8)
        half = split_nibbles(state[:, :, self.state_cols])
        writes = 0
        for r, row in enumerate(self.layout.data_rows):
            self.buffer.store(DATA_COLS, half[:, r])
            writes += write_back(self.array, self.buffer, row)
        return writes

    def read_state(self) -> np.ndarray:
        """Sense the data rows; returns ``(lanes, 4, 2)`` bytes."""
        out = np.empty((self.lanes, STATE_ROWS, ROW_NIBBLES), dtype=np.uint8)
        amps = _group(0)
        for r, row in enumerate(self.layout.data_rows):
            self.amps.read(self.array, row, DATA_COLS, amps, "capacitor")
            out[:, r] = self.amps.held(amps, "capacitor")
            self.amps.clear(amps, "capacitor")
        return join_nibbles(out)


@dataclass
class StepReport:
    stage: str
    operation: str
    rows: tuple
    writes: int
    lookups: int = 0
    lut_passes: int = 0
    exchanged: int = 0

    def detail(self) -> dict:
        d = {"operation": self.operation, "rows": list(self.rows), "writes": self.writes}
        if self.lookups:
            d["lookups"] = self.lookups
            d["lut_passes"] = self.lut_passes
        if self.exchanged:
            d["exchanged"] = self.exchanged
        return d


@dataclass
class ExchangeChannel:
    """Idealised byte link between the two units, used only by ShiftRows."""

    cycles: int = 0
    transfers: int = 0
    _slots: dict = field(default_factory=dict, repr=False)

    def post(self, row, col, nibbles):
        self._slots[(row, col)] = np.array(nibbles, copy=True)

    def take(self, row, col):
        try:
            value = self._slots.pop((row, col))
        except KeyError:
            raise InterconnectError(f"no byte posted for state ({row}, {col})") from None
        self.transfers += 1
        return value

    def pending(self):
        return len(self._slots)


def _write_latched_row(unit, r, amps_per_byte, row):
    for j, amps in enumerate(amps_per_byte):
        unit.buffer.store([2 * j, 2 * j + 1], unit.amps.held(amps))
    return write_back(unit.array, unit.buffer, row)


def addroundkey_step(unit: ImcUnit, rnd: int) -> StepReport:
    """XOR each state row with its round-key row inside the summing amplifiers."""
    if rnd not in unit.loaded_rounds:
        raise ConfigurationError(f"round key {rnd} is not resident in unit {unit.name}")
    lay = unit.layout
    amps = _group(0)
    writes = 0
    for r, row in enumerate(lay.data_rows):
        unit.amps.read(unit.array, row, DATA_COLS, amps, "capacitor")
        unit.amps.read(unit.array, lay.key_rows[rnd], _group(r), amps, "latch")
        result = unit.amps.xor_commit(amps)
        unit.buffer.store(DATA_COLS, result)
        writes += write_back(unit.array, unit.buffer, row)
        unit.amps.clear(amps)
    return StepReport("addroundkey", f"ark[{rnd}]", tuple(lay.data_rows) + (lay.key_rows[rnd],), writes)


def _lut_lookup(unit, lut_rows, src_row, src_cols, dst_amps):
    """Decode the byte at ``src_row/src_cols`` and latch its LUT image in ``dst_amps``.

    The byte is sensed into the capacitors of ``dst_amps`` (the decoder
    input), then the selected LUT word line drives the same amps' latches.
    """
    unit.amps.read(unit.array, src_row, src_cols, dst_amps, "capacitor")
    nib = unit.amps.held(dst_amps, "capacitor")
    unit.amps.clear(dst_amps, "capacitor")
    word_line = np.asarray(lut_rows)[nib[:, 0]]
    bit_lines = np.stack([2 * nib[:, 1], 2 * nib[:, 1] + 1], axis=1)
    unit.amps.read(unit.array, word_line, bit_lines, dst_amps, "latch")


def _byte_amps(r, j):
    return np.array([ROW_NIBBLES * r + 2 * j, ROW_NIBBLES * r + 2 * j + 1])


def subbyte_step(unit: ImcUnit, hold=True) -> StepReport:
    """Replace every state byte by its S-box image.

    With ``hold`` the images stay latched in amp group ``r`` for ShiftRows;
    otherwise they are written back in place.
    """
    if not unit.sbox_ready:
        raise ConfigurationError(f"S-box LUT rows of unit {unit.name} are not programmed")
    lay = unit.layout
    unit.amps.clear()
    writes = 0
    for r, row in enumerate(lay.data_rows):
        for j in range(UNIT_BYTES_PER_ROW):
            _lut_lookup(unit, lay.sbox_rows, row, [2 * j, 2 * j + 1], _byte_amps(r, j))
    if not hold:
        for r, row in enumerate(lay.data_rows):
            writes += _write_latched_row(unit, r, [_byte_amps(r, j) for j in range(2)], row)
        unit.amps.clear()
    n = STATE_ROWS * UNIT_BYTES_PER_ROW
    return StepReport("subbyte", "sbox", tuple(lay.data_rows), writes, lookups=n, lut_passes=n)


def _source_col(dst_col, r):
    return (dst_col + r) % 4


def post_crossing(unit: ImcUnit, exchange: ExchangeChannel) -> int:
    """Put latched S-box outputs that another unit needs onto the exchange link."""
    sent = 0
    for r in range(STATE_ROWS):
        for j, src in enumerate(unit.state_cols):
            dst = (src - r) % 4
            if dst not in unit.state_cols:
                exchange.post(r, src, unit.amps.held(_byte_amps(r, j)))
                sent += 1
    return sent


def shiftrow_step(unit: ImcUnit, exchange: ExchangeChannel | None) -> StepReport:
    """Rotate state row ``r`` left by ``r`` and write each row back once.

    Expects the S-box images latched by ``subbyte_step(hold=True)``. The
    column address plus row offset picks the source byte; bytes owned by
    the other unit arrive over ``exchange``.
    """
    lay = unit.layout
    writes = 0
    received = 0
    for r, row in enumerate(lay.data_rows):
        for j, dst in enumerate(unit.state_cols):
            src = _source_col(dst, r)
            if src in unit.state_cols:
                nib = unit.amps.held(_byte_amps(r, unit.state_cols.index(src)))
            else:
                if exchange is None:
                    raise InterconnectError(
                        f"unit {unit.name} needs state byte ({r}, {src}) but has no exchange link")
                nib = exchange.take(r, src)
                received += 1
            unit.buffer.store([2 * j, 2 * j + 1], nib)
        writes += write_back(unit.array, unit.buffer, row)
    unit.amps.clear()
    return StepReport("shiftrow", "shift", tuple(lay.data_rows), writes, exchanged=received)


def mixcolumn_step(unit: ImcUnit) -> StepReport:
    """MixColumns using only M-2 lookups and in-array XORs.

    Per unit column, ``b_r = 2a_r ^ 3a_{r+1} ^ a_{r+2} ^ a_{r+3}``:

    1. M-2 pass: ``2a`` for all 8 bytes, up to ``m2_parallelism`` lookups at
       a time, staged in the row buffer and written to one buffer row.
    2. ``3a = 2a ^ a`` by firing the data row and the M-2 row together;
       written to a second buffer row.
    3. Final XOR chain per state row, accumulated in amp latches, then
       written back to the data rows.
    """
    if not unit.m2_ready:
        raise ConfigurationError(f"M-2 LUT rows of unit {unit.name} are not programmed")
    lay = unit.layout
    if len(lay.buffer_rows) < MIXCOLUMN_BUFFER_ROWS:
        raise ResourceError(f"MixColumns needs {MIXCOLUMN_BUFFER_ROWS} buffer rows")
    double_row, triple_row = unit.allocator.allocate(MIXCOLUMN_BUFFER_ROWS)
    unit.amps.clear()
    writes = 0

    # phase 1: M-2 conversion, lookups grouped into passes of m2_parallelism
    jobs = [(r, j) for r in range(STATE_ROWS) for j in range(UNIT_BYTES_PER_ROW)]
    passes = math.ceil(len(jobs) / lay.m2_parallelism)
    for p in range(passes):
        for r, j in jobs[p * lay.m2_parallelism:(p + 1) * lay.m2_parallelism]:
            amps = _byte_amps(r, j)
            _lut_lookup(unit, lay.m2_rows, lay.data_rows[r], [2 * j, 2 * j + 1], amps)
            unit.buffer.store(amps, unit.amps.held(amps))
    writes += write_back(unit.array, unit.buffer, double_row)
    unit.amps.clear()

    # phase 2: 3a = 2a ^ a
    for r, row in enumerate(lay.data_rows):
        g = _group(r)
        unit.amps.read(unit.array, row, DATA_COLS, g, "capacitor")
        unit.amps.read(unit.array, double_row, g, g, "latch")
        unit.buffer.store(g, unit.amps.xor_commit(g))
    writes += write_back(unit.array, unit.buffer, triple_row)
    unit.amps.clear()

    # phase 3: accumulate each output row in its amp group
    for r in range(STATE_ROWS):
        g = _group(r)
        unit.amps.read(unit.array, double_row, g, g, "latch")
        unit.amps.read(unit.array, triple_row, _group((r + 1) % 4), g, "capacitor")
        unit.amps.xor_commit(g)
        for k in (2, 3):
            unit.amps.read(unit.array, lay.data_rows[(r + k) % 4], DATA_COLS, g, "capacitor")
            unit.amps.xor_commit(g)
    for r, row in enumerate(lay.data_rows):
        unit.buffer.store(DATA_COLS, unit.amps.held(_group(r)))
        writes += write_back(unit.array, unit.buffer, row)
    unit.amps.clear()
    unit.allocator.release([double_row, triple_row])

    n = len(jobs)
    return StepReport("mixcolumn", "m2+xor", tuple(lay.data_rows) + (double_row, triple_row),
                      writes, lookups=n, lut_passes=passes)
