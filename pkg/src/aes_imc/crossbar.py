"""Memristive crossbar substrate: 4-bit cells, summing amplifiers, row buffer.

A :class:`CrossbarArray` can carry several *lanes*: identical copies of the
array driven by one controller in lock step. Control decisions (which word
line fires, which entries are dirty) are shared by all lanes; only the
stored levels differ. ``lanes=1`` is the plain single-array case. Lanes are
how the engine simulates many independent engine instances at once.

Write accounting counts cell writes *per lane*, so the numbers match what a
single physical array would see.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

MAX_LEVEL = 15
LEVEL_DTYPE = np.uint8


class CrossbarError(Exception):
    pass


class AddressError(CrossbarError, IndexError):
    pass


class LevelRangeError(CrossbarError, ValueError):
    pass


class AmpStateError(CrossbarError, RuntimeError):
    pass


class ProtectionError(CrossbarError, PermissionError):
    pass


class RowClass(enum.Enum):
    DATA = "data"
    KEY = "key"
    LUT = "lut"
    BUFFER = "buffer"


WRITABLE = (RowClass.DATA, RowClass.BUFFER)


@dataclass
class MultiLevelCell:
    """A single 16-level memristor, used for scalar inspection."""

    level: int = 0

    def __post_init__(self):
        _check_level(self.level)


def _check_level(level):
    arr = np.asarray(level)
    if arr.size and (arr.min() < 0 or arr.max() > MAX_LEVEL):
        raise LevelRangeError(f"cell level must be in 0..{MAX_LEVEL}, got {level!r}")


class CrossbarArray:
    def __init__(self, rows=64, cols=32, lanes=1):
        if rows < 1 or cols < 1 or lanes < 1:
            raise ValueError("rows, cols and lanes must be positive")
        self.rows = rows
        self.cols = cols
        self.lanes = lanes
        self.levels = np.zeros((lanes, rows, cols), dtype=LEVEL_DTYPE)
        self.row_class = [RowClass.BUFFER] * rows
        self.writes = 0          # cell writes through write_back
        self.program_writes = 0  # direct programming (write_cell / program_row)
        self.reads = 0

    # -- addressing ----------------------------------------------------------

    def _check_row(self, row):
        r = np.asarray(row)
        if r.size and (r.min() < 0 or r.max() >= self.rows):
            raise AddressError(f"row {row!r} outside 0..{self.rows - 1}")

    def _check_col(self, col):
        c = np.asarray(col)
        if c.size and (c.min() < 0 or c.max() >= self.cols):
            raise AddressError(f"column {col!r} outside 0..{self.cols - 1}")

    def designate(self, rows, cls: RowClass):
        for r in rows:
            self._check_row(r)
            self.row_class[r] = cls

    @property
    def free_rows(self) -> frozenset:
        return frozenset(r for r, c in enumerate(self.row_class) if c is RowClass.BUFFER)

    # -- cell access ---------------------------------------------------------

    def write_cell(self, row, col, level):
        """Program one cell in every lane. ``level`` may be a scalar or per-lane array."""
        self._check_row(row)
        self._check_col(col)
        _check_level(level)
        self.levels[:, row, col] = level
        self.program_writes += 1

    def read_cell(self, row, col, lane=0) -> int:
        self._check_row(row)
        self._check_col(col)
        self.reads += 1
        return int(self.levels[lane, row, col])

    def cell(self, row, col, lane=0) -> MultiLevelCell:
        return MultiLevelCell(self.read_cell(row, col, lane))

    def program_row(self, row, values, start_col=0):
        """Write a run of levels into one row (LUT/key programming path).

        ``values`` has shape ``(n,)`` or ``(lanes, n)``.
        """
        values = np.asarray(values)
        n = values.shape[-1]
        self._check_row(row)
        self._check_col([start_col, start_col + n - 1])
        _check_level(values)
        self.levels[:, row, start_col:start_col + n] = values
        self.program_writes += n

    def gather(self, row, cols) -> np.ndarray:
        """Sense cells on an activated word line.

        ``row`` is an int (same word line in every lane) or a ``(lanes,)``
        array for data-dependent decoding. ``cols`` is ``(k,)`` or
        ``(lanes, k)``. Returns ``(lanes, k)`` levels.
        """
        self._check_row(row)
        self._check_col(cols)
        cols = np.asarray(cols)
        self.reads += cols.shape[-1]
        if np.ndim(row) == 0 and cols.ndim == 1:
            return self.levels[:, row, cols].copy()
        lane_idx = np.arange(self.lanes)[:, None]
        row_idx = np.broadcast_to(np.asarray(row).reshape(-1, 1), (self.lanes, 1))
        return self.levels[lane_idx, row_idx, cols]

    def dump(self, lane=0) -> str:
        """Debug dump: one line per word line, one hex digit per cell."""
        return "\n".join(
            "".join(format(int(v), "x") for v in self.levels[lane, r])
            for r in range(self.rows)
        )


class SummingAmp:
    """One summing amplifier: a sampling capacitor and a latch, both nibbles."""

    def __init__(self):
        self.capacitor: Optional[int] = None
        self.latch: Optional[int] = None

    def __repr__(self):
        return f"SummingAmp(capacitor={self.capacitor!r}, latch={self.latch!r})"


def activate_read(array: CrossbarArray, row, col, amp: SummingAmp, target="capacitor",
                  overwrite=False):
    """Fire word line ``row``, select ``col``, and sample the cell into ``amp``."""
    if target not in ("capacitor", "latch"):
        raise ValueError(f"unknown amp slot {target!r}")
    if not overwrite and getattr(amp, target) is not None:
        raise AmpStateError(f"{target} already holds a value")
    setattr(amp, target, array.read_cell(row, col))
    return amp


def xor_commit(amp: SummingAmp) -> int:
    if amp.capacitor is None or amp.latch is None:
        raise AmpStateError("xor needs both capacitor and latch populated")
    amp.latch = amp.capacitor ^ amp.latch
    amp.capacitor = None
    return amp.latch


class SenseAmpBank:
    """A row of summing amplifiers, vectorised over lanes.

    Valid flags are control state and shared by all lanes.
    """

    def __init__(self, n, lanes=1, overwrite=False):
        self.n = n
        self.lanes = lanes
        self.overwrite = overwrite
        self.capacitor = np.zeros((lanes, n), dtype=LEVEL_DTYPE)
        self.latch = np.zeros((lanes, n), dtype=LEVEL_DTYPE)
        self.cap_valid = np.zeros(n, dtype=bool)
        self.latch_valid = np.zeros(n, dtype=bool)

    def _slots(self, target):
        if target == "capacitor":
            return self.capacitor, self.cap_valid
        if target == "latch":
            return self.latch, self.latch_valid
        raise ValueError(f"unknown amp slot {target!r}")

    def _check_amps(self, amps):
        a = np.asarray(amps)
        if a.size and (a.min() < 0 or a.max() >= self.n):
            raise AddressError(f"amp index {amps!r} outside 0..{self.n - 1}")
        return a

    def read(self, array: CrossbarArray, row, cols, amps, target="capacitor"):
        amps = self._check_amps(amps)
        store, valid = self._slots(target)
        if not self.overwrite and valid[amps].any():
            raise AmpStateError(f"{target} of amps {amps.tolist()} already populated")
        store[:, amps] = array.gather(row, cols)
        valid[amps] = True

    def load(self, amps, values, target="latch"):
        """Drive values into amps from outside the array (e.g. the exchange link)."""
        amps = self._check_amps(amps)
        store, valid = self._slots(target)
        if not self.overwrite and valid[amps].any():
            raise AmpStateError(f"{target} of amps {amps.tolist()} already populated")
        _check_level(values)
        store[:, amps] = values
        valid[amps] = True

    def xor_commit(self, amps) -> np.ndarray:
        amps = self._check_amps(amps)
        if not (self.cap_valid[amps].all() and self.latch_valid[amps].all()):
            raise AmpStateError("xor needs both capacitor and latch populated")
        self.latch[:, amps] ^= self.capacitor[:, amps]
        self.cap_valid[amps] = False
        return self.latch[:, amps].copy()

    def held(self, amps, target="latch") -> np.ndarray:
        amps = self._check_amps(amps)
        store, valid = self._slots(target)
        if not valid[amps].all():
            raise AmpStateError(f"{target} of amps {amps.tolist()} is empty")
        return store[:, amps].copy()

    def clear(self, amps=None, target=None):
        sel = slice(None) if amps is None else self._check_amps(amps)
        if target in (None, "capacitor"):
            self.cap_valid[sel] = False
        if target in (None, "latch"):
            self.latch_valid[sel] = False


class RowBuffer:
    """Per-column staging latches in front of the write driver."""

    def __init__(self, cols, lanes=1):
        self.cols = cols
        self.lanes = lanes
        self.bits = np.zeros((lanes, cols), dtype=LEVEL_DTYPE)
        self.dirty = np.zeros(cols, dtype=bool)

    def store(self, col, value):
        c = np.asarray(col)
        if c.size and (c.min() < 0 or c.max() >= self.cols):
            raise AddressError(f"buffer column {col!r} outside 0..{self.cols - 1}")
        _check_level(value)
        self.bits[:, col] = value
        self.dirty[col] = True

    def peek(self, col, lane=0) -> int:
        if not 0 <= col < self.cols:
            raise AddressError(f"buffer column {col} outside 0..{self.cols - 1}")
        return int(self.bits[lane, col])


def buffer_store(buf: RowBuffer, col, value) -> RowBuffer:
    buf.store(col, value)
    return buf


def write_back(array: CrossbarArray, buf: RowBuffer, row) -> int:
    """Copy dirty buffer entries into ``row``; returns the number of cells written."""
    array._check_row(row)
    cls = array.row_class[row]
    if cls not in WRITABLE:
        raise ProtectionError(f"row {row} is a {cls.value} row and cannot be written back")
    cols = np.flatnonzero(buf.dirty[:array.cols])
    if cols.size:
        array.levels[:, row, cols] = buf.bits[:, cols]
        array.writes += int(cols.size)
    buf.dirty[:] = False
    return int(cols.size)
