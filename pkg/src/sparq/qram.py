"""Oracle-level QRAM: per-branch classical memory lookup XOR-ed into a register.

The memory is simulated as a single unit realizing |i>_A |j>_D -> |i>_A |j XOR d_i>_D,
so a load touches amplitudes not at all and is its own inverse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import execution, state as st
from .errors import EntryOutOfRangeError, MemoryParseError, WidthMismatchError
from .gates import ControlSpec, _control_mask, _validate_controls

_U64_ONE = np.uint64(1)


@dataclass(frozen=True)
class QramMemory:
    """Classical word table addressed by 2^address_width indices."""

    address_width: int
    word_width: int
    entries: np.ndarray

    def __post_init__(self):
        # width 0 (a single unconditional word) serves root-level angle trees
        if not (0 <= self.address_width <= 63):
            raise MemoryParseError(f"address_width {self.address_width} outside 0..63")
        if not (1 <= self.word_width <= 64):
            raise MemoryParseError(f"word_width {self.word_width} outside 1..64")
        entries = np.ascontiguousarray(self.entries, dtype=np.uint64)
        if entries.ndim != 1 or entries.size != (1 << self.address_width):
            raise MemoryParseError(
                f"expected {1 << self.address_width} entries, got {entries.size}")
        if self.word_width < 64 and np.any(entries >> np.uint64(self.word_width)):
            bad = int(np.argmax(entries >> np.uint64(self.word_width) != 0))
            raise EntryOutOfRangeError(
                f"entry {int(entries[bad])} at address {bad} exceeds "
                f"word_width {self.word_width}")
        object.__setattr__(self, "entries", entries)


def load_memory_file(path) -> QramMemory:
    """Read a JSON memory file {addr_width, word_width, entries: [...]}."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MemoryParseError(f"cannot read memory file {path}: {exc}") from exc
    try:
        addr_width = int(doc["addr_width"])
        word_width = int(doc["word_width"])
        entries = [int(e) for e in doc["entries"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise MemoryParseError(f"malformed memory file {path}: {exc}") from exc
    if any(e < 0 for e in entries):
        raise EntryOutOfRangeError("memory entries must be non-negative")
    if any(e >> word_width for e in entries):
        raise EntryOutOfRangeError(
            f"memory entry exceeds word_width {word_width}")
    if len(entries) != 1 << addr_width:
        raise MemoryParseError(
            f"expected {1 << addr_width} entries, got {len(entries)}")
    return QramMemory(addr_width, word_width,
                      np.array(entries, dtype=np.uint64))


def write_memory_file(path, memory: QramMemory) -> None:
    with open(path, "w") as fh:
        json.dump({"addr_width": memory.address_width,
                   "word_width": memory.word_width,
                   "entries": [int(e) for e in memory.entries]}, fh)


def qram_load(state: st.SparseState, addr_reg: int, data_reg: int,
              memory: QramMemory, controls: ControlSpec = (),
              config: Optional[execution.ExecConfig] = None) -> None:
    """data <- data XOR d[addr] on every branch (self-inverse, amplitudes untouched)."""
    addr = state.table.get(addr_reg)
    data = state.table.get(data_reg)
    if addr.width != memory.address_width:
        raise WidthMismatchError(
            f"address register width {addr.width} != {memory.address_width}")
    if data.width != memory.word_width:
        raise WidthMismatchError(
            f"data register width {data.width} != {memory.word_width}")
    ctrls = _validate_controls(state, controls)
    entries = memory.entries

    def kernel(s, lo, hi):
        mask = _control_mask(s, ctrls, lo, hi)
        acol = s.regs[lo:hi, addr.slot]
        dcol = s.regs[lo:hi, data.slot]
        if mask is None:
            dcol ^= entries[acol]
        else:
            dcol[mask] ^= entries[acol[mask]]
        s.refresh_digests(lo, hi)

    with execution.profiler.timed("noninterference", "qram_load"):
        execution.parallel_for_branches(state, kernel, config)
    state.table.note_system_size(state.branch_count)


def qram_load_bits(state: st.SparseState, addr_bits: Sequence[tuple[int, int]],
                   data_reg: int, memory: QramMemory,
                   controls: ControlSpec = (),
                   config: Optional[execution.ExecConfig] = None) -> None:
    """qram_load with the address assembled from arbitrary (reg, bit) pairs.

    ``addr_bits[0]`` is the least significant address bit.  This lets one
    memory be indexed jointly by several registers (the angle-tree queries of
    the linear-system solver address (column, prefix) pairs).
    """
    if len(addr_bits) != memory.address_width:
        raise WidthMismatchError(
            f"{len(addr_bits)} address bits != address_width {memory.address_width}")
    data = state.table.get(data_reg)
    if data.width != memory.word_width:
        raise WidthMismatchError(
            f"data register width {data.width} != {memory.word_width}")
    ctrls = _validate_controls(state, controls)
    segments = _compress_bits(state, addr_bits)
    entries = memory.entries

    def kernel(s, lo, hi):
        mask = _control_mask(s, ctrls, lo, hi)
        addr = np.zeros(hi - lo, dtype=np.uint64)
        for slot, shift_right, seg_mask, shift_left in segments:
            addr |= ((s.regs[lo:hi, slot] >> shift_right) & seg_mask) << shift_left
        dcol = s.regs[lo:hi, data.slot]
        if mask is None:
            dcol ^= entries[addr]
        else:
            dcol[mask] ^= entries[addr[mask]]
        s.refresh_digests(lo, hi)

    with execution.profiler.timed("noninterference", "qram_load"):
        execution.parallel_for_branches(state, kernel, config)
    state.table.note_system_size(state.branch_count)


def _compress_bits(state, addr_bits):
    """Group runs of consecutive bits of one register into shift/mask segments."""
    segments = []
    pos = 0
    i = 0
    bits = list(addr_bits)
    while i < len(bits):
        reg, bit = bits[i]
        desc = state.table.get(reg)
        if not (0 <= bit < desc.width):
            raise WidthMismatchError(
                f"address bit {bit} outside register '{desc.name}'")
        run = 1
        while (i + run < len(bits)
               and bits[i + run][0] == reg
               and bits[i + run][1] == bit + run):
            run += 1
        segments.append((desc.slot, np.uint64(bit),
                         np.uint64((1 << run) - 1), np.uint64(pos)))
        pos += run
        i += run
    return segments


def induced_permutation_matrix(memory: QramMemory) -> np.ndarray:
    """Dense matrix of the load on (data, addr) ordering: index = (data << n) | addr."""
    n, w = memory.address_width, memory.word_width
    dim = 1 << (n + w)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for addr in range(1 << n):
        d = int(memory.entries[addr])
        for j in range(1 << w):
            src = (j << n) | addr
            dst = ((j ^ d) << n) | addr
            mat[dst, src] = 1.0
    return mat
