"""Register-level sparse state: only nonzero branches are stored.

A state is a flat table of branches.  Each branch is one computational-basis
component: a complex amplitude plus one 64-bit value per register slot, with
a cached digest of the active register values.  Branch data lives in numpy
arrays (amplitudes, a (branches x slots) value matrix, digests) so that every
operation is a handful of vectorized passes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from . import execution
from .errors import (
    DuplicateNameError,
    NonZeroContentError,
    NotActiveError,
    RegisterCapacityError,
    TooManyQubitsError,
    WidthOutOfRangeError,
)

MAX_REGISTER_WIDTH = 64          # register values are fixed 64-bit words
DENSE_EXPORT_MAX_QUBITS = 26     # guard for dense-vector oracle exports
DEFAULT_PRUNE_TOL = 1e-12        # absolute amplitude threshold for pruning
DEFAULT_SLOT_CAPACITY = 16       # branch slots reserved per state

_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)

_U64_ONE = np.uint64(1)


class RegisterType(enum.Enum):
    BOOL = "bool"
    UINT = "uint"


@dataclass
class RegisterDescriptor:
    id: int
    name: str
    width: int
    dtype: RegisterType
    active: bool
    slot: int

    @property
    def mask(self) -> np.uint64:
        return np.uint64((1 << self.width) - 1)


class RegisterTable:
    """Global register metadata: name/id maps, widths, monotone counters."""

    def __init__(self, slot_capacity: int = DEFAULT_SLOT_CAPACITY):
        if slot_capacity < 1:
            raise ValueError("slot_capacity must be >= 1")
        self.slot_capacity = slot_capacity
        self.descriptors: list[RegisterDescriptor] = []
        self.name_index: dict[str, int] = {}
        self._free_slots: list[int] = list(range(slot_capacity - 1, -1, -1))
        self.max_qubit_count = 0
        self.max_register_count = 0
        self.max_system_size = 0
        self.version = 0

    # -- lookups --

    def get(self, reg_id: int) -> RegisterDescriptor:
        if not (0 <= reg_id < len(self.descriptors)) or not self.descriptors[reg_id].active:
            raise NotActiveError(f"register id {reg_id} is not active")
        return self.descriptors[reg_id]

    def id_of(self, name: str) -> int:
        if name not in self.name_index:
            raise NotActiveError(f"no active register named '{name}'")
        return self.name_index[name]

    def active_descriptors(self) -> list[RegisterDescriptor]:
        return [d for d in self.descriptors if d.active]

    @property
    def qubit_count(self) -> int:
        return sum(d.width for d in self.descriptors if d.active)

    @property
    def active_register_count(self) -> int:
        return sum(1 for d in self.descriptors if d.active)

    # -- mutation --

    def add_register(self, name: str, width: int,
                     dtype: RegisterType = RegisterType.UINT) -> int:
        if name in self.name_index:
            raise DuplicateNameError(f"register name '{name}' already active")
        if dtype is RegisterType.BOOL and width != 1:
            raise WidthOutOfRangeError("bool registers are exactly 1 qubit wide")
        if not (1 <= width <= MAX_REGISTER_WIDTH):
            raise WidthOutOfRangeError(
                f"width {width} outside 1..{MAX_REGISTER_WIDTH}")
        if not self._free_slots:
            raise RegisterCapacityError(
                f"all {self.slot_capacity} branch slots in use")
        slot = self._free_slots.pop()
        reg_id = len(self.descriptors)
        self.descriptors.append(
            RegisterDescriptor(reg_id, name, width, dtype, True, slot))
        self.name_index[name] = reg_id
        self.max_qubit_count = max(self.max_qubit_count, self.qubit_count)
        self.max_register_count = max(self.max_register_count,
                                      self.active_register_count)
        self.version += 1
        return reg_id

    def remove_register(self, state: SparseState, reg_id: int) -> None:
        desc = self.get(reg_id)
        col = state.regs[:, desc.slot]
        if col.size and np.any(col != 0):
            raise NonZeroContentError(
                f"register '{desc.name}' holds nonzero content; removal would "
                "discard information")
        desc.active = False
        del self.name_index[desc.name]
        self._free_slots.append(desc.slot)
        self.version += 1
        state._on_table_change()

    def note_system_size(self, size: int) -> None:
        if size > self.max_system_size:
            self.max_system_size = size


@dataclass(frozen=True)
class Branch:
    """Read-only view of one branch: amplitude, active values, digest."""

    amplitude: complex
    registers: tuple[int, ...]
    cached_hash: int


def branch_digest(branch: Branch) -> int:
    """Recompute the 64-bit digest of a branch's active register values."""
    return _fold_digest(branch.registers)


def _fold_digest(values: Sequence[int]) -> int:
    h = int(_FNV_OFFSET)
    for v in values:
        h = ((h ^ int(v)) * int(_FNV_PRIME)) & 0xFFFFFFFFFFFFFFFF
    return h


class SparseState:
    """Sequence of distinct-basis branches over a shared register table."""

    def __init__(self, table: RegisterTable, amp: np.ndarray, regs: np.ndarray,
                 normalized: bool = True):
        self.table = table
        self.amp = np.ascontiguousarray(amp, dtype=np.complex128)
        self.regs = np.ascontiguousarray(regs, dtype=np.uint64)
        self.normalized = normalized
        self.prune_tol = DEFAULT_PRUNE_TOL
        self._slots_cache: Optional[list[int]] = None
        self._slots_version = -1
        # digests are memoized: register-mutating ops invalidate, any read
        # recomputes, so an observed cached_hash is always consistent
        self._digests: Optional[np.ndarray] = None
        table.note_system_size(self.branch_count)

    # -- constructors --

    @classmethod
    def zero_state(cls, table: RegisterTable) -> SparseState:
        amp = np.ones(1, dtype=np.complex128)
        regs = np.zeros((1, table.slot_capacity), dtype=np.uint64)
        return cls(table, amp, regs)

    @classmethod
    def from_values(cls, table: RegisterTable, values: Sequence[Sequence[int]],
                    amplitudes: Sequence[complex],
                    normalized: bool = True) -> SparseState:
        """Build a state from per-branch active register values (id order)."""
        descs = table.active_descriptors()
        regs = np.zeros((len(amplitudes), table.slot_capacity), dtype=np.uint64)
        for row, vals in enumerate(values):
            if len(vals) != len(descs):
                raise ValueError("one value per active register required")
            for d, v in zip(descs, vals):
                if int(v) >> d.width:
                    raise ValueError(
                        f"value {v} exceeds register '{d.name}' width {d.width}")
                regs[row, d.slot] = np.uint64(v)
        return cls(table, np.asarray(amplitudes, dtype=np.complex128), regs,
                   normalized)

    @classmethod
    def from_dense(cls, table: RegisterTable, vector: np.ndarray,
                   tol: float = 0.0) -> SparseState:
        """Build a state from a dense vector's nonzero entries."""
        vector = np.asarray(vector, dtype=np.complex128)
        descs = table.active_descriptors()
        total = sum(d.width for d in descs)
        if vector.size != 1 << total:
            raise ValueError("dense vector length does not match qubit count")
        idx = np.nonzero(np.abs(vector) > tol)[0]
        regs = np.zeros((idx.size, table.slot_capacity), dtype=np.uint64)
        shift = 0
        for d in descs:
            regs[:, d.slot] = (idx.astype(np.uint64) >> np.uint64(shift)) & d.mask
            shift += d.width
        return cls(table, vector[idx], regs, normalized=False)

    # -- basic properties --

    @property
    def branch_count(self) -> int:
        return self.amp.size

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amp) ** 2))

    def value_column(self, reg_id: int) -> np.ndarray:
        """Writable view of one register's values across all branches."""
        return self.regs[:, self.table.get(reg_id).slot]

    def branch(self, i: int) -> Branch:
        vals = tuple(int(self.regs[i, d.slot]) for d in self.table.active_descriptors())
        return Branch(complex(self.amp[i]), vals, int(self.digests[i]))

    def __iter__(self) -> Iterator[Branch]:
        return (self.branch(i) for i in range(self.branch_count))

    def copy(self) -> SparseState:
        dup = SparseState.__new__(SparseState)
        dup.table = self.table
        dup.amp = self.amp.copy()
        dup.regs = self.regs.copy()
        dup.digests = self.digests.copy()
        dup.normalized = self.normalized
        dup.prune_tol = self.prune_tol
        dup._slots_cache = None
        dup._slots_version = -1
        return dup

    # -- digests --

    def _on_table_change(self) -> None:
        self._slots_cache = None
        self.refresh_digests()

    def active_slots(self) -> list[int]:
        """Slots of active registers in ascending id order."""
        if self._slots_cache is None or self._slots_version != self.table.version:
            self._slots_cache = [d.slot for d in self.table.active_descriptors()]
            self._slots_version = self.table.version
        return self._slots_cache

    def _compute_digests(self, regs: np.ndarray) -> np.ndarray:
        h = np.full(regs.shape[0], _FNV_OFFSET, dtype=np.uint64)
        for slot in self.active_slots():
            h ^= regs[:, slot]
            h *= _FNV_PRIME
        return h

    def refresh_digests(self, lo: int = 0, hi: Optional[int] = None) -> None:
        hi = self.branch_count if hi is None else hi
        self.digests[lo:hi] = self._compute_digests(self.regs[lo:hi])

    # -- structural operations --

    def permute(self, perm: np.ndarray,
                config: Optional[execution.ExecConfig] = None) -> None:
        self.amp = self.amp[perm]
        self.regs = self.regs[perm]
        self.digests = self.digests[perm]

    def append_rows(self, amp: np.ndarray, regs: np.ndarray,
                    positions: Optional[np.ndarray] = None) -> None:
        """Insert new branches, before the given positions or at the end."""
        digests = self._compute_digests(regs)
        if positions is None:
            self.amp = np.concatenate([self.amp, amp])
            self.regs = np.concatenate([self.regs, regs])
            self.digests = np.concatenate([self.digests, digests])
        else:
            self.amp = np.insert(self.amp, positions, amp)
            self.regs = np.insert(self.regs, positions, regs, axis=0)
            self.digests = np.insert(self.digests, positions, digests)
        self.table.note_system_size(self.branch_count)

    def keep_rows(self, mask: np.ndarray) -> int:
        removed = int(mask.size - np.count_nonzero(mask))
        if removed:
            self.amp = self.amp[mask]
            self.regs = self.regs[mask]
            self.digests = self.digests[mask]
        return removed

    # -- invariants --

    def check_invariants(self, norm_tol: float = 1e-10) -> None:
        """Raise AssertionError when a state invariant is violated."""
        assert np.all(np.isfinite(self.amp.view(np.float64))), "non-finite amplitude"
        for d in self.table.active_descriptors():
            col = self.regs[:, d.slot]
            assert not np.any(col & ~d.mask), f"bits above width in '{d.name}'"
        recomputed = self._compute_digests(self.regs)
        assert np.array_equal(recomputed, self.digests), "stale cached digest"
        if self.branch_count:
            order = np.argsort(self.digests, kind="stable")
            eq = self.digests[order][1:] == self.digests[order][:-1]
            for i in np.nonzero(eq)[0]:
                a, b = order[i], order[i + 1]
                assert np.any(self.regs[a] != self.regs[b]), "duplicate basis values"
        if self.normalized:
            assert abs(self.norm_squared() - 1.0) <= norm_tol, "norm drift"
        if self.branch_count and self.prune_tol > 0:
            assert np.all(np.abs(self.amp) > self.prune_tol), "sub-tolerance branch"


# -- module-level operations (core-state surface) ------------------------------

def add_register(table: RegisterTable, name: str, width: int,
                 dtype: RegisterType = RegisterType.UINT) -> int:
    return table.add_register(name, width, dtype)


def remove_register(table: RegisterTable, state: SparseState, reg_id: int) -> None:
    table.remove_register(state, reg_id)


def sort_keys_for(state: SparseState, reg_id: int, bit: int):
    """Lexicographic key columns for idle-value ordering, primary first.

    Major key: register id 0's value (target bit masked out), then the other
    registers in ascending id order, and finally the target bit (0 before 1).
    """
    desc = state.table.get(reg_id)
    if not (0 <= bit < desc.width):
        raise NotActiveError(f"bit {bit} outside register '{desc.name}'")
    tmask = _U64_ONE << np.uint64(bit)
    keys = []
    widths = []
    for d in state.table.active_descriptors():
        col = state.regs[:, d.slot]
        if d.id == reg_id:
            keys.append(col & ~tmask)
        else:
            keys.append(col)
        widths.append(d.width)
    keys.append((state.regs[:, desc.slot] >> np.uint64(bit)) & _U64_ONE)
    widths.append(1)
    return keys, widths


def sort_by_idle(state: SparseState, reg_id: int, bit: int,
                 config: Optional[execution.ExecConfig] = None) -> None:
    """Order branches so coherent partners for (reg_id, bit) are adjacent."""
    if state.branch_count < 2:
        return
    with execution.profiler.timed("sort", "sort_by_idle"):
        keys, widths = sort_keys_for(state, reg_id, bit)
        perm = execution.sort_permutation(keys, widths, config)
        state.permute(perm, config)


def prune_zero(state: SparseState, tol: float = DEFAULT_PRUNE_TOL) -> int:
    """Drop every branch with |amplitude| <= tol; keep survivor order."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    keep = np.abs(state.amp) > tol
    return state.keep_rows(keep)


def dense_vector(state: SparseState) -> np.ndarray:
    """Dense 2^n amplitude vector; register id 0 fills the least significant bits."""
    descs = state.table.active_descriptors()
    total = sum(d.width for d in descs)
    if total > DENSE_EXPORT_MAX_QUBITS:
        raise TooManyQubitsError(
            f"{total} qubits exceeds dense export guard of {DENSE_EXPORT_MAX_QUBITS}")
    out = np.zeros(1 << total, dtype=np.complex128)
    if state.branch_count == 0:
        return out
    idx = np.zeros(state.branch_count, dtype=np.uint64)
    shift = 0
    for d in descs:
        idx |= state.regs[:, d.slot] << np.uint64(shift)
        shift += d.width
    out[idx] = state.amp
    return out
