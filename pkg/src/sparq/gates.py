"""Gate application on sparse states.

Two families:

* non-interference ops (bit flips, phases, classical arithmetic) update each
  branch independently and never change the branch count;
* interference ops (general 2x2 unitaries) sort branches so coherent partners
  are adjacent, mix pairs in place, create missing partners for singletons,
  and prune amplitudes that interfered to zero.

Diagonal and anti-diagonal unitaries take the non-interference fast path.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import execution, state as st
from .errors import (
    AliasedRegistersError,
    EvenMultiplierError,
    InvalidTargetError,
    NonUnitPhaseError,
    NotUnitaryError,
    UnnormalizedStateError,
    WidthMismatchError,
)

_U64_ONE = np.uint64(1)

UNITARY_TOL = 1e-12       # U†U = I tolerance
KIND_TOL = 1e-14          # matrix-structure classification tolerance


class Control(NamedTuple):
    """One control condition: (register id, bit, required value in {0, 1})."""

    reg: int
    bit: int
    value: int


ControlSpec = Sequence[Control]


def _validate_controls(state: st.SparseState, controls) -> list[Control]:
    seen = set()
    out = []
    for c in controls or ():
        c = Control(*c)
        desc = state.table.get(c.reg)
        if not (0 <= c.bit < desc.width):
            raise InvalidTargetError(
                f"control bit {c.bit} outside register '{desc.name}'")
        if c.value not in (0, 1):
            raise InvalidTargetError("control value must be 0 or 1")
        if (c.reg, c.bit) in seen:
            raise InvalidTargetError(f"duplicate control on ({c.reg}, {c.bit})")
        seen.add((c.reg, c.bit))
        out.append(c)
    return out


def _control_mask(state: st.SparseState, controls: list[Control],
                  lo: int = 0, hi: Optional[int] = None) -> Optional[np.ndarray]:
    """Boolean mask of branches satisfying every control; None means all."""
    if not controls:
        return None
    hi = state.branch_count if hi is None else hi
    mask = None
    for c in controls:
        col = state.regs[lo:hi, state.table.get(c.reg).slot]
        bitvals = (col >> np.uint64(c.bit)) & _U64_ONE
        cond = bitvals == np.uint64(c.value)
        mask = cond if mask is None else (mask & cond)
    return mask


def _target(state: st.SparseState, reg_id: int, bit: int) -> tuple[int, np.uint64]:
    desc = state.table.get(reg_id)
    if not (0 <= bit < desc.width):
        raise InvalidTargetError(f"bit {bit} outside register '{desc.name}'")
    return desc.slot, _U64_ONE << np.uint64(bit)


# -- 2x2 unitaries -------------------------------------------------------------

class GateKind(enum.Enum):
    DIAGONAL = "diagonal"
    ANTI_DIAGONAL = "anti-diagonal"
    GENERAL = "general"


@dataclass(frozen=True)
class Unitary2:
    """Single-qubit unitary, stored entrywise."""

    u00: complex
    u01: complex
    u10: complex
    u11: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.u00, self.u01], [self.u10, self.u11]],
                        dtype=np.complex128)

    def check_unitary(self, tol: float = UNITARY_TOL) -> None:
        m = self.matrix
        if not np.allclose(m.conj().T @ m, np.eye(2), atol=tol, rtol=0):
            raise NotUnitaryError(f"matrix is not unitary within {tol}: {m}")

    def kind(self, tol: float = KIND_TOL) -> GateKind:
        if abs(self.u01) <= tol and abs(self.u10) <= tol:
            return GateKind.DIAGONAL
        if abs(self.u00) <= tol and abs(self.u11) <= tol:
            return GateKind.ANTI_DIAGONAL
        return GateKind.GENERAL

    def dagger(self) -> Unitary2:
        return Unitary2(self.u00.conjugate(), self.u10.conjugate(),
                        self.u01.conjugate(), self.u11.conjugate())

    # common constructions

    @staticmethod
    def hadamard() -> Unitary2:
        s = 1.0 / math.sqrt(2.0)
        return Unitary2(s, s, s, -s)

    @staticmethod
    def rx(theta: float) -> Unitary2:
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return Unitary2(c, -1j * s, -1j * s, c)

    @staticmethod
    def ry(theta: float) -> Unitary2:
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return Unitary2(c, -s, s, c)

    @staticmethod
    def rz(theta: float) -> Unitary2:
        return Unitary2(cmath.exp(-0.5j * theta), 0, 0, cmath.exp(0.5j * theta))

    @staticmethod
    def phase(lam: float) -> Unitary2:
        return Unitary2(1, 0, 0, cmath.exp(1j * lam))

    @staticmethod
    def u3(theta: float, phi: float, lam: float) -> Unitary2:
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return Unitary2(c, -cmath.exp(1j * lam) * s,
                        cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c)

    @staticmethod
    def signed_ry(theta: float, s0: int, s1: int) -> Unitary2:
        """Real rotation with signed column 0: maps |0> to s0*cos + s1*sin."""
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        f0 = -1.0 if s0 else 1.0
        f1 = -1.0 if s1 else 1.0
        return Unitary2(f0 * c, -f1 * s, f1 * s, f0 * c)


# -- non-interference operations ------------------------------------------------

def apply_flip(state: st.SparseState, reg_id: int, bit: int,
               controls: ControlSpec = (), config=None) -> None:
    """XOR the target bit on every branch satisfying the controls."""
    slot, tmask = _target(state, reg_id, bit)
    ctrls = _validate_controls(state, controls)

    def kernel(s, lo, hi):
        mask = _control_mask(s, ctrls, lo, hi)
        col = s.regs[lo:hi, slot]
        if mask is None:
            col ^= tmask
        else:
            col[mask] ^= tmask
        s.refresh_digests(lo, hi)

    with execution.profiler.timed("noninterference", "flip"):
        execution.parallel_for_branches(state, kernel, config)
    state.table.note_system_size(state.branch_count)


def apply_phase(state: st.SparseState, reg_id: int, bit: int,
                phase_on_one: complex, controls: ControlSpec = (),
                config=None) -> None:
    """Multiply amplitudes of branches with target bit 1 by a unit phase."""
    if abs(abs(phase_on_one) - 1.0) > 1e-12:
        raise NonUnitPhaseError(f"|phase| = {abs(phase_on_one)} != 1")
    slot, _ = _target(state, reg_id, bit)
    ctrls = _validate_controls(state, controls)
    shift = np.uint64(bit)

    def kernel(s, lo, hi):
        mask = (s.regs[lo:hi, slot] >> shift) & _U64_ONE == _U64_ONE
        cmask = _control_mask(s, ctrls, lo, hi)
        if cmask is not None:
            mask &= cmask
        s.amp[lo:hi][mask] *= phase_on_one

    with execution.profiler.timed("noninterference", "phase"):
        execution.parallel_for_branches(state, kernel, config)
    state.table.note_system_size(state.branch_count)


def apply_y(state: st.SparseState, reg_id: int, bit: int,
            controls: ControlSpec = (), config=None) -> None:
    """Pauli Y: flip the bit, multiply by +i (was 0) or -i (was 1)."""
    slot, tmask = _target(state, reg_id, bit)
    ctrls = _validate_controls(state, controls)
    shift = np.uint64(bit)

    def kernel(s, lo, hi):
        mask = _control_mask(s, ctrls, lo, hi)
        col = s.regs[lo:hi, slot]
        amp = s.amp[lo:hi]
        was_one = (col >> shift) & _U64_ONE == _U64_ONE
        if mask is None:
            amp *= np.where(was_one, -1j, 1j)
            col ^= tmask
        else:
            amp[mask] *= np.where(was_one[mask], -1j, 1j)
            col[mask] ^= tmask
        s.refresh_digests(lo, hi)

    with execution.profiler.timed("noninterference", "pauli_y"):
        execution.parallel_for_branches(state, kernel, config)
    state.table.note_system_size(state.branch_count)


# -- classical arithmetic ---------------------------------------------------

def _arith(state, ctrls, slot, width, update, name, config):
    wmask = np.uint64((1 << width) - 1)

    def kernel(s, lo, hi):
        mask = _control_mask(s, ctrls, lo, hi)
        col = s.regs[lo:hi, slot]
        if mask is None:
            col[:] = update(col, lo, hi) & wmask
        else:
            col[mask] = update(col[mask], lo, hi, mask) & wmask
        s.refresh_digests(lo, hi)

    with execution.profiler.timed("noninterference", name):
        execution.parallel_for_branches(state, kernel, config)
    state.table.note_system_size(state.branch_count)


def arith_add_const(state: st.SparseState, reg_id: int, c: int,
                    controls: ControlSpec = (), config=None) -> None:
    """reg <- (reg + c) mod 2^width, per branch."""
    desc = state.table.get(reg_id)
    ctrls = _validate_controls(state, controls)
    cval = np.uint64(int(c) & ((1 << desc.width) - 1))
    _arith(state, ctrls, desc.slot, desc.width,
           lambda col, *a: col + cval, "add_const", config)


def arith_add_reg(state: st.SparseState, src_id: int, dst_id: int,
                  controls: ControlSpec = (), config=None) -> None:
    """dst <- (dst + src) mod 2^width(dst), per branch."""
    if src_id == dst_id:
        raise AliasedRegistersError("src and dst must differ")
    src = state.table.get(src_id)
    dst = state.table.get(dst_id)
    ctrls = _validate_controls(state, controls)

    def update(col, lo, hi, mask=None):
        other = state.regs[lo:hi, src.slot]
        return col + (other[mask] if mask is not None else other)

    _arith(state, ctrls, dst.slot, dst.width, update, "add_reg", config)


def arith_xor_reg(state: st.SparseState, src_id: int, dst_id: int,
                  controls: ControlSpec = (), config=None) -> None:
    """dst <- dst XOR src, per branch (self-inverse)."""
    if src_id == dst_id:
        raise AliasedRegistersError("src and dst must differ")
    src = state.table.get(src_id)
    dst = state.table.get(dst_id)
    ctrls = _validate_controls(state, controls)

    def update(col, lo, hi, mask=None):
        other = state.regs[lo:hi, src.slot]
        return col ^ (other[mask] if mask is not None else other)

    _arith(state, ctrls, dst.slot, dst.width, update, "xor_reg", config)


def arith_mul_const_odd(state: st.SparseState, reg_id: int, c_odd: int,
                        controls: ControlSpec = (), config=None) -> None:
    """reg <- (reg * c) mod 2^width; c must be odd so the map is invertible."""
    if int(c_odd) % 2 == 0:
        raise EvenMultiplierError(f"multiplier {c_odd} is even")
    desc = state.table.get(reg_id)
    ctrls = _validate_controls(state, controls)
    cval = np.uint64(int(c_odd) & ((1 << desc.width) - 1))
    _arith(state, ctrls, desc.slot, desc.width,
           lambda col, *a: col * cval, "mul_const_odd", config)


def exchange_registers(state: st.SparseState, reg_a: int, reg_b: int,
                       controls: ControlSpec = (), config=None) -> None:
    """Swap the values of two equal-width registers, per branch."""
    da = state.table.get(reg_a)
    db = state.table.get(reg_b)
    if da.width != db.width:
        raise WidthMismatchError(
            f"cannot swap widths {da.width} and {db.width}")
    if reg_a == reg_b:
        raise AliasedRegistersError("registers must differ")
    ctrls = _validate_controls(state, controls)

    def kernel(s, lo, hi):
        mask = _control_mask(s, ctrls, lo, hi)
        ca = s.regs[lo:hi, da.slot]
        cb = s.regs[lo:hi, db.slot]
        if mask is None:
            tmp = ca.copy()
            ca[:] = cb
            cb[:] = tmp
        else:
            tmp = ca[mask]
            ca[mask] = cb[mask]
            cb[mask] = tmp
        s.refresh_digests(lo, hi)

    with execution.profiler.timed("noninterference", "exchange_registers"):
        execution.parallel_for_branches(state, kernel, config)
    state.table.note_system_size(state.branch_count)


# -- interference operations -------------------------------------------------

MatrixFn = Callable[[st.SparseState, np.ndarray], tuple]


def apply_unitary2(state: st.SparseState, reg_id: int, bit: int, u: Unitary2,
                   controls: ControlSpec = (), config=None) -> None:
    """Apply a 2x2 unitary to one qubit, dispatching on matrix structure.

    Diagonal matrices reduce to per-branch phases and anti-diagonal ones to a
    flip plus phases; both keep the branch count.  General matrices take the
    sort / pair / create-partner / prune path.
    """
    u.check_unitary()
    kind = u.kind()
    if kind is GateKind.DIAGONAL:
        _apply_diagonal(state, reg_id, bit, u.u00, u.u11, controls, config)
    elif kind is GateKind.ANTI_DIAGONAL:
        _apply_anti_diagonal(state, reg_id, bit, u.u01, u.u10, controls, config)
    else:
        def const_matrix(_state, _rows):
            return u.u00, u.u01, u.u10, u.u11

        with execution.profiler.timed("interference", "unitary2_general"):
            interfere_general(state, reg_id, bit, const_matrix, controls, config)


def _apply_diagonal(state, reg_id, bit, d0, d1, controls, config):
    slot, _ = _target(state, reg_id, bit)
    ctrls = _validate_controls(state, controls)
    shift = np.uint64(bit)

    def kernel(s, lo, hi):
        was_one = (s.regs[lo:hi, slot] >> shift) & _U64_ONE == _U64_ONE
        factors = np.where(was_one, d1, d0)
        mask = _control_mask(s, ctrls, lo, hi)
        if mask is None:
            s.amp[lo:hi] *= factors
        else:
            s.amp[lo:hi][mask] *= factors[mask]

    with execution.profiler.timed("noninterference", "unitary2_diagonal"):
        execution.parallel_for_branches(state, kernel, config)
    state.table.note_system_size(state.branch_count)


def _apply_anti_diagonal(state, reg_id, bit, a01, a10, controls, config):
    slot, tmask = _target(state, reg_id, bit)
    ctrls = _validate_controls(state, controls)
    shift = np.uint64(bit)

    def kernel(s, lo, hi):
        col = s.regs[lo:hi, slot]
        was_one = (col >> shift) & _U64_ONE == _U64_ONE
        factors = np.where(was_one, a01, a10)
        mask = _control_mask(s, ctrls, lo, hi)
        if mask is None:
            s.amp[lo:hi] *= factors
            col ^= tmask
        else:
            s.amp[lo:hi][mask] *= factors[mask]
            col[mask] ^= tmask
        s.refresh_digests(lo, hi)

    with execution.profiler.timed("noninterference", "unitary2_antidiagonal"):
        execution.parallel_for_branches(state, kernel, config)
    state.table.note_system_size(state.branch_count)


def interfere_general(state: st.SparseState, reg_id: int, bit: int,
                      matrix_fn: MatrixFn, controls: ControlSpec = (),
                      config=None) -> None:
    """Sort, group coherent partners, mix 2x2 blocks, prune zeros.

    ``matrix_fn(state, rows)`` returns the (u00, u01, u10, u11) entries for
    the groups whose first branch sits at ``rows``; entries may be scalars or
    arrays.  Within a coherent group every idle value is identical, so the
    matrix and the control predicate are constant across the group.
    """
    ctrls = _validate_controls(state, controls)
    for c in ctrls:
        if c.reg == reg_id and c.bit == bit:
            raise InvalidTargetError("control may not overlap the target bit")
    if ctrls:
        mask_any = _control_mask(state, ctrls)
        if not np.any(mask_any):
            return

    st.sort_by_idle(state, reg_id, bit, config)
    n = state.branch_count
    if n == 0:
        return
    desc = state.table.get(reg_id)
    slot = desc.slot
    tmask = _U64_ONE << np.uint64(bit)
    shift = np.uint64(bit)

    # adjacent rows with equal idle values are coherent partners
    if n > 1:
        eq = np.ones(n - 1, dtype=bool)
        for d in state.table.active_descriptors():
            col = state.regs[:, d.slot]
            if d.id == reg_id:
                col = col & ~tmask
            eq &= col[1:] == col[:-1]
        is_start = np.empty(n, dtype=bool)
        is_start[0] = True
        is_start[1:] = ~eq
        pair_first = np.nonzero(is_start[:-1] & eq)[0]
    else:
        is_start = np.ones(1, dtype=bool)
        pair_first = np.empty(0, dtype=np.int64)

    single = is_start.copy()
    single[pair_first] = False
    if pair_first.size:
        single[pair_first + 1] = False
    singles = np.nonzero(single)[0]

    cmask = _control_mask(state, ctrls)

    if pair_first.size:
        i0 = pair_first
        i1 = pair_first + 1
        if cmask is not None:
            sel = cmask[i0]
            i0, i1 = i0[sel], i1[sel]
        if i0.size:
            u00, u01, u10, u11 = matrix_fn(state, i0)
            a0 = state.amp[i0]
            a1 = state.amp[i1]
            state.amp[i0] = u00 * a0 + u01 * a1
            state.amp[i1] = u10 * a0 + u11 * a1

    if singles.size:
        if cmask is not None:
            singles = singles[cmask[singles]]
    if singles.size:
        u00, u01, u10, u11 = matrix_fn(state, singles)
        bitvals = (state.regs[singles, slot] >> shift) & _U64_ONE
        was_one = bitvals == _U64_ONE
        a = state.amp[singles]
        stay = np.where(was_one, u11 * a, u00 * a)
        partner = np.where(was_one, u01 * a, u10 * a)
        state.amp[singles] = stay
        create = np.abs(partner) > state.prune_tol
        if np.any(create):
            rows = singles[create]
            new_regs = state.regs[rows].copy()
            new_regs[:, slot] ^= tmask
            # partner with bit 1 goes after its mate, bit 0 partner before
            positions = rows + np.where(was_one[create], 0, 1)
            state.append_rows(partner[create], new_regs, positions)

    prune_count = st.prune_zero(state, state.prune_tol)
    del prune_count
    state.table.note_system_size(state.branch_count)


# -- measurement ---------------------------------------------------------------

def measure_register(state: st.SparseState, reg_id: int, rng_seed) -> tuple[int, st.SparseState]:
    """Sample the register value, collapse and renormalize the state.

    The outcome value v is drawn with probability sum_{reg=v} |a_i|^2 and is
    deterministic for a given seed (or Generator).
    """
    desc = state.table.get(reg_id)
    probs = np.abs(state.amp) ** 2
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-8:
        raise UnnormalizedStateError(f"norm^2 = {total} before measurement")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) \
        else np.random.default_rng(rng_seed)
    r = rng.random() * total
    cumulative = np.cumsum(probs)
    k = int(np.searchsorted(cumulative, r, side="right"))
    k = min(k, state.branch_count - 1)
    outcome = int(state.regs[k, desc.slot])
    keep = state.regs[:, desc.slot] == np.uint64(outcome)
    kept_norm = math.sqrt(float(probs[keep].sum()))
    state.keep_rows(keep)
    state.amp /= kept_norm
    state.table.note_system_size(state.branch_count)
    return outcome, state
