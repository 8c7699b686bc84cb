"""Block encodings for the adiabatic walk, assembled from sparse-state ops.

The matrix encoding follows the three-factor decomposition

    U_M = SWAP  o  (prepare column-norm state)^dagger  o  (prepare column k),

where both preparations descend QRAM-resident angle trees: every tree level
loads a packed angle word into the data register, applies the selected
rotation, and unloads the word again.  A signal state <i|<0|<0| then picks up
exactly M_ij / ||M||_F.

The walk Hamiltonian is encoded as

    U_H(f) = X_blk o C_{blk=0}[enc Q_b] o S(f) o C_{blk=1}[enc Q_b],

the block structure [[0, M(f) Q_b], [Q_b M(f), 0]] with Q_b = I - |b><b|.
M(f) is the interpolated matrix itself: (1-f) I + f A for a positive-definite
A, and the symmetric dilation [[(1-f) I, f A], [f A^T, -(1-f) I]] otherwise
(the sign keeps M(f) invertible along the whole path).  Each factor is
Hermitian and self-inverse, which makes U_H(f) self-inverse: exactly what the
qubitized walk needs for its two-dimensional invariant subspaces.  Q_b is
encoded as (I + R_b)/2 with one coin qubit and R_b the reflection about |b>;
S(f) symmetrizes the plain matrix encoding with one extra qubit g via
H_g (|0><1| ox U_M + |1><0| ox U_M^dagger) H_g.  Every angle entering the
circuit is a smooth function of f, so the walk family has no parameter
singularities at the schedule boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .. import state as st
from ..errors import AncillaNotZeroError, TargetNotZeroError
from ..execution import ExecConfig, profiler
from ..gates import (
    Control,
    Unitary2,
    apply_flip,
    apply_phase,
    apply_unitary2,
    exchange_registers,
    interfere_general,
)
from ..qram import QramMemory, qram_load_bits
from .angles import AngleTree, PrepTree, build_angle_trees, build_prep_tree, decode_words
from .systems import LinearSystem, Variant

_ONE = np.uint64(1)


@dataclass(frozen=True)
class EncodingRegisters:
    """Register trio used by the plain matrix block encoding."""

    target: int       # d qubits, carries the encoded space
    qram_data: int    # 64-bit angle word register
    prep: int         # d-qubit encoding ancilla


@dataclass(frozen=True)
class WalkRegisters:
    """Register ids used by the walk; names are fixed so they can be
    recovered from any state's table."""

    solution: int     # "sol"  d qubits (d = n, or n+1 for the dilated variant)
    block: int        # "blk"  Hamiltonian block index
    proj_coin: int    # "proj" projector-encoding coin
    herm: int         # "herm" symmetrizer qubit
    qram_data: int    # "qword" 64-bit angle word register
    prep: int         # "prep" d-qubit encoding ancilla

    def encoding(self) -> EncodingRegisters:
        return EncodingRegisters(self.solution, self.qram_data, self.prep)

    def ancilla_ids(self) -> list[int]:
        """Registers reflected by the walk: every encoding ancilla.

        The block qubit spans the Hamiltonian's own space and is deliberately
        not reflected; the solution register carries the tracked state.
        """
        return [self.proj_coin, self.herm, self.qram_data, self.prep]


def solution_qubits(system: LinearSystem) -> int:
    return system.n if system.variant is Variant.POSITIVE_DEFINITE else system.n + 1


def interpolated_matrix(system: LinearSystem, f: float) -> np.ndarray:
    """M(f): the walk's matrix path, symmetric for both variants."""
    a = system.matrix
    size = system.size
    if system.variant is Variant.POSITIVE_DEFINITE:
        return (1.0 - f) * np.eye(size) + f * a
    top = np.hstack([(1.0 - f) * np.eye(size), f * a])
    bot = np.hstack([f * a.T, -(1.0 - f) * np.eye(size)])
    return np.vstack([top, bot])


def dilated_rhs(system: LinearSystem) -> np.ndarray:
    """The rhs embedded in the walk's solution space (zero-padded if dilated)."""
    if system.variant is Variant.POSITIVE_DEFINITE:
        return system.rhs
    return np.concatenate([system.rhs, np.zeros(system.size)])


def make_walk_registers(table: st.RegisterTable,
                        system: LinearSystem) -> WalkRegisters:
    d = solution_qubits(system)
    sol = table.add_register("sol", d)
    blk = table.add_register("blk", 1, st.RegisterType.BOOL)
    proj = table.add_register("proj", 1, st.RegisterType.BOOL)
    herm = table.add_register("herm", 1, st.RegisterType.BOOL)
    qword = table.add_register("qword", 64)
    prep = table.add_register("prep", d)
    return WalkRegisters(sol, blk, proj, herm, qword, prep)


# -- selected rotations -------------------------------------------------------

def _signed_ry_entries(theta, neg0, neg1, inverse):
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    f0 = np.where(neg0 == _ONE, -1.0, 1.0)
    f1 = np.where(neg1 == _ONE, -1.0, 1.0)
    if inverse:  # real orthogonal: inverse = transpose
        return f0 * c, f1 * s, -f1 * s, f0 * c
    return f0 * c, -f1 * s, f1 * s, f0 * c


def apply_prep_tree(state: st.SparseState, reg_id: int, tree: PrepTree,
                    controls: Sequence[Control] = (), inverse: bool = False,
                    config: Optional[ExecConfig] = None) -> None:
    """Multiplexed-rotation descent with angles read from the branch's own
    prefix bits (the QRAM-free special case used for |b> preparation)."""
    slot = state.table.get(reg_id).slot
    depth = tree.depth
    levels = range(depth - 1, -1, -1) if inverse else range(depth)
    for level in levels:
        target_bit = depth - 1 - level
        thetas = tree.thetas[level]
        leaf = level == depth - 1
        shift = np.uint64(target_bit + 1)

        def matrix_fn(s, rows, thetas=thetas, leaf=leaf, shift=shift):
            prefix = (s.regs[rows, slot] >> shift).astype(np.int64)
            theta = thetas[prefix]
            if leaf:
                return _signed_ry_entries(theta, tree.leaf_neg0[prefix],
                                          tree.leaf_neg1[prefix], inverse)
            return _signed_ry_entries(theta, 0, 0, inverse)

        with profiler.timed("interference", "selected_rotation"):
            interfere_general(state, reg_id, target_bit, matrix_fn, controls, config)


def prepare_state(state: st.SparseState, reg_id: int, amplitudes,
                  config: Optional[ExecConfig] = None) -> None:
    """Load a real unit vector into a register currently |0> in all branches."""
    col = state.value_column(reg_id)
    if np.any(col != 0):
        raise TargetNotZeroError("state-prep target register is not |0>")
    apply_prep_tree(state, reg_id, build_prep_tree(amplitudes), config=config)


def _qword_matrix_fn(state, qword_slot, inverse):
    def matrix_fn(s, rows):
        theta, neg0, neg1 = decode_words(s.regs[rows, qword_slot])
        return _signed_ry_entries(theta, neg0, neg1, inverse)
    return matrix_fn


def apply_prep_qram(state: st.SparseState, target_reg: int,
                    level_memories: Sequence[QramMemory],
                    column_addr: Sequence[tuple[int, int]],
                    qword_reg: int,
                    controls: Sequence[Control] = (), inverse: bool = False,
                    config: Optional[ExecConfig] = None) -> None:
    """Tree descent with every angle fetched through the QRAM register.

    Level l loads memory[l] at address (column_addr bits << l) | prefix, where
    prefix is the already-prepared top l bits of the target register; the
    selected rotation then reads the loaded word, and a second load restores
    the word register to zero.
    """
    depth = len(level_memories)
    matrix_fn = _qword_matrix_fn(state, state.table.get(qword_reg).slot, inverse)
    levels = range(depth - 1, -1, -1) if inverse else range(depth)
    for level in levels:
        target_bit = depth - 1 - level
        addr_bits = [(target_reg, b) for b in range(depth - level, depth)]
        addr_bits += list(column_addr)
        memory = level_memories[level]
        qram_load_bits(state, addr_bits, qword_reg, memory, controls, config)
        with profiler.timed("interference", "selected_rotation"):
            interfere_general(state, target_reg, target_bit, matrix_fn,
                              controls, config)
        qram_load_bits(state, addr_bits, qword_reg, memory, controls, config)


# -- the matrix block encoding ------------------------------------------------

def _apply_matrix_encoding(state, regs: EncodingRegisters, trees: AngleTree,
                           controls=(), inverse=False, config=None) -> None:
    """U_M (or its inverse): column prep, inverse norm prep, register swap."""
    d = trees.depth
    column_bits = [(regs.target, b) for b in range(d)]
    if not inverse:
        apply_prep_qram(state, regs.prep, trees.column_levels, column_bits,
                        regs.qram_data, controls, False, config)
        apply_prep_qram(state, regs.target, trees.psi_levels, [],
                        regs.qram_data, controls, True, config)
        exchange_registers(state, regs.target, regs.prep, controls, config)
    else:
        exchange_registers(state, regs.target, regs.prep, controls, config)
        apply_prep_qram(state, regs.target, trees.psi_levels, [],
                        regs.qram_data, controls, False, config)
        apply_prep_qram(state, regs.prep, trees.column_levels, column_bits,
                        regs.qram_data, controls, True, config)


def block_encode_matrix(state: st.SparseState, regs: EncodingRegisters,
                        trees: AngleTree,
                        config: Optional[ExecConfig] = None) -> None:
    """Public U_M application; requires the encoding ancillas in |0>."""
    for reg in (regs.qram_data, regs.prep):
        if np.any(state.value_column(reg) != 0):
            raise AncillaNotZeroError(
                f"register '{state.table.get(reg).name}' must be |0>")
    _apply_matrix_encoding(state, regs, trees, (), False, config)


def _apply_symmetrized_matrix(state, regs: WalkRegisters, trees, controls,
                              config):
    """Hermitian, self-inverse encoding of a symmetric M:
    H_g (|0><1|_g ox U_M + |1><0|_g ox U_M^dagger) H_g."""
    g = regs.herm
    h = Unitary2.hadamard()
    enc = regs.encoding()
    apply_unitary2(state, g, 0, h, controls, config)
    _apply_matrix_encoding(state, enc, trees,
                           list(controls) + [Control(g, 0, 0)], True, config)
    _apply_matrix_encoding(state, enc, trees,
                           list(controls) + [Control(g, 0, 1)], False, config)
    apply_flip(state, g, 0, controls, config)
    apply_unitary2(state, g, 0, h, controls, config)


def _apply_projector_encoding(state, regs: WalkRegisters, rhs_tree: PrepTree,
                              block_value: int, config) -> None:
    """(I + R_b)/2 on the solution space, controlled on the block qubit.

    R_b reflects about |b>; the uncontrolled |b>-prep conjugation turns the
    controlled reflection into one controlled phase flip on the zero value.
    """
    blk_ctl = [Control(regs.block, 0, block_value)]
    h = Unitary2.hadamard()
    apply_unitary2(state, regs.proj_coin, 0, h, blk_ctl, config)
    apply_prep_tree(state, regs.solution, rhs_tree, (), True, config)
    d = state.table.get(regs.solution).width
    phase_controls = blk_ctl + [Control(regs.solution, b, 0) for b in range(d)]
    apply_phase(state, regs.proj_coin, 0, -1.0, phase_controls, config)
    apply_prep_tree(state, regs.solution, rhs_tree, (), False, config)
    apply_unitary2(state, regs.proj_coin, 0, h, blk_ctl, config)


def apply_hamiltonian_encoding(state: st.SparseState, f: float,
                               system: LinearSystem, regs: WalkRegisters,
                               rhs_tree: PrepTree,
                               config: Optional[ExecConfig] = None) -> float:
    """One application of the self-inverse block encoding of H(f)/alpha(f).

    The angle trees of M(f) are classical preprocessing recomputed per value
    of f.  M(1) serves as the angle gauge for zero-mass subtrees (M(0) is a
    signed identity, so whole subtrees carry no mass there); with that gauge
    every rotation angle varies continuously along the schedule, which the
    discrete adiabatic theorem needs from the walk family.
    """
    trees = build_angle_trees(interpolated_matrix(system, f),
                              gauge=interpolated_matrix(system, 1.0))
    _apply_projector_encoding(state, regs, rhs_tree, 1, config)
    _apply_symmetrized_matrix(state, regs, trees, (), config)
    _apply_projector_encoding(state, regs, rhs_tree, 0, config)
    apply_flip(state, regs.block, 0, (), config)
    return trees.frobenius_norm


def block_encode_hamiltonian(state: st.SparseState, f: float,
                             system: LinearSystem, regs: WalkRegisters,
                             config: Optional[ExecConfig] = None) -> float:
    """Public H(f) encoding; returns alpha(f) = ||M(f)||_F."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"schedule value f = {f} outside [0, 1]")
    rhs_tree = build_prep_tree(dilated_rhs(system))
    return apply_hamiltonian_encoding(state, f, system, regs, rhs_tree, config)


def reflect_ancillas(state: st.SparseState, ancilla_ids: Sequence[int],
                     config: Optional[ExecConfig] = None) -> None:
    """i (2|0><0| - I) on the given ancillas: +i where all are zero, -i else."""
    mask = np.ones(state.branch_count, dtype=bool)
    for reg in ancilla_ids:
        mask &= state.value_column(reg) == 0
    with profiler.timed("noninterference", "reflect_ancillas"):
        state.amp *= np.where(mask, 1j, -1j)
    state.table.note_system_size(state.branch_count)
