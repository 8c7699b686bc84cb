"""Discrete adiabatic evolution via qubitized walks, and the error metric."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .. import state as st
from ..errors import ZeroProjectionError
from ..execution import ExecConfig
from .angles import PrepTree, build_prep_tree
from .encode import (
    WalkRegisters,
    apply_hamiltonian_encoding,
    apply_prep_tree,
    dilated_rhs,
    make_walk_registers,
    reflect_ancillas,
    solution_qubits,
)
from .systems import LinearSystem, Variant


def rational_schedule(kappa: float) -> Callable[[float], float]:
    """f(s) = k/(k-1) (1 - 1/(1 + s(k-1))): slows down where the gap shrinks."""
    k = float(kappa)

    def f(s: float) -> float:
        return k / (k - 1.0) * (1.0 - 1.0 / (1.0 + s * (k - 1.0)))

    return f


@dataclass
class WalkConfig:
    """Walk length and schedule; the schedule defaults to the rational one."""

    steps: int
    schedule: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


@dataclass
class WalkSetup:
    state: st.SparseState
    regs: WalkRegisters
    rhs_tree: PrepTree


def setup_walk(system: LinearSystem) -> WalkSetup:
    """Fresh registers and the |0...0, b> starting state."""
    table = st.RegisterTable()
    regs = make_walk_registers(table, system)
    state = st.SparseState.zero_state(table)
    rhs_tree = build_prep_tree(dilated_rhs(system))
    apply_prep_tree(state, regs.solution, rhs_tree)
    return WalkSetup(state, regs, rhs_tree)


def walk_step(setup: WalkSetup, system: LinearSystem, f: float,
              config: Optional[ExecConfig] = None) -> None:
    """One W(s) = R o U_{H(f(s))} application."""
    apply_hamiltonian_encoding(setup.state, f, system, setup.regs,
                               setup.rhs_tree, config)
    reflect_ancillas(setup.state, setup.regs.ancilla_ids(), config)


def run_adiabatic(system: LinearSystem, config: WalkConfig,
                  exec_config: Optional[ExecConfig] = None) -> st.SparseState:
    """Prepare the rhs state, then apply W(n/T) for n = 0 .. T-1."""
    schedule = config.schedule or rational_schedule(system.kappa)
    setup = setup_walk(system)
    steps = config.steps
    for n in range(steps):
        walk_step(setup, system, schedule(n / steps), exec_config)
    return setup.state


def error_metric(final_state: st.SparseState, system: LinearSystem) -> float:
    """Phase-invariant distance between the ancilla-zero projection and the
    classically solved normalized solution; in [0, sqrt(2)] for valid runs."""
    x = np.linalg.solve(system.matrix, system.rhs)
    x = x / np.linalg.norm(x)
    table = final_state.table
    sol = table.id_of("sol")
    others = [d.id for d in table.active_descriptors() if d.id != sol]

    mask = np.ones(final_state.branch_count, dtype=bool)
    for reg in others:
        mask &= final_state.value_column(reg) == 0

    d = solution_qubits(system)
    projected = np.zeros(1 << d, dtype=np.complex128)
    idx = final_state.value_column(sol)[mask].astype(np.int64)
    projected[idx] = final_state.amp[mask]
    if system.variant is Variant.NON_HERMITIAN:
        # the dilated solution lives in the upper half: reference (0, x)
        reference = np.concatenate([np.zeros(system.size), x])
    else:
        reference = x

    norm = np.linalg.norm(projected)
    if norm < 1e-9:
        raise ZeroProjectionError(f"projected norm {norm:.3e} below 1e-9")
    fidelity = abs(np.vdot(reference, projected)) / norm
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * fidelity)))
