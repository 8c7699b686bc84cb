"""Full-process discrete-adiabatic quantum linear-system solver."""

from .angles import AngleTree, PrepTree, build_angle_trees, build_prep_tree
from .encode import (
    EncodingRegisters,
    WalkRegisters,
    apply_hamiltonian_encoding,
    block_encode_hamiltonian,
    block_encode_matrix,
    dilated_rhs,
    interpolated_matrix,
    make_walk_registers,
    prepare_state,
    reflect_ancillas,
    solution_qubits,
)
from .systems import LinearSystem, Variant, gen_linear_system
from .sweep import ErrorCurve, experiment_sweep, fit_error_curve, write_sweep_csv
from .walk import WalkConfig, error_metric, rational_schedule, run_adiabatic

__all__ = [
    "AngleTree", "PrepTree", "build_angle_trees", "build_prep_tree",
    "EncodingRegisters", "WalkRegisters", "make_walk_registers",
    "prepare_state", "block_encode_matrix", "block_encode_hamiltonian",
    "apply_hamiltonian_encoding", "reflect_ancillas", "dilated_rhs",
    "interpolated_matrix", "solution_qubits",
    "LinearSystem", "Variant", "gen_linear_system",
    "WalkConfig", "rational_schedule", "run_adiabatic", "error_metric",
    "ErrorCurve", "experiment_sweep", "fit_error_curve", "write_sweep_csv",
]
