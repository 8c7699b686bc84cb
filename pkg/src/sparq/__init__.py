"""sparq: a register-level sparse quantum circuit simulator.

Only nonzero state branches are stored.  Non-interference operations (flips,
phases, arithmetic, QRAM loads) update branches independently; interference
operations (general single-qubit unitaries) sort branches so coherent
partners meet, mix them, and prune destructive zeros.  On top sit an OpenQASM
2.0 front end, benchmark harnesses, and a full discrete-adiabatic quantum
linear-system solver driven through the integrated QRAM oracle.
"""

from .errors import SimulationError
from .execution import ExecConfig, SpeedupReport, default_config, measure_speedup, profiler
from .gates import Control, GateKind, Unitary2
from .qasm import CircuitIR, parse_qasm
from .qram import QramMemory, load_memory_file, qram_load
from .runner import RunReport, lower_and_run
from .state import (
    Branch,
    RegisterTable,
    RegisterType,
    SparseState,
    add_register,
    branch_digest,
    dense_vector,
    prune_zero,
    remove_register,
    sort_by_idle,
)

__version__ = "0.1.0"

__all__ = [
    "SimulationError", "ExecConfig", "SpeedupReport", "default_config",
    "measure_speedup", "profiler", "Control", "GateKind", "Unitary2",
    "CircuitIR", "parse_qasm", "QramMemory", "load_memory_file", "qram_load",
    "RunReport", "lower_and_run", "Branch", "RegisterTable", "RegisterType",
    "SparseState", "add_register", "branch_digest", "dense_vector",
    "prune_zero", "remove_register", "sort_by_idle", "__version__",
]
