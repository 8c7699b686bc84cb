"""Desk-scale reproductions of the scaling, speedup and circuit-table studies."""

from __future__ import annotations

import cmath
import math
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import gates, qram as qram_mod, runner, state as st
from .execution import ExecConfig, measure_speedup
from .gates import Control, Unitary2
from .qasm import parse_qasm

# bytes per stored branch: complex amplitude + slot array + cached digest
def bytes_per_branch(table: st.RegisterTable) -> int:
    return 16 + 8 * table.slot_capacity + 8


# background term reported next to the state-size proxy; it models the
# constant interpreter/runtime footprint that dominates small-state runs and
# is kept separate from the per-branch figure in every CSV row
BACKGROUND_BYTES = 1_500_000


def uniform_state(branch_count: int, slot_capacity: int = 4) -> st.SparseState:
    """Uniform superposition over the first branch_count basis values."""
    width = max(3, (branch_count - 1).bit_length())
    table = st.RegisterTable(slot_capacity=slot_capacity)
    reg = table.add_register("u", width)
    regs = np.zeros((branch_count, slot_capacity), dtype=np.uint64)
    regs[:, table.get(reg).slot] = np.arange(branch_count, dtype=np.uint64)
    amp = np.full(branch_count, 1.0 / math.sqrt(branch_count),
                  dtype=np.complex128)
    return st.SparseState(table, amp, regs)


# -- operation registry -------------------------------------------------------

# rotation parameterization used throughout the benchmarks: the general form
# is Ry(0.3), the diagonal form Rz(0.3), and the anti-diagonal form X * Rz(0.3)
_ROT_GENERAL = Unitary2.ry(0.3)
_ROT_DIAG = Unitary2.rz(0.3)
_ROT_ADIAG = Unitary2(0, cmath.exp(0.15j), cmath.exp(-0.15j), 0)

NON_INTERFERENCE_OPS = ("x", "y", "z", "cx", "ccx", "cz")
INTERFERENCE_OPS = ("h", "ch", "rot", "crot", "rot_diag", "rot_adiag",
                    "crot_diag", "crot_adiag")


def _op(name: str) -> Callable[[st.SparseState, ExecConfig], None]:
    """Benchmark operations act on bit 0; controlled forms use bits 1 (and 2)."""
    ctl1 = lambda s: [Control(s.table.id_of("u"), 1, 1)]
    ctl2 = lambda s: [Control(s.table.id_of("u"), 1, 1),
                      Control(s.table.id_of("u"), 2, 1)]
    h = Unitary2.hadamard()

    table = {
        "x": lambda s, c: gates.apply_flip(s, s.table.id_of("u"), 0, (), c),
        "y": lambda s, c: gates.apply_y(s, s.table.id_of("u"), 0, (), c),
        "z": lambda s, c: gates.apply_phase(s, s.table.id_of("u"), 0, -1.0, (), c),
        "cx": lambda s, c: gates.apply_flip(s, s.table.id_of("u"), 0, ctl1(s), c),
        "ccx": lambda s, c: gates.apply_flip(s, s.table.id_of("u"), 0, ctl2(s), c),
        "cz": lambda s, c: gates.apply_phase(s, s.table.id_of("u"), 0, -1.0, ctl1(s), c),
        "h": lambda s, c: gates.apply_unitary2(s, s.table.id_of("u"), 0, h, (), c),
        "ch": lambda s, c: gates.apply_unitary2(s, s.table.id_of("u"), 0, h, ctl1(s), c),
        "rot": lambda s, c: gates.apply_unitary2(s, s.table.id_of("u"), 0, _ROT_GENERAL, (), c),
        "crot": lambda s, c: gates.apply_unitary2(s, s.table.id_of("u"), 0, _ROT_GENERAL, ctl1(s), c),
        "rot_diag": lambda s, c: gates.apply_unitary2(s, s.table.id_of("u"), 0, _ROT_DIAG, (), c),
        "crot_diag": lambda s, c: gates.apply_unitary2(s, s.table.id_of("u"), 0, _ROT_DIAG, ctl1(s), c),
        "rot_adiag": lambda s, c: gates.apply_unitary2(s, s.table.id_of("u"), 0, _ROT_ADIAG, (), c),
        "crot_adiag": lambda s, c: gates.apply_unitary2(s, s.table.id_of("u"), 0, _ROT_ADIAG, ctl1(s), c),
    }
    if name not in table:
        raise ValueError(f"unknown benchmark op '{name}'")
    return table[name]


# -- scaling experiment --------------------------------------------------------

@dataclass
class ScalingRow:
    op_name: str
    branch_count: int
    mean_s: float
    std_s: float
    state_bytes: int
    background_bytes: int

    @property
    def memory_proxy_bytes(self) -> int:
        return self.state_bytes + self.background_bytes


def parse_grid(spec: str) -> list[int]:
    """'10:1e7' -> decade points from 10 to 1e7; 'a:b:k' forces k points."""
    parts = spec.split(":")
    lo = float(parts[0])
    hi = float(parts[1])
    if len(parts) > 2:
        points = int(parts[2])
    else:
        points = int(round(math.log10(hi / lo))) + 1
    return [int(round(b)) for b in np.geomspace(lo, hi, points)]


def scaling_experiment(ops: Sequence[str], branch_grid: Sequence[int],
                       trials: int = 10,
                       exec_config: Optional[ExecConfig] = None) -> list[ScalingRow]:
    """Time each op on synthetic uniform-superposition states per grid point."""
    config = exec_config or ExecConfig(thread_count=1)
    rows = []
    for name in ops:
        op = _op(name)
        for branches in branch_grid:
            state = uniform_state(int(branches))
            op(state, config)  # warm-up
            times = []
            for _ in range(trials):
                start = time.perf_counter()
                op(state, config)
                times.append(time.perf_counter() - start)
            rows.append(ScalingRow(
                name, int(branches), statistics.fmean(times),
                statistics.pstdev(times) if len(times) > 1 else 0.0,
                int(branches) * bytes_per_branch(state.table),
                BACKGROUND_BYTES))
    return rows


def fit_time_slope(rows: Sequence[ScalingRow], op_name: str) -> float:
    """Log-log slope of mean time vs branch count for one op."""
    pts = [(r.branch_count, r.mean_s) for r in rows if r.op_name == op_name]
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def write_scaling_csv(path, rows: Sequence[ScalingRow]) -> None:
    import csv
    slopes = {name: fit_time_slope(rows, name)
              for name in {r.op_name for r in rows}}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["op", "branch_count", "mean_s", "std_s",
                         "state_bytes", "background_bytes",
                         "memory_proxy_bytes", "time_slope_fit"])
        for r in rows:
            writer.writerow([r.op_name, r.branch_count, f"{r.mean_s:.6e}",
                             f"{r.std_s:.6e}", r.state_bytes,
                             r.background_bytes, r.memory_proxy_bytes,
                             f"{slopes[r.op_name]:.4f}"])


def speedup_report(op_name: str, branch_count: int,
                   p_list: Sequence[int] = (1, 2, 4, 8), trials: int = 10):
    """Speedup(p) = T(1)/T(p) for one registry op at a fixed branch count."""
    op = _op(op_name)
    return measure_speedup(op, branch_count, p_list, trials,
                           state_factory=uniform_state, op_name=op_name)


# -- circuit generators ---------------------------------------------------------

def ghz_qasm(n: int) -> str:
    lines = ["OPENQASM 2.0;", f"qreg q[{n}];", "h q[0];"]
    lines += [f"cx q[{i}],q[{i + 1}];" for i in range(n - 1)]
    return "\n".join(lines) + "\n"


def qft_qasm(n: int) -> str:
    lines = ["OPENQASM 2.0;", f"qreg q[{n}];"]
    for i in range(n):
        lines.append(f"h q[{i}];")
        for j in range(i + 1, n):
            lines.append(f"cu1(pi/{1 << (j - i)}) q[{j}],q[{i}];")
    for i in range(n // 2):
        lines.append(f"swap q[{i}],q[{n - 1 - i}];")
    return "\n".join(lines) + "\n"


def swap_test_qasm(total_qubits: int) -> str:
    """1 ancilla + two (total-1)/2 qubit registers in full superposition."""
    if total_qubits % 2 == 0 or total_qubits < 3:
        raise ValueError("swap test needs an odd total of >= 3 qubits")
    m = (total_qubits - 1) // 2
    lines = ["OPENQASM 2.0;", "qreg a[1];", f"qreg x[{m}];", f"qreg y[{m}];",
             "h a[0];", "h x;", "h y;"]
    for i in range(m):
        # controlled swap from 3 Toffoli-style gates
        lines.append(f"cx y[{i}],x[{i}];")
        lines.append(f"ccx a[0],x[{i}],y[{i}];")
        lines.append(f"cx y[{i}],x[{i}];")
    lines.append("h a[0];")
    return "\n".join(lines) + "\n"


def qram_benchmark(addr_width: int, word_width: int, seed: int = 0):
    """Single-branch QRAM benchmark: set an address, load, unload, restore."""
    rng = np.random.default_rng(seed)
    entries = rng.integers(0, 1 << word_width, size=1 << addr_width,
                           dtype=np.uint64)
    memory = qram_mod.QramMemory(addr_width, word_width, entries)
    address = int(rng.integers(0, 1 << addr_width))
    lines = ["OPENQASM 2.0;", f"qreg a[{addr_width}];", f"qreg d[{word_width}];"]
    lines += [f"x a[{i}];" for i in range(addr_width) if (address >> i) & 1]
    lines += ["qram a,d;", "qram a,d;"]
    qasm = "\n".join(lines) + "\n"
    return qasm, memory


# -- circuit table ---------------------------------------------------------------

@dataclass
class BenchRow:
    circuit: str
    qubit_count: int
    sparsity: int          # peak branch count
    thread_count: int
    mean_s: float
    std_s: float
    memory_proxy_bytes: int


def default_table_circuits(qft_n: int = 16, swap_test_n: int = 13):
    """The circuit set of the published table at desk scale."""
    circuits = {
        "ghz-23": (ghz_qasm(23), None),
        "ghz-40": (ghz_qasm(40), None),
        "ghz-255": (ghz_qasm(255), None),
    }
    qasm, memory = qram_benchmark(10, 10)
    circuits["qram-20"] = (qasm, memory)
    circuits[f"qft-{qft_n}"] = (qft_qasm(qft_n), None)
    circuits[f"swap_test-{swap_test_n}"] = (swap_test_qasm(swap_test_n), None)
    return circuits


def table_benchmark(circuits: dict, thread_counts: Sequence[int] = (1,),
                    trials: int = 10) -> list[BenchRow]:
    """Run each circuit at each thread count; report sparsity and timing."""
    rows = []
    for name, (qasm, memory) in circuits.items():
        ir = parse_qasm(qasm)
        for p in thread_counts:
            config = ExecConfig(thread_count=p)
            times = []
            peak = 0
            for _ in range(trials):
                report = runner.lower_and_run(ir, config, qram_memory=memory)
                times.append(report.wall_times_s[0])
                peak = max(peak, report.peak_branch_count)
            per_branch = 16 + 8 * st.DEFAULT_SLOT_CAPACITY + 8
            rows.append(BenchRow(
                name, ir.qubit_count, peak, p, statistics.fmean(times),
                statistics.pstdev(times) if len(times) > 1 else 0.0,
                peak * per_branch))
    return rows


def write_table_csv(path, rows: Sequence[BenchRow]) -> None:
    import csv
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["circuit", "qubits", "sparsity_branches", "threads",
                         "mean_s", "std_s", "memory_proxy_bytes"])
        for r in rows:
            writer.writerow([r.circuit, r.qubit_count, r.sparsity,
                             r.thread_count, f"{r.mean_s:.6e}",
                             f"{r.std_s:.6e}", r.memory_proxy_bytes])
