"""Lowering of parsed circuits onto the sparse simulator, plus run reports."""

from __future__ import annotations

import cmath
import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import gates, qram as qram_mod, state as st
from .errors import MidCircuitOperationError, QasmSyntaxError, UnsupportedGateError
from .execution import ExecConfig, default_config
from .gates import Control, Unitary2
from .qasm import CircuitIR, Instruction

_SQ = {  # parameterless single-qubit gates that reduce to flips/phases
    "z": -1.0 + 0j,
    "s": 1j,
    "sdg": -1j,
    "t": cmath.exp(0.25j * math.pi),
    "tdg": cmath.exp(-0.25j * math.pi),
}


@dataclass
class RunReport:
    """Execution summary of one circuit run."""

    qubit_count: int
    wall_times_s: list[float]
    peak_branch_count: int
    final_branch_count: int
    final_norm: float
    shots: int
    histogram: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "qubit_count": self.qubit_count,
            "wall_times_s": self.wall_times_s,
            "peak_branch_count": self.peak_branch_count,
            "final_branch_count": self.final_branch_count,
            "final_norm": self.final_norm,
            "shots": self.shots,
            "histogram": self.histogram,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        lines = ["field,value"]
        for key, value in self.to_dict().items():
            if key == "histogram":
                continue
            if key == "wall_times_s":
                value = ";".join(f"{t:.6f}" for t in value)
            lines.append(f"{key},{value}")
        for outcome, count in sorted(self.histogram.items()):
            lines.append(f"count[{outcome}],{count}")
        return "\n".join(lines) + "\n"


class QubitMap:
    """Maps circuit qubits onto simulator registers, splitting at 64 qubits."""

    def __init__(self, table: st.RegisterTable, ir: CircuitIR):
        self.table = table
        self.slots: dict[tuple[str, int], tuple[int, int]] = {}
        self.whole: dict[str, list[tuple[int, int]]] = {}
        for name, size in ir.qregs:
            parts = []
            offset = 0
            part = 0
            while offset < size:
                width = min(64, size - offset)
                reg_name = name if size <= 64 else f"{name}:{part}"
                reg_id = table.add_register(reg_name, width)
                for i in range(width):
                    self.slots[(name, offset + i)] = (reg_id, i)
                    parts.append((reg_id, i))
                offset += width
                part += 1
            self.whole[name] = parts

    def qubit(self, ref) -> tuple[int, int]:
        return self.slots[(ref.reg, ref.index)]


def _broadcast(ins: Instruction, sizes: dict[str, int]):
    """Expand whole-register operands into per-index instruction instances."""
    lengths = {sizes[q.reg] for q in ins.qubits if q.index is None}
    if not lengths:
        yield ins.qubits
        return
    if len(lengths) != 1:
        raise QasmSyntaxError("broadcast operands must have equal sizes",
                              ins.line, ins.col)
    n = lengths.pop()
    for i in range(n):
        yield tuple(q if q.index is not None else type(q)(q.reg, i)
                    for q in ins.qubits)


def lower_and_run(ir: CircuitIR, exec_config: Optional[ExecConfig] = None,
                  shots: int = 0, seed: int = 0,
                  qram_memory: Optional[qram_mod.QramMemory] = None,
                  keep_state: bool = False) -> RunReport | tuple[RunReport, st.SparseState]:
    """Execute a circuit and report peak/final branch counts and shot counts.

    Measurements are terminal: operating on a measured qubit afterwards is an
    error, so shot outcomes can be sampled from the final state without
    collapsing it once per shot.
    """
    config = exec_config or default_config()
    capacity = max(4, 2 * sum(-(-size // 64) for _, size in ir.qregs))
    table = st.RegisterTable(slot_capacity=capacity)
    qmap = QubitMap(table, ir)
    state = st.SparseState.zero_state(table)
    qsizes = dict(ir.qregs)
    csizes = dict(ir.cregs)
    measured: dict[tuple[str, int], tuple[str, int]] = {}

    start = time.perf_counter()
    for ins in ir.instructions:
        if ins.name == "measure":
            for qubits in _broadcast(ins, qsizes):
                cref = ins.clbits[0]
                cidx = cref.index if cref.index is not None else qubits[0].index
                measured[(qubits[0].reg, qubits[0].index)] = (cref.reg, cidx)
            continue
        if ins.name == "qram":
            _lower_qram(state, qmap, ins, qram_memory, config)
            continue
        for qubits in _broadcast(ins, qsizes):
            for q in qubits:
                if (q.reg, q.index) in measured:
                    raise MidCircuitOperationError(
                        f"qubit {q.reg}[{q.index}] used after measurement "
                        f"(line {ins.line})")
            _apply_gate(state, qmap, ins.name, ins.params, qubits, config)
    elapsed = time.perf_counter() - start

    histogram = _sample_shots(state, qmap, measured, csizes, shots, seed) \
        if shots and measured else {}

    report = RunReport(
        qubit_count=ir.qubit_count,
        wall_times_s=[elapsed],
        peak_branch_count=table.max_system_size,
        final_branch_count=state.branch_count,
        final_norm=math.sqrt(state.norm_squared()),
        shots=shots,
        histogram=histogram,
    )
    return (report, state) if keep_state else report


def _lower_qram(state, qmap, ins, memory, config):
    if memory is None:
        raise UnsupportedGateError("qram (no memory file supplied)",
                                   ins.line, ins.col)
    refs = ins.qubits
    if any(r.index is not None for r in refs):
        raise QasmSyntaxError("qram operands must be whole registers",
                              ins.line, ins.col)
    addr_parts = qmap.whole[refs[0].reg]
    data_parts = qmap.whole[refs[1].reg]
    addr_ids = {reg for reg, _ in addr_parts}
    data_ids = {reg for reg, _ in data_parts}
    if len(addr_ids) != 1 or len(data_ids) != 1:
        raise QasmSyntaxError("qram operands must fit one 64-qubit register",
                              ins.line, ins.col)
    qram_mod.qram_load(state, addr_ids.pop(), data_ids.pop(), memory,
                       config=config)


def _apply_gate(state, qmap, name, params, qubits, config):
    targets = [qmap.qubit(q) for q in qubits]

    if name == "swap":  # lowered to 3 CX
        (ra, ba), (rb, bb) = targets
        gates.apply_flip(state, rb, bb, [Control(ra, ba, 1)], config)
        gates.apply_flip(state, ra, ba, [Control(rb, bb, 1)], config)
        gates.apply_flip(state, rb, bb, [Control(ra, ba, 1)], config)
        return

    controls = [Control(r, b, 1) for r, b in targets[:-1]]
    reg, bit = targets[-1]

    if name == "x" or name == "cx" or name == "ccx":
        gates.apply_flip(state, reg, bit, controls, config)
    elif name == "y":
        gates.apply_y(state, reg, bit, controls, config)
    elif name in _SQ:
        gates.apply_phase(state, reg, bit, _SQ[name], controls, config)
    elif name == "cz":
        gates.apply_phase(state, reg, bit, -1.0, controls, config)
    elif name == "h" or name == "ch":
        gates.apply_unitary2(state, reg, bit, Unitary2.hadamard(), controls, config)
    elif name == "rx":
        gates.apply_unitary2(state, reg, bit, Unitary2.rx(params[0]), controls, config)
    elif name == "ry":
        gates.apply_unitary2(state, reg, bit, Unitary2.ry(params[0]), controls, config)
    elif name == "rz" or name == "crz":
        gates.apply_unitary2(state, reg, bit, Unitary2.rz(params[0]), controls, config)
    elif name == "u1" or name == "cu1":
        gates.apply_unitary2(state, reg, bit, Unitary2.phase(params[0]), controls, config)
    elif name == "u2":
        gates.apply_unitary2(
            state, reg, bit,
            Unitary2.u3(math.pi / 2, params[0], params[1]), controls, config)
    elif name == "u3":
        gates.apply_unitary2(state, reg, bit, Unitary2.u3(*params), controls, config)
    else:  # pragma: no cover - parser only admits the names above
        raise UnsupportedGateError(name)


def _sample_shots(state, qmap, measured, csizes, shots, seed):
    """Draw shot outcomes from the final state's branch distribution."""
    probs = np.abs(state.amp) ** 2
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    picks = rng.choice(state.branch_count, size=shots, p=probs)

    # per measured qubit: classical target and the value in every branch
    bit_values = {}
    for (qreg, qidx), (creg, cidx) in measured.items():
        reg_id, bit = qmap.slots[(qreg, qidx)]
        col = state.value_column(reg_id)
        bit_values[(creg, cidx)] = ((col >> np.uint64(bit)) & np.uint64(1)).astype(np.uint8)

    histogram: dict[str, int] = {}
    branches, counts = np.unique(picks, return_counts=True)
    for branch, count in zip(branches, counts):
        words = []
        for creg, size in csizes.items():
            bits = ["0"] * size
            for cidx in range(size):
                vals = bit_values.get((creg, cidx))
                if vals is not None:
                    bits[size - 1 - cidx] = str(int(vals[branch]))
            words.append("".join(bits))
        key = " ".join(words)
        histogram[key] = histogram.get(key, 0) + int(count)
    return histogram
