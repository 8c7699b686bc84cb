"""Command-line entry points: run, qlss, bench scaling, bench table.

Exit codes for `run`: 0 success, 2 parse error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from . import bench
from .errors import QasmError, SimulationError
from .execution import ExecConfig, default_config
from .qasm import parse_qasm
from .qlss.sweep import experiment_sweep, write_sweep_csv
from .qlss.systems import Variant
from .qram import load_memory_file
from .runner import lower_and_run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparq",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an OpenQASM 2.0 file")
    run.add_argument("file", help="path to the .qasm file")
    run.add_argument("--threads", type=int, default=None)
    run.add_argument("--shots", type=int, default=0)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--qram-memory", default=None,
                     help="JSON memory file enabling the qram instruction")
    run.add_argument("--report", choices=("json", "csv"), default="json")
    run.add_argument("--dump-state", action="store_true",
                     help="print final branches (value tuple, amplitude)")

    qlss = sub.add_parser("qlss", help="error-vs-walk-length experiments")
    qlss.add_argument("--n", type=int, nargs="+", default=[2, 3, 4],
                      choices=(2, 3, 4))
    qlss.add_argument("--kappa", type=float, nargs="+", default=[10, 30, 50])
    qlss.add_argument("--variant", nargs="+", choices=("pd", "nh"),
                      default=["pd", "nh"])
    qlss.add_argument("--T-grid", dest="t_grid", default="10,100,1000,10000",
                      help="comma-separated walk lengths")
    qlss.add_argument("--reps", type=int, default=10)
    qlss.add_argument("--seed", type=int, default=7)
    qlss.add_argument("--out", required=True, help="output CSV path")

    bench_cmd = sub.add_parser("bench", help="scaling and circuit-table benchmarks")
    bench_sub = bench_cmd.add_subparsers(dest="bench_command", required=True)

    scaling = bench_sub.add_parser("scaling", help="time vs branch count")
    scaling.add_argument("--ops", default="x,rot",
                         help="comma-separated op names "
                              f"({','.join(bench.NON_INTERFERENCE_OPS + bench.INTERFERENCE_OPS)})")
    scaling.add_argument("--grid", default="10:1e7",
                         help="lo:hi[:points] log-spaced branch counts")
    scaling.add_argument("--trials", type=int, default=10)
    scaling.add_argument("--out", required=True)

    table = bench_sub.add_parser("table", help="benchmark circuit table")
    table.add_argument("--circuits", default=None,
                       help="directory of .qasm files (default: built-in set)")
    table.add_argument("--threads", default="1",
                       help="comma-separated thread counts")
    table.add_argument("--trials", type=int, default=10)
    table.add_argument("--out", required=True)
    return parser


def _cmd_run(args) -> int:
    try:
        with open(args.file) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        ir = parse_qasm(text)
    except QasmError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    memory = None
    try:
        if args.qram_memory:
            memory = load_memory_file(args.qram_memory)
        config = (ExecConfig(thread_count=args.threads)
                  if args.threads else default_config())
        report, state = lower_and_run(ir, config, shots=args.shots,
                                      seed=args.seed, qram_memory=memory,
                                      keep_state=True)
    except SimulationError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    print(report.to_json() if args.report == "json" else report.to_csv())
    if args.dump_state:
        names = [d.name for d in state.table.active_descriptors()]
        print(f"# branches ({', '.join(names)}) -> amplitude")
        for branch in state:
            values = ",".join(str(v) for v in branch.registers)
            print(f"({values}) -> {branch.amplitude:.12g}")
    return 0


def _cmd_qlss(args) -> int:
    sizes = [1 << n for n in args.n]
    variants = [Variant(v) for v in args.variant]
    t_grid = [int(t) for t in args.t_grid.split(",")]
    done = {"count": 0}

    def progress(row):
        done["count"] += 1
        print(f"[{done['count']}] {row['variant']} N={row['N']} "
              f"kappa={row['kappa']} T={row['T']} rep={row['rep']} "
              f"error={row['error']:.3e}", file=sys.stderr)

    rows, curves = experiment_sweep(sizes, args.kappa, variants, t_grid,
                                    args.reps, args.seed, progress=progress)
    write_sweep_csv(args.out, rows, curves)
    for curve in curves:
        print(f"{curve.variant.value} N={curve.size} kappa={curve.kappa}: "
              f"slope={curve.slope:.3f} errors={[f'{e:.2e}' for e in curve.mean_errors]}")
    return 0


def _cmd_bench_scaling(args) -> int:
    ops = [o.strip() for o in args.ops.split(",") if o.strip()]
    grid = bench.parse_grid(args.grid)
    rows = bench.scaling_experiment(ops, grid, args.trials)
    bench.write_scaling_csv(args.out, rows)
    for name in ops:
        print(f"{name}: time slope {bench.fit_time_slope(rows, name):.3f}")
    return 0


def _cmd_bench_table(args) -> int:
    if args.circuits:
        import pathlib
        circuits = {}
        for path in sorted(pathlib.Path(args.circuits).glob("*.qasm")):
            circuits[path.stem] = (path.read_text(), None)
    else:
        circuits = bench.default_table_circuits()
    threads = [int(p) for p in args.threads.split(",")]
    rows = bench.table_benchmark(circuits, threads, args.trials)
    bench.write_table_csv(args.out, rows)
    for row in rows:
        print(f"{row.circuit}: qubits={row.qubit_count} "
              f"sparsity={row.sparsity} p={row.thread_count} "
              f"time={row.mean_s:.4f}s")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "qlss":
        return _cmd_qlss(args)
    if args.command == "bench":
        if args.bench_command == "scaling":
            return _cmd_bench_scaling(args)
        return _cmd_bench_table(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
