"""Concurrency contract: chunked branch traversal, parallel merge sort, timing.

All parallelism is fork-join inside a single operation.  Worker threads run
numpy kernels that release the GIL, so thread-level parallelism is real for
large branch counts.  Results are bitwise identical for every thread count:
element-wise kernels touch disjoint slices, and the merge sort is stable.
"""

from __future__ import annotations

import csv
import os
import statistics
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import TimingTooNoisyError

THREADS_ENV = "SPARQ_THREADS"

DEFAULT_THRESHOLD = 4096   # branches below this run sequentially
DEFAULT_CHUNK_SIZE = 8192  # minimum branches per work unit


@dataclass
class ExecConfig:
    """Parallel execution parameters for one simulation."""

    thread_count: int = 1
    threshold: int = DEFAULT_THRESHOLD
    chunk_size: int = DEFAULT_CHUNK_SIZE
    # instrumentation hook, called as hook(mode, n_chunks) with mode in
    # {"sequential", "parallel"}; used by tests and the profiler
    on_dispatch: Optional[Callable[[str, int], None]] = None

    def __post_init__(self):
        if self.thread_count < 1:
            raise ValueError("thread_count must be >= 1")
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")


def default_config() -> ExecConfig:
    """Config with thread count taken from the SPARQ_THREADS environment."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        p = max(1, int(raw)) if raw else 1
    except ValueError:
        p = 1
    return ExecConfig(thread_count=p)


_pools: dict[int, ThreadPoolExecutor] = {}
_pool_lock = threading.Lock()


def _pool(p: int) -> ThreadPoolExecutor:
    with _pool_lock:
        pool = _pools.get(p)
        if pool is None:
            pool = ThreadPoolExecutor(max_workers=p, thread_name_prefix="sparq")
            _pools[p] = pool
        return pool


def _dispatch(config: ExecConfig, mode: str, n_chunks: int) -> None:
    if config.on_dispatch is not None:
        config.on_dispatch(mode, n_chunks)


def chunk_bounds(n: int, config: ExecConfig) -> list[tuple[int, int]]:
    """Split [0, n) into at most thread_count chunks of >= chunk_size items."""
    if n == 0:
        return []
    max_chunks = max(1, min(config.thread_count, -(-n // config.chunk_size)))
    size = -(-n // max_chunks)
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def parallel_for_branches(state, fn: Callable, config: Optional[ExecConfig] = None) -> None:
    """Run ``fn(state, lo, hi)`` over disjoint branch slices.

    ``fn`` must only read/write rows of ``state`` inside its [lo, hi) slice,
    which makes the result independent of thread count and chunk boundaries.
    """
    config = config or default_config()
    n = state.branch_count
    if n == 0:
        return
    if config.thread_count <= 1 or n < config.threshold:
        _dispatch(config, "sequential", 1)
        fn(state, 0, n)
        return
    bounds = chunk_bounds(n, config)
    if len(bounds) == 1:
        _dispatch(config, "sequential", 1)
        fn(state, 0, n)
        return
    _dispatch(config, "parallel", len(bounds))
    pool = _pool(config.thread_count)
    futures = [pool.submit(fn, state, lo, hi) for lo, hi in bounds]
    for f in futures:
        f.result()


# -- stable sorting ----------------------------------------------------------

def _lexsort(keys: Sequence[np.ndarray]) -> np.ndarray:
    # np.lexsort sorts by the LAST key first; our convention is primary first
    return np.lexsort(tuple(reversed([np.asarray(k) for k in keys])))


def _pack_keys(keys: Sequence[np.ndarray], bit_widths: Sequence[int]) -> Optional[np.ndarray]:
    """Pack lexicographic keys into a single uint64, primary key highest."""
    total = int(sum(bit_widths))
    if total > 64:
        return None
    packed = np.zeros(len(keys[0]), dtype=np.uint64)
    shift = total
    for key, width in zip(keys, bit_widths):
        shift -= width
        packed |= np.asarray(key, dtype=np.uint64) << np.uint64(shift)
    return packed


def _merge_sorted(ka, pa, kb, pb):
    """Stable merge of two sorted (key, perm) runs; 'a' precedes equal 'b'."""
    pos_a = np.arange(ka.size, dtype=np.int64) + np.searchsorted(kb, ka, side="left")
    pos_b = np.arange(kb.size, dtype=np.int64) + np.searchsorted(ka, kb, side="right")
    keys = np.empty(ka.size + kb.size, dtype=ka.dtype)
    perm = np.empty(ka.size + kb.size, dtype=np.int64)
    keys[pos_a] = ka
    keys[pos_b] = kb
    perm[pos_a] = pa
    perm[pos_b] = pb
    return keys, perm


def _parallel_argsort_u64(packed: np.ndarray, config: ExecConfig) -> np.ndarray:
    bounds = chunk_bounds(packed.size, config)
    pool = _pool(config.thread_count)

    def sort_chunk(lo, hi):
        order = np.argsort(packed[lo:hi], kind="stable").astype(np.int64)
        order += lo
        return packed[order], order

    runs = [f.result() for f in [pool.submit(sort_chunk, lo, hi) for lo, hi in bounds]]
    while len(runs) > 1:
        pairs = [(runs[i], runs[i + 1]) for i in range(0, len(runs) - 1, 2)]
        tail = [runs[-1]] if len(runs) % 2 else []
        futures = [pool.submit(_merge_sorted, a[0], a[1], b[0], b[1]) for a, b in pairs]
        runs = [f.result() for f in futures] + tail
    return runs[0][1]


def sort_permutation(keys: Sequence[np.ndarray], bit_widths: Sequence[int],
                     config: Optional[ExecConfig] = None) -> np.ndarray:
    """Stable permutation sorting rows lexicographically (primary key first).

    The output is identical for every thread count: a stable sort is unique.
    Parallel merge sort runs when the keys pack into one 64-bit word;
    otherwise the sequential lexsort handles arbitrarily wide keys.
    """
    config = config or default_config()
    n = len(keys[0])
    if config.thread_count <= 1 or n < config.threshold:
        _dispatch(config, "sequential", 1)
        return _lexsort(keys)
    packed = _pack_keys(keys, bit_widths)
    if packed is None:
        _dispatch(config, "sequential", 1)
        return _lexsort(keys)
    _dispatch(config, "parallel", len(chunk_bounds(n, config)))
    return _parallel_argsort_u64(packed, config)


def parallel_merge_sort(state, keys: Sequence[np.ndarray], bit_widths: Sequence[int],
                        config: Optional[ExecConfig] = None) -> None:
    """Reorder ``state`` by the given lexicographic keys (stable)."""
    perm = sort_permutation(keys, bit_widths, config)
    state.permute(perm, config)


# -- profiler ----------------------------------------------------------------

@dataclass
class _Timer:
    total_s: float = 0.0
    calls: int = 0


class Profiler:
    """Wall-clock registry keyed by (category, op name)."""

    def __init__(self):
        self._timers: dict[tuple[str, str], _Timer] = {}
        self._lock = threading.Lock()
        self.enabled = True

    def record(self, category: str, name: str, seconds: float) -> None:
        if not self.enabled:
            return
        with self._lock:
            t = self._timers.setdefault((category, name), _Timer())
            t.total_s += seconds
            t.calls += 1

    @contextmanager
    def timed(self, category: str, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.record(category, name, time.perf_counter() - start)

    def reset(self) -> None:
        with self._lock:
            self._timers.clear()

    def snapshot(self) -> dict[tuple[str, str], tuple[float, int]]:
        with self._lock:
            return {k: (t.total_s, t.calls) for k, t in self._timers.items()}

    def dump_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["op", "name", "total_ms", "calls"])
            for (category, name), (total_s, calls) in sorted(self.snapshot().items()):
                writer.writerow([category, name, f"{total_s * 1e3:.6f}", calls])


profiler = Profiler()


# -- speedup measurement -----------------------------------------------------

@dataclass
class SpeedupReport:
    """Mean wall times and T(1)/T(p) speedups for one operation."""

    op_name: str
    branch_count: int
    thread_counts: tuple[int, ...]
    mean_s: dict[int, float]
    std_s: dict[int, float]
    trials: int
    speedup: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        base = self.mean_s[1]
        self.speedup = {p: base / self.mean_s[p] for p in self.thread_counts}


def measure_speedup(op: Callable, branch_count: int,
                    p_list: Sequence[int] = (1, 2, 4, 8), trials: int = 10, *,
                    state_factory: Callable[[int], "object"],
                    op_name: str = "op",
                    noise_limit: float = 0.5) -> SpeedupReport:
    """Time ``op(state, config)`` at a fixed branch count across thread counts.

    The branch count is held constant for every p.  The same state is reused
    within one p (the ops under test keep the branch count stable), and each
    timing is the mean of ``trials`` runs.
    """
    p_list = tuple(p_list)
    if 1 not in p_list:
        p_list = (1,) + p_list
    mean_s: dict[int, float] = {}
    std_s: dict[int, float] = {}
    for p in sorted(set(p_list)):
        config = ExecConfig(thread_count=p)
        state = state_factory(branch_count)
        op(state, config)  # warm-up: pools, allocations
        times = []
        for _ in range(trials):
            start = time.perf_counter()
            op(state, config)
            times.append(time.perf_counter() - start)
        mean_s[p] = statistics.fmean(times)
        std_s[p] = statistics.pstdev(times) if len(times) > 1 else 0.0
        if mean_s[p] > 0 and std_s[p] / mean_s[p] > noise_limit:
            raise TimingTooNoisyError(
                f"{op_name} @ p={p}: stddev/mean = {std_s[p] / mean_s[p]:.2f} > {noise_limit}")
    return SpeedupReport(op_name, branch_count, tuple(sorted(set(p_list))),
                         mean_s, std_s, trials)
