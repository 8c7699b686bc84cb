"""Error-vs-walk-length experiments across sizes, condition numbers, variants."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..execution import ExecConfig
from .systems import Variant, gen_linear_system
from .walk import WalkConfig, error_metric, run_adiabatic

# mean errors above this are treated as saturated (outside the adiabatic
# regime) and excluded from the log-log slope fit
ADIABATIC_ERROR_CEILING = 0.5

DEFAULT_T_GRID = (10, 100, 1000, 10000)


@dataclass
class ErrorCurve:
    """Mean error per walk length for one (variant, N, kappa) setting."""

    variant: Variant
    size: int
    kappa: float
    t_values: tuple[int, ...]
    mean_errors: tuple[float, ...]
    repetitions: int
    fit_constants: dict = field(default_factory=dict)

    @property
    def slope(self) -> float:
        return self.fit_constants.get("slope", math.nan)

    def fitted_error(self, t: int) -> float:
        """Evaluate the fitted power law at walk length t."""
        c = self.fit_constants
        return math.exp(c["intercept"] + c["slope"] * math.log(1.0 / t))


def fit_error_curve(t_values: Sequence[int], mean_errors: Sequence[float],
                    ceiling: float = ADIABATIC_ERROR_CEILING) -> dict:
    """Least-squares slope of log error vs log(1/T) over the adiabatic regime.

    Saturated points (mean error above the ceiling) are excluded; the fit
    needs at least two surviving points.
    """
    ts = np.asarray(t_values, dtype=float)
    errs = np.asarray(mean_errors, dtype=float)
    keep = (errs > 0) & (errs < ceiling)
    fit_ts = ts[keep]
    fit_errs = errs[keep]
    if fit_ts.size < 2:
        return {"slope": math.nan, "intercept": math.nan,
                "points": int(fit_ts.size)}
    x = np.log(1.0 / fit_ts)
    y = np.log(fit_errs)
    slope, intercept = np.polyfit(x, y, 1)
    return {"slope": float(slope), "intercept": float(intercept),
            "points": int(fit_ts.size)}


def _rep_seed(base_seed: int, variant: Variant, n: int, kappa: float,
              rep: int) -> np.random.Generator:
    ss = np.random.SeedSequence(
        [base_seed, 1 if variant is Variant.NON_HERMITIAN else 0,
         n, int(round(kappa * 16)), rep])
    return np.random.default_rng(ss)


def experiment_sweep(sizes: Sequence[int] = (4, 8, 16),
                     kappas: Sequence[float] = (10, 30, 50),
                     variants: Sequence[Variant] = tuple(Variant),
                     t_grid: Sequence[int] = DEFAULT_T_GRID,
                     reps: int = 10,
                     seed: int = 7,
                     exec_config: Optional[ExecConfig] = None,
                     progress=None) -> tuple[list[dict], list[ErrorCurve]]:
    """Run the full error-scaling study.

    Returns per-run rows (variant, N, kappa, T, rep, error, final norm) and
    one fitted ErrorCurve per (variant, size, kappa).  Seeding is stable per
    (variant, size, kappa, rep), so the first repetition's rows do not depend
    on how many repetitions were requested.
    """
    rows: list[dict] = []
    curves: list[ErrorCurve] = []
    t_grid = tuple(int(t) for t in t_grid)
    for variant in variants:
        for size in sizes:
            n = size.bit_length() - 1
            for kappa in kappas:
                errors = {t: [] for t in t_grid}
                for rep in range(reps):
                    rng = _rep_seed(seed, variant, n, kappa, rep)
                    system = gen_linear_system(n, kappa, variant, rng)
                    for t in t_grid:
                        final = run_adiabatic(system, WalkConfig(t), exec_config)
                        err = error_metric(final, system)
                        errors[t].append(err)
                        rows.append({
                            "variant": variant.value, "N": size,
                            "kappa": kappa, "T": t, "rep": rep,
                            "error": err,
                            "final_norm": math.sqrt(final.norm_squared()),
                        })
                        if progress is not None:
                            progress(rows[-1])
                means = tuple(float(np.mean(errors[t])) for t in t_grid)
                curve = ErrorCurve(variant, size, float(kappa), t_grid, means,
                                   reps)
                curve.fit_constants.update(fit_error_curve(t_grid, means))
                curves.append(curve)
    return rows, curves


def write_sweep_csv(path, rows: list[dict], curves: list[ErrorCurve]) -> None:
    """CSV with columns variant,N,kappa,T,rep,error,slope_fit."""
    slope_of = {(c.variant.value, c.size, c.kappa): c.slope for c in curves}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "N", "kappa", "T", "rep", "error",
                         "slope_fit"])
        for row in rows:
            key = (row["variant"], row["N"], row["kappa"])
            writer.writerow([row["variant"], row["N"], row["kappa"], row["T"],
                             row["rep"], f"{row['error']:.10e}",
                             f"{slope_of[key]:.6f}"])
