"""Sweeps over the data size and fits of the log-type lifespan curve."""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .lifespan import TheoremDomainError, TheoremSetup, log_asymptote
from .params import ProblemParams
from .pde import InitialData, RadialSolver, SolverConfig, run_until_blowup

COLUMNS = ("eps", "t_blow_lo", "t_blow_hi", "zeta", "bound_3zeta", "asymptote", "status")
BOUND_SLACK = 0.10


@dataclass(frozen=True)
class SweepPlan:
    params: ProblemParams
    eps_grid: tuple[float, ...]
    t_max: float = 200.0
    output_path: str | None = None
    data: InitialData = InitialData()
    solver: SolverConfig = SolverConfig()
    workers: int | None = None

    def __post_init__(self):
        eps = np.asarray(self.eps_grid, dtype=float)
        if eps.size < 3:
            raise ValueError("eps_grid needs at least 3 points")
        if np.any(eps <= 0) or np.any(eps >= 1):
            raise ValueError("eps_grid must lie in (0, 1)")
        if np.any(np.diff(eps) >= 0):
            raise ValueError("eps_grid must be strictly decreasing")

    @classmethod
    def geometric(cls, params, eps_start, eps_stop, eps_count, **kw) -> "SweepPlan":
        grid = np.geomspace(eps_start, eps_stop, int(eps_count))
        return cls(params, tuple(float(e) for e in grid), **kw)


@dataclass(frozen=True)
class SweepRow:
    eps: float
    t_blow_lo: float
    t_blow_hi: float
    zeta: float
    bound_3zeta: float
    asymptote: float
    status: str

    def as_list(self):
        return [self.eps, self.t_blow_lo, self.t_blow_hi, self.zeta, self.bound_3zeta,
                self.asymptote, self.status]

    @property
    def has_blowup(self) -> bool:
        return math.isfinite(self.t_blow_lo) and math.isfinite(self.t_blow_hi)


def _row(args) -> SweepRow:
    plan, theorem, eps = args
    nan = math.nan
    lo = hi = zeta = bound = asym = nan
    try:
        params = plan.params.with_eps(eps)
        cfg = replace(plan.solver, t_max=plan.t_max)
        trace = run_until_blowup(params, plan.data, cfg)
        if trace.blow_up:
            lo, hi = trace.t_lo, trace.t_hi
        try:
            rep = theorem.bound(eps)
        except TheoremDomainError:
            return SweepRow(eps, lo, hi, nan, nan, nan, "outside-theorem-regime")
        zeta, bound = rep.zeta, rep.bound
        if rep.eps_bar < math.exp(-1.0):
            asym = 3.0 * log_asymptote(plan.params, rep.eps_bar)
        if rep.warnings:
            status = "outside-theorem-regime"
        elif not trace.blow_up:
            status = "no-blowup"
        elif hi <= bound * (1.0 + BOUND_SLACK):
            status = "ok"
        else:
            status = "bound-violation"
    except Exception as exc:  # per-row failures go into the table
        return SweepRow(eps, lo, hi, zeta, bound, asym, f"error: {type(exc).__name__}: {exc}")
    return SweepRow(eps, lo, hi, zeta, bound, asym, status)


def run_sweep(plan: SweepPlan) -> list[SweepRow]:
    """One row per eps, in plan order; the PDE runs go to a bounded process pool."""
    ref = plan.params.with_eps(plan.eps_grid[0])
    probe = RadialSolver(ref, plan.data, replace(plan.solver, t_max=plan.t_max))
    f_l1, g_l1 = probe.data_l1()
    theorem = TheoremSetup.build(ref, f_l1, g_l1)
    jobs = [(plan, theorem, float(e)) for e in plan.eps_grid]
    workers = plan.workers if plan.workers is not None else min(len(jobs), os.cpu_count() or 1)
    if workers <= 1:
        rows = [_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, jobs))
    if plan.output_path:
        write_rows(plan.output_path, rows, plan)
    return rows


def write_rows(path, rows: Sequence[SweepRow], plan: SweepPlan | None = None) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for row in rows:
            w.writerow([repr(float(x)) if not isinstance(x, str) else x for x in row.as_list()])
    if plan is not None:
        meta = {"params": plan.params.as_dict(), "t_max": plan.t_max,
                "dr": plan.solver.dr, "cfl": plan.solver.cfl,
                "data": {"kind": plan.data.kind, "f_amp": plan.data.f_amp, "g_amp": plan.data.g_amp},
                "bound_slack": BOUND_SLACK}
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")


def read_rows(path) -> list[SweepRow]:
    rows = []
    with Path(path).open(newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(SweepRow(*(float(rec[c]) for c in COLUMNS[:-1]), rec["status"]))
    return rows


def read_alpha(path) -> float | None:
    side = Path(path).with_suffix(".json")
    if side.exists():
        return float(json.loads(side.read_text())["params"]["alpha"])
    return None


def consistency_ok(rows: Sequence[SweepRow]) -> bool:
    return not any(r.status == "bound-violation" or r.status.startswith("error") for r in rows)


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    c_fit: float
    exponent_fixed: float
    residual_rms: float
    points_used: int
    free_c: float = math.nan
    free_exponent: float = math.nan

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def fit_lifespan_curve(eps, T, alpha: float, diagnostic: bool = True) -> FitResult:
    """Least squares for c in T = c [log(1/eps)]^(2/(1-alpha)), exponent held fixed.

    With ``diagnostic`` a second fit frees the exponent (log-log regression).
    """
    eps = np.asarray(eps, dtype=float)
    T = np.asarray(T, dtype=float)
    keep = np.isfinite(T) & (T > 0) & (eps > 0) & (eps < 1)
    eps, T = eps[keep], T[keep]
    if eps.size < 3:
        raise InsufficientDataError(f"need at least 3 blow-up rows, got {eps.size}")
    k = 2.0 / (1.0 - alpha)
    L = np.log(1.0 / eps)
    x = L ** k
    c = float(np.dot(T, x) / np.dot(x, x))
    rms = float(np.sqrt(np.mean(((c * x - T) / T) ** 2)))
    free_c = free_k = math.nan
    if diagnostic and np.ptp(np.log(L)) > 0:
        slope, icpt = np.polyfit(np.log(L), np.log(T), 1)
        free_c, free_k = float(np.exp(icpt)), float(slope)
    return FitResult(c, k, rms, int(eps.size), free_c, free_k)


def fit_rows(rows: Sequence[SweepRow], alpha: float) -> FitResult:
    """Fit using bracket midpoints of the rows that blew up."""
    used = [r for r in rows if r.has_blowup]
    return fit_lifespan_curve([r.eps for r in used],
                              [0.5 * (r.t_blow_lo + r.t_blow_hi) for r in used], alpha)
