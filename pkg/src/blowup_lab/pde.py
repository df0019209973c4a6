"""Radial finite-volume leapfrog solver with blow-up detection.

Solves ``u_tt - Δu + b(t) u_t - m2(t) u = |u|^p`` for radial data in n
dimensions. Cell ``i`` covers ``[r_i - dr/2, r_i + dr/2]`` (``[0, dr/2]`` at
the origin) and the Laplacian is the flux difference over exact cell volumes,

    (L u)_i = [a_{i+1/2}(u_{i+1} - u_i) - a_{i-1/2}(u_i - u_{i-1})] / (dr V_i),

with ``a = r^(n-1)`` on faces and ``V_i = (r_{i+1/2}^n - r_{i-1/2}^n)/n``. At
``r = 0`` this is ``2n (u_1 - u_0)/dr^2``, the discrete ``n u_rr(0)``. The
same volumes give the quadrature for ``F0 = int u dx``, so the discrete F0
obeys the discrete ODE exactly.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .comparison import ComparisonSetup
from .params import ProblemParams
from .specfun import gamma_fn


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2) / gamma_fn(n / 2)


@dataclass(frozen=True)
class RadialGrid:
    n: int
    dr: float
    r_max: float

    def __post_init__(self):
        if self.n < 1 or self.dr <= 0 or self.r_max <= self.dr:
            raise ValueError(f"bad grid: n={self.n}, dr={self.dr}, r_max={self.r_max}")

    @classmethod
    def covering(cls, n: int, dr: float, R: float, t_end: float) -> "RadialGrid":
        # leapfrog spreads one cell per step: 2 dr per dr of time at CFL 1/2
        return cls(n, dr, R + 2.0 * t_end + 4.0 * dr)

    @property
    def points(self) -> int:
        return int(math.ceil(self.r_max / self.dr - 1e-9)) + 1

    @property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(self.points)

    def faces(self) -> np.ndarray:
        """r^(n-1) at r_{i+1/2}, i = 0..points-2."""
        rf = self.dr * (np.arange(self.points - 1) + 0.5)
        return rf ** (self.n - 1)

    def volumes(self) -> np.ndarray:
        n, dr = self.n, self.dr
        edges = dr * (np.arange(self.points + 1) - 0.5)
        edges[0] = 0.0
        vol = (edges[1:] ** n - edges[:-1] ** n) / n
        return vol

    def index_of(self, radius: float) -> int:
        return min(self.points - 1, int(math.floor(radius / self.dr + 1e-9)))


@dataclass(frozen=True)
class InitialData:
    """Radial profiles f, g supported in r <= R.

    ``kind="bump"`` uses ``amp * max(0, 1 - (r/R)^2)`` for both; ``"table"``
    interpolates ``(r, f, g)`` samples linearly and is zero past the last r.
    """

    kind: str = "bump"
    f_amp: float = 1.0
    g_amp: float = 0.0
    table: tuple | None = None

    def profiles(self, r: np.ndarray, R: float) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "bump":
            shape = np.maximum(0.0, 1.0 - (r / R) ** 2)
            return self.f_amp * shape, self.g_amp * shape
        if self.kind == "table":
            if self.table is None:
                raise ValueError("table profile needs (r, f, g) samples")
            tr, tf, tg = (np.asarray(a, dtype=float) for a in self.table)
            if np.any(np.diff(tr) <= 0) or tr[0] < 0:
                raise ValueError("table radii must be increasing and non-negative")
            if tr[-1] > R + 1e-12 and (np.any(tf[tr > R] != 0) or np.any(tg[tr > R] != 0)):
                raise ValueError("table profile is not supported in r <= R")
            f = np.interp(r, tr, tf, right=0.0)
            g = np.interp(r, tr, tg, right=0.0)
            return f, g
        raise ValueError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def from_csv(cls, path) -> "InitialData":
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        if data.shape[1] != 3:
            raise ValueError("profile table needs three columns r, f, g")
        return cls(kind="table", table=(tuple(data[:, 0]), tuple(data[:, 1]), tuple(data[:, 2])))


@dataclass(frozen=True)
class SolverConfig:
    dr: float = 0.01
    cfl: float = 0.5
    t_max: float = 50.0
    U_max: float = 1e8
    dt_min: float = 1e-12
    growth_limit: float = 0.1
    nonlinear: bool = True
    mass: bool = True
    damping: bool = True
    max_steps: int = 50_000_000
    record_every: int = 1

    def __post_init__(self):
        if not (0 < self.cfl <= 0.5):
            raise ValueError(f"CFL number {self.cfl} outside (0, 0.5]")
        if self.dr <= 0 or self.t_max <= 0:
            raise ValueError("dr and t_max must be positive")


@dataclass
class FieldState:
    u: np.ndarray
    u_prev: np.ndarray
    t: float
    dt: float
    steps: int = 0

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)))


@dataclass
class SimulationTrace:
    times: np.ndarray
    F0: np.ndarray
    energy: np.ndarray
    support_radius: np.ndarray
    u_max: np.ndarray
    blow_up: bool
    t_lo: float | None
    t_hi: float | None
    steps: int
    dr: float
    dt_final: float
    params: ProblemParams
    reason: str = ""
    data_l1: tuple[float, float] = (math.nan, math.nan)
    extras: dict = field(default_factory=dict)

    @property
    def bracket(self):
        return (self.t_lo, self.t_hi)

    def metadata(self) -> dict:
        return {
            "blow_up": self.blow_up, "t_lo": self.t_lo, "t_hi": self.t_hi,
            "steps": self.steps, "dr": self.dr, "dt_final": self.dt_final,
            "reason": self.reason, "params": self.params.as_dict(),
            "f_l1": self.data_l1[0], "g_l1": self.data_l1[1],
        }

    def write(self, out) -> Path:
        """Write the CSV trace and a JSON sidecar next to it; returns the sidecar path."""
        out = Path(out)
        with out.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "F0", "energy", "support_radius", "u_max"])
            for row in zip(self.times, self.F0, self.energy, self.support_radius, self.u_max):
                w.writerow([repr(float(x)) for x in row])
        side = out.with_suffix(".json")
        side.write_text(json.dumps(self.metadata(), indent=2) + "\n")
        return side


class RadialSolver:
    """Holds the grid operators and coefficient switches for one run."""

    def __init__(self, params: ProblemParams, data: InitialData, config: SolverConfig,
                 grid: RadialGrid | None = None):
        self.params = params
        self.data = data
        self.config = config
        self.grid = grid or RadialGrid.covering(params.n, config.dr, params.R, config.t_max)
        if self.grid.r_max < config.t_max + params.R + 2 * self.grid.dr:
            raise ValueError("grid does not contain the light cone of the data")
        g = self.grid
        self.r = g.r
        self.vol = g.volumes()
        self.face = g.faces()
        self.omega = sphere_area(params.n)
        self.coef = params.coefficients
        f, gg = data.profiles(self.r, params.R)
        if np.any(f < 0) or np.any(gg < 0):
            raise ValueError("initial profiles must be non-negative")
        if not (np.any(f > 0) or np.any(gg > 0)):
            raise ValueError("initial profiles vanish identically")
        if np.any(f[self.r > params.R + 1e-12] != 0) or np.any(gg[self.r > params.R + 1e-12] != 0):
            raise ValueError("initial profiles are not supported in r <= R")
        self.f = f
        self.g = gg
        self.i_R = g.index_of(params.R)

    # coefficients with switches applied
    def b(self, t: float) -> float:
        return float(self.coef.damping_coeff(t)) if self.config.damping else 0.0

    def m2(self, t: float) -> float:
        return float(self.coef.mass_coeff(t)) if self.config.mass else 0.0

    def laplacian(self, u: np.ndarray, hi: int | None = None) -> np.ndarray:
        """Flux-form Laplacian on u[:hi]; the last point is a Dirichlet boundary."""
        hi = len(u) if hi is None else hi
        u = u[:hi]
        flux = self.face[:hi - 1] * np.diff(u)
        out = np.zeros_like(u)
        out[:-1] += flux
        out[1:-1] -= flux[:-1]
        out[:-1] /= self.grid.dr * self.vol[:hi - 1]
        out[-1] = 0.0
        return out

    def forcing(self, u: np.ndarray, t: float, hi: int | None = None) -> np.ndarray:
        """Δu + m2 u + |u|^p (without the damping term)."""
        hi = len(u) if hi is None else hi
        acc = self.laplacian(u, hi)
        m2 = self.m2(t)
        if m2:
            acc += m2 * u[:hi]
        if self.config.nonlinear:
            acc += np.abs(u[:hi]) ** self.params.p
        if hi == self.grid.points:
            acc[-1] = 0.0
        return acc

    def active(self, state: FieldState) -> int:
        """Points that can be non-zero after the next step (one cell per step), plus one."""
        return min(self.grid.points, self.i_R + state.steps + 3)

    def init_state(self) -> FieldState:
        eps = self.params.eps
        dt = self.config.cfl * self.grid.dr
        u0 = eps * self.f
        v0 = eps * self.g
        acc = self.forcing(u0, 0.0) - self.b(0.0) * v0
        u1 = u0 + dt * v0 + 0.5 * dt * dt * acc
        u1[-1] = 0.0
        # store as (u_prev, u) = (u0, u1) at t = dt
        return FieldState(u=u1, u_prev=u0.copy(), t=dt, dt=dt, steps=1)

    def step(self, state: FieldState) -> FieldState:
        hi = self.active(state)
        dt, t = state.dt, state.t
        bh = 0.5 * self.b(t) * dt
        u, up = state.u, state.u_prev
        acc = self.forcing(u, t, hi)
        new = u.copy()
        with np.errstate(over="ignore", invalid="ignore"):
            new[:hi] = (2.0 * u[:hi] - (1.0 - bh) * up[:hi] + dt * dt * acc) / (1.0 + bh)
        if hi == self.grid.points:
            new[-1] = 0.0
        return FieldState(u=new, u_prev=u, t=t + dt, dt=dt, steps=state.steps + 1)

    def refine(self, state: FieldState) -> FieldState:
        """Halve dt, re-sampling u_prev at t - dt/2 from a local Taylor fit."""
        dt, h = state.dt, 0.5 * state.dt
        hi = self.active(state)
        u, up = state.u, state.u_prev
        acc = np.zeros_like(u)
        acc[:hi] = self.forcing(u, state.t, hi)
        b = self.b(state.t)
        vel = (u - up) / dt
        # centred acceleration including damping; back-difference velocity corrected to t
        a = (acc - b * vel) / (1.0 + 0.5 * b * dt)
        vel = vel + 0.5 * dt * a
        new_prev = u - h * vel + 0.5 * h * h * a
        new_prev[-1] = 0.0
        return FieldState(u=u, u_prev=new_prev, t=state.t, dt=h, steps=state.steps)

    def functional_F0(self, u: np.ndarray) -> float:
        return self.omega * float(np.dot(self.vol, u))

    def energy(self, state: FieldState) -> float:
        """½ int (u_t^2 + u_r^2) dx with a backward difference for u_t."""
        with np.errstate(over="ignore", invalid="ignore"):
            ut = (state.u - state.u_prev) / state.dt
            grad = np.diff(state.u) / self.grid.dr
            kin = float(np.dot(self.vol, ut * ut))
            pot = float(np.dot(self.face * self.grid.dr, grad * grad))
        return 0.5 * self.omega * (kin + pot)

    def support_radius(self, u: np.ndarray, floor: float = 1e-12) -> float:
        return support_radius_of(self.r, u, floor)

    def data_l1(self) -> tuple[float, float]:
        return self.functional_F0(self.f), self.functional_F0(self.g)

    def run(self, on_step: Callable[[FieldState], None] | None = None) -> SimulationTrace:
        cfg = self.config
        p = self.params.p
        u0 = self.params.eps * self.f
        state0 = FieldState(u=u0, u_prev=u0, t=0.0, dt=cfg.cfl * self.grid.dr)
        times, F0s, Es, sups, umax = [], [], [], [], []

        def record(st, e):
            times.append(st.t)
            F0s.append(self.functional_F0(st.u))
            Es.append(e)
            sups.append(self.support_radius(st.u))
            umax.append(float(np.max(np.abs(st.u))))

        # t = 0: velocity is eps g exactly
        kin = float(np.dot(self.vol, (self.params.eps * self.g) ** 2))
        grad = np.diff(u0) / self.grid.dr
        record(state0, 0.5 * self.omega * (kin + float(np.dot(self.face * self.grid.dr, grad * grad))))

        state = self.init_state()
        record(state, self.energy(state))
        umx = umax[-1]
        last_ok_t = state.t if umx <= cfg.U_max else 0.0
        blow, t_lo, t_hi, reason = False, None, None, "t_max reached"
        while state.t < cfg.t_max - 1e-12:
            if state.steps >= cfg.max_steps:
                reason = "step limit reached"
                break
            if cfg.nonlinear:
                while state.dt * umx ** ((p - 1) / 2) > cfg.growth_limit and state.dt >= cfg.dt_min:
                    state = self.refine(state)
            new = self.step(state)
            if not new.is_finite():
                blow, t_lo, t_hi, reason = True, last_ok_t, new.t, "non-finite field"
                state = new
                break
            state = new
            if on_step is not None:
                on_step(state)
            umx = float(np.max(np.abs(state.u)))
            if state.steps % cfg.record_every == 0 or umx > cfg.U_max:
                record(state, self.energy(state))
            if umx <= cfg.U_max:
                last_ok_t = state.t
            elif state.dt < cfg.dt_min:
                blow, t_lo, t_hi, reason = True, last_ok_t, state.t, "threshold and step collapse"
                break
        return SimulationTrace(
            times=np.array(times), F0=np.array(F0s), energy=np.array(Es),
            support_radius=np.array(sups), u_max=np.array(umax), blow_up=blow,
            t_lo=t_lo, t_hi=t_hi, steps=state.steps, dr=self.grid.dr, dt_final=state.dt,
            params=self.params, reason=reason, data_l1=self.data_l1(),
        )


def support_radius_of(r: np.ndarray, u: np.ndarray, floor: float = 1e-12) -> float:
    idx = np.flatnonzero(np.abs(u) > floor)
    return float(r[idx[-1]]) if idx.size else 0.0


def init_data(params: ProblemParams, data: InitialData, config: SolverConfig | None = None):
    """Solver plus the two-level starting state (u at dt, u_prev = eps f)."""
    solver = RadialSolver(params, data, config or SolverConfig())
    return solver, solver.init_state()


def run_until_blowup(params: ProblemParams, data: InitialData | None = None,
                     config: SolverConfig | None = None, **overrides) -> SimulationTrace:
    cfg = config or SolverConfig()
    if overrides:
        cfg = replace(cfg, **overrides)
    return RadialSolver(params, data or InitialData(), cfg).run()


@dataclass(frozen=True)
class ComparisonCheck:
    times: np.ndarray
    margins: np.ndarray  # F0/J - 1
    min_margin: float
    tolerance: float
    ok: bool


def verify_comparison(trace: SimulationTrace, setup: ComparisonSetup,
                      tolerance: float = 1e-3) -> ComparisonCheck:
    """Relative margins F0/J - 1 on the trace times in [t0, min(t_max, t_lo))."""
    if trace.params.as_dict() != setup.params.as_dict():
        raise ValueError("trace and comparison setup use different parameters")
    end = trace.t_lo if trace.blow_up else math.inf
    mask = (trace.times >= setup.t0) & (trace.times < end) & (trace.F0 > 0)
    ts = trace.times[mask]
    with np.errstate(divide="ignore"):
        logF = np.log(trace.F0[mask])
    logJ = setup.log_J(ts) if ts.size else np.array([])
    margins = np.expm1(logF - logJ)
    mn = float(margins.min()) if margins.size else math.inf
    return ComparisonCheck(ts, margins, mn, tolerance, bool(mn >= -tolerance))


SOLVER_KEYS = ("dr", "cfl", "t_max", "U_max", "dt_min", "growth_limit")
DATA_KEYS = ("profile", "f_amp", "g_amp", "profile_table")


def data_from_mapping(cfg, base_dir=None) -> InitialData:
    """``profile = bump`` (with ``f_amp``, ``g_amp``) or ``profile = table`` with ``profile_table``."""
    kind = str(cfg.get("profile", "bump"))
    if kind == "bump":
        return InitialData("bump", float(cfg.get("f_amp", 1.0)), float(cfg.get("g_amp", 0.0)))
    if kind == "table":
        path = Path(cfg["profile_table"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return InitialData.from_csv(path)
    raise ValueError(f"unknown profile {kind!r}")


def solver_config_from_mapping(cfg, **overrides) -> SolverConfig:
    kw = {k: float(cfg[k]) for k in SOLVER_KEYS if k in cfg}
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return SolverConfig(**kw)
