"""Blow-up time certificate for Kato-type differential inequalities.

Given a lower bound ``A`` for ``F`` (valid from ``T0``), a decreasing weight
``B`` with ``{m F'}' >= B |F|^p``, a multiplier ``m`` between ``m_lo`` and
``m_hi``, and ``0 < delta < (p-1)/2`` with

    h(t) = B(t)^(1/2) A(t)^((p-1)/2 - delta)   non-decreasing on [T0, inf),

any ``T >= max(T0, T1)`` satisfying

    T h(T) A(T)^delta >= m_hi sqrt((p+1)/m_lo) / delta

bounds the blow-up time by ``3 T``. ``certify`` checks the hypotheses by
dense sampling and returns that bound; ``ode_blowup_oracle`` integrates the
equality case so the bound can be checked against an actual blow-up time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .integrate import BlowupResult, MultiplierODE

POINTS_PER_DECADE = 1000


class KatoHypothesisError(ValueError):
    """A hypothesis of the certificate fails; ``hypothesis`` names which one."""

    def __init__(self, hypothesis: str, detail: str):
        self.hypothesis = hypothesis
        super().__init__(f"{hypothesis}: {detail}")


def _log_of(fn):
    def log_fn(t):
        with np.errstate(divide="ignore"):
            return np.log(fn(t))

    return log_fn


@dataclass(frozen=True)
class KatoInstance:
    A: Callable
    B: Callable
    m: Callable
    m_lo: float
    m_hi: float
    delta: float
    p: float
    F0: float
    F0p: float
    t_double: float | None = None
    T0: float = 0.0
    log_A: Callable | None = None
    log_B: Callable | None = None

    def __post_init__(self):
        if not self.p > 1:
            raise KatoHypothesisError("p > 1", f"p = {self.p}")
        if not 0 < self.delta < (self.p - 1) / 2:
            raise KatoHypothesisError("0 < delta < (p-1)/2", f"delta = {self.delta}, p = {self.p}")
        if not (self.F0 >= 0 and self.F0p >= 0 and self.F0 + self.F0p > 0):
            raise KatoHypothesisError("F(0), F'(0) >= 0, F(0) + F'(0) > 0",
                                      f"F(0) = {self.F0}, F'(0) = {self.F0p}")
        if not 0 < self.m_lo <= self.m_hi:
            raise KatoHypothesisError("0 < m_lo <= m_hi", f"m_lo = {self.m_lo}, m_hi = {self.m_hi}")
        if self.T0 < 0:
            raise KatoHypothesisError("T0 >= 0", f"T0 = {self.T0}")
        if self.log_A is None:
            object.__setattr__(self, "log_A", _log_of(self.A))
        if self.log_B is None:
            object.__setattr__(self, "log_B", _log_of(self.B))

    @property
    def h_exponent(self) -> float:
        return (self.p - 1) / 2 - self.delta

    def log_h(self, t):
        return 0.5 * self.log_B(t) + self.h_exponent * self.log_A(t)

    def rhs(self) -> float:
        """delta^-1 m_hi sqrt((p+1)/m_lo)."""
        return self.m_hi * math.sqrt((self.p + 1) / self.m_lo) / self.delta

    def log_lhs(self, T):
        """log of T h(T) A(T)^delta."""
        return np.log(T) + 0.5 * self.log_B(T) + 0.5 * (self.p - 1) * self.log_A(T)


def h_eval(inst: KatoInstance, t):
    """h(t) = B(t)^(1/2) A(t)^((p-1)/2 - delta), defined for t >= T0."""
    if np.any(np.asarray(t) < inst.T0):
        raise ValueError(f"h is only defined for t >= T0 = {inst.T0}")
    return np.exp(inst.log_h(t))


def compute_T1_tilde(inst: KatoInstance) -> float:
    """m_hi/m_lo F(0)/F'(0), or the doubling time when F'(0) = 0."""
    if inst.F0p != 0:
        return inst.m_hi / inst.m_lo * inst.F0 / inst.F0p
    if inst.t_double is None:
        raise KatoHypothesisError("F(t_double) >= 2 F(0)",
                                  "F'(0) = 0 requires a doubling time t_double")
    return float(inst.t_double)


def sample_grid(t_start: float, t_end: float, per_decade: int = POINTS_PER_DECADE) -> np.ndarray:
    """Geometric grid in 1+t with ``per_decade`` points per decade (at least 200)."""
    s0, s1 = 1.0 + t_start, 1.0 + t_end
    count = max(200, int(math.ceil(per_decade * math.log10(s1 / s0))) + 1)
    return np.geomspace(s0, s1, count) - 1.0


@dataclass
class KatoReport:
    T0_tilde: float
    T1_tilde: float
    candidate: float
    candidate_ok: bool
    T_tilde: float
    bound: float
    condition_ok: bool
    log_lhs: float
    log_rhs: float
    h_values: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "T0_tilde": self.T0_tilde,
            "T1_tilde": self.T1_tilde,
            "candidate": self.candidate,
            "candidate_ok": self.candidate_ok,
            "T_tilde": self.T_tilde,
            "bound": self.bound,
            "condition_ok": self.condition_ok,
            "log_lhs": self.log_lhs,
            "log_rhs": self.log_rhs,
        }


def check_hypotheses(inst: KatoInstance, t_end: float, rel_tol: float = 1e-12) -> np.ndarray:
    """Sample B, h and m; raise ``KatoHypothesisError`` on the first failure.

    Returns the grid used for h (from T0 to ``t_end``).
    """
    grid_all = sample_grid(0.0, t_end)
    logB = np.asarray(inst.log_B(grid_all), dtype=float)
    if not np.all(np.isfinite(logB)):
        raise KatoHypothesisError("B > 0", "B vanishes or is not finite on the sample grid")
    if np.any(np.diff(logB) > rel_tol * np.maximum(1.0, np.abs(logB[1:]))):
        i = int(np.argmax(np.diff(logB)))
        raise KatoHypothesisError("B decreasing", f"B increases near t = {grid_all[i]:.6g}")
    mv = np.array([inst.m(t) for t in grid_all], dtype=float)
    if np.any(mv < inst.m_lo * (1 - rel_tol)) or np.any(mv > inst.m_hi * (1 + rel_tol)):
        raise KatoHypothesisError("m_lo <= m(t) <= m_hi", f"m ranges over [{mv.min()}, {mv.max()}]")
    grid_h = sample_grid(inst.T0, max(t_end, inst.T0 + 1e-12))
    logh = np.asarray(inst.log_h(grid_h), dtype=float)
    if not np.all(np.isfinite(logh)):
        raise KatoHypothesisError("A > 0", "A or B is not positive and finite on [T0, t_end]")
    if np.any(np.diff(logh) < -rel_tol * np.maximum(1.0, np.abs(logh[1:]))):
        i = int(np.argmin(np.diff(logh)))
        raise KatoHypothesisError("h non-decreasing", f"h decreases near t = {grid_h[i]:.6g}")
    return grid_h


def _passes(inst: KatoInstance, T: float) -> bool:
    return float(inst.log_lhs(T)) >= math.log(inst.rhs())


def certify(inst: KatoInstance, candidate: float | None = None, search: bool = True) -> KatoReport:
    """Check the certificate condition at ``candidate`` and return the certified bound.

    If the candidate fails and ``search`` is on, the smallest passing time
    above it is located (doubling, then bisection) and reported as
    ``T_tilde``; ``candidate_ok`` keeps the verdict on the original value.
    """
    T0 = float(inst.T0)
    T1 = compute_T1_tilde(inst)
    floor = max(T0, T1)
    if candidate is None:
        candidate = floor
    if candidate < floor:
        raise ValueError(f"candidate {candidate} is below max(T0, T1) = {floor}")
    if candidate <= 0:
        raise ValueError("candidate must be positive")

    check_hypotheses(inst, 3.0 * candidate)
    log_rhs = math.log(inst.rhs())
    candidate_ok = _passes(inst, candidate)
    T = candidate
    if not candidate_ok and search:
        hi = candidate
        for _ in range(400):
            hi *= 2.0
            if _passes(inst, hi):
                break
        else:
            raise KatoHypothesisError("condition reachable", "no passing T found by doubling")
        lo = hi / 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if _passes(inst, mid):
                hi = mid
            else:
                lo = mid
        T = hi
    condition_ok = _passes(inst, T)
    grid_h = check_hypotheses(inst, 3.0 * T)
    stride = max(1, len(grid_h) // 50)
    h_vals = [(float(t), float(np.exp(inst.log_h(t)))) for t in grid_h[::stride]]
    return KatoReport(
        T0_tilde=T0,
        T1_tilde=T1,
        candidate=float(candidate),
        candidate_ok=candidate_ok,
        T_tilde=float(T),
        bound=3.0 * float(T),
        condition_ok=condition_ok,
        log_lhs=float(inst.log_lhs(T)),
        log_rhs=log_rhs,
        h_values=h_vals,
    )


def ode_blowup_oracle(m, B, p, F0, F0p, t_max, threshold=1e10, *, m_lo=None, m_hi=None,
                      log_B=None, rtol=1e-9) -> BlowupResult:
    """Integrate the equality case ``{m F'}' = B |F|^p`` and bracket its blow-up.

    Without explicit ``m_lo``/``m_hi`` the multiplier is sampled on [0, t_max].
    """
    if not (F0 >= 0 and F0p >= 0 and F0 + F0p > 0):
        raise ValueError("need F(0), F'(0) >= 0, not both zero")
    if m_lo is None or m_hi is None:
        mv = np.array([m(t) for t in sample_grid(0.0, t_max)])
        m_lo = float(mv.min()) if m_lo is None else m_lo
        m_hi = float(mv.max()) if m_hi is None else m_hi
    logB = log_B if log_B is not None else (lambda t: math.log(B(t)))
    ode = MultiplierODE(
        m=m,
        log_forcing=lambda t, u: float(logB(t)) + p * u,
        B=B,
        p=p,
        m_lo=m_lo,
        m_hi=m_hi,
    )
    return ode.solve(F0, F0p, t_max, threshold=threshold, rtol=rtol)


def oracle_for(inst: KatoInstance, t_max: float, **kw) -> BlowupResult:
    return ode_blowup_oracle(inst.m, inst.B, inst.p, inst.F0, inst.F0p, t_max,
                             m_lo=inst.m_lo, m_hi=inst.m_hi, log_B=inst.log_B, **kw)


# parametric templates used by the kato-check config


def power_law(a: float, gamma: float):
    """a (1+t)^gamma, with its log."""
    la = math.log(a)
    return (lambda t: a * np.power(1.0 + np.asarray(t, dtype=float), gamma),
            lambda t: la + gamma * np.log1p(np.asarray(t, dtype=float)))


def exponential(a: float, lam: float):
    """a e^(lam t), with its log."""
    la = math.log(a)
    return (lambda t: a * np.exp(lam * np.asarray(t, dtype=float)),
            lambda t: la + lam * np.asarray(t, dtype=float))


def multiplier_family(mu: float, beta: float):
    """exp(mu (1+t)^(1-beta)/(1-beta)) with its bounds (m(0), 1)."""
    if beta <= 1:
        raise ValueError("multiplier needs beta > 1")

    def m(t):
        return float(np.exp(mu * (1.0 + t) ** (1.0 - beta) / (1.0 - beta)))

    return m, math.exp(mu / (1.0 - beta)), 1.0


def _parse_template(spec: str):
    parts = spec.split()
    kind, args = parts[0].lower(), [float(x) for x in parts[1:]]
    if kind in ("power", "power_law") and len(args) == 2:
        return power_law(*args)
    if kind in ("exp", "exponential") and len(args) == 2:
        return exponential(*args)
    raise ValueError(f"unknown template {spec!r}; use 'power a gamma' or 'exp a lam'")


def instance_from_mapping(cfg: Mapping[str, str]) -> tuple[KatoInstance, float | None]:
    """Build an instance from ``kato-check`` config keys.

    Keys: p, delta, F0, F0p, t_double, T0, A, B, m, candidate. ``A``/``B`` are
    ``power a gamma`` or ``exp a lam``; ``m`` is ``const c`` or
    ``multiplier mu beta``.
    """
    A, logA = _parse_template(cfg["A"])
    B, logB = _parse_template(cfg["B"])
    mspec = cfg.get("m", "const 1").split()
    if mspec[0] == "const":
        c = float(mspec[1]) if len(mspec) > 1 else 1.0
        m, m_lo, m_hi = (lambda t, c=c: c), c, c
    elif mspec[0] == "multiplier":
        m, m_lo, m_hi = multiplier_family(float(mspec[1]), float(mspec[2]))
    else:
        raise ValueError(f"unknown multiplier {cfg['m']!r}")
    t_double = cfg.get("t_double")
    inst = KatoInstance(
        A=A, B=B, m=m, m_lo=m_lo, m_hi=m_hi,
        delta=float(cfg["delta"]), p=float(cfg["p"]),
        F0=float(cfg["F0"]), F0p=float(cfg["F0p"]),
        t_double=float(t_double) if t_double is not None else None,
        T0=float(cfg.get("T0", 0.0)),
        log_A=logA, log_B=logB,
    )
    cand = cfg.get("candidate")
    return inst, (float(cand) if cand is not None else None)


# randomized soundness trials


@dataclass(frozen=True)
class SoundnessTrial:
    accepted: bool
    reason: str
    family: str = ""
    p: float = math.nan
    delta: float = math.nan
    bound: float = math.nan
    t_blow_lo: float = math.nan
    t_blow_hi: float = math.nan

    @property
    def sound(self) -> bool:
        return self.t_blow_hi <= 1.01 * self.bound


def soundness_trial(rng: np.random.Generator, t_max: float = 1e5) -> SoundnessTrial:
    """Draw a random instance, integrate its equality case, certify, compare.

    A is drawn below F(0) and the draw is rejected unless F >= A on the whole
    integrated trace; for F'(0) = 0 the doubling time is read off the trace.
    """
    p = float(rng.uniform(1.2, 5.0))
    delta = float(rng.uniform(0.1, 0.9)) * (p - 1) / 2
    e = (p - 1) / 2 - delta
    F0 = float(rng.uniform(0.5, 2.0))
    F0p = 0.0 if rng.random() < 0.3 else float(rng.uniform(0.1, 1.0))
    if rng.random() < 0.5:
        c = float(rng.uniform(0.5, 2.0))
        m, m_lo, m_hi = (lambda t, c=c: c), c, c
    else:
        m, m_lo, m_hi = multiplier_family(float(rng.uniform(0.0, 2.0)), float(rng.uniform(1.5, 3.0)))
    a = float(rng.uniform(0.05, 0.5)) * F0
    b = float(rng.uniform(0.2, 2.0))
    if rng.random() < 0.5:
        family = "power"
        gamma = float(rng.uniform(0.2, 2.0))
        A, log_A = power_law(a, gamma)
        B, log_B = power_law(b, -float(rng.uniform(0.0, 1.0)) * 2 * gamma * e)
    else:
        family = "exponential"
        lam = float(rng.uniform(0.05, 0.5))
        A, log_A = exponential(a, lam)
        B, log_B = exponential(b, -float(rng.uniform(0.0, 1.0)) * 2 * lam * e)

    res = ode_blowup_oracle(m, B, p, F0, F0p, t_max, m_lo=m_lo, m_hi=m_hi, log_B=log_B)
    if not res.blow_up:
        return SoundnessTrial(False, "no blow-up before t_max", family, p, delta)
    ts, logF = res.times, res.logF
    upto = ts <= res.t_lo
    if np.any(logF[upto] < np.asarray(log_A(ts[upto]))):
        return SoundnessTrial(False, "A is not below F", family, p, delta)
    t_double = None
    if F0p == 0:
        hit = np.flatnonzero(logF >= math.log(2.0 * F0))
        if not hit.size:
            return SoundnessTrial(False, "F never doubles", family, p, delta)
        t_double = float(ts[hit[0]])
    inst = KatoInstance(A=A, B=B, m=m, m_lo=m_lo, m_hi=m_hi, delta=delta, p=p, F0=F0, F0p=F0p,
                        t_double=t_double, log_A=log_A, log_B=log_B)
    # the instance is only usable while F >= A; past blow-up that is vacuous
    try:
        rep = certify(inst)
    except KatoHypothesisError as exc:
        return SoundnessTrial(False, f"hypothesis: {exc}", family, p, delta)
    return SoundnessTrial(True, "certified", family, p, delta, rep.bound, res.t_lo, res.t_hi)
