"""Adaptive integration of ``{m(t) F'(t)}' = forcing(t, F)`` up to blow-up.

Phase 1 integrates ``(F, G = m F')`` in time with step-doubling RK4 until
``F`` crosses a threshold. Phase 2 switches the independent variable to
``u = log F`` (with ``v = log G``), where the blow-up point is regular:

    dt/du = m e^(u - v),    dv/du = m e^(log forcing + u - 2v).

The bracket's lower end is the time at which the continued solution is still
finite. The upper end adds an energy bound on the remaining time: if the
forcing dominates ``B(t) F^p`` with ``B`` decreasing, then
``G^2 >= G1^2 + k (F^(p+1) - F1^(p+1))`` with ``k = 2 m_lo B(t1 + w) / (p+1)``
on a window of width ``w``, and ``F' >= G / m_hi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

Array = np.ndarray


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass
class AdaptiveResult:
    ts: Array
    ys: Array
    status: str  # "done" | "stopped" | "collapse"
    h_last: float


def integrate_adaptive(f, t0, y0, t_end, *, rtol=1e-9, atol=1e-300, h0=None,
                       stop=None, h_floor_rel=1e-14, max_steps=2_000_000) -> AdaptiveResult:
    """Step-doubling RK4 with local Richardson extrapolation.

    ``stop(t, y)`` ends the run early with status ``"stopped"``. A step below
    ``h_floor_rel * max(|t|, 1)`` ends it with status ``"collapse"``.
    """
    t = float(t0)
    y = np.asarray(y0, dtype=float)
    span = t_end - t0
    h = float(h0) if h0 is not None else min(1e-3, abs(span) / 16.0 or 1e-3)
    h = math.copysign(h, span)
    ts = [t]
    ys = [y.copy()]
    status = "done"
    for _ in range(max_steps):
        if (t_end - t) * math.copysign(1.0, span) <= 0:
            break
        if abs(h) > abs(t_end - t):
            h = t_end - t
        full = rk4_step(f, t, y, h)
        half = rk4_step(f, t, y, 0.5 * h)
        two = rk4_step(f, t + 0.5 * h, half, 0.5 * h)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(two))
        with np.errstate(invalid="ignore"):
            err = float(np.max(np.abs(two - full) / (15.0 * scale)))
        if not math.isfinite(err):
            err = math.inf
        if err <= 1.0:
            t = t + h
            y = two + (two - full) / 15.0
            ts.append(t)
            ys.append(y.copy())
            if stop is not None and stop(t, y):
                status = "stopped"
                break
            grow = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
            h *= grow
        else:
            h *= max(0.1, 0.9 * err ** -0.2)
        if abs(h) < h_floor_rel * max(abs(t), 1.0):
            status = "collapse"
            break
    else:
        raise RuntimeError("integrate_adaptive exceeded max_steps")
    return AdaptiveResult(np.array(ts), np.array(ys), status, abs(h))


@dataclass
class BlowupResult:
    """Outcome of a blow-up integration.

    ``times``/``F``/``dF`` hold the phase-1 trace followed by the phase-2
    points (where ``F`` may be huge; ``logF`` is always finite).
    """

    blow_up: bool
    t_lo: float | None
    t_hi: float | None
    times: Array
    logF: Array
    dF: Array
    reason: str = ""
    phase1_end: int = 0
    extras: dict = field(default_factory=dict)

    @property
    def F(self) -> Array:
        with np.errstate(over="ignore"):
            return np.exp(self.logF)

    @property
    def bracket(self):
        return (self.t_lo, self.t_hi)


def remaining_time_bound(t1, logF1, logG1, B, p, m_lo, m_hi, max_doublings=80) -> float:
    """Upper bound on the time left before blow-up after state ``(t1, F1, G1)``.

    Valid when ``{m F'}' >= B(t) F^p``, ``B`` decreasing and positive,
    ``m_lo <= m <= m_hi``.
    """
    window = 1e-6 * max(t1, 1.0)
    for _ in range(max_doublings):
        b = float(B(t1 + window))
        if not b > 0:
            return math.inf
        k = 2.0 * m_lo * b / (p + 1.0)
        log_a = 2.0 * logG1 - (p + 1.0) * logF1 - math.log(k)

        def integrand(w):
            # F = F1 e^w; integrand e^w / sqrt(a + e^{(p+1)w} - 1), in logs
            e = (p + 1.0) * w
            log_em1 = e + math.log(-math.expm1(-e)) if e > 0 else -math.inf
            return math.exp(w - 0.5 * float(np.logaddexp(log_a, log_em1)))

        val, _ = quad(integrand, 0.0, math.inf, limit=200)
        bound = m_hi * math.exp(0.5 * (1.0 - p) * logF1) / math.sqrt(k) * val
        if bound <= window:
            return bound
        window = 2.0 * bound
    return math.inf


@dataclass(frozen=True)
class MultiplierODE:
    """``{m(t) F'}' = exp(log_forcing(t, log F))`` with ``forcing >= B F^p``."""

    m: Callable[[float], float]
    log_forcing: Callable[[float, float], float]
    B: Callable[[float], float]
    p: float
    m_lo: float
    m_hi: float

    def solve(self, F0, F0p, t_max, *, threshold=1e10, rtol=1e-9, tail_rel=2.5e-4,
              h0=None) -> BlowupResult:
        """Integrate from ``F(0)=F0, F'(0)=F0p`` until blow-up or ``t_max``."""
        m, lf = self.m, self.log_forcing

        def rhs_t(t, y):
            F, G = y
            with np.errstate(divide="ignore"):
                logF = math.log(F) if F > 0 else -math.inf
            forcing = math.exp(lf(t, logF)) if logF > -math.inf else 0.0
            return np.array([G / m(t), forcing])

        y0 = np.array([F0, m(0.0) * F0p])
        log_thr = math.log(threshold)
        res = integrate_adaptive(
            rhs_t, 0.0, y0, t_max, rtol=rtol, h0=h0,
            stop=lambda t, y: y[0] > threshold or not np.all(np.isfinite(y)),
        )
        ts = res.ts
        Fs = res.ys[:, 0]
        Gs = res.ys[:, 1]
        ms = np.array([m(t) for t in ts])
        with np.errstate(divide="ignore"):
            logF = np.log(Fs)
        dF = Gs / ms
        n1 = len(ts)
        if res.status == "done":
            return BlowupResult(False, None, None, ts, logF, dF, "horizon reached", n1)
        if not np.all(np.isfinite(res.ys[-1])):
            # overflow inside one step: fall back to last finite point
            ts, logF, dF, Gs = ts[:-1], logF[:-1], dF[:-1], Gs[:-1]
            n1 -= 1

        t1 = float(ts[-1])
        u1 = float(logF[-1])
        v1 = math.log(Gs[-1])

        def rhs_u(u, y):
            t, v = y
            mt = m(t)
            return np.array([mt * math.exp(u - v), mt * math.exp(lf(t, u) + u - 2.0 * v)])

        # phase 2: march in u, checking the tail bound each unit of log F
        t_cur, v_cur, u_cur = t1, v1, u1
        p2_t, p2_u, p2_v = [], [], []
        tail = math.inf
        u_cap = u1 + 5000.0
        while u_cur < u_cap:
            seg = integrate_adaptive(rhs_u, u_cur, np.array([t_cur, v_cur]), u_cur + 1.0,
                                     rtol=rtol, h0=0.05)
            p2_u.extend(seg.ts[1:])
            p2_t.extend(seg.ys[1:, 0])
            p2_v.extend(seg.ys[1:, 1])
            u_cur = float(seg.ts[-1])
            t_cur, v_cur = (float(v) for v in seg.ys[-1])
            if t_cur > t_max:
                break
            tail = remaining_time_bound(t_cur, u_cur, v_cur, self.B, self.p, self.m_lo, self.m_hi)
            if tail <= tail_rel * t_cur:
                break

        times = np.concatenate([ts, p2_t])
        allF = np.concatenate([logF, p2_u])
        p2_dF = np.exp(np.array(p2_v)) / np.array([m(t) for t in p2_t]) if p2_t else np.array([])
        allDF = np.concatenate([dF, p2_dF])
        extras = {"phase1_status": res.status, "tail_bound": tail}
        if t_cur > t_max:
            return BlowupResult(False, None, None, times, allF, allDF,
                                "finite at t_max (phase 2)", n1, extras)
        if not math.isfinite(tail):
            return BlowupResult(False, None, None, times, allF, allDF,
                                "could not bound remaining time", n1, extras)
        # margins cover the accumulated integration error
        t_lo = t_cur * (1.0 - 1e-8)
        t_hi = t_cur + 2.0 * tail + 1e-8 * t_cur
        return BlowupResult(True, t_lo, t_hi, times, allF, allDF, "blow-up", n1, extras)
