r"""Comparison solution, exponential envelope and the Hölder weight.

With ``c = m(0) mu2`` and ``q = 1 - alpha`` the auxiliary function solves

    J''(t) = c (1+t)^(q-2) J(t),   J(t0) = eps J0,  J'(t0) = eps J1,

with ``J0 = ||f||_1 / 2`` and ``J1 = m(0) ||g||_1 / 2``. Its fundamental pair is

    J_+(t) = (1+t)^(1/2) I_{1/q}(z),   J_-(t) = (1+t)^(1/2) K_{1/q}(z),
    z = (2 sqrt(c)/q) (1+t)^(q/2),

and ``J = eps (c_plus J_+ + c_minus J_-)``. The functional ``F0 = int u dx``
dominates ``J`` for ``t >= t0``, and for ``t >= T1`` the envelope

    A(t) = eps C2 (1+t)^((1+alpha)/4) exp(2 sqrt(c)/q (1+t)^(q/2))

sits below ``J``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrate import BlowupResult, MultiplierODE
from .params import ProblemParams
from .specfun import bessel_ik, gamma_fn

T0_GRID_STEP = 0.5
T0_SEARCH_MAX = 1e4
ASYM_AGREEMENT = 0.10
MINUS_CONTAMINATION = 0.01
SAFETY = 0.9


class CalibrationError(RuntimeError):
    pass


def unit_ball_volume(n: int) -> float:
    return 2.0 * math.pi ** (n / 2) / (n * gamma_fn(n / 2))


def holder_C1(params: ProblemParams) -> float:
    """(|B_1| R^n)^-(p-1): Hölder constant over the ball of radius R(1+t)."""
    return (unit_ball_volume(params.n) * params.R ** params.n) ** (-(params.p - 1))


def holder_B(params: ProblemParams, t):
    """B(t) = m(0) C1 (1+t)^(-n(p-1))."""
    m0 = params.coefficients.multiplier_floor()
    return m0 * holder_C1(params) * np.power(1.0 + np.asarray(t, dtype=float),
                                             -params.n * (params.p - 1))


def _pair(c: float, q: float, t: float):
    """Scaled Bessel data at z(t): returns (s, z, Ie, Ke, I1e, K1e)."""
    s = 1.0 + t
    z = 2.0 * math.sqrt(c) / q * s ** (q / 2)
    nu = 1.0 / q
    ie, ke, _, _ = bessel_ik(nu, z, scaled=True)
    i1e, k1e, _, _ = bessel_ik(nu + 1.0, z, scaled=True)
    return s, z, ie, ke, i1e, k1e


def fundamental_pair(c: float, q: float, t: float):
    """(J_+, J_-, J_+', J_-') at t, unscaled."""
    s, z, ie, ke, i1e, k1e = _pair(c, q, t)
    ez, emz = math.exp(z), math.exp(-z)
    sq = math.sqrt(c) * s ** ((q - 1) / 2)
    jp = math.sqrt(s) * ie * ez
    jm = math.sqrt(s) * ke * emz
    djp = (ie / math.sqrt(s) + sq * i1e) * ez
    djm = (ke / math.sqrt(s) - sq * k1e) * emz
    return jp, jm, djp, djm


def solve_c_coeffs(c: float, q: float, J0: float, J1: float, t0: float):
    """Coefficients with ``c_plus J_+ + c_minus J_-`` matching (J0, J1) at t0.

    Solved as a 2x2 system; the Wronskian of the pair is exactly -q/2.
    """
    if not t0 > 0:
        raise ValueError("t0 must be positive")
    jp, jm, djp, djm = fundamental_pair(c, q, t0)
    mat = np.array([[jp, jm], [djp, djm]])
    w = jp * djm - djp * jm
    if not math.isfinite(w) or abs(w) < 1e-8 * (q / 2):
        raise ArithmeticError(f"fundamental pair is numerically singular at t0={t0} (W={w})")
    cp, cm = np.linalg.solve(mat, np.array([J0, J1]))
    return float(cp), float(cm)


def closed_form_c_coeffs(c: float, q: float, J0: float, J1: float, t0: float):
    """The explicit expressions for (c_plus, c_minus), used as a cross-check."""
    s, z, ie, ke, i1e, k1e = _pair(c, q, t0)
    ez, emz = math.exp(z), math.exp(-z)
    k0, k1 = ke * emz, k1e * emz
    i0, i1 = ie * ez, i1e * ez
    pre = 2.0 / q * s ** -0.5 * (s * J1 - J0)
    tail = J0 * 2.0 * math.sqrt(c) / abs(q) * s ** ((q - 1) / 2)
    return pre * k0 + tail * k1, -pre * i0 + tail * i1


def choose_t0(c: float, q: float, J0: float, J1: float) -> float:
    """Smallest t0 on {0.5 k} with c_plus > 0."""
    if not (J0 > 0 or J1 > 0):
        raise ValueError("data vanish: need ||f||_1 > 0 or ||g||_1 > 0")
    k = 1
    while k * T0_GRID_STEP <= T0_SEARCH_MAX:
        t0 = k * T0_GRID_STEP
        if solve_c_coeffs(c, q, J0, J1, t0)[0] > 0:
            return t0
        k += 1
    raise RuntimeError(f"no t0 <= {T0_SEARCH_MAX} gives c_plus > 0")


@dataclass(frozen=True)
class EnvelopeConstants:
    C1: float
    C2: float
    T1: float
    T2: float

    @property
    def T0_tilde(self) -> float:
        return max(self.T1, self.T2)


@dataclass(frozen=True)
class ComparisonSetup:
    """Comparison data for one parameter tuple and one pair of data norms.

    ``c_plus``/``c_minus`` are normalised to unit amplitude, so
    ``J = eps (c_plus J_+ + c_minus J_-)`` and ``t0`` does not depend on eps.
    """

    params: ProblemParams
    f_l1: float
    g_l1: float
    c: float
    q: float
    J0: float
    J1: float
    t0: float
    c_plus: float
    c_minus: float

    @property
    def eps(self) -> float:
        return self.params.eps

    @property
    def nu(self) -> float:
        return 1.0 / self.q

    @property
    def growth_rate(self) -> float:
        """2 sqrt(c)/q, the coefficient of (1+t)^(q/2) in the exponent."""
        return 2.0 * math.sqrt(self.c) / self.q

    def J_eval(self, t):
        if np.ndim(t):
            return np.array([self.J_eval(x) for x in np.asarray(t, dtype=float)])
        self._check_t(t)
        jp, jm, _, _ = fundamental_pair(self.c, self.q, float(t))
        return self.eps * (self.c_plus * jp + self.c_minus * jm)

    def dJ_eval(self, t):
        if np.ndim(t):
            return np.array([self.dJ_eval(x) for x in np.asarray(t, dtype=float)])
        self._check_t(t)
        _, _, djp, djm = fundamental_pair(self.c, self.q, float(t))
        return self.eps * (self.c_plus * djp + self.c_minus * djm)

    def log_J(self, t):
        """log J(t) without overflow, for lifespan-scale times."""
        if np.ndim(t):
            return np.array([self.log_J(x) for x in np.asarray(t, dtype=float)])
        self._check_t(t)
        s, z, ie, ke, _, _ = _pair(self.c, self.q, float(t))
        ratio = self.c_minus / self.c_plus * (ke / ie) * math.exp(-2.0 * z)
        return (math.log(self.eps * self.c_plus) + 0.5 * math.log(s) + math.log(ie) + z
                + math.log1p(ratio))

    def log_shape(self, t):
        """log of (1+t)^((1+alpha)/4) exp(2 sqrt(c)/q (1+t)^(q/2))."""
        s = 1.0 + np.asarray(t, dtype=float)
        return (1 + self.params.alpha) / 4 * np.log(s) + self.growth_rate * np.power(s, self.q / 2)

    def asymptotic_plus(self, t):
        """One-term large-t form of J_+(t)."""
        s = 1.0 + np.asarray(t, dtype=float)
        return (math.sqrt(self.q / math.pi) / (2.0 * self.c ** 0.25)
                * np.power(s, 0.5 - self.q / 4) * np.exp(self.growth_rate * np.power(s, self.q / 2)))

    def envelope_limit(self) -> float:
        """lim J/(eps shape) as t -> inf."""
        return self.c_plus * math.sqrt(self.q / math.pi) / (2.0 * self.c ** 0.25)

    def _check_t(self, t):
        if t < self.t0:
            raise ValueError(f"J is defined for t >= t0 = {self.t0} (got {t})")


def build_setup(params: ProblemParams, f_l1: float, g_l1: float, t0: float | None = None) -> ComparisonSetup:
    """Assemble the comparison data from ``||f||_1`` and ``||g||_1``."""
    if f_l1 < 0 or g_l1 < 0:
        raise ValueError("data norms must be non-negative")
    m0 = params.coefficients.multiplier_floor()
    c = m0 * params.mu2
    q = 1.0 - params.alpha
    J0 = 0.5 * f_l1
    J1 = 0.5 * m0 * g_l1
    if t0 is None:
        t0 = choose_t0(c, q, J0, J1)
    cp, cm = solve_c_coeffs(c, q, J0, J1, t0)
    return ComparisonSetup(params, f_l1, g_l1, c, q, J0, J1, t0, cp, cm)


def h_bracket(params: ProblemParams, t, delta: float | None = None):
    """Sign-carrying factor of h'(t) for the envelope A and weight B."""
    p, n, alpha = params.p, params.n, params.alpha
    if delta is None:
        delta = (p - 1) / 4
    c = params.coefficients.multiplier_floor() * params.mu2
    s = 1.0 + np.asarray(t, dtype=float)
    return -n * (p - 1) / 2 + ((p - 1) / 2 - delta) * ((1 + alpha) / 4 + math.sqrt(c) * np.power(s, (1 - alpha) / 2))


def monotonicity_onset(params: ProblemParams, delta: float | None = None) -> float:
    """T2: the root of ``h_bracket`` (clamped at 0); h' > 0 beyond it."""
    p, n, alpha = params.p, params.n, params.alpha
    if delta is None:
        delta = (p - 1) / 4
    c = params.coefficients.multiplier_floor() * params.mu2
    target = (n * (p - 1) / 2 / ((p - 1) / 2 - delta) - (1 + alpha) / 4) / math.sqrt(c)
    if target <= 0:
        return 0.0
    return max(0.0, target ** (2.0 / (1 - alpha)) - 1.0)


def calibrate_envelope(setup: ComparisonSetup, samples: int = 2000) -> EnvelopeConstants:
    """Fix C2, T1 (envelope) and T2 (monotonicity of h); C1 is the Hölder constant.

    T1 is the first time on {t0 + 0.5 k} where the one-term asymptotic of
    J_+ is within 10% and |c_minus J_-| is within 1% of c_plus J_+. C2 is
    0.9 times the smallest ratio J/(eps shape) seen on [T1, 20 T1], also
    capped by its t -> inf limit so the bound keeps holding past 20 T1.
    """
    c, q, nu = setup.c, setup.q, setup.nu
    T1 = None
    k = 0
    while setup.t0 + k * T0_GRID_STEP <= T0_SEARCH_MAX:
        t = setup.t0 + k * T0_GRID_STEP
        s, z, ie, ke, _, _ = _pair(c, q, t)
        log_exact = 0.5 * math.log(s) + math.log(ie) + z
        log_asym = math.log(float(setup.asymptotic_plus(t)))
        asym_ok = abs(math.expm1(log_asym - log_exact)) <= ASYM_AGREEMENT
        contamination = abs(setup.c_minus / setup.c_plus) * (ke / ie) * math.exp(-2.0 * z)
        if asym_ok and contamination <= MINUS_CONTAMINATION:
            T1 = t
            break
        k += 1
    if T1 is None:
        raise CalibrationError("no T1 found: J_+ never reaches its asymptotic regime")
    ts = np.geomspace(1.0 + T1, 1.0 + 20.0 * T1, samples) - 1.0
    log_ratio = np.array([setup.log_J(t) for t in ts]) - math.log(setup.eps) - setup.log_shape(ts)
    ratio_min = float(np.exp(log_ratio.min()))
    limit = setup.envelope_limit()
    C2 = SAFETY * min(ratio_min, limit)
    if not (math.isfinite(C2) and C2 > 1e-300):
        raise CalibrationError(f"envelope ratio not bounded away from 0 (min={ratio_min})")
    return EnvelopeConstants(holder_C1(setup.params), C2, T1, monotonicity_onset(setup.params))


def log_envelope_A(setup: ComparisonSetup, env: EnvelopeConstants, t):
    if np.any(np.asarray(t) < env.T1):
        raise ValueError(f"envelope is only valid for t >= T1 = {env.T1}")
    return math.log(setup.eps * env.C2) + setup.log_shape(t)


def envelope_A(setup: ComparisonSetup, env: EnvelopeConstants, t):
    """A(t) = eps C2 (1+t)^((1+alpha)/4) exp(2 sqrt(m(0) mu2)/(1-alpha) (1+t)^((1-alpha)/2))."""
    if np.any(np.asarray(t) < env.T1):
        raise ValueError(f"envelope is only valid for t >= T1 = {env.T1}")
    s = 1.0 + np.asarray(t, dtype=float)
    return (setup.eps * env.C2 * np.power(s, (1 + setup.params.alpha) / 4)
            * np.exp(setup.growth_rate * np.power(s, setup.q / 2)))


def doubling_time(params: ProblemParams) -> float:
    """t with m(0) mu2 (1+t)^(-max(0, alpha+1)) t^2 / 2 = 1.

    When F'(0) = 0 this guarantees F(t) >= 2 F(0).
    """
    from scipy.optimize import brentq

    c = params.coefficients.multiplier_floor() * params.mu2
    e = max(0.0, params.alpha + 1.0)

    def g(t):
        return 0.5 * c * (1.0 + t) ** (-e) * t * t - 1.0

    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
    return brentq(g, 0.0, hi, xtol=1e-14, rtol=1e-15)


def f0_lower_ode(params: ProblemParams, F0: float, F0p: float, t_end: float, *,
                 threshold: float = 1e10, rtol: float = 1e-9, h0: float | None = None) -> BlowupResult:
    """Integrate {m F'}' = m mu2 (1+t)^-(alpha+1) F + B(t) |F|^p.

    ``F0``/``F0p`` are the initial value and slope of F0(t) = int u dx,
    i.e. eps ||f||_1 and eps ||g||_1.
    """
    if not (F0 >= 0 and F0p >= 0 and F0 + F0p > 0):
        raise ValueError("need F(0), F'(0) >= 0, not both zero")
    coef = params.coefficients
    m0 = coef.multiplier_floor()
    p = params.p
    logc1 = math.log(holder_C1(params))
    lmu2 = math.log(params.mu2)

    def m(t):
        return float(coef.multiplier(t))

    def B(t):
        return float(holder_B(params, t))

    def log_forcing(t, u):
        ls = math.log1p(t)
        mass = float(coef.log_multiplier(t)) + lmu2 - (params.alpha + 1) * ls + u
        nonlin = math.log(m0) + logc1 - params.n * (p - 1) * ls + p * u
        return float(np.logaddexp(mass, nonlin))

    ode = MultiplierODE(m=m, log_forcing=log_forcing, B=B, p=p, m_lo=m0, m_hi=1.0)
    return ode.solve(F0, F0p, t_end, threshold=threshold, rtol=rtol, h0=h0)
