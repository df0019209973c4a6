r"""The lifespan equation and the constant in front of the data size.

The bound is ``3 zeta`` where ``zeta`` is the larger root of

    g(zeta) = eps_bar zeta^dp exp(kappa zeta^(q/2)) = 1,

with ``q = 1 - alpha``, ``dp = 2/(p-1) - n + (1+alpha)/4`` and
``kappa = (2/q) sqrt(mu2 m(0))``. Everything is solved on ``log g``, which
stays finite where ``g`` itself spans hundreds of decades.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

from scipy.optimize import brentq

from .comparison import (ComparisonSetup, EnvelopeConstants, build_setup, calibrate_envelope,
                         doubling_time)
from .params import ProblemParams

MAX_ITER = 200


class NoRootError(ValueError):
    def __init__(self, min_log_g: float, zeta_star: float):
        super().__init__(f"g has no root: its minimum exp({min_log_g:.6g}) > 1 at zeta*={zeta_star:.6g}")
        self.min_log_g = min_log_g
        self.zeta_star = zeta_star


class TheoremDomainError(ValueError):
    """C eps >= 1: the data size is outside the regime the bound addresses."""


def lifespan_exponents(params: ProblemParams) -> tuple[float, float]:
    """(dp, kappa) for the parameter tuple."""
    n, p, alpha = params.n, params.p, params.alpha
    dp = 2.0 / (p - 1) - n + (1 + alpha) / 4
    kappa = 2.0 / (1 - alpha) * math.sqrt(params.mu2 * params.coefficients.multiplier_floor())
    return dp, kappa


@dataclass(frozen=True)
class LifespanQuery:
    params: ProblemParams
    eps_bar: float
    exponent_delta_prime: float
    kappa: float

    @classmethod
    def build(cls, params: ProblemParams, eps_bar: float) -> "LifespanQuery":
        dp, kappa = lifespan_exponents(params)
        return cls(params, eps_bar, dp, kappa)

    @property
    def q(self) -> float:
        return 1.0 - self.params.alpha

    def log_g(self, zeta: float) -> float:
        return (math.log(self.eps_bar) + self.exponent_delta_prime * math.log(zeta)
                + self.kappa * zeta ** (self.q / 2))

    def dlog_g(self, zeta: float) -> float:
        """d(log g)/d(log zeta); its sign is the sign of g'."""
        return self.exponent_delta_prime + self.kappa * self.q / 2 * zeta ** (self.q / 2)

    def stationary_point(self) -> float | None:
        dp = self.exponent_delta_prime
        if dp >= 0:
            return None
        return (-2.0 * dp / (self.kappa * self.q)) ** (2.0 / self.q)


@dataclass(frozen=True)
class LifespanReport:
    zeta: float
    bound: float
    residual: float
    asymptote_c: float
    branch_note: str
    eps_bar: float = math.nan
    C: float = math.nan
    warnings: tuple[str, ...] = field(default_factory=tuple)
    T0_tilde: float = math.nan
    T1_tilde: float = math.nan

    def as_dict(self) -> dict:
        return {
            "zeta": self.zeta, "bound": self.bound, "residual": self.residual,
            "asymptote_c": self.asymptote_c, "branch_note": self.branch_note,
            "eps_bar": self.eps_bar, "C": self.C, "T0_tilde": self.T0_tilde,
            "T1_tilde": self.T1_tilde, "warnings": list(self.warnings),
        }


def _check_eps_bar(eps_bar: float):
    if not (0.0 < eps_bar < 1.0):
        raise ValueError(f"eps_bar must lie in (0, 1), got {eps_bar}")


def _solve(query: LifespanQuery) -> tuple[float, str]:
    zs = query.stationary_point()
    if zs is None:
        # g increases from 0 (dp > 0) or from eps_bar < 1 (dp = 0)
        note = "unique root (g increasing)"
        lo = 1.0
        while query.log_g(lo) > 0:
            lo *= 0.5
    else:
        note = "larger of two roots (g decreasing then increasing)"
        if query.log_g(zs) > 0:
            raise NoRootError(query.log_g(zs), zs)
        lo = zs
    hi = max(2.0 * lo, 1.0)
    while query.log_g(hi) < 0:
        hi *= 2.0
    if query.log_g(lo) == 0:
        return lo, note

    def f(x):
        return query.log_g(math.exp(x))

    x = brentq(f, math.log(lo), math.log(hi), xtol=1e-15, rtol=4 * sys.float_info.epsilon, maxiter=MAX_ITER)
    return math.exp(x), note


def log_asymptote_coeff(params: ProblemParams) -> float:
    """c with zeta(eps_bar) <= c [log(1/eps_bar)]^(2/q) for eps_bar < 1/e.

    For dp >= 0, log g >= log eps_bar + kappa zeta^(q/2) once zeta >= 1, so
    c = kappa^(-2/q) (exact when dp = 0). For dp < 0 write x = zeta^(q/2);
    the concave bound dp log zeta >= -(2|dp|/q)(log(2 x*) - 1) - kappa x / 2
    with x* = 2|dp|/(kappa q) gives zeta <= [(2/kappa)(L + D)]^(2/q), and
    L = log(1/eps_bar) >= 1 absorbs D.
    """
    dp, kappa = lifespan_exponents(params)
    q = 1.0 - params.alpha
    if dp >= 0:
        return kappa ** (-2.0 / q)
    a = 2.0 * abs(dp) / q
    x_star = a / kappa
    D = max(0.0, a * (math.log(2.0 * x_star) - 1.0))
    return (2.0 / kappa * (1.0 + D)) ** (2.0 / q)


def zeta_solve(params: ProblemParams, eps_bar: float) -> LifespanReport:
    _check_eps_bar(eps_bar)
    query = LifespanQuery.build(params, eps_bar)
    zeta, note = _solve(query)
    residual = abs(math.expm1(query.log_g(zeta)))
    return LifespanReport(zeta=zeta, bound=3.0 * zeta, residual=residual,
                          asymptote_c=log_asymptote_coeff(params), branch_note=note,
                          eps_bar=eps_bar)


def log_asymptote(params: ProblemParams, eps: float) -> float:
    """c [log(1/eps)]^(2/(1-alpha)); dominates zeta(eps) for eps < 1/e."""
    if not (0.0 < eps < math.exp(-1.0)):
        raise ValueError(f"log_asymptote needs 0 < eps < 1/e, got {eps}")
    q = 1.0 - params.alpha
    return log_asymptote_coeff(params) * math.log(1.0 / eps) ** (2.0 / q)


def assemble_C(params: ProblemParams, env: EnvelopeConstants, delta: float | None = None) -> float:
    """C = C2 [delta m(0) sqrt(C1) / (2 sqrt(p+1))]^(2/(p-1)), delta = (p-1)/4."""
    p = params.p
    if delta is None:
        delta = (p - 1) / 4
    m0 = params.coefficients.multiplier_floor()
    return env.C2 * (delta * m0 * math.sqrt(env.C1) / (2.0 * math.sqrt(p + 1))) ** (2.0 / (p - 1))


def T1_tilde_for(params: ProblemParams, f_l1: float, g_l1: float) -> float:
    """Start time from the data: ||f|| / (m(0) ||g||), or the doubling time if g = 0."""
    if g_l1 > 0:
        return f_l1 / (params.coefficients.multiplier_floor() * g_l1)
    return doubling_time(params)


@dataclass(frozen=True)
class TheoremSetup:
    """Everything eps-independent needed to evaluate the bound."""

    params: ProblemParams
    setup: ComparisonSetup
    env: EnvelopeConstants
    C: float
    T1_tilde: float

    @classmethod
    def build(cls, params: ProblemParams, f_l1: float, g_l1: float) -> "TheoremSetup":
        setup = build_setup(params, f_l1, g_l1)
        env = calibrate_envelope(setup)
        return cls(params, setup, env, assemble_C(params, env), T1_tilde_for(params, f_l1, g_l1))

    def bound(self, eps: float) -> LifespanReport:
        if not eps > 0:
            raise ValueError("eps must be positive")
        eps_bar = self.C * eps
        if eps_bar >= 1.0:
            raise TheoremDomainError(f"C eps = {eps_bar:.6g} >= 1")
        rep = zeta_solve(self.params, eps_bar)
        warnings = []
        if rep.zeta < 2.0:
            warnings.append(f"zeta = {rep.zeta:.6g} < 2, so zeta - 1 < 1")
        need = max(self.env.T0_tilde, self.T1_tilde)
        if rep.zeta - 1.0 < need:
            warnings.append(f"zeta - 1 = {rep.zeta - 1:.6g} < max(T0, T1) = {need:.6g}")
        return LifespanReport(zeta=rep.zeta, bound=rep.bound, residual=rep.residual,
                              asymptote_c=rep.asymptote_c, branch_note=rep.branch_note,
                              eps_bar=eps_bar, C=self.C, warnings=tuple(warnings),
                              T0_tilde=self.env.T0_tilde, T1_tilde=self.T1_tilde)


def theorem_bound(params: ProblemParams, f_l1: float, g_l1: float, eps: float | None = None) -> LifespanReport:
    """3 zeta(C eps) for data with the given L1 norms; eps defaults to params.eps."""
    return TheoremSetup.build(params, f_l1, g_l1).bound(params.eps if eps is None else eps)
