r"""Gamma and modified Bessel functions of arbitrary real order.

:math:`I_\nu(x)` and :math:`K_\nu(x)` are computed together for real order
and positive argument. :math:`K` comes from Temme's series for
:math:`x < 2` and Steed's continued fraction otherwise, followed by upward
recurrence in the order. For :math:`x \ge 2`, :math:`I` follows from the
Wronskian :math:`I_\nu K_\nu' - I_\nu' K_\nu = -1/x` and the continued
fraction for :math:`I_\nu'/I_\nu`; below that the ascending series is used.
Integer orders need no special treatment.

The large-``x`` branch naturally yields :math:`e^{-x} I_\nu` and
:math:`e^{x} K_\nu`, which is what the log-scaled variants use, so
``log_bessel_i`` stays finite far beyond the double range of ``bessel_i``.

References
----------
N. M. Temme, "On the numerical evaluation of the modified Bessel function of
the third kind", J. Comput. Phys. 19 (1975).
Abramowitz & Stegun, 6.1.34 and 9.7.1-9.7.2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BesselEval",
    "RegimeError",
    "gamma_fn",
    "bessel_ik",
    "bessel_i",
    "bessel_k",
    "log_bessel_i",
    "log_bessel_k",
    "bessel_asym_leading",
]

_EPS = 1e-16
_FPMIN = 1e-290
_RESCALE = 1e250
_MAXIT = 200_000
_XMIN = 2.0
# exp() overflows beyond this
_LOG_MAX = math.log(np.finfo(float).max)

# Taylor coefficients of 1/Gamma(1+z) about z = 0
_RGAMMA = (
    1.0, 0.5772156649015329, -0.6558780715202539, -0.04200263503409524,
    0.16653861138229148, -0.04219773455554433, -0.009621971527876973,
    0.0072189432466631, -0.0011651675918590652, -0.00021524167411495098,
    0.0001280502823881162, -2.013485478078824e-05, -1.2504934821426706e-06,
    1.133027231981696e-06, -2.056338416977607e-07, 6.116095104481416e-09,
    5.002007644469223e-09, -1.18127457048702e-09, 1.0434267116911005e-10,
    7.782263439905071e-12, -3.696805618642206e-12, 5.100370287454476e-13,
    -2.0583260535665066e-14, -5.348122539423018e-15, 1.2267786282382608e-15,
    -1.1812593016974588e-16, 1.1866922547516004e-18, 1.4123806553180319e-18,
)


class RegimeError(ValueError):
    """An asymptotic formula was requested outside its validity regime."""


def gamma_fn(x: float) -> float:
    """Gamma function; raises ``ValueError`` at the poles 0, -1, -2, ..."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise ValueError(f"gamma_fn has a pole at {x}")
    return math.gamma(x)


def _temme_gammas(mu: float):
    """gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu) for |mu| <= 1/2.

    gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu) is summed directly from
    the odd Taylor terms, so there is no cancellation as mu -> 0.
    """
    mu2 = mu * mu
    even = 0.0
    odd = 0.0
    for k in range(len(_RGAMMA) - 2, -1, -2):
        even = even * mu2 + _RGAMMA[k]
    for k in range(len(_RGAMMA) - 1, 0, -2):
        odd = odd * mu2 + _RGAMMA[k]
    gam1 = -odd
    gam2 = even
    return gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1


def _bessik(nu: float, x: float):
    """Scaled (I e^-x, K e^x, I' e^-x, K' e^x) for nu >= 0, x > 0."""
    nl = int(nu + 0.5)
    xmu = nu - nl
    xmu2 = xmu * xmu
    xi = 1.0 / x
    xi2 = 2.0 * xi

    # CF1 (modified Lentz) for f = I'_nu / I_nu
    h = max(nu * xi, _FPMIN)
    b = xi2 * nu
    d = 0.0
    c = h
    for _ in range(_MAXIT):
        b += xi2
        d = 1.0 / (b + d)
        c = b + 1.0 / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"bessel CF1 did not converge (nu={nu}, x={x})")

    # downward recurrence to order xmu; only ratios matter, so rescale freely
    ril = _FPMIN
    ripl = h * ril
    ril1 = ril
    rip1 = ripl
    fact = nu * xi
    for _ in range(nl, 0, -1):
        ritemp = fact * ril + ripl
        fact -= xi
        ripl = fact * ritemp + ril
        ril = ritemp
        if abs(ril) > _RESCALE:
            ril /= _RESCALE
            ripl /= _RESCALE
            ril1 /= _RESCALE
            rip1 /= _RESCALE
    f = ripl / ril

    if x < _XMIN:
        x2 = 0.5 * x
        pimu = math.pi * xmu
        fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
        d = -math.log(x2)
        e = xmu * d
        fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
        gam1, gam2, gampl, gammi = _temme_gammas(xmu)
        ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        total = ff
        e = math.exp(e)
        p = 0.5 * e / gampl
        q = 0.5 / (e * gammi)
        c = 1.0
        d = x2 * x2
        total1 = p
        for i in range(1, _MAXIT):
            ff = (i * ff + p + q) / (i * i - xmu2)
            c *= d / i
            p /= i - xmu
            q /= i + xmu
            term = c * ff
            total += term
            total1 += c * (p - i * ff)
            if abs(term) < abs(total) * _EPS:
                break
        else:
            raise ArithmeticError("bessel Temme series did not converge")
        ex = math.exp(x)
        rkmu = total * ex
        rk1 = total1 * xi2 * ex
    else:
        # Steed's CF2 for K_mu, K_{mu+1}; exp(-x) factor omitted (scaled)
        b = 2.0 * (1.0 + x)
        d = 1.0 / b
        h = delh = d
        q1 = 0.0
        q2 = 1.0
        a1 = 0.25 - xmu2
        q = c = a1
        a = -a1
        s = 1.0 + q * delh
        for i in range(2, _MAXIT):
            a -= 2 * (i - 1)
            c = -a * c / i
            qnew = (q1 - b * q2) / a
            q1 = q2
            q2 = qnew
            q += c * qnew
            b += 2.0
            d = 1.0 / (b + a * d)
            delh = (b * d - 1.0) * delh
            h += delh
            dels = q * delh
            s += dels
            if abs(dels / s) < _EPS:
                break
        else:
            raise ArithmeticError("bessel CF2 did not converge")
        h = a1 * h
        rkmu = math.sqrt(math.pi / (2.0 * x)) / s
        rk1 = rkmu * (xmu + x + 0.5 - h) * xi

    rkmup = xmu * xi * rkmu - rk1
    rimu = xi / (f * rkmu - rkmup)
    ri = rimu * ril1 / ril
    rip = rimu * rip1 / ril
    for i in range(1, nl + 1):
        rktemp = (xmu + i) * xi2 * rk1 + rkmu
        rkmu = rk1
        rk1 = rktemp
    rk = rkmu
    rkp = nu * xi * rkmu - rk1
    if x < _XMIN:
        # the Wronskian route loses ~log10(1/x) digits here; the series does not
        emx = math.exp(-x)
        i0 = _series_i(nu, x)
        ri = i0 * emx
        rip = (_series_i(nu + 1.0, x) + nu * xi * i0) * emx
    # otherwise K carried the e^x scaling, so I is already e^-x scaled
    return ri, rk, rip, rkp


def _series_i(nu: float, x: float) -> float:
    """Ascending series for I_nu(x), nu >= 0; all terms positive."""
    lead = nu * math.log(0.5 * x) - math.lgamma(nu + 1.0)
    y = 0.25 * x * x
    term = 1.0
    total = 1.0
    for k in range(1, _MAXIT):
        term *= y / (k * (nu + k))
        total += term
        if term < _EPS * total:
            break
    return math.exp(lead) * total


def bessel_ik(nu: float, x: float, scaled: bool = False):
    """Return ``(I_nu(x), K_nu(x), I_nu'(x), K_nu'(x))``.

    With ``scaled=True`` the I pair is multiplied by ``exp(-x)`` and the K
    pair by ``exp(x)``. Negative orders use ``K_{-a} = K_a`` and
    ``I_{-a} = I_a + (2/pi) sin(a pi) K_a``.
    """
    nu = float(nu)
    x = float(x)
    if not x > 0:
        raise ValueError(f"argument must be positive (got {x})")
    if not math.isfinite(nu):
        raise ValueError(f"order must be finite (got {nu})")
    a = abs(nu)
    ri, rk, rip, rkp = _bessik(a, x)
    if not all(math.isfinite(v) for v in (ri, rk, rip, rkp)):
        raise OverflowError(f"K_{nu}({x}) is outside the double range")
    if nu < 0:
        sn = (2.0 / math.pi) * math.sin(a * math.pi)
        w = math.exp(-2.0 * x)  # converts scaled K to the I scaling
        ri = ri + sn * rk * w
        rip = rip + sn * rkp * w
    if scaled:
        return ri, rk, rip, rkp
    if x > _LOG_MAX:
        raise OverflowError(f"I_{nu}({x}) overflows; use log_bessel_i")
    ex = math.exp(x)
    emx = math.exp(-x)
    out = (ri * ex, rk * emx, rip * ex, rkp * emx)
    if not all(math.isfinite(v) for v in out):
        raise OverflowError(f"Bessel value at nu={nu}, x={x} overflows; use the log variants")
    return out


def _scalar_or_array(fn):
    def wrapper(nu, x):
        if np.ndim(nu) == 0 and np.ndim(x) == 0:
            return fn(float(nu), float(x))
        return np.vectorize(fn, otypes=[float])(nu, x)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_scalar_or_array
def bessel_i(nu, x):
    """Modified Bessel function of the first kind, I_nu(x)."""
    if 0 < x < 2.0 and nu >= 0:
        return _series_i(nu, x)  # no need for K, which may overflow here
    return bessel_ik(nu, x)[0]


@_scalar_or_array
def bessel_k(nu, x):
    """Modified Bessel function of the second kind, K_nu(x)."""
    return bessel_ik(nu, x)[1]


def _log_series_i(nu: float, x: float) -> float:
    """log I_nu(x) from the ascending series, summed in the log domain."""
    q = 2.0 * math.log(0.5 * x)
    log_t = nu * math.log(0.5 * x) - math.lgamma(nu + 1.0)
    total = log_t
    k = 0
    while True:
        k += 1
        log_t += q - math.log(k) - math.log(k + nu)
        total = float(np.logaddexp(total, log_t))
        if log_t < total - 40.0 and k > 0.5 * x:
            return total


def _log_k_upward(nu: float, x: float) -> float:
    """log K_nu(x) by upward recurrence on the ratio K_{a+1}/K_a."""
    mu = nu - math.floor(nu)
    _, k0, _, dk0 = _bessik(mu, x)
    log_k = math.log(k0) - x
    ratio = mu / x - dk0 / k0  # K_{mu+1} = (mu/x) K_mu - K_mu'
    a = mu
    for _ in range(int(math.floor(nu))):
        log_k += math.log(ratio)
        a += 1.0
        ratio = 1.0 / ratio + 2.0 * a / x
    return log_k


@_scalar_or_array
def log_bessel_i(nu, x):
    """log I_nu(x), valid where I_nu over- or underflows."""
    try:
        ri = bessel_ik(nu, x, scaled=True)[0]
    except OverflowError:  # K overflowed alongside; I itself is tiny
        ri = 0.0
    if ri > 1e-280:
        return math.log(ri) + x
    if nu < 0:
        raise ValueError(f"log I_{nu}({x}) outside the supported range")
    return _log_series_i(nu, x)


@_scalar_or_array
def log_bessel_k(nu, x):
    """log K_nu(x), valid where K_nu over- or underflows."""
    try:
        rk = bessel_ik(nu, x, scaled=True)[1]
    except OverflowError:
        rk = math.inf
    if math.isfinite(rk) and rk < 1e280:
        return math.log(rk) - x
    return _log_k_upward(abs(nu), x)


def bessel_asym_leading(kind: str, nu: float, x: float) -> float:
    """One-term large-argument asymptotics.

    ``first``: e^x / sqrt(2 pi x);  ``second``: sqrt(pi / (2x)) e^-x.
    Only allowed for ``x >= 10 max(1, nu^2)``.
    """
    if x < 10.0 * max(1.0, nu * nu):
        raise RegimeError(f"x={x} is outside the asymptotic regime for nu={nu}")
    if kind in ("first", "i"):
        return math.exp(x) / math.sqrt(2.0 * math.pi * x)
    if kind in ("second", "k"):
        return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x)
    raise ValueError(f"unknown kind {kind!r}")


@dataclass(frozen=True)
class BesselEval:
    order: float
    argument: float
    value_i: float
    value_k: float
    log_i: float
    log_k: float

    @classmethod
    def at(cls, nu: float, x: float) -> "BesselEval":
        ri, rk, _, _ = bessel_ik(nu, x, scaled=True)
        log_i = math.log(ri) + x
        log_k = math.log(rk) - x
        value_i = math.exp(log_i) if log_i < _LOG_MAX else math.inf
        return cls(nu, x, value_i, math.exp(log_k), log_i, log_k)
