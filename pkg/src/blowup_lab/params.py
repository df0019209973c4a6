"""Problem parameters and time-dependent coefficients.

The Cauchy problem is

    u_tt - Δu + mu1 (1+t)^(-beta) u_t - mu2 (1+t)^(-(alpha+1)) u = |u|^p,
    u(x, 0) = eps f(x),  u_t(x, 0) = eps g(x),

with data supported in |x| <= R.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

import numpy as np

PARAM_KEYS = ("n", "p", "alpha", "beta", "mu1", "mu2", "eps", "R")


class ParameterError(ValueError):
    """Raised with the full list of violated constraints."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid parameters: " + "; ".join(self.violations))


@dataclass(frozen=True)
class ProblemParams:
    n: int = 1
    p: float = 2.0
    alpha: float = 0.0
    beta: float = 2.0
    mu1: float = 1.0
    mu2: float = 1.0
    eps: float = 0.1
    R: float = 1.0

    def __post_init__(self):
        bad = []
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            bad.append(f"n must be a positive integer (got {self.n!r})")
        checks = [
            (self.p > 1, f"p > 1 required (got {self.p})"),
            (self.alpha < 1, f"alpha < 1 required (got {self.alpha})"),
            (self.beta > 1, f"beta > 1 required (got {self.beta})"),
            (self.mu1 >= 0, f"mu1 >= 0 required (got {self.mu1})"),
            (self.mu2 > 0, f"mu2 > 0 required (got {self.mu2})"),
            (self.eps > 0, f"eps > 0 required (got {self.eps})"),
            (self.R >= 1, f"R >= 1 required (got {self.R})"),
        ]
        for ok, msg in checks:
            # NaN fails every comparison, so it lands here too
            if not ok:
                bad.append(msg)
        if bad:
            raise ParameterError(bad)

    def with_eps(self, eps: float) -> "ProblemParams":
        return replace(self, eps=eps)

    @property
    def coefficients(self) -> "CoefficientSet":
        return CoefficientSet(self)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in PARAM_KEYS}


@dataclass(frozen=True)
class CoefficientSet:
    """Damping, mass and multiplier functions of one parameter tuple.

    All methods accept scalars or numpy arrays of times t >= 0.
    """

    params: ProblemParams

    def damping_coeff(self, t):
        """b(t) = mu1 (1+t)^(-beta)."""
        return self.params.mu1 * np.power(1.0 + np.asarray(t, dtype=float), -self.params.beta)

    def mass_coeff(self, t):
        """mu2 (1+t)^(-(alpha+1)), the coefficient of the destabilising mass term."""
        return self.params.mu2 * np.power(1.0 + np.asarray(t, dtype=float), -(self.params.alpha + 1.0))

    def multiplier(self, t):
        """m(t) = exp(mu1 (1+t)^(1-beta) / (1-beta)).

        Chosen so that m (F'' + b F') = (m F')'. Increases from m(0) to 1.
        """
        pr = self.params
        s = 1.0 + np.asarray(t, dtype=float)
        return np.exp(pr.mu1 * np.power(s, 1.0 - pr.beta) / (1.0 - pr.beta))

    def log_multiplier(self, t):
        pr = self.params
        return pr.mu1 * np.power(1.0 + np.asarray(t, dtype=float), 1.0 - pr.beta) / (1.0 - pr.beta)

    def multiplier_floor(self) -> float:
        pr = self.params
        return math.exp(pr.mu1 / (1.0 - pr.beta))


def read_config(path) -> dict[str, str]:
    """Read a plain ``key = value`` file. ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def params_from_mapping(mapping: Mapping[str, object], overrides: Mapping[str, object] | None = None,
                        defaults: ProblemParams | None = None) -> ProblemParams:
    """Build parameters from a config mapping; ``overrides`` (e.g. CLI flags) win.

    Keys not given fall back to ``defaults`` (the standard configuration).
    """
    merged = dict(mapping)
    for k, v in (overrides or {}).items():
        if v is not None:
            merged[k] = v
    base = (defaults or ProblemParams()).as_dict()
    kwargs = {}
    for key in PARAM_KEYS:
        raw = merged.get(key, base[key])
        if key == "n":
            val = float(raw)
            if not val.is_integer():
                raise ParameterError([f"n must be a positive integer (got {raw!r})"])
            kwargs[key] = int(val)
        else:
            kwargs[key] = _parse_real(raw)
    return ProblemParams(**kwargs)


def _parse_real(raw) -> float:
    if isinstance(raw, str) and "/" in raw:
        num, den = raw.split("/", 1)
        return float(num) / float(den)
    return float(raw)


def load_params(path=None, overrides: Mapping[str, object] | None = None) -> ProblemParams:
    mapping = read_config(path) if path is not None else {}
    return params_from_mapping(mapping, overrides)
