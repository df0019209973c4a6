"""Blow-up laboratory for the damped wave equation with negative mass.

Modules: ``params`` (problem data), ``specfun`` (gamma, modified Bessel),
``comparison`` (comparison solution and envelope), ``kato`` (blow-up
certificate), ``lifespan`` (lifespan equation), ``pde`` (radial solver),
``sweep`` (eps sweeps and fits), ``cli``.
"""
from .params import CoefficientSet, ParameterError, ProblemParams, load_params

__all__ = ["CoefficientSet", "ParameterError", "ProblemParams", "load_params"]
