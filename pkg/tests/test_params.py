import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blowup_lab.params import ParameterError, ProblemParams, load_params, params_from_mapping


def test_defaults_are_the_standard_config():
    p = ProblemParams()
    assert (p.n, p.p, p.alpha, p.beta, p.mu1, p.mu2, p.R) == (1, 2.0, 0.0, 2.0, 1.0, 1.0, 1.0)


def test_all_violations_reported_together():
    with pytest.raises(ParameterError) as info:
        ProblemParams(n=0, p=1.0, alpha=1.0, beta=1.0, mu1=-1, mu2=0, eps=0, R=0.5)
    assert len(info.value.violations) == 8


@pytest.mark.parametrize("mu1,t,expected", [(0.0, 3.0, 0.0), (2.0, 0.0, 2.0), (2.0, 1.0, 0.5)])
def test_damping_coeff(mu1, t, expected):
    c = ProblemParams(mu1=mu1, beta=2).coefficients
    assert c.damping_coeff(t) == pytest.approx(expected, rel=1e-15, abs=0)


@pytest.mark.parametrize("mu2,alpha,t,expected", [(1, -1, 7, 1), (2, 0, 1, 1), (1, 0.5, 0, 1)])
def test_mass_coeff(mu2, alpha, t, expected):
    c = ProblemParams(mu2=mu2, alpha=alpha).coefficients
    assert c.mass_coeff(t) == pytest.approx(expected, rel=1e-15)


def test_multiplier_values():
    assert ProblemParams(mu1=0).coefficients.multiplier(3.7) == 1.0
    c = ProblemParams(mu1=2, beta=2).coefficients
    assert c.multiplier(0.0) == pytest.approx(math.exp(-2), rel=1e-15)
    assert c.multiplier(1e12) == pytest.approx(1.0, abs=1e-11)


@pytest.mark.parametrize("mu1,beta,expected", [(0, 2, 1.0), (2, 2, math.exp(-2)), (1, 3, math.exp(-0.5))])
def test_multiplier_floor(mu1, beta, expected):
    assert ProblemParams(mu1=mu1, beta=beta).coefficients.multiplier_floor() == pytest.approx(expected, rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(mu1=st.floats(0, 5), beta=st.floats(1.01, 6), mu2=st.floats(0.01, 10))
def test_multiplier_monotone_and_bounded(mu1, beta, mu2):
    c = ProblemParams(mu1=mu1, beta=beta, mu2=mu2).coefficients
    t = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 400)])
    m = c.multiplier(t)
    assert np.all(np.diff(m) >= 0)
    assert np.all(m >= c.multiplier_floor() * (1 - 1e-15))
    assert np.all(m <= 1.0)
    # the two ways of writing the lifespan growth rate coincide
    assert math.sqrt(mu2 * math.exp(mu1 / (1 - beta))) == pytest.approx(
        math.sqrt(mu2 * c.multiplier_floor()), rel=1e-15)


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("# comment\nn = 2\np = 11/3  # fraction\nalpha=0.25\nmu1 = 0\n")
    p = load_params(cfg, {"mu1": "1.5", "eps": None})
    assert p.n == 2 and p.p == pytest.approx(11 / 3) and p.alpha == 0.25 and p.mu1 == 1.5


def test_non_integer_dimension_rejected():
    with pytest.raises(ParameterError):
        params_from_mapping({"n": "1.5"})


def test_with_eps_keeps_the_rest():
    p = ProblemParams(n=3, p=1.7).with_eps(0.01)
    assert p.eps == 0.01 and p.n == 3 and p.p == 1.7
