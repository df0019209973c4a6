import math

import numpy as np
import pytest

from blowup_lab import kato
from blowup_lab.kato import KatoHypothesisError, KatoInstance


def one(t):
    return np.ones_like(np.asarray(t, dtype=float))


def make(**kw):
    base = dict(A=one, B=one, m=lambda t: 1.0, m_lo=1.0, m_hi=1.0, delta=0.5, p=3.0,
                F0=1.0, F0p=1.0)
    base.update(kw)
    return KatoInstance(**base)


def test_h_identity_case():
    assert np.allclose(kato.h_eval(make(), [0.0, 1.0, 10.0]), 1.0)


def test_h_exponential():
    inst = make(A=lambda t: np.exp(t), log_A=lambda t: np.asarray(t, dtype=float))
    t = np.linspace(0, 5, 11)
    assert np.allclose(kato.h_eval(inst, t), np.exp(t / 2), rtol=1e-14)


def test_h_tends_to_sqrt_B():
    inst = make(A=lambda t: 1 + np.asarray(t), B=lambda t: 4.0 / (1 + np.asarray(t)),
                delta=1.0 - 1e-12)
    assert kato.h_eval(inst, 3.0) == pytest.approx(1.0, rel=1e-10)


def test_h_below_T0_rejected():
    with pytest.raises(ValueError):
        kato.h_eval(make(T0=1.0), 0.5)


@pytest.mark.parametrize("kw,expected", [
    (dict(F0=2, F0p=1), 2.0),
    (dict(F0=2, F0p=1, m_hi=1.0, m_lo=0.5), 4.0),
    (dict(F0=2, F0p=0, t_double=1.0), 1.0),
])
def test_T1_tilde(kw, expected):
    assert kato.compute_T1_tilde(make(**kw)) == expected


def test_T1_tilde_needs_doubling_time():
    with pytest.raises(KatoHypothesisError):
        kato.compute_T1_tilde(make(F0p=0))


def test_rhs_value():
    assert make().rhs() == pytest.approx(4.0, rel=1e-15)


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.1])
def test_delta_range(delta):
    with pytest.raises(KatoHypothesisError):
        make(delta=delta)


def linear_A_instance():
    # A(t) = t, B = 1: T h(T) A(T)^delta = T^2, so the condition reads T^2 >= 4
    return make(A=lambda t: np.asarray(t, dtype=float), T0=0.1, F0=1.0, F0p=10.0)


def test_certify_threshold_closed_form():
    inst = linear_A_instance()
    rep = kato.certify(inst, candidate=1.0)
    assert not rep.candidate_ok and rep.condition_ok
    assert rep.T_tilde == pytest.approx(2.0, rel=1e-12)
    assert rep.bound == 3 * rep.T_tilde


def test_certify_failing_candidate_without_search():
    rep = kato.certify(linear_A_instance(), candidate=1.9, search=False)
    assert not rep.condition_ok


def test_certify_passing_candidate_kept():
    rep = kato.certify(linear_A_instance(), candidate=2.5)
    assert rep.candidate_ok and rep.T_tilde == 2.5 and rep.bound == 7.5


def test_certify_rejects_increasing_B():
    with pytest.raises(KatoHypothesisError, match="B decreasing"):
        kato.certify(make(B=lambda t: 1 + np.asarray(t)))


def test_certify_rejects_decreasing_h():
    A, lA = kato.power_law(1.0, 1.0)
    B, lB = kato.exponential(1.0, -1.0)
    with pytest.raises(KatoHypothesisError, match="h non-decreasing"):
        kato.certify(make(A=A, log_A=lA, B=B, log_B=lB))


def test_certify_rejects_multiplier_outside_bounds():
    with pytest.raises(KatoHypothesisError, match="m_lo"):
        kato.certify(make(m=lambda t: 1.0 + t, m_hi=2.0))


def test_oracle_exact_blowup():
    res = kato.ode_blowup_oracle(lambda t: 1.0, lambda t: 1.0, 3.0, 1.0, 1 / math.sqrt(2), 10.0)
    lo, hi = res.bracket
    assert res.blow_up and lo <= math.sqrt(2) <= hi
    assert hi - lo <= 1e-3 * hi


def test_oracle_time_rescaling():
    # F(2t) solves F'' = 4 F^3 with doubled slope, so the blow-up time halves
    a = kato.ode_blowup_oracle(lambda t: 1.0, lambda t: 1.0, 3.0, 1.0, 0.3, 50.0)
    b = kato.ode_blowup_oracle(lambda t: 1.0, lambda t: 4.0, 3.0, 1.0, 0.6, 50.0)
    assert 0.5 * a.t_lo <= b.t_hi and b.t_lo <= 0.5 * a.t_hi


def test_oracle_positivity():
    m, lo, hi = kato.multiplier_family(1.0, 2.0)
    res = kato.ode_blowup_oracle(m, lambda t: 1.0, 2.0, 0.5, 0.0, 100.0, m_lo=lo, m_hi=hi)
    assert np.all(res.F[1:] > 0) and np.all(res.dF[1:] > 0)


def test_oracle_rejects_zero_data():
    with pytest.raises(ValueError):
        kato.ode_blowup_oracle(lambda t: 1.0, lambda t: 1.0, 3.0, 0.0, 0.0, 1.0)


def test_H_convex_where_h_increasing():
    A, lA = kato.power_law(0.5, 1.2)
    B, lB = kato.power_law(1.0, -0.4)
    inst = make(A=A, log_A=lA, B=B, log_B=lB, p=2.5, delta=0.3)
    t = np.linspace(0, 20, 2001)
    h = kato.h_eval(inst, t)
    assert np.all(np.diff(h) >= 0)
    H = np.concatenate([[0.0], np.cumsum(0.5 * (h[1:] + h[:-1]) * np.diff(t))])
    assert np.all(np.diff(H, 2) >= -1e-10)


def test_instance_from_config_mapping():
    cfg = {"p": "3", "delta": "0.5", "F0": "1", "F0p": "1", "A": "power 1 1", "B": "power 1 0",
           "m": "multiplier 1 2", "candidate": "3"}
    inst, cand = kato.instance_from_mapping(cfg)
    assert cand == 3.0 and inst.m_lo == pytest.approx(math.exp(-1))
    rep = kato.certify(inst, cand)
    assert rep.condition_ok


def test_soundness_small_batch():
    rng = np.random.default_rng(7)
    trials = [kato.soundness_trial(rng) for _ in range(12)]
    accepted = [t for t in trials if t.accepted]
    assert len(accepted) >= 6
    assert all(t.sound for t in accepted)
