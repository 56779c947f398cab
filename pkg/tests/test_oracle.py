import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import j_job, partition_job, weight_job
from reference import eta24_coefficients, eta24_value
from radsum import oracle
from radsum.groups import S, T, GroupElement, SL2Z, automorphy_factor, enumerate_rectangle, act
from radsum.multiplier import TrivialMultiplier
from radsum.rademacher import CoefficientSeries, coefficients, delta_constant, shadow_coefficients


def test_rademacher_partial_identity_only():
    job = j_job(c_max=500)
    tau = 0.1 + 1.3j
    rep = oracle.rademacher_partial(job, tau, 1)
    delta = delta_constant(job)[0]
    assert rep.value[0] == pytest.approx(delta[0] + cmath.exp(-2j * math.pi * tau))


@pytest.mark.parametrize("make,tau", [(lambda: j_job(c_max=1000, k_max=20), 1.2j),
                                      (lambda: partition_job(k_max=21), 1.5j)])
def test_rademacher_partial_approaches_series(make, tau):
    job = make()
    series, err = coefficients(job).evaluate(tau)
    rep = oracle.rademacher_partial(job, tau, 60, ladder=[20, 40, 60])
    assert len(rep.trend) == 3
    gaps = [abs(v[0] - series[0]) for _, v in rep.trend]
    assert gaps[-1] <= err[0] + rep.error
    assert gaps[-1] < gaps[0]


def test_poincare_weight_12_is_proportional_to_delta():
    rho = TrivialMultiplier(12, 1, SL2Z)
    a = oracle.poincare_direct(SL2Z, 12, rho, 1, 0, 1j, 50)[0]
    b = oracle.poincare_direct(SL2Z, 12, rho, 1, 0, 0.5 + 1j, 50)[0]
    assert abs(a) > 0
    assert a / b == pytest.approx(eta24_value(1j) / eta24_value(0.5 + 1j), rel=1e-4)


def test_poincare_weight_4_vanishes():
    rho = TrivialMultiplier(4, 1, SL2Z)
    vals = [abs(oracle.poincare_direct(SL2Z, 4, rho, 1, 0, 1j, c)[0]) for c in (50, 100, 200)]
    assert vals[-1] < 1e-2
    assert vals[0] > vals[1] > vals[2]


def test_poincare_edge_cases():
    rho = TrivialMultiplier(12, 1, SL2Z)
    tau = 0.2 + 0.9j
    assert oracle.poincare_direct(SL2Z, 12, rho, 1, 0, tau, 0)[0] == pytest.approx(cmath.exp(2j * math.pi * tau))
    with pytest.raises(ValueError):
        oracle.poincare_direct(SL2Z, 2, TrivialMultiplier(2, 1, SL2Z), 1, 0, tau, 5)


def test_unregularized_sum_matches_scalar_loop():
    # vectorized coset kernel against a per-element loop
    w, tau, K, d_max = 6, 0.15 + 0.95j, 12, 80
    rho = TrivialMultiplier(w, 1, SL2Z)
    fast = oracle.poincare_direct(SL2Z, w, rho, 1, 0, tau, K - 1, d_max=d_max)[0]
    slow = sum(automorphy_factor(w, g, tau) ** -1 * cmath.exp(2j * math.pi * act(g, tau))
               for g in enumerate_rectangle(SL2Z, K, d_max=d_max))
    assert abs(fast - slow) < 1e-12 * max(1, abs(slow))


def _series_from(coeffs: dict, weight) -> CoefficientSeries:
    terms = [[(Fraction(k), complex(v), 0.0) for k, v in sorted(coeffs.items())]]
    return CoefficientSeries(1, Fraction(weight), terms, [None], [0.0])


def test_shadow_period_examples():
    zero = _series_from({}, 12)
    assert oracle.shadow_period(-10, 1j, zero).value[0] == 0
    single = oracle.shadow_period(-10, 1j, _series_from({1: 1.0}, 12))
    assert single.residual < 1e-8
    tau = 0.2 + 0.4j
    taus = eta24_coefficients(10)
    short = oracle.shadow_period(-10, tau, _series_from({k: taus[k] for k in range(1, 6)}, 12)).value[0]
    full = oracle.shadow_period(-10, tau, _series_from({k: taus[k] for k in range(1, 11)}, 12)).value[0]
    dropped = sum(abs(oracle.period_closed_form(-10, tau, [(k, complex(taus[k]))])) for k in range(6, 11))
    assert abs(full - short) <= dropped


def test_shadow_period_rejects_nonnegative_weight():
    with pytest.raises(ValueError):
        oracle.shadow_period(0, 1j, _series_from({1: 1.0}, 2))


@pytest.fixture(scope="module")
def weight_minus_10():
    job = weight_job(-10, c_max=1000, k_max=30)
    return job, coefficients(job), shadow_coefficients(job)


def test_automorphy_translation(weight_minus_10):
    job, f, g = weight_minus_10
    rep = oracle.verify_automorphy(f, g, job.multiplier, T, 0.3 + 1.1j)
    assert rep.completion_residual < 1e-10


def test_automorphy_inversion(weight_minus_10):
    job, f, g = weight_minus_10
    rep = oracle.verify_automorphy(f, g, job.multiplier, S, 0.3 + 1.1j)
    assert rep.completion_residual < 1e-3
    # the period taken at the cusp gamma^-1 infinity does not restore modularity
    assert rep.literal_residual > 1.0


def test_completion_constant_is_tau_independent(weight_minus_10):
    job, f, g = weight_minus_10
    lams = [oracle.completion_constant(f, g, job.multiplier, S, tau) for tau in (0.3 + 1.1j, 0.1 + 0.9j, -0.2 + 1.3j)]
    expected = oracle.completion_scale(-10)
    for lam in lams:
        assert abs(lam / expected - 1) < 1e-8


def test_automorphy_of_true_modular_form():
    taus = eta24_coefficients(60)
    f = _series_from({k: taus[k] for k in range(1, 61)}, 12)
    rho = TrivialMultiplier(12, 1, SL2Z)
    for gamma in (S, GroupElement(1, 0, 1, 1), GroupElement(2, 1, 1, 1)):
        rep = oracle.verify_automorphy(f, None, rho, gamma, 0.3 + 1.1j)
        assert rep.completion_residual < 1e-9


def test_lipschitz_examples():
    rep = oracle.lipschitz_check(0, 1, 1j)
    assert abs(rep.deviations[-1] + math.pi * 1j) < 1e-2
    assert abs(rep.exponent - 1) < 0.3
    # p = 3: the tail decays like N^-3
    fast = oracle.lipschitz_check(0, 3, 1j)
    assert abs(fast.exponent - 3) < 0.3
    assert abs(fast.deviations[-1]) == pytest.approx(3.1367e-8, rel=1e-3)


def test_lipschitz_deviation_is_small_for_large_p():
    assert abs(oracle.lipschitz_deviation(0.25, 4, 0.3 + 1j, 400)) < 1e-10


def test_eisenstein_examples():
    rho = TrivialMultiplier(0, 1, SL2Z)
    rep = oracle.eisenstein_coefficient_check(SL2Z, rho, 1.3, 1, 1.0, 200)
    assert rep.disagreement < 1e-4
    zero = oracle.eisenstein_coefficient_check(SL2Z, rho, 2.0, 0, 1.0, 300)
    assert zero.matching_variant == "classical"
    assert abs(zero.variants["classical"] - zero.lhs) < 1e-6
    assert abs(zero.variants["half_gamma"] - zero.lhs) > 1e-2
    bare = oracle.eisenstein_coefficient_check(SL2Z, rho, 1.5, 0, 0.7, 0)
    assert bare.lhs == pytest.approx(0.7 ** 1.5)


def test_eisenstein_negative_m_matches_positive():
    rho = TrivialMultiplier(0, 1, SL2Z)
    plus = oracle.eisenstein_coefficient_check(SL2Z, rho, 1.6, 2, 0.8, 60)
    minus = oracle.eisenstein_coefficient_check(SL2Z, rho, 1.6, -2, 0.8, 60)
    assert minus.disagreement < 1e-8
    assert minus.lhs == pytest.approx(plus.lhs, abs=1e-10)


def test_report_shrinking():
    rep = oracle.EvaluationReport(np.zeros(1), {}, [(1, np.array([1.0])), (2, np.array([0.5])), (4, np.array([0.4]))])
    assert rep.shrinking()
    rep.trend.append((8, np.array([1.0])))
    assert not rep.shrinking()
