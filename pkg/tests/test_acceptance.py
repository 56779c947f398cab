"""One test per acceptance criterion; each logs a PASS/FAIL line with its runtime."""

import cmath
import math
import random
import time
from collections import defaultdict
from fractions import Fraction

import pytest

from conftest import j_job, partition_job, weight_job
from reference import brute_force_elements, eta24_coefficients, j_coefficients, partition_counts
from radsum import oracle
from radsum.groups import INFINITY, S, SL2Z, GroupElement, double_coset_key, euler_phi, omega_cocycle
from radsum.kloosterman import build_table, kloosterman_sum
from radsum.multiplier import DirectSum, EtaMultiplier, TrivialMultiplier, consistency_defect, e, s3_multiplier
from radsum.rademacher import (
    PoleSpec,
    asymptotic_estimate,
    basis_spec,
    coefficients,
    dimension_bound,
    shadow_coefficients,
)

# frozen from tests/reference.py
J_100 = 83798831110707476912751950384757452703801918339072000
TAU_RATIOS = {2: -24, 3: 252, 4: -1472}
# direct regularized sum at tau = 1.2i, K = 160, minus the exact q-expansion of j - 744
ORACLE_CONSTANT = 24.0028


def test_frozen_oracle_values():
    assert j_coefficients(100)[100] == J_100
    assert eta24_coefficients(4)[2:] == [TAU_RATIOS[n] for n in (2, 3, 4)]


# --------------------------------------------------------------------------
# 1. Kloosterman ground truth

TRIVIAL = TrivialMultiplier(0, 1, SL2Z)
SYSTEMS_1 = {"trivial": TRIVIAL, "eta": EtaMultiplier(-1, Fraction(-1, 2), SL2Z), "s3": s3_multiplier(0)}


def _brute_force_kloosterman(rho, n, k, c, row, col):
    """Sum over double cosets from bounded matrices, checking every member of a class agrees."""
    classes = defaultdict(list)
    for a, b, cc, d in brute_force_elements(c, 1, 3 * c):
        g = GroupElement(a, b, cc, d)
        term = e(n * Fraction(a, c) + k * Fraction(d, c)) * rho.inverse_image(g)[row, col]
        classes[double_coset_key(INFINITY, g)].append(term)
    for members in classes.values():
        assert max(abs(t - members[0]) for t in members) < 1e-10
    return sum(members[0] for members in classes.values())


def test_criterion_1_kloosterman(criterion):
    with criterion("1 kloosterman ground truth", 10) as out:
        assert abs(kloosterman_sum(SL2Z, TRIVIAL, INFINITY, 1, 1, 2)[0, 0] - 1) < 1e-10
        assert abs(kloosterman_sum(SL2Z, TRIVIAL, INFINITY, 1, 1, 3)[0, 0] + 1) < 1e-10
        for c in range(1, 51):
            assert abs(kloosterman_sum(SL2Z, TRIVIAL, INFINITY, 0, 0, c)[0, 0] - euler_phi(c)) < 1e-10
        compared = 0
        for rho in SYSTEMS_1.values():
            mu = rho.mu()
            for col in range(rho.dim):
                for row in range(rho.dim):
                    n, k = -1 + mu[col], 2 + mu[row]
                    for c in range(1, 11):
                        engine = kloosterman_sum(SL2Z, rho, INFINITY, n, k, c)[row, col]
                        assert abs(engine - _brute_force_kloosterman(rho, n, k, c, row, col)) < 1e-10
                        compared += 1
        worst = 0.0
        for n in range(-5, 6):
            for c in range(1, 101):
                sums = build_table(SL2Z, TRIVIAL, INFINITY, n, 0, c, 6).entries[c - 1, 0]
                for m in range(6):
                    g = math.gcd(math.gcd(m, n), c)
                    divisors = sum(1 for x in range(1, c + 1) if c % x == 0)
                    worst = max(worst, abs(sums[m]) / (divisors * math.sqrt(g * c)))
        # S(-m, -n) = S(m, n) covers the m < 0 half of the grid
        assert worst <= 1 + 1e-9
        out["detail"] = f"{compared} brute-force comparisons, max |S|/Weil = {worst:.3f}"


# --------------------------------------------------------------------------
# 2 and 5. j-function job

@pytest.fixture(scope="module")
def job2():
    job = j_job(c_max=10_000, k_max=10)
    start = time.perf_counter()
    table = build_table(job.group, job.multiplier, INFINITY, job.n, 0, 10_000, 102)
    return job, table, time.perf_counter() - start


def test_criterion_2_j_function(criterion, job2):
    job, table, build_seconds = job2
    with criterion("2 j-function", 120, offset=build_seconds) as out:
        series = coefficients(job, table=table)
        c1 = series.coefficient(0, 1)
        assert abs(c1.real / 196884 - 1) < 0.01
        rep = oracle.rademacher_partial(j_job(c_max=1000, k_max=30), 1.2j, 160)
        q = cmath.exp(-2.4 * math.pi)
        exact = j_coefficients(40)
        oracle_constant = (rep.value[0] - 1 / q - sum(exact[k] * q ** k for k in range(1, 41))).real
        assert oracle_constant == pytest.approx(ORACLE_CONSTANT, abs=1e-3)
        constant = series.constant[0].real
        assert abs(constant / oracle_constant - 1) < 0.05
        out["detail"] = f"c(1) = {c1.real:.2f} +- {series.error(0, 1):.2f}, 2Delta = {constant:.4f} vs {oracle_constant:.4f}"


def test_criterion_5_asymptotics(criterion, job2):
    job, table, _ = job2
    with criterion("5 asymptotics", 120) as out:
        ratio = asymptotic_estimate(job, 100, table=table) / J_100
        assert abs(ratio - 1) < 0.1
        out["detail"] = f"estimate/exact at k = 100: {ratio.real:.6f}{ratio.imag:+.1e}i"


# --------------------------------------------------------------------------
# 3. partitions

def test_criterion_3_partitions(criterion):
    with criterion("3 partitions", 30) as out:
        series = coefficients(partition_job(c_max=100, k_max=20))
        exact = partition_counts(20)
        assert series.pole[0][2] == pytest.approx(exact[0])
        got = [round(series.coefficient(0, Fraction(n) - Fraction(1, 24)).real) for n in range(1, 21)]
        assert got == exact[1:]
        out["detail"] = f"p(1..20) exact, p(20) = {got[-1]}"


# --------------------------------------------------------------------------
# 4. shadows

def test_criterion_4_shadow(criterion):
    with criterion("4 shadow", 60) as out:
        shadow = shadow_coefficients(weight_job(-10, c_max=1000, k_max=4))
        a1 = shadow.coefficient(0, 1)
        worst = max(abs(shadow.coefficient(0, n) / a1 - TAU_RATIOS[n]) for n in TAU_RATIOS)
        assert worst < 1e-6
        flat = shadow_coefficients(weight_job(-2, c_max=1000, k_max=10))
        largest = max(abs(v) for _, v, _ in flat.terms[0])
        assert largest < 1e-3
        out["detail"] = f"max |a_n/a_1 - tau(n)| = {worst:.1e}, weight-4 max |a_n| = {largest:.1e}"


# --------------------------------------------------------------------------
# 6. automorphy

def test_criterion_6_automorphy(criterion):
    with criterion("6 automorphy", 300) as out:
        tau = 0.3 + 1.1j
        residuals = []
        for k_max, c_max in ((4, 30), (8, 100), (30, 1000)):
            job = weight_job(-10, c_max=c_max, k_max=k_max)
            f, g = coefficients(job), shadow_coefficients(job)
            residuals.append(oracle.verify_automorphy(f, g, job.multiplier, S, tau).completion_residual)
        period = oracle.shadow_period(-10, tau, g)
        assert residuals[-1] < 1e-3
        assert residuals[0] > residuals[1] > residuals[2]
        assert period.residual < 1e-6
        out["detail"] = "residuals " + ", ".join(f"{r:.1e}" for r in residuals) + f"; period two-method {period.residual:.1e}"


# --------------------------------------------------------------------------
# 7. Eisenstein cross-check

def test_criterion_7_eisenstein(criterion):
    with criterion("7 eisenstein", 300) as out:
        rep = oracle.eisenstein_coefficient_check(SL2Z, TRIVIAL, 1.3, 1, 1.0, 1000)
        assert rep.disagreement < 1e-4
        zero = oracle.eisenstein_coefficient_check(SL2Z, TRIVIAL, 2.0, 0, 1.0, 1000)
        assert zero.matching_variant is not None
        gap = abs(zero.variants[zero.matching_variant] - zero.lhs)
        assert gap < 1e-6
        out["detail"] = f"m = 1 disagreement {rep.disagreement:.1e}; m = 0 matches {zero.matching_variant!r} ({gap:.1e})"


# --------------------------------------------------------------------------
# 8. Lipschitz summation

LIPSCHITZ_CASES = [
    (0.0, 1),
    pytest.param(1 / 3, 1, marks=pytest.mark.xfail(strict=True, reason="symmetric tail decays like 1/N, not 1/N^2")),
    pytest.param(0.0, 2, marks=pytest.mark.xfail(strict=True, reason="tail terms 2/n^2 do not cancel: 1/N decay")),
    (1 / 3, 2),
    (0.25, 2),
]


@pytest.mark.parametrize("alpha,p", LIPSCHITZ_CASES)
def test_criterion_8_lipschitz(criterion, alpha, p):
    with criterion(f"8 lipschitz alpha={alpha:.3g} p={p}", 60) as out:
        rep = oracle.lipschitz_check(alpha, p, 1j, (100, 200, 400))
        out["detail"] = f"fitted exponent {rep.exponent:.2f} vs stated {rep.stated_order}"
        assert abs(rep.exponent - rep.stated_order) <= 0.3
        if alpha == 0 and p == 1:
            assert abs(rep.deviations[-1] + math.pi * 1j) < 1e-2


@pytest.mark.parametrize("alpha", [0.0, 0.25])
def test_criterion_8_lipschitz_fast_decay(criterion, alpha):
    # for p >= 3 the stated O(1/N^2) is an upper bound; the observed decay is faster
    with criterion(f"8 lipschitz alpha={alpha:.3g} p=3", 60) as out:
        rep = oracle.lipschitz_check(alpha, 3, 1j, (100, 200, 400))
        out["detail"] = f"fitted exponent {rep.exponent:.2f} >= stated {rep.stated_order}"
        assert rep.exponent >= rep.stated_order - 0.3


# --------------------------------------------------------------------------
# 9. dimensions and bases

BASIS_GRID = [
    ("trivial w=0", TrivialMultiplier(0, 1, SL2Z), 0, 1),
    ("trivial w=0", TrivialMultiplier(0, 1, SL2Z), 0, 3),
    ("trivial w=-2", TrivialMultiplier(-2, 1, SL2Z), -2, 2),
    ("trivial w=-10", TrivialMultiplier(-10, 1, SL2Z), -10, 4),
    ("eta r=-1", EtaMultiplier(-1, Fraction(-1, 2), SL2Z), Fraction(-1, 2), 4),
    ("eta r=1", EtaMultiplier(1, Fraction(-3, 2), SL2Z), Fraction(-3, 2), 2),
    ("eta r=4", EtaMultiplier(4, 0, SL2Z), 0, 3),
    ("s3 w=0", s3_multiplier(0), 0, 1),
    ("s3 w=-2", s3_multiplier(-2), -2, 3),
    ("trivial+s3", DirectSum([TrivialMultiplier(0, 1, SL2Z), s3_multiplier(0)]), 0, 4),
]


def test_criterion_9_dimensions(criterion):
    with criterion("9 dimension/basis", 60) as out:
        assert dimension_bound(SL2Z, TRIVIAL, 0, 1) == 2
        for _, rho, w, m in BASIS_GRID:
            poles = [p for p in basis_spec(SL2Z, rho, w, m) if isinstance(p, PoleSpec)]
            assert len(poles) == m * rho.dim
            assert len(set(poles)) == len(poles)
        out["detail"] = f"dim J_0(1) = 2; {len(BASIS_GRID)} basis counts equal m*d"


# --------------------------------------------------------------------------
# 10. property suites

def _random_element(rng, bound=40):
    while True:
        c, d = rng.randint(-bound, bound), rng.randint(-bound, bound)
        if c and math.gcd(c, d) == 1:
            a = pow(d, -1, abs(c)) if abs(c) > 1 else 0
            a += rng.randint(-3, 3) * c
            return GroupElement(a, (a * d - 1) // c, c, d)


def test_criterion_10_property_suites(criterion):
    with criterion("10 property suites", 600) as out:
        rng = random.Random(20261017)
        for _ in range(200):
            alpha, beta, gamma = (_random_element(rng) for _ in range(3))
            w = rng.choice([Fraction(1, 2), Fraction(-1, 2), Fraction(1, 3), Fraction(-10)])
            lhs = omega_cocycle(w, alpha, gamma * beta) * omega_cocycle(w, beta, gamma)
            rhs = omega_cocycle(w, beta * alpha, gamma) * omega_cocycle(w, alpha, beta)
            assert abs(lhs - rhs) < 1e-12
        for rho in SYSTEMS_1.values():
            for _ in range(60):
                assert consistency_defect(rho, _random_element(rng), _random_element(rng)) < 1e-9
        gaps = []
        for make in (lambda: j_job(c_max=1000, k_max=30), lambda: partition_job(c_max=100, k_max=30),
                     lambda: weight_job(-10, c_max=1000, k_max=30)):
            job = make()
            series = coefficients(job)
            for tau in (0.8j, 0.3 + 1.1j):
                val, err = series.evaluate(tau)
                rep = oracle.rademacher_partial(job, tau, 60)
                gap = abs(val[0] - rep.value[0])
                assert gap <= err[0] + rep.error
                gaps.append(gap / (err[0] + rep.error))
            small = coefficients(job, c_max=job.c_max // 2)
            for exponent, value, _ in small.terms[0][:10]:
                assert abs(series.coefficient(0, exponent) - value) <= small.error(0, exponent)
        out["detail"] = f"cocycle, consistency, worst series/oracle gap at {max(gaps):.2f} of budget, tails honest"
