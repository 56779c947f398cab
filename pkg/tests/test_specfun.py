import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest
import scipy.special as sp

from reference import dedekind_direct
from radsum.specfun import (
    LogForm,
    PrecisionPolicy,
    bessel_I,
    bessel_I_scaled,
    bessel_J,
    bessel_J_rotated,
    bessel_K,
    dedekind_sum,
    gamma_fn,
    incomplete_gamma_reg,
    upper_gamma_scaled,
)


def half_integer_I(x):
    return math.sqrt(2 / (math.pi * x)) * (math.cosh(x) - math.sinh(x) / x)


def test_bessel_I_examples():
    assert bessel_I(1.5, 1.0) == pytest.approx(half_integer_I(1.0), rel=1e-14)
    assert bessel_I(1.0, 1e-12) == pytest.approx(0.5e-12, rel=1e-10)
    series = bessel_I_scaled(1.0, 30.0, branch="series")
    asym = bessel_I_scaled(1.0, 30.0, branch="asymptotic")
    assert series == pytest.approx(asym, rel=1e-8)


def test_bessel_I_overflow_returns_logform():
    val = bessel_I(2.0, 800.0)
    assert isinstance(val, LogForm)
    assert val.mantissa == pytest.approx(sp.ive(2.0, 800.0), rel=1e-12)


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.0, 11.0, 12.5])
@pytest.mark.parametrize("x", [0.01, 0.7, 5.0, 24.0, 60.0, 300.0])
def test_bessel_I_against_scipy(nu, x):
    assert bessel_I_scaled(nu, x) == pytest.approx(sp.ive(nu, x), rel=1e-12)


def test_bessel_J_rotated_examples():
    assert bessel_J_rotated(1.0, 1.0) == pytest.approx(1j * sp.iv(1, 1.0), rel=1e-14)
    assert bessel_J_rotated(1.5, 1.0) == pytest.approx(cmath.exp(0.75j * math.pi) * half_integer_I(1.0), rel=1e-14)
    x = 50.0
    assert abs(bessel_J_rotated(0.5, x)) * math.sqrt(2 * math.pi * x) * math.exp(-x) == pytest.approx(1, rel=0.01)


@pytest.mark.parametrize("nu", [3.0, 11.0, 1.5])
@pytest.mark.parametrize("x", [0.3, 7.9, 8.1, 40.0, 120.0])
def test_bessel_J_real_against_scipy(nu, x):
    assert bessel_J(nu, x) == pytest.approx(sp.jv(nu, x), rel=1e-9, abs=1e-14)


def test_bessel_K_examples():
    assert bessel_K(0.5, 1.0) == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1), rel=1e-13)
    assert bessel_K(0.5, 10.0) == pytest.approx(math.sqrt(math.pi / 20) * math.exp(-10), rel=1e-13)
    assert bessel_K(-0.3, 2.0) == pytest.approx(bessel_K(0.3, 2.0), rel=1e-12)


@pytest.mark.parametrize("nu,x", [(0.8, 6.2832), (0.3, 0.1), (2.7, 15.0)])
def test_bessel_K_against_scipy(nu, x):
    assert bessel_K(nu, x) == pytest.approx(sp.kv(nu, x), rel=1e-12)


def test_incomplete_gamma_examples():
    for z in (0.3 + 0.1j, 2 - 1j, -1.5j):
        assert incomplete_gamma_reg(0, z) == pytest.approx(1 - cmath.exp(-z), rel=1e-13)
    assert incomplete_gamma_reg(-2, 0) == 0
    z = 1 + 1j
    series = incomplete_gamma_reg(-1, z, method="series")
    quad = incomplete_gamma_reg(-1, z, method="quad")
    assert abs(series - quad) < 1e-10


def test_incomplete_gamma_large_real_argument():
    with pytest.warns(RuntimeWarning):
        assert incomplete_gamma_reg(Fraction(-3, 2), 200.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("a", [0.5, 3.0, 11.0])
@pytest.mark.parametrize("x", [0.2, 4.0, 40.0, 300.0])
def test_upper_gamma_scaled(a, x):
    expected = sp.gammaincc(a, x) * sp.gamma(a) * math.exp(x)
    assert upper_gamma_scaled(a, x) == pytest.approx(expected, rel=1e-11)


def test_gamma_examples():
    assert gamma_fn(1) == pytest.approx(1, rel=1e-14)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_fn(11) == pytest.approx(3628800, rel=1e-13)
    assert gamma_fn(2.5) == pytest.approx(0.75 * math.sqrt(math.pi), rel=1e-14)
    with pytest.raises((ValueError, ZeroDivisionError)):
        gamma_fn(-2)


@pytest.mark.parametrize("x", np.linspace(0.5, 50, 23))
def test_gamma_accuracy(x):
    assert gamma_fn(x).real == pytest.approx(sp.gamma(x), rel=1e-13)


def test_dedekind_examples():
    assert dedekind_sum(1, 3) == Fraction(1, 18)
    assert dedekind_sum(0, 1) == 0
    rng = random.Random(7)
    for _ in range(20):
        c = rng.randint(2, 400)
        d = rng.randint(1, 400)
        while math.gcd(c, d) != 1:
            d += 1
        lhs = dedekind_sum(d, c) + dedekind_sum(c, d)
        assert lhs == Fraction(-1, 4) + (Fraction(c, d) + Fraction(d, c) + Fraction(1, c * d)) / 12
        assert dedekind_sum(d, c) == dedekind_direct(d, c)


def test_policy_validation():
    with pytest.raises(ValueError):
        PrecisionPolicy(tol=0)
    with pytest.raises(ValueError):
        PrecisionPolicy(switch_min=0.5)
    assert PrecisionPolicy().switch_point(11) == 60.5
