"""Special functions used by the coefficient formulas.

Modified Bessel functions I and K, the rotated Bessel J, a Lanczos gamma,
the normalized lower incomplete gamma function and exact Dedekind sums.
Everything works in binary64; long sums go through :func:`fsum_complex`.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy import integrate


@dataclass(frozen=True)
class PrecisionPolicy:
    """Knobs shared by the special-function kernels.

    ``mode`` is ``"double"``: binary64 with compensated accumulation.
    """

    bits: int = 53
    tol: float = 1e-17
    switch_min: float = 25.0
    mode: str = "double"

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.switch_min < 1:
            raise ValueError("switch point must be >= 1")
        if self.mode != "double":
            raise ValueError(f"unknown precision mode {self.mode!r}")

    def switch_point(self, nu: float) -> float:
        return max(self.switch_min, nu * nu / 2.0)


DEFAULT_POLICY = PrecisionPolicy()


class LogForm(NamedTuple):
    """A value ``mantissa * exp(exponent)`` that would overflow a double."""

    mantissa: complex
    exponent: float

    def log_abs(self) -> float:
        return math.log(abs(self.mantissa)) + self.exponent


OVERFLOW_X = 700.0


def fsum_complex(values) -> complex:
    """Correctly rounded sum of complex values (real and imaginary parts separately)."""
    arr = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(arr.real), math.fsum(arr.imag))


# --------------------------------------------------------------------------
# gamma

_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_fn(x) -> complex:
    """Gamma function by the Lanczos approximation, reflected for Re x < 1/2."""
    z = complex(x)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise ValueError(f"gamma has a pole at {z.real}")
    if z.real < 0.5:
        return math.pi / (cmath.sin(math.pi * z) * gamma_fn(1 - z))
    z -= 1
    acc = _LANCZOS[0]
    for i in range(1, _LANCZOS_G + 2):
        acc += _LANCZOS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2 * math.pi) * cmath.exp((z + 0.5) * cmath.log(t) - t) * acc


# --------------------------------------------------------------------------
# Bessel I / J(ix)

def _asymptotic_terms(nu: float, x: np.ndarray, tol: float) -> np.ndarray:
    """sum_k (-1)^k a_k(nu) / x^k, truncated at the smallest term."""
    mu = 4.0 * nu * nu
    total = np.ones_like(x)
    term = np.ones_like(x)
    live = np.ones(x.shape, dtype=bool)
    for k in range(1, 200):
        new = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        grow = np.abs(new) >= np.abs(term)
        live &= ~grow
        if not live.any():
            break
        total = np.where(live, total + new, total)
        term = np.where(live, new, term)
        live &= np.abs(new) > tol * np.abs(total)
        if not live.any():
            break
    return total


def _series_scaled(nu: float, x: np.ndarray, tol: float) -> np.ndarray:
    """exp(-x) I_nu(x) by the power series, all terms positive."""
    out = np.zeros_like(x)
    pos = x > 0
    if not pos.any():
        if nu == 0:
            out[:] = 1.0
        return out
    xp = x[pos]
    half = xp / 2.0
    term = np.exp(nu * np.log(half) - math.lgamma(nu + 1.0) - xp)
    total = term.copy()
    m = 0
    quarter = half * half
    while True:
        m += 1
        term = term * quarter / (m * (m + nu))
        total += term
        if m > xp.max() and np.all(term <= tol * total):
            break
        if m > 100000:
            raise RuntimeError("Bessel I series failed to converge")
    out[pos] = total
    if nu == 0:
        out[~pos] = 1.0
    return out


def bessel_I_scaled(nu: float, x, policy: PrecisionPolicy = DEFAULT_POLICY, branch: str | None = None):
    """exp(-x) I_nu(x), vectorized over ``x``.

    ``branch`` forces ``"series"`` or ``"asymptotic"``; by default the series
    is used below ``policy.switch_point(nu)`` and the asymptotic expansion above.
    """
    nu = float(nu)
    if nu < 0:
        raise ValueError("order must be non-negative")
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(arr < 0):
        raise ValueError("argument must be non-negative")
    out = np.empty_like(arr)
    if branch == "series":
        big = np.zeros(arr.shape, dtype=bool)
    elif branch == "asymptotic":
        big = np.ones(arr.shape, dtype=bool)
    else:
        big = arr > policy.switch_point(nu)
    if (~big).any():
        out[~big] = _series_scaled(nu, arr[~big], policy.tol)
    if big.any():
        xb = arr[big]
        out[big] = _asymptotic_terms(nu, xb, policy.tol) / np.sqrt(2 * np.pi * xb)
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def bessel_I(nu: float, x: float, policy: PrecisionPolicy = DEFAULT_POLICY):
    """Modified Bessel function I_nu(x) for nu >= 0, x > 0.

    Returns a float, or a :class:`LogForm` once ``x`` exceeds 700.
    """
    scaled = bessel_I_scaled(nu, float(x), policy)
    if x > OVERFLOW_X:
        return LogForm(scaled, float(x))
    return scaled * math.exp(x)


def bessel_J_rotated(nu: float, x: float, policy: PrecisionPolicy = DEFAULT_POLICY):
    """J_nu(ix) = exp(i pi nu / 2) I_nu(x) on the principal branch."""
    phase = cmath.exp(0.5j * math.pi * nu)
    val = bessel_I(nu, x, policy)
    if isinstance(val, LogForm):
        return LogForm(phase * val.mantissa, val.exponent)
    return phase * val


def _bessel_J_series(nu: float, x: float) -> float:
    half = x / 2.0
    term = math.exp(nu * math.log(half) - math.lgamma(nu + 1.0)) if x > 0 else (1.0 if nu == 0 else 0.0)
    total = [term]
    m = 0
    while True:
        m += 1
        term = -term * half * half / (m * (m + nu))
        total.append(term)
        if m > x and abs(term) < 1e-18 * max(abs(sum(total)), 1e-300):
            return math.fsum(total)


def bessel_J(nu: float, x: float) -> float:
    """J_nu(x) for real nu >= 0 and x >= 0.

    Power series for x < 8; above that Bessel's integral
    (1/pi) int_0^pi cos(nu t - x sin t) dt - (sin(nu pi)/pi) int_0^inf exp(-x sinh t - nu t) dt
    by Gauss-Legendre quadrature, which avoids the cancellation of the series.
    """
    nu, x = float(nu), float(x)
    if nu < 0 or x < 0:
        raise ValueError("bessel_J needs nu >= 0 and x >= 0")
    if x < 8.0:
        return _bessel_J_series(nu, x)
    n = int(64 + 2 * x + nu)
    nodes, weights = np.polynomial.legendre.leggauss(n)
    t = 0.5 * math.pi * (nodes + 1.0)
    first = 0.5 * math.fsum(weights * np.cos(nu * t - x * np.sin(t)))
    sn = math.sin(nu * math.pi)
    if abs(sn) < 1e-15:
        return first
    upper = math.asinh(60.0 / x) + 1.0
    nodes, weights = np.polynomial.legendre.leggauss(128)
    t = 0.5 * upper * (nodes + 1.0)
    second = 0.5 * upper * math.fsum(weights * np.exp(-x * np.sinh(t) - nu * t))
    return first - sn / math.pi * second


# --------------------------------------------------------------------------
# Bessel K

def bessel_K_scaled(nu: float, x: float, tol: float = 1e-15) -> float:
    """exp(x) K_nu(x) from the cosh integral, trapezoid rule with step halving."""
    if x <= 0:
        raise ValueError("argument must be positive")
    nu = abs(float(nu))
    upper = 1.0
    while x * (math.cosh(upper) - 1.0) - nu * upper < 50.0:
        upper *= 1.5
    n = 64
    prev = None
    while True:
        t = np.linspace(0.0, upper, n + 1)
        f = np.exp(-x * (np.cosh(t) - 1.0) + nu * t) * 0.5 * (1.0 + np.exp(-2.0 * nu * t))
        step = upper / n
        val = step * (math.fsum(f) - 0.5 * (f[0] + f[-1]))
        if prev is not None and abs(val - prev) <= tol * abs(val):
            return val
        prev = val
        n *= 2
        if n > 1 << 22:
            raise RuntimeError("Bessel K quadrature failed to converge")


def bessel_K(nu: float, x: float):
    """Modified Bessel function K_nu(x); LogForm when exp(-x) underflows."""
    scaled = bessel_K_scaled(nu, x)
    if x > OVERFLOW_X:
        return LogForm(scaled, -float(x))
    return scaled * math.exp(-x)


# --------------------------------------------------------------------------
# incomplete gamma

def _incgamma_quad(a: float, z: complex) -> complex:
    # straight segment t = z u, u in [0, 1]
    def part(fn):
        val, _ = integrate.quad(lambda u: fn(u ** (a - 1.0) * cmath.exp(-z * u)), 0.0, 1.0,
                                epsabs=1e-15, epsrel=1e-13, limit=400, points=[min(0.5, 1.0 / max(abs(z), 1.0))])
        return val
    inner = complex(part(lambda v: v.real), part(lambda v: v.imag))
    return cmath.exp(a * cmath.log(z)) * inner / gamma_fn(a)


def incomplete_gamma_reg(w, z, policy: PrecisionPolicy = DEFAULT_POLICY, method: str = "auto") -> complex:
    """gamma(1-w, z) / Gamma(1-w) for w <= 0.

    ``method`` is ``"series"``, ``"quad"`` or ``"auto"`` (series unless |z| > 50).
    """
    a = 1.0 - float(w)
    z = complex(z)
    if z == 0:
        return 0j
    if method == "auto":
        if abs(z) > 50:
            warnings.warn(f"|z| = {abs(z):.3g} > 50: incomplete gamma series converges slowly, using quadrature",
                          RuntimeWarning, stacklevel=2)
            method = "quad"
        else:
            method = "series"
    if method == "quad":
        return _incgamma_quad(a, z)
    return complex(incomplete_gamma_reg_array(w, np.array([z]), policy)[0])


def incomplete_gamma_reg_array(w, z: np.ndarray, policy: PrecisionPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Vectorized series for gamma(1-w, z)/Gamma(1-w); intended for |z| <= 50."""
    a = 1.0 - float(w)
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    nz = z != 0
    if not nz.any():
        return out
    zz = z[nz]
    if a == 1.0:
        out[nz] = -np.expm1(-zz)
        return out
    term = np.exp(a * np.log(zz) - zz - math.lgamma(a + 1.0))
    total = term.copy()
    zmax = np.abs(zz).max()
    m = 0
    while True:
        m += 1
        term = term * zz / (m + a)
        total += term
        if m > zmax and np.all(np.abs(term) <= policy.tol * np.abs(total)):
            break
        if m > 10000:
            raise RuntimeError("incomplete gamma series failed to converge")
    out[nz] = total
    return out


def upper_gamma_scaled(a: float, x: float) -> float:
    """exp(x) * Gamma(a, x) for a > 0, x >= 0 (unnormalized upper incomplete gamma).

    Continued fraction (modified Lentz) for x > a + 1, otherwise Gamma(a) minus
    the lower series.
    """
    a, x = float(a), float(x)
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x <= a + 1.0:
        lower = incomplete_gamma_reg_array(1.0 - a, np.array([x + 0j]))[0].real if x > 0 else 0.0
        return math.exp(x) * math.gamma(a) * (1.0 - lower)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return math.exp(a * math.log(x)) * h


# --------------------------------------------------------------------------
# Dedekind sums

def dedekind_sum(d: int, c: int) -> Fraction:
    """s(d, c) = sum_{r=1}^{c-1} ((r/c)) ((d r / c)), exact, via reciprocity."""
    if c <= 0:
        raise ValueError("c must be positive")
    if math.gcd(d, c) != 1:
        raise ValueError("d and c must be coprime")
    # s(a, b) with 0 <= a < b; reciprocity s(a,b) + s(b,a) = -1/4 + (a/b + b/a + 1/(ab))/12,
    # accumulated as an integer fraction num/den and reduced once
    sign = 1
    num, den = 0, 1
    a, b = d % c, c
    while a > 0:
        step_num = sign * (a * a + b * b + 1 - 3 * a * b)
        step_den = 12 * a * b
        num = num * step_den + step_num * den
        den *= step_den
        g = math.gcd(num, den)
        num, den = num // g, den // g
        sign = -sign
        a, b = b % a, a
    return Fraction(num, den)


def dedekind_sum_direct(d: int, c: int) -> Fraction:
    """Brute-force definition of s(d, c); O(c), used as an oracle."""

    def saw(x: Fraction) -> Fraction:
        if x.denominator == 1:
            return Fraction(0)
        return x - math.floor(x) - Fraction(1, 2)

    return sum((saw(Fraction(r, c)) * saw(Fraction(d * r, c)) for r in range(1, c)), Fraction(0))
