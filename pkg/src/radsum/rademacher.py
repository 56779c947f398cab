"""Fourier coefficients of vector-valued Rademacher sums and their shadows.

For a pole q^n (n < 0) in component i at a cusp, component j of the sum is

    delta_{cusp=inf} {rho_alpha^-1}_{ji} q^n + 2 Delta_j
        + sum_{k > 0} q^k sum_c S_{n,k}(c)_{ji} (-2 pi i / (c h)) (-k/n)^((w-1)/2) J_{1-w}(4 pi i sqrt(-k n) / c)

and the weight 2-w shadow Poincare series with pole q^-n is

    delta {rho_alpha^-1}_{ji} q^-n
        + sum_{k > 0} q^k sum_c S_{-n,k}(c, conj rho)_{ji} (2 pi i^(w-2) / (c h)) (-k/n)^((1-w)/2) J_{1-w}(4 pi sqrt(-k n) / c).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .groups import INFINITY, CuspData, GroupSpec
from .kloosterman import (
    KloostermanCache,
    KloostermanTable,
    build_table,
    check_grid,
    coset_bound,
    zeta_at_one,
    zeta_partial,
)
from .multiplier import MultiplierSystem, cusp_exponents, invariant_subspace_dim
from .specfun import (
    DEFAULT_POLICY,
    PrecisionPolicy,
    bessel_I_scaled,
    bessel_J,
    fsum_complex,
    gamma_fn,
)


class OutOfScopeError(ValueError):
    """Request outside the supported range (e.g. positive weight)."""


class ConvergenceError(RuntimeError):
    """A conditionally convergent evaluation failed to settle."""


# --------------------------------------------------------------------------
# data

@dataclass
class RademacherJob:
    group: GroupSpec
    weight: Fraction
    multiplier: MultiplierSystem
    n: Fraction
    component: int = 0
    cusp: CuspData = INFINITY
    c_max: int = 1000
    k_max: int = 10
    policy: PrecisionPolicy = DEFAULT_POLICY

    def __post_init__(self):
        self.weight = Fraction(self.weight)
        self.n = Fraction(self.n)
        if self.weight > 0:
            raise OutOfScopeError(f"weight {self.weight} > 0 is out of scope")
        if self.multiplier.weight != self.weight:
            raise ValueError(f"multiplier weight {self.multiplier.weight} differs from job weight {self.weight}")
        if self.n >= 0:
            raise ValueError("the pole exponent n must be negative")
        if not 0 <= self.component < self.multiplier.dim:
            raise ValueError(f"component {self.component} out of range")
        if self.multiplier.group != self.group:
            raise ValueError("multiplier and job live on different groups")
        exps = cusp_exponents(self.multiplier, self.cusp)
        width = 1 if self.cusp.is_infinity else int(self.cusp.width)
        check_grid(self.n, exps.mu[self.component], width, "pole exponent")

    @property
    def h(self) -> int:
        return 1  # width of infinity for SL2(Z) and Gamma0(N)

    @property
    def dim(self) -> int:
        return self.multiplier.dim

    def describe(self) -> dict:
        return {
            "group": self.group.label(),
            "weight": str(self.weight),
            "multiplier": self.multiplier.spec(),
            "cusp": self.cusp.label(),
            "component": self.component,
            "n": str(self.n),
            "c_max": self.c_max,
            "k_max": self.k_max,
        }


@dataclass
class CoefficientSeries:
    """Truncated vector-valued q-expansion.

    ``terms[j]`` lists (exponent, coefficient, error) with exponents in (0, k_max];
    ``constant``/``constant_err`` hold the q^0 term (absent when mu_j != 0);
    ``pole`` lists (j, exponent, coefficient).
    """

    dim: int
    weight: Fraction
    terms: list[list[tuple[Fraction, complex, float]]]
    constant: list[complex | None]
    constant_err: list[float]
    pole: list[tuple[int, Fraction, complex]] = field(default_factory=list)
    k_max: int = 0
    c_max: int = 0
    status: str = "ok"
    tail_scale: list[float] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def coefficient(self, j: int, k) -> complex:
        k = Fraction(k)
        if k == 0:
            return self.constant[j] or 0j
        for e, v, _ in self.terms[j]:
            if e == k:
                return v
        raise KeyError(k)

    def error(self, j: int, k) -> float:
        k = Fraction(k)
        if k == 0:
            return self.constant_err[j]
        for e, _, err in self.terms[j]:
            if e == k:
                return err
        raise KeyError(k)

    def evaluate(self, tau: complex) -> tuple[np.ndarray, np.ndarray]:
        """Value at tau and an error bound (coefficient errors plus omitted q-powers)."""
        tau = complex(tau)
        val = np.zeros(self.dim, dtype=complex)
        err = np.zeros(self.dim)
        for j, e, v in self.pole:
            val[j] += v * cmath.exp(2j * math.pi * float(e) * tau)
        for j in range(self.dim):
            if self.constant[j] is not None:
                val[j] += self.constant[j]
                err[j] += self.constant_err[j]
            parts = []
            for e, v, er in self.terms[j]:
                qk = cmath.exp(2j * math.pi * float(e) * tau)
                parts.append(v * qk)
                err[j] += er * abs(qk)
            val[j] += fsum_complex(parts) if parts else 0
            if self.tail_scale:
                err[j] += self._k_tail(j, tau)
        return val, err

    def _k_tail(self, j: int, tau: complex) -> float:
        # bound the omitted q^k, k > k_max, by the c = 1 growth envelope
        scale, rate, power = self.tail_scale
        y = tau.imag
        total = 0.0
        mu = float(self.terms[j][0][0] % 1) if self.terms[j] else 0.0
        k = math.floor(self.k_max) + 1 + mu
        while True:
            term = scale * k ** power * math.exp(rate * math.sqrt(k) - 2 * math.pi * k * y)
            total += term
            if term < 1e-18 * max(total, 1e-300) or k > self.k_max + 10000:
                break
            k += 1
        return total

    def rows(self):
        """Flat (component, exponent, re, im, err) rows including the constant."""
        out = []
        for j in range(self.dim):
            if self.constant[j] is not None:
                out.append((j, Fraction(0), self.constant[j], self.constant_err[j]))
            for e, v, er in self.terms[j]:
                out.append((j, e, v, er))
        return out


# --------------------------------------------------------------------------
# helpers

def k_grid(mu, k_max) -> list[Fraction]:
    """Exponents m + mu in (0, k_max]."""
    mu = Fraction(mu) if isinstance(mu, Fraction) else Fraction(mu).limit_denominator(10**6)
    out = []
    m = 0
    while m + mu <= k_max:
        if m + mu > 0:
            out.append(m + mu)
        m += 1
    return out


def _table_for(job: RademacherJob, k_max, c_max, rho=None, n=None, cache=None, table=None) -> KloostermanTable:
    rho = rho or job.multiplier
    n = job.n if n is None else n
    m_count = int(math.floor(k_max)) + 1
    if table is not None and table.c_max >= c_max and table.m_count >= m_count and table.n == n \
            and table.rho.key() == rho.key() and table.column == job.component:
        return table
    return build_table(job.group, rho, job.cusp, n, job.component, c_max, m_count, cache=cache)


def fit_envelope(series: np.ndarray, floor_exp: float = 0.5) -> tuple[float, float]:
    """(A, beta) with |S(c)| <= A c^beta over the table, beta fitted on dyadic block maxima."""
    mags = np.abs(series)
    c = np.arange(1, len(mags) + 1, dtype=float)
    blocks = []
    lo = 1
    while lo <= len(mags):
        hi = min(2 * lo, len(mags) + 1)
        mx = mags[lo - 1: hi - 1].max()
        if mx > 1e-12:
            blocks.append((math.log(hi - 1), math.log(mx)))
        lo = hi
    beta = floor_exp
    if len(blocks) >= 3:
        xs, ys = np.array(blocks).T
        beta = max(floor_exp, float(np.polyfit(xs, ys, 1)[0]))
    nz = mags > 0
    a = float(np.max(mags[nz] / c[nz] ** beta)) if nz.any() else 0.0
    return 2.0 * a, beta


def _tail_bound(amp: float, beta: float, nu: float, prefactor: float, rate: float,
                c_max: int, growth: bool) -> float:
    """Bound sum_{c > c_max} amp c^beta * prefactor/c * (rate/(2c))^nu / Gamma(nu+1) * [cosh(rate/c)]."""
    if amp == 0:
        return 0.0
    if nu <= beta:
        return math.inf
    bessel = (rate / 2) ** nu / math.gamma(nu + 1)
    if growth:
        bessel *= math.cosh(rate / c_max)
    return amp * prefactor * bessel * c_max ** (beta - nu) / (nu - beta)


# --------------------------------------------------------------------------
# Delta

def delta_constant(job: RademacherJob, c_max: int | None = None, table: KloostermanTable | None = None,
                   cache=None) -> tuple[np.ndarray, np.ndarray, str]:
    """(Delta, error, status): Delta_j = -(2 pi i)^(2-w) Kl_{n,0}(1 - w/2)_{ji} (-n)^(1-w) / (2 h Gamma(2-w))."""
    c_max = c_max or job.c_max
    w = job.weight
    mu = job.multiplier.mu()
    out = np.zeros(job.dim, dtype=complex)
    err = np.zeros(job.dim)
    status = "ok"
    if all(m != 0 for m in mu):
        return out, err, status
    table = _table_for(job, 0, c_max, cache=cache, table=table)
    s = 1 - w / 2
    pref = -cmath.exp((2 - float(w)) * cmath.log(2j * math.pi)) / (2 * job.h * gamma_fn(2 - float(w)))
    pref *= (-float(job.n)) ** (1 - float(w))
    bound = coset_bound(job.group, job.cusp)
    for j in range(job.dim):
        if mu[j] != 0:
            continue
        series = table.column_for(j, 0)[:c_max]
        if w == 0:
            val, er, st = zeta_at_one(series, c_max, warn=False)
            if st != "ok":
                status = "non-convergent"
            else:
                status = "conditional" if status == "ok" else status
        else:
            zp = zeta_partial(series, float(s), c_max, bound)
            val, er = zp.value, zp.tail
        out[j] = pref * val
        err[j] = abs(pref) * er
    return out, err, status


# --------------------------------------------------------------------------
# coefficients

def coefficients(job: RademacherJob, k_max=None, c_max: int | None = None,
                 table: KloostermanTable | None = None, cache: KloostermanCache | None = None,
                 policy: PrecisionPolicy | None = None) -> CoefficientSeries:
    k_max = job.k_max if k_max is None else k_max
    c_max = job.c_max if c_max is None else c_max
    policy = policy or job.policy
    w = float(job.weight)
    nu = 1.0 - w
    n = float(job.n)
    rho = job.multiplier
    table = _table_for(job, k_max, c_max, cache=cache, table=table)
    mu = rho.mu()
    c = np.arange(1, c_max + 1, dtype=float)
    phase = cmath.exp(0.5j * math.pi * nu)  # J_nu(i x) = e^{i pi nu / 2} I_nu(x)
    terms = []
    for j in range(job.dim):
        row = []
        for kv in k_grid(mu[j], k_max):
            m = int(kv - (kv % 1)) if isinstance(mu[j], Fraction) else int(round(float(kv) - float(mu[j])))
            k = float(kv)
            rate = 4 * math.pi * math.sqrt(-k * n)
            x = rate / c
            if x[0] > 700:
                raise OverflowError(f"coefficient at k = {kv} overflows binary64")
            bes = bessel_I_scaled(nu, x, policy) * np.exp(x)
            series = table.column_for(j, m)[:c_max]
            ratio = (-k / n) ** ((w - 1) / 2)
            vals = series * (-2j * math.pi / (c * job.h)) * ratio * phase * bes
            total = fsum_complex(vals)
            amp, beta = fit_envelope(series)
            tail = _tail_bound(amp, beta, nu, 2 * math.pi / job.h * ratio, rate, c_max, True)
            row.append((kv, total, tail + 1e-15 * float(np.sum(np.abs(vals)))))
        terms.append(row)
    delta, derr, status = delta_constant(job, c_max, table)
    constant = [2 * delta[j] if mu[j] == 0 else None for j in range(job.dim)]
    cerr = [2 * derr[j] if mu[j] == 0 else 0.0 for j in range(job.dim)]
    exps = cusp_exponents(rho, job.cusp)
    pole = []
    if job.cusp.is_infinity:
        for j in range(job.dim):
            v = np.linalg.inv(exps.rho_alpha)[j, job.component]
            if abs(v) > 0:
                pole.append((j, job.n, complex(v)))
    series = CoefficientSeries(job.dim, job.weight, terms, constant, cerr, pole, k_max, c_max, status,
                               meta=job.describe())
    series.tail_scale = _growth_envelope(job, nu, w, n, ratio_sign=-1)
    return series


def _growth_envelope(job, nu, w, n, ratio_sign) -> list[float]:
    """(scale, rate, power) with |a_k| <~ scale k^power exp(rate sqrt k), from the c = 1 term.

    ``scale`` includes the trivial coset bound and a factor 2 of slack.
    """
    rate = 4 * math.pi * math.sqrt(-n)
    if ratio_sign < 0:
        power = (2 * w - 3) / 4
        scale = 2.0 * coset_bound(job.group, job.cusp) / math.sqrt(2) / job.h * (-n) ** (-(2 * w - 1) / 4)
    else:
        power = (1 - w) / 2
        scale = 2.0 * coset_bound(job.group, job.cusp) * 2 * math.pi * (-n) ** (-(1 - w) / 2) * (2 * math.pi * math.sqrt(-n)) ** nu / math.gamma(nu + 1)
        power += nu / 2
        rate = 0.0
    return [scale, rate, power]


def shadow_coefficients(job: RademacherJob, k_max=None, c_max: int | None = None,
                        table: KloostermanTable | None = None, cache: KloostermanCache | None = None,
                        literal_index: bool = False) -> CoefficientSeries:
    """Coefficients of the weight 2-w Poincare series for the conjugate system with pole q^-n.

    The Kloosterman sums are S_{-n,k}(c, conj rho); ``literal_index`` uses
    S_{n,k} instead (kept for comparison, it does not reproduce cusp forms).
    """
    k_max = job.k_max if k_max is None else k_max
    c_max = job.c_max if c_max is None else c_max
    w = float(job.weight)
    nu = 1.0 - w
    n = float(job.n)
    rho_bar = job.multiplier.conjugate()
    if literal_index:
        # S_{n,k}(conj rho) needs n on the conjugate grid; only meaningful when it is
        pole_n = job.n
    else:
        pole_n = -job.n
    dual = _DualJob(job, rho_bar)
    table = _table_for(dual, k_max, c_max, rho=rho_bar, n=pole_n, cache=cache, table=table)
    mu = rho_bar.mu()
    c = np.arange(1, c_max + 1, dtype=float)
    const = 2 * math.pi * cmath.exp(1j * math.pi / 2 * (w - 2))  # 2 pi i^(w-2)
    terms = []
    for j in range(job.dim):
        row = []
        for kv in k_grid(mu[j], k_max):
            m = int(kv - (kv % 1))
            k = float(kv)
            rate = 4 * math.pi * math.sqrt(-k * n)
            bes = np.array([bessel_J(nu, xx) for xx in rate / c])
            series = table.column_for(j, m)[:c_max]
            ratio = (-k / n) ** ((1 - w) / 2)
            vals = series * const / (c * job.h) * ratio * bes
            total = fsum_complex(vals)
            amp, beta = fit_envelope(series)
            tail = _tail_bound(amp, beta, nu, 2 * math.pi / job.h * ratio, rate, c_max, False)
            row.append((kv, total, tail + 1e-15 * float(np.sum(np.abs(vals)))))
        terms.append(row)
    exps = cusp_exponents(rho_bar, job.cusp)
    pole = []
    if job.cusp.is_infinity:
        for j in range(job.dim):
            v = np.linalg.inv(exps.rho_alpha)[j, job.component]
            if abs(v) > 0:
                pole.append((j, -job.n, complex(v)))
    # the pole q^-n sits inside the positive grid; fold it into the coefficient list
    for j, e, v in pole:
        terms[j] = [(kk, val + (v if kk == e else 0), er) for kk, val, er in terms[j]]
    out = CoefficientSeries(job.dim, 2 - job.weight, terms, [None] * job.dim, [0.0] * job.dim, [],
                            k_max, c_max, "ok", meta=dict(job.describe(), shadow=True))
    out.tail_scale = _growth_envelope(job, nu, w, n, ratio_sign=+1)
    return out


class _DualJob:
    """Job view with the conjugate multiplier (pole exponent -n)."""

    def __init__(self, job: RademacherJob, rho_bar: MultiplierSystem):
        self.group = job.group
        self.cusp = job.cusp
        self.component = job.component
        self.multiplier = rho_bar
        self.n = -job.n


# --------------------------------------------------------------------------
# asymptotics

def asymptotic_estimate(job: RademacherJob, k, table: KloostermanTable | None = None,
                        j: int | None = None, literal: bool = False) -> complex:
    """Leading-term estimate of the q^k coefficient, from the smallest c with S(c) != 0.

    Includes the phase e^{i pi (1-w)/2} carried by J_{1-w}(ix); ``literal`` drops it.
    """
    k = Fraction(k)
    j = job.component if j is None else j
    w = float(job.weight)
    n = float(job.n)
    mu = job.multiplier.mu()[j]
    check_grid(k, mu, job.h, "k")
    m = int(k - (k % 1))
    table = _table_for(job, k, job.c_max, table=table)
    c0 = table.first_nonzero(j, m)
    if c0 is None:
        raise ConvergenceError(f"no nonzero Kloosterman sum found for c <= {table.c_max}")
    s_val = table.column_for(j, m)[c0 - 1]
    kf = float(k)
    est = s_val * (-1j / (math.sqrt(2 * c0) * job.h)) * kf ** ((2 * w - 3) / 4) / (-n) ** ((2 * w - 1) / 4)
    est *= math.exp(4 * math.pi * math.sqrt(-kf * n) / c0)
    if not literal:
        est *= cmath.exp(0.5j * math.pi * (1 - w))
    return complex(est)


# --------------------------------------------------------------------------
# dimensions and bases

@dataclass(frozen=True)
class PoleSpec:
    component: int
    n: Fraction


@dataclass(frozen=True)
class ConstantsMarker:
    count: int


def dimension_bound(group: GroupSpec, rho: MultiplierSystem, w, m: int) -> int:
    w = Fraction(w)
    if m < 1:
        raise ValueError("m must be >= 1")
    if w > 0:
        raise OutOfScopeError("dimension bounds are implemented for w <= 0")
    bound = m * rho.dim
    if w == 0:
        bound += invariant_subspace_dim(rho)
    return bound


def basis_spec(group: GroupSpec, rho: MultiplierSystem, w, m: int, h: int = 1) -> list:
    """Pole data (i, (mu_i - l)/h), l = 1..m, plus a ConstantsMarker at weight 0 when t0 > 0."""
    w = Fraction(w)
    if m < 1:
        raise ValueError("m must be >= 1")
    if w > 0:
        raise OutOfScopeError("bases are implemented for w <= 0")
    out: list = []
    for i, mu in enumerate(rho.mu()):
        mu = mu if isinstance(mu, Fraction) else Fraction(mu).limit_denominator(10**6)
        for l in range(1, m + 1):
            out.append(PoleSpec(i, (mu - l) / h))
    if w == 0:
        t0 = invariant_subspace_dim(rho)
        if t0 > 0:
            out.append(ConstantsMarker(t0))
    return out
