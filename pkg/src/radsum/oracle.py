"""Independent checks for the coefficient engine.

Direct regularized partial sums over the (K, K^2) rectangle, absolutely
convergent Poincare sums, shadow period integrals (quadrature and closed form),
automorphy residuals, Lipschitz summation and the Eisenstein coefficient test.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .groups import (
    INFINITY,
    CuspData,
    GroupElement,
    GroupSpec,
    act,
    automorphy_factor,
    enumerate_rectangle,
    omega_cocycle,
    rectangle_arrays,
)
from .kloosterman import build_table, coset_bound, kloosterman_sum, unit_residues, zeta_partial
from .multiplier import MultiplierSystem, TrivialMultiplier, cusp_exponents
from .rademacher import CoefficientSeries, RademacherJob, delta_constant
from .specfun import (
    bessel_K,
    fsum_complex,
    gamma_fn,
    incomplete_gamma_reg,
    incomplete_gamma_reg_array,
    upper_gamma_scaled,
)


class IntegrationError(RuntimeError):
    pass


@dataclass
class EvaluationReport:
    value: np.ndarray
    params: dict
    trend: list = field(default_factory=list)
    residual: float | None = None
    error: float = 0.0
    status: str = "ok"

    def shrinking(self) -> bool:
        """True when successive changes along the trend strictly decrease."""
        vals = [np.asarray(v) for _, v in self.trend]
        diffs = [float(np.max(np.abs(vals[i + 1] - vals[i]))) for i in range(len(vals) - 1)]
        return all(diffs[i + 1] < diffs[i] for i in range(len(diffs) - 1))


def _ladder(K: int) -> list[int]:
    # factor-4 steps: the weight-0 sums converge like 1/K with oscillating sign
    return sorted({max(1, K // 16), max(1, K // 4), K})


# --------------------------------------------------------------------------
# direct coset sums

def _coset_terms(rho: MultiplierSystem, w: float, n: float, column: int, tau: complex,
                 a: np.ndarray, c: np.ndarray, d: np.ndarray, regularize: bool) -> np.ndarray:
    """sum over non-identity cosets at infinity of j_w^-1 rho^-1 r e(n gamma tau) e_i; returns a d-vector."""
    if len(c) == 0:
        return np.zeros(rho.dim, dtype=complex)
    cf = c.astype(float)
    jac = cf * tau + d
    gtau = a / cf - 1.0 / (cf * jac)
    scal = np.exp(-w * np.log(jac)) * np.exp(2j * math.pi * n * gtau)
    if regularize:
        z = 2j * math.pi * n * (-1.0 / (cf * jac))
        big = np.abs(z) > 50
        reg = np.empty(z.shape, dtype=complex)
        if (~big).any():
            reg[~big] = incomplete_gamma_reg_array(w, z[~big])
        for idx in np.nonzero(big)[0]:
            reg[idx] = incomplete_gamma_reg(w, z[idx], method="quad")
        scal = scal * reg
    if isinstance(rho, TrivialMultiplier):
        out = np.zeros(rho.dim, dtype=complex)
        out[column] = fsum_complex(scal)
        return out
    # rho(gamma0 T^t) = rho(gamma0) rho(T)^t with gamma0 the representative of d mod c
    mu = np.array([float(m) for m in rho.mu()])
    d0 = np.mod(d, c)
    t = (d - d0) // c
    vecs = np.empty((len(c), rho.dim), dtype=complex)
    cache: dict[tuple[int, int], np.ndarray] = {}
    for idx, (ci, di) in enumerate(zip(c.tolist(), d0.tolist())):
        key = (ci, di)
        col = cache.get(key)
        if col is None:
            col = rho.inverse_image(GroupElement.from_bottom_row(ci, di))[:, column]
            cache[key] = col
        vecs[idx] = col
    vecs *= np.exp(-2j * math.pi * np.outer(t, mu))
    return np.array([fsum_complex(scal * vecs[:, j]) for j in range(rho.dim)])


def _cusp_coset_terms(rho, w, n, column, tau, cusp: CuspData, group, K, regularize, d_max=None):
    exps = cusp_exponents(rho, cusp)
    sigma = cusp.alpha_inv
    right = exps.rho_alpha.conj().T[:, column]
    parts = []
    for g in enumerate_rectangle(group, K, cusp, d_max):
        jac = g.c * tau + g.d
        gtau = act(g, tau)
        term = automorphy_factor(w, g, tau) ** -1 * cmath.exp(2j * math.pi * n * gtau)
        if regularize:
            term *= incomplete_gamma_reg(w, 2j * math.pi * n * (-1.0 / (g.c * jac)))
        phi = 1.0 / omega_cocycle(w, sigma * g, sigma.inverse())
        parts.append(term * phi * (rho.inverse_image(sigma * g) @ right))
    if not parts:
        return np.zeros(rho.dim, dtype=complex)
    arr = np.array(parts)
    return np.array([fsum_complex(arr[:, j]) for j in range(rho.dim)])


def direct_sum(group: GroupSpec, rho: MultiplierSystem, w, n, column: int, tau: complex, K: int,
               cusp: CuspData = INFINITY, regularize: bool = True, d_max: int | None = None) -> np.ndarray:
    """Truncated coset sum over Gamma_inf \\ Gamma_{K, K^2} (identity coset included at infinity)."""
    w, n, tau = float(w), float(n), complex(tau)
    out = np.zeros(rho.dim, dtype=complex)
    if cusp.is_infinity:
        out[column] += cmath.exp(2j * math.pi * n * tau)
        a, c, d = rectangle_arrays(group, K, cusp, d_max)
        out += _coset_terms(rho, w, n, column, tau, a, c, d, regularize)
        return out
    return out + _cusp_coset_terms(rho, w, n, column, tau, cusp, group, K, regularize, d_max)


def rademacher_partial(job: RademacherJob, tau: complex, K: int, ladder: list[int] | None = None,
                       regularize: bool = True, delta: tuple | None = None) -> EvaluationReport:
    """Delta plus the regularized sum over Gamma_inf \\ Gamma_{K,K^2}, with a trend over a K-ladder."""
    ladder = ladder or _ladder(K)
    if delta is None:
        dval, derr, _ = delta_constant(job)
    else:
        dval, derr = delta
    trend = []
    for k in ladder:
        v = dval + direct_sum(job.group, job.multiplier, job.weight, job.n, job.component, tau, k,
                              job.cusp, regularize)
        trend.append((k, v))
    diffs = [float(np.max(np.abs(trend[i + 1][1] - trend[i][1]))) for i in range(len(trend) - 1)]
    return EvaluationReport(trend[-1][1], {"K": ladder[-1], "tau": complex(tau), "regularize": regularize},
                            trend, error=float(np.max(derr)) + (diffs[-1] if diffs else 0.0))


def poincare_direct(group: GroupSpec, weight, rho: MultiplierSystem, n, column: int, tau: complex,
                    c_max: int, d_max: int | None = None) -> np.ndarray:
    """Absolutely convergent Poincare sum for weight > 2 over cosets with c <= c_max."""
    if float(weight) <= 2:
        raise ValueError("poincare_direct needs weight > 2")
    if c_max < 1:
        out = np.zeros(rho.dim, dtype=complex)
        out[column] = cmath.exp(2j * math.pi * float(n) * complex(tau))
        return out
    K = c_max + 1
    if d_max is None:
        d_max = max(50, int(10 * c_max * abs(complex(tau)) + 50))
    return direct_sum(group, rho, weight, n, column, tau, K, regularize=False, d_max=d_max)


# --------------------------------------------------------------------------
# shadow period

def _shadow_terms(series: CoefficientSeries, j: int):
    return [(float(e), complex(v)) for e, v, _ in series.terms[j] if float(e) > 0]


def period_closed_form(w, tau: complex, terms) -> complex:
    """p(w, tau; g) for one component g = sum b_k q^k, termwise via the upper incomplete gamma."""
    w = float(w)
    tau = complex(tau)
    y = tau.imag
    pre = 1j * cmath.exp(-0.5j * math.pi * w) / gamma_fn(1 - w)
    parts = []
    for k, b in terms:
        up = upper_gamma_scaled(1 - w, 4 * math.pi * k * y)
        parts.append(b.conjugate() * (2 * math.pi * k) ** (w - 1) * up * cmath.exp(-2j * math.pi * k * tau.conjugate()))
    return complex(pre * fsum_complex(parts)) if parts else 0j


def period_quadrature(w, tau: complex, terms) -> complex:
    """p(w, tau; g) by quadrature along z = -conj(tau) + i t, 0 <= t < T."""
    w = float(w)
    tau = complex(tau)
    y = tau.imag
    if not terms:
        return 0j
    kmin = min(k for k, _ in terms)
    scale = sum(abs(b) * math.exp(-2 * math.pi * k * y) for k, b in terms)
    T = 1.0
    while math.exp(-2 * math.pi * kmin * T) * (2 * y + T) ** (-w) * scale > 1e-17 * max(scale, 1e-300):
        T *= 1.5
    ks = np.array([k for k, _ in terms])
    coef = np.array([b.conjugate() * cmath.exp(-2j * math.pi * k * tau.conjugate()) for k, b in terms])
    pre = 1j * cmath.exp(-0.5j * math.pi * w) / gamma_fn(1 - w)

    def f(t):
        return (2 * y + t) ** (-w) * np.sum(coef * np.exp(-2 * math.pi * ks * t))

    pts = [min(T / 2, 1.0 / (2 * math.pi * kmin))]
    re, _ = integrate.quad(lambda t: f(t).real, 0, T, limit=400, epsabs=0, epsrel=1e-13, points=pts)
    im, _ = integrate.quad(lambda t: f(t).imag, 0, T, limit=400, epsabs=0, epsrel=1e-13, points=pts)
    return complex(pre * complex(re, im))


def shadow_period(w, tau: complex, g: CoefficientSeries, tol: float = 1e-6) -> EvaluationReport:
    """p(w, tau; g) per component; closed form returned, |quadrature - closed| as residual.

    The residual is measured relative to max(1, |value|).
    """
    w = float(w)
    if w >= 0:
        raise ValueError("shadow_period needs w < 0")
    closed = np.array([period_closed_form(w, tau, _shadow_terms(g, j)) for j in range(g.dim)])
    quad = np.array([period_quadrature(w, tau, _shadow_terms(g, j)) for j in range(g.dim)])
    scale = max(1.0, float(np.max(np.abs(closed))))
    resid = float(np.max(np.abs(closed - quad))) / scale
    rep = EvaluationReport(closed, {"w": w, "tau": complex(tau)}, [("quad", quad), ("closed", closed)], resid)
    if resid > tol:
        raise IntegrationError(f"period integral: methods disagree by {resid:.3g}")
    return rep


# --------------------------------------------------------------------------
# automorphy

@dataclass
class AutomorphyReport:
    completion_residual: float
    literal_residual: float
    scale: float
    params: dict


def verify_automorphy(f: CoefficientSeries, g: CoefficientSeries, rho: MultiplierSystem,
                      gamma: GroupElement, tau: complex, completion: complex | None = None) -> AutomorphyReport:
    """Residuals of the weight-w transformation law under gamma.

    completion: |H(gamma tau) - j_w(gamma, tau) rho(gamma) H(tau)| with
    H = f + completion * p(w, . ; g), the non-holomorphic completion.
    literal: |f(gamma tau) - (c tau + d)^w rho(gamma) (f(tau) - p(w, gamma^-1 inf; g))|.
    """
    w = float(f.weight)
    if completion is None:
        completion = completion_scale(w)
    tau = complex(tau)
    gt = act(gamma, tau)
    jw = automorphy_factor(f.weight, gamma, tau)
    mat = rho.evaluate(gamma)
    f_t, _ = f.evaluate(tau)
    f_g, _ = f.evaluate(gt)
    if g is not None and any(g.terms[j] for j in range(g.dim)):
        p_t = np.array([period_closed_form(w, tau, _shadow_terms(g, j)) for j in range(g.dim)])
        p_g = np.array([period_closed_form(w, gt, _shadow_terms(g, j)) for j in range(g.dim)])
    else:
        p_t = p_g = np.zeros(f.dim, dtype=complex)
    h_t = f_t + completion * p_t
    h_g = f_g + completion * p_g
    comp = float(np.max(np.abs(h_g - jw * mat @ h_t)))
    # literal reading: period evaluated at the cusp gamma^-1 inf = -d/c
    if gamma.c != 0 and g is not None:
        x = -gamma.d / gamma.c
        p_cusp = np.array([_period_at_real(w, x, _shadow_terms(g, j)) for j in range(g.dim)])
    else:
        p_cusp = np.zeros(f.dim, dtype=complex)
    lit = float(np.max(np.abs(f_g - jw * mat @ (f_t - completion * p_cusp))))
    return AutomorphyReport(comp, lit, float(np.max(np.abs(f_g))),
                            {"gamma": repr(gamma), "tau": tau, "completion": completion})


def completion_scale(w) -> complex:
    """Factor lambda in H = f + lambda p(w, . ; g) for the engine's shadow normalization."""
    return complex((2j * math.pi) ** (1 - float(w)))


def _period_at_real(w: float, x: float, terms) -> complex:
    # y -> 0 limit of the closed form: Gamma(1-w, 0) = Gamma(1-w)
    pre = 1j * cmath.exp(-0.5j * math.pi * w)
    parts = [b.conjugate() * (2 * math.pi * k) ** (w - 1) * cmath.exp(-2j * math.pi * k * x) for k, b in terms]
    return complex(pre * fsum_complex(parts)) if parts else 0j


def completion_constant(f: CoefficientSeries, g: CoefficientSeries, rho: MultiplierSystem,
                        gamma: GroupElement, tau: complex, j: int = 0) -> complex:
    """lambda solving H(gamma tau) = j_w rho H(tau) for H = f + lambda p, in component j."""
    w = float(f.weight)
    tau = complex(tau)
    gt = act(gamma, tau)
    jw = automorphy_factor(f.weight, gamma, tau)
    mat = rho.evaluate(gamma)
    f_t, _ = f.evaluate(tau)
    f_g, _ = f.evaluate(gt)
    p_t = np.array([period_closed_form(w, tau, _shadow_terms(g, i)) for i in range(g.dim)])
    p_g = np.array([period_closed_form(w, gt, _shadow_terms(g, i)) for i in range(g.dim)])
    num = (f_g - jw * mat @ f_t)[j]
    den = (p_g - jw * mat @ p_t)[j]
    return complex(-num / den)


# --------------------------------------------------------------------------
# Lipschitz summation

def lipschitz_deviation(alpha: float, p: int, tau: complex, N: int) -> complex:
    """sum_{|n|<N} e(-n alpha)/(tau+n)^p - (-2 pi i)^p / Gamma(p) sum_{m+alpha>0} (m+alpha)^(p-1) e((m+alpha) tau)."""
    tau = complex(tau)
    n = np.arange(-N + 1, N)
    left = fsum_complex(np.exp(-2j * math.pi * n * alpha) / (tau + n) ** p)
    m0 = 1 if alpha == 0 else 0
    right = []
    m = m0
    while True:
        x = m + alpha
        term = x ** (p - 1) * cmath.exp(2j * math.pi * x * tau)
        right.append(term)
        if abs(term) < 1e-20 * max(abs(sum(right)), 1e-300) and m > m0 + 5:
            break
        m += 1
    return left - (-2j * math.pi) ** p / math.gamma(p) * fsum_complex(right)


@dataclass
class LipschitzReport:
    alpha: float
    p: int
    Ns: list[int]
    deviations: list[complex]
    limit: complex
    exponent: float
    stated_order: int


def lipschitz_check(alpha: float, p: int, tau: complex = 1j, Ns=(100, 200, 400)) -> LipschitzReport:
    """Deviations on an N-ladder and the fitted decay exponent of |deviation - limit|."""
    devs = [lipschitz_deviation(alpha, p, tau, N) for N in Ns]
    limit = -math.pi * 1j if (alpha == 0 and p == 1) else 0j
    ys = [math.log(abs(d - limit)) for d in devs]
    xs = [math.log(N) for N in Ns]
    slope = float(np.polyfit(xs, ys, 1)[0])
    stated = 1 if (alpha == 0 and p == 1) else 2
    return LipschitzReport(alpha, p, list(Ns), devs, limit, -slope, stated)


# --------------------------------------------------------------------------
# Eisenstein coefficients

@dataclass
class EisensteinReport:
    lhs: complex
    rhs: complex
    disagreement: float
    variants: dict = field(default_factory=dict)
    matching_variant: str | None = None


def _periodized_kernel(s: float, y: float, nodes: int = 48, lmax: int = 20000):
    """Chebyshev interpolant on [0, 1] of H(u) = sum_l y^s / |u + l + i y|^(2s)."""
    t = np.cos(np.pi * (np.arange(nodes) + 0.5) / nodes)
    u = 0.5 * (t + 1.0)
    ls = np.arange(-lmax, lmax + 1, dtype=float)
    vals = np.empty(nodes)
    for idx, uu in enumerate(u):
        x = uu + ls
        body = math.fsum(y ** s / (x * x + y * y) ** s)
        # integral tails beyond +-lmax (midpoint approximation of the remaining sum)
        tail = 0.0
        for edge in (lmax + 0.5 + uu, lmax + 0.5 - uu):
            # v = 1/u maps the ray to a finite smooth integral
            tail += integrate.quad(lambda u: y ** s * u ** (2 * s - 2) / (1 + y * y * u * u) ** s,
                                   0, 1.0 / edge, epsrel=1e-12)[0]
        vals[idx] = body + tail
    coef = np.polynomial.chebyshev.chebfit(t, vals, nodes - 1)
    return lambda uu: np.polynomial.chebyshev.chebval(2.0 * np.asarray(uu) - 1.0, coef)


def eisenstein_coefficient_check(group: GroupSpec, rho: MultiplierSystem, s: float, m: int, y: float,
                                 c_max: int, column: int = 0, row: int = 0, nodes_x: int = 32) -> EisensteinReport:
    """Fourier coefficient a^m(y) of the c <= c_max truncated weight-0 Eisenstein series.

    lhs: trapezoid rule in x over one period (spectrally accurate for the
    periodic analytic integrand) of the truncated series, the d-sums being
    periodized in closed interpolated form.  rhs: the Kloosterman-zeta formula.
    """
    if any(mu != 0 for mu in rho.mu()):
        raise ValueError("eisenstein check needs mu = 0")
    s = float(s)
    if s <= 1.1 and c_max > 0:
        raise ValueError("s must exceed 1.1")
    H = _periodized_kernel(s, y) if c_max > 0 else None
    xs = np.arange(nodes_x) / nodes_x
    E = np.zeros(nodes_x, dtype=complex)
    if row == column:
        E += y ** s
    for c in range(1, c_max + 1):
        if c % group.N:
            continue
        d0 = unit_residues(c)
        if isinstance(rho, TrivialMultiplier):
            wts = np.ones(len(d0), dtype=complex) if row == column else np.zeros(len(d0), dtype=complex)
        else:
            wts = np.array([rho.inverse_image(GroupElement.from_bottom_row(c, int(dd)))[row, column] for dd in d0])
        u = np.mod(xs[:, None] + d0[None, :] / c, 1.0)
        E += c ** (-2 * s) * (H(u) @ wts)
    lhs = complex(np.mean(E * np.exp(-2j * math.pi * m * xs)))
    # closed form
    if c_max > 0 and m >= 0:
        table = build_table(group, rho, INFINITY, 0, column, c_max, m + 1)
        kl = zeta_partial(table.column_for(row, m), s, c_max, coset_bound(group, INFINITY)).value
    elif c_max > 0:
        kl = fsum_complex([kloosterman_sum(group, rho, INFINITY, 0, m, c)[row, column] / c ** (2 * s)
                           for c in range(1, c_max + 1) if c % group.N == 0])
    else:
        kl = 0j
    delta = y ** s if (m == 0 and row == column) else 0.0
    variants = {}
    if m != 0:
        kb = bessel_K(s - 0.5, 2 * math.pi * abs(m) * y)
        rhs = kl * 2 * math.pi ** s * abs(m) ** (s - 0.5) / math.gamma(s) * math.sqrt(y) * kb
        match = None
    else:
        half_gamma = delta + y ** (1 - s) * kl * math.gamma(0.5) / math.gamma(s)
        classical = delta + y ** (1 - s) * kl * math.sqrt(math.pi) * math.gamma(s - 0.5) / math.gamma(s)
        variants = {"half_gamma": complex(half_gamma), "classical": complex(classical)}
        errs = {k: abs(v - lhs) for k, v in variants.items()}
        match = min(errs, key=errs.get)
        rhs = variants[match]
    return EisensteinReport(lhs, complex(rhs), abs(lhs - rhs), variants, match if m == 0 else None)
