"""Matrix-valued Kloosterman sums and Kloosterman-Selberg zeta partial sums.

For a pole at the cusp sigma(inf) (sigma = ``cusp.alpha_inv``) the sum at modulus c is

    S_{n,k}(c)_{ji} = sum_gamma e(n a/c + k d/c) {phi(gamma) rho(sigma gamma)^-1 rho_alpha^-1}_{ji}

over double cosets gamma = (a b; c d) in sigma^-1 Gamma, a mod width*c, d mod c.
At infinity sigma = 1 and phi = 1.  Elsewhere phi(gamma) = omega_w(sigma gamma, sigma^-1)^-1.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.fft

from .groups import (
    CuspData,
    GroupElement,
    GroupSpec,
    enumerate_double_cosets,
    modinv_array,
    omega_cocycle,
)
from .multiplier import CuspExponents, MultiplierSystem, TrivialMultiplier, cusp_exponents
from .specfun import fsum_complex


class IncompatibleExponentError(ValueError):
    pass


class NonConvergenceWarning(RuntimeWarning):
    pass


def frac_phase(num: np.ndarray, den: int) -> np.ndarray:
    """e(num/den) for integer arrays, reducing mod den before the trig call."""
    r = np.mod(num, den).astype(float) / den
    return np.exp(2j * np.pi * r)


def check_grid(x: Fraction, mu, width: int = 1, what: str = "exponent"):
    """Require width * x = mu mod 1."""
    x = Fraction(x)
    if isinstance(mu, Fraction):
        ok = (width * x - mu) % 1 == 0
    else:
        v = float(width * x) - float(mu)
        ok = abs(v - round(v)) < 1e-10
    if not ok:
        raise IncompatibleExponentError(f"incompatible exponent: {what} {x} is not on the grid (Z + {mu})/{width}")


def threads() -> int:
    env = os.environ.get("RADSUM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# --------------------------------------------------------------------------
# coset data

@lru_cache(maxsize=64)
def _prime_divisors(c: int) -> tuple[int, ...]:
    from .groups import _prime_factors
    return tuple(_prime_factors(c))


def unit_residues(c: int) -> np.ndarray:
    """0 <= d < c with gcd(d, c) = 1, by sieving out the prime divisors of c."""
    if c == 1:
        return np.zeros(1, dtype=np.int64)
    mask = np.ones(c, dtype=bool)
    for p in _prime_divisors(c):
        mask[::p] = False
    return np.nonzero(mask)[0].astype(np.int64)

def _cusp_factor(rho: MultiplierSystem, cusp: CuspData, gamma: GroupElement) -> complex:
    if cusp.is_infinity:
        return 1.0
    sigma = cusp.alpha_inv
    return 1.0 / omega_cocycle(rho.weight, sigma * gamma, sigma.inverse())


def coset_block(group: GroupSpec, rho: MultiplierSystem, cusp: CuspData, c: int,
                exps: CuspExponents | None = None):
    """Coset data at modulus c: integer arrays (a, d) and matrices M with M[g] = phi rho(sigma g)^-1 rho_alpha^-1.

    ``M`` is None when every matrix is the identity (trivial system at infinity).
    """
    if cusp.is_infinity:
        if c % group.N:
            z = np.zeros(0, dtype=np.int64)
            return z, z, None if isinstance(rho, TrivialMultiplier) else np.zeros((0, rho.dim, rho.dim), complex)
        d = unit_residues(c)
        a = modinv_array(d, c)
        if isinstance(rho, TrivialMultiplier):
            return a, d, None
        mats = np.empty((len(d), rho.dim, rho.dim), dtype=complex)
        for idx, (ai, di) in enumerate(zip(a.tolist(), d.tolist())):
            g = GroupElement.from_bottom_row(c, di)
            mats[idx] = rho.inverse_image(g)
        return a, d, mats
    exps = exps or cusp_exponents(rho, cusp)
    sigma = cusp.alpha_inv
    a_list, d_list, m_list = [], [], []
    for _, g in enumerate_double_cosets(group, cusp, c, c):
        a_list.append(g.a)
        d_list.append(g.d)
        mat = _cusp_factor(rho, cusp, g) * rho.inverse_image(sigma * g) @ exps.rho_alpha.conj().T
        m_list.append(mat)
    a = np.array(a_list, dtype=np.int64)
    d = np.array(d_list, dtype=np.int64)
    mats = np.array(m_list, dtype=complex).reshape(len(a_list), rho.dim, rho.dim)
    return a, d, mats


# --------------------------------------------------------------------------
# direct sum

def kloosterman_sum(group: GroupSpec, rho: MultiplierSystem, cusp: CuspData, n, k, c: int,
                    check: bool = True) -> np.ndarray:
    """S_{n,k}(c) as a d x d matrix; entry (j, i) pairs pole component i with target j.

    ``n`` must sit on the grid of the pole cusp for the column index i, ``k`` on
    the grid at infinity for the row index j; entries off either grid are set to 0.
    """
    n, k = Fraction(n), Fraction(k)
    exps = cusp_exponents(rho, cusp)
    mu = rho.mu()
    width = 1 if cusp.is_infinity else int(cusp.width)
    cols = [i for i in range(rho.dim) if _on_grid(n, exps.mu[i], width)]
    rows = [j for j in range(rho.dim) if _on_grid(k, mu[j], 1)]
    if check and (not cols or not rows):
        raise IncompatibleExponentError(
            f"incompatible exponent: n={n} (nu={exps.mu}) or k={k} (mu={mu}) has no matching component")
    out = np.zeros((rho.dim, rho.dim), dtype=complex)
    if c < 1:
        return out
    a, d, mats = coset_block(group, rho, cusp, c, exps)
    if len(a) == 0:
        return out
    den = n.denominator * k.denominator * c
    num = n.numerator * k.denominator * a + k.numerator * n.denominator * d
    ph = frac_phase(num, den)
    for j in rows:
        for i in cols:
            if mats is None:
                vals = ph if i == j else np.zeros_like(ph)
            else:
                vals = ph * mats[:, j, i]
            out[j, i] = fsum_complex(vals)
    return out


def _on_grid(x: Fraction, mu, width: int) -> bool:
    try:
        check_grid(x, mu, width)
        return True
    except IncompatibleExponentError:
        return False


def coset_count(group: GroupSpec, cusp: CuspData, c: int) -> int:
    return sum(1 for _ in enumerate_double_cosets(group, cusp, c, c))


# --------------------------------------------------------------------------
# cache

class KloostermanCache:
    """Append-only CSV store, one file per (group, multiplier, cusp, n, column, k-index).

    Records are "c,j,i,re,im" with 17 significant digits so re-reads are bit-identical.
    """

    def __init__(self, directory: str | os.PathLike | None = None):
        self.directory = Path(directory or os.environ.get("RADSUM_CACHE", "./.radsum-cache"))

    def path(self, ident: str, m: int) -> Path:
        return self.directory / ident / f"k{m}.csv"

    def read(self, ident: str, m: int) -> dict[int, dict[tuple[int, int], complex]]:
        p = self.path(ident, m)
        out: dict[int, dict[tuple[int, int], complex]] = {}
        if not p.exists():
            return out
        with p.open() as fh:
            for line in fh:
                parts = line.strip().split(",")
                if len(parts) != 5:
                    continue
                c, j, i = int(parts[0]), int(parts[1]), int(parts[2])
                out.setdefault(c, {})[(j, i)] = complex(float(parts[3]), float(parts[4]))
        return out

    def append(self, ident: str, m: int, rows):
        p = self.path(ident, m)
        p.parent.mkdir(parents=True, exist_ok=True)
        with p.open("a") as fh:
            for c, j, i, z in rows:
                fh.write(f"{c},{j},{i},{z.real:.17g},{z.imag:.17g}\n")

    def entries(self):
        if not self.directory.exists():
            return []
        return sorted(p for p in self.directory.rglob("*.csv"))

    def clear(self) -> int:
        files = self.entries()
        for p in files:
            p.unlink()
        for d in sorted(self.directory.glob("*"), reverse=True):
            if d.is_dir() and not any(d.iterdir()):
                d.rmdir()
        return len(files)


# --------------------------------------------------------------------------
# table

@dataclass
class KloostermanTable:
    """S_{n,k}(c)_{ji} for a fixed pole column i, all j and all k-indices m < m_count.

    Row j uses k = m + mu_j (width 1 at infinity for both supported families).
    ``entries[c - 1, j, m]``.
    """

    group: GroupSpec
    rho: MultiplierSystem
    cusp: CuspData
    n: Fraction
    column: int
    c_max: int
    m_count: int
    entries: np.ndarray = field(repr=False, default=None)
    counts: np.ndarray = field(repr=False, default=None)
    from_cache: bool = False

    @property
    def ident(self) -> str:
        cusp = self.cusp.label().replace("/", "_")
        n = str(self.n).replace("/", "_")
        return f"{self.group.label()}__{self.rho.key()}__{cusp}__n{n}__i{self.column}"

    def k_value(self, j: int, m: int) -> Fraction:
        mu = self.rho.mu()[j]
        return m + (mu if isinstance(mu, Fraction) else Fraction(mu).limit_denominator(10**6))

    def column_for(self, j: int, m: int) -> np.ndarray:
        """S(c) for c = 1..c_max at target (j, m)."""
        return self.entries[:, j, m]

    def first_nonzero(self, j: int, m: int, tol: float = 1e-9) -> int | None:
        col = np.abs(self.column_for(j, m))
        idx = np.nonzero(col > tol)[0]
        return int(idx[0]) + 1 if len(idx) else None


def _block_sums(group, rho, cusp, exps, n: Fraction, column: int, m_count: int, cs) -> tuple[np.ndarray, np.ndarray]:
    mu = rho.mu()
    out = np.zeros((len(cs), rho.dim, m_count), dtype=complex)
    counts = np.zeros(len(cs), dtype=np.int64)
    for row, c in enumerate(cs):
        a, d, mats = coset_block(group, rho, cusp, c, exps)
        counts[row] = len(a)
        if len(a) == 0:
            continue
        base = frac_phase(n.numerator * a, n.denominator * c)
        m_idx = np.arange(m_count) % c
        for j in range(rho.dim):
            muj = mu[j]
            if isinstance(muj, Fraction):
                shift = frac_phase(muj.numerator * d, muj.denominator * c)
            else:
                shift = np.exp(2j * np.pi * (muj * d / c))
            if mats is None:
                if j != column:
                    continue
                w = base * shift
            else:
                w = base * shift * mats[:, j, column]
            bins = np.bincount(d, weights=w.real, minlength=c) + 1j * np.bincount(d, weights=w.imag, minlength=c)
            spec = scipy.fft.ifft(bins) * c
            out[row, j] = spec[m_idx]
    return out, counts


def build_table(group: GroupSpec, rho: MultiplierSystem, cusp: CuspData, n, column: int,
                c_max: int, m_count: int, cache: KloostermanCache | None = None,
                workers: int | None = None) -> KloostermanTable:
    """Tabulate S_{n, m + mu_j}(c)_{j, column} for 1 <= c <= c_max and 0 <= m < m_count.

    The c-range is split into chunks evaluated in a thread pool; chunks are
    reassembled in c order so the result does not depend on scheduling.
    """
    n = Fraction(n)
    exps = cusp_exponents(rho, cusp)
    width = 1 if cusp.is_infinity else int(cusp.width)
    check_grid(n, exps.mu[column], width, "pole exponent")
    table = KloostermanTable(group, rho, cusp, n, column, c_max, m_count)
    entries = np.zeros((c_max, rho.dim, m_count), dtype=complex)
    counts = np.zeros(c_max, dtype=np.int64)
    start = 1
    if cache is not None:
        start = _load_cached(cache, table, entries)
        if start > c_max:
            table.entries, table.from_cache = entries, True
            table.counts = np.array([coset_count(group, cusp, c) if not cusp.is_infinity else
                                     (0 if c % group.N else _phi(c)) for c in range(1, c_max + 1)])
            return table
    todo = list(range(start, c_max + 1))
    if start > 1:
        counts[: start - 1] = [coset_count(group, cusp, c) if not cusp.is_infinity else
                               (0 if c % group.N else _phi(c)) for c in range(1, start)]
    if todo:
        nw = workers or threads()
        size = max(1, math.ceil(len(todo) / (4 * nw)))
        chunks = [todo[i:i + size] for i in range(0, len(todo), size)]
        if nw > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=nw) as pool:
                results = list(pool.map(lambda cs: _block_sums(group, rho, cusp, exps, n, column, m_count, cs), chunks))
        else:
            results = [_block_sums(group, rho, cusp, exps, n, column, m_count, cs) for cs in chunks]
        for cs, (vals, cnt) in zip(chunks, results):
            entries[cs[0] - 1: cs[-1]] = vals
            counts[cs[0] - 1: cs[-1]] = cnt
        if cache is not None:
            for m in range(m_count):
                rows = [(c, j, column, entries[c - 1, j, m]) for c in todo for j in range(rho.dim)]
                cache.append(table.ident, m, rows)
    table.entries, table.counts = entries, counts
    return table


@lru_cache(maxsize=None)
def _phi(c: int) -> int:
    from .groups import euler_phi
    return euler_phi(c)


def _load_cached(cache: KloostermanCache, table: KloostermanTable, entries: np.ndarray) -> int:
    """Fill ``entries`` from disk; return the first c not covered by every k-index file."""
    covered = None
    data = []
    for m in range(table.m_count):
        recs = cache.read(table.ident, m)
        data.append(recs)
        c = 0
        while (c + 1) in recs and len(recs[c + 1]) >= table.rho.dim:
            c += 1
        covered = c if covered is None else min(covered, c)
    covered = min(covered or 0, table.c_max)
    for m, recs in enumerate(data):
        for c in range(1, covered + 1):
            for (j, i), z in recs[c].items():
                if i == table.column:
                    entries[c - 1, j, m] = z
    return covered + 1


# --------------------------------------------------------------------------
# zeta partial sums

@dataclass
class ZetaPartial:
    s: complex
    K: int
    value: complex
    tail: float
    checkpoints: list[int]
    partials: list[complex]
    status: str = "ok"


def checkpoint_list(c_max: int) -> list[int]:
    pts = []
    p = 1
    while p < c_max:
        pts.append(p)
        p *= 2
    pts.append(c_max)
    return pts


def coset_bound(group: GroupSpec, cusp: CuspData) -> float:
    """A with #(double cosets at c) <= A c, hence |S(c)_{ji}| <= A c."""
    return 1.0 if cusp.is_infinity else float(cusp.width)


def zeta_partial(series: np.ndarray, s: complex, c_max: int | None = None,
                 bound_const: float = 1.0) -> ZetaPartial:
    """sum_{c <= c_max} S(c) / c^(2s) for the sequence series[c - 1].

    The tail bound uses |S(c)| <= bound_const * c, valid for Re s > 1.
    """
    series = np.asarray(series)
    c_max = len(series) if c_max is None else c_max
    c = np.arange(1, c_max + 1, dtype=float)
    terms = series[:c_max] * np.exp(-2.0 * complex(s) * np.log(c))
    pts = checkpoint_list(c_max)
    partials = [fsum_complex(terms[:p]) for p in pts]
    sigma = complex(s).real
    if sigma > 1:
        tail = bound_const * c_max ** (2 - 2 * sigma) / (2 * sigma - 2)
    else:
        tail = math.inf
    return ZetaPartial(complex(s), c_max, partials[-1], tail, pts, partials)


def zeta_at_one(series: np.ndarray, c_max: int | None = None, window: float = 0.5,
                warn: bool = True) -> tuple[complex, float, str]:
    """Conditional evaluation of sum S(c)/c^2.

    At each power-of-two checkpoint C the partial sums over c in (C/2, C] are
    averaged; the value is the last average and the error is the spread of the
    averages over the last ``window`` fraction of checkpoints.  Status is
    "non-convergent" when the steps between successive averages do not shrink
    (late steps at least half the early ones), as for a logarithmic divergence.
    """
    series = np.asarray(series)
    c_max = len(series) if c_max is None else c_max
    c = np.arange(1, c_max + 1, dtype=float)
    terms = series[:c_max] / (c * c)
    partial = np.cumsum(terms)
    if not np.any(terms):
        return 0j, 0.0, "ok"
    pts = [p for p in checkpoint_list(c_max) if p >= 2]
    means = [complex(np.mean(partial[p // 2: p])) for p in pts]
    n_last = max(2, int(math.ceil(window * len(means))))
    late = means[-n_last:]
    spread_late = max(abs(x - late[-1]) for x in late)
    steps = np.abs(np.diff(means))
    status = "ok"
    if len(steps) >= 4:
        step_late = float(np.mean(steps[-(n_last - 1):]))
        step_early = float(np.mean(steps[: len(steps) - (n_last - 1)]))
        if step_late >= 0.5 * step_early and step_late > 1e-12:
            status = "non-convergent"
            if warn:
                warnings.warn("zeta partial sums at s = 1 do not settle", NonConvergenceWarning, stacklevel=2)
    return means[-1], float(spread_late), status
