"""Exact arithmetic in SL2(Z) and Gamma0(N): elements, cusps, coset enumerations."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np


@dataclass(frozen=True)
class GroupElement:
    """Integer matrix (a b; c d) of determinant 1, identified with its negative.

    The stored sign is canonical: c > 0, or c = 0 and d > 0.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        a, b, c, d = (int(v) for v in (self.a, self.b, self.c, self.d))
        if a * d - b * c != 1:
            raise ValueError(f"determinant of ({a} {b}; {c} {d}) is not 1")
        if c < 0 or (c == 0 and d < 0):
            a, b, c, d = -a, -b, -c, -d
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, v)

    @classmethod
    def from_bottom_row(cls, c: int, d: int, a_shift: int = 0) -> "GroupElement":
        """Element with bottom row (c, d), gcd(c, d) = 1; a chosen in [0, c) plus ``a_shift*c``."""
        if c == 0:
            if abs(d) != 1:
                raise ValueError("bottom row (0, d) needs d = +-1")
            return cls(1, 0, 0, 1)
        a = pow(d, -1, c) + a_shift * c
        b = (a * d - 1) // c
        return cls(a, b, c, d)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def __pow__(self, n: int) -> "GroupElement":
        base = self if n >= 0 else self.inverse()
        out = IDENTITY
        for _ in range(abs(n)):
            out = out * base
        return out

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=object)

    def cusp_image(self):
        """gamma(infinity) as a Fraction, or None for infinity."""
        return None if self.c == 0 else Fraction(self.a, self.c)

    def __repr__(self):
        return f"({self.a} {self.b}; {self.c} {self.d})"


IDENTITY = GroupElement(1, 0, 0, 1)
S = GroupElement(0, -1, 1, 0)
T = GroupElement(1, 1, 0, 1)


def translation(t: int) -> GroupElement:
    return GroupElement(1, t, 0, 1)


def act(g: GroupElement, tau):
    """Moebius action; ``tau=None`` stands for the cusp at infinity."""
    if tau is None:
        return g.cusp_image()
    return (g.a * tau + g.b) / (g.c * tau + g.d)


def automorphy_factor(w, g: GroupElement, tau: complex) -> complex:
    """j_w(g, tau) = exp(w Log(c tau + d)) with the principal logarithm.

    Equals exp((w/2) Log((c tau + d)^2)) whenever Re(c tau + d) >= 0; elsewhere
    the squared form jumps across Re(c tau + d) = 0 for non-even w, so the
    factor is taken through Log(c tau + d) to stay holomorphic in tau.
    """
    if g.c == 0 and g.d == 1:
        return 1.0 + 0j
    return cmath.exp(float(w) * cmath.log(g.c * tau + g.d))


_OMEGA_TAUS = (2j, 0.3 + 0.7j)


class CocycleError(ArithmeticError):
    pass


def omega_cocycle(w, alpha: GroupElement, beta: GroupElement, snap_tol: float = 1e-9) -> complex:
    """omega_w(alpha, beta) from j(beta alpha, tau) = omega^-1 j(beta, alpha tau) j(alpha, tau).

    Evaluated at tau = 2i and cross-checked at 0.3+0.7i, then snapped to the
    nearest exp(i pi w k), |k| <= 2.
    """
    w = Fraction(w)
    if w.denominator == 1 and w.numerator % 2 == 0:
        return 1.0 + 0j
    if alpha == IDENTITY or beta == IDENTITY:
        return 1.0 + 0j
    prod = beta * alpha
    vals = []
    for tau in _OMEGA_TAUS:
        num = automorphy_factor(w, beta, act(alpha, tau)) * automorphy_factor(w, alpha, tau)
        vals.append(num / automorphy_factor(w, prod, tau))
    if abs(vals[0] - vals[1]) > 1e-9:
        raise CocycleError(f"omega_{w}({alpha}, {beta}) differs between sample points")
    raw = vals[0]
    for k in (0, 1, -1, 2, -2):
        cand = cmath.exp(1j * math.pi * float(w) * k)
        if abs(raw - cand) < snap_tol:
            return cand
    return raw / abs(raw)


# --------------------------------------------------------------------------
# groups and cusps

@dataclass(frozen=True)
class GroupSpec:
    """SL2(Z) (``family="SL2Z"``) or Gamma0(N) (``family="Gamma0"``)."""

    family: str = "SL2Z"
    level: int = 1

    def __post_init__(self):
        if self.family not in ("SL2Z", "Gamma0"):
            raise ValueError(f"unsupported group family {self.family!r}")
        if self.level < 1:
            raise ValueError("level must be positive")
        if self.family == "SL2Z" and self.level != 1:
            raise ValueError("SL2Z has level 1")

    @property
    def N(self) -> int:
        return self.level if self.family == "Gamma0" else 1

    def contains(self, g: GroupElement) -> bool:
        return g.c % self.N == 0

    def is_full(self) -> bool:
        return self.N == 1

    def index(self) -> int:
        n = self.N
        out = n
        for p in _prime_factors(n):
            out = out * (p + 1) // p
        return out

    def label(self) -> str:
        return "SL2Z" if self.N == 1 else f"Gamma0({self.N})"


SL2Z = GroupSpec()


def gamma0(n: int) -> GroupSpec:
    return SL2Z if n == 1 else GroupSpec("Gamma0", n)


@dataclass(frozen=True)
class CuspData:
    """Cusp representative, width and scaling.

    ``representative`` is a Fraction or None (infinity).  ``alpha_inv`` is an
    element of SL2(Z) sending infinity to the cusp, so alpha = alpha_inv^-1 maps
    the cusp to infinity and alpha^-1 T^width alpha is the generator of its
    stabilizer in the group.
    """

    representative: Fraction | None
    width: int
    alpha_inv: GroupElement = field(default=IDENTITY)

    @property
    def alpha(self) -> GroupElement:
        return self.alpha_inv.inverse()

    @property
    def is_infinity(self) -> bool:
        return self.representative is None

    def stabilizer_generator(self, t: int | Fraction | None = None) -> GroupElement:
        """alpha^-1 T^t alpha (integral t only)."""
        t = self.width if t is None else t
        t = Fraction(t)
        if t.denominator != 1:
            raise ValueError("non-integral translation is not in SL2(Z)")
        return self.alpha_inv * translation(int(t)) * self.alpha

    def label(self) -> str:
        return "inf" if self.representative is None else str(self.representative)


INFINITY = CuspData(None, 1, IDENTITY)


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def cusp_list(group: GroupSpec) -> list[CuspData]:
    """One CuspData per Gamma-class of cusps, infinity first.

    Cusps of Gamma0(N) are a/c with c | N, c < N, and a running over the units
    modulo gcd(c, N/c); the width is N / gcd(c^2, N).
    """
    n = group.N
    out = [INFINITY]
    for c in _divisors(n):
        if c == n:
            continue
        g = math.gcd(c, n // c)
        width = n // math.gcd(c * c, n)
        for u in range(g):
            if math.gcd(u, g) != 1:
                continue
            a = 0 if c == 1 else 1
            while math.gcd(a, c) != 1 or a % g != u % g:
                a += 1
            dd = pow(a, -1, c) if c > 1 else 0
            alpha_inv = GroupElement(a, (a * dd - 1) // c, c, dd)
            out.append(CuspData(Fraction(a, c), width, alpha_inv))
    return out


def _euler_phi(n: int) -> int:
    out = n
    for p in _prime_factors(n):
        out = out // p * (p - 1)
    return out


def euler_phi(n: int) -> int:
    return _euler_phi(n)


def cusp_width_is_minimal(group: GroupSpec, cusp: CuspData) -> bool:
    if not group.contains(cusp.stabilizer_generator()):
        return False
    num = Fraction(cusp.width).numerator
    for p in _prime_factors(num):
        if group.contains(cusp.stabilizer_generator(Fraction(cusp.width, p))):
            return False
    return True


def find_cusp(group: GroupSpec, label) -> CuspData:
    """Look up a cusp by label ("inf", "0", "1/2", ...) among the group's cusp list."""
    if isinstance(label, CuspData):
        return label
    text = str(label).strip().lower()
    for cusp in cusp_list(group):
        if cusp.label() == text or (text in ("infinity", "oo", "i*infinity") and cusp.is_infinity):
            return cusp
    raise ValueError(f"cusp {label!r} is not a listed representative of {group.label()}")


# --------------------------------------------------------------------------
# enumerations

class UnsupportedError(NotImplementedError):
    pass


def enumerate_double_cosets(group: GroupSpec, cusp: CuspData, c_max: int,
                            c_min: int = 1) -> Iterator[tuple[int, GroupElement]]:
    """Representatives of Gamma_inf^(width) \\ alpha Gamma / Gamma_inf with c_min <= c <= c_max.

    For the cusp at infinity the representative of each class has 0 <= d < c
    and 0 <= a < c.  For other cusps of Gamma0(N) the left stabilizer has
    translation length equal to the cusp width W, and 0 <= a < W c.
    """
    if c_max < 1:
        return
    if group.family not in ("SL2Z", "Gamma0"):
        raise UnsupportedError(group.family)
    n = group.N
    if cusp.is_infinity:
        for c in range(max(c_min, 1), c_max + 1):
            if c % n:
                continue
            for d in range(c):
                if math.gcd(c, d) == 1:
                    yield c, GroupElement.from_bottom_row(c, d)
        return
    if cusp.alpha_inv.c == 0:
        raise UnsupportedError("cusp scaling must move infinity")
    g = cusp.alpha_inv
    width = int(cusp.width)
    for c in range(max(c_min, 1), c_max + 1):
        for d in range(c):
            if math.gcd(c, d) != 1:
                continue
            a0 = pow(d, -1, c) if c > 1 else 0
            for t in range(width):
                a = a0 + c * t
                # alpha^-1 gamma must lie in Gamma0(N): lower-left entry g.c*a + g.d*c
                if (g.c * a + g.d * c) % n == 0:
                    b = (a * d - 1) // c
                    yield c, GroupElement(a, b, c, d)


def double_coset_key(cusp: CuspData, g: GroupElement, h: int = 1):
    """Invariant labelling the double coset of ``g`` (c > 0)."""
    if g.c == 0:
        return (0,)
    w = int(cusp.width) if not cusp.is_infinity else 1
    return (g.c, g.d % (g.c * h), g.a % (g.c * w))


def enumerate_rectangle(group: GroupSpec, K: int, cusp: CuspData = INFINITY,
                        d_max: int | None = None) -> Iterator[GroupElement]:
    """Left Gamma_inf cosets meeting {0 <= c < K, |d| < K^2} in alpha Gamma.

    The identity coset is always included for the cusp at infinity.  ``d_max``
    overrides the |d| bound (used for the absolutely convergent Poincare sums).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    bound = K * K if d_max is None else d_max
    n = group.N
    if cusp.is_infinity:
        yield IDENTITY
        for c in range(1, K):
            if c % n:
                continue
            for d in range(-bound + 1, bound):
                if math.gcd(c, d) == 1:
                    yield GroupElement.from_bottom_row(c, d)
        return
    g = cusp.alpha_inv
    width = int(cusp.width)
    for c in range(1, K):
        for d in range(-bound + 1, bound):
            if math.gcd(c, d) != 1:
                continue
            a0 = pow(d, -1, c) if c > 1 else 0
            for t in range(width):
                a = a0 + c * t
                if (g.c * a + g.d * c) % n == 0:
                    yield GroupElement(a, (a * d - 1) // c, c, d)


def rectangle_arrays(group: GroupSpec, K: int, cusp: CuspData = INFINITY, d_max: int | None = None):
    """Vectorized form of :func:`enumerate_rectangle` for the cusp at infinity.

    Returns integer arrays (a, c, d) of the non-identity cosets.
    """
    if not cusp.is_infinity:
        els = [g for g in enumerate_rectangle(group, K, cusp, d_max)]
        return (np.array([g.a for g in els], dtype=np.int64), np.array([g.c for g in els], dtype=np.int64),
                np.array([g.d for g in els], dtype=np.int64))
    bound = K * K if d_max is None else d_max
    n = group.N
    a_parts, c_parts, d_parts = [], [], []
    d_all = np.arange(-bound + 1, bound, dtype=np.int64)
    for c in range(1, K):
        if c % n:
            continue
        d = d_all[np.gcd(d_all, c) == 1]
        a = modinv_array(d % c, c)
        a_parts.append(a)
        c_parts.append(np.full(d.shape, c, dtype=np.int64))
        d_parts.append(d)
    if not c_parts:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z
    return np.concatenate(a_parts), np.concatenate(c_parts), np.concatenate(d_parts)


def modinv_array(d: np.ndarray, c: int) -> np.ndarray:
    """Inverses of the units ``d`` modulo ``c``.

    Uses d^(phi(c) - 1) by square-and-multiply while c^2 fits in int64,
    otherwise a lockstep extended Euclid.
    """
    d = np.asarray(d, dtype=np.int64) % c
    if c == 1:
        return np.zeros_like(d)
    if c < 3_000_000_000:
        e = _euler_phi(c) - 1
        out = np.ones_like(d)
        base = d.copy()
        while e:
            if e & 1:
                out = out * base % c
            base = base * base % c
            e >>= 1
        if np.any(out * d % c != 1):
            raise ValueError("non-unit passed to modinv_array")
        return out
    r0 = np.full(d.shape, c, dtype=np.int64)
    r1 = d.copy()
    s0 = np.zeros(d.shape, dtype=np.int64)
    s1 = np.ones(d.shape, dtype=np.int64)
    live = r1 != 0
    while live.any():
        q = np.where(live, r0 // np.where(live, r1, 1), 0)
        r0, r1 = np.where(live, r1, r0), np.where(live, r0 - q * r1, r1)
        s0, s1 = np.where(live, s1, s0), np.where(live, s0 - q * s1, s1)
        live = r1 != 0
    if np.any(r0 != 1):
        raise ValueError("non-unit passed to modinv_array")
    return s0 % c
