"""Normal multiplier systems rho: Gamma -> U(d) of rational weight.

Convention: a form of weight w satisfies f(g tau) = j_w(g, tau) rho(g) f(tau),
which forces rho(beta alpha) = omega_w(alpha, beta) rho(beta) rho(alpha).
"""

from __future__ import annotations

import cmath
import hashlib
import json
import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from .groups import (
    IDENTITY,
    INFINITY,
    S,
    SL2Z,
    T,
    CuspData,
    GroupElement,
    GroupSpec,
    enumerate_double_cosets,
    omega_cocycle,
    translation,
)
from .specfun import dedekind_sum


class InconsistentMultiplierError(ValueError):
    pass


def e(x) -> complex:
    """exp(2 pi i x), with exact rationals reduced mod 1 first."""
    if isinstance(x, (Fraction, int)):
        x = Fraction(x) % 1
    else:
        x = x - math.floor(x)
    return cmath.exp(2j * math.pi * float(x))


def snap_rational(x: float, max_den: int = 240, tol: float = 1e-10):
    """Nearby Fraction in [0, 1) with denominator <= max_den, else the float itself."""
    x = x % 1.0
    f = Fraction(x).limit_denominator(max_den)
    if abs(float(f) - x) < tol:
        return f % 1
    if abs(x - 1.0) < tol:
        return Fraction(0)
    return x


def _even_integer(w: Fraction) -> bool:
    return w.denominator == 1 and w.numerator % 2 == 0


# --------------------------------------------------------------------------
# words in S, T

def word_decompose(g: GroupElement, rounding: str = "floor") -> list[tuple[str, int]]:
    """Write g = +-T^q1 S T^q2 S ... T^qk as [("T", q1), ("S", 1), ...].

    Euclidean algorithm on the first column; ``rounding`` selects floor or
    nearest-integer quotients, which give different (equally valid) words.
    """
    word: list[tuple[str, int]] = []
    a, b, c, d = g.a, g.b, g.c, g.d
    while c != 0:
        if rounding == "floor":
            q = a // c
        elif rounding == "nearest":
            q = (2 * a + c) // (2 * c)
        else:
            raise ValueError(rounding)
        if q:
            word.append(("T", q))
        a, b = a - q * c, b - q * d
        # (a b; c d) = S (c d; -a -b)
        word.append(("S", 1))
        a, b, c, d = c, d, -a, -b
    # remaining (a b; 0 d) = +-T^(b/d) with a = d = +-1
    m = b * d
    if m:
        word.append(("T", m))
    return word


def word_product(word) -> GroupElement:
    out = IDENTITY
    for letter, k in word:
        if letter == "S":
            for _ in range(k % 2):
                out = out * S
        else:
            out = out * translation(k)
    return out


# --------------------------------------------------------------------------
# systems

class MultiplierSystem:
    """Base class; subclasses implement ``_evaluate`` and describe themselves in ``spec``."""

    dim: int = 1
    weight: Fraction = Fraction(0)
    group: GroupSpec = SL2Z

    def __init__(self):
        self._cache: dict[GroupElement, np.ndarray] = {}
        self._lock = threading.Lock()

    # -- evaluation
    def evaluate(self, g: GroupElement) -> np.ndarray:
        hit = self._cache.get(g)
        if hit is not None:
            return hit
        if not self.group.contains(g):
            raise ValueError(f"{g} is not in {self.group.label()}")
        val = self._evaluate(g)
        val.setflags(write=False)
        with self._lock:
            self._cache.setdefault(g, val)
        return val

    def inverse_image(self, g: GroupElement) -> np.ndarray:
        """rho(g)^-1 (conjugate transpose, rho being unitary)."""
        return self.evaluate(g).conj().T

    def _evaluate(self, g: GroupElement) -> np.ndarray:
        raise NotImplementedError

    # -- exponents at infinity
    def mu(self) -> list:
        """Exponents mu_i in [0, 1) with rho(T) = diag(e(mu))."""
        diag = np.diag(self.evaluate(T))
        return [snap_rational(cmath.phase(z) / (2 * math.pi)) for z in diag]

    def conjugate(self) -> "MultiplierSystem":
        raise NotImplementedError

    def spec(self) -> dict:
        raise NotImplementedError

    def key(self) -> str:
        blob = json.dumps(self.spec(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def generator_images(self) -> list[np.ndarray]:
        """Images of a generating set (SL2Z: S and T), used for invariant vectors."""
        if self.group.is_full():
            return [self.evaluate(S), self.evaluate(T)]
        # Gamma0(N): sample T and the double-coset representatives with small c
        els = [T] + [g for _, g in enumerate_double_cosets(self.group, INFINITY, 6 * self.group.N)]
        return [self.evaluate(g) for g in els]

    def __repr__(self):
        return f"{type(self).__name__}({self.spec()})"


class TrivialMultiplier(MultiplierSystem):
    def __init__(self, weight=0, dim: int = 1, group: GroupSpec = SL2Z):
        super().__init__()
        self.weight = Fraction(weight)
        self.dim = dim
        self.group = group
        if not _even_integer(self.weight):
            raise InconsistentMultiplierError(
                f"the trivial system is consistent only for even integer weight, got {self.weight}")

    def _evaluate(self, g):
        return np.eye(self.dim, dtype=complex)

    def mu(self):
        return [Fraction(0)] * self.dim

    def conjugate(self):
        return TrivialMultiplier(2 - self.weight, self.dim, self.group)

    def spec(self):
        return {"preset": "trivial", "dim": self.dim, "weight": str(self.weight), "group": self.group.label()}


def eta_phase(g: GroupElement) -> Fraction:
    """x with eta(g tau) = e(x) (c tau + d)^(1/2) eta(tau), principal square root."""
    if g.c == 0:
        return Fraction(g.b, 24) % 1
    a, c, d = g.a, g.c, g.d
    return (Fraction(a + d, 24 * c) - dedekind_sum(d, c) / 2 - Fraction(1, 8)) % 1


class EtaMultiplier(MultiplierSystem):
    """Multiplier of eta^r; consistent at every weight w = r/2 mod 2."""

    def __init__(self, r: int = 1, weight=None, group: GroupSpec = SL2Z):
        super().__init__()
        self.r = int(r)
        self.weight = Fraction(self.r, 2) if weight is None else Fraction(weight)
        self.group = group
        if (self.weight - Fraction(self.r, 2)) % 2 != 0:
            raise InconsistentMultiplierError(
                f"eta^{self.r} multiplier needs weight = {Fraction(self.r, 2)} mod 2, got {self.weight}")

    def phase(self, g: GroupElement) -> Fraction:
        return (self.r * eta_phase(g)) % 1

    def _evaluate(self, g):
        return np.array([[e(self.phase(g))]], dtype=complex)

    def mu(self):
        return [Fraction(self.r, 24) % 1]

    def conjugate(self):
        return EtaMultiplier(-self.r, 2 - self.weight, self.group)

    def spec(self):
        return {"preset": "eta", "r": self.r, "weight": str(self.weight), "group": self.group.label()}


class ExplicitMultiplier(MultiplierSystem):
    """d-dimensional system on SL2(Z) given by the images of S and T.

    Other elements are evaluated along the Euclidean word, inserting omega_w at
    every step.  Construction checks unitarity, diagonal T, finite order of the
    generator images and the relations S^2 = (ST)^3 = 1.
    """

    def __init__(self, s_image, t_image, weight=0, max_order: int = 2400, name: str | None = None):
        super().__init__()
        self.weight = Fraction(weight)
        self.s_image = np.array(s_image, dtype=complex)
        self.t_image = np.array(t_image, dtype=complex)
        self.dim = self.s_image.shape[0]
        self.group = SL2Z
        self.name = name
        self.max_order = max_order
        self._validate()

    def _validate(self):
        d = self.dim
        eye = np.eye(d)
        for m, label in ((self.s_image, "S"), (self.t_image, "T")):
            if m.shape != (d, d):
                raise InconsistentMultiplierError(f"image of {label} has shape {m.shape}")
            if np.abs(m @ m.conj().T - eye).max() > 1e-10:
                raise InconsistentMultiplierError(f"image of {label} is not unitary")
        if np.abs(self.t_image - np.diag(np.diag(self.t_image))).max() > 1e-10:
            raise InconsistentMultiplierError("image of T must be diagonal")
        for m, label in ((self.s_image, "S"), (self.t_image, "T")):
            if generator_order(m, self.max_order) is None:
                raise InconsistentMultiplierError(f"image of {label} has no finite order <= {self.max_order}")
        w = self.weight
        # rho(S S) = omega(S, S) rho(S)^2 must be the identity
        if np.abs(omega_cocycle(w, S, S) * self.s_image @ self.s_image - eye).max() > 1e-9:
            raise InconsistentMultiplierError("inconsistent generator images: S^2 relation fails")
        st = S * T
        rho_st = omega_cocycle(w, T, S) * self.s_image @ self.t_image
        rho_st2 = omega_cocycle(w, st, st) * rho_st @ rho_st
        rho_st3 = omega_cocycle(w, st, st * st) * rho_st2 @ rho_st
        if np.abs(rho_st3 - eye).max() > 1e-9:
            raise InconsistentMultiplierError("inconsistent generator images: (ST)^3 relation fails")

    def evaluate_word(self, word) -> np.ndarray:
        w = self.weight
        prod = IDENTITY
        mat = np.eye(self.dim, dtype=complex)
        for letter, k in word:
            if letter == "S":
                step, img = S, self.s_image
            else:
                step, img = translation(k), np.diag(np.diag(self.t_image) ** k)
            mat = omega_cocycle(w, step, prod) * mat @ img
            prod = prod * step
        return mat

    def _evaluate(self, g):
        return self.evaluate_word(word_decompose(g))

    def conjugate(self):
        return ExplicitMultiplier(self.s_image.conj(), self.t_image.conj(), 2 - self.weight,
                                  self.max_order, None if self.name is None else self.name + "_conj")

    def spec(self):
        return {"preset": "explicit", "weight": str(self.weight),
                "S": np.round(self.s_image, 12).tolist().__repr__(),
                "T": np.round(self.t_image, 12).tolist().__repr__()}


class DirectSum(MultiplierSystem):
    def __init__(self, parts, weight=None):
        super().__init__()
        self.parts = list(parts)
        self.weight = Fraction(self.parts[0].weight if weight is None else weight)
        for p in self.parts:
            if (p.weight - self.weight) % 2 != 0:
                raise InconsistentMultiplierError("summands must share the weight mod 2")
        groups = {p.group for p in self.parts}
        if len(groups) != 1:
            raise InconsistentMultiplierError("summands live on different groups")
        self.group = groups.pop()
        self.dim = sum(p.dim for p in self.parts)

    def _evaluate(self, g):
        return scipy.linalg.block_diag(*[p.evaluate(g) for p in self.parts]).astype(complex)

    def mu(self):
        return [m for p in self.parts for m in p.mu()]

    def conjugate(self):
        return DirectSum([p.conjugate() for p in self.parts], 2 - self.weight)

    def spec(self):
        return {"preset": "sum", "weight": str(self.weight), "parts": [p.spec() for p in self.parts]}


def s3_multiplier(weight=0) -> ExplicitMultiplier:
    """2-dimensional irreducible representation of SL2(Z) through S3 = SL2(Z/2)."""
    t_img = np.diag([1.0, -1.0])
    s_img = np.array([[-0.5, math.sqrt(3) / 2], [math.sqrt(3) / 2, 0.5]])
    return ExplicitMultiplier(s_img, t_img, weight, name="s3")


def generator_order(m: np.ndarray, bound: int) -> int | None:
    eye = np.eye(m.shape[0])
    p = np.eye(m.shape[0], dtype=complex)
    for k in range(1, bound + 1):
        p = p @ m
        # projective: a scalar root of unity counts (omega absorbs it)
        if np.abs(p - p[0, 0] * eye).max() < 1e-9 and abs(abs(p[0, 0]) - 1) < 1e-9:
            q = p[0, 0]
            for j in range(1, bound + 1):
                if abs(q ** j - 1) < 1e-9:
                    return k * j
            return None
    return None


# --------------------------------------------------------------------------
# cusp exponents and invariants

@dataclass
class CuspExponents:
    cusp: CuspData
    mu: list
    rho_alpha: np.ndarray


def cusp_exponents(rho: MultiplierSystem, cusp: CuspData = INFINITY) -> CuspExponents:
    """Diagonalize omega_w(g, sigma^-1) rho(g) for g = sigma T^width sigma^-1; exponents in [0, 1).

    At infinity this is rho(T) itself.
    """
    if cusp.is_infinity:
        return CuspExponents(cusp, rho.mu(), np.eye(rho.dim, dtype=complex))
    gen = cusp.stabilizer_generator()
    # the weight-w slash action of gen on functions expanded at the cusp picks
    # up omega_w(gen, sigma^-1) on top of rho(gen)
    twist = omega_cocycle(rho.weight, gen, cusp.alpha_inv.inverse())
    mat = twist * rho.evaluate(gen)
    if rho.dim == 1:
        if isinstance(rho, EtaMultiplier):
            k = cmath.phase(twist) / (2 * math.pi)
            nu = [(rho.phase(gen) + Fraction(round(k * 24 * 8), 24 * 8)) % 1]
        else:
            nu = [snap_rational(cmath.phase(mat[0, 0]) / (2 * math.pi))]
        return CuspExponents(cusp, nu, np.eye(1, dtype=complex))
    tri, z = scipy.linalg.schur(mat, output="complex")
    vals = np.diag(tri)
    nu = [snap_rational(cmath.phase(v) / (2 * math.pi)) for v in vals]
    order = sorted(range(len(nu)), key=lambda i: float(nu[i]))
    z = z[:, order]
    return CuspExponents(cusp, [nu[i] for i in order], z.conj().T)


def invariant_subspace_dim(rho: MultiplierSystem, tol: float = 1e-9) -> int:
    """Dimension of the common fixed space of rho(Gamma)."""
    eye = np.eye(rho.dim)
    stacked = np.vstack([m - eye for m in rho.generator_images()])
    sv = np.linalg.svd(stacked, compute_uv=False)
    return int(rho.dim - np.sum(sv > tol))


def consistency_defect(rho: MultiplierSystem, g1: GroupElement, g2: GroupElement) -> float:
    """max |rho(g1 g2) - omega_w(g2, g1) rho(g1) rho(g2)|."""
    lhs = rho.evaluate(g1 * g2)
    rhs = omega_cocycle(rho.weight, g2, g1) * rho.evaluate(g1) @ rho.evaluate(g2)
    return float(np.abs(lhs - rhs).max())


# --------------------------------------------------------------------------
# presets

def make_preset(name: str, weight=None, group: GroupSpec = SL2Z, **kw) -> MultiplierSystem:
    name = name.lower()
    if name == "trivial":
        return TrivialMultiplier(0 if weight is None else weight, kw.get("dim", 1), group)
    if name == "eta":
        return EtaMultiplier(kw.get("r", 1), weight, group)
    if name in ("eta_conj", "conjugate_eta", "eta-conj"):
        return EtaMultiplier(-kw.get("r", 1), weight, group)
    if name == "s3":
        if not group.is_full():
            raise ValueError("the s3 system is defined on SL2Z only")
        return s3_multiplier(0 if weight is None else weight)
    raise ValueError(f"unknown multiplier preset {name!r}")
