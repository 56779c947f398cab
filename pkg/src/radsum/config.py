"""JSON job configuration with exact rationals and a lossless round trip."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .groups import GroupSpec, find_cusp, gamma0
from .multiplier import ExplicitMultiplier, MultiplierSystem, make_preset
from .rademacher import RademacherJob


class ConfigError(ValueError):
    pass


def parse_rational(text) -> Fraction:
    if isinstance(text, bool):
        raise ConfigError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, str):
        try:
            return Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"not a rational: {text!r}") from exc
    raise ConfigError(f"rationals are written as \"p/q\" strings, got {text!r}")


def format_rational(x: Fraction) -> str:
    return str(Fraction(x))


def _matrix_from_pairs(rows) -> np.ndarray:
    try:
        return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigError("explicit matrices are arrays of [re, im] pairs") from exc


def _matrix_to_pairs(mat) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(mat, dtype=complex)]


@dataclass
class JobConfig:
    family: str = "SL2Z"
    level: int = 1
    weight: Fraction = Fraction(0)
    multiplier: dict = field(default_factory=lambda: {"preset": "trivial"})
    cusp: str = "inf"
    component: int = 0
    exponent: Fraction = Fraction(-1)
    c_max: int = 1000
    k_max: int = 10
    K: int = 40
    precision: str = "double"

    # ---- serialization
    def to_dict(self) -> dict:
        return {
            "group": {"family": self.family, "level": self.level},
            "weight": format_rational(self.weight),
            "multiplier": self.multiplier,
            "pole": {"cusp": self.cusp, "component": self.component, "exponent": format_rational(self.exponent)},
            "truncation": {"c_max": self.c_max, "k_max": self.k_max, "K": self.K, "precision": self.precision},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "JobConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        try:
            group = doc.get("group", {})
            pole = doc.get("pole", {})
            trunc = doc.get("truncation", {})
            family = str(group.get("family", "SL2Z"))
            if family.lower() in ("sl2z", "full"):
                family = "SL2Z"
            elif family.lower() in ("gamma0", "hecke"):
                family = "Gamma0"
            else:
                raise ConfigError(f"unknown group family {family!r}")
            mult = doc.get("multiplier", {"preset": "trivial"})
            if not isinstance(mult, dict) or not ({"preset", "S"} & set(mult)):
                raise ConfigError("multiplier needs a preset name or explicit S/T matrices")
            cfg = cls(
                family=family,
                level=int(group.get("level", 1)),
                weight=parse_rational(doc.get("weight", "0")),
                multiplier=mult,
                cusp=str(pole.get("cusp", "inf")),
                component=int(pole.get("component", 0)),
                exponent=parse_rational(pole.get("exponent", "-1")),
                c_max=int(trunc.get("c_max", 1000)),
                k_max=int(trunc.get("k_max", 10)),
                K=int(trunc.get("K", 40)),
                precision=str(trunc.get("precision", "double")),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError, AttributeError) as exc:
            raise ConfigError(str(exc)) from exc
        if cfg.level < 1 or cfg.c_max < 0 or cfg.k_max < 0 or cfg.K < 1:
            raise ConfigError("level, K must be positive and c_max, k_max non-negative")
        if cfg.precision != "double":
            raise ConfigError(f"precision mode {cfg.precision!r} is not available (double only)")
        return cfg

    @classmethod
    def loads(cls, text: str) -> "JobConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> "JobConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        return cls.loads(text)

    # ---- construction of engine objects
    def group(self) -> GroupSpec:
        if self.family == "SL2Z" and self.level != 1:
            raise ConfigError("SL2Z has level 1")
        return gamma0(self.level)

    def rho(self) -> MultiplierSystem:
        spec = dict(self.multiplier)
        try:
            if "S" in spec:
                return ExplicitMultiplier(_matrix_from_pairs(spec["S"]), _matrix_from_pairs(spec["T"]),
                                          self.weight, name=spec.get("name"))
            name = spec.pop("preset")
            kw = {k: int(v) for k, v in spec.items() if k in ("r", "dim")}
            return make_preset(name, self.weight, self.group(), **kw)
        except ConfigError:
            raise
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad multiplier block: {exc}") from exc

    def job(self) -> RademacherJob:
        group = self.group()
        return RademacherJob(group, self.weight, self.rho(), self.exponent, self.component,
                             find_cusp(group, self.cusp), self.c_max, self.k_max)

    @staticmethod
    def explicit_block(s_image, t_image, name: str | None = None) -> dict:
        out = {"S": _matrix_to_pairs(s_image), "T": _matrix_to_pairs(t_image)}
        if name:
            out["name"] = name
        return out
