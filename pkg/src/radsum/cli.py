"""Command-line batch interface.

Every subcommand prints one JSON document (sorted keys, fixed float format).
Exit status: 0 ok, 1 config error, 2 out-of-scope request, 3 convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import oracle
from .config import ConfigError, JobConfig, parse_rational
from .groups import S, T, find_cusp
from .kloosterman import (
    KloostermanCache,
    build_table,
    coset_bound,
    kloosterman_sum,
    zeta_at_one,
    zeta_partial,
)
from .multiplier import cusp_exponents
from .rademacher import (
    ConstantsMarker,
    ConvergenceError,
    OutOfScopeError,
    asymptotic_estimate,
    basis_spec,
    coefficients,
    delta_constant,
    dimension_bound,
    shadow_coefficients,
)

EXIT_CONFIG, EXIT_SCOPE, EXIT_CONVERGENCE = 1, 2, 3


class TrendError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# output helpers

def _num(x: float) -> float | str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.15e}")


def cvalue(z, err, status: str = "ok") -> dict:
    z = complex(z)
    return {"re": _num(z.real), "im": _num(z.imag), "err": _num(err), "status": status}


def _vector(vals, errs, status="ok") -> list:
    return [cvalue(v, e, status) for v, e in zip(np.atleast_1d(vals), np.atleast_1d(errs))]


def emit(doc: dict, out: str | None) -> str:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return text


def series_csv(series) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["component", "exponent_num", "exponent_den", "re", "im", "err"])
    for j, e, v, er in series.rows():
        e = Fraction(e)
        writer.writerow([j, e.numerator, e.denominator, f"{v.real:.15e}", f"{v.imag:.15e}", f"{er:.15e}"])
    return buf.getvalue()


def series_doc(series) -> dict:
    rows = []
    for j, e, v, er in series.rows():
        item = cvalue(v, er, series.status)
        item.update({"component": j, "exponent": str(Fraction(e))})
        rows.append(item)
    poles = [{"component": j, "exponent": str(e), **cvalue(v, 0.0, "exact")} for j, e, v in series.pole]
    return {"weight": str(series.weight), "coefficients": rows, "pole": poles, "status": series.status,
            "k_max": series.k_max, "c_max": series.c_max}


# --------------------------------------------------------------------------
# config assembly

def _config_from_args(args) -> JobConfig:
    if getattr(args, "config", None):
        cfg = JobConfig.load(args.config)
    else:
        cfg = JobConfig()
        cfg.multiplier = {"preset": "trivial"}
    if getattr(args, "family", None):
        cfg.family = "Gamma0" if args.family.lower() == "gamma0" else "SL2Z"
    if getattr(args, "level", None):
        cfg.level = args.level
        if cfg.level > 1:
            cfg.family = "Gamma0"
    if getattr(args, "weight", None) is not None:
        cfg.weight = parse_rational(args.weight)
    if getattr(args, "preset", None):
        cfg.multiplier = {"preset": args.preset}
        if getattr(args, "r", None) is not None:
            cfg.multiplier["r"] = args.r
    if getattr(args, "exponent", None) is not None:
        cfg.exponent = parse_rational(args.exponent)
    if getattr(args, "component", None) is not None:
        cfg.component = args.component
    if getattr(args, "kmax", None) is not None:
        cfg.k_max = args.kmax
    if getattr(args, "cmax", None) is not None:
        cfg.c_max = args.cmax
    if getattr(args, "K", None) is not None:
        cfg.K = args.K
    return cfg


def _provenance(cfg: JobConfig, **extra) -> dict:
    doc = {"config": cfg.to_dict(), "precision": cfg.precision}
    doc.update(extra)
    return doc


def _cache(args) -> KloostermanCache:
    return KloostermanCache(getattr(args, "cache_dir", None))


def _tau(text: str) -> complex:
    try:
        tau = complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"bad tau {text!r}") from exc
    if tau.imag <= 0:
        raise ConfigError("tau must lie in the upper half plane")
    return tau


# --------------------------------------------------------------------------
# subcommands

def cmd_coeffs(args):
    cfg = _config_from_args(args)
    job = cfg.job()
    series = coefficients(job, cache=_cache(args))
    if args.csv:
        Path(args.csv).write_text(series_csv(series))
    return {"command": "coeffs", "result": series_doc(series), "provenance": _provenance(cfg)}


def cmd_shadow(args):
    cfg = _config_from_args(args)
    job = cfg.job()
    series = shadow_coefficients(job, cache=_cache(args))
    if args.csv:
        Path(args.csv).write_text(series_csv(series))
    return {"command": "shadow", "result": series_doc(series), "provenance": _provenance(cfg)}


def cmd_kloosterman(args):
    cfg = _config_from_args(args)
    group = cfg.group()
    rho = cfg.rho()
    cusp = find_cusp(group, cfg.cusp)
    n, k = parse_rational(args.n), parse_rational(args.k)
    cs = [args.c] if args.c else list(range(1, cfg.c_max + 1))
    rows = []
    for c in cs:
        mat = kloosterman_sum(group, rho, cusp, n, k, c)
        entries = [{"j": j, "i": i, **cvalue(mat[j, i], 1e-12 * max(1, c), "ok")}
                   for j in range(rho.dim) for i in range(rho.dim)]
        rows.append({"c": c, "entries": entries})
    doc = {"command": "kloosterman", "n": str(n), "k": str(k), "sums": rows, "provenance": _provenance(cfg)}
    if args.c and rho.dim == 1:
        doc["value"] = rows[0]["entries"][0]
    return doc


def cmd_zeta(args):
    cfg = _config_from_args(args)
    job = cfg.job()
    k = parse_rational(args.k)
    mu = cusp_exponents(job.multiplier, job.cusp).mu
    m = int(k - mu[args.row])
    table = build_table(job.group, job.multiplier, job.cusp, job.n, job.component, cfg.c_max, m + 1,
                        cache=_cache(args))
    series = table.column_for(args.row, m)
    s = complex(args.s.replace("i", "j"))
    if s == 1:
        value, err, status = zeta_at_one(series, cfg.c_max, warn=False)
        checkpoints = []
    else:
        zp = zeta_partial(series, s, cfg.c_max, coset_bound(job.group, job.cusp))
        value, err, status = zp.value, zp.tail, "ok" if math.isfinite(zp.tail) else "no-bound"
        checkpoints = [{"c": c, **cvalue(v, math.nan, "partial")} for c, v in zip(zp.checkpoints, zp.partials)]
    return {"command": "zeta", "s": args.s, "k": str(k), "value": cvalue(value, err, status),
            "checkpoints": checkpoints, "provenance": _provenance(cfg)}


def cmd_delta(args):
    cfg = _config_from_args(args)
    job = cfg.job()
    val, err, status = delta_constant(job, cache=_cache(args))
    return {"command": "delta", "delta": _vector(val, err, status), "provenance": _provenance(cfg)}


def cmd_asymptotic(args):
    cfg = _config_from_args(args)
    job = cfg.job()
    k = parse_rational(args.k)
    est = asymptotic_estimate(job, k)
    return {"command": "asymptotic", "k": str(k), "estimate": cvalue(est, math.nan, "leading-term"),
            "provenance": _provenance(cfg)}


def cmd_dims(args):
    cfg = _config_from_args(args)
    bound = dimension_bound(cfg.group(), cfg.rho(), cfg.weight, args.m)
    return {"command": "dims", "value": bound, "status": "exact", "m": args.m, "provenance": _provenance(cfg)}


def cmd_basis(args):
    cfg = _config_from_args(args)
    spec = basis_spec(cfg.group(), cfg.rho(), cfg.weight, args.m)
    poles = [{"component": p.component, "exponent": str(p.n)} for p in spec if not isinstance(p, ConstantsMarker)]
    consts = sum(p.count for p in spec if isinstance(p, ConstantsMarker))
    return {"command": "basis", "poles": poles, "constants": consts, "count": len(poles) + consts,
            "status": "exact", "provenance": _provenance(cfg)}


def cmd_evaluate(args):
    cfg = _config_from_args(args)
    tau = _tau(args.tau)
    if args.poincare is not None:
        w = parse_rational(args.poincare)
        group, rho = cfg.group(), cfg.rho()
        if rho.weight != w:
            raise ConfigError("the multiplier weight must equal the Poincare weight")
        n = -cfg.exponent
        ladder = sorted({max(1, cfg.c_max // 4), max(1, cfg.c_max // 2), cfg.c_max})
        trend = [(c, oracle.poincare_direct(group, w, rho, n, cfg.component, tau, c)) for c in ladder]
        rep = oracle.EvaluationReport(trend[-1][1], {"c_max": cfg.c_max}, trend,
                                      error=float(np.max(np.abs(trend[-1][1] - trend[-2][1]))) if len(trend) > 1 else 0.0)
        kind = "poincare"
    else:
        rep = oracle.rademacher_partial(cfg.job(), tau, cfg.K)
        kind = "rademacher"
    status = "ok" if len(rep.trend) < 3 or rep.shrinking() else "non-shrinking"
    doc = {"command": "evaluate", "kind": kind, "tau": [tau.real, tau.imag],
           "value": _vector(rep.value, [rep.error] * len(np.atleast_1d(rep.value)), status),
           "trend": [{"truncation": t, "value": _vector(v, [math.nan] * len(v), "partial")} for t, v in rep.trend],
           "provenance": _provenance(cfg, K=cfg.K)}
    if status != "ok":
        doc["error"] = "truncation trend is not shrinking"
        raise TrendError(json.dumps(doc))
    return doc


def _check(name, passed: bool, **fields) -> dict:
    item = {"check": name, "status": "pass" if passed else "fail"}
    for key, val in fields.items():
        item[key] = _num(val) if isinstance(val, (float, int, np.floating)) else val
    return item


def cmd_verify(args):
    cfg = _config_from_args(args)
    job = cfg.job()
    cache = _cache(args)
    series = coefficients(job, cache=cache)
    checks = []
    for tau in (0.8j, 0.3 + 1.1j):
        rep = oracle.rademacher_partial(job, tau, cfg.K)
        val, err = series.evaluate(tau)
        gap = float(np.max(np.abs(val - rep.value)))
        allowed = float(np.max(err)) + rep.error
        checks.append(_check(f"series_vs_oracle@{tau}", gap <= allowed, disagreement=gap, allowed=allowed))
    if job.weight < 0 and job.multiplier.dim == 1 and job.group.is_full():
        shadow = shadow_coefficients(job, cache=cache)
        if any(shadow.terms[0]):
            per = oracle.shadow_period(job.weight, 0.3 + 1.1j, shadow)
            checks.append(_check("shadow_period", per.residual < 1e-6, residual=per.residual))
        for name, gamma in (("T", T), ("S", S)):
            aut = oracle.verify_automorphy(series, shadow, job.multiplier, gamma, 0.3 + 1.1j)
            checks.append(_check(f"automorphy_{name}", aut.completion_residual < 1e-3,
                                 completion_residual=aut.completion_residual,
                                 literal_residual=aut.literal_residual))
    doc = {"command": "verify", "checks": checks, "provenance": _provenance(cfg, K=cfg.K)}
    if any(c["status"] == "fail" for c in checks):
        doc["error"] = "one or more oracle checks failed"
        raise TrendError(json.dumps(doc, sort_keys=True))
    return doc


def cmd_cache(args):
    cache = _cache(args)
    if args.action == "clear":
        removed = cache.clear()
        return {"command": "cache", "action": "clear", "removed": removed, "status": "ok",
                "directory": str(cache.directory)}
    files = [{"path": str(p.relative_to(cache.directory)), "records": sum(1 for _ in p.open())}
             for p in cache.entries()]
    return {"command": "cache", "action": "list", "files": files, "status": "ok", "directory": str(cache.directory)}


# --------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radsum", description="Rademacher sums and Kloosterman sums.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("config")
        else:
            p.add_argument("config", nargs="?")
        p.add_argument("--out")
        p.add_argument("--cache-dir", dest="cache_dir")
        p.add_argument("--kmax", type=int)
        p.add_argument("--cmax", type=int)
        p.add_argument("--K", type=int)
        p.add_argument("--family")
        p.add_argument("--level", type=int)
        p.add_argument("--weight")
        p.add_argument("--preset")
        p.add_argument("--r", type=int)
        p.add_argument("--exponent", help="pole exponent n as p/q")
        p.add_argument("--component", type=int, help="pole component index")
        return p

    for name in ("coeffs", "shadow"):
        common(sub.add_parser(name), False).add_argument("--csv")
    p = common(sub.add_parser("kloosterman"), False)
    p.add_argument("--n", default="0")
    p.add_argument("--k", default="0")
    p.add_argument("--c", type=int)
    p = common(sub.add_parser("zeta"), False)
    p.add_argument("--s", default="2")
    p.add_argument("--k", default="0")
    p.add_argument("--row", type=int, default=0)
    common(sub.add_parser("delta"), False)
    common(sub.add_parser("asymptotic"), False).add_argument("--k", required=True)
    for name in ("dims", "basis"):
        common(sub.add_parser(name), False).add_argument("--m", type=int, default=1)
    p = common(sub.add_parser("evaluate"), False)
    p.add_argument("--tau", default="1.2i")
    p.add_argument("--poincare", help="evaluate the absolutely convergent Poincare sum of this weight")
    common(sub.add_parser("verify"), False)
    p = sub.add_parser("cache")
    p.add_argument("action", choices=["list", "clear"])
    p.add_argument("--cache-dir", dest="cache_dir")
    p.add_argument("--out")
    return parser


COMMANDS = {
    "coeffs": cmd_coeffs, "shadow": cmd_shadow, "kloosterman": cmd_kloosterman, "zeta": cmd_zeta,
    "delta": cmd_delta, "asymptotic": cmd_asymptotic, "dims": cmd_dims, "basis": cmd_basis,
    "evaluate": cmd_evaluate, "verify": cmd_verify, "cache": cmd_cache,
}


def _fail(code: int, message: str, out: str | None) -> int:
    emit({"error": message, "exit_status": code, "status": "error"}, out)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = getattr(args, "out", None)
    try:
        doc = COMMANDS[args.command](args)
    except OutOfScopeError as exc:
        return _fail(EXIT_SCOPE, str(exc), out)
    except TrendError as exc:
        doc = json.loads(str(exc))
        doc["exit_status"] = EXIT_CONVERGENCE
        emit(doc, out)
        return EXIT_CONVERGENCE
    except ConvergenceError as exc:
        return _fail(EXIT_CONVERGENCE, str(exc), out)
    except (ConfigError, ValueError, KeyError) as exc:
        return _fail(EXIT_CONFIG, str(exc), out)
    emit(doc, out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
