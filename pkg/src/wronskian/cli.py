"""Command-line front end.

Subcommands: ``series`` (1/g coefficients), ``compare`` (finite-g table of
all methods against the oracle), ``oracle`` (finite-difference ground state),
``energy`` (finite-g energies at one g) and ``selftest``.
"""

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from . import double_well as dw
from .exceptions import WronskianError
from .ode_green import abel_wronskian
from .oracle import double_well_problem, fd_ground_state, harmonic_problem
from .series import StandardTriple, appendix_substitution, standard_triple_value

METHODS = ("wda1", "wda2", "variational")
CLOSURES = ("orthogonality", "flz")
FORMATS = ("json", "csv")
COMPARE_HEADER = ["g", "E_wda1", "E_wda2", "E_var", "E_oracle", "d_wda1", "d_wda2", "d_var", "status"]

PROVENANCE = {
    "wda1": "Rayleigh quotient of the trial state, Laplace-expanded in exact rationals",
    "wda2": "second iterate; g^-2 and beyond from standard-triple quadratures (floating)",
    "variational": "stationary point of the variational energy, solved order by order in exact rationals",
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    g: Optional[float] = None
    g_min: Optional[float] = None
    g_max: Optional[float] = None
    steps: int = 5
    order: int = 4
    method: Optional[str] = None
    closure: str = "orthogonality"
    format: str = "json"
    out: Optional[str] = None
    n: int = 4000
    x_max: Optional[float] = None
    potential: str = "double-well"
    inject_fault: Optional[str] = None


# -- formatting -------------------------------------------------------------------

def fmt_float(v):
    """12 significant digits, locale independent."""
    return format(float(v), ".12g")


def _num(v):
    return float(fmt_float(v))


def _coefficients(expansion):
    out = []
    for c in expansion.coefficients:
        out.append({
            "power": c.power,
            "value": _num(c.value),
            "rational": f"{c.value.numerator}/{c.value.denominator}" if c.exact else None,
        })
    return out


def _dump(payload, cfg, rows=None, header=None):
    if cfg.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands --------------------------------------------------------------------

def series_payload(method, order):
    if method == "wda1":
        exp = dw.e1_series(order)
        extra = {}
    elif method == "wda2":
        exp = dw.e2_series(order)
        extra = {}
    else:
        f_exp, exp = dw.variational_series(order)
        extra = {"f_coefficients": _coefficients(f_exp)}
    payload = {"method": method, "order": order, "coefficients": _coefficients(exp)}
    payload.update(extra)
    payload["provenance_note"] = PROVENANCE[method]
    return payload


def cmd_series(cfg):
    payload = series_payload(cfg.method, cfg.order)
    rows = [[c["power"], fmt_float(c["value"]), c["rational"] or ""] for c in payload["coefficients"]]
    _dump(payload, cfg, rows, ["power", "value", "rational"])
    return 0


def compare_row(g, order=4, n=4000):
    """One row of the comparison table as a list of strings."""
    try:
        e1 = dw.e1_series(order).evaluate(g)
        e2 = dw.e2_series(order).evaluate(g)
        _, e_var = dw.variational_minimize(g)
        ref = fd_ground_state(double_well_problem(g, n)).extrapolated
        d = [e1 - ref, e2 - ref, e_var - ref]
        status = "ok"
        if g >= 8 and abs(d[1]) >= abs(d[0]):
            status = "flag:wda2_not_closer"
        return [fmt_float(g), *(fmt_float(v) for v in (e1, e2, e_var, ref, *d)), status]
    except (WronskianError, ArithmeticError, ValueError) as exc:
        msg = str(exc).replace(",", ";").replace("\n", " ")
        return [fmt_float(g)] + [""] * 7 + [f"error:{type(exc).__name__}:{msg}"]


def compare_grid(g_min, g_max, steps):
    if steps == 1:
        return [g_min]
    return [float(v) for v in np.linspace(g_min, g_max, steps)]


def cmd_compare(cfg):
    gs = compare_grid(cfg.g_min, cfg.g_max, cfg.steps)
    with ThreadPoolExecutor() as pool:
        rows = list(pool.map(lambda g: compare_row(g, cfg.order, cfg.n), gs))
    payload = {"rows": [dict(zip(COMPARE_HEADER, r)) for r in rows]}
    _dump(payload, cfg, rows, COMPARE_HEADER)
    return 1 if any(r[-1].startswith("error") for r in rows) else 0


def oracle_payload(cfg):
    if cfg.potential == "harmonic":
        prob = harmonic_problem(cfg.n, cfg.x_max or 12.0)
        label = {"potential": "harmonic"}
    else:
        prob = double_well_problem(cfg.g, cfg.n, cfg.x_max)
        label = {"potential": "double-well", "g": _num(cfg.g)}
    res = fd_ground_state(prob)
    return {
        **label,
        "n": prob.n_points,
        "x_max": _num(prob.x_max),
        "energy": _num(res.energy),
        "discretization_bound": _num(res.discretization_bound),
        "extrapolated": _num(res.extrapolated),
    }


def cmd_oracle(cfg):
    payload = oracle_payload(cfg)
    _dump(payload, cfg, [[k, v] for k, v in payload.items()], ["key", "value"])
    return 0


def energy_payload(cfg):
    g = cfg.g
    out = {"g": _num(g), "order": cfg.order, "closure": cfg.closure}
    wanted = METHODS if cfg.method == "all" else (cfg.method,)
    if "wda1" in wanted:
        out["E_wda1"] = _num(g + dw.e1_numeric(g))
        out["E_wda1_series"] = _num(dw.e1_series(cfg.order).evaluate(g))
    if "wda2" in wanted:
        out["E_wda2"] = _num(g + dw.e2_numeric(g, cfg.closure, cfg.n)[1])
        out["E_wda2_series"] = _num(dw.e2_series(cfg.order).evaluate(g))
    if "variational" in wanted:
        f_star, e_star = dw.variational_minimize(g)
        out["f_star"] = _num(f_star)
        out["E_var"] = _num(e_star)
        out["E_var_series"] = _num(dw.variational_series(cfg.order)[1].evaluate(g))
    return out


def cmd_energy(cfg):
    payload = energy_payload(cfg)
    _dump(payload, cfg, [[k, v] for k, v in payload.items()], ["key", "value"])
    return 0


# -- self test -----------------------------------------------------------------------

APPENDIX_GOLDENS = {
    "inv_sq": (Fraction(1, 4), Fraction(-1, 4), Fraction(11, 48)),
    "inv_quad": (Fraction(1, 16), Fraction(-1, 8), Fraction(17, 96)),
    "du": (Fraction(1, 2), Fraction(-1, 6), Fraction(5, 48)),
}


def _check_abel(fault):
    return abs(abel_wronskian(2.0, 0.0, 1.0, 1.0) - math.exp(-2.0)) < 1e-12


def _check_trial_residual(fault):
    x = np.linspace(0.0, 6.0, 100)
    return all(np.max(np.abs(dw.TrialFunction(g).residual(x))) < 1e-8 * g for g in (5.0, 10.0, 40.0))


def _check_appendix(fault):
    ok = True
    for target, gold in APPENDIX_GOLDENS.items():
        s = appendix_substitution(target, "plus", Fraction(3, 2))
        powers = (Fraction(-1, 2), 0, Fraction(1, 2)) if target == "du" else (0, Fraction(1, 2), 1)
        got = [s.coefficient(p) for p in powers]
        if fault == "appendix" and target == "inv_sq":
            got[2] += Fraction(1, 1000)
        ok &= tuple(got) == gold
    return ok


def _check_triple(fault):
    t = StandardTriple(0, 0, 0)
    return all(abs(standard_triple_value(t, g) * 8 * g ** 3 - 1) < 1e-10 for g in (1.0, 2.0, 5.0))


def _check_harmonic(fault):
    return abs(fd_ground_state(harmonic_problem()).energy - 0.5) < 1e-6


SELFTEST_CHECKS = (
    ("abel_wronskian", _check_abel),
    ("trial_function_identity", _check_trial_residual),
    ("appendix_rationals", _check_appendix),
    ("standard_triple_closed_form", _check_triple),
    ("harmonic_oracle", _check_harmonic),
)


def cmd_selftest(cfg):
    failed = []
    out = cfg.out and open(cfg.out, "w", encoding="utf-8")
    stream = out or sys.stdout
    try:
        for name, check in SELFTEST_CHECKS:
            try:
                ok = bool(check(cfg.inject_fault))
            except Exception as exc:  # a crashing check is a failing check
                ok = False
                name = f"{name} ({type(exc).__name__}: {exc})"
            stream.write(f"{'PASS' if ok else 'FAIL'} {name}\n")
            if not ok:
                failed.append(name)
    finally:
        if out:
            out.close()
    return 1 if failed else 0


COMMANDS = {
    "series": cmd_series,
    "compare": cmd_compare,
    "oracle": cmd_oracle,
    "energy": cmd_energy,
    "selftest": cmd_selftest,
}


# -- argument handling -----------------------------------------------------------------

def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _order(text):
    v = int(text)
    if not 1 <= v <= 6:
        raise argparse.ArgumentTypeError("order must be in [1, 6]")
    return v


def _count(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="wronskian", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=FORMATS)
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--config", metavar="PATH", help="key=value file; flags take precedence")
        p.add_argument("--order", type=_order)
        p.add_argument("--closure", choices=CLOSURES)

    p = sub.add_parser("series", help="1/g expansion coefficients")
    common(p)
    p.add_argument("--method", choices=METHODS)

    p = sub.add_parser("compare", help="finite-g comparison table against the oracle")
    common(p)
    p.add_argument("--g", type=_positive, help="shorthand for --g-min G --g-max G --steps 1")
    p.add_argument("--g-min", dest="g_min", type=_positive)
    p.add_argument("--g-max", dest="g_max", type=_positive)
    p.add_argument("--steps", type=_count)
    p.add_argument("--n", type=_count, help=argparse.SUPPRESS)

    p = sub.add_parser("oracle", help="finite-difference ground state")
    common(p)
    p.add_argument("--g", type=_positive)
    p.add_argument("--n", type=_count)
    p.add_argument("--x-max", dest="x_max", type=_positive)
    p.add_argument("--potential", choices=("double-well", "harmonic"), help=argparse.SUPPRESS)

    p = sub.add_parser("energy", help="finite-g energies of each method")
    common(p)
    p.add_argument("--g", type=_positive)
    p.add_argument("--method", choices=METHODS + ("all",))
    p.add_argument("--n", type=_count)

    p = sub.add_parser("selftest", help="quick invariant battery")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--inject-fault", dest="inject_fault", help=argparse.SUPPRESS)
    return parser


_CONVERTERS = {
    "g": _positive, "g_min": _positive, "g_max": _positive, "x_max": _positive,
    "steps": _count, "n": _count, "order": _order,
}


def read_config(path):
    """Parse a ``key = value`` file (``#`` comments, dashes or underscores in keys)."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def build_config(args, parser):
    given = {k: v for k, v in vars(args).items() if v is not None and k != "config"}
    if getattr(args, "config", None):
        try:
            for key, raw in read_config(args.config).items():
                if key not in {f.name for f in fields(RunConfig)} or key == "command":
                    parser.error(f"unknown config key {key!r}")
                if key not in given:
                    given[key] = _CONVERTERS.get(key, str)(raw)
        except (OSError, ValueError, argparse.ArgumentTypeError) as exc:
            parser.error(str(exc))
    cfg = RunConfig(**given)
    if cfg.command == "compare":
        if cfg.g is not None:
            cfg = replace(cfg, g_min=cfg.g_min or cfg.g, g_max=cfg.g_max or cfg.g,
                          steps=1 if cfg.g_min is None and cfg.g_max is None else cfg.steps)
        if cfg.g_min is None or cfg.g_max is None:
            parser.error("compare needs --g-min and --g-max (or --g)")
        if cfg.g_min > cfg.g_max:
            parser.error("--g-min must not exceed --g-max")
        if cfg.steps > 1 and cfg.g_min == cfg.g_max:
            parser.error("--steps > 1 needs g_min < g_max")
    if cfg.command == "energy" and cfg.g is None:
        parser.error("energy needs --g")
    if cfg.command == "oracle" and cfg.potential == "double-well" and cfg.g is None:
        parser.error("oracle needs --g")
    if cfg.method is None:
        cfg = replace(cfg, method="all" if cfg.command == "energy" else "wda2")
    return cfg


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = build_config(args, parser)
    try:
        return COMMANDS[cfg.command](cfg)
    except WronskianError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
