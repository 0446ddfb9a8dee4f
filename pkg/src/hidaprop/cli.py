"""Batch front-end: ``hidaprop <mode> --config run.json [--out F] [--format csv|json] [--seed N]``.

The config is one JSON document::

    {
      "oscillator":    {"t0": 0, "t": 0.5, "k": 1, "x0": 0.3, "x": 0.3},
      "test_function": {"breakpoints": [...], "coefficients": [[c0, c1, c2, c3], ...]}
                       or {"hermite": {"breakpoints": [...], "values": [...], "slopes": [...]}},
      "measure":       {"components": [{"coefficient": 0.2,
                                        "spatial": {"atom": 0.0}
                                                   or {"density": {"breakpoints": [...], "values": [...]}},
                                        "temporal": {"breakpoints": [...], "values": [...]}}]},
      "grids":         {"x": [..] or {"start": a, "stop": b, "num": n}, "t": same},
      "tolerances":    {"tol": 1e-10, "max_order": 30, "quad_tol": null},
      "bounds":        {"beta": null, "q": 4, "samples": 20},
      "verify":        {"suites": ["schrodinger", ...]},
      "seed": 0,
      "output":        {"path": null, "format": "csv"}
    }

Every section except ``oscillator`` is optional.  A missing ``temporal``
part means the uniform density on the window; ``beta: null`` means the
measure's compact support is used (the Gaussian-tail condition then holds
for every beta).  Exit codes: 0 success, 1 invalid input, 2 numeric failure.
"""
from __future__ import annotations

import argparse
import cmath
import io
import json
import math
import platform
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import scipy

from . import __version__
from .dyson import BoundParams, log_tail_bound_cn, propagator_series
from .errors import HidaPropError, MaxOrderExceeded, NumericError, ValidationError
from .kernels import OscillatorProblem, harmonic_kernel
from .measures import (Atom, MeasureComponent, SignedMeasure, StepDensity, check_condition_i,
                       marginals)
from .testfn import TestFunction
from .transforms import PinConfiguration, growth_bound_check
from .verify import SUITES, random_f, run_suites

MODES = ("kernel", "series", "verify", "bounds")
FORMATS = ("csv", "json")
_TOP_KEYS = {"mode", "oscillator", "test_function", "measure", "grids", "tolerances",
             "bounds", "verify", "seed", "output", "pins"}


# validation -----------------------------------------------------------------

class _Checker:
    def __init__(self):
        self.problems: list[str] = []

    def add(self, path, msg):
        self.problems.append(f"{path}: {msg}")

    def number(self, obj, key, path, required=True, default=None):
        if key not in obj:
            if required:
                self.add(f"{path}.{key}", "missing")
            return default
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.add(f"{path}.{key}", f"expected a finite number, got {v!r}")
            return default
        return float(v)

    def numbers(self, obj, key, path, min_len=1):
        v = obj.get(key) if isinstance(obj, dict) else None
        if not isinstance(v, list) or len(v) < min_len:
            self.add(f"{path}.{key}", f"expected a list of at least {min_len} numbers")
            return None
        for i, x in enumerate(v):
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                self.add(f"{path}.{key}[{i}]", f"expected a finite number, got {x!r}")
                return None
        return [float(x) for x in v]

    def section(self, cfg, key, required=False):
        if key not in cfg:
            if required:
                self.add(key, "missing section")
            return None
        if not isinstance(cfg[key], dict):
            self.add(key, "expected an object")
            return None
        return cfg[key]


def _steps(ch, obj, path, what):
    if not isinstance(obj, dict):
        ch.add(path, "expected an object with breakpoints and values")
        return None
    if "atom" in obj or "atoms" in obj:
        ch.add(path, f"{what} atoms are not representable (a bounded density is required)")
        return None
    b = ch.numbers(obj, "breakpoints", path, 2)
    v = ch.numbers(obj, "values", path, 1)
    if b is None or v is None:
        return None
    if any(y <= x for x, y in zip(b, b[1:])):
        ch.add(f"{path}.breakpoints", "must be strictly increasing")
        return None
    if len(v) != len(b) - 1:
        ch.add(f"{path}.values", f"need {len(b) - 1} values, got {len(v)}")
        return None
    for i, x in enumerate(v):
        if x < 0:
            ch.add(f"{path}.values[{i}]", f"densities must be nonnegative, got {x}")
            return None
    return StepDensity(tuple(b), tuple(v))


def _build_problem(ch, cfg):
    osc = ch.section(cfg, "oscillator", required=True)
    if osc is None:
        return None
    vals = {key: ch.number(osc, key, "oscillator") for key in ("t0", "t", "k", "x0", "x")}
    if any(v is None for v in vals.values()):
        return None
    if not vals["t"] > vals["t0"]:
        ch.add("oscillator.t", f"InvalidWindow: need t > t0, got [{vals['t0']}, {vals['t']}]")
        return None
    if vals["k"] < 0:
        ch.add("oscillator.k", f"FrequencyOutOfRange: k must be >= 0, got {vals['k']}")
        return None
    kd = vals["k"] * (vals["t"] - vals["t0"])
    if kd >= math.pi / 2:
        ch.add("oscillator.k", f"FrequencyOutOfRange: k|Delta| = {kd:g} >= pi/2")
        return None
    return OscillatorProblem.make(**vals)


def _build_f(ch, cfg):
    tf = ch.section(cfg, "test_function")
    if tf is None:
        return None
    try:
        if "hermite" in tf:
            h = tf["hermite"]
            parts = [ch.numbers(h, key, "test_function.hermite", 2 if key == "breakpoints" else 1)
                     for key in ("breakpoints", "values", "slopes")]
            if any(x is None for x in parts):
                return None
            return TestFunction.from_hermite(*parts)
        b = ch.numbers(tf, "breakpoints", "test_function", 2)
        coeffs = tf.get("coefficients")
        if b is None:
            return None
        if (not isinstance(coeffs, list) or len(coeffs) != len(b) - 1
                or not all(isinstance(row, list) and 1 <= len(row) <= 4 for row in coeffs)):
            ch.add("test_function.coefficients",
                   f"expected {len(b) - 1} rows of at most 4 local coefficients")
            return None
        return TestFunction(b, [list(map(float, row)) + [0.0] * (4 - len(row)) for row in coeffs])
    except (ValidationError, ValueError, TypeError) as exc:
        ch.add("test_function", f"{type(exc).__name__}: {exc}")
        return None


def _build_measure(ch, cfg, p):
    ms = ch.section(cfg, "measure")
    if ms is None or p is None:
        return None
    comps = ms.get("components")
    if not isinstance(comps, list):
        ch.add("measure.components", "expected a list")
        return None
    out = []
    for i, comp in enumerate(comps):
        path = f"measure.components[{i}]"
        if not isinstance(comp, dict):
            ch.add(path, "expected an object")
            return None
        c = ch.number(comp, "coefficient", path)
        sp = comp.get("spatial")
        if not isinstance(sp, dict):
            ch.add(f"{path}.spatial", "expected {'atom': a} or {'density': {...}}")
            return None
        if "atom" in sp:
            a = ch.number(sp, "atom", f"{path}.spatial")
            spatial = None if a is None else Atom(a)
        elif "density" in sp:
            spatial = _steps(ch, sp["density"], f"{path}.spatial.density", "spatial")
        else:
            ch.add(f"{path}.spatial", "expected {'atom': a} or {'density': {...}}")
            return None
        if "temporal" in comp:
            temporal = _steps(ch, comp["temporal"], f"{path}.temporal", "temporal")
        else:
            temporal = StepDensity((p.t0, p.t), (1.0,))
        if c is None or spatial is None or temporal is None:
            return None
        b = temporal.breakpoints
        if b[0] < p.t0 - 1e-12 or b[-1] > p.t + 1e-12:
            ch.add(f"{path}.temporal.breakpoints",
                   f"support [{b[0]}, {b[-1]}] leaves the window [{p.t0}, {p.t}]")
            return None
        out.append(MeasureComponent(c, spatial, temporal))
    return SignedMeasure(tuple(out), p.window)


def _grid(ch, grids, key, default):
    if grids is None or key not in grids:
        return [default]
    g = grids[key]
    path = f"grids.{key}"
    if isinstance(g, list):
        vals = ch.numbers(grids, key, "grids", 1)
        return vals
    if isinstance(g, dict):
        a, b = ch.number(g, "start", path), ch.number(g, "stop", path)
        n = g.get("num")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            ch.add(f"{path}.num", f"expected a positive integer, got {n!r}")
            return None
        if a is None or b is None:
            return None
        return np.linspace(a, b, n).tolist()
    ch.add(path, "expected a list or {start, stop, num}")
    return None


def _build_pins(ch, cfg, p):
    pins = cfg.get("pins")
    if pins is None:
        return None
    if not isinstance(pins, list) or not all(isinstance(x, list) and len(x) == 2 for x in pins):
        ch.add("pins", "expected a list of [t_j, x_j] pairs")
        return None
    try:
        conf = PinConfiguration(tuple((float(a), float(b)) for a, b in pins))
        if p is not None:
            conf.check(p)
        return conf
    except (ValidationError, TypeError, ValueError) as exc:
        ch.add("pins", f"InvalidPins: {exc}")
        return None


@dataclass
class RunConfig:
    mode: str
    problem: OscillatorProblem
    f: TestFunction | None
    measure: SignedMeasure | None
    x_grid: list
    t_grid: list
    tol: float
    max_order: int
    quad_tol: float | None
    beta: float | None
    q: float
    samples: int
    suites: list
    seed: int
    out: str | None
    fmt: str
    pins: PinConfiguration | None
    raw: dict = field(repr=False, default_factory=dict)


def _analyse(cfg, mode=None):
    """Build every domain object, collecting diagnostics instead of raising."""
    ch = _Checker()
    if not isinstance(cfg, dict):
        ch.add("<root>", "expected a JSON object")
        return ch, None
    for key in sorted(set(cfg) - _TOP_KEYS):
        ch.add(key, "unknown key")
    mode = mode or cfg.get("mode")
    if cfg.get("mode") is not None and mode != cfg.get("mode"):
        ch.add("mode", f"config says {cfg.get('mode')!r} but {mode!r} was requested")
    if mode not in MODES:
        ch.add("mode", f"expected one of {MODES}, got {mode!r}")
    p = _build_problem(ch, cfg)
    f = _build_f(ch, cfg)
    nu = _build_measure(ch, cfg, p)
    pins = _build_pins(ch, cfg, p)
    grids = ch.section(cfg, "grids")
    x_grid = _grid(ch, grids, "x", None if p is None else p.x)
    t_grid = _grid(ch, grids, "t", None if p is None else p.t)
    if p is not None and t_grid:
        for i, tt in enumerate(t_grid):
            if not tt > p.t0:
                ch.add(f"grids.t[{i}]", f"InvalidWindow: need t > t0 = {p.t0}, got {tt}")
            elif p.k * (tt - p.t0) >= math.pi / 2:
                ch.add(f"grids.t[{i}]", f"FrequencyOutOfRange: k|Delta| = "
                       f"{p.k * (tt - p.t0):g} >= pi/2")
    tols = ch.section(cfg, "tolerances") or {}
    tol = ch.number(tols, "tol", "tolerances", required=False, default=1e-10)
    if tol is not None and not tol > 0:
        ch.add("tolerances.tol", "must be positive")
    max_order = tols.get("max_order", 30)
    if not isinstance(max_order, int) or isinstance(max_order, bool) or max_order < 0:
        ch.add("tolerances.max_order", f"expected a nonnegative integer, got {max_order!r}")
    quad_tol = None
    if tols.get("quad_tol") is not None:
        quad_tol = ch.number(tols, "quad_tol", "tolerances")
    bnd = ch.section(cfg, "bounds") or {}
    beta = None if bnd.get("beta") is None else ch.number(bnd, "beta", "bounds")
    q = ch.number(bnd, "q", "bounds", required=False, default=4.0)
    if q is not None and not q > 2:
        ch.add("bounds.q", f"BoundParams: need q > 2, got {q}")
    samples = bnd.get("samples", 20)
    if not isinstance(samples, int) or isinstance(samples, bool) or samples < 0:
        ch.add("bounds.samples", f"expected a nonnegative integer, got {samples!r}")
    if nu is not None and beta is not None:
        if not beta > 0:
            ch.add("bounds.beta", "must be positive")
        elif not check_condition_i(nu, beta, max(nu.support_radius(), 1e-12)):
            ch.add("bounds.beta", f"Gaussian tail condition fails for beta = {beta}")
        elif q is not None and q > 2 and not min(beta / (2 * q), 1.0) * q < beta:
            ch.add("bounds.beta", "no admissible gamma")
    ver = ch.section(cfg, "verify") or {}
    suites = ver.get("suites", list(SUITES))
    if not isinstance(suites, list) or any(s not in SUITES for s in suites):
        ch.add("verify.suites", f"expected names from {sorted(SUITES)}")
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        ch.add("seed", f"expected a nonnegative integer, got {seed!r}")
    out = ch.section(cfg, "output") or {}
    fmt = out.get("format", "csv")
    if fmt not in FORMATS:
        ch.add("output.format", f"expected one of {FORMATS}, got {fmt!r}")
    if mode in ("series", "bounds") and "measure" not in cfg:
        ch.add("measure", f"mode {mode} needs a measure")
    if ch.problems:
        return ch, None
    return ch, RunConfig(mode, p, f, nu, x_grid, t_grid, tol, max_order, quad_tol, beta, q,
                         samples, suites, seed, out.get("path"), fmt, pins, cfg)


def validate(config) -> list[str]:
    """Diagnostics for a config (dict or JSON text); empty when it is valid."""
    if isinstance(config, str):
        try:
            config = json.loads(config)
        except json.JSONDecodeError as exc:
            return [f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]
    ch, _ = _analyse(config)
    return ch.problems


def parse_config(text: str, mode: str | None = None) -> RunConfig:
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    ch, rc = _analyse(cfg, mode)
    if rc is None:
        raise ValidationError(ch.problems[0])
    return rc


def measure_summary(nu: SignedMeasure | None) -> dict:
    if nu is None:
        return {}
    m = marginals(nu)
    return {"nu_x_total": m.nu_x_total, "nu_t_density_sup": m.nu_t_density_sup,
            "certified_beta": "any" if m.gaussian_tail_beta is None else m.gaussian_tail_beta,
            "tail_radius": m.tail_radius}


# modes ----------------------------------------------------------------------

def _c(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def _kernel_rows(rc: RunConfig):
    rows = []
    for t in rc.t_grid:
        for x in rc.x_grid:
            K = harmonic_kernel(rc.problem.with_(x=x, t=t), rc.f)
            rows.append({"x": x, "t": t, "re": K.real, "im": K.imag,
                         "modulus": abs(K), "phase": cmath.phase(K)})
    return {"kernel": rows}


def _series_tables(rc: RunConfig):
    p = rc.problem
    prop, dump = [], None
    for x in rc.x_grid:
        q = p.with_(x=x)
        res = propagator_series(rc.measure, q, rc.f, tol=rc.tol, max_order=rc.max_order,
                                beta=rc.beta, quad_tol=rc.quad_tol)
        v = res.value
        prop.append({"x": x, "t": p.t, "re": v.real, "im": v.imag, "modulus": abs(v),
                     "phase": cmath.phase(v), "truncation_order": res.truncation_order,
                     "certified_error": res.certified_error,
                     "refinement_defect": res.refinement_defect})
        if dump is None:
            dump = [{"n": n, "term_re": t.real, "term_im": t.imag, "partial_re": s.real,
                     "partial_im": s.imag, "abs_term": abs(t), "C_n": c}
                    for n, (t, s, c) in enumerate(zip(res.terms, res.partial_sums,
                                                      res.tail_bounds))]
    return {"series": dump, "propagator": prop}


def _verify_rows(rc: RunConfig):
    reports = run_suites(rc.seed, rc.suites)
    rows = [{"suite": r.name, "passed": r.passed, "max_defect": r.max_defect,
             "threshold": r.threshold, "samples": r.samples} for r in reports]
    return {"verify": rows}, all(r.passed for r in reports)


def _bounds_tables(rc: RunConfig):
    p, nu = rc.problem, rc.measure
    bp = BoundParams.default(nu, p, rc.beta, rc.q)
    cn = []
    prev = None
    for n in range(rc.max_order + 1):
        lc = log_tail_bound_cn(n, nu, p, bp)
        cn.append({"n": n, "log_C_n": lc, "C_n": math.exp(lc) if lc < 700 else math.inf,
                   "ratio": math.exp(lc - prev) if prev is not None and prev > -math.inf
                   else math.nan})
        prev = lc
    rng = np.random.default_rng(rc.seed)
    samples = []
    pins = rc.pins or PinConfiguration(((0.5 * (p.t0 + p.t), 0.5 * (p.x0 + p.x)),))
    for i in range(rc.samples):
        f = random_f(rng, p)
        z = complex(*rng.uniform(-1.4, 1.4, 2))
        lhs, rhs = growth_bound_check(p, pins, f, z, bp.gamma)
        samples.append({"sample": i, "z_re": z.real, "z_im": z.imag, "lhs": lhs, "rhs": rhs,
                        "ratio": lhs / rhs})
    params = {"gamma": bp.gamma, "q": bp.q, "p": bp.p, "L": bp.L, "Q": bp.Q}
    return {"C_n": cn, "growth_bound": samples}, params


# output ---------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".16e")
    return str(v)


def render_csv(tables: dict) -> str:
    """One table: plain CSV.  Several: ``# name`` blocks separated by blank lines."""
    buf = io.StringIO()
    many = len(tables) > 1
    for i, (name, rows) in enumerate(tables.items()):
        if many:
            if i:
                buf.write("\n")
            buf.write(f"# {name}\n")
        if not rows:
            continue
        cols = list(rows[0])
        buf.write(",".join(cols) + "\n")
        for row in rows:
            buf.write(",".join(_fmt(row[c]) for c in cols) + "\n")
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, complex):
        return _c(obj)
    return obj


def versions() -> dict:
    return {"hidaprop": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def render_json(mode, raw, results, diagnostics) -> str:
    doc = {"mode": mode, "config_echo": raw, "results": results,
           "diagnostics": diagnostics, "versions": versions()}
    return json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n"


def validate_output(doc: dict) -> list[str]:
    """Schema check of an emitted JSON document."""
    problems = []
    for key in ("mode", "config_echo", "results", "diagnostics", "versions"):
        if key not in doc:
            problems.append(f"missing key {key!r}")
    if problems:
        return problems
    if doc["mode"] not in MODES:
        problems.append(f"unknown mode {doc['mode']!r}")
    if not isinstance(doc["results"], dict):
        problems.append("results must be an object of tables")
    else:
        for name, rows in doc["results"].items():
            if not isinstance(rows, list) or not all(isinstance(r, dict) for r in rows):
                problems.append(f"results.{name} must be a list of rows")
    if not isinstance(doc["diagnostics"], dict):
        problems.append("diagnostics must be an object")
    problems += [f"config_echo: {p}" for p in validate(doc["config_echo"])
                 if not p.startswith("mode:")]
    return problems


def run(rc: RunConfig) -> tuple[int, str]:
    """Execute a parsed config; returns (exit code, rendered output)."""
    diagnostics: dict[str, Any] = {"problems": [], "measure": measure_summary(rc.measure)}
    if rc.pins is not None:
        diagnostics["pins"] = rc.pins.diagnostics(rc.problem)
    code = 0
    if rc.mode == "kernel":
        tables = _kernel_rows(rc)
    elif rc.mode == "series":
        tables = _series_tables(rc)
    elif rc.mode == "verify":
        tables, ok = _verify_rows(rc)
        code = 0 if ok else 2
    else:
        tables, params = _bounds_tables(rc)
        diagnostics["bound_params"] = params
    if rc.fmt == "json":
        return code, render_json(rc.mode, rc.raw, tables, diagnostics)
    return code, render_csv(tables)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hidaprop", description=__doc__.splitlines()[0])
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("--format", choices=FORMATS, help="overrides output.format")
    ap.add_argument("--seed", type=int, help="overrides the config seed")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        rc = parse_config(text, args.mode)
        if args.format:
            rc.fmt = args.format
        if args.seed is not None:
            rc.seed = args.seed
        out_path = args.out or rc.out
        code, rendered = run(rc)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except MaxOrderExceeded as exc:
        print(f"numeric error: MaxOrderExceeded: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except HidaPropError as exc:  # pragma: no cover - every subclass is one of the above
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(rendered)
    else:
        sys.stdout.write(rendered)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
