"""``psilcf`` command line.

Exit codes: 0 success or PASS, 1 a check or scan FAILed, 2 usage or
configuration error.  Every run writes ``manifest.json`` to the output
directory (``--out``, else ``$PSILCF_OUTPUT_DIR``, else ``./psilcf-out``).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from pathlib import Path

from .. import __version__
from ..exprlang import ExprError
from ..funclass import (
    PsiSpec,
    PsiSpecError,
    RepresentationError,
    RepresentationSpec,
    build_lcf,
    build_psi_lcf,
    build_svf,
    check_class_K,
    check_class_K1,
    check_psi_lcf,
    check_upper_power,
    gamma,
    gamma_inverse,
    theta,
    theta_inverse,
)
from ..funclass.grids import geometric_grid, tail_half
from ..funclass.reports import jsonable, write_rows, write_summary
from ..ldt_mc import (
    Experiment,
    ExperimentError,
    crude_mc,
    big_jump_main_term,
    psi_consistency_report,
    ratio_scan,
    write_manifest,
    write_plot_csv,
    write_results_csv,
)
from ..tails import TailModel, TailModelError, ZoneError, ZoneSpec
from .svg import plot_from_csv

OUT_ENV = "PSILCF_OUTPUT_DIR"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# argument table: (flag, dest, type, default, help)

_GRID = [
    ("--x0", "x0", float, 1e3, "first point of the geometric x-grid"),
    ("--points", "points", int, 24, "number of grid points (the tail half is used)"),
]

_TAIL = [
    ("--tail", "tail", str, "x^-3", "right tail F(x) for x >= x0 as an expression"),
    ("--alpha", "alpha", float, None, "tail index (inferred for power tails)"),
    ("--tail-x0", "tail_x0", float, None, "left end of the tail (default: F(x0) = 1)"),
    ("--V", "V", str, None, "dominating function V >= F (default F)"),
    ("--c-left", "c_left", float, 1.0, "left-tail bound constant"),
]

COMMANDS = {
    "check-psi-lcf": [
        ("--g", "g", str, None, "function g as an expression"),
        ("--psi", "psi", str, "sqrt(x)", "width function psi"),
        ("--v", "v", float, [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0], "shifts v", "list"),
        ("--tol", "tol", float, 1e-2, "tolerance on the sup-deviation at the largest x"),
        ("--c", "c", float, 0.5, "admissibility constant in x + v psi(x) >= c x"),
        *_GRID,
    ],
    "check-class": [
        ("--psi", "psi", str, None, "width function psi"),
        ("--cls", "cls", str, "K", "class to check: K or K1"),
        ("--vmax", "vmax", float, 10.0, "largest v for condition (A)"),
        ("--psi-x0", "psi_x0", float, 1.0, "left end of the psi domain"),
    ],
    "gamma": [
        ("--psi", "psi", str, None, "width function psi"),
        ("--x", "x", float, None, "points x >= 1", "list"),
        ("--inverse", "inverse", float, None, "levels t for gamma^{-1}(t)", "list"),
    ],
    "theta": [
        ("--psi", "psi", str, None, "width function psi"),
        ("--x", "x", float, None, "points x", "list"),
        ("--inverse", "inverse", float, None, "levels t for theta^{-1}(t)", "list"),
    ],
    "build": [
        ("--mode", "mode", str, "psi", "svf, lcf or psi"),
        ("--cfun", "cfun", str, "1", "c(t) with a positive finite limit"),
        ("--eps", "eps", str, "1/ln(e+x)", "eps(t) tending to alpha"),
        ("--alpha", "alpha", float, 0.0, "limit of eps (regularly varying mode)"),
        ("--psi", "psi", str, "sqrt(x)", "width function (mode psi)"),
        ("--x", "x", float, [1e2, 1e4, 1e6], "evaluation points", "list"),
        ("--check", "check", "flag", False, "run the psi-l.c.f. checker on the result"),
        ("--tol", "tol", float, 1e-2, "checker tolerance"),
    ],
    "upper-power": [
        ("--g", "g", str, None, "function g as an expression"),
        ("--p", "p", float, [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9], "p grid in (0, 1)", "list"),
        ("--margin", "margin", float, 1e-6, "required lower bound on inf c(p)"),
        *_GRID,
    ],
    "simulate": [
        *_TAIL,
        ("--n", "n", int, 100, "number of summands"),
        ("--x", "x", float, 100.0, "level x"),
        ("--reps", "reps", int, 1_000_000, "replications"),
        ("--seed", "seed", int, 0, "RNG seed"),
        ("--estimator", "estimator", str, "crude", "crude, big-jump or both"),
        ("--N", "N", float, 5.0, "window multiplier for the big-jump term"),
        ("--jobs", "jobs", int, 1, "worker processes"),
    ],
    "ratio-scan": [
        *_TAIL,
        ("--h", "h", str, "n", "zone boundary h(n)"),
        ("--regime", "regime", str, None, "finite-variance or infinite-variance (default from alpha)"),
        ("--ns", "ns", int, [50, 100, 200, 400], "n values", "list"),
        ("--reps", "reps", int, 1_000_000, "replications per cell"),
        ("--seed", "seed", int, 0, "RNG seed"),
        ("--estimator", "estimator", str, "crude", "crude, big-jump or both"),
        ("--N", "N", float, 5.0, "window multiplier for the big-jump term"),
        ("--band", "band", float, [0.7, 1.4], "acceptance band for the last ratio", "list"),
        ("--psi", "psi", str, None, "override the zone-matched psi"),
        ("--min-hits", "min_hits", float, None, "raise crude reps per cell to this many expected hits"),
        ("--jobs", "jobs", int, 1, "worker processes"),
        ("--plot", "plot", "flag", False, "also write plot.svg"),
    ],
    "report": [
        ("--dir", "dir", str, None, "directory holding plot.csv and manifest.json"),
    ],
}

REQUIRED = {"check-psi-lcf": ["g"], "check-class": ["psi"], "gamma": ["psi"], "theta": ["psi"],
            "upper-power": ["g"], "report": ["dir"]}


def _spec(entry):
    flag, dest, typ, default, help_ = entry[:5]
    return flag, dest, typ, default, help_, (entry[5] if len(entry) > 5 else None)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="psilcf", description="psi-locally constant functions and large deviations")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    p.subcommands = {}
    for name, entries in COMMANDS.items():
        sp = sub.add_parser(name, help=(name.replace("-", " ")))
        p.subcommands[name] = sp
        sp.add_argument("--config", default=None, help="JSON file with option values; flags override it")
        sp.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./psilcf-out)")
        for e in entries:
            flag, dest, typ, default, help_, kind = _spec(e)
            if typ == "flag":
                sp.add_argument(flag, dest=dest, action="store_const", const=True, default=None, help=help_)
            elif kind == "list":
                sp.add_argument(flag, dest=dest, type=typ, nargs="+", default=None, help=help_)
            else:
                sp.add_argument(flag, dest=dest, type=typ, default=None, help=help_)
    return p


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags; unknown config keys are rejected."""
    entries = [_spec(e) for e in COMMANDS[command]]
    cfg = {dest: default for _, dest, _, default, _, _ in entries}
    cfg["out"] = None
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        doc = {k.replace("-", "_"): v for k, v in doc.items() if k != "command" or v == command}
        unknown = sorted(set(doc) - set(cfg))
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
        types = {dest: (typ, kind) for _, dest, typ, _, _, kind in entries}
        for k, v in doc.items():
            cfg[k] = _coerce(k, v, *types.get(k, (str, None)))
    for k in cfg:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    missing = [k for k in REQUIRED.get(command, []) if cfg.get(k) in (None, "")]
    if missing:
        raise ConfigError(f"{command} needs {', '.join('--' + m for m in missing)}")
    return cfg


def _coerce(key, value, typ, kind):
    if value is None:
        return None
    try:
        if typ == "flag":
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind == "list":
            if not isinstance(value, list):
                value = [value]
            return [typ(v) for v in value]
        return typ(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {key!r} has an invalid value {value!r}") from exc


def output_dir(cfg: dict) -> Path:
    d = Path(cfg.get("out") or os.environ.get(OUT_ENV) or "psilcf-out")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _manifest(out: Path, command: str, cfg: dict, verdicts: dict, extra: dict | None = None) -> None:
    doc = {"tool": "psilcf", "version": __version__, "command": command, "config": cfg, "verdicts": verdicts}
    if extra:
        doc.update(extra)
    write_summary(out / "manifest.json", doc)


def _fmt(v: float) -> str:
    return f"{v:.15g}" if isinstance(v, float) else str(v)


def _xgrid(cfg) -> list[float]:
    if cfg["points"] < 4 or not cfg["x0"] > 0:
        raise ConfigError("grid needs x0 > 0 and at least 4 points")
    return tail_half(geometric_grid(cfg["x0"], cfg["points"]))


# --------------------------------------------------------------------------
# commands


def cmd_check_psi_lcf(cfg, out):
    if not cfg["tol"] > 0:
        raise ConfigError("tol must be positive")
    psi = PsiSpec(cfg["psi"])
    d = check_psi_lcf(cfg["g"], psi, vlist=cfg["v"], xgrid=_xgrid(cfg), tol=cfg["tol"], c=cfg["c"])
    write_rows(out / "check.csv", d.rows())
    summary = d.summary()
    print(json.dumps(jsonable(summary), sort_keys=True))
    _manifest(out, "check-psi-lcf", cfg, {"psi_lcf": d.verdict.value}, {"summary": summary})
    return EXIT_OK if d.passed else EXIT_FAIL


def cmd_check_class(cfg, out):
    psi = PsiSpec(cfg["psi"], x0=cfg["psi_x0"])
    cls = cfg["cls"].upper()
    if cls == "K":
        v = check_class_K(psi, vmax=cfg["vmax"])
        rep = v.details["report"]
        write_rows(out / "check.csv", rep.rows())
    elif cls == "K1":
        v = check_class_K1(psi)
        rows = ({"check": "class_K1_alpha", "psi": psi.label, "x": float(x), "value": float(a),
                 "verdict": v.verdict.value} for x, a in zip(v.details["x"], v.details["alpha_trace"]))
        write_rows(out / "check.csv", rows)
    else:
        raise ConfigError(f"unknown class {cfg['cls']!r}; use K or K1")
    summary = v.summary()
    print(json.dumps(jsonable(summary), sort_keys=True))
    _manifest(out, "check-class", cfg, {f"class_{cls}": v.verdict.value}, {"summary": summary})
    return EXIT_OK if v.passed else EXIT_FAIL


def _clock(cfg, out, name, fwd, inv):
    psi = PsiSpec(cfg["psi"])
    if not cfg["x"] and not cfg["inverse"]:
        raise ConfigError(f"{name} needs --x or --inverse")
    results = []
    for x in cfg["x"] or []:
        v = fwd(psi, x)
        results.append({"x": x, name: v})
        print(_fmt(v))
    for t in cfg["inverse"] or []:
        v = inv(psi, t)
        results.append({"t": t, f"{name}_inverse": v})
        print(_fmt(v))
    _manifest(out, name, cfg, {}, {"results": results})
    return EXIT_OK


def cmd_gamma(cfg, out):
    return _clock(cfg, out, "gamma", gamma, gamma_inverse)


def cmd_theta(cfg, out):
    return _clock(cfg, out, "theta", theta, theta_inverse)


def cmd_build(cfg, out):
    rep = RepresentationSpec(cfg["cfun"], cfg["eps"], alpha=cfg["alpha"])
    rep.validate()
    mode = cfg["mode"]
    psi = None
    if mode == "svf":
        g = build_svf(rep)
    elif mode == "lcf":
        g = build_lcf(rep)
    elif mode == "psi":
        psi = PsiSpec(cfg["psi"])
        g = build_psi_lcf(rep, psi)
    else:
        raise ConfigError(f"unknown mode {mode!r}; use svf, lcf or psi")
    values = []
    for x in cfg["x"]:
        lg = g.log(x)
        values.append({"x": x, "log_g": lg, "g": math.exp(lg) if lg < 709 else math.inf})
        print(f"{_fmt(x)} {_fmt(values[-1]['g'])}")
    verdicts = {}
    code = EXIT_OK
    if cfg["check"]:
        d = check_psi_lcf(g, psi or (PsiSpec.constant() if mode == "lcf" else PsiSpec("x")), tol=cfg["tol"])
        verdicts["psi_lcf"] = d.verdict.value
        write_rows(out / "check.csv", d.rows())
        code = EXIT_OK if d.passed else EXIT_FAIL
    _manifest(out, "build", cfg, verdicts, {"values": values})
    return code


def cmd_upper_power(cfg, out):
    v = check_upper_power(cfg["g"], pgrid=cfg["p"], xgrid=_xgrid(cfg), margin=cfg["margin"])
    rows = ({"check": "upper_power", "function": v.details["function"], "v": float(p), "value": float(c),
             "verdict": v.verdict.value} for p, c in zip(v.details["p"], v.details["c_hat"]))
    write_rows(out / "check.csv", rows)
    summary = v.summary()
    print(json.dumps(jsonable(summary), sort_keys=True))
    _manifest(out, "upper-power", cfg, {"upper_power": v.verdict.value}, {"summary": summary})
    return EXIT_OK if v.passed else EXIT_FAIL


def _model(cfg) -> TailModel:
    return TailModel(cfg["tail"], alpha=cfg["alpha"], x0=cfg["tail_x0"], V=cfg["V"], c_left=cfg["c_left"])


def cmd_simulate(cfg, out):
    model = _model(cfg)
    if cfg["reps"] < 1 or cfg["n"] < 1:
        raise ConfigError("n and reps must be positive")
    records = []
    if cfg["estimator"] in ("crude", "both"):
        records.append(crude_mc(model, cfg["n"], cfg["x"], cfg["reps"], cfg["seed"], jobs=cfg["jobs"]))
    if cfg["estimator"] in ("big-jump", "both"):
        records.append(big_jump_main_term(model, cfg["n"], cfg["x"], cfg["reps"], cfg["N"], cfg["seed"],
                                          jobs=cfg["jobs"]))
    if not records:
        raise ConfigError(f"unknown estimator {cfg['estimator']!r}")
    for r in records:
        print(json.dumps(jsonable({k: v for k, v in r.to_dict().items() if k != "wall_time"}), sort_keys=True))
    _manifest(out, "simulate", cfg, {}, {"model": model.to_dict(), "records": [r.to_dict() for r in records]})
    return EXIT_OK


def cmd_ratio_scan(cfg, out):
    model = _model(cfg)
    if len(cfg["band"]) != 2:
        raise ConfigError("band needs two numbers")
    exp = Experiment(model, ZoneSpec(cfg["h"], cfg["regime"]), cfg["ns"], reps=cfg["reps"],
                     estimator=cfg["estimator"], seed=cfg["seed"], N=cfg["N"], band=tuple(cfg["band"]),
                     psi=cfg["psi"], jobs=cfg["jobs"], min_hits=cfg["min_hits"])
    hyp = psi_consistency_report(exp)
    res = ratio_scan(exp)
    write_results_csv(out / "results.csv", res)
    write_plot_csv(out / "plot.csv", res)
    if cfg["plot"]:
        plot_from_csv(out / "plot.csv", out / "plot.svg", title=f"{model.name}, x = {exp.zone.h}")
    write_manifest(out / "manifest.json", res, {"config": cfg, "hypotheses": hyp})
    for t in res.trends:
        print(f"{t.series}: ratios {' '.join(f'{r:.4g}' for r in t.ratios)} -> {'PASS' if t.passed else 'FAIL'}")
    print(f"zone: {'PASS' if res.zone['passed'] else 'FAIL'}; hypotheses ({hyp['psi']}): psi-lcf {hyp['psi_lcf']}, "
          f"upper-power {hyp['upper_power']}; scan: {'PASS' if res.passed else 'FAIL'}")
    return EXIT_OK if res.passed else EXIT_FAIL


def cmd_report(cfg, out):
    src = Path(cfg["dir"])
    man = src / "manifest.json"
    if not man.exists():
        raise ConfigError(f"{man} not found")
    doc = json.loads(man.read_text())
    if (src / "plot.csv").exists():
        plot_from_csv(src / "plot.csv", out / "plot.svg", title=str(doc.get("experiment", {}).get("model", {})
                                                                       .get("name", "")))
    verdicts = doc.get("verdicts", {})
    print(json.dumps(verdicts, indent=2, sort_keys=True))
    _manifest(out, "report", cfg, verdicts, {"source": str(src)})
    scan = verdicts.get("scan")
    return EXIT_FAIL if scan == "FAIL" else EXIT_OK


HANDLERS = {
    "check-psi-lcf": cmd_check_psi_lcf,
    "check-class": cmd_check_class,
    "gamma": cmd_gamma,
    "theta": cmd_theta,
    "build": cmd_build,
    "upper-power": cmd_upper_power,
    "simulate": cmd_simulate,
    "ratio-scan": cmd_ratio_scan,
    "report": cmd_report,
}

_USER_ERRORS = (ConfigError, ExprError, PsiSpecError, RepresentationError, TailModelError, ZoneError,
                ExperimentError, ValueError)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = resolve_config(args.command, args)
        out = output_dir(cfg)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return HANDLERS[args.command](cfg, out)
    except _USER_ERRORS as exc:
        if isinstance(exc, ConfigError):
            parser.subcommands[args.command].print_usage(sys.stderr)
        print(f"psilcf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
