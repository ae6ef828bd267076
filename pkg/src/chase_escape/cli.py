"""Command-line front end.

Subcommands: ``theory``, ``sample``, ``simulate``, ``percolate``, ``sweep``
and ``validate``.  Models use the ``name:arg[:arg...]`` grammar
(``regular:3``, ``poisson:2.5``, ``geometric:0.4``, ``negbin:2:0.4``,
``powerlaw:2.5:100``, ``powerlaw:2.5``) or a path to a two-column ``k p`` file.

Options may also come from ``--config FILE`` holding ``key=value`` lines
with the flag names (``lambda-grid=0.1,0.5``); command-line flags win.

Exit codes: 0 success, 1 a validation suite failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import degree_theory as dt
from .chase_engine import draw_passage_times, run_gillespie, run_quenched
from .config_graph import dump_edgelist, sample_graph
from .experiments import (
    SUITES,
    SweepConfig,
    property_suite,
    replica_seed,
    sweep,
    validate_bounds,
)
from .percolation import PERC_FIELDS, mark_open, percolation_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# option name -> (parser, default)
_OPTIONS = {
    "model": (str, None),
    "n": (int, None),
    "lambda": (float, None),
    "lambda-grid": (str, None),
    "n-list": (str, None),
    "replicas": (int, None),
    "delta": (float, 0.1),
    "seed": (int, 0),
    "engine": (str, "quenched"),
    "epsilon": (float, 0.3),
    "out": (str, "results"),
    "workers": (int, None),
    "mode": (str, "range"),
}


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def _dumps(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2)


def read_config(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("_", "-")
            if key not in _OPTIONS and key not in ("full", "fixed-graph"):
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chase-escape",
        description="Chase-escape on configuration-model random graphs.",
        epilog=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "theory": "closed-form quantities for a degree model",
        "sample": "sample one graph and write it as an edge list",
        "simulate": "one chase-escape run on one sampled graph",
        "percolate": "open-vertex percolation reports, one CSV row per replica",
        "sweep": "Monte Carlo sweep over a (lambda, n) grid",
        "validate": "statistical validation suites",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        for opt in _OPTIONS:
            p.add_argument(f"--{opt}", dest=opt.replace("-", "_"), default=None)
        p.add_argument("--config", default=None, help="key=value file of defaults")
        p.add_argument("--full", action="store_true", default=None)
        p.add_argument("--fixed-graph", dest="fixed_graph", action="store_true", default=None)
        if name == "simulate":
            p.add_argument(
                "--trace", action="store_true", help="print the event log to stderr"
            )
        if name == "validate":
            p.add_argument(
                "suites",
                nargs="*",
                help=f"suites to run (default: all); one of {', '.join(sorted(SUITES))}, bounds",
            )
            p.add_argument(
                "--set",
                dest="params",
                action="append",
                default=[],
                metavar="KEY=VALUE",
                help="override a suite parameter",
            )
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags into one typed dict."""
    cfg: dict = {k: v for k, (_, v) in _OPTIONS.items()}
    cfg["full"] = False
    cfg["fixed-graph"] = False
    if args.config:
        try:
            cfg.update(read_config(args.config))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    for key in list(_OPTIONS) + ["full", "fixed-graph"]:
        val = getattr(args, key.replace("-", "_"), None)
        if val is not None:
            cfg[key] = val
    for key, (typ, _) in _OPTIONS.items():
        if cfg[key] is not None and not isinstance(cfg[key], typ):
            try:
                cfg[key] = typ(cfg[key])
            except ValueError as exc:
                raise UsageError(f"--{key}: {exc}") from exc
    for key in ("full", "fixed-graph"):
        if isinstance(cfg[key], str):
            cfg[key] = cfg[key].lower() in ("1", "true", "yes", "on")
    if cfg["workers"] is None:
        cfg["workers"] = os.cpu_count() or 1
    return cfg


def _need(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join(f"--{k}" for k in missing))


def _model(cfg: dict) -> dt.DegreeModel:
    _need(cfg, "model")
    try:
        return dt.parse_model(cfg["model"])
    except dt.DomainError as exc:
        raise UsageError(str(exc)) from exc


def _parse_list(text: str | None, typ, name: str) -> list:
    if text is None:
        raise UsageError(f"missing required option --{name}")
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise UsageError(f"--{name} is empty")
    try:
        return [typ(s) for s in items]
    except ValueError as exc:
        raise UsageError(f"--{name}: {exc}") from exc


def _artifact(cfg: dict, command: str, ext: str, text: str) -> str:
    out = cfg["out"]
    try:
        os.makedirs(out, exist_ok=True)
        stamp = time.strftime("%Y%m%dT%H%M%S")
        path = os.path.join(out, f"{command}-{stamp}-{cfg['seed']}.{ext}")
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write to {out!r}: {exc}") from exc
    return path


def _echo(cfg: dict, command: str) -> dict:
    shown = {k: v for k, v in cfg.items() if k not in ("workers", "out")}
    print(f"{command} config: {json.dumps(shown, sort_keys=True)}", file=sys.stderr)
    return shown


# -- subcommands -------------------------------------------------------------


def cmd_theory(cfg: dict) -> int:
    model = _model(cfg)
    try:
        rep = dt.theory_report(model)
    except dt.DomainError as exc:
        raise UsageError(str(exc)) from exc
    doc = {
        "model": model.label,
        "mean_D": rep.mean_D,
        "second_moment_D": rep.second_moment_D,
        "a": rep.a,
        "lambda_crit": rep.lambda_crit,
        "molloy_reed": rep.molloy_reed,
        "range_const_C": rep.range_const_C,
        "notes": list(rep.notes),
    }
    lam = cfg["lambda"]
    if lam is not None:
        if not lam > 0:
            raise UsageError("--lambda must be > 0")
        doc["lambda"] = lam
        if lam < 1:
            doc["C_lambda"] = dt.c_lambda(lam)
            doc["survival_bound"] = {k: dt.survival_bound(lam, k) for k in range(1, 21)}
        else:
            doc["C_lambda"] = None
            doc["notes"].append("path survival bound only holds for lambda < 1")
        doc["open_probability"] = {k: dt.open_probability(k, lam) for k in range(0, 11)}
    print(_dumps(doc))
    return EXIT_OK


def cmd_sample(cfg: dict) -> int:
    model = _model(cfg)
    _need(cfg, "n")
    echo = _echo(cfg, "sample")
    g = sample_graph(model, cfg["n"], np.random.default_rng(cfg["seed"]))
    path = _artifact(cfg, "sample", "txt", dump_edgelist(g))
    print(_dumps({"config": echo, "edges": g.m, "parity": g.parity, "path": path}))
    return EXIT_OK


def cmd_simulate(cfg: dict, trace: bool = False) -> int:
    model = _model(cfg)
    _need(cfg, "n", "lambda")
    if cfg["engine"] not in ("quenched", "gillespie"):
        raise UsageError(f"unknown engine {cfg['engine']!r}; use quenched or gillespie")
    if not cfg["lambda"] > 0:
        raise UsageError("--lambda must be > 0")
    if cfg["n"] < 1:
        raise UsageError("--n must be >= 1")
    echo = _echo(cfg, "simulate")
    rng = np.random.default_rng(cfg["seed"])
    g = sample_graph(model, cfg["n"], rng)
    if cfg["engine"] == "quenched":
        outcome = run_quenched(g, draw_passage_times(g, cfg["lambda"], rng), trace=trace)
    else:
        outcome = run_gillespie(g, cfg["lambda"], rng, trace=trace)
    for line in outcome.events:
        print(line, file=sys.stderr)
    doc = {
        "config": echo,
        "range": outcome.range,
        "fixation_time": outcome.fixation_time,
    }
    if cfg["full"]:
        doc["r"] = outcome.r.tolist()
        doc["b"] = outcome.b.tolist()
    print(_dumps(doc))
    return EXIT_OK


def percolation_rows(cfg: dict, model: dt.DegreeModel) -> list[dict]:
    rows = []
    for r in range(cfg["replicas"]):
        seed = replica_seed(cfg["seed"], 0, 0, r)
        rng = np.random.default_rng(seed)
        g = sample_graph(model, cfg["n"], rng)
        mask = mark_open(g, draw_passage_times(g, cfg["lambda"], rng))
        rows.append(percolation_report(g, mask).record(cfg["n"], cfg["lambda"], seed))
    return rows


def cmd_percolate(cfg: dict) -> int:
    model = _model(cfg)
    _need(cfg, "n", "lambda", "replicas")
    if not cfg["lambda"] > 0 or cfg["n"] < 1 or cfg["replicas"] < 1:
        raise UsageError("need --lambda > 0, --n >= 1 and --replicas >= 1")
    echo = _echo(cfg, "percolate")
    rows = percolation_rows(cfg, model)
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(echo, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PERC_FIELDS)
    for row in rows:
        w.writerow([repr(row[k]) if isinstance(row[k], float) else row[k] for k in PERC_FIELDS])
    path = _artifact(cfg, "percolate", "csv", buf.getvalue())
    giant = sum(r["S_n"] >= cfg["epsilon"] * r["M_n"] for r in rows)
    print(
        f"percolate n={cfg['n']} lambda={cfg['lambda']} replicas={len(rows)} "
        f"giant_check(eps={cfg['epsilon']})={giant}/{len(rows)} "
        f"mean_ratio={np.mean([r['ratio'] for r in rows]):.6g} -> {path}"
    )
    return EXIT_OK


def cmd_sweep(cfg: dict) -> int:
    model = _model(cfg)
    lambdas = _parse_list(cfg["lambda-grid"], float, "lambda-grid")
    ns = _parse_list(cfg["n-list"], int, "n-list")
    _need(cfg, "replicas")
    try:
        sc = SweepConfig(
            model,
            tuple(lambdas),
            tuple(ns),
            cfg["replicas"],
            cfg["delta"],
            cfg["seed"],
            cfg["mode"],
            cfg["workers"],
            cfg["epsilon"],
            cfg["fixed-graph"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _echo(cfg, "sweep")
    res = sweep(sc)
    csv_path = _artifact(cfg, "sweep", "csv", res.to_csv())
    json_path = _artifact(cfg, "sweep", "json", res.to_json())
    for row in res.rows:
        lo, hi = row.range.ci95
        print(
            f"lambda={row.lam!r} n={row.n} mean_range={row.range.mean:.6g} "
            f"ci95=[{lo:.6g},{hi:.6g}] p_exceed={row.p_exceed.mean:.6g}"
        )
    print(f"wrote {csv_path} {json_path}")
    return EXIT_OK


def _suite_params(pairs: list[str]) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def cmd_validate(cfg: dict, suites: list[str], params: list[str]) -> int:
    names = suites or sorted(SUITES)
    unknown = [s for s in names if s not in SUITES and s != "bounds"]
    if unknown:
        raise UsageError(f"unknown suite(s): {', '.join(unknown)}")
    echo = _echo(cfg, "validate")
    overrides = _suite_params(params)
    verdicts = []
    ok = True
    for name in names:
        if name == "bounds":
            model = _model(cfg)
            lambdas = _parse_list(cfg["lambda-grid"], float, "lambda-grid")
            ns = _parse_list(cfg["n-list"], int, "n-list")
            cells = validate_bounds(
                model, lambdas, ns, cfg["replicas"] or 1000, cfg["seed"], cfg["workers"]
            )
            passed = all(c.passed for c in cells)
            stats = {
                "cells": [
                    {
                        "lambda": c.lam,
                        "n": c.n,
                        "kind": c.kind,
                        "mean": c.estimate.mean,
                        "stderr": c.estimate.stderr,
                        "threshold": c.threshold,
                        "passed": c.passed,
                    }
                    for c in cells
                ]
            }
            print(f"{'PASS' if passed else 'FAIL'} bounds cells={len(cells)}")
            verdicts.append({"name": "bounds", "passed": passed, "stats": stats})
        else:
            v = property_suite(name, overrides, cfg["seed"])
            passed = v.passed
            print(v.line())
            verdicts.append({"name": v.name, "passed": v.passed, "stats": v.stats})
        ok &= passed
    _artifact(cfg, "validate", "json", _dumps({"config": echo, "suites": verdicts}))
    return EXIT_OK if ok else EXIT_FAIL


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve(args)
        if args.command == "validate":
            return cmd_validate(cfg, args.suites, args.params)
        if args.command == "simulate":
            return cmd_simulate(cfg, args.trace)
        handler = {
            "theory": cmd_theory,
            "sample": cmd_sample,
            "percolate": cmd_percolate,
            "sweep": cmd_sweep,
        }[args.command]
        return handler(cfg)
    except (UsageError, dt.DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
