"""Command line entry point: ``levy-liouville <command> --config FILE``.

Every command writes ``<out>/<command>.json``; grid and sample outputs also
go to ``<out>/<command>.csv``. Exit status is 0 for a conclusive result, 2
for a mathematically inconclusive one and 1 for errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import __version__
from .generator_semigroup import (
    DEFAULT_TIMES,
    MCConfig,
    check_harmonic,
    sample_levy,
    time_label,
    trig_function,
)
from .levy_core import (
    SchemaError,
    ValidationError,
    parse_growth,
    triplet_from_dict,
    validate_config_schema,
    validate_triplet,
)
from .structure import (
    HypothesisError,
    cross_check_duality,
    find_zero_set,
    liouville_verdict,
    strong_liouville_verdict,
    witness_grid,
)
from .symbol import bernstein_from_config, eval_psi, subordinate, symbol_of

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2

COMMANDS = ("validate", "symbol", "zeroset", "verdict", "strong-verdict", "subordinate",
            "simulate", "check-harmonic", "duality", "examples")


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(report):
    return json.dumps(jsonable(report), indent=2, sort_keys=True) + "\n"


def _parse_vector(text):
    return [float(v) for v in text.split(",")] if text else None


def _parse_bernstein(text):
    name, _, param = text.partition(":")
    key = {"power": "alpha", "resolvent": "tau", "semigroup": "t"}.get(name)
    cfg = {"name": name}
    if key and param:
        cfg[key] = float(param)
    return cfg


def build_parser():
    p = argparse.ArgumentParser(prog="levy-liouville", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        c = sub.add_parser(name)
        if name != "examples":
            c.add_argument("--config", required=True, help="triplet JSON file")
        c.add_argument("--out", default=".", help="directory for reports")
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--paths", type=int, default=None)
        c.add_argument("--workers", type=int, default=1)
        c.add_argument("--box", type=float, default=None, help="search box half-width")
        c.add_argument("--grid", type=int, default=None, help="points per axis")
        c.add_argument("--tol", type=float, default=1e-8)
        c.add_argument("--growth", default=None, help="const:c | pow:k | exp:b")
        if name in ("simulate", "check-harmonic"):
            c.add_argument("--time", type=float, default=1.0)
        if name == "check-harmonic":
            c.add_argument("--gamma", default=None, help="frequency of cos(gamma.x), comma separated")
            c.add_argument("--probes", default="0.0,0.3", help="Monte Carlo probe coordinates")
        if name == "subordinate":
            c.add_argument("--bernstein", default=None, help="power:a | log1p | resolvent:tau | semigroup:t")
        if name == "symbol":
            c.add_argument("--xi", default=None, help="single frequency, comma separated")
    return p


def load_config(path):
    with open(path) as fh:
        data = json.load(fh)
    validate_config_schema(data)
    triplet = triplet_from_dict(data)
    h = bernstein_from_config(data["bernstein"]) if "bernstein" in data else None
    return data, triplet, h


class Run:
    """Resolved inputs for one command plus the report being built."""

    def __init__(self, args, data, triplet, h):
        self.args = args
        self.data = data
        self.triplet = triplet
        self.h = h
        self.symbol = subordinate(h, triplet) if h is not None else symbol_of(triplet)
        self.csv = None
        self.params = {"seed": args.seed, "box": args.box, "grid": args.grid, "tol": args.tol,
                       "growth": args.growth}

    def mc(self, default_paths):
        paths = self.args.paths or default_paths
        self.params["paths"] = paths
        return MCConfig(seed=self.args.seed, paths=paths, workers=self.args.workers)


def _verdict_exit(status):
    return EXIT_INCONCLUSIVE if status == "inconclusive" else EXIT_OK


def cmd_validate(run):
    rep = validate_triplet(run.triplet)
    return rep.to_json(), EXIT_OK if rep.ok else EXIT_ERROR


def cmd_symbol(run):
    n = run.triplet.dim
    xi = _parse_vector(run.args.xi)
    if xi is not None:
        val = complex(eval_psi(run.symbol, xi))
        return {"xi": xi, "psi": [val.real, val.imag]}, EXIT_OK
    w = run.args.box or 4 * math.pi
    pts = run.args.grid or (257 if n == 1 else 33)
    run.params.update(box=w, grid=pts)
    axis = np.linspace(-w, w, pts)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    vals = np.asarray(eval_psi(run.symbol, coords))
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow([f"xi{i}" for i in range(n)] + ["re", "im"])
    for c, v in zip(coords, vals):
        wr.writerow([repr(float(x)) for x in c] + [repr(float(v.real)), repr(float(v.imag))])
    run.csv = buf.getvalue()
    return {"points": int(coords.shape[0]), "max_abs": float(np.abs(vals).max()),
            "min_real": float(vals.real.min()), "psi_at_zero": abs(complex(eval_psi(run.symbol, np.zeros(n))))}, EXIT_OK


def cmd_zeroset(run):
    z = find_zero_set(run.symbol, run.args.box, run.args.grid, run.args.tol, run.args.seed)
    return z.to_json(), EXIT_OK if z.conclusive else EXIT_INCONCLUSIVE


def cmd_verdict(run):
    v = liouville_verdict(run.symbol, run.args.box, run.args.grid, run.args.tol, run.args.seed)
    return v.to_json(), _verdict_exit(v.status)


def cmd_strong(run):
    if run.args.growth is None:
        raise ValidationError("strong-verdict needs --growth")
    if run.h is not None:
        raise ValidationError("strong-verdict acts on the triplet; drop the bernstein entry")
    cfg = run.mc(200_000)
    v = strong_liouville_verdict(run.triplet, parse_growth(run.args.growth), run.args.box,
                                 run.args.grid, run.args.tol, cfg, seed=run.args.seed)
    return v.to_json(), _verdict_exit(v.status)


def cmd_subordinate(run):
    if run.args.bernstein:
        h = bernstein_from_config(_parse_bernstein(run.args.bernstein))
    elif run.h is not None:
        h = run.h
    else:
        raise ValidationError("subordinate needs --bernstein or a bernstein entry in the config")
    run.params["bernstein"] = h.to_json()
    a = liouville_verdict(run.triplet, run.args.box, run.args.grid, run.args.tol, run.args.seed)
    b = liouville_verdict(subordinate(h, run.triplet), run.args.box, run.args.grid, run.args.tol,
                          run.args.seed)
    rep = {"inner": a.to_json(), "subordinated": b.to_json(), "trivial_zero": h.trivial_zero,
           "agree": a.status == b.status}
    inconclusive = "inconclusive" in (a.status, b.status)
    return rep, EXIT_INCONCLUSIVE if inconclusive else EXIT_OK


def cmd_simulate(run):
    cfg = run.mc(10_000)
    run.params["time"] = run.args.time
    x = sample_levy(run.triplet, run.args.time, cfg)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow([f"x{i}" for i in range(x.shape[1])])
    for row in x:
        wr.writerow([repr(float(v)) for v in row])
    run.csv = buf.getvalue()
    cov = np.cov(x, rowvar=False, ddof=1) if x.shape[0] > 1 else np.zeros((x.shape[1],) * 2)
    return {"time": run.args.time, "paths": cfg.paths, "seed": cfg.seed,
            "mean": x.mean(axis=0), "stderr": x.std(axis=0, ddof=1) / math.sqrt(cfg.paths)
            if cfg.paths > 1 else np.zeros(x.shape[1]),
            "covariance": np.atleast_2d(cov)}, EXIT_OK


def cmd_check_harmonic(run):
    n = run.triplet.dim
    gamma = np.asarray(_parse_vector(run.args.gamma) or [0.0] * n)
    run.params["gamma"] = gamma.tolist()
    grid = witness_grid(gamma)
    spectral = check_harmonic(run.symbol, trig_function(grid, gamma), DEFAULT_TIMES)
    rep = {"candidate": {"kind": "trig", "vector": gamma.tolist()},
           "spectral": spectral.to_json()}
    harmonic = spectral.harmonic
    if run.h is None:
        cfg = run.mc(100_000)
        probes = np.asarray(_parse_vector(run.args.probes), dtype=float)
        run.params["probes"] = probes.tolist()
        growth = parse_growth(run.args.growth) if run.args.growth else None
        mc = check_harmonic(run.triplet, lambda x: np.cos(x @ gamma), DEFAULT_TIMES, cfg,
                            probes=np.repeat(probes[:, None], n, axis=1), growth=growth)
        rep["monte_carlo"] = mc.to_json()
        harmonic = harmonic and mc.harmonic
    rep["harmonic"] = harmonic
    rep["times"] = [time_label(t) for t in DEFAULT_TIMES]
    return rep, EXIT_OK


def cmd_duality(run):
    if run.h is not None:
        raise ValidationError("duality acts on the triplet; drop the bernstein entry")
    r = cross_check_duality(run.triplet, run.args.box, run.args.grid, run.args.tol,
                            seed=run.args.seed)
    return r.to_json(), EXIT_INCONCLUSIVE if r.status == "inconclusive" else EXIT_OK


def corpus_files():
    root = resources.files("levy_liouville") / "corpus"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def corpus_path(name):
    return str(resources.files("levy_liouville") / "corpus" / name)


# expected outcome per bundled example: command and predicate on its report
EXPECTED = {
    "bm.json": ("verdict", lambda r: r["verdict"] == "holds"),
    "bm_drift1.json": ("strong-verdict", lambda r: r["verdict"] == "fails"
                       and abs(r["witness"]["vector"][0] + 2.0) < 1e-8),
    "poisson1.json": ("verdict", lambda r: r["verdict"] == "fails"
                      and abs(r["witness"]["vector"][0] - 2 * math.pi) < 1e-8),
    "delta23.json": ("duality", lambda r: r["status"] == "equal"),
    "weierstrass.json": ("verdict", lambda r: r["verdict"] == "fails"
                         and abs(r["witness"]["vector"][0] - 2.0) < 1e-8),
    "delta_e1_2d.json": ("duality", lambda r: r["status"] == "equal"),
    "stable05.json": ("verdict", lambda r: r["verdict"] == "holds"),
    "subordinated_bm.json": ("verdict", lambda r: r["verdict"] == "holds"),
}


def cmd_examples(args):
    rows, results = [], {}
    for name in corpus_files():
        command, check = EXPECTED.get(name, ("verdict", lambda r: True))
        argv = [command, "--config", corpus_path(name), "--out", os.path.join(args.out, name[:-5]),
                "--seed", str(args.seed)]
        if command == "strong-verdict":
            argv += ["--growth", "exp:3"]
        code, report = run_command(argv)
        ok = code != EXIT_ERROR and report is not None and check(report["result"])
        results[name] = {"command": command, "exit": code, "pass": ok}
        rows.append(f"{name:<24} {command:<16} {'pass' if ok else 'FAIL'}")
    print("\n".join(rows))
    all_ok = all(r["pass"] for r in results.values())
    return {"examples": results, "all_pass": all_ok}, EXIT_OK if all_ok else EXIT_ERROR


HANDLERS = {
    "validate": cmd_validate, "symbol": cmd_symbol, "zeroset": cmd_zeroset,
    "verdict": cmd_verdict, "strong-verdict": cmd_strong, "subordinate": cmd_subordinate,
    "simulate": cmd_simulate, "check-harmonic": cmd_check_harmonic, "duality": cmd_duality,
}


def _write(out, command, report, csv_text=None):
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, f"{command}.json"), "w") as fh:
        fh.write(dumps(report))
    if csv_text is not None:
        with open(os.path.join(out, f"{command}.csv"), "w") as fh:
            fh.write(csv_text)


def _find_search_box(result):
    if not isinstance(result, dict):
        return None
    if "search_box" in result:
        return result["search_box"]
    for key in ("zero_set", "inner"):
        if isinstance(result.get(key), dict):
            found = _find_search_box(result[key])
            if found:
                return found
    return None


def run_command(argv):
    """Run one command; returns ``(exit_code, report)``."""
    args = build_parser().parse_args(argv)
    report = {"command": args.command, "version": __version__}
    try:
        if args.command == "examples":
            report["config"] = {"seed": args.seed}
            report["result"], code = cmd_examples(args)
            _write(args.out, args.command, report)
            return code, report
        data, triplet, h = load_config(args.config)
        run = Run(args, data, triplet, h)
        result, code = HANDLERS[args.command](run)
        box = _find_search_box(result)
        if box and box.get("halfwidth") is not None:
            run.params["box"] = box["halfwidth"]
            run.params["grid"] = box.get("points_per_axis") or run.params["grid"]
        # worker count is deliberately absent: it never changes results
        report["config"] = {"input": data, "triplet": triplet.to_json(), "params": run.params}
        report["result"] = result
        _write(args.out, args.command, report, run.csv)
        return code, report
    except SchemaError as exc:
        report["error"] = {"kind": "schema", "pointers": exc.pointers, "messages": exc.messages}
    except (ValidationError, HypothesisError, OSError, json.JSONDecodeError) as exc:
        report["error"] = {"kind": type(exc).__name__, "message": str(exc)}
    print(f"error: {report['error']}", file=sys.stderr)
    _write(args.out, args.command, report)
    return EXIT_ERROR, report


def main(argv=None):
    code, report = run_command(sys.argv[1:] if argv is None else argv)
    if report is not None and "result" in report and report["command"] != "examples":
        res = report["result"]
        status = res.get("verdict") or res.get("status") if isinstance(res, dict) else None
        if status:
            print(status)
    return code


if __name__ == "__main__":
    sys.exit(main())
