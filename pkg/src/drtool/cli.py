"""Command line entry point: ``drtool run | run-all | verify | identities``."""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .displacement import build_normal_problem, normal_identity_error
from .errors import DRToolError
from .identities import identity_suite, sample_points, seed_from_env
from .scenario import (BUNDLED_DIR, _json_default, bundled_scenarios, load_scenario,
                       run_scenario)


def _line(res) -> str:
    s = res.summary
    est = s.get("estimate")
    v = "-" if not est else "(" + ", ".join(f"{x:.6g}" for x in est["v"]) + ")"
    tag = {0: "PASS", 1: "FAIL", 2: "ERROR"}[res.exit_code]
    extra = f" {s['error']}" if "error" in s else ""
    return f"{tag} {s['name']}: v={v} iterations={s.get('iterations', '-')}{extra}"


def _load(path):
    try:
        return load_scenario(path), None
    except DRToolError as exc:
        return None, f"ERROR {path}: {type(exc).__name__}: {exc}"


def cmd_run(args) -> int:
    sc, err = _load(args.scenario)
    if err:
        print(err, file=sys.stderr)
        return 2
    res = run_scenario(sc, args.out, args.max_iters, args.tol)
    print(_line(res))
    return res.exit_code


def cmd_run_all(args) -> int:
    directory = Path(args.dir) if args.dir else BUNDLED_DIR
    paths = sorted(directory.glob("*.json")) if args.dir else bundled_scenarios()
    if not paths:
        print(f"no scenarios in {directory}", file=sys.stderr)
        return 2

    def one(path):
        sc, err = _load(path)
        if err:
            return 2, err
        res = run_scenario(sc, args.out)
        return res.exit_code, _line(res)

    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(one, paths))
    for _, line in results:
        print(line)
    return max(code for code, _ in results)


def cmd_verify(args) -> int:
    sc, err = _load(args.scenario)
    if err:
        print(err, file=sys.stderr)
        return 2
    res = run_scenario(sc, None, args.max_iters, args.tol, write_trace=False)
    print(json.dumps(res.summary, indent=2, sort_keys=True, default=_json_default))
    return res.exit_code


def cmd_identities(args) -> int:
    sc, err = _load(args.scenario)
    if err:
        print(err, file=sys.stderr)
        return 2
    rng = np.random.default_rng(seed_from_env())
    rep = identity_suite(sc.spec, args.samples, rng)
    errors = dict(rep.errors)
    if sc.oracle is not None and sc.oracle.v is not None:
        nprob = build_normal_problem(sc.spec, sc.oracle.v)
        errors["normal_problem"] = normal_identity_error(nprob, sample_points(rng, args.samples, sc.dim))
    ok = all(e <= rep.tol for e in errors.values())
    for name, e in errors.items():
        print(f"{'ok  ' if e <= rep.tol else 'FAIL'} {name}: {e:.3e}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drtool", description="Douglas-Rachford diagnostics for possibly inconsistent problems")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario and write trace.csv and summary.json")
    p.add_argument("scenario")
    p.add_argument("--out", default="drtool-out")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float, help="early-stopping tolerance")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("run-all", help="run every scenario in a directory (bundled ones by default)")
    p.add_argument("dir", nargs="?")
    p.add_argument("--out", default="drtool-out")
    p.add_argument("--jobs", type=int, default=4)
    p.set_defaults(func=cmd_run_all)

    p = sub.add_parser("verify", help="compare a scenario with its oracle without writing files")
    p.add_argument("scenario")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("identities", help="pointwise resolvent identity checks (seed: DRTOOL_SEED)")
    p.add_argument("scenario")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_identities)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
