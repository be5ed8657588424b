"""Command line entry point: ``spreadlab run|list|front-speed|direction-sets|spreading-set``."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import geometry, harness
from .front import FrontError, minimal_speed, tristable_terrace_speeds
from .reaction import check_hypotheses, parse_reaction


def _cmd_list(args) -> int:
    for sc in harness.catalog():
        print(f"{sc['id']:34s} {sc['title']}")
        print(f"{'':34s} claims: {', '.join(sc['claims'])}")
    return 0


def _run_one(ref, out):
    try:
        return harness.run_scenario(ref, out=out).to_dict()
    except (ValueError, RuntimeError) as exc:
        return {"id": str(ref), "verdict": "error", "error": f"{type(exc).__name__}: {exc}", "expectations": []}


def _cmd_run(args) -> int:
    refs = [sc["id"] for sc in harness.catalog()] if args.all else args.scenarios
    if not refs:
        print("nothing to run: give scenario ids/files or --all", file=sys.stderr)
        return 2
    try:
        for ref in refs:
            harness.load(ref)
    except harness.ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # output piped into e.g. head; stop quietly
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    out = str(harness.output_root(args.out))
    if args.jobs > 1 and len(refs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_run_one, refs, [out] * len(refs)))
    else:
        reports = [_run_one(ref, out) for ref in refs]
    ok = True
    for rep in reports:
        print(f"[{rep['verdict'].upper()}] {rep['id']}")
        if "error" in rep:
            print(f"  {rep['error']}")
        for e in rep["expectations"]:
            mark = "ok  " if e["passed"] else "FAIL"
            tol = f" tol {e['tol']:g}" if e["op"].startswith("within") else ""
            print(f"  {mark} {e['key']} = {e['observed']} {e['op']} {e['value']}{tol}")
        ok &= rep["verdict"] == "pass"
    print(f"reports written under {out}")
    return 0 if ok else 1


def _cmd_front_speed(args) -> int:
    f = parse_reaction(args.reaction)
    rep = check_hypotheses(f)
    out = {"reaction": f.id, "integral": rep.integral_0_1}
    try:
        out["c_star"] = minimal_speed(f, args.tol).c_star
    except FrontError as exc:
        out["error"] = str(exc)
    if f.kind == "tristable":
        try:
            c1, c2 = tristable_terrace_speeds(f, args.tol)
            out.update(c1=c1, c2=c2)
        except FrontError as exc:
            out["terrace_error"] = str(exc)
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0 if "error" not in out else 1


def _write_rows(path, header, rows):
    fh = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _cmd_direction_sets(args) -> int:
    U = geometry.parse_support(args.support, args.dim)
    d = geometry.direction_sets(U, args.rho, args.M)
    summary = {"support": U.name, "rho": args.rho, "hyp_U": geometry.check_hyp_U(d), **d.counts()}
    print(json.dumps(summary, sort_keys=True), file=sys.stderr if args.csv in (None, "-") else sys.stdout)
    rows = [
        [repr(float(a)), repr(float(r)), repr(float(rr)), lab]
        for a, r, rr, lab in zip(d.angles, d.liminf_ratio, d.liminf_ratio_rho, d.labels)
    ]
    _write_rows(args.csv, ["angle", "liminf_ratio_U", "liminf_ratio_U_rho", "label"], rows)
    return 0


def _cmd_spreading_set(args) -> int:
    U = geometry.parse_support(args.support, args.dim)
    c_star = args.cstar if args.cstar is not None else minimal_speed(parse_reaction(args.reaction)).c_star
    d = geometry.direction_sets(U, args.rho, args.M)
    if not geometry.check_hyp_U(d):
        print("warning: some directions are ambiguous; the prediction may not apply", file=sys.stderr)
    pred = geometry.predict(d, c_star)
    if args.dim == 1:
        e = np.array([[1.0], [-1.0]])
        angles = np.array([0.0, np.pi])
    else:
        angles = np.linspace(0.0, 2.0 * np.pi, args.points, endpoint=False)
        e = np.column_stack([np.cos(angles), np.sin(angles)])
    w = pred.w_of_e(e)
    _write_rows(args.csv, ["angle", "w"], [[repr(float(a)), repr(float(v))] for a, v in zip(angles, w)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spreadlab", description="Spreading of reaction-diffusion fronts from general initial supports.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("list", help="list the scenario catalog")
    s.set_defaults(func=_cmd_list)

    s = sub.add_parser("run", help="run scenarios by catalog id or JSON path")
    s.add_argument("scenarios", nargs="*")
    s.add_argument("--all", action="store_true", help="run the whole catalog")
    s.add_argument("--out", help=f"output directory (default ${harness.OUT_ENV} or ./{harness.DEFAULT_OUT})")
    s.add_argument("--jobs", type=int, default=1, help="scenarios run in parallel processes")
    s.set_defaults(func=_cmd_run)

    s = sub.add_parser("front-speed", help="minimal front speed of a reaction, e.g. 'bistable(a=0.3)'")
    s.add_argument("reaction")
    s.add_argument("--tol", type=float, default=1e-3)
    s.set_defaults(func=_cmd_front_speed)

    s = sub.add_parser("direction-sets", help="bounded/unbounded direction labels of a support")
    s.add_argument("--support", required=True)
    s.add_argument("--dim", type=int, default=2, choices=(1, 2))
    s.add_argument("--rho", type=float, default=0.5)
    s.add_argument("--M", type=int, default=geometry.DEFAULT_M)
    s.add_argument("--csv", help="CSV path ('-' or omitted: stdout)")
    s.set_defaults(func=_cmd_direction_sets)

    s = sub.add_parser("spreading-set", help="predicted spreading speed w(e) around the circle")
    s.add_argument("--support", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--cstar", type=float)
    g.add_argument("--reaction")
    s.add_argument("--dim", type=int, default=2, choices=(1, 2))
    s.add_argument("--rho", type=float, default=0.5)
    s.add_argument("--M", type=int, default=geometry.DEFAULT_M)
    s.add_argument("--points", type=int, default=360)
    s.add_argument("--csv", help="CSV path ('-' or omitted: stdout)")
    s.set_defaults(func=_cmd_spreading_set)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = args.func(args)
        sys.stdout.flush()
        return rc
    except (ValueError, FrontError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # output piped into e.g. head; stop quietly
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
