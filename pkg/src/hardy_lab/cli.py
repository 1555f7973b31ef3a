"""Batch front door: ingest trees and profiles, run the computations, and
write machine-readable reports.

Subcommands: tree, hardy, covering, decompose, ineq. Every report embeds the
full resolved configuration and the library version; writes are atomic
(tmp + rename) and byte-identical for identical configurations. Exit codes:
0 ok, 1 invariant violation, 2 bad input, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .covering import (
    PROFILES,
    CoveringError,
    CubeCapExceeded,
    build_covering,
    check_disjoint_and_coverage,
    profile_demo,
    profile_flat,
    tail_integrability,
    verify_counting_bounds,
    weights_from_beta,
)
from .decomp import decompose, random_mean_zero, space_from_covering, verify_decomposition
from .hardy import HardyProblem, hardy_report, make_problem
from .inequalities import (
    KINDS,
    f_linear,
    inequality_ratio,
    parameter_sweep,
    worker_count,
)
from .tree import RootedTree, TreeError, chain_tree, random_tree, star_tree

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_BAD_INPUT = 2
EXIT_CAP = 3


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def write_report(path: str, payload: dict, config: dict) -> None:
    doc = {"version": __version__, "config": config, "report": payload}
    _atomic_write(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def write_csv(path: str, rows: list[dict]) -> None:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    _atomic_write(path, buf.getvalue())


def _config(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    cfg["workers"] = worker_count(cfg.get("workers"))
    return cfg


def _profile(args):
    if args.phi == "demo":
        return profile_demo()
    if args.phi == "flat":
        return profile_flat()
    raise TreeError(f"unknown profile {args.phi!r}: choose from {sorted(PROFILES)}")


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


# -- subcommands -----------------------------------------------------------------

def cmd_tree(args) -> int:
    if args.chain:
        tree = chain_tree(args.chain)
    elif args.star:
        tree = star_tree(args.star)
    elif args.random:
        tree = random_tree(args.random, np.random.default_rng(args.seed))
    elif args.input:
        tree = RootedTree.from_json(_load_json(args.input))
    else:
        raise TreeError("one of --chain/--star/--random/--input is required")
    write_report(os.path.join(args.out, "tree.json"),
                 tree.to_json(), _config(args))
    return EXIT_OK


def cmd_hardy(args) -> int:
    obj = _load_json(args.input)
    payload = obj.get("report", obj)      # accept both raw and wrapped files
    if "u" in payload:
        problem = HardyProblem.from_json(payload)
    else:
        tree = RootedTree.from_json(payload)
        ones = [1.0] * len(tree.gamma_star)
        problem = make_problem(tree, ones, ones, args.p)
    rep = hardy_report(problem, theta_max=args.theta_max, b_cap=args.cap,
                       seed=args.seed)
    write_report(os.path.join(args.out, "hardy.json"), rep.to_json(), _config(args))
    if args.format == "csv":
        row = {k: v for k, v in rep.to_json().items()
               if isinstance(v, (int, float, str)) or v is None}
        write_csv(os.path.join(args.out, "hardy.csv"), [row])
    if not all(rep.checks.values()):
        failed = [k for k, ok in rep.checks.items() if not ok]
        print(f"invariant violation: {failed}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_covering(args) -> int:
    cov = build_covering(_profile(args), args.depth, cube_cap=args.cap)
    struct = check_disjoint_and_coverage(cov)
    bounds = verify_counting_bounds(cov)
    tail = tail_integrability(cov, args.beta, args.p)
    payload = {
        "covering": cov.to_json(),
        "structure": {"disjoint": struct["disjoint"],
                      "coverage_exact": struct["coverage_exact"],
                      "covered_volume": float(struct["covered_volume"])},
        "bounds": bounds.to_json(),
        "tail": tail.to_json(),
    }
    cfg = _config(args)
    write_report(os.path.join(args.out, "covering.json"), payload, cfg)
    write_csv(os.path.join(args.out, "levels.csv"), cov.level_rows())
    if not (struct["disjoint"] and struct["coverage_exact"]):
        print("invariant violation: covering structure", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_decompose(args) -> int:
    cov = build_covering(_profile(args), args.depth, cube_cap=args.cap)
    problem = weights_from_beta(cov, args.beta, args.p)
    space = space_from_covering(cov, beta=args.beta)
    g = random_mean_zero(space, np.random.default_rng(args.seed))
    result = decompose(g, problem)
    from .hardy import optimize_theta
    bound = optimize_theta(problem, theta_max=args.theta_max).suff_bound
    report = verify_decomposition(result, bound)
    payload = {"decomposition": result.to_json(), "verification": report.to_json()}
    write_report(os.path.join(args.out, "decomposition.json"), payload, _config(args))
    return EXIT_OK


def cmd_ineq(args) -> int:
    cov = build_covering(_profile(args), args.depth, cube_cap=args.cap)
    f = f_linear()
    cfg = _config(args)
    if args.beta_grid:
        grid = [float(b) for b in args.beta_grid.split(",")]
        rows = parameter_sweep(args.kind, f, cov, grid, args.p,
                               samples=args.samples, seed=args.seed,
                               s=args.s, tau=args.tau, workers=args.workers)
        payload = {"sweep": [r.to_json() for r in rows]}
        write_report(os.path.join(args.out, "ineq.json"), payload, cfg)
        write_csv(os.path.join(args.out, "sweep.csv"),
                  [{"beta": r.beta, "ratio": r.report.ratio,
                    "lhs": r.report.lhs, "rhs": r.report.rhs,
                    "spread": r.report.spread,
                    "below_threshold": r.below_threshold,
                    "growing": r.growing} for r in rows])
        return EXIT_OK
    rep = inequality_ratio(args.kind, f, cov, args.beta, args.p, s=args.s,
                           tau=args.tau, samples=args.samples, seed=args.seed,
                           workers=args.workers)
    write_report(os.path.join(args.out, "ineq.json"), rep.to_json(), cfg)
    if args.format == "csv":
        write_csv(os.path.join(args.out, "ineq.csv"),
                  [{"kind": rep.kind, "lhs": rep.lhs, "rhs": rep.rhs,
                    "ratio": rep.ratio, "samples": rep.sample_count,
                    "spread": rep.spread, "seed": rep.seed}])
    if "inequality_violating_candidate" in rep.flags:
        print("flagged: inequality-violating candidate", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardy-lab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, samples=False):
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=None,
                        help="fallback: HARDY_LAB_WORKERS")
        sp.add_argument("--format", choices=["json", "csv"], default="json")

    sp = sub.add_parser("tree", help="generate or load a tree")
    sp.add_argument("--chain", type=int, default=0, metavar="EDGES")
    sp.add_argument("--star", type=int, default=0, metavar="LEAVES")
    sp.add_argument("--random", type=int, default=0, metavar="VERTICES")
    sp.add_argument("--input")
    common(sp)
    sp.set_defaults(func=cmd_tree)

    sp = sub.add_parser("hardy", help="full Hardy constant report")
    sp.add_argument("--input", required=True, help="problem or tree JSON")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--theta-max", type=float, default=64.0)
    sp.add_argument("--cap", type=int, default=10 ** 6)
    common(sp)
    sp.set_defaults(func=cmd_hardy)

    sp = sub.add_parser("covering", help="build a cube covering and verify it")
    sp.add_argument("--phi", default="demo", help="profile: demo | flat")
    sp.add_argument("--alpha", type=float, default=None,
                    help="informational; profiles carry their own alpha")
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--cap", type=int, default=10 ** 6)
    common(sp)
    sp.set_defaults(func=cmd_covering)

    sp = sub.add_parser("decompose", help="decompose a random mean-zero function")
    sp.add_argument("--phi", default="demo")
    sp.add_argument("--depth", type=int, default=5)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--theta-max", type=float, default=64.0)
    sp.add_argument("--cap", type=int, default=10 ** 6)
    common(sp)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("ineq", help="inequality ratio checkers and sweeps")
    sp.add_argument("--kind", choices=KINDS, default="improved_poincare")
    sp.add_argument("--phi", default="demo")
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--beta-grid", default=None, help="comma-separated betas")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--s", type=float, default=None)
    sp.add_argument("--tau", type=float, default=None)
    sp.add_argument("--samples", type=int, default=10 ** 5)
    sp.add_argument("--cap", type=int, default=10 ** 6)
    common(sp)
    sp.set_defaults(func=cmd_ineq)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except CubeCapExceeded as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (TreeError, CoveringError, ValueError, OSError, KeyError,
            json.JSONDecodeError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
