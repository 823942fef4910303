"""Command-line front end.

Exit codes: 0 success, 1 invariant failure, 2 input error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from itertools import product
from pathlib import Path

from .exact import INF, ParseError, rat_parse, rat_str
from .model import EmptyFeasibleRegion, InstanceError, UnboundedRegion, load_instance_file
from .rvf.algorithm import construct, solve_subproblem
from .rvf.core import InvariantError, RvfDescription, RvfModel
from .rvf.frontier import (
    OUTSIDE_DOMAIN,
    classify_criterion_point,
    domain_box,
    extract_frontier,
)
from .rvf.io import (
    description_from_dict,
    description_to_dict,
    frontier_csv,
    load_description,
    plot_csv,
    save_description,
    subproblem_text,
)
from .simplex import ContractError

EXIT_OK, EXIT_INVARIANT, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# -- argument helpers -----------------------------------------------------------


def parse_zeta(text: str, ell: int | None = None) -> tuple:
    try:
        z = tuple(rat_parse(v.strip()) for v in text.split(","))
    except ParseError as exc:
        raise InputError(f"bad zeta {text!r}: {exc}") from None
    if ell is not None and len(z) != ell:
        raise InputError(f"zeta {text!r} has dimension {len(z)}, expected {ell}")
    return z


def parse_grid(text: str, ell: int | None = None) -> list[tuple]:
    axes = []
    for spec in text.split(","):
        try:
            lo, hi, step = (rat_parse(v) for v in spec.split(":"))
        except (ParseError, ValueError):
            raise InputError(f"bad grid axis {spec!r}; expected lo:hi:step") from None
        if step <= 0 or hi < lo:
            raise InputError(f"bad grid axis {spec!r}")
        n = int((hi - lo) / step)
        axes.append([lo + k * step for k in range(n + 1)])
    if ell is not None and len(axes) != ell:
        raise InputError(f"grid has {len(axes)} axes, expected {ell}")
    return [tuple(p) for p in product(*axes)]


def _open_out(path):
    return open(path, "w", newline="") if path else contextlib.nullcontext(sys.stdout)


def _zetas(args, ell) -> list[tuple]:
    pts = [parse_zeta(z, ell) for z in args.zeta or []]
    if args.grid:
        pts += parse_grid(args.grid, ell)
    if not pts:
        raise InputError("no zeta given (use --zeta or --grid)")
    return pts


def _load_desc(args) -> RvfDescription:
    if not args.description:
        raise InputError("--description is required")
    return load_description(args.description)


# -- parallel workers -------------------------------------------------------------

_WORKER: dict = {}


def _init_worker(desc_dict):
    _WORKER["desc"] = description_from_dict(desc_dict)


def _oracle_task(zeta):
    return _WORKER["desc"].model.oracle_z(zeta)


def _classify_task(zeta):
    return classify_criterion_point(_WORKER["desc"], zeta)


def _pmap(desc: RvfDescription, fn, items, nproc: int):
    if nproc <= 1 or len(items) < 2:
        _WORKER["desc"] = desc
        return [fn(z) for z in items]
    with ProcessPoolExecutor(nproc, initializer=_init_worker, initargs=(description_to_dict(desc),)) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * nproc))))


# -- commands ---------------------------------------------------------------------


def cmd_construct(args) -> int:
    if not args.instance:
        raise InputError("--instance is required")
    inst = load_instance_file(args.instance)
    model = RvfModel(inst)
    print(f"instance {inst.name or Path(args.instance).stem}: n={inst.n} r={inst.r} ell={inst.ell}")
    print(f"U {rat_str(model.init_upper_bound())}")
    count = [0]

    def report(e):
        count[0] += 1
        z = ",".join(rat_str(v) for v in e.zeta)
        kind = "attained" if e.attained else "approached"
        print(f"iter {count[0]} theta {rat_str(e.theta)} ({kind}) zeta {z} part {','.join(map(str, e.part))}")

    desc = construct(model, max_iters=args.max_iters, on_iteration=report, method=args.method)
    last = desc.log[-1]
    if desc.terminated:
        print(f"terminated theta {rat_str(last.theta)} parts {len(desc.parts)} solves {len(desc.log)}")
    else:
        print(f"stopped early; guarantee theta {rat_str(last.theta)} (max error of the upper approximation)")
    if args.out:
        save_description(desc, args.out)
    return EXIT_OK


def _subdiff_summary(desc, zeta) -> str:
    poly = desc.local_subdifferential(zeta)
    if poly is None or poly.is_empty():
        return "empty"
    if desc.ell == 1:
        lo, hi = poly.interval()
        return f"[{'-inf' if lo == -INF else rat_str(lo)},{rat_str(hi)}]"
    vr = poly.vrep()
    pts = ";".join("(" + ",".join(rat_str(v) for v in p) + ")" for p in vr.E)
    return pts + (f" +{len(vr.R)} rays" if vr.R else "")


def cmd_evaluate(args) -> int:
    desc = _load_desc(args)
    if not desc.terminated:
        raise InputError("description not terminated")
    pts = _zetas(args, desc.ell)
    classes = _pmap(desc, _classify_task, pts, args.parallel)
    with _open_out(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"zeta{j + 1}" for j in range(desc.ell)] + ["z", "finite", "active_parts", "class", "subdifferential"])
        for zeta, klass in zip(pts, classes):
            z = desc.min_parts(zeta)
            zs = [rat_str(v) for v in zeta]
            if z == INF:
                w.writerow(zs + ["+inf", 0, "", OUTSIDE_DOMAIN, ""])
                continue
            act = " ".join("(" + ",".join(map(str, p)) + ")" for p in desc.active_parts(zeta))
            w.writerow(zs + [rat_str(z), 1, act, klass, _subdiff_summary(desc, zeta)])
    return EXIT_OK


def cmd_frontier(args) -> int:
    desc = _load_desc(args)
    if not desc.terminated:
        raise InputError("description not terminated")
    if desc.ell > 2:
        raise InputError("cell output needs at most two parametric rows; use evaluate for point queries")
    cells = extract_frontier(desc)
    text = frontier_csv(cells, desc.ell)
    plot = plot_csv(cells, desc.ell)
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        plot_path = out.with_name(out.stem + "_plot.csv")
        plot_path.write_text(plot)
        print(f"{len(cells)} cells -> {out}; plot data -> {plot_path}")
    else:
        sys.stdout.write(text)
    weak = sum(1 for c in cells if c.klass != "NDP")
    print(f"cells {len(cells)} NDP {len(cells) - weak} weak-only {weak}", file=sys.stderr)
    return EXIT_OK


def _check_points(desc, args) -> list[tuple]:
    ell = desc.ell
    if args.grid:
        pts = parse_grid(args.grid, ell)
        lo = [min(p[j] for p in pts) for j in range(ell)]
        hi = [max(p[j] for p in pts) for j in range(ell)]
    else:
        lo, hi = domain_box(desc)
        lo = [v - 1 for v in lo]
        hi = [v + 1 for v in hi]
        per = 41 if ell == 1 else 9 if ell == 2 else 4
        axes = [[lo[j] + (hi[j] - lo[j]) * Fraction(k, per - 1) for k in range(per)] for j in range(ell)]
        pts = [tuple(p) for p in product(*axes)]
    rng = random.Random(0)
    for _ in range(25):
        pts.append(tuple(lo[j] + (hi[j] - lo[j]) * Fraction(rng.randrange(1000), 999) for j in range(ell)))
    return pts


def cmd_check(args) -> int:
    desc = _load_desc(args)
    if args.instance:
        inst = load_instance_file(args.instance)
        if inst != desc.inst:
            raise InputError("instance file does not match the description")
    if not desc.terminated:
        raise InputError("description not terminated")
    ell = desc.ell
    failures = 0

    def fail(what, zeta, detail):
        nonlocal failures
        failures += 1
        print(f"FAIL {what} at zeta {','.join(rat_str(v) for v in zeta)}: {detail}")

    # exact certificate: no feasible point lies strictly below the description
    report, _, x_star = solve_subproblem(desc)
    if report.theta != 0:
        fail("gap certificate", desc.inst.criterion(x_star)[1:], f"theta {rat_str(report.theta)} > 0")
    print(f"{'PASS' if failures == 0 else 'FAIL'} gap certificate (theta {rat_str(report.theta)})")
    before = failures
    pts = _check_points(desc, args)
    oracle = _pmap(desc, _oracle_task, pts, args.parallel)
    for zeta, zo in zip(pts, oracle):
        zd = desc.min_parts(zeta)
        if zd != zo:
            fail("oracle", zeta, f"description {rat_str(zd)} oracle {rat_str(zo)}")
    print(f"{'PASS' if failures == before else 'FAIL'} oracle equivalence on {len(pts)} points")
    before = failures
    h = [Fraction(1, 4)] * ell
    for zeta in pts:
        z0 = desc.min_parts(zeta)
        for j in range(ell):
            up = tuple(v + (h[j] if k == j else 0) for k, v in enumerate(zeta))
            if desc.min_parts(up) > z0:
                fail("monotonicity", zeta, f"z increases along axis {j + 1}")
    print(f"{'PASS' if failures == before else 'FAIL'} monotonicity")
    before = failures
    tested = 0
    for zeta in pts:
        z0 = desc.min_parts(zeta)
        if z0 == INF:
            continue
        poly = desc.local_subdifferential(zeta)
        if poly.is_empty():
            continue
        for g in poly.vrep().E[:2]:
            eps = desc.local_radius(zeta, g)
            for j in range(ell):
                for s in (1, -1):
                    z1 = tuple(v + (s * eps if k == j else 0) for k, v in enumerate(zeta))
                    tested += 1
                    rhs = z0 + sum(a * (b - c) for a, b, c in zip(g, z1, zeta))
                    if desc.min_parts(z1) < rhs:
                        fail("local subgradient", zeta, f"q={[rat_str(a) for a in g]} violated at {[rat_str(v) for v in z1]}")
    print(f"{'PASS' if failures == before else 'FAIL'} local subgradient inequalities ({tested} checks)")
    return EXIT_OK if failures == 0 else EXIT_INVARIANT


def cmd_export_subproblem(args) -> int:
    if args.description:
        desc = load_description(args.description)
    elif args.instance:
        model = RvfModel(load_instance_file(args.instance))
        desc = RvfDescription(model, model.init_upper_bound())
    else:
        raise InputError("--description or --instance is required")
    text = subproblem_text(desc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "construct": cmd_construct,
    "evaluate": cmd_evaluate,
    "frontier": cmd_frontier,
    "check": cmd_check,
    "export-subproblem": cmd_export_subproblem,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rvfef",
        description="Restricted value function and efficient frontier of a multiobjective MILP.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--instance", metavar="PATH", help="instance JSON")
    parser.add_argument("--description", metavar="PATH", help="description JSON written by construct")
    parser.add_argument("--zeta", action="append", metavar="V1,V2,...", help="query point (repeatable)")
    parser.add_argument("--grid", metavar="LO:HI:STEP[,...]", help="rectangular grid of query points")
    parser.add_argument("--out", metavar="PATH", help="output file (stdout if omitted)")
    parser.add_argument("--parallel", type=int, default=1, metavar="N", help="worker processes for oracle solves")
    parser.add_argument("--max-iters", type=int, default=None, metavar="K", help="stop after K productive iterations")
    parser.add_argument(
        "--method",
        choices=("auto", "disjunctive", "envelope"),
        default="auto",
        help="gap subproblem solver (envelope: at most two parametric rows; auto picks it when it applies)",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except EmptyFeasibleRegion:
        print("error: empty feasible region", file=sys.stderr)
        return EXIT_INPUT
    except UnboundedRegion as exc:
        d = ",".join(rat_str(v) for v in exc.direction) if exc.direction else ""
        print(f"error: {exc} (direction {d})", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, InstanceError, ParseError, ContractError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
