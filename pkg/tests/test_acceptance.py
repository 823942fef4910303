"""Acceptance suite: one PASS/FAIL line per criterion.

Each test records its line through the ``report`` fixture (the lines are
repeated in the terminal summary) and then asserts the same verdict, so a
failing criterion is a failing test.  Tolerances are the ones fixed for the
acceptance run; printed reference values are rounded, exact values are ours.
"""

import random
import re
import time
from fractions import Fraction as F

import pytest
from conftest import fixture_path
from randinst import random_instance, sample_zetas

from rvfef.cli import main
from rvfef.exact import INF
from rvfef.model import load_instance_file
from rvfef.polyhedra import enumerate_vertices_rays
from rvfef.rvf import InvariantError, RvfModel, construct, load_description
from rvfef.rvf.frontier import (
    NDP,
    WEAK,
    breakpoints_1d,
    classify_criterion_point,
    domain_box,
    extract_frontier,
)

EX1 = str(fixture_path("example1.json"))

# reference values as printed (rounded)
TRACE_REF = [F(40, 9), -55.5, F(-73, 6), -10]
BREAKS_REF = [-12.167, -10, -7.833, -6.4]
DOMAIN_LEFT_REF = F(-173, 3)  # -57 2/3
REGIONS_REF = {
    (1, 1): [("[", -12.167, -10, ")")],
    (0, 1): [("[", -10, -7.833, "]")],
    (1, 0): [("[", -55.464, -12.167, ")"), ("[", -7.833, -6.4, "]")],
    (0, 0): [("[", -6.4, INF, ")")],
}
E_REF = [
    (-0.15, 0.16, 0, 0),
    (0, 0, 0, 0),
    (-2.35, -2.41, -4.59, 0),
    (-1.33, -1.22, 0, 0),
    (-1.61, -1.97, 0, 0),
    (0, -1, 0, 0),
]
R_REF = [
    (0, 0, 0, -1),
    (0, -1, 0, -10),
    (-1, -2.66, 0, -20.66),
    (-1, -1.166, -4.5, -5.66),
    (0, 0, -1, 0),
]
SLOPES_REF = [0, -2.35, -1.61, -1.33, -0.15]
SOLID_REF = [(-12.108, 7.355), (-9.940, 5)]
OPEN_REF = [(-12.189, 10.607), (-10.020, 6.95), (-7.851, 5)]


def fmt(v):
    return "+inf" if v == INF else f"{float(v):.4f}"


def ray_error(r, p):
    """Smallest max-coordinate error of ``s*r`` against ``p`` over ``s > 0``."""
    r = [float(a) for a in r]
    cands = {1.0}
    for i in range(len(r)):
        if r[i]:
            cands.add(p[i] / r[i])
        for j in range(len(r)):
            if r[i] + r[j]:
                cands.add((p[i] + p[j]) / (r[i] + r[j]))
    return min(max(abs(s * a - b) for a, b in zip(r, p)) for s in cands if s > 0)


def stability_regions_1d(desc, lo, hi):
    """Exact regions of every part as ``(lo_flag, lo, hi, hi_flag)`` lists.

    Membership is constant between consecutive breakpoints, so it is tested at
    every breakpoint and every midpoint; the region right of ``hi`` is probed
    at ``hi + 1`` (z is constant there).
    """
    bps = breakpoints_1d(desc, lo, hi)
    probes = []  # (point, open interval (a, c) it stands for, or None)
    for i, b in enumerate(bps):
        probes.append((b, None))
        c = bps[i + 1] if i + 1 < len(bps) else INF
        probes.append(((b + c) / 2 if c != INF else b + 1, (b, c)))
    out = {}
    for part in desc.parts:
        ivs = []
        for t, span in probes:
            if not desc.stability_region_contains(part, (t,)):
                continue
            if span is None:
                if ivs and ivs[-1][2] == t and ivs[-1][3] == ")":
                    ivs[-1][3] = "]"
                else:
                    ivs.append(["[", t, t, "]"])
            else:
                a, c = span
                if ivs and ivs[-1][2] == a and ivs[-1][3] == "]":
                    ivs[-1][2], ivs[-1][3] = c, ")"
                else:
                    ivs.append(["(", a, c, ")"])
        out[part] = [tuple(iv) for iv in ivs]
    return out


@pytest.fixture(scope="module")
def ex1_frontier(ex1):
    return extract_frontier(ex1)


# -- 1 ---------------------------------------------------------------------------


def test_criterion_1_example1_end_to_end(report):
    t0 = time.perf_counter()
    model = RvfModel(load_instance_file(EX1))
    desc = construct(model)
    elapsed = time.perf_counter() - t0
    productive = [e for e in desc.log if e.part is not None]
    zetas = [e.zeta[0] for e in productive]
    trace_ok = len(zetas) == len(TRACE_REF) and all(
        abs(float(a) - float(b)) <= 1e-2 for a, b in zip(zetas, TRACE_REF)
    )
    ok = (
        set(desc.parts) == {(0, 0), (1, 0), (1, 1), (0, 1)}
        and len(productive) == 4
        and desc.terminated
        and desc.log[-1].theta == 0
        and len(desc.log) <= 6
        and trace_ok
        and elapsed < 60
    )
    detail = (
        f"parts {sorted(desc.parts)}, {len(productive)} productive iterations, "
        f"terminal theta {desc.log[-1].theta}, {len(desc.log)} solves, "
        f"trace {[str(z) for z in zetas]}, {elapsed:.1f} s"
    )
    assert report(1, ok, detail)


# -- 2 ---------------------------------------------------------------------------


def test_criterion_2_stability_breakpoints(report, ex1):
    lo, hi = domain_box(ex1)
    regions = stability_regions_1d(ex1, lo[0], hi[0])
    # interior boundaries: every region endpoint except the domain's left end
    ends = set()
    for ivs in regions.values():
        for _, a, b, _ in ivs:
            ends.update(t for t in (a, b) if t != INF)
    left = min(ends)
    ends.discard(left)
    ends = sorted(ends)
    value_errs = [min(abs(float(t) - r) for t in ends) for r in BREAKS_REF]
    extra = [t for t in ends if min(abs(float(t) - r) for r in BREAKS_REF) > 1e-3]
    values_ok = max(value_errs) <= 1e-3 and not extra

    flags_ok = True
    for part, want in REGIONS_REF.items():
        got = regions.get(part, [])
        if len(got) != len(want):
            flags_ok = False
            continue
        for (gf, _, gb, gh), (wf, _, wb, wh) in zip(got, want):
            if (gf, gh) != (wf, wh) or (gb == INF) != (wb == INF):
                flags_ok = False
    left10 = regions[(1, 0)][0][1]
    left_ok = abs(float(left10) - float(DOMAIN_LEFT_REF)) <= 1e-3 and left10 == lo[0]

    shown = "; ".join(
        f"C{p} = " + " u ".join(f"{a}{fmt(x)}, {fmt(y)}{b}" for a, x, y, b in regions[p])
        for p in REGIONS_REF
    )
    detail = (
        f"boundaries {[str(t) for t in ends]} (max error vs printed list "
        f"{max(value_errs):.4f}), flags {'match' if flags_ok else 'differ'}, "
        f"(1,0) left end {left10} vs domain -57 2/3 {'ok' if left_ok else 'mismatch'}; {shown}"
    )
    assert report(2, values_ok and flags_ok and left_ok, detail)


# -- 3 ---------------------------------------------------------------------------


def test_criterion_3_dual_polyhedron_fixture(report, ex1_model):
    P = ex1_model.space.polyhedron
    v = enumerate_vertices_rays(P)
    E, R = list(v.E), list(v.R)
    e_err = max(min(max(abs(float(a) - b) for a, b in zip(e, p)) for e in E) for p in E_REF)
    r_err = max(min(ray_error(r, p) for r in R) for p in R_REF)
    pieces = ex1_model.bounding((0, 0)).handle.affine_description().pieces
    slopes = sorted(float(u[0]) for u, _ in pieces)
    s_err = max(
        abs(a - b) for a, b in zip(slopes, sorted(SLOPES_REF))
    ) if len(slopes) == len(SLOPES_REF) else INF
    ok = (
        len(E) == 6
        and len(R) == 5
        and e_err <= 5e-3
        and r_err <= 5e-3
        and len(pieces) == 5
        and s_err <= 5e-2
    )
    detail = (
        f"{len(E)} points (max error {e_err:.4f}), {len(R)} rays (max error up to "
        f"scaling {r_err:.5f}), {len(pieces)} pieces (max slope error {s_err:.4f})"
    )
    assert report(3, ok, detail)


# -- 4 ---------------------------------------------------------------------------


def closed_form(z1, z2):
    if 2 <= z1 <= 3 and z2 >= 2:
        return F(2)
    if (z1 <= 5 and z2 < 2) or 0 <= z1 < 2 or 3 < z1 <= 5:
        return 5 - z1
    return F(0)


def test_criterion_4_example3_closed_form(report, ex3):
    grid = [F(k, 2) for k in range(13)]
    bad_values, bad_regions = [], []
    for a in grid:
        for b in grid:
            if ex3.eval_rvf((a, b)) != closed_form(a, b):
                bad_values.append((a, b))
            want = a < 2 or a >= 3 or b < 2
            if ex3.stability_region_contains((1,), (a, b)) != want:
                bad_regions.append((a, b))
    spots = {(2, 3): 2, (1, 1): 4, (6, 3): 0}
    spots_ok = all(ex3.eval_rvf((F(a), F(b))) == v for (a, b), v in spots.items())
    ok = not bad_values and not bad_regions and spots_ok
    detail = (
        f"{len(grid) ** 2} grid points, {len(bad_values)} value mismatches, "
        f"{len(bad_regions)} region mismatches, z(2,3)=2 z(1,1)=4 z(6,3)=0 "
        f"{'hold' if spots_ok else 'fail'}"
    )
    assert report(4, ok, detail)


# -- 5 ---------------------------------------------------------------------------


def _ndp_near(desc, cells, a, b, tol=1e-2, steps=200):
    """Best max-coordinate distance from ``(a, b)`` to an NDP of the frontier.

    The window ``|zeta - a| <= tol`` is scanned on a fine rational grid plus
    every cell endpoint in it, so a point within tolerance is not missed.
    """
    lo, hi = F(a) - F(tol), F(a) + F(tol)
    ts = {lo + (hi - lo) * F(k, steps) for k in range(steps + 1)}
    for c in cells:
        ts.update(t for t in (c.lo, c.hi) if lo <= t <= hi)
    best = INF
    for t in ts:
        for c in cells:
            if c.klass == NDP and c.contains((t,)):
                d = max(abs(float(t) - a), abs(float(c.value((t,))) - b))
                best = min(best, d)
    return best


def test_criterion_5_example1_frontier(report, ex1, ex1_frontier):
    cells = ex1_frontier
    solid = [_ndp_near(ex1, cells, a, b) for a, b in SOLID_REF]
    opened = [_ndp_near(ex1, cells, a, b) for a, b in OPEN_REF]
    weak = [c for c in cells if c.klass == WEAK]
    flat = len(weak) == 1 and weak[0].piece[0] == (0,) and weak[0].piece[1] == 5
    solid_ok = all(d <= 1e-2 for d in solid)
    open_ok = all(d > 1e-2 for d in opened)
    # exact NDPs that the printed solid points stand for
    exact = [(F(-73, 6), ex1.eval_rvf((F(-73, 6),))), (F(-10), ex1.eval_rvf((F(-10),)))]
    detail = (
        f"solid points nearest NDP at distance {[round(float(d), 4) for d in solid]}, "
        f"open points nearest NDP at {[round(float(d), 4) for d in opened]}, "
        f"{len(weak)} weak-only cell{'' if len(weak) == 1 else 's'}"
        f"{' (flat at z = 5)' if flat else ''}; exact NDP endpoints "
        f"{[(str(x), str(y)) for x, y in exact]}"
    )
    assert report(5, solid_ok and open_ok and flat, detail)


# -- 6 ---------------------------------------------------------------------------


def test_criterion_6_example4_all_ndp(report):
    inst = load_instance_file(fixture_path("example4.json"))
    desc = construct(inst)
    cells = extract_frontier(desc)
    weak = [c for c in cells if c.klass != NDP]
    shown = ", ".join(
        f"z = {c.value((c.lo,))} on {'[' if c.lo_closed else '('}{c.lo}, {c.hi}"
        f"{']' if c.hi_closed else ')'} from part {c.part}"
        for c in weak
    )
    detail = f"{len(cells)} cells, {len(weak)} not NDP" + (f" ({shown})" if weak else "")
    assert report(6, not weak, detail)


# -- 7 ---------------------------------------------------------------------------


def test_criterion_7_oracle_equivalence(report):
    rng = random.Random(7)
    t0 = time.perf_counter()
    mismatches, checked, ells = 0, 0, []
    for _ in range(20):
        inst = random_instance(rng)
        ells.append(inst.ell)
        desc = construct(inst)
        lo, hi = domain_box(desc)
        for z in sample_zetas(rng, lo, hi, 25):
            checked += 1
            mismatches += desc.eval_rvf(z) != desc.model.oracle_z(z)
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and checked == 500 and elapsed < 600
    detail = (
        f"20 instances ({ells.count(1)} with one row, {ells.count(2)} with two), "
        f"{checked} points, {mismatches} mismatches, {elapsed:.1f} s"
    )
    assert report(7, ok, detail)


# -- 8 ---------------------------------------------------------------------------


def test_criterion_8_invariants(report, ex1, ex3, ex1_frontier):
    failures = []
    counts = {}

    def check(name, cond):
        counts[name] = counts.get(name, 0) + 1
        if not cond:
            failures.append(name)

    # subgradient chain and exact finite differences on the LP value function
    h = ex1.model.bounding((0, 0)).handle
    rnd = random.Random(8)
    for _ in range(40):
        a = (F(rnd.randint(-220, 40), 4),)
        b = (F(rnd.randint(-220, 40), 4),)
        va, vb = h.eval(a), h.eval(b)
        if va == INF:
            continue
        for g in h.subdifferential(a).interval():
            if g != INF and g != -INF:
                check("lp subgradient", vb == INF or vb >= va + g * (b[0] - a[0]))
        for d in (1, -1):
            dd = h.dir_deriv(a, (d,))
            t = h.linear_range(a, (d,))
            if dd != INF and t:
                step = min(t, F(1))
                check("lp finite difference", h.eval((a[0] + d * step,)) - va == dd * step)

    # monotone, lower semicontinuous and finite differences on the RVF
    for desc in (ex1, ex3):
        ell = desc.ell
        for _ in range(30):
            z = tuple(F(rnd.randint(-240, 48), 4) if ell == 1 else F(rnd.randint(0, 28), 4) for _ in range(ell))
            v = desc.eval_rvf(z)
            up = tuple(c + F(rnd.randint(0, 8), 4) for c in z)
            check("monotone", desc.eval_rvf(up) <= v)
            if v == INF:
                continue
            for j in range(ell):
                for s in (1, -1):
                    d = tuple(s if i == j else 0 for i in range(ell))
                    dd = desc.rvf_dir_deriv(z, d)
                    t = desc.linear_range(z, d)
                    if dd != INF and t:
                        step = min(t, F(1))
                        w = tuple(c + step * e for c, e in zip(z, d))
                        check("rvf finite difference", desc.eval_rvf(w) - v == dd * step)
    for b in breakpoints_1d(ex1, F(-173, 3), F(40, 9)):
        v = ex1.eval_rvf((b,))
        for eps in (F(1, 10**4), F(1, 10**6)):
            for w in (b - eps, b + eps):
                vw = ex1.eval_rvf((w,))
                # l.s.c.: nearby values cannot sit below z(b) by more than the slope allows
                check("lsc", vw == INF or vw >= v - 3 * eps)

    # every construct run carries the per-iteration assertions (checks=True)
    runs = 0
    try:
        for inst in (ex1.model, ex3.model):
            construct(inst, checks=True)
            runs += 1
        rng = random.Random(88)
        for _ in range(4):
            construct(random_instance(rng, ell=1), checks=True)
            runs += 1
    except InvariantError as exc:
        failures.append(f"construct invariant: {exc}")

    # one new integer part per productive iteration, tight at its own point
    for desc in (ex1, ex3):
        seen = set()
        for e in desc.log:
            if e.part is not None:
                check("new part", e.part not in seen)
                seen.add(e.part)
                check("new part tight", desc.model.bounding_eval(e.part, e.efficient[1:]) == e.efficient[0])

    # efficient points sit on the boundary of the epigraph
    ndps = 0
    for desc, cells in ((ex1, ex1_frontier), (ex3, extract_frontier(ex3))):
        for c in cells:
            if c.klass == NDP and c.criterion is not None:
                ndps += 1
                v, zeta = c.criterion[0], c.criterion[1:]
                check("boundary", desc.eval_rvf(zeta) == v)
                check("boundary class", classify_criterion_point(desc, zeta, v) == NDP)

    detail = (
        f"{runs} checked construct runs, {ndps} frontier NDPs on the epigraph boundary, "
        f"{sum(counts.values())} checks ({', '.join(f'{k} {v}' for k, v in sorted(counts.items()))}), "
        + (f"failures: {sorted(set(failures))}" if failures else "no violations")
    )
    assert report(8, not failures, detail)


# -- 9 ---------------------------------------------------------------------------


def test_criterion_9_early_termination(report, capsys, tmp_path, ex1_model, ex1):
    out = tmp_path / "early.json"
    code = main(["construct", "--instance", EX1, "--max-iters", "2", "--out", str(out)])
    text = capsys.readouterr().out
    m = re.search(r"guarantee theta (\S+)", text)
    theta = F(m.group(1)) if m else None

    desc = load_description(out)
    grid = [F(-18) + F(k, 2) for k in range(25)]
    step = F(1, 2)
    gaps = []
    for z in grid:
        zv = ex1_model.oracle_z((z,))
        if zv != INF:
            gaps.append((desc.eval_upper((z,)) - zv, z))
    grid_max = max(g for g, _ in gaps)
    verified = desc.log[-1].verified_gap
    star = desc.log[-1].zeta
    # the gap's one-sided slopes at its peak bound what a grid of spacing
    # ``step`` can miss
    lip = max(
        abs(desc.rvf_dir_deriv(star, d) - ex1.rvf_dir_deriv(star, d))
        for d in ((1,), (-1,))
        if ex1.rvf_dir_deriv(star, d) != INF
    )
    ok = (
        code == 0
        and theta is not None
        and grid_max <= theta
        and verified == theta
        and theta - grid_max <= lip * step
    )
    detail = (
        f"theta {theta}, verified gap {verified}, grid max {grid_max} "
        f"(short by {float(theta - grid_max):.4f}, allowed {float(lip * step):.4f})"
    )
    assert report(9, ok, detail)
