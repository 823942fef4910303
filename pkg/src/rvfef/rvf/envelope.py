"""Gap subproblem by decomposition of zeta-space.

``E = min(U, min_i zbar_i)`` is lower semicontinuous and piecewise affine.
The zeta-space is covered by elements on each of which ``E`` is a single
affine function:

* one parametric row: the breakpoints of ``E`` and the open intervals
  between them;
* two parametric rows: the open interiors of the convex cells of an exact
  polygon overlay, plus, on every line carrying a cell edge, the points and
  open intervals of ``E`` restricted to that line.

The gap problem then splits into one small MILP per element (strict rows for
open elements).  Elements are screened by a cheap bound, then by their LP
bound, and solved best first until nothing left can beat the incumbent.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..exact import INF, dot, primitive_int
from ..milp import EQ, GE, LE, OPTIMAL, MilpProblem, Row, solve_general_lp, solve_milp

# ----------------------------------------------------------------------------
# one dimension


@dataclass
class Envelope1D:
    """Breakpoints ``bps`` with point values ``pv`` and interval affines ``iv``.

    ``iv[i]`` is ``(slope, const)`` or ``None`` (+inf) on the open interval
    before ``bps[i]``; ``iv[-1]`` is the interval after the last breakpoint.
    """

    bps: list
    pv: list
    iv: list

    @staticmethod
    def constant(value) -> "Envelope1D":
        return Envelope1D([], [], [(Fraction(0), Fraction(value))])

    def value(self, t):
        for i, b in enumerate(self.bps):
            if t == b:
                return self.pv[i]
            if t < b:
                return _ev(self.iv[i], t)
        return _ev(self.iv[-1], t)

    def elements(self):
        """``("iv", lo, hi, affine)`` (``None`` for an infinite end) and
        ``("pt", b, b, value)``, left to right."""
        out = []
        for i, b in enumerate(self.bps):
            out.append(("iv", self.bps[i - 1] if i else None, b, self.iv[i]))
            out.append(("pt", b, b, self.pv[i]))
        out.append(("iv", self.bps[-1] if self.bps else None, None, self.iv[-1]))
        return out


def _ev(aff, t):
    return INF if aff is None else aff[0] * t + aff[1]


def _sample(lo, hi):
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return hi - 1
    if hi is None:
        return lo + 1
    return (lo + hi) / 2


def piecewise_1d(pieces, lo, hi) -> Envelope1D:
    """``max`` of ``(slope, const)`` pieces on ``[lo, hi]``, +inf elsewhere."""
    cand = {p for p in (lo, hi) if p is not None}
    for i, (a1, k1) in enumerate(pieces):
        for a2, k2 in pieces[i + 1 :]:
            if a1 != a2:
                t = (k2 - k1) / (a1 - a2)
                if (lo is None or t > lo) and (hi is None or t < hi):
                    cand.add(t)
    bps = sorted(cand)

    def inside(t):
        return (lo is None or t >= lo) and (hi is None or t <= hi)

    def best(t):
        return max(pieces, key=lambda pc: (pc[0] * t + pc[1], pc))

    edges = [None] + bps + [None]
    iv = []
    for i in range(len(bps) + 1):
        s = _sample(edges[i], edges[i + 1])
        iv.append(best(s) if inside(s) else None)
    pv = [_ev(best(b), b) if inside(b) else INF for b in bps]
    return _compress(Envelope1D(bps, pv, iv))


def part_function(bf) -> Envelope1D:
    """A bounding function of one parametric row as an :class:`Envelope1D`."""
    return restrict_to_line(bf, (Fraction(0),), (Fraction(1),))


def restrict_to_line(bf, P, D) -> Envelope1D:
    """``t -> bf(P + t D)``."""
    lo = hi = None
    for e, rhs in bf.domain:
        s = dot(e, D)
        r = rhs - dot(e, P)
        if s == 0:
            if r < 0:
                return Envelope1D([], [], [None])
            continue
        t = r / s
        if s > 0:
            hi = t if hi is None else min(hi, t)
        else:
            lo = t if lo is None else max(lo, t)
    if lo is not None and hi is not None and lo > hi:
        return Envelope1D([], [], [None])
    pieces = sorted({(dot(u, D), dot(u, P) + k) for u, k in bf.pieces})
    return piecewise_1d(pieces, lo, hi)


def _compress(f: Envelope1D) -> Envelope1D:
    bps, pv, iv = [], [], [f.iv[0]]
    for i, b in enumerate(f.bps):
        left, right = iv[-1], f.iv[i + 1]
        if left == right and _ev(left, b) == f.pv[i]:
            continue
        bps.append(b)
        pv.append(f.pv[i])
        iv.append(right)
    return Envelope1D(bps, pv, iv)


def _aff_at(f: Envelope1D, s):
    """Interval affine of ``f`` at a non-breakpoint ``s``."""
    for i, b in enumerate(f.bps):
        if s < b:
            return f.iv[i]
    return f.iv[-1]


def lower_envelope(f: Envelope1D, g: Envelope1D) -> Envelope1D:
    cand = set(f.bps) | set(g.bps)
    merged = sorted(cand)
    edges = [None] + merged + [None]
    for i in range(len(merged) + 1):
        lo, hi = edges[i], edges[i + 1]
        s = _sample(lo, hi)
        a, b = _aff_at(f, s), _aff_at(g, s)
        if a is not None and b is not None and a[0] != b[0]:
            t = (b[1] - a[1]) / (a[0] - b[0])
            if (lo is None or t > lo) and (hi is None or t < hi):
                cand.add(t)
    bps = sorted(cand)
    edges = [None] + bps + [None]
    iv = []
    for i in range(len(bps) + 1):
        s = _sample(edges[i], edges[i + 1])
        a, b = _aff_at(f, s), _aff_at(g, s)
        if a is None:
            iv.append(b)
        elif b is None:
            iv.append(a)
        else:
            iv.append(a if _ev(a, s) <= _ev(b, s) else b)
    pv = [min(f.value(b), g.value(b)) for b in bps]
    return _compress(Envelope1D(bps, pv, iv))


def envelope(desc, U) -> Envelope1D:
    env = Envelope1D.constant(U)
    for p in desc.parts:
        env = lower_envelope(env, part_function(desc.bounding(p)))
    return env


# ----------------------------------------------------------------------------
# two dimensions: convex polygons as vertex tuples


def clip(poly, a, b):
    """Split a convex polygon by ``aᵀx = b`` into ``(<= part, >= part)``."""
    vals = [dot(a, v) - b for v in poly]
    if all(v <= 0 for v in vals):
        return poly, None
    if all(v >= 0 for v in vals):
        return None, poly
    neg, pos = [], []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        vp, vq = vals[i], vals[(i + 1) % n]
        if vp <= 0:
            neg.append(p)
        if vp >= 0:
            pos.append(p)
        if (vp < 0 < vq) or (vq < 0 < vp):
            t = vp / (vp - vq)
            x = tuple(pi + t * (qi - pi) for pi, qi in zip(p, q))
            neg.append(x)
            pos.append(x)
    return tuple(neg), tuple(pos)


def area2(poly) -> Fraction:
    s = Fraction(0)
    for i in range(len(poly)):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % len(poly)]
        s += x1 * y2 - x2 * y1
    return s


def _solid(poly) -> bool:
    return poly is not None and len(poly) >= 3 and area2(poly) != 0


def _bbox(poly):
    xs = [v[0] for v in poly]
    ys = [v[1] for v in poly]
    return min(xs), max(xs), min(ys), max(ys)


def _halfplanes(poly):
    """``(a, b)`` with the polygon equal to ``{a·x <= b}`` over its edges."""
    if area2(poly) < 0:
        poly = poly[::-1]
    out = []
    for i in range(len(poly)):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % len(poly)]
        if (x1, y1) == (x2, y2):
            continue
        a = (y2 - y1, x1 - x2)  # outward normal for a counter-clockwise ring
        out.append((a, dot(a, (x1, y1))))
    return out


def part_cells(bf, box):
    """Convex cells covering ``box``: one per maximal piece, plus the
    complement of the domain split into convex pieces (affine ``None``)."""
    out = []
    rest = box
    for e, rhs in bf.domain:
        inside, outside = clip(rest, e, rhs)
        if _solid(outside):
            out.append((outside, None))
        rest = inside
        if not _solid(rest):
            return out
    pieces = sorted(set(bf.pieces))
    for j, (u, k) in enumerate(pieces):
        cell = rest
        for i, (w, kk) in enumerate(pieces):
            if i == j or cell is None:
                continue
            cell, _ = clip(cell, tuple(x - y for x, y in zip(w, u)), k - kk)
        if _solid(cell):
            out.append((cell, (u, k)))
    return out


def overlay_min(cells, others):
    """Pointwise min of two convex-cell functions over the same box."""
    out = []
    oboxes = [(_bbox(p), p, a) for p, a in others]
    for poly, aff in cells:
        bx = _bbox(poly)
        for ob, op, oaff in oboxes:
            if ob[1] <= bx[0] or ob[0] >= bx[1] or ob[3] <= bx[2] or ob[2] >= bx[3]:
                continue
            piece = poly
            for a, b in _halfplanes(op):
                piece, _ = clip(piece, a, b)
                if piece is None:
                    break
            if not _solid(piece):
                continue
            if oaff is None or aff is None:
                out.append((piece, aff if oaff is None else oaff))
                continue
            diff = tuple(x - y for x, y in zip(aff[0], oaff[0]))
            if not any(diff):
                out.append((piece, aff if aff[1] <= oaff[1] else oaff))
                continue
            lo, hi = clip(piece, diff, oaff[1] - aff[1])
            if _solid(lo):
                out.append((lo, aff))
            if _solid(hi):
                out.append((hi, oaff))
    return out


# ----------------------------------------------------------------------------
# gap problem


@dataclass
class _Job:
    cheap: Fraction
    slope: tuple  # E = slopeᵀzeta + const on the element
    const: Fraction
    rows: list  # rows on zeta (natural), closed
    strict: list  # rows on zeta (natural), strict


def _jobs_1d(desc, U, box):
    env = _cached_envelope(desc, U)
    lo_b, hi_b = box[0][0], box[1][0]
    jobs = []
    for kind, lo, hi, aff in env.elements():
        if kind == "pt":
            if aff == INF or not lo_b <= lo <= hi_b:
                continue
            jobs.append(_Job(aff, (Fraction(0),), aff, [((Fraction(1),), EQ, lo)], []))
            continue
        if aff is None:
            continue
        a = lo_b if lo is None else max(lo, lo_b)
        b = hi_b if hi is None else min(hi, hi_b)
        if a > b or (lo is not None and a == hi_b) or (hi is not None and b == lo_b):
            continue
        strict = []
        if lo is not None:
            strict.append(((Fraction(1),), GE, lo))
        if hi is not None:
            strict.append(((Fraction(1),), LE, hi))
        cheap = max(aff[0] * a, aff[0] * b) + aff[1]
        jobs.append(_Job(cheap, (aff[0],), aff[1], [], strict))
    return jobs


def _cached_envelope(desc, U):
    cache = desc.model.__dict__.setdefault("_envelope_cache", {})
    key = (U, tuple(desc.parts))
    if key not in cache:
        if desc.ell == 1:
            prev = cache.get((U, tuple(desc.parts[:-1])))
            if prev is not None and desc.parts:
                env = lower_envelope(prev, part_function(desc.bounding(desc.parts[-1])))
            else:
                env = envelope(desc, U)
        else:
            prev = cache.get((U, tuple(desc.parts[:-1])))
            if prev is None or not desc.parts:
                box = gap_box(desc)
                env = [(_box_poly(box), ((Fraction(0), Fraction(0)), Fraction(U)))]
                parts = desc.parts
            else:
                env, parts = prev, desc.parts[-1:]
            for p in parts:
                env = overlay_min(env, part_cells(desc.bounding(p), _box_poly(gap_box(desc))))
        cache[key] = env
    return cache[key]


def _box_poly(box):
    (x0, y0), (x1, y1) = box
    if x0 == x1 or y0 == y1:
        # widen a degenerate box so cells keep positive area
        x0, x1, y0, y1 = x0 - 1, x1 + 1, y0 - 1, y1 + 1
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))


def gap_box(desc):
    """``((lo_1, ...), (hi_1, ...))`` with ``lo_j = min C^j x`` and ``hi_j = max C^j x``."""
    model = desc.model
    box = model.__dict__.get("_gap_box")
    if box is None:
        cn = model.canon
        lo, hi = [], []
        for j in range(cn.ell):
            for sense, out in (("min", lo), ("max", hi)):
                sol = solve_milp(cn.milp(c=cn.C1[j], sense=sense))
                out.append(sol.objective + cn.zeta_shift[j])
        box = (tuple(lo), tuple(hi))
        model.__dict__["_gap_box"] = box
    return box


def _jobs_2d(desc, U, box):
    cells = _cached_envelope(desc, U)
    jobs = []
    lines = {}
    for poly, aff in cells:
        hps = _halfplanes(poly)
        strict = [(a, LE, b) for a, b in hps]
        cheap = max(dot(aff[0], v) for v in poly) + aff[1]
        jobs.append(_Job(cheap, aff[0], aff[1], [], strict))
        for a, b in hps:
            key = primitive_int(list(a) + [b])
            if key[0] < 0 or (key[0] == 0 and key[1] < 0):
                key = tuple(-v for v in key)
            lines.setdefault(key, (tuple(Fraction(v) for v in key[:2]), Fraction(key[2])))
    bpoly = _box_poly(box)
    for key in sorted(lines):
        a, b = lines[key]
        D = (-a[1], a[0])
        P = tuple(a[j] * b / dot(a, a) for j in range(2))
        # segment of the line inside the box
        seg = _line_segment(bpoly, a, b, P, D)
        if seg is None:
            continue
        tlo, thi = seg
        env = Envelope1D.constant(U)
        for p in desc.parts:
            env = lower_envelope(env, restrict_to_line(desc.bounding(p), P, D))
        dd = dot(D, D)
        on_line = [(a, EQ, b)]
        for kind, lo, hi, aff in env.elements():
            if kind == "pt":
                if aff == INF or not tlo <= lo <= thi:
                    continue
                pt_rows = on_line + [(D, EQ, lo * dd + dot(D, P))]
                jobs.append(_Job(aff, (Fraction(0), Fraction(0)), aff, pt_rows, []))
                continue
            if aff is None:
                continue
            x = tlo if lo is None else max(lo, tlo)
            y = thi if hi is None else min(hi, thi)
            if x > y or (lo is not None and x == thi) or (hi is not None and y == tlo):
                continue
            strict = []
            if lo is not None:
                strict.append((D, GE, lo * dd + dot(D, P)))
            if hi is not None:
                strict.append((D, LE, hi * dd + dot(D, P)))
            # E = s t + k with t = D·(zeta - P) / D·D
            s, k = aff
            slope = tuple(s * d / dd for d in D)
            const = k - s * dot(D, P) / dd
            cheap = max(s * x, s * y) + k
            jobs.append(_Job(cheap, slope, const, on_line, strict))
    return jobs


def _line_segment(poly, a, b, P, D):
    """Parameter range ``[tlo, thi]`` of ``P + t D`` inside the convex polygon."""
    tlo, thi = None, None
    for h, c in _halfplanes(poly):
        s = dot(h, D)
        r = c - dot(h, P)
        if s == 0:
            if r < 0:
                return None
            continue
        t = r / s
        if s > 0:
            thi = t if thi is None else min(thi, t)
        else:
            tlo = t if tlo is None else max(tlo, t)
    if tlo is None or thi is None or tlo > thi:
        return None
    return tlo, thi


def solve_gap_by_envelope(desc, U):
    """``(theta, x_star, attained, problem, solution)`` for one or two
    parametric rows.  ``problem`` is the element MILP over canonical columns
    that produced the optimum; its strict rows form its single disjunction.
    """
    model = desc.model
    cn = model.canon
    n = cn.ncols
    s0 = cn.zeta_shift
    box = gap_box(desc)
    if cn.ell == 1:
        jobs = _jobs_1d(desc, U, box)
    elif cn.ell == 2:
        jobs = _jobs_2d(desc, U, box)
    else:
        raise ValueError("the envelope method needs one or two parametric rows")
    # bound on -c0·x over the feasible region
    base0 = cn.milp(c=cn.c0, sense="min")
    lp0 = solve_general_lp(base0.c, base0.rows, base0.lower, base0.upper, "min")
    cmin = lp0.objective + cn.obj_shift
    order = sorted(range(len(jobs)), key=lambda i: (-jobs[i].cheap, i))
    best = None

    def zrow(coef, sense, rhs, strict=False):
        # coefᵀzeta (natural) in canonical columns: coefᵀ(C1 x + s0)
        cols = tuple(sum((coef[i] * cn.C1[i][j] for i in range(cn.ell)), Fraction(0)) for j in range(n))
        return Row(cols, sense, rhs - dot(coef, s0), strict)

    for i in order:
        job = jobs[i]
        if best is not None and (job.cheap - cmin < best[0] or (job.cheap - cmin == best[0] and best[2])):
            break
        rows = [zrow(*r) for r in job.rows]
        strict = tuple(zrow(*r, True) for r in job.strict)
        # gap = slopeᵀ(C1 x + s0) + const - (c0 x + obj_shift)
        obj = tuple(
            sum((job.slope[k] * cn.C1[k][j] for k in range(cn.ell)), Fraction(0)) - cn.c0[j] for j in range(n)
        )
        shift = dot(job.slope, s0) + job.const - cn.obj_shift
        base = cn.milp(c=obj, sense="max", extra_rows=rows + list(strict))
        lp = solve_general_lp(base.c, base.rows, base.lower, base.upper, "max")
        if lp.status != OPTIMAL:
            continue
        bound = lp.objective + shift
        if best is not None and (bound < best[0] or (bound == best[0] and best[2])):
            continue
        disj = ((strict,),) if strict else ()
        prob = MilpProblem(base.c, tuple(base.rows[: len(base.rows) - len(strict)]), base.lower, base.upper, base.integer, "max", disj)
        sol = solve_milp(prob)
        if sol.status != OPTIMAL:
            continue
        val = sol.objective + shift
        if best is None or val > best[0] or (val == best[0] and sol.attained and not best[2]):
            best = (val, sol.x[:n], sol.attained, prob, sol)
    if best is None:
        raise RuntimeError("gap problem has no feasible element")
    return best
