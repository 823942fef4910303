"""Frontier cells of a terminated description and point classification.

For one parametric row the graph of z is split at the breakpoints of its
lower envelope and of every bounding function; between consecutive
breakpoints z is a single affine piece of a single part.  Points and open intervals are then merged into maximal
cells.  For two parametric rows the same is done with an exact arrangement
of lines inside a bounding box; cells are unions of convex polygons.

A cell is weak-only iff z has a zero derivative along some nonpositive
nonzero direction there; in the plane it suffices to test the negative axis
directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from ..exact import INF, dot, primitive_int
from ..milp import LE, OPTIMAL, Row, solve_milp
from .core import InvariantError, RvfDescription
from .envelope import Envelope1D, lower_envelope, part_function

NDP = "NDP"
WEAK = "weak-only"
NOT_ON_BOUNDARY = "not-on-boundary"
OUTSIDE_DOMAIN = "outside-domain"


@dataclass
class FrontierCell:
    cell_id: int
    part: tuple
    piece: tuple  # (u, const): z = uᵀzeta + const on the cell
    klass: str
    lo: Fraction | None = None
    hi: Fraction | None = None
    lo_closed: bool = True
    hi_closed: bool = True
    polygons: list = field(default_factory=list)  # ell = 2: faces, edges, vertices
    points: set = field(default_factory=set)  # ell = 2: arrangement vertices in the cell
    solution: tuple | None = None
    criterion: tuple | None = None

    def value(self, zeta) -> Fraction:
        u, k = self.piece
        return dot(u, zeta) + k

    def contains(self, zeta) -> bool:
        """Interval membership with exact openness (one parametric row only)."""
        t = Fraction(zeta[0])
        if t < self.lo or t > self.hi:
            return False
        if t == self.lo and not self.lo_closed:
            return False
        if t == self.hi and not self.hi_closed:
            return False
        return True


def _best_part(desc: RvfDescription, zeta):
    z = desc.min_parts(zeta)
    if z == INF:
        return None, INF, None
    part = min(desc.active_parts(zeta))
    bf = desc.bounding(part)
    piece = max(bf.pieces, key=lambda pc: (dot(pc[0], zeta) + pc[1], pc))
    return part, z, piece


def domain_box(desc: RvfDescription):
    """Per-axis ``[lo, hi]`` with ``lo = min C^j x`` and ``hi = max C^j x``."""
    model = desc.model
    cn = model.canon
    lo, hi = [], []
    for j in range(cn.ell):
        for sense, out in (("min", lo), ("max", hi)):
            sol = solve_milp(cn.milp(c=cn.C1[j], sense=sense))
            out.append(sol.objective + cn.zeta_shift[j])
    return lo, hi


def right_end(desc: RvfDescription) -> Fraction:
    """zeta of the lexicographic minimiser of (c0, C1); z is constant beyond it."""
    model = desc.model
    cn = model.canon
    sol = solve_milp(cn.milp(c=cn.c0, sense="min"))
    cap = Row(tuple(cn.c0), LE, sol.objective)
    sol2 = solve_milp(cn.milp(c=cn.C1[0], sense="min", extra_rows=[cap]))
    return sol2.objective + cn.zeta_shift[0]


def _representative(desc: RvfDescription, part, zeta):
    """Efficient solution at ``zeta`` built from the given part's LP."""
    model = desc.model
    cn = model.canon
    bf = model.bounding(part)
    val, xc = bf.handle.primal(tuple(z - o for z, o in zip(zeta, bf.offset)))
    if xc is None:
        return None
    xi = cn.int_to_canonical(part)
    full = tuple(xi) + tuple(xc)
    x = cn.to_natural(full)
    return model.convert_to_efficient(x)


# ----------------------------------------------------------------------------
# one parametric row


def breakpoints_1d(desc: RvfDescription, lo, hi) -> list[Fraction]:
    """Breakpoints of the lower envelope and of every part's own function;
    between two consecutive ones the active parts and the piece are fixed.
    """
    env = Envelope1D([], [], [None])
    pts = {Fraction(lo), Fraction(hi)}
    for p in desc.parts:
        f = part_function(desc.bounding(p))
        pts.update(f.bps)
        env = lower_envelope(env, f)
    pts.update(env.bps)
    return sorted(t for t in pts if lo <= t <= hi)


def _point_is_ndp(desc, b, z_b, left):
    """``left`` is ``(part, piece, slope)`` of the interval ending at ``b``."""
    if left is None:
        return True
    _, (u, k), _ = left
    lim = u[0] * b + k
    if lim > z_b:
        return True
    return u[0] < 0


def _extract_1d(desc: RvfDescription, with_solutions=True) -> list[FrontierCell]:
    lo = min(
        (rhs / e[0] for p in desc.parts for e, rhs in desc.bounding(p).domain if e[0] < 0),
        default=None,
    )
    if lo is None:
        lo, _ = domain_box(desc)
        lo = lo[0]
    hi = right_end(desc)
    bps = breakpoints_1d(desc, lo, hi)
    elems = []  # ("pt", b, part, piece, klass, z) / ("iv", a, b, part, piece, klass)
    left = None
    for i, b in enumerate(bps):
        part, z_b, piece = _best_part(desc, (b,))
        if z_b == INF:
            left = None
            continue
        klass = NDP if _point_is_ndp(desc, b, z_b, left) else WEAK
        if left is not None:
            dd = desc.rvf_dir_deriv((b,), (-1,))
            if (dd > 0) != (klass == NDP):
                raise InvariantError(f"point classification disagrees with derivative at {b}")
        elems.append(("pt", b, part, piece, klass, z_b))
        if i + 1 < len(bps):
            c = bps[i + 1]
            mid = (b + c) / 2
            part, z_m, piece = _best_part(desc, (mid,))
            if z_m == INF:
                left = None
                continue
            slope = piece[0][0]
            klass = NDP if slope < 0 else WEAK
            elems.append(("iv", b, c, part, piece, klass))
            left = (part, piece, slope)
    # merge
    cells: list[FrontierCell] = []
    cur = None

    def close():
        nonlocal cur
        if cur is not None:
            cells.append(cur)
        cur = None

    for idx, el in enumerate(elems):
        if el[0] == "iv":
            _, a, b, part, piece, klass = el
            if cur is not None and cur.part == part and cur.piece == piece and cur.klass == klass and cur.hi == a and cur.hi_closed:
                cur.hi, cur.hi_closed = b, False
                continue
            close()
            cur = FrontierCell(0, part, piece, klass, a, b, False, False)
            continue
        _, b, part, piece, klass, z_b = el
        if cur is not None and cur.hi == b and not cur.hi_closed and cur.klass == klass and cur.value((b,)) == z_b:
            cur.hi_closed = True
            continue
        nxt = elems[idx + 1] if idx + 1 < len(elems) else None
        if nxt is not None and nxt[0] == "iv" and nxt[1] == b:
            _, _, c, npart, npiece, nklass = nxt
            u, k = npiece
            if nklass == klass and u[0] * b + k == z_b:
                close()
                cur = FrontierCell(0, npart, npiece, klass, b, b, True, True)
                continue
        close()
        cells.append(FrontierCell(0, part, piece, klass, b, b, True, True))
    close()
    for cid, cell in enumerate(cells):
        cell.cell_id = cid
        if with_solutions and cell.klass == NDP:
            rep = cell.lo if cell.lo == cell.hi else (cell.lo + cell.hi) / 2
            x = _representative(desc, cell.part, (rep,))
            if x is not None:
                cell.solution = x
                cell.criterion = desc.inst.criterion(x)
    return cells


# ----------------------------------------------------------------------------
# two parametric rows


def _split(poly, a, b):
    """Split convex polygon (vertex list) by ``aᵀx = b`` into (<=, >=) parts."""
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
    return neg, pos


def _area2(poly):
    s = Fraction(0)
    for i in range(len(poly)):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % len(poly)]
        s += x1 * y2 - x2 * y1
    return s


def _centroid(poly):
    n = len(poly)
    return tuple(sum(v[j] for v in poly) / n for j in range(2))


def _arrangement(desc: RvfDescription):
    """Faces (convex polygons) of the line arrangement inside the box."""
    lo, hi = domain_box(desc)
    box = [(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])]
    lines = {}
    allpieces = []

    def add(a, b):
        key = primitive_int(list(a) + [b])
        lines.setdefault(key, (tuple(a), b))

    for p in desc.parts:
        bf = desc.bounding(p)
        for e, rhs in bf.domain:
            add(e, rhs)
        allpieces.extend(bf.pieces)
    for (u1, k1), (u2, k2) in combinations(sorted(set(allpieces)), 2):
        a = tuple(x - y for x, y in zip(u1, u2))
        if any(a):
            add(a, k2 - k1)
    faces = [box] if _area2(box) != 0 else []
    for key in sorted(lines):
        a, b = lines[key]
        nxt = []
        for f in faces:
            for g in _split(f, a, b):
                if g is not None and len(g) >= 3 and _area2(g) != 0:
                    nxt.append(tuple(g))
        faces = nxt
    if not faces:
        # degenerate box: a segment or a point
        faces = [tuple(dict.fromkeys(box))]
    return faces


def _extract_2d(desc: RvfDescription, with_solutions=True) -> list[FrontierCell]:
    faces = _arrangement(desc)
    elems = []  # (vertices, sample point)
    edge_faces: dict = {}
    vert_elems: dict = {}
    for i, f in enumerate(faces):
        elems.append((f, _centroid(f)))
        if len(f) < 3:
            continue
        for j in range(len(f)):
            p, q = f[j], f[(j + 1) % len(f)]
            edge_faces.setdefault(frozenset((p, q)), []).append(i)
    edge_ids = {}
    for key in sorted(edge_faces, key=sorted):
        p, q = sorted(key)
        edge_ids[key] = len(elems)
        elems.append(((p, q), tuple((a + b) / 2 for a, b in zip(p, q))))
    for key, eid in edge_ids.items():
        for p in key:
            vert_elems.setdefault(p, set()).add(eid)
            vert_elems[p].update(edge_faces[key])
    vert_ids = {}
    for p in sorted(vert_elems):
        vert_ids[p] = len(elems)
        elems.append(((p,), p))

    info = []
    for verts, pt in elems:
        part, z, piece = _best_part(desc, pt)
        info.append(None if z == INF else (part, piece, classify_direction(desc, pt), z))
    parent = list(range(len(elems)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def fits(group_elem, i):
        """Element ``i`` continues the cell founded by ``group_elem``."""
        gi, ei = info[group_elem], info[i]
        if gi is None or ei is None:
            return False
        part, (u, k), klass, _ = gi
        pt = elems[i][1]
        return ei[2] == klass and dot(u, pt) + k == ei[3] and desc.bounding(part).eval(pt) == ei[3]

    # faces sharing a continuous edge with the same part, piece and class
    for key, fs in edge_faces.items():
        eid = edge_ids[key]
        if len(fs) == 2:
            a, b = fs
            if info[a] and info[b] and info[a][:3] == info[b][:3] and fits(a, eid):
                parent[find(b)] = find(a)
    for key in sorted(edge_faces, key=sorted):
        eid = edge_ids[key]
        for f in edge_faces[key]:
            if fits(find(f), eid):
                parent[eid] = find(f)
                break
    for p, vid in vert_ids.items():
        first = None
        for k in sorted(vert_elems[p], reverse=True):
            root = find(k)
            if not fits(root, vid):
                continue
            if first is None:
                first = root
                parent[vid] = root
            elif len(elems[root][0]) == 2 and info[root][:3] == info[first][:3]:
                # collinear lone edges meeting at a shared vertex
                parent[root] = first

    groups: dict = {}
    for i in range(len(elems)):
        if info[i] is not None:
            groups.setdefault(find(i), []).append(i)
    cells = []
    for root in sorted(groups, key=lambda r: (-len(elems[r][0]), info[r][:3])):
        members = groups[root]
        part, piece, klass, _ = info[root]
        cell = FrontierCell(len(cells), part, piece, klass)
        cell.polygons = [elems[i][0] for i in members]
        cell.points = {elems[i][0][0] for i in members if len(elems[i][0]) == 1}
        if with_solutions and klass == NDP:
            x = _representative(desc, part, elems[root][1])
            if x is not None:
                cell.solution = x
                cell.criterion = desc.inst.criterion(x)
        cells.append(cell)
    return cells


# ----------------------------------------------------------------------------


def extract_frontier(desc: RvfDescription, with_solutions=True) -> list[FrontierCell]:
    if not desc.terminated:
        raise ValueError("description not terminated")
    if desc.ell == 1:
        return _extract_1d(desc, with_solutions)
    if desc.ell == 2:
        return _extract_2d(desc, with_solutions)
    raise ValueError("cell output needs at most two parametric rows; use point queries")


def classify_direction(desc: RvfDescription, zeta) -> str:
    """Derivative test on the negative axis directions."""
    ell = desc.ell
    for j in range(ell):
        d = [Fraction(0)] * ell
        d[j] = Fraction(-1)
        if desc.rvf_dir_deriv(zeta, d) == 0:
            return WEAK
    return NDP


def classify_criterion_point(desc: RvfDescription, zeta, value=None) -> str:
    """NDP / weak-only / not-on-boundary / outside-domain for ``(z(zeta), zeta)``
    or, when ``value`` is given, for ``(value, zeta)``.
    """
    zeta = tuple(Fraction(v) for v in zeta)
    z = desc.min_parts(zeta)
    if z == INF:
        return OUTSIDE_DOMAIN
    if value is not None and Fraction(value) != z:
        return NOT_ON_BOUNDARY
    model = desc.model
    cn = model.canon
    rows = [Row(tuple(cn.c0), LE, z - cn.obj_shift)] + model.parametric_rows(zeta)
    csum = [sum(col) for col in zip(cn.c0, *cn.C1)]
    sol = solve_milp(cn.milp(c=csum, sense="min", extra_rows=rows))
    if sol.status != OPTIMAL:
        raise InvariantError(f"no solution attains z at {zeta}")
    crit = desc.inst.criterion(cn.to_natural(sol.x))
    primary = NDP if crit == (z,) + zeta else WEAK
    if classify_direction(desc, zeta) != primary:
        raise InvariantError(f"dominance and derivative tests disagree at {zeta}")
    return primary
