"""Polyhedra: double description, the dual polyhedron and its relatives.

The double-description routine works on integer vectors (rows are scaled to
primitive integer form) and keeps an explicit lineality basis, so it also
handles cones that contain lines.  Zero sets are Python int bitmasks.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import INF, dot, normalize_ray, primitive_int, rat_str, transpose
from .milp import EQ, GE, LE, Row, solve_general_lp
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED


class EmptyPolyhedronError(ValueError):
    pass


def _idot(a, b):
    s = 0
    for x, y in zip(a, b):
        if x and y:
            s += x * y
    return s


def _prim(v):
    from math import gcd

    g = 0
    for a in v:
        g = gcd(g, a)
    if g <= 1:
        return tuple(v)
    return tuple(a // g for a in v)


def _popcount(x: int) -> int:
    return bin(x).count("1")


def dd_cone(ineq: Sequence[Sequence[int]], eq: Sequence[Sequence[int]], d: int):
    """Extreme rays and lineality basis of ``{x : ineq·x <= 0, eq·x = 0}``.

    Inputs are integer rows.  Rows are inserted in lexicographic order
    (equalities first).  Returns ``(rays, lineality)`` as integer tuples;
    rays are extreme modulo the lineality space.
    """
    rows = [(tuple(a), True) for a in sorted(map(tuple, eq))] + [(tuple(a), False) for a in sorted(map(tuple, ineq))]
    lin = [tuple(int(i == j) for j in range(d)) for i in range(d)]
    rays: list[tuple[tuple, int]] = []  # (vector, zero-set bitmask)
    for idx, (a, is_eq) in enumerate(rows):
        if not any(a):
            continue
        bit = 1 << idx
        vals = [_idot(a, l) for l in lin]
        k = next((i for i, v in enumerate(vals) if v), None)
        if k is not None:
            l0 = lin[k]
            a0 = vals[k]
            if a0 > 0:
                l0 = tuple(-x for x in l0)
                a0 = -a0
            new_lin = []
            for i, l in enumerate(lin):
                if i == k:
                    continue
                v = vals[i]
                if v:
                    # l*(-a0) + v*l0 has a-product v*(-a0) + v*a0 = 0 (a0 < 0)
                    l = _prim(tuple(-a0 * x + v * y for x, y in zip(l, l0)))
                new_lin.append(l)
            new_rays = []
            for r, z in rays:
                v = _idot(a, r)
                if v:
                    r = _prim(tuple(-a0 * x + v * y for x, y in zip(r, l0)))
                new_rays.append((r, z | bit))
            if not is_eq:
                # all earlier rows vanish on l0 (it was a line)
                new_rays.append((_prim(l0), ((1 << idx) - 1)))
            lin = new_lin
            rays = new_rays
            continue
        pos, zer, neg = [], [], []
        for r, z in rays:
            v = _idot(a, r)
            if v > 0:
                pos.append((r, z, v))
            elif v < 0:
                neg.append((r, z, v))
            else:
                zer.append((r, z | bit))
        need = d - len(lin) - 2
        allz = [z for _, z in rays]
        combos = []
        for rp, zp, vp in pos:
            for rn, zn, vn in neg:
                common = zp & zn
                if _popcount(common) < need:
                    continue
                # combinatorial test: no third ray is tight on all of common
                hits = 0
                for z in allz:
                    if z & common == common:
                        hits += 1
                        if hits > 2:
                            break
                if hits > 2:
                    continue
                r = _prim(tuple(vp * x - vn * y for x, y in zip(rn, rp)))
                combos.append((r, common | bit))
        if is_eq:
            rays = zer + combos
        else:
            rays = zer + [(r, z) for r, z, _ in neg] + combos
    # drop duplicates that can arise from identical zero sets
    seen = {}
    for r, _ in rays:
        seen.setdefault(r, None)
    return list(seen), lin


def _int_rows(rows, rhs=None):
    out = []
    for i, a in enumerate(rows):
        vals = list(a) + ([rhs[i]] if rhs is not None else [])
        out.append(primitive_int([Fraction(v) for v in vals]))
    return out


@dataclass(frozen=True)
class HPolyhedron:
    """``{x : G x <= g, H x = h}``."""

    G: tuple
    g: tuple
    H: tuple = ()
    h: tuple = ()

    @property
    def dim(self) -> int:
        if self.G:
            return len(self.G[0])
        if self.H:
            return len(self.H[0])
        raise ValueError("dimension unknown for a polyhedron without rows")

    def contains(self, x) -> bool:
        return all(dot(a, x) <= b for a, b in zip(self.G, self.g)) and all(dot(a, x) == b for a, b in zip(self.H, self.h))

    def rows(self) -> list[Row]:
        return [Row(tuple(a), LE, b) for a, b in zip(self.G, self.g)] + [Row(tuple(a), EQ, b) for a, b in zip(self.H, self.h)]

    def is_empty(self) -> bool:
        d = self.dim
        lp = solve_general_lp((Fraction(0),) * d, self.rows(), (None,) * d, (None,) * d)
        return lp.status == INFEASIBLE


@dataclass(frozen=True)
class VRepresentation:
    E: tuple
    R: tuple
    L: tuple = ()

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        dim = len(self.E[0]) if self.E else (len(self.R[0]) if self.R else 0)
        w.writerow(["kind"] + [f"c{j}" for j in range(dim)])
        for e in self.E:
            w.writerow(["point"] + [rat_str(v) for v in e])
        for r in self.R:
            w.writerow(["ray"] + [rat_str(v) for v in r])
        for l in self.L:
            w.writerow(["line"] + [rat_str(v) for v in l])
        return buf.getvalue()


def vrep_from_csv(text: str) -> VRepresentation:
    from .exact import rat_parse

    E, R, L = [], [], []
    rd = csv.reader(io.StringIO(text))
    next(rd)
    for row in rd:
        v = tuple(rat_parse(t) for t in row[1:])
        {"point": E, "ray": R, "line": L}[row[0]].append(v)
    return VRepresentation(tuple(E), tuple(R), tuple(L))


def enumerate_vertices_rays(p: HPolyhedron) -> VRepresentation:
    """Exact V-representation by double description on the homogenised cone.

    Raises :class:`EmptyPolyhedronError` when ``p`` is empty.
    """
    d = p.dim
    ineq = []
    for a in _int_rows(p.G, p.g):
        ineq.append(tuple(a[:-1]) + (-a[-1],))
    ineq.append((0,) * d + (-1,))
    eq = []
    for a in _int_rows(p.H, p.h):
        eq.append(tuple(a[:-1]) + (-a[-1],))
    rays, lin = dd_cone(ineq, eq, d + 1)
    E, R = [], []
    for r in rays:
        t = r[-1]
        if t > 0:
            E.append(tuple(Fraction(x, t) for x in r[:-1]))
        else:
            R.append(normalize_ray([Fraction(x) for x in r[:-1]]))
    if not E:
        raise EmptyPolyhedronError("empty polyhedron")
    L = [normalize_ray([Fraction(x) for x in l[:-1]]) for l in lin]
    return VRepresentation(tuple(sorted(set(E))), tuple(sorted(set(R))), tuple(L))


def v_contains(v: VRepresentation, x) -> bool:
    """Is ``x`` in conv(E) + cone(R) + span(L)?  (one LP)"""
    k = len(v.E) + len(v.R) + len(v.L)
    d = len(x)
    rows = []
    for i in range(d):
        coeffs = [e[i] for e in v.E] + [r[i] for r in v.R] + [l[i] for l in v.L]
        rows.append(Row(tuple(coeffs), EQ, Fraction(x[i])))
    rows.append(Row(tuple([Fraction(1)] * len(v.E) + [Fraction(0)] * (len(v.R) + len(v.L))), EQ, Fraction(1)))
    lower = (Fraction(0),) * (len(v.E) + len(v.R)) + (None,) * len(v.L)
    upper = (None,) * k
    lp = solve_general_lp((Fraction(0),) * k, rows, lower, upper)
    return lp.status == OPTIMAL


# ----------------------------------------------------------------------------
# dual polyhedron, Q cone, optimal face


def dual_polyhedron(C_C: Sequence[Sequence], A_C: Sequence[Sequence], c0_C: Sequence) -> HPolyhedron:
    """``{(u, v) : u <= 0, C_Cᵀu + A_Cᵀv <= c0_C}``."""
    ell = len(C_C)
    m = len(A_C)
    nc = len(c0_C)
    G, g = [], []
    CT = transpose(C_C, nc)
    AT = transpose(A_C, nc) if m else tuple(() for _ in range(nc))
    for j in range(nc):
        G.append(tuple(CT[j]) + tuple(AT[j]))
        g.append(Fraction(c0_C[j]))
    for i in range(ell):
        G.append(tuple(Fraction(int(k == i)) for k in range(ell + m)))
        g.append(Fraction(0))
    return HPolyhedron(tuple(G), tuple(g))


def cone_rays_Q(A_C: Sequence[Sequence], beta: Sequence) -> list[tuple]:
    """Extreme rays of ``{(x_C, t) : x_C >= 0, A_C x_C + t·beta = 0}``.

    A line in the cone (only possible when ``beta = 0``) is returned as the
    two opposite rays.
    """
    m = len(A_C)
    nc = len(A_C[0]) if m else 0
    d = nc + 1
    ineq = []
    for j in range(nc):
        ineq.append(tuple(-int(k == j) for k in range(d)))
    eq = []
    for i in range(m):
        eq.append(primitive_int([Fraction(a) for a in A_C[i]] + [Fraction(beta[i])]))
    rays, lin = dd_cone(ineq, eq, d)
    out = {normalize_ray([Fraction(x) for x in r]) for r in rays}
    for l in lin:
        out.add(normalize_ray([Fraction(x) for x in l]))
        out.add(normalize_ray([Fraction(-x) for x in l]))
    return sorted(out)


@dataclass(frozen=True)
class SubdifferentialPoly:
    """``{u : G u <= g}`` in u-space; the rows include ``u <= 0``."""

    G: tuple
    g: tuple

    @property
    def dim(self) -> int:
        return len(self.G[0])

    def contains(self, u) -> bool:
        return all(dot(a, u) <= b for a, b in zip(self.G, self.g))

    def _rows(self):
        return [Row(tuple(a), LE, b) for a, b in zip(self.G, self.g)]

    def is_empty(self) -> bool:
        d = self.dim
        return solve_general_lp((Fraction(0),) * d, self._rows(), (None,) * d, (None,) * d).status == INFEASIBLE

    def maximize(self, d) -> Fraction | float | None:
        """``max uᵀd`` (``INF`` if unbounded, ``None`` if empty)."""
        lp = solve_general_lp(tuple(Fraction(x) for x in d), self._rows(), (None,) * self.dim, (None,) * self.dim)
        if lp.status == INFEASIBLE:
            return None
        if lp.status == UNBOUNDED:
            return INF
        return lp.objective

    def intersect(self, other: "SubdifferentialPoly") -> "SubdifferentialPoly":
        return SubdifferentialPoly(self.G + other.G, self.g + other.g)

    def vrep(self) -> VRepresentation:
        return enumerate_vertices_rays(HPolyhedron(self.G, self.g))

    def interval(self):
        """For ``ell = 1``: ``(lo, hi)`` with ``-INF`` / ``INF`` for open ends."""
        if self.dim != 1:
            raise ValueError("interval() needs a one-dimensional polyhedron")
        lo = self.maximize((-1,))
        hi = self.maximize((1,))
        if lo is None:
            return None
        return (-lo if lo != INF else -INF, hi)

    def is_singleton(self) -> bool:
        if self.is_empty():
            return False
        for j in range(self.dim):
            e = [0] * self.dim
            e[j] = 1
            hi = self.maximize(e)
            e[j] = -1
            lo = self.maximize(e)
            if hi == INF or lo == INF or hi != -lo:
                return False
        return True


def project_opt_face(
    C_C: Sequence[Sequence],
    c0_C: Sequence,
    Q: Sequence[Sequence],
    zeta: Sequence,
    zvalue,
) -> SubdifferentialPoly:
    """``{u <= 0 : (C_C r + s·zeta)ᵀu <= c0_Cᵀr + s·zvalue  for (r, s) in Q}``.

    ``Q`` holds the rays ``(r, s)`` of the cone from :func:`cone_rays_Q` for
    the relevant ``beta``.
    """
    if zvalue == INF:
        raise ValueError("optimal face requested outside the domain")
    ell = len(zeta)
    G, g = [], []
    seen = set()
    for q in Q:
        r, s = q[:-1], q[-1]
        a = tuple(dot(C_C[i], r) + s * zeta[i] for i in range(ell))
        rhs = dot(c0_C, r) + s * zvalue
        if not any(a):
            if rhs < 0:
                # infeasible row: keep it so the polyhedron reads as empty
                G.append(a)
                g.append(rhs)
            continue
        key = primitive_int(list(a) + [rhs])
        if key in seen:
            continue
        seen.add(key)
        G.append(a)
        g.append(rhs)
    for i in range(ell):
        G.append(tuple(Fraction(int(k == i)) for k in range(ell)))
        g.append(Fraction(0))
    return SubdifferentialPoly(tuple(G), tuple(g))


INTERIOR, BOUNDARY, OUTSIDE = "interior", "boundary", "outside"


def classify_rhs(zeta: Sequence, beta: Sequence, R: Sequence[Sequence]) -> str:
    """Position of ``zeta`` relative to the finite domain, from dual rays ``(e, h)``."""
    ell = len(zeta)
    tight = False
    for ray in R:
        e, h = ray[:ell], ray[ell:]
        v = dot(zeta, e) + dot(beta, h)
        if v > 0:
            return OUTSIDE
        if v == 0:
            tight = True
    return BOUNDARY if tight else INTERIOR
