"""The restricted LP value function for a fixed ``beta``.

``z_LP(zeta; beta) = min c0_C·x_C  s.t.  C_C x_C <= zeta, A_C x_C = beta,
x_C >= 0``, evaluated through the enumerated extreme points ``E`` and rays
``R`` of the dual polyhedron, which do not depend on ``zeta`` or ``beta``.
Dual points are stored as ``(u, v)`` concatenated, ``u`` first.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .exact import INF, dot, primitive_int, rat_str
from .milp import EQ, GE, LE, Row, solve_general_lp
from .polyhedra import (
    BOUNDARY,
    INTERIOR,
    OUTSIDE,
    SubdifferentialPoly,
    VRepresentation,
    classify_rhs,
    cone_rays_Q,
    dual_polyhedron,
    enumerate_vertices_rays,
    project_opt_face,
)
from .simplex import ContractError, INFEASIBLE, OPTIMAL


class DualSpace:
    """Continuous-block data shared by every RLPVF of one instance."""

    def __init__(self, C_C, A_C, c0_C):
        self.C_C = tuple(tuple(r) for r in C_C)
        self.A_C = tuple(tuple(r) for r in A_C)
        self.c0_C = tuple(c0_C)
        self.ell = len(self.C_C)
        self.m = len(self.A_C)
        self.polyhedron = dual_polyhedron(self.C_C, self.A_C, self.c0_C)
        self.vrep: VRepresentation = enumerate_vertices_rays(self.polyhedron)
        if self.vrep.L:
            raise ContractError("dual polyhedron has lineality; continuous rows must be independent")

    @property
    def E(self):
        return self.vrep.E

    @property
    def R(self):
        return self.vrep.R

    def handle(self, beta) -> "RlpvfHandle":
        return RlpvfHandle(self, tuple(Fraction(b) for b in beta))


@dataclass(frozen=True)
class AffinePieceDescription:
    """``z_LP = max(uᵀzeta + const)`` on ``{zeta : eᵀzeta <= rhs}``."""

    pieces: tuple  # of (u, const)
    domain: tuple  # of (e, rhs)

    def value(self, zeta):
        for e, rhs in self.domain:
            if dot(e, zeta) > rhs:
                return INF
        return max(dot(u, zeta) + k for u, k in self.pieces)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        ell = len(self.pieces[0][0]) if self.pieces else 0
        w.writerow(["kind"] + [f"a{j}" for j in range(ell)] + ["constant"])
        for u, k in self.pieces:
            w.writerow(["piece"] + [rat_str(x) for x in u] + [rat_str(k)])
        for e, rhs in self.domain:
            w.writerow(["domain"] + [rat_str(x) for x in e] + [rat_str(rhs)])
        return buf.getvalue()


class RlpvfHandle:
    def __init__(self, space: DualSpace, beta: tuple):
        self.space = space
        self.beta = beta
        ell = space.ell
        raw = {}
        for pt in space.E:
            u, v = pt[:ell], pt[ell:]
            raw.setdefault((u, dot(beta, v)), None)
        self._all_pieces = tuple(raw)
        # rays with e = 0 only say whether beta itself is feasible
        self.feasible = True
        dom = {}
        for ray in space.R:
            e, h = ray[:ell], ray[ell:]
            k = dot(beta, h)
            if not any(e):
                if k > 0:
                    self.feasible = False
                continue
            key = primitive_int(list(e) + [-k])
            dom.setdefault(key, (e, -k))
        self._all_domain = tuple(dom.values())

    # -- evaluation ---------------------------------------------------------

    def classify(self, zeta) -> str:
        return classify_rhs(tuple(Fraction(z) for z in zeta), self.beta, self.space.R)

    def eval(self, zeta):
        zeta = tuple(Fraction(z) for z in zeta)
        if not self.feasible:
            return INF
        for e, rhs in self._all_domain:
            if dot(e, zeta) > rhs:
                return INF
        return max(dot(u, zeta) + k for u, k in self._all_pieces)

    def primal(self, zeta):
        """Primal LP at ``zeta``: ``(value, x_C)`` or ``(INF, None)``."""
        sp = self.space
        nc = len(sp.c0_C)
        rows = [Row(tuple(r), LE, Fraction(z)) for r, z in zip(sp.C_C, zeta)]
        rows += [Row(tuple(r), EQ, b) for r, b in zip(sp.A_C, self.beta)]
        lp = solve_general_lp(sp.c0_C, rows, (Fraction(0),) * nc, (None,) * nc, "min")
        if lp.status == INFEASIBLE:
            return INF, None
        if lp.status != OPTIMAL:
            raise ContractError("restricted LP is unbounded below")
        return lp.objective, lp.x

    # -- structure ----------------------------------------------------------

    @cached_property
    def domain_rows(self) -> tuple:
        """Irredundant ``(e, rhs)`` rows of the finite domain."""
        rows = self._all_domain
        keep = []
        ell = self.space.ell
        for i, (e, rhs) in enumerate(rows):
            others = [Row(tuple(f), LE, s) for j, (f, s) in enumerate(rows) if j != i]
            # can zeta violate row i while meeting all others?
            others.append(Row(tuple(e), LE, rhs + 1))
            lp = solve_general_lp(tuple(e), others, (None,) * ell, (None,) * ell, "max")
            if lp.status == OPTIMAL and lp.objective > rhs:
                keep.append((e, rhs))
        return tuple(keep)

    @cached_property
    def pieces(self) -> tuple:
        """Irredundant pieces: each is the unique maximum somewhere in the domain."""
        ell = self.space.ell
        allp = self._all_pieces
        if len(allp) == 1:
            return allp
        dom = [Row(tuple(e) + (Fraction(0),), LE, rhs) for e, rhs in self.domain_rows]
        keep = []
        for i, (u, k) in enumerate(allp):
            rows = list(dom)
            for j, (w, kk) in enumerate(allp):
                if j == i:
                    continue
                # (w - u)ᵀzeta + t <= k - kk
                rows.append(Row(tuple(a - b for a, b in zip(w, u)) + (Fraction(1),), LE, k - kk))
            c = (Fraction(0),) * ell + (Fraction(1),)
            lp = solve_general_lp(c, rows, (None,) * (ell + 1), (None,) * ell + (Fraction(1),), "max")
            if lp.status == OPTIMAL and lp.objective > 0:
                keep.append((u, k))
        return tuple(keep)

    def affine_description(self) -> AffinePieceDescription:
        return AffinePieceDescription(self.pieces, self.domain_rows)

    @cached_property
    def cone_q(self) -> list:
        return cone_rays_Q(self.space.A_C, self.beta)

    def subdifferential(self, zeta) -> SubdifferentialPoly:
        zeta = tuple(Fraction(z) for z in zeta)
        val = self.eval(zeta)
        if val == INF:
            raise ContractError("subdifferential requested outside the finite domain")
        return project_opt_face(self.space.C_C, self.space.c0_C, self.cone_q, zeta, val)

    def active_points(self, zeta):
        """Dual extreme points attaining the max at ``zeta`` (as ``(u, const)``)."""
        val = self.eval(zeta)
        return [(u, k) for u, k in self._all_pieces if dot(u, zeta) + k == val]

    def tight_rays(self, zeta):
        ell = self.space.ell
        out = []
        for ray in self.space.R:
            e, h = ray[:ell], ray[ell:]
            if any(e) and dot(zeta, e) + dot(self.beta, h) == 0:
                out.append(e)
        return out

    def in_exit_cone(self, zeta, d) -> bool:
        """``d`` points out of the domain at ``zeta`` (existence over tight rays)."""
        return any(dot(d, e) > 0 for e in self.tight_rays(zeta))

    def dir_deriv(self, zeta, d):
        zeta = tuple(Fraction(z) for z in zeta)
        d = tuple(Fraction(x) for x in d)
        if self.eval(zeta) == INF:
            raise ContractError("directional derivative requested outside the finite domain")
        if self.in_exit_cone(zeta, d):
            return INF
        return max(dot(u, d) for u, _ in self.active_points(zeta))

    def linear_range(self, zeta, d):
        """``t̄ > 0`` with ``t -> z_LP(zeta + t d)`` affine and finite on ``[0, t̄]``,
        or ``0`` when ``d`` leaves the domain immediately.
        """
        zeta = tuple(Fraction(z) for z in zeta)
        d = tuple(Fraction(x) for x in d)
        z0 = self.eval(zeta)
        if z0 == INF:
            raise ContractError("outside the finite domain")
        tbar = Fraction(1)
        for e, rhs in self._all_domain:
            s = dot(e, d)
            if s > 0:
                tbar = min(tbar, (rhs - dot(e, zeta)) / s)
        if tbar <= 0:
            return Fraction(0)
        slope = max(dot(u, d) for u, _ in self.active_points(zeta))
        for u, k in self._all_pieces:
            v0 = dot(u, zeta) + k
            s = dot(u, d)
            if v0 < z0 and s > slope:
                tbar = min(tbar, (z0 - v0) / (s - slope))
        return tbar

    def is_differentiable(self, zeta) -> bool:
        zeta = tuple(Fraction(z) for z in zeta)
        if self.classify(zeta) != INTERIOR:
            return False
        return len({u for u, _ in self.active_points(zeta)}) == 1
