"""Bounding functions, descriptions and point queries on the RVF.

Everything here is in natural coordinates: integer parts are the original
integer values, ``zeta`` is the right-hand side of the original parametric
rows, and objective values include the constant from shifted lower bounds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from ..exact import INF, dot, matvec, vsub
from ..milp import EQ, GE, LE, OPTIMAL, Row, solve_general_lp, solve_milp
from ..model import (
    CanonicalInstance,
    Instance,
    UnboundedRegion,
    canonicalize,
    check_bounded,
)
from ..polyhedra import SubdifferentialPoly
from ..rlpvf import DualSpace, RlpvfHandle
from ..simplex import ContractError, INFEASIBLE


class InvariantError(AssertionError):
    """A mathematical invariant failed on a concrete input."""


class UpperBoundOnly(UserWarning):
    """Value from an unterminated description: only an upper bound on z."""


def _zeta(z) -> tuple:
    return tuple(Fraction(v) for v in z)


@dataclass
class BoundingFunction:
    """``z̄(zeta; x_I) = shift + z_LP(zeta - offset; beta)``."""

    x_I: tuple
    shift: Fraction
    offset: tuple
    handle: RlpvfHandle

    def eval(self, zeta):
        v = self.handle.eval(vsub(_zeta(zeta), self.offset))
        return INF if v == INF else self.shift + v

    @cached_property
    def pieces(self) -> tuple:
        """Minimal pieces as ``(u, const)`` in natural zeta."""
        return tuple((u, self.shift - dot(u, self.offset) + k) for u, k in self.handle.pieces)

    @cached_property
    def domain(self) -> tuple:
        """Irredundant ``(e, rhs)`` with domain ``eᵀzeta <= rhs``."""
        return tuple((e, rhs + dot(e, self.offset)) for e, rhs in self.handle.domain_rows)

    def in_domain(self, zeta) -> bool:
        return self.eval(zeta) != INF

    def subdifferential(self, zeta) -> SubdifferentialPoly:
        return self.handle.subdifferential(vsub(_zeta(zeta), self.offset))

    def dir_deriv(self, zeta, d):
        return self.handle.dir_deriv(vsub(_zeta(zeta), self.offset), d)

    def linear_range(self, zeta, d):
        return self.handle.linear_range(vsub(_zeta(zeta), self.offset), d)

    def active_gradients(self, zeta):
        return [u for u, _ in self.handle.active_points(vsub(_zeta(zeta), self.offset))]

    def tight_exits(self, zeta):
        return self.handle.tight_rays(vsub(_zeta(zeta), self.offset))


class RvfModel:
    """Exact RVF machinery for one instance (boundedness checked up front)."""

    def __init__(self, inst: Instance):
        bd = check_bounded(inst)
        if not bd.bounded:
            raise UnboundedRegion("feasible region is unbounded", bd.direction)
        self.inst = inst
        self.canon: CanonicalInstance = canonicalize(inst)
        cn = self.canon
        self.space = DualSpace(cn.C_C(), cn.A_C(), cn.c0_C())
        self._bounding: dict = {}
        self._feasible_parts: dict = {}

    @property
    def ell(self) -> int:
        return self.inst.ell

    # -- integer parts ------------------------------------------------------

    def part_feasible(self, x_I) -> bool:
        x_I = tuple(int(v) for v in x_I)
        if x_I not in self._feasible_parts:
            cn = self.canon
            xi = cn.int_to_canonical(x_I)
            ok = all(0 <= v <= u for v, u in zip(xi, cn.int_upper))
            ok = ok and all(dot(g, xi) == h for g, h in zip(cn.int_rows, cn.int_rhs))
            if ok:
                p = cn.milp()
                lower = tuple(xi) + p.lower[cn.r :]
                upper = tuple(xi) + p.upper[cn.r :]
                ok = solve_general_lp(p.c, p.rows, lower, upper).status != INFEASIBLE
            self._feasible_parts[x_I] = ok
        return self._feasible_parts[x_I]

    def bounding(self, x_I) -> BoundingFunction:
        x_I = tuple(int(v) for v in x_I)
        bf = self._bounding.get(x_I)
        if bf is None:
            if len(x_I) != self.inst.r or not self.part_feasible(x_I):
                raise ContractError(f"{x_I} is not a feasible integer part")
            cn = self.canon
            xi = cn.int_to_canonical(x_I)
            beta = vsub(cn.b, matvec(cn.A_I(), xi))
            shift = cn.obj_shift + dot(cn.c0_I(), xi)
            offset = tuple(s + v for s, v in zip(cn.zeta_shift, matvec(cn.C_I(), xi)))
            bf = BoundingFunction(x_I, shift, offset, self.space.handle(beta))
            self._bounding[x_I] = bf
        return bf

    def bounding_eval(self, x_I, zeta):
        return self.bounding(x_I).eval(zeta)

    def integer_parts(self) -> list[tuple]:
        """All feasible integer parts, natural values."""
        from ..milp import enumerate_feasible_integer_parts

        cn = self.canon
        return [cn.int_to_natural(xi) for xi in enumerate_feasible_integer_parts(cn.milp())]

    # -- direct solves ------------------------------------------------------

    def init_upper_bound(self) -> Fraction:
        """LP relaxation of ``max c0·x`` over the feasible region."""
        cn = self.canon
        p = cn.milp(c=cn.c0, sense="max")
        lp = solve_general_lp(p.c, p.rows, p.lower, p.upper, "max")
        if lp.status == INFEASIBLE:
            from ..model import EmptyFeasibleRegion

            raise EmptyFeasibleRegion("empty feasible region")
        return lp.objective + cn.obj_shift

    def parametric_rows(self, zeta, extra_cols=0, strict=False) -> list[Row]:
        cn = self.canon
        zc = cn.zeta_to_canonical(_zeta(zeta))
        pad = (Fraction(0),) * extra_cols
        return [Row(tuple(r) + pad, LE, z, strict) for r, z in zip(cn.C1, zc)]

    def oracle_solution(self, zeta):
        """``(z(zeta), x)`` by one MILP solve; ``(INF, None)`` off the domain."""
        cn = self.canon
        p = cn.milp(c=cn.c0, sense="min", extra_rows=self.parametric_rows(zeta))
        sol = solve_milp(p)
        if sol.status != OPTIMAL:
            return INF, None
        return sol.objective + cn.obj_shift, cn.to_natural(sol.x)

    def oracle_z(self, zeta):
        return self.oracle_solution(zeta)[0]

    def convert_to_efficient(self, x) -> tuple:
        """Minimise the sum of all criteria subject to not worsening any of them."""
        cn = self.canon
        inst = self.inst
        x = tuple(Fraction(v) for v in x)
        crit = inst.criterion(x)
        xc = cn.to_canonical(x)
        rows = []
        csum = [Fraction(0)] * cn.ncols
        for k, r in enumerate((cn.c0,) + tuple(cn.C1)):
            rows.append(Row(tuple(r), LE, dot(r, xc)))
            for j, a in enumerate(r):
                csum[j] += a
        p = cn.milp(c=csum, sense="min", extra_rows=rows)
        sol = solve_milp(p)
        if sol.status != OPTIMAL:
            raise InvariantError("conversion problem infeasible at a feasible point")
        out = cn.to_natural(sol.x)
        new = inst.criterion(out)
        if any(a > b for a, b in zip(new, crit)):
            raise InvariantError("converted point does not dominate its input")
        return out


@dataclass
class LogEntry:
    """One subproblem solve.

    ``zeta`` is where the gap bound ``theta`` is attained or approached;
    ``point`` is the solution actually used (it equals the argmax unless a
    supremum had to be approached from inside), ``part`` the integer part
    appended after conversion (``None`` for the terminal or guarantee solve).
    """

    theta: Fraction
    verified_gap: Fraction
    attained: bool
    zeta: tuple
    point: tuple
    part: tuple | None = None
    efficient: tuple | None = None


@dataclass
class RvfDescription:
    model: RvfModel
    U: Fraction
    parts: list = field(default_factory=list)
    log: list = field(default_factory=list)
    terminated: bool = False
    removal_order: list = field(default_factory=list)

    @property
    def inst(self) -> Instance:
        return self.model.inst

    @property
    def ell(self) -> int:
        return self.model.ell

    def bounding(self, x_I) -> BoundingFunction:
        return self.model.bounding(x_I)

    def bounding_eval(self, x_I, zeta):
        return self.model.bounding_eval(x_I, zeta)

    def min_parts(self, zeta):
        best = INF
        for p in self.parts:
            v = self.model.bounding_eval(p, zeta)
            if v < best:
                best = v
        return best

    def eval_upper(self, zeta):
        return min(self.U, self.min_parts(zeta))

    def eval_rvf(self, zeta):
        if not self.terminated:
            warnings.warn("description not terminated: value is an upper bound only", UpperBoundOnly, stacklevel=2)
        return self.min_parts(zeta)

    def active_parts(self, zeta) -> list[tuple]:
        z = self.min_parts(zeta)
        if z == INF:
            raise ContractError("zeta is outside the finite domain")
        return [p for p in self.parts if self.model.bounding_eval(p, zeta) == z]

    def stability_region_contains(self, x_I, zeta) -> bool:
        z = self.min_parts(zeta)
        return z != INF and self.model.bounding_eval(x_I, zeta) == z

    def rvf_dir_deriv(self, zeta, d):
        zeta = _zeta(zeta)
        if self.min_parts(zeta) == INF:
            return Fraction(0)
        return min(self.bounding(p).dir_deriv(zeta, d) for p in self.active_parts(zeta))

    def linear_range(self, zeta, d):
        """``t̄`` such that ``z(zeta + t d)`` is affine for ``t`` in ``(0, t̄]``.

        Beyond the active parts' own ranges, inactive parts may drop below;
        crossings are computed from their piece structure.
        """
        zeta = _zeta(zeta)
        d = _zeta(d)
        z0 = self.min_parts(zeta)
        act = self.active_parts(zeta)
        tbar = Fraction(1)
        slope = None
        for p in act:
            bf = self.bounding(p)
            t = bf.linear_range(zeta, d)
            if t == 0:
                continue
            s = bf.dir_deriv(zeta, d)
            if slope is None or s < slope:
                slope = s
            tbar = min(tbar, t)
        if slope is None:
            return Fraction(0)
        for p in self.parts:
            if p in act:
                continue
            bf = self.bounding(p)
            # entering domains and dropping pieces of p: breakpoints of its pieces vs. z's line
            for e, rhs in bf.domain:
                s = dot(e, d)
                if s < 0 and dot(e, zeta) > rhs:
                    # z may jump down where p's domain begins: stop short of it
                    tbar = min(tbar, (dot(e, zeta) - rhs) / (-s) / 2)
            for u, k in bf.pieces:
                v0 = dot(u, zeta) + k
                s = dot(u, d)
                if s < slope and v0 > z0:
                    tbar = min(tbar, (v0 - z0) / (slope - s))
        return tbar

    def local_subdifferential(self, zeta) -> SubdifferentialPoly:
        zeta = _zeta(zeta)
        act = self.active_parts(zeta)
        poly = None
        for p in act:
            s = self.bounding(p).subdifferential(zeta)
            poly = s if poly is None else poly.intersect(s)
        return poly

    def local_radius(self, zeta, q) -> Fraction:
        """A radius (max norm) on which ``q`` is a local subgradient at ``zeta``.

        Active parts satisfy the inequality on their whole domain by
        convexity, so only inactive parts bound the radius: a finite one must
        not fall to the supporting line, an infinite one must not become
        finite.  The result is half the resulting distance.
        """
        zeta = _zeta(zeta)
        z0 = self.min_parts(zeta)
        qn = sum(abs(v) for v in q)
        best = None
        for p in self.parts:
            bf = self.bounding(p)
            v = bf.eval(zeta)
            if v == z0:
                continue
            if v == INF:
                dist = max(
                    (dot(e, zeta) - rhs) / sum(abs(a) for a in e) for e, rhs in bf.domain if dot(e, zeta) > rhs
                )
            else:
                u = max(bf.pieces, key=lambda pc: dot(pc[0], zeta) + pc[1])[0]
                dist = (v - z0) / (sum(abs(a) for a in u) + qn or 1)
            if best is None or dist < best:
                best = dist
        return (best if best is not None else Fraction(1)) / 2
