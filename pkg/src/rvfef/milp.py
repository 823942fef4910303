"""Exact branch and bound over simplex relaxations.

Problems are stated with general rows (``<=``, ``>=``, ``=``), per-variable
bounds (``None`` means unbounded on that side) and an optional list of
disjunctions.  A disjunction is a tuple of alternatives, each a tuple of
rows that must all hold when the alternative is chosen.  Rows inside
disjunctions may be strict; strictness is honoured exactly, and a value that
is only approached (a supremum) is reported with ``attained=False``.

Search order is best bound first, ties broken by node id.  Branching takes
the lowest-index fractional integer variable; disjunctions are branched on
lazily, only when the node's LP point violates them.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import dot
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, solve_lp

LE, GE, EQ = "<=", ">=", "="


@dataclass(frozen=True)
class Row:
    coeffs: tuple
    sense: str
    rhs: Fraction
    strict: bool = False

    def holds(self, x, strict_ok=True) -> bool:
        v = dot(self.coeffs, x)
        if self.sense == EQ:
            return v == self.rhs
        if self.strict and strict_ok:
            return v < self.rhs if self.sense == LE else v > self.rhs
        return v <= self.rhs if self.sense == LE else v >= self.rhs

    def slack(self, x) -> Fraction:
        """Signed slack, positive on the feasible side."""
        v = dot(self.coeffs, x)
        return self.rhs - v if self.sense == LE else v - self.rhs


def row(coeffs, sense, rhs, strict=False) -> Row:
    if sense not in (LE, GE, EQ):
        raise ValueError(f"bad sense {sense!r}")
    if strict and sense == EQ:
        raise ValueError("equality rows cannot be strict")
    return Row(tuple(Fraction(a) for a in coeffs), sense, Fraction(rhs), strict)


@dataclass(frozen=True)
class MilpProblem:
    c: tuple
    rows: tuple
    lower: tuple
    upper: tuple
    integer: tuple = ()
    sense: str = "max"
    disjunctions: tuple = ()

    def __post_init__(self):
        n = len(self.c)
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("bound vectors must match the variable count")
        for r in self.rows:
            if len(r.coeffs) != n:
                raise ValueError("row length differs from variable count")
        for j in self.integer:
            if self.lower[j] is None or self.upper[j] is None:
                raise ValueError(f"integer variable {j} needs finite bounds")
        for d in self.disjunctions:
            if not d:
                raise ValueError("empty disjunction")

    @property
    def n(self) -> int:
        return len(self.c)


@dataclass(frozen=True)
class MilpSolution:
    status: str
    x: tuple = ()
    objective: Fraction | None = None
    bound: Fraction | None = None
    nodes: int = 0
    chosen: tuple = ()
    attained: bool = True
    bound_trace: tuple = field(default=(), compare=False, repr=False)


# ----------------------------------------------------------------------------
# LP over general rows


@dataclass(frozen=True)
class GeneralLp:
    status: str
    x: tuple = ()
    objective: Fraction | None = None
    ray: tuple = ()


def solve_general_lp(c, rows: Sequence[Row], lower, upper, sense="max") -> GeneralLp:
    """Solve an LP with general rows and bounds (strict rows taken closed)."""
    n = len(c)
    cols = []  # per original var: list of (std column, sign)
    const = [Fraction(0)] * n
    ncol = 0
    bound_rows = []
    for j in range(n):
        lo, hi = lower[j], upper[j]
        if lo is not None and hi is not None and lo == hi:
            const[j] = Fraction(lo)
            cols.append([])
        elif lo is not None:
            const[j] = Fraction(lo)
            cols.append([(ncol, 1)])
            if hi is not None:
                bound_rows.append((ncol, Fraction(hi) - lo))
            ncol += 1
        elif hi is not None:
            const[j] = Fraction(hi)
            cols.append([(ncol, -1)])
            ncol += 1
        else:
            cols.append([(ncol, 1), (ncol + 1, -1)])
            ncol += 2
    if any(lo is not None and hi is not None and lo > hi for lo, hi in zip(lower, upper)):
        return GeneralLp(INFEASIBLE)
    nslack = sum(1 for r in rows if r.sense != EQ) + len(bound_rows)
    width = ncol + nslack
    A = []
    b = []
    s = ncol
    for r in rows:
        line = [Fraction(0)] * width
        rhs = r.rhs
        for j, a in enumerate(r.coeffs):
            if a:
                rhs -= a * const[j]
                for k, sg in cols[j]:
                    line[k] += sg * a
        if r.sense == LE:
            line[s] = Fraction(1)
            s += 1
        elif r.sense == GE:
            line[s] = Fraction(-1)
            s += 1
        if not any(line) and r.sense == EQ:
            if rhs != 0:
                return GeneralLp(INFEASIBLE)
            continue
        A.append(line)
        b.append(rhs)
    for k, cap in bound_rows:
        line = [Fraction(0)] * width
        line[k] = Fraction(1)
        line[s] = Fraction(1)
        s += 1
        A.append(line)
        b.append(cap)
    cc = [Fraction(0)] * width
    for j, a in enumerate(c):
        if a:
            for k, sg in cols[j]:
                cc[k] += sg * a
    sol = solve_lp(LpProblem(tuple(map(tuple, A)), tuple(b), tuple(cc), sense))
    if sol.status == INFEASIBLE:
        return GeneralLp(INFEASIBLE)

    def back(v, with_const):
        out = []
        for j in range(n):
            val = const[j] if with_const else Fraction(0)
            for k, sg in cols[j]:
                val += sg * v[k]
            out.append(val)
        return tuple(out)

    if sol.status == UNBOUNDED:
        return GeneralLp(UNBOUNDED, ray=back(sol.ray, False))
    x = back(sol.primal, True)
    return GeneralLp(OPTIMAL, x=x, objective=dot(c, x))


# ----------------------------------------------------------------------------
# branch and bound


@dataclass
class _Node:
    lower: list
    upper: list
    chosen: dict
    key: Fraction


def _frac_var(x, integer):
    for j in integer:
        if x[j].denominator != 1:
            return j
    return None


def _alt_holds(alt, x, strict=True) -> bool:
    return all(r.holds(x, strict) for r in alt)


def solve_milp(p: MilpProblem, node_limit: int | None = None) -> MilpSolution:
    """Exact optimum of ``p`` over integer assignments and disjunction choices.

    For a ``min`` problem the objective is negated internally; all reported
    values are in the caller's sense.
    """
    sgn = 1 if p.sense == "max" else -1
    c = tuple(sgn * a for a in p.c)
    base_rows = list(p.rows)
    integer = sorted(p.integer)
    ndis = len(p.disjunctions)

    incumbent = None  # (value, x, chosen, attained)
    trace = []
    counter = 0
    heap = []

    def push(lower, upper, chosen, key):
        nonlocal counter
        heapq.heappush(heap, (-key, counter, _Node(lower, upper, chosen, key)))
        counter += 1

    push(list(p.lower), list(p.upper), {}, math.inf)
    nodes = 0
    while heap:
        _, _, node = heapq.heappop(heap)
        if incumbent is not None and (node.key < incumbent[0] or (node.key == incumbent[0] and incumbent[3])):
            continue
        nodes += 1
        if node.key != math.inf:
            trace.append(node.key)
        if node_limit is not None and nodes > node_limit:
            raise RuntimeError("node limit exceeded")
        rows = list(base_rows)
        for d, a in node.chosen.items():
            rows.extend(p.disjunctions[d][a])
        lp = solve_general_lp(c, rows, node.lower, node.upper, "max")
        if lp.status == INFEASIBLE:
            continue
        if lp.status == UNBOUNDED:
            return MilpSolution(UNBOUNDED, x=lp.ray, nodes=nodes)
        val = lp.objective
        if incumbent is not None and (val < incumbent[0] or (val == incumbent[0] and incumbent[3])):
            continue
        x = lp.x
        j = _frac_var(x, integer)
        if j is not None:
            fl = math.floor(x[j])
            up = list(node.upper)
            up[j] = Fraction(fl)
            push(list(node.lower), up, dict(node.chosen), val)
            lo = list(node.lower)
            lo[j] = Fraction(fl + 1)
            push(lo, list(node.upper), dict(node.chosen), val)
            continue
        # integral point: look for a violated disjunction
        violated = None
        for d in range(ndis):
            if d in node.chosen:
                continue
            if not any(_alt_holds(alt, x) for alt in p.disjunctions[d]):
                violated = d
                break
        if violated is not None:
            for a in range(len(p.disjunctions[violated])):
                ch = dict(node.chosen)
                ch[violated] = a
                push(list(node.lower), list(node.upper), ch, val)
            continue
        if all(_alt_holds(p.disjunctions[d][a], x) for d, a in node.chosen.items()):
            cand = (val, x, _report_choice(p, node.chosen, x), True)
            if _better(cand, incumbent):
                incumbent = cand
            continue
        # some chosen strict row is tight: fix integers, then every disjunction
        j = next((j for j in integer if node.lower[j] != node.upper[j]), None)
        if j is not None:
            v = x[j]
            if v > node.lower[j]:
                up = list(node.upper)
                up[j] = v - 1
                push(list(node.lower), up, dict(node.chosen), val)
            lo = list(node.lower)
            up = list(node.upper)
            lo[j] = up[j] = v
            push(lo, up, dict(node.chosen), val)
            if v < node.upper[j]:
                lo = list(node.lower)
                lo[j] = v + 1
                push(lo, list(node.upper), dict(node.chosen), val)
            continue
        d = next((d for d in range(ndis) if d not in node.chosen), None)
        if d is not None:
            for a in range(len(p.disjunctions[d])):
                ch = dict(node.chosen)
                ch[d] = a
                push(list(node.lower), list(node.upper), ch, val)
            continue
        # everything fixed: the strict region is convex; if nonempty the
        # closed optimum is its supremum
        if _strict_margin(p, rows, node.lower, node.upper) > 0:
            cand = (val, x, tuple(node.chosen[d] for d in range(ndis)), False)
            if _better(cand, incumbent):
                incumbent = cand
    if incumbent is None:
        return MilpSolution(INFEASIBLE, nodes=nodes, bound_trace=tuple(sgn * t for t in trace))
    val, x, chosen, attained = incumbent
    return MilpSolution(
        OPTIMAL,
        x=x,
        objective=sgn * val,
        bound=sgn * val,
        nodes=nodes,
        chosen=chosen,
        attained=attained,
        bound_trace=tuple(sgn * t for t in trace),
    )


def _better(cand, cur) -> bool:
    if cur is None or cand[0] > cur[0]:
        return True
    return cand[0] == cur[0] and cand[3] and not cur[3]


def _report_choice(p, chosen, x):
    out = []
    for d, alts in enumerate(p.disjunctions):
        if d in chosen:
            out.append(chosen[d])
        else:
            out.append(next(a for a, alt in enumerate(alts) if _alt_holds(alt, x)))
    return tuple(out)


def _strict_margin(p: MilpProblem, rows, lower, upper) -> Fraction:
    """Largest ``t <= 1`` with every strict row satisfied with slack ``t``."""
    n = p.n
    ext = []
    for r in rows:
        coeffs = r.coeffs + (Fraction(0),)
        if r.strict:
            # a·x + t <= rhs  or  a·x - t >= rhs
            coeffs = r.coeffs + (Fraction(1) if r.sense == LE else Fraction(-1),)
        ext.append(Row(coeffs, r.sense, r.rhs))
    c = (Fraction(0),) * n + (Fraction(1),)
    lp = solve_general_lp(c, ext, tuple(lower) + (None,), tuple(upper) + (Fraction(1),), "max")
    if lp.status != OPTIMAL:
        return Fraction(-1)
    return lp.objective


def strict_interior(c, rows: Sequence[Row], lower, upper, floor_value) -> tuple | None:
    """A point of the closed region with ``c·x >= floor_value`` that makes
    every strict row strict, maximising the smallest strict slack; ``None`` if
    no such point exists.
    """
    n = len(c)
    ext = [Row(r.coeffs + ((Fraction(1) if r.sense == LE else Fraction(-1)) if r.strict else Fraction(0),), r.sense, r.rhs) for r in rows]
    ext.append(Row(tuple(c) + (Fraction(0),), GE, Fraction(floor_value)))
    obj = (Fraction(0),) * n + (Fraction(1),)
    lp = solve_general_lp(obj, ext, tuple(lower) + (None,), tuple(upper) + (Fraction(1),), "max")
    if lp.status != OPTIMAL or lp.objective <= 0:
        return None
    return lp.x[:n]


# ----------------------------------------------------------------------------
# integer parts


def enumerate_feasible_integer_parts(p: MilpProblem) -> list[tuple]:
    """All integer vectors (over ``p.integer``) extendable to a feasible point.

    Disjunctions are ignored.  Depth-first in index order, ascending values,
    with LP feasibility pruning after every fixing.
    """
    integer = sorted(p.integer)
    zero = (Fraction(0),) * p.n
    rows = list(p.rows)
    out = []

    def feasible(lower, upper):
        return solve_general_lp(zero, rows, lower, upper, "max").status != INFEASIBLE

    def rec(k, lower, upper):
        if k == len(integer):
            out.append(tuple(int(lower[j]) for j in integer))
            return
        j = integer[k]
        lo, hi = math.ceil(p.lower[j]), math.floor(p.upper[j])
        for v in range(lo, hi + 1):
            L = list(lower)
            U = list(upper)
            L[j] = U[j] = Fraction(v)
            if feasible(L, U):
                rec(k + 1, L, U)

    if feasible(list(p.lower), list(p.upper)):
        rec(0, list(p.lower), list(p.upper))
    return out


def brute_force(p: MilpProblem) -> Fraction | None:
    """Reference optimum by enumerating all integer assignments (no disjunctions)."""
    if p.disjunctions:
        raise ValueError("brute force does not handle disjunctions")
    integer = sorted(p.integer)
    ranges = [range(math.ceil(p.lower[j]), math.floor(p.upper[j]) + 1) for j in integer]
    best = None

    def rec(k, lower, upper):
        nonlocal best
        if k == len(integer):
            lp = solve_general_lp(p.c, p.rows, lower, upper, p.sense)
            if lp.status == OPTIMAL:
                v = lp.objective
                if best is None or (v > best if p.sense == "max" else v < best):
                    best = v
            return
        j = integer[k]
        for v in ranges[k]:
            L = list(lower)
            U = list(upper)
            L[j] = U[j] = Fraction(v)
            rec(k + 1, L, U)

    rec(0, list(p.lower), list(p.upper))
    return best
