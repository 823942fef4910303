"""Exact two-phase primal simplex with Bland's rule.

The tableau is dense and holds Fractions.  Problems are in equality form
``A x = b`` with ``x >= 0``; callers with free variables or inequalities
convert first (see :mod:`rvfef.milp` for a general-row front end).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exact import dot, vecmat

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """``min`` or ``max`` of ``c·x`` subject to ``A x = b``, ``x >= 0``."""

    A: tuple
    b: tuple
    c: tuple
    sense: str = "min"

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"bad sense {self.sense!r}")
        n = len(self.c)
        if len(self.A) != len(self.b):
            raise ValueError("A and b disagree on the row count")
        for row in self.A:
            if len(row) != n:
                raise ValueError("row length differs from objective length")

    @staticmethod
    def make(A, b, c, sense="min") -> "LpProblem":
        return LpProblem(
            tuple(tuple(Fraction(x) for x in row) for row in A),
            tuple(Fraction(x) for x in b),
            tuple(Fraction(x) for x in c),
            sense,
        )


@dataclass(frozen=True)
class LpSolution:
    status: str
    primal: tuple = ()
    objective: Fraction | None = None
    dual: tuple = ()
    farkas: tuple = ()
    ray: tuple = ()
    basis: tuple = field(default=(), compare=False)


class ContractError(RuntimeError):
    """A precondition of an exact routine was violated."""


def _pivot(T, r, c):
    prow = T[r]
    p = prow[c]
    if p != 1:
        inv = 1 / p
        prow = [x * inv if x else x for x in prow]
        T[r] = prow
    nz = [j for j, x in enumerate(prow) if x]
    for i, row in enumerate(T):
        if i == r:
            continue
        f = row[c]
        if f:
            for j in nz:
                row[j] -= f * prow[j]


def _run(T, basis, cost_row, allowed):
    """Bland's-rule phase on tableau ``T`` whose last row is the cost row.

    Returns ``None`` at optimality or the entering column if unbounded.
    ``cost_row`` is the index of the reduced-cost row; the rhs is the last
    column.  Minimisation convention: enter on negative reduced cost.
    """
    m = cost_row
    last = len(T[0]) - 1
    while True:
        z = T[m]
        enter = None
        for j in range(last):
            if z[j] < 0 and allowed[j]:
                enter = j
                break
        if enter is None:
            return None
        leave = None
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][last] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            return enter
        _pivot(T, leave, enter)
        basis[leave] = enter


def solve_lp(p: LpProblem) -> LpSolution:
    """Solve ``p`` exactly.

    On optimality ``dual`` holds row multipliers ``y`` with ``cᵀx* = bᵀy``
    (``Aᵀy <= c`` for min, ``>= c`` for max).  On infeasibility ``farkas``
    holds ``y`` with ``yᵀA >= 0`` and ``yᵀb < 0``.  On unboundedness ``ray``
    is a recession direction of the feasible set that improves the
    objective.
    """
    m = len(p.A)
    n = len(p.c)
    sgn = -1 if p.sense == "max" else 1
    c = [sgn * x for x in p.c]
    flip = [p.b[i] < 0 for i in range(m)]
    # columns: x (n), artificials (m), rhs
    T = []
    for i in range(m):
        s = -1 if flip[i] else 1
        row = [s * x for x in p.A[i]]
        row += [Fraction(int(k == i)) for k in range(m)]
        row.append(s * p.b[i])
        T.append(row)
    basis = [n + i for i in range(m)]
    # phase 1 cost row: minimise the sum of artificials
    w = [Fraction(0)] * (n + m + 1)
    for row in T:
        for j in range(n):
            w[j] -= row[j]
        w[-1] -= row[-1]
    T.append(w)
    allowed = [True] * n + [False] * m
    _run(T, basis, m, allowed)
    phase1 = -T[m][-1]
    if phase1 > 0:
        # phase-1 duals y1 satisfy Aᵀy1 <= 0, bᵀy1 = phase1 > 0 (in flipped rows)
        y = []
        for i in range(m):
            yi = -T[m][n + i] + 1  # reduced cost of artificial i is 1 - y_i
            y.append(-yi if flip[i] else yi)
        # y currently satisfies yᵀA <= 0 and yᵀb > 0; negate for the convention
        y = tuple(-v for v in y)
        return LpSolution(INFEASIBLE, farkas=y)
    # drive artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if T[i][j]:
                    _pivot(T, i, j)
                    basis[i] = j
                    break
    # phase 2 cost row
    z = list(c) + [Fraction(0)] * m + [Fraction(0)]
    for i in range(m):
        cb = c[basis[i]] if basis[i] < n else 0
        if cb:
            row = T[i]
            for j in range(n + m + 1):
                if row[j]:
                    z[j] -= cb * row[j]
    T[m] = z
    enter = _run(T, basis, m, allowed)
    if enter is not None:
        ray = [Fraction(0)] * n
        ray[enter] = Fraction(1)
        for i in range(m):
            if basis[i] < n:
                ray[basis[i]] = -T[i][enter]
        return LpSolution(UNBOUNDED, ray=tuple(ray), basis=tuple(basis))
    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][-1]
    obj = dot(p.c, x)
    # y_i = c_Bᵀ B⁻¹ e_i; reduced cost of artificial i is 0 - y'_i
    y = []
    for i in range(m):
        yi = -T[m][n + i]
        if flip[i]:
            yi = -yi
        y.append(sgn * yi)
    return LpSolution(OPTIMAL, primal=tuple(x), objective=obj, dual=tuple(y), basis=tuple(basis))


def farkas_ray(p: LpProblem) -> tuple:
    """Farkas multipliers proving ``p`` infeasible."""
    sol = solve_lp(LpProblem(p.A, p.b, tuple(Fraction(0) for _ in p.c), "min"))
    if sol.status != INFEASIBLE:
        raise ContractError("farkas_ray called on a feasible problem")
    return sol.farkas


def check_certificate(p: LpProblem, sol: LpSolution) -> bool:
    """Verify the exact optimality, Farkas or ray certificate in ``sol``."""
    if sol.status == INFEASIBLE:
        yA = vecmat(sol.farkas, p.A) if p.A else ()
        return all(v >= 0 for v in yA) and dot(sol.farkas, p.b) < 0
    if sol.status == UNBOUNDED:
        d = sol.ray
        ok = all(v >= 0 for v in d) and all(dot(row, d) == 0 for row in p.A)
        gain = dot(p.c, d)
        return ok and (gain < 0 if p.sense == "min" else gain > 0)
    x, y = sol.primal, sol.dual
    if any(v < 0 for v in x) or any(dot(row, x) != bi for row, bi in zip(p.A, p.b)):
        return False
    yA = vecmat(y, p.A) if p.A else tuple(Fraction(0) for _ in p.c)
    for j, cj in enumerate(p.c):
        if p.sense == "min" and yA[j] > cj:
            return False
        if p.sense == "max" and yA[j] < cj:
            return False
    return dot(p.c, x) == dot(y, p.b)
