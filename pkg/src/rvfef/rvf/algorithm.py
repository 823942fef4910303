"""The cutting-plane construction of the RVF.

Each iteration maximises the gap between the current upper approximation
and ``c0·x`` over the feasible region.  The bilinear subproblem is solved
exactly as a disjunctive MILP: for every part in the description, either one
of its pieces bounds the gap variable, or the point lies strictly outside
that part's domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..exact import INF, dot
from ..milp import GE, LE, OPTIMAL, MilpProblem, Row, solve_general_lp, solve_milp
from ..model import Instance
from .core import InvariantError, LogEntry, RvfDescription, RvfModel
from .envelope import solve_gap_by_envelope


@dataclass(frozen=True)
class GapReport:
    theta: Fraction
    verified_gap: Fraction
    attained: bool


def subproblem_milp(desc: RvfDescription, U=None) -> MilpProblem:
    """Disjunctive form of the gap problem; variables are the canonical
    columns followed by the gap ``theta``.
    """
    model = desc.model
    cn = model.canon
    n = cn.ncols
    U = desc.U if U is None else U
    one = (Fraction(1),)
    cap = Row(tuple(cn.c0) + one, LE, U - cn.obj_shift)
    disj = []
    for part in desc.parts:
        bf = model.bounding(part)
        alts = []
        for u, k in bf.pieces:
            # theta + c0·x - uᵀC1·x <= k + uᵀzeta_shift - obj_shift
            coeffs = [a - sum((u[i] * cn.C1[i][j] for i in range(cn.ell)), Fraction(0)) for j, a in enumerate(cn.c0)]
            rhs = k + dot(u, cn.zeta_shift) - cn.obj_shift
            alts.append((Row(tuple(coeffs) + one, LE, rhs),))
        for e, rhs in bf.domain:
            coeffs = [sum((e[i] * cn.C1[i][j] for i in range(cn.ell)), Fraction(0)) for j in range(n)]
            alts.append((Row(tuple(coeffs) + (Fraction(0),), GE, rhs - dot(e, cn.zeta_shift), True),))
        disj.append(tuple(alts))
    c = (Fraction(0),) * n + one
    base = cn.milp(c=c, sense="max", extra_rows=[cap], extra_cols=1)
    return MilpProblem(base.c, base.rows, base.lower, base.upper, base.integer, "max", tuple(disj))


def _verified(desc: RvfDescription, x_nat) -> Fraction:
    inst = desc.inst
    crit = inst.criterion(x_nat)
    return desc.eval_upper(crit[1:]) - crit[0]


def solve_subproblem(desc: RvfDescription, U=None, method: str = "auto"):
    """``(GapReport, x, argmax_x)``; ``x`` has positive verified gap whenever
    ``theta > 0``.  ``argmax_x`` is the closure point where ``theta`` is
    attained or approached.

    ``method`` is ``"disjunctive"`` (one MILP over all parts),
    ``"envelope"`` (at most two parametric rows; one MILP per affine element
    of the current upper approximation) or ``"auto"`` (envelope when it
    applies).  Both are exact.
    """
    model = desc.model
    cn = model.canon
    cap = desc.U if U is None else U
    if method == "auto":
        method = "envelope" if cn.ell <= 2 else "disjunctive"
    if method == "envelope":
        theta, xc, attained, p, sol = solve_gap_by_envelope(desc, cap)
        ncol = cn.ncols
    elif method == "disjunctive":
        p = subproblem_milp(desc, U)
        sol = solve_milp(p)
        if sol.status != OPTIMAL:
            raise InvariantError(f"gap subproblem returned {sol.status}")
        theta = sol.objective
        xc = sol.x[: cn.ncols]
        ncol = cn.ncols + 1
    else:
        raise ValueError(f"unknown method {method!r}")
    x_star = cn.to_natural(xc)
    gap = _verified(desc, x_star) if U is None else None
    x_use = x_star
    if theta > 0 and gap is not None and gap <= 0:
        x_use = _approach(desc, p, sol, ncol)
        gap = _verified(desc, x_use)
        if gap <= 0:
            raise InvariantError("could not find a point with positive gap below a positive bound")
    if gap is not None and gap > theta:
        raise InvariantError(f"verified gap {gap} exceeds the relaxation bound {theta}")
    return GapReport(theta, gap, gap == theta), x_use, x_star


def _approach(desc, p: MilpProblem, sol, ncol):
    """A strictly feasible point of the optimal leaf close to its closure point."""
    cn = desc.model.canon
    n = cn.ncols
    rows = list(p.rows)
    for d, a in enumerate(sol.chosen):
        rows.extend(p.disjunctions[d][a])
    lower = list(p.lower)
    upper = list(p.upper)
    for j in range(cn.r):
        lower[j] = upper[j] = sol.x[j]
    # maximise the smallest strict slack: an interior point of the leaf
    ext = [
        Row(r.coeffs + (((Fraction(1) if r.sense == LE else Fraction(-1)) if r.strict else Fraction(0)),), r.sense, r.rhs)
        for r in rows
    ]
    obj = (Fraction(0),) * ncol + (Fraction(1),)
    lp = solve_general_lp(obj, ext, tuple(lower) + (None,), tuple(upper) + (Fraction(1),), "max")
    if lp.status != OPTIMAL or lp.objective <= 0:
        raise InvariantError("optimal leaf has no strictly feasible point")
    xs = lp.x[:ncol]
    xc = sol.x[:ncol]
    # walk from the closure point towards the interior point until the gap is positive
    lam = Fraction(1, 1024)
    while True:
        pt = tuple((1 - lam) * a + lam * b for a, b in zip(xc, xs))
        x_nat = cn.to_natural(pt[:n])
        if _verified(desc, x_nat) > 0:
            return x_nat
        if lam == 1:
            return x_nat
        lam = min(Fraction(1), lam * 2)


def construct(
    inst_or_model,
    max_iters: int | None = None,
    checks: bool = True,
    on_iteration=None,
    method: str = "auto",
) -> RvfDescription:
    """Run the algorithm until the gap bound is zero (or ``max_iters``
    productive iterations, followed by one guarantee solve).

    With ``checks`` the per-iteration invariants are asserted: the bound is
    nonincreasing, the verified gap never exceeds it, every appended part is
    new, and the new part's bounding function meets z at its own point.
    """
    model = inst_or_model if isinstance(inst_or_model, RvfModel) else RvfModel(inst_or_model)
    desc = RvfDescription(model, model.init_upper_bound())
    last_theta = None
    while True:
        productive = sum(1 for e in desc.log if e.part is not None)
        guarantee = max_iters is not None and productive >= max_iters
        report, x, x_star = solve_subproblem(desc, method=method)
        crit = model.inst.criterion(x_star)
        entry = LogEntry(report.theta, report.verified_gap, report.attained, crit[1:], x)
        if checks and last_theta is not None and report.theta > last_theta:
            raise InvariantError("gap bound increased between iterations")
        last_theta = report.theta
        if report.theta <= 0:
            if report.theta < 0:
                raise InvariantError("negative gap bound")
            if crit[0] == desc.U:
                part = tuple(int(v) for v in x[: model.inst.r])
                if part not in desc.parts:
                    entry.part = part
                    desc.parts.append(part)
            desc.log.append(entry)
            desc.terminated = True
            break
        if guarantee:
            desc.log.append(entry)
            break
        x_eff = model.convert_to_efficient(x)
        part = tuple(int(v) for v in x_eff[: model.inst.r])
        if checks and part in desc.parts:
            raise InvariantError(f"iteration produced an existing part {part}")
        entry.part = part
        entry.efficient = model.inst.criterion(x_eff)
        desc.parts.append(part)
        desc.log.append(entry)
        if checks:
            zeta = entry.efficient[1:]
            if model.bounding_eval(part, zeta) != entry.efficient[0]:
                raise InvariantError("new part does not meet its own efficient point")
            if model.oracle_z(zeta) != entry.efficient[0]:
                raise InvariantError("new part's stability region misses its own point")
        if on_iteration is not None:
            on_iteration(entry)
    return desc


def part_removable(desc: RvfDescription, part, method: str = "auto") -> bool:
    """Does dropping ``part`` leave the function unchanged?  One gap solve
    with the reduced part list and a cap strictly above every value of z.
    """
    rest = RvfDescription(desc.model, desc.U, [p for p in desc.parts if p != part], terminated=True)
    report, _, _ = solve_subproblem(rest, U=desc.U + 1, method=method)
    return report.theta == 0


def minimize_description(desc: RvfDescription, method: str = "auto") -> RvfDescription:
    """Greedy removal in list order; the removal order is recorded."""
    if not desc.terminated:
        raise ValueError("description not terminated")
    out = RvfDescription(desc.model, desc.U, list(desc.parts), list(desc.log), True)
    for part in list(desc.parts):
        if len(out.parts) <= 1:
            break
        if part_removable(out, part, method):
            out.parts.remove(part)
            out.removal_order.append(part)
    return out
