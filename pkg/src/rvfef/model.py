"""Instance data, JSON schema, canonical form and boundedness checks.

An instance is stated in natural form: rows with senses, per-variable bounds,
integer variables first.  Row 0 of ``C`` is the objective ``c0``; rows
``1..ell`` are the parametric criteria whose right-hand side is ``zeta``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .exact import dot, left_nullspace, rat_parse, rat_str, row_basis
from .milp import EQ, GE, LE, MilpProblem, Row, solve_general_lp
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED

SENSES = {"<=": LE, "=": EQ, ">=": GE, "==": EQ}


class InstanceError(ValueError):
    """Schema or dimension problem in an instance file (input error)."""


class EmptyFeasibleRegion(InstanceError):
    """The LP relaxation of the feasible region is empty."""


class UnboundedRegion(InstanceError):
    """The feasible region is unbounded; ``direction`` is a recession ray."""

    def __init__(self, msg, direction):
        super().__init__(msg)
        self.direction = direction


@dataclass(frozen=True)
class Instance:
    n: int
    r: int
    ell: int
    C: tuple
    A: tuple
    senses: tuple
    b: tuple
    lower: tuple
    upper: tuple
    name: str = ""

    def __post_init__(self):
        if self.ell < 1:
            raise InstanceError("ell must be at least 1")
        if not 0 <= self.r <= self.n:
            raise InstanceError("r must lie in [0, n]")
        if len(self.C) != self.ell + 1:
            raise InstanceError(f"C must have ell+1 = {self.ell + 1} rows, got {len(self.C)}")
        for k, row in enumerate(self.C):
            if len(row) != self.n:
                raise InstanceError(f"C row {k} has {len(row)} entries, expected {self.n}")
        if len(self.b) != len(self.A) or len(self.senses) != len(self.A):
            raise InstanceError("A, b and senses disagree on the row count")
        for k, row in enumerate(self.A):
            if len(row) != self.n:
                raise InstanceError(f"A row {k} has {len(row)} entries, expected {self.n}")
        if len(self.lower) != self.n or len(self.upper) != self.n:
            raise InstanceError("lower/upper must have n entries")
        for s in self.senses:
            if s not in (LE, EQ, GE):
                raise InstanceError(f"bad sense {s!r}")
        for j in range(self.n):
            if self.lower[j] is None:
                raise InstanceError(f"variable {j} needs a finite lower bound")
            if self.upper[j] is not None and self.upper[j] < self.lower[j]:
                raise InstanceError(f"variable {j} has upper < lower")

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def c0(self) -> tuple:
        return self.C[0]

    @property
    def C1(self) -> tuple:
        return self.C[1:]

    def criterion(self, x) -> tuple:
        return tuple(dot(row, x) for row in self.C)

    def is_feasible(self, x) -> bool:
        if len(x) != self.n:
            return False
        for j, v in enumerate(x):
            if v < self.lower[j] or (self.upper[j] is not None and v > self.upper[j]):
                return False
            if j < self.r and Fraction(v).denominator != 1:
                return False
        for row, s, rhs in zip(self.A, self.senses, self.b):
            v = dot(row, x)
            if (s == LE and v > rhs) or (s == GE and v < rhs) or (s == EQ and v != rhs):
                return False
        return True


def _rats(seq, what):
    try:
        return tuple(rat_parse(v) for v in seq)
    except (ValueError, TypeError) as exc:
        raise InstanceError(f"{what}: {exc}") from None


def instance_from_dict(d: dict) -> Instance:
    for key in ("n", "r", "ell", "C"):
        if key not in d:
            raise InstanceError(f"missing field {key!r}")
    try:
        n, r, ell = int(d["n"]), int(d["r"]), int(d["ell"])
    except (TypeError, ValueError):
        raise InstanceError("n, r, ell must be integers") from None
    if not d["C"]:
        raise InstanceError("empty objective matrix C")
    C = tuple(_rats(row, f"C[{k}]") for k, row in enumerate(d["C"]))
    A = tuple(_rats(row, f"A[{k}]") for k, row in enumerate(d.get("A", [])))
    b = _rats(d.get("b", []), "b")
    raw_senses = d.get("senses", ["="] * len(A))
    try:
        senses = tuple(SENSES[s] for s in raw_senses)
    except KeyError as exc:
        raise InstanceError(f"bad sense {exc.args[0]!r}") from None
    lower = d.get("lower")
    lower = _rats(lower, "lower") if lower is not None else (Fraction(0),) * n
    upper = d.get("upper")
    if upper is None:
        upper = (None,) * n
    else:
        upper = tuple(None if v is None else rat_parse(v) for v in upper)
    return Instance(n, r, ell, C, A, senses, b, lower, upper, str(d.get("name", "")))


def load_instance(source) -> Instance:
    """Parse an instance from JSON text, a dict, or a path."""
    if isinstance(source, dict):
        return instance_from_dict(source)
    if isinstance(source, Path):
        source = source.read_text()
    try:
        d = json.loads(source)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise InstanceError("instance must be a JSON object")
    return instance_from_dict(d)


def load_instance_file(path) -> Instance:
    return load_instance(Path(path))


def instance_to_dict(inst: Instance) -> dict:
    inv = {LE: "<=", EQ: "=", GE: ">="}
    d = {
        "n": inst.n,
        "r": inst.r,
        "ell": inst.ell,
        "C": [[rat_str(v) for v in row] for row in inst.C],
        "A": [[rat_str(v) for v in row] for row in inst.A],
        "senses": [inv[s] for s in inst.senses],
        "b": [rat_str(v) for v in inst.b],
        "lower": [rat_str(v) for v in inst.lower],
        "upper": [None if v is None else rat_str(v) for v in inst.upper],
    }
    if inst.name:
        d["name"] = inst.name
    return d


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1)


# ----------------------------------------------------------------------------
# natural-form MILP and boundedness


def natural_problem(inst: Instance, c=None, sense="max", extra_rows=()) -> MilpProblem:
    rows = tuple(Row(a, s, rhs) for a, s, rhs in zip(inst.A, inst.senses, inst.b)) + tuple(extra_rows)
    return MilpProblem(
        tuple(c) if c is not None else (Fraction(0),) * inst.n,
        rows,
        inst.lower,
        inst.upper,
        tuple(range(inst.r)),
        sense,
    )


@dataclass(frozen=True)
class Boundedness:
    bounded: bool
    direction: tuple = ()


def check_bounded(inst: Instance) -> Boundedness:
    """Bounded iff every coordinate has a finite max and min over the LP
    relaxation.  Raises :class:`EmptyFeasibleRegion` when the relaxation is
    empty.
    """
    rows = [Row(a, s, rhs) for a, s, rhs in zip(inst.A, inst.senses, inst.b)]
    for j in range(inst.n):
        if inst.upper[j] is not None:
            continue
        e = [Fraction(0)] * inst.n
        e[j] = Fraction(1)
        lp = solve_general_lp(e, rows, inst.lower, inst.upper, "max")
        if lp.status == INFEASIBLE:
            raise EmptyFeasibleRegion("empty feasible region")
        if lp.status == UNBOUNDED:
            return Boundedness(False, lp.ray)
    if inst.n == 0 or all(u is not None for u in inst.upper):
        lp = solve_general_lp((Fraction(0),) * inst.n, rows, inst.lower, inst.upper, "max")
        if lp.status == INFEASIBLE:
            raise EmptyFeasibleRegion("empty feasible region")
    return Boundedness(True)


# ----------------------------------------------------------------------------
# canonical form


@dataclass(frozen=True)
class CanonicalInstance:
    """Equality form in shifted, nonnegative variables.

    Columns: ``r`` integer columns, then continuous columns (original
    continuous variables, row slacks, upper-bound slacks).  Integer upper
    bounds are kept as box bounds ``int_upper``.  Rows whose continuous part
    is linearly dependent were folded into integer-only rows
    ``int_rows @ x_I == int_rhs``, so ``A_C`` has full row rank.

    Natural coordinates relate by ``x = lower + x'`` on the original
    columns; ``zeta' = zeta - zeta_shift``; ``c0·x = c0'·x' + obj_shift``.
    """

    r: int
    ncont: int
    c0: tuple
    C1: tuple
    A: tuple
    b: tuple
    int_upper: tuple
    int_rows: tuple
    int_rhs: tuple
    zeta_shift: tuple
    obj_shift: Fraction
    source: Instance

    @property
    def ell(self) -> int:
        return len(self.C1)

    @property
    def ncols(self) -> int:
        return self.r + self.ncont

    @property
    def m(self) -> int:
        return len(self.A)

    def A_I(self):
        return tuple(row[: self.r] for row in self.A)

    def A_C(self):
        return tuple(row[self.r :] for row in self.A)

    def C_I(self):
        return tuple(row[: self.r] for row in self.C1)

    def C_C(self):
        return tuple(row[self.r :] for row in self.C1)

    def c0_I(self):
        return self.c0[: self.r]

    def c0_C(self):
        return self.c0[self.r :]

    def to_natural(self, xc: Sequence) -> tuple:
        inst = self.source
        return tuple(inst.lower[j] + xc[j] for j in range(inst.n))

    def int_to_natural(self, xi: Sequence) -> tuple:
        return tuple(int(self.source.lower[j] + xi[j]) for j in range(self.r))

    def int_to_canonical(self, xi: Sequence) -> tuple:
        return tuple(Fraction(xi[j]) - self.source.lower[j] for j in range(self.r))

    def zeta_to_canonical(self, zeta: Sequence) -> tuple:
        return tuple(Fraction(z) - s for z, s in zip(zeta, self.zeta_shift))

    def zeta_to_natural(self, zeta: Sequence) -> tuple:
        return tuple(Fraction(z) + s for z, s in zip(zeta, self.zeta_shift))

    def to_canonical(self, x: Sequence) -> tuple:
        """Canonical image (with slacks) of a feasible natural point."""
        inst = self.source
        xs = [Fraction(x[j]) - inst.lower[j] for j in range(inst.n)]
        slacks = []
        for row, s, rhs in zip(inst.A, inst.senses, inst.b):
            v = dot(row, x)
            if s == LE:
                slacks.append(rhs - v)
            elif s == GE:
                slacks.append(v - rhs)
        for j in range(inst.r, inst.n):
            if inst.upper[j] is not None:
                slacks.append(inst.upper[j] - x[j])
        return tuple(xs + slacks)

    def milp(self, c=None, sense="max", extra_rows=(), extra_cols=0) -> MilpProblem:
        """The feasible region in canonical columns as a MILP skeleton.

        ``extra_cols`` free continuous columns are appended after the
        canonical ones (used for the gap variable of the subproblem).
        """
        n = self.ncols + extra_cols
        pad = (Fraction(0),) * extra_cols
        rows = [Row(tuple(a) + pad, EQ, bi) for a, bi in zip(self.A, self.b)]
        zc = (Fraction(0),) * self.ncont
        rows += [Row(tuple(g) + zc + pad, EQ, h) for g, h in zip(self.int_rows, self.int_rhs)]
        rows += list(extra_rows)
        lower = (Fraction(0),) * self.ncols + (None,) * extra_cols
        upper = tuple(self.int_upper) + (None,) * self.ncont + (None,) * extra_cols
        return MilpProblem(
            tuple(c) if c is not None else (Fraction(0),) * n,
            tuple(rows),
            lower,
            upper,
            tuple(range(self.r)),
            sense,
        )


def canonicalize(inst: Instance) -> CanonicalInstance:
    """Equality form with nonnegative columns; integer bounds stay as boxes.

    Integer variables without a declared upper bound get the floor of their
    LP-relaxation maximum (which must exist).
    """
    n, r = inst.n, inst.r
    L = inst.lower
    b = [bi - dot(row, L) for row, bi in zip(inst.A, inst.b)]
    int_upper = []
    for j in range(r):
        if inst.upper[j] is not None:
            int_upper.append(Fraction(math.floor(inst.upper[j] - L[j])))
            continue
        e = [Fraction(0)] * n
        e[j] = Fraction(1)
        p = natural_problem(inst)
        lp = solve_general_lp(e, p.rows, p.lower, p.upper, "max")
        if lp.status != OPTIMAL:
            raise UnboundedRegion(f"integer variable {j} is unbounded", lp.ray)
        int_upper.append(Fraction(math.floor(lp.objective - L[j])))
    nslack = sum(1 for s in inst.senses if s != EQ)
    ub_cols = [j for j in range(r, n) if inst.upper[j] is not None]
    width = n + nslack + len(ub_cols)
    rows = []
    k = n
    for row, s in zip(inst.A, inst.senses):
        line = list(row) + [Fraction(0)] * (width - n)
        if s == LE:
            line[k] = Fraction(1)
            k += 1
        elif s == GE:
            line[k] = Fraction(-1)
            k += 1
        rows.append(line)
    for j in ub_cols:
        line = [Fraction(0)] * width
        line[j] = Fraction(1)
        line[k] = Fraction(1)
        k += 1
        rows.append(line)
        b.append(inst.upper[j] - L[j])
    pad = [Fraction(0)] * (width - n)
    c0 = tuple(inst.C[0]) + tuple(pad)
    C1 = tuple(tuple(row) + tuple(pad) for row in inst.C[1:])
    # fold rows dependent in the continuous block into integer-only rows
    AC = [line[r:] for line in rows]
    keep = row_basis(AC)
    int_rows, int_rhs = [], []
    for y in left_nullspace(AC):
        g = tuple(sum((y[i] * rows[i][j] for i in range(len(rows))), Fraction(0)) for j in range(r))
        h = sum((y[i] * b[i] for i in range(len(rows))), Fraction(0))
        if not any(g):
            if h != 0:
                raise EmptyFeasibleRegion("empty feasible region")
            continue
        int_rows.append(g)
        int_rhs.append(h)
    A = tuple(tuple(rows[i]) for i in keep)
    bb = tuple(b[i] for i in keep)
    return CanonicalInstance(
        r=r,
        ncont=width - r,
        c0=c0,
        C1=C1,
        A=A,
        b=bb,
        int_upper=tuple(int_upper),
        int_rows=tuple(int_rows),
        int_rhs=tuple(int_rhs),
        zeta_shift=tuple(dot(row, L) for row in inst.C[1:]),
        obj_shift=dot(inst.C[0], L),
        source=inst,
    )
