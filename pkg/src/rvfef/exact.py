"""Exact rational scalars, vectors and linear algebra.

Rationals are :class:`fractions.Fraction`.  Vectors and matrices are tuples
(or lists) of Fractions; dimension metadata is the Python length.  The only
infinite value ever built is ``INF`` (``math.inf``), which compares exactly
against Fractions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction
INF = math.inf

_INT_RE = re.compile(r"[+-]?\d+")
_FRAC_RE = re.compile(r"([+-]?\d+)/(\d+)")
_DEC_RE = re.compile(r"([+-]?)(\d*)\.(\d*)")


class ParseError(ValueError):
    """Raised when a rational literal cannot be parsed."""


def rat_parse(text) -> Fraction:
    """Parse an integer, ``p/q`` or finite decimal literal exactly.

    Ints and Fractions are passed through so fixtures may mix literals.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"not a rational literal: {text!r}")
    tok = text.strip()
    if _INT_RE.fullmatch(tok):
        return Fraction(int(tok))
    m = _FRAC_RE.fullmatch(tok)
    if m:
        q = int(m.group(2))
        if q == 0:
            raise ParseError(f"zero denominator in {text!r}")
        return Fraction(int(m.group(1)), q)
    m = _DEC_RE.fullmatch(tok)
    if m and (m.group(2) or m.group(3)):
        sign, ip, fp = m.groups()
        val = Fraction(int(ip or "0") * 10 ** len(fp) + int(fp or "0"), 10 ** len(fp))
        return -val if sign == "-" else val
    raise ParseError(f"malformed rational literal {text!r}")


def rat_str(x) -> str:
    """Canonical ``p/q`` text (``p`` alone for integers, ``inf`` for +inf)."""
    if x == INF:
        return "inf"
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def is_inf(x) -> bool:
    return x == INF


def vec(values: Iterable) -> tuple:
    return tuple(rat_parse(v) for v in values)


def mat(rows: Iterable[Iterable]) -> tuple:
    return tuple(vec(r) for r in rows)


def dot(a: Sequence, b: Sequence) -> Fraction:
    s = Fraction(0)
    for x, y in zip(a, b):
        if x and y:
            s += x * y
    return s


def matvec(M: Sequence[Sequence], x: Sequence) -> tuple:
    return tuple(dot(row, x) for row in M)


def vecmat(y: Sequence, M: Sequence[Sequence]) -> tuple:
    """Row vector times matrix, ``yᵀM``."""
    if not M:
        return ()
    out = [Fraction(0)] * len(M[0])
    for yi, row in zip(y, M):
        if yi:
            for j, a in enumerate(row):
                if a:
                    out[j] += yi * a
    return tuple(out)


def transpose(M: Sequence[Sequence], ncols: int | None = None) -> tuple:
    if not M:
        return tuple(() for _ in range(ncols or 0))
    return tuple(zip(*M))


def vsub(a, b) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def vadd(a, b) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def vscale(t, a) -> tuple:
    return tuple(t * x for x in a)


def lex_key(v: Sequence) -> tuple:
    return tuple(v)


def primitive_int(v: Sequence) -> tuple:
    """Scale a rational vector to the primitive integer vector on its ray."""
    den = 1
    for x in v:
        den = den * x.denominator // math.gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for a in ints:
        g = math.gcd(g, a)
    if g == 0:
        return tuple(ints)
    return tuple(a // g for a in ints)


def normalize_ray(v: Sequence) -> tuple:
    """Scale so the first nonzero coordinate has absolute value 1."""
    for x in v:
        if x:
            s = abs(Fraction(x))
            return tuple(Fraction(y) / s for y in v)
    return tuple(Fraction(y) for y in v)


@dataclass(frozen=True)
class LinearSolve:
    """Result of :func:`solve_linear_system`.

    ``solution`` is set when the system is consistent (one particular
    solution, free variables at zero).  Otherwise ``certificate`` holds row
    multipliers ``y`` with ``yᵀM = 0`` and ``yᵀrhs < 0``.
    """

    rank: int
    solution: tuple | None = None
    certificate: tuple | None = None

    @property
    def consistent(self) -> bool:
        return self.solution is not None


def solve_linear_system(M: Sequence[Sequence], rhs: Sequence) -> LinearSolve:
    """Solve ``M x = rhs`` exactly by fraction-free (Bareiss) elimination.

    Pivots are chosen by largest absolute integer value in the column.
    The augmented system carries an identity block so that an inconsistent
    row yields its multipliers directly.
    """
    r = len(M)
    if len(rhs) != r:
        raise ValueError(f"dimension mismatch: {r} rows, rhs of length {len(rhs)}")
    c = len(M[0]) if r else 0
    if any(len(row) != c for row in M):
        raise ValueError("ragged matrix")
    # clear denominators row by row; remember the scale for the certificate
    rows = []
    scale = []
    for i in range(r):
        vals = [Fraction(x) for x in M[i]] + [Fraction(rhs[i])]
        den = 1
        for x in vals:
            den = den * x.denominator // math.gcd(den, x.denominator)
        scale.append(den)
        rows.append([int(x * den) for x in vals] + [1 if k == i else 0 for k in range(r)])
    width = c + 1 + r
    prev = 1
    piv_cols = []
    row = 0
    for col in range(c):
        best = None
        for i in range(row, r):
            if rows[i][col] and (best is None or abs(rows[i][col]) > abs(rows[best][col])):
                best = i
        if best is None:
            continue
        rows[row], rows[best] = rows[best], rows[row]
        p = rows[row][col]
        for i in range(r):
            if i == row:
                continue
            a = rows[i][col]
            Ri = rows[i]
            Rp = rows[row]
            if i > row:
                # Bareiss step keeps entries integral
                rows[i] = [(p * Ri[k] - a * Rp[k]) // prev for k in range(width)]
            else:
                rows[i] = [p * Ri[k] - a * Rp[k] for k in range(width)]
        # rows above were scaled by p; renormalise them by their gcd
        for i in range(row):
            g = 0
            for v in rows[i]:
                g = math.gcd(g, v)
            if g > 1:
                rows[i] = [v // g for v in rows[i]]
        prev = p
        piv_cols.append(col)
        row += 1
        if row == r:
            break
    rank = row
    for i in range(rank, r):
        if rows[i][c] != 0:
            y = [Fraction(rows[i][c + 1 + k] * scale[k]) for k in range(r)]
            g = 0
            for v in y:
                g = math.gcd(g, int(v))
            if g > 1:
                y = [v / g for v in y]
            if dot(y, rhs) > 0:
                y = [-v for v in y]
            return LinearSolve(rank=rank, certificate=tuple(y))
    x = [Fraction(0)] * c
    for i, col in enumerate(piv_cols):
        x[col] = Fraction(rows[i][c], rows[i][col])
    return LinearSolve(rank=rank, solution=tuple(x))


def rank(M: Sequence[Sequence]) -> int:
    if not M:
        return 0
    return solve_linear_system(M, [0] * len(M)).rank


def row_basis(M: Sequence[Sequence]) -> list[int]:
    """Indices of a maximal linearly independent subset of rows (greedy, in order)."""
    basis: list[list[Fraction]] = []
    pivots: list[int] = []
    keep = []
    for idx, row in enumerate(M):
        v = [Fraction(x) for x in row]
        for b, p in zip(basis, pivots):
            if v[p]:
                f = v[p] / b[p]
                v = [a - f * bb for a, bb in zip(v, b)]
        nz = next((j for j, a in enumerate(v) if a), None)
        if nz is not None:
            basis.append(v)
            pivots.append(nz)
            keep.append(idx)
    return keep


def left_nullspace(M: Sequence[Sequence]) -> list[tuple]:
    """Basis of ``{y : yᵀM = 0}`` as primitive integer-valued Fraction vectors."""
    r = len(M)
    if r == 0:
        return []
    c = len(M[0])
    T = [[Fraction(x) for x in M[i]] + [Fraction(int(i == k)) for k in range(r)] for i in range(r)]
    row = 0
    for col in range(c):
        p = next((i for i in range(row, r) if T[i][col]), None)
        if p is None:
            continue
        T[row], T[p] = T[p], T[row]
        for i in range(r):
            if i != row and T[i][col]:
                f = T[i][col] / T[row][col]
                T[i] = [a - f * b for a, b in zip(T[i], T[row])]
        row += 1
    out = []
    for i in range(row, r):
        y = primitive_int(T[i][c:])
        out.append(tuple(Fraction(a) for a in y))
    return out
