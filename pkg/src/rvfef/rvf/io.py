"""Files: descriptions (JSON), frontier cells (CSV), plot data and the
algebraic text form of the gap subproblem.

All exact numbers are written as ``p/q`` strings; plot data is the only
floating output.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..exact import INF, dot, matvec, rat_parse, rat_str
from ..model import instance_from_dict, instance_to_dict
from .core import LogEntry, RvfDescription, RvfModel
from .frontier import FrontierCell

FORMAT = "rvfef-description"


# -- descriptions -------------------------------------------------------------


def _rs(seq):
    return None if seq is None else [rat_str(v) for v in seq]


def _rp(seq):
    return None if seq is None else tuple(rat_parse(v) for v in seq)


def description_to_dict(desc: RvfDescription) -> dict:
    return {
        "format": FORMAT,
        "version": 1,
        "instance": instance_to_dict(desc.inst),
        "U": rat_str(desc.U),
        "parts": [list(p) for p in desc.parts],
        "terminated": desc.terminated,
        "removal_order": [list(p) for p in desc.removal_order],
        "log": [
            {
                "theta": rat_str(e.theta),
                "verified_gap": None if e.verified_gap is None else rat_str(e.verified_gap),
                "attained": e.attained,
                "zeta": _rs(e.zeta),
                "point": _rs(e.point),
                "part": None if e.part is None else list(e.part),
                "efficient": _rs(e.efficient),
            }
            for e in desc.log
        ],
    }


def description_from_dict(d: dict, model: RvfModel | None = None) -> RvfDescription:
    if d.get("format") != FORMAT:
        raise ValueError("not a description file")
    if model is None:
        model = RvfModel(instance_from_dict(d["instance"]))
    log = [
        LogEntry(
            rat_parse(e["theta"]),
            None if e["verified_gap"] is None else rat_parse(e["verified_gap"]),
            bool(e["attained"]),
            _rp(e["zeta"]),
            _rp(e["point"]),
            None if e["part"] is None else tuple(e["part"]),
            _rp(e["efficient"]),
        )
        for e in d["log"]
    ]
    return RvfDescription(
        model,
        rat_parse(d["U"]),
        [tuple(p) for p in d["parts"]],
        log,
        bool(d["terminated"]),
        [tuple(p) for p in d.get("removal_order", [])],
    )


def save_description(desc: RvfDescription, path) -> None:
    Path(path).write_text(json.dumps(description_to_dict(desc), indent=1) + "\n")


def load_description(path) -> RvfDescription:
    return description_from_dict(json.loads(Path(path).read_text()))


# -- frontier -----------------------------------------------------------------


def frontier_csv(cells: list[FrontierCell], ell: int) -> str:
    """One row per cell endpoint (ell = 1) or element vertex (ell = 2).

    ``closed`` is 1 when the listed point belongs to the cell.  ``z`` is the
    cell's affine value there, i.e. the limit for an open endpoint.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    zcols = [f"zeta{j + 1}" for j in range(ell)]
    if ell == 1:
        w.writerow(["cell_id", "class", "part", "end"] + zcols + ["z", "closed"])
    else:
        w.writerow(["cell_id", "class", "part", "element", "vertex"] + zcols + ["z", "closed"])
    for c in cells:
        part = " ".join(str(v) for v in c.part)
        if ell == 1:
            for end, t, closed in (("lo", c.lo, c.lo_closed), ("hi", c.hi, c.hi_closed)):
                w.writerow([c.cell_id, c.klass, part, end, rat_str(t), rat_str(c.value((t,))), int(closed)])
        else:
            for k, poly in enumerate(c.polygons):
                for i, v in enumerate(poly):
                    w.writerow(
                        [c.cell_id, c.klass, part, k, i]
                        + [rat_str(x) for x in v]
                        + [rat_str(c.value(v)), int(v in c.points)]
                    )
    return buf.getvalue()


def read_frontier_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def plot_csv(cells: list[FrontierCell], ell: int, samples: int = 64) -> str:
    """Floating polylines (12 significant digits), one block per cell."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    zcols = [f"zeta{j + 1}" for j in range(ell)]
    w.writerow(["cell_id", "class", "polyline"] + zcols + ["z"])
    g = lambda x: format(float(x), ".12g")  # noqa: E731
    for c in cells:
        if ell == 1:
            if c.lo == c.hi:
                ts = [c.lo]
            else:
                ts = [c.lo + (c.hi - c.lo) * Fraction(i, samples) for i in range(samples + 1)]
            for t in ts:
                w.writerow([c.cell_id, c.klass, 0, g(t), g(c.value((t,)))])
        else:
            for k, poly in enumerate(c.polygons):
                ring = list(poly) + ([poly[0]] if len(poly) > 2 else [])
                for v in ring:
                    w.writerow([c.cell_id, c.klass, k] + [g(x) for x in v] + [g(c.value(v))])
    return buf.getvalue()


# -- subproblem text ------------------------------------------------------------


@dataclass
class AlgebraicProblem:
    """Parsed subproblem text: ``vars`` maps name to ``(lo, hi, integer)``."""

    vars: dict = field(default_factory=dict)
    objective: str = "theta"
    constraints: list = field(default_factory=list)  # (terms, rhs); terms: [(coef, names)]

    def lhs(self, k: int, values: dict) -> Fraction:
        terms, _ = self.constraints[k]
        total = Fraction(0)
        for coef, names in terms:
            t = coef
            for nm in names:
                t *= values[nm]
            total += t
        return total

    def satisfied(self, values: dict) -> bool:
        for name, (lo, hi, integer) in self.vars.items():
            v = values[name]
            if v < lo or v > hi or (integer and Fraction(v).denominator != 1):
                return False
        return all(self.lhs(k, values) <= rhs for k, (_, rhs) in enumerate(self.constraints))


def _bound(x) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return rat_str(x)


def _terms_text(terms) -> str:
    parts = [f"{rat_str(c)}*{'*'.join(names)}" for c, names in terms if c != 0]
    return " + ".join(parts) if parts else "0*theta"


def subproblem_text(desc: RvfDescription, U=None) -> str:
    """Bilinear form of the gap problem over canonical columns.

    For every part ``i``: ``theta + c0·x <= c0_I x_I^i + (C1 x - C_I x_I^i)ᵀu^i
    + betaᵀv^i`` with ``(u^i, v^i)`` in the dual polyhedron; plus the cap
    ``theta + c0·x <= U`` and the rows of the feasible region (equalities as
    two ``<=`` rows).
    """
    model = desc.model
    cn = model.canon
    sp = model.space
    U = desc.U if U is None else U
    n = cn.ncols
    lines = ["# gap subproblem; x are canonical columns, natural x = lower + x[0..n-1]"]
    for k in range(n):
        hi = cn.int_upper[k] if k < cn.r else INF
        lines.append(f"var x[{k}] 0 {_bound(hi)}" + (" int" if k < cn.r else ""))
    lines.append("var theta -inf inf")
    for i in range(len(desc.parts)):
        for j in range(cn.ell):
            lines.append(f"var u[{i}][{j}] -inf 0")
        for j in range(sp.m):
            lines.append(f"var v[{i}][{j}] -inf inf")
    lines.append("maximize theta")
    X = [f"x[{k}]" for k in range(n)]

    def st(terms, rhs):
        lines.append(f"st: {_terms_text(terms)} <= {rat_str(rhs)}")

    for i, part in enumerate(desc.parts):
        xi = cn.int_to_canonical(part)
        beta = tuple(b - a for b, a in zip(cn.b, matvec(cn.A_I(), xi)))
        ci = matvec(cn.C_I(), xi)
        terms = [(Fraction(1), ("theta",))] + [(cn.c0[k], (X[k],)) for k in range(n)]
        for j in range(cn.ell):
            for k in range(n):
                terms.append((-cn.C1[j][k], (f"u[{i}][{j}]", X[k])))
            terms.append((ci[j], (f"u[{i}][{j}]",)))
        terms += [(-beta[j], (f"v[{i}][{j}]",)) for j in range(sp.m)]
        st(terms, dot(cn.c0_I(), xi))
        # dual feasibility: C_Cᵀu + A_Cᵀv <= c0_C
        for col in range(cn.ncont):
            t = [(sp.C_C[j][col], (f"u[{i}][{j}]",)) for j in range(cn.ell)]
            t += [(sp.A_C[j][col], (f"v[{i}][{j}]",)) for j in range(sp.m)]
            st(t, sp.c0_C[col])
    st([(Fraction(1), ("theta",))] + [(cn.c0[k], (X[k],)) for k in range(n)], U - cn.obj_shift)
    p = cn.milp()
    for r in p.rows:
        t = [(a, (X[k],)) for k, a in enumerate(r.coeffs)]
        st(t, r.rhs)
        st([(-a, nm) for a, nm in t], -r.rhs)
    return "\n".join(lines) + "\n"


_VAR = re.compile(r"^var (\S+) (\S+) (\S+)( int)?$")
_TERM = re.compile(r"^(-?\d+(?:/\d+)?)\*(.+)$")


def _pbound(s: str):
    if s == "inf":
        return INF
    if s == "-inf":
        return -INF
    return rat_parse(s)


def parse_subproblem(text: str) -> AlgebraicProblem:
    out = AlgebraicProblem()
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _VAR.match(line)
        if m:
            out.vars[m.group(1)] = (_pbound(m.group(2)), _pbound(m.group(3)), bool(m.group(4)))
            continue
        if line.startswith("maximize "):
            out.objective = line.split()[1]
            continue
        if line.startswith("st: "):
            body, _, rhs = line[4:].rpartition(" <= ")
            terms = []
            for tok in body.split(" + "):
                tm = _TERM.match(tok)
                if not tm:
                    raise ValueError(f"line {ln}: bad term {tok!r}")
                names = tuple(tm.group(2).split("*"))
                if len(names) > 2:
                    raise ValueError(f"line {ln}: more than bilinear")
                terms.append((Fraction(tm.group(1)), names))
            out.constraints.append((terms, rat_parse(rhs)))
            continue
        raise ValueError(f"line {ln}: cannot parse {line!r}")
    return out
