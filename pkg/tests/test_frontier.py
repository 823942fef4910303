from fractions import Fraction as F

import pytest
from conftest import fixture_path

from rvfef.exact import INF
from rvfef.model import instance_from_dict, instance_to_dict, load_instance_file
from rvfef.rvf import RvfDescription, construct
from rvfef.rvf.frontier import (
    NDP,
    NOT_ON_BOUNDARY,
    OUTSIDE_DOMAIN,
    WEAK,
    classify_criterion_point,
    extract_frontier,
)


@pytest.fixture(scope="module")
def cells1(ex1):
    return extract_frontier(ex1)


@pytest.fixture(scope="module")
def cells3(ex3):
    return extract_frontier(ex3)


def test_example1_cells(cells1):
    got = [(c.part, c.klass, c.lo, c.hi, c.lo_closed, c.hi_closed) for c in cells1]
    assert got == [
        ((1, 0), NDP, F(-173, 3), F(-35), True, True),
        ((1, 0), NDP, F(-35), F(-43, 3), False, True),
        ((1, 0), NDP, F(-43, 3), F(-73, 6), False, False),
        ((1, 1), NDP, F(-73, 6), F(-10), True, False),
        ((0, 1), NDP, F(-10), F(-10), True, True),
        ((0, 1), WEAK, F(-10), F(-47, 6), False, True),
        ((1, 0), NDP, F(-47, 6), F(-41, 6), False, True),
        ((1, 0), NDP, F(-41, 6), F(-1394, 219), False, True),
        ((0, 0), NDP, F(-1394, 219), F(-14, 3), False, True),
        ((0, 0), NDP, F(-14, 3), F(40, 9), False, True),
    ]


def test_cells_tile_the_domain(cells1):
    for a, b in zip(cells1, cells1[1:]):
        assert a.hi == b.lo and a.hi_closed != b.lo_closed


def test_only_weak_cell_is_flat_segment(cells1):
    weak = [c for c in cells1 if c.klass == WEAK]
    assert len(weak) == 1
    c = weak[0]
    assert c.piece == ((0,), 5)
    assert not c.contains((F(-10),)) and c.contains((F(-47, 6),))


def test_open_endpoints_excluded(ex1, cells1):
    # the left limits at -73/6 and -10 lie above the graph
    for t in (F(-73, 6), F(-10)):
        left = next(c for c in cells1 if c.hi == t)
        assert not left.hi_closed
        assert left.value((t,)) > ex1.eval_rvf((t,))
    # (-47/6, 5) is on the graph but only weakly efficient
    assert classify_criterion_point(ex1, (F(-47, 6),)) == WEAK
    assert next(c for c in cells1 if c.contains((F(-47, 6),))).klass == WEAK


def test_solid_points(ex1, cells1):
    for t in (F(-12108, 1000), F(-10)):
        owner = next(c for c in cells1 if c.contains((t,)))
        assert owner.klass == NDP
        assert owner.value((t,)) == ex1.eval_rvf((t,))


def test_cells_lie_on_graph(ex1, cells1):
    for c in cells1:
        for k in range(1, 8):
            t = c.lo + (c.hi - c.lo) * F(k, 8)
            if c.contains((t,)):
                assert c.value((t,)) == ex1.eval_rvf((t,)) == ex1.model.oracle_z((t,))
                assert classify_criterion_point(ex1, (t,)) == c.klass
        if c.criterion is not None:
            assert c.criterion[0] == ex1.eval_rvf(c.criterion[1:])


def test_classification(ex1):
    assert classify_criterion_point(ex1, (F(-9),)) == WEAK
    assert classify_criterion_point(ex1, (F(-11),)) == NDP
    assert classify_criterion_point(ex1, (F(-60),)) == OUTSIDE_DOMAIN
    assert classify_criterion_point(ex1, (F(-11),), value=F(8)) == NOT_ON_BOUNDARY


def test_example3_cells(cells3):
    summary = [(c.part, c.klass, c.piece, len(c.polygons)) for c in cells3]
    assert summary == [
        ((0,), WEAK, ((0, 0), 2), 5),
        ((1,), WEAK, ((-1, 0), 5), 22),
        ((1,), NDP, ((-1, 0), 5), 7),
        ((0,), NDP, ((0, 0), 2), 1),
    ]
    edge = cells3[2]
    assert edge.points == {(0, 0), (2, 0), (3, 0), (5, 0)}
    assert cells3[3].polygons == [((2, 2),)]


def test_example3_ndp_membership(ex3, cells3):
    for c in cells3:
        for poly in c.polygons:
            cx = sum(v[0] for v in poly) / len(poly)
            cy = sum(v[1] for v in poly) / len(poly)
            z = (cx, cy)
            assert c.value(z) == ex3.eval_rvf(z)
            if len(poly) == 1 and poly[0] not in c.points:
                continue
            assert classify_criterion_point(ex3, z) == c.klass


def test_unterminated(ex1_model):
    desc = RvfDescription(ex1_model, F(327), [(0, 0)])
    with pytest.raises(ValueError, match="not terminated"):
        extract_frontier(desc)


def test_example4_small_bounds_all_ndp():
    d = instance_to_dict(load_instance_file(fixture_path("example4.json")))
    d["upper"] = ["5"] * 4
    desc = construct(instance_from_dict(d))
    cells = extract_frontier(desc)
    assert cells and all(c.klass == NDP for c in cells)


def test_three_rows_rejected():
    d = {
        "n": 3,
        "r": 0,
        "ell": 3,
        "C": [["1", "1", "1"], ["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        "upper": ["1", "1", "1"],
    }
    desc = construct(instance_from_dict(d))
    assert desc.eval_rvf((F(1), F(1), F(1))) == 0
    assert desc.eval_rvf((F(-1), F(0), F(0))) == INF
    with pytest.raises(ValueError):
        extract_frontier(desc)
