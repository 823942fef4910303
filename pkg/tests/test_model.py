import json
from fractions import Fraction as F

import pytest
from conftest import fixture_path

from rvfef.exact import dot
from rvfef.model import (
    EmptyFeasibleRegion,
    Instance,
    InstanceError,
    canonicalize,
    check_bounded,
    dump_instance,
    instance_from_dict,
    load_instance,
    load_instance_file,
)


def one_var(**kw):
    d = {"n": 1, "r": 0, "ell": 1, "C": [["1"], ["1"]], "A": [], "senses": [], "b": [], "lower": ["0"], "upper": [None]}
    d.update(kw)
    return d


def test_example1_shape(ex1_inst):
    assert (ex1_inst.n, ex1_inst.r, ex1_inst.m, ex1_inst.ell) == (9, 2, 3, 1)
    assert ex1_inst.c0[:2] == (2, 5)


def test_example3_shape(ex3_inst):
    assert ex3_inst.ell == 2 and ex3_inst.r == 1


def test_empty_objective_rejected():
    with pytest.raises(InstanceError, match="objective"):
        instance_from_dict(one_var(C=[]))


@pytest.mark.parametrize(
    "patch, msg",
    [
        ({"senses": ["<"], "A": [["1"]], "b": ["1"]}, "sense"),
        ({"lower": ["x"]}, "lower"),
        ({"ell": 2}, "ell"),
        ({"lower": ["2"], "upper": ["1"]}, "upper < lower"),
    ],
)
def test_schema_errors(patch, msg):
    with pytest.raises(InstanceError, match=msg):
        instance_from_dict(one_var(**patch))


def test_missing_field():
    d = one_var()
    del d["n"]
    with pytest.raises(InstanceError, match="missing"):
        instance_from_dict(d)


def test_row_count_mismatch():
    d = one_var(A=[["1"]], senses=["<="])
    with pytest.raises(InstanceError):
        instance_from_dict(d)


def test_invalid_json():
    with pytest.raises(InstanceError):
        load_instance("{")


def test_serialization_is_canonical(ex1_inst):
    text = dump_instance(ex1_inst)
    again = dump_instance(load_instance(text))
    assert text == again
    raw = json.loads(fixture_path("example1.json").read_text())
    assert json.loads(text)["C"] == raw["C"]


def test_decimal_input_becomes_fraction():
    inst = instance_from_dict(one_var(C=[["0.5"], ["1"]], upper=["2.25"]))
    assert inst.c0 == (F(1, 2),)
    assert json.loads(dump_instance(inst))["upper"] == ["9/4"]


def test_slack_introduction():
    inst = instance_from_dict(one_var(A=[["1"]], senses=["<="], b=["5"]))
    cn = canonicalize(inst)
    assert cn.ncols == 2
    assert cn.A[0] == (1, 1) and cn.b[0] == 5


def test_lower_bound_shift():
    inst = instance_from_dict(one_var(A=[["1"]], senses=["<="], b=["5"], lower=["2"]))
    cn = canonicalize(inst)
    assert cn.b[0] == 3
    assert cn.zeta_shift == (2,)
    assert cn.obj_shift == 2


def test_example1_canonical(ex1_inst):
    cn = canonicalize(ex1_inst)
    # three equalities: no slacks, binaries keep box bounds
    assert cn.r == 2 and cn.ncont == 7
    assert cn.int_upper == (1, 1)


def test_canonical_roundtrip(ex1_inst, ex3_inst):
    # a feasible point of each instance maps to a feasible canonical point
    # with the same criterion values
    for inst, x in (
        (ex1_inst, (0, 0, F(4, 9), 0, 0, 0, 0, 5, 5)),
        (ex3_inst, (1, 5, 5, 5)),
    ):
        x = tuple(F(v) for v in x)
        assert inst.is_feasible(x)
        cn = canonicalize(inst)
        xc = cn.to_canonical(x)
        assert all(v >= 0 for v in xc)
        assert all(dot(a, xc) == b for a, b in zip(cn.A, cn.b))
        back = cn.to_natural(xc)
        assert inst.criterion(back) == inst.criterion(x)
        assert dot(cn.c0, xc) + cn.obj_shift == inst.criterion(x)[0]
        zc = tuple(dot(r, xc) for r in cn.C1)
        assert cn.zeta_to_natural(zc) == inst.criterion(x)[1:]


def test_bounded_examples(ex1_inst, ex3_inst):
    assert check_bounded(ex1_inst).bounded
    assert check_bounded(ex3_inst).bounded


def test_free_ray():
    res = check_bounded(instance_from_dict(one_var()))
    assert not res.bounded
    assert res.direction == (1,)


def test_raw_example4_unbounded():
    inst = load_instance_file(fixture_path("example4_unbounded.json"))
    res = check_bounded(inst)
    assert not res.bounded
    d = res.direction
    assert all(v >= 0 for v in d) and any(d)
    # a recession direction of the feasible region
    assert all(dot(row, d) == 0 for row in inst.A)


def test_example4_fixture_bounds():
    inst = load_instance_file(fixture_path("example4.json"))
    assert check_bounded(inst).bounded
    assert all(u == 100 for u in inst.upper)


def test_empty_region():
    inst = instance_from_dict(one_var(A=[["1"]], senses=["<="], b=["-1"]))
    with pytest.raises(EmptyFeasibleRegion):
        check_bounded(inst)


def test_instance_is_frozen(ex1_inst):
    assert isinstance(ex1_inst, Instance)
    with pytest.raises(Exception):
        ex1_inst.n = 3
