from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rvfef.exact import (
    INF,
    ParseError,
    matvec,
    normalize_ray,
    primitive_int,
    rank,
    rat_parse,
    rat_str,
    solve_linear_system,
)


@pytest.mark.parametrize(
    "text, value",
    [("5", F(5)), ("-7/3", F(-7, 3)), ("-57.667", F(-57667, 1000)), ("0.1", F(1, 10)), (" 4/6 ", F(2, 3))],
)
def test_parse(text, value):
    assert rat_parse(text) == value


@pytest.mark.parametrize("text", ["", "1/0", "abc", "1e5", "1/-2", "--3"])
def test_parse_rejects(text):
    with pytest.raises(ParseError):
        rat_parse(text)


def test_parse_error_names_token():
    with pytest.raises(ParseError, match="abc"):
        rat_parse("abc")


def test_str_roundtrip():
    for v in (F(0), F(-7, 3), F(12), F(1, 10**30)):
        assert rat_parse(rat_str(v)) == v
    assert rat_str(INF) == "inf"


def test_identity_system():
    s = solve_linear_system([[1, 0], [0, 1]], [3, F(-1, 2)])
    assert s.solution == (3, F(-1, 2))


def test_inconsistent_certificate():
    M, b = [[1, 1], [1, 1]], [1, 2]
    s = solve_linear_system(M, b)
    assert not s.consistent
    y = s.certificate
    # proportional to (1, -1)
    assert y[0] == -y[1] and y[0] != 0
    assert all(sum(y[i] * M[i][j] for i in range(2)) == 0 for j in range(2))
    assert sum(a * c for a, c in zip(y, b)) < 0


def test_two_by_two():
    assert solve_linear_system([[2, 1], [1, 3]], [5, 10]).solution == (1, 3)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        solve_linear_system([[1, 2]], [1, 2])


def test_primitive_and_ray():
    assert primitive_int([F(2, 3), F(-4, 3)]) == (1, -2)
    r = normalize_ray([F(0), F(-3), F(6)])
    assert r[1] == -1 and r[2] == 2


def test_rank():
    assert rank([[1, 2], [2, 4]]) == 1
    assert rank([[1, 2], [0, 1]]) == 2


decimals = st.builds(
    lambda sign, ip, fp: f"{sign}{ip}.{fp}",
    st.sampled_from(["", "-"]),
    st.integers(0, 10**6),
    st.text("0123456789", min_size=1, max_size=8),
)


@given(decimals)
def test_decimal_scaled_is_integer(text):
    k = len(text.split(".")[1])
    assert (rat_parse(text) * 10**k).denominator == 1


@given(st.fractions())
def test_canonical_idempotent(x):
    assert rat_parse(rat_str(rat_parse(rat_str(x)))) == x


small = st.fractions(min_value=-10, max_value=10, max_denominator=6)


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3), st.lists(small, min_size=3, max_size=3))
def test_solution_is_exact(M, x):
    b = matvec(M, x)
    s = solve_linear_system(M, b)
    assert s.consistent
    assert matvec(M, s.solution) == b
