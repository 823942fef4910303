import random
from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from rvfef.exact import dot, matvec, vecmat
from rvfef.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, check_certificate, farkas_ray, solve_lp


def test_origin_optimum():
    p = LpProblem.make([], [], [1])
    sol = solve_lp(p)
    assert sol.status == OPTIMAL and sol.objective == 0
    assert check_certificate(p, sol)


def test_contradictory_bounds():
    # x + s = -1 with x, s >= 0 encodes x <= -1
    p = LpProblem.make([[1, 1]], [-1], [0, 0])
    sol = solve_lp(p)
    assert sol.status == INFEASIBLE
    assert check_certificate(p, sol)


def test_negative_rhs_farkas():
    p = LpProblem.make([[1, 1]], [-1], [0, 0])
    y = farkas_ray(p)
    assert dot(y, p.b) < 0
    assert all(v >= 0 for v in vecmat(y, p.A))


def test_unbounded_ray():
    p = LpProblem.make([[1, -1]], [0], [1, 0], "max")
    sol = solve_lp(p)
    assert sol.status == UNBOUNDED
    assert check_certificate(p, sol)


def test_beale_cycling_example():
    # the classic instance on which the textbook rule cycles
    A = [
        [1, 0, 0, F(1, 4), -8, -1, 9],
        [0, 1, 0, F(1, 2), -12, F(-1, 2), 3],
        [0, 0, 1, 0, 0, 1, 0],
    ]
    p = LpProblem.make(A, [0, 0, 1], [0, 0, 0, F(-3, 4), 20, F(-1, 2), 6])
    sol = solve_lp(p)
    assert sol.status == OPTIMAL
    assert sol.objective == F(-5, 4)
    assert check_certificate(p, sol)


def test_deterministic_basis():
    A = [[1, 1, 1, 0], [1, -1, 0, 1]]
    p = LpProblem.make(A, [4, 2], [-1, -2, 0, 0])
    assert solve_lp(p).basis == solve_lp(p).basis


def test_dual_lp_of_zero_part(ex1_model):
    # max over the dual polyhedron of the (0,0) restriction at zeta = -20;
    # the affine pieces give -50/31 * (-20) - 244/31 = 756/31 ~ 24.39
    bf = ex1_model.bounding((0, 0))
    v, x = bf.handle.primal((F(-20),))
    assert v == F(756, 31)
    assert abs(float(v) - 24.32) < 0.1


def test_outside_domain_is_infeasible(ex1_model):
    v, x = ex1_model.bounding((0, 0)).handle.primal((F(-60),))
    assert x is None



@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.randoms(use_true_random=False))
def test_certificates_random(m, extra, rnd):
    n = m + extra
    A = [[F(rnd.randint(-4, 4), rnd.randint(1, 3)) for _ in range(n)] for _ in range(m)]
    b = [F(rnd.randint(-6, 6)) for _ in range(m)]
    c = [F(rnd.randint(-3, 3)) for _ in range(n)]
    p = LpProblem.make(A, b, c, rnd.choice(["min", "max"]))
    sol = solve_lp(p)
    assert check_certificate(p, sol)
    if sol.status == OPTIMAL:
        assert dot(p.c, sol.primal) == dot(sol.dual, p.b)


def test_random_infeasible_3x3():
    rnd = random.Random(3)
    found = 0
    for _ in range(200):
        A = [[F(rnd.randint(-3, 3)) for _ in range(3)] for _ in range(3)]
        b = [F(rnd.randint(-3, 3)) for _ in range(3)]
        p = LpProblem.make(A, b, [0, 0, 0])
        sol = solve_lp(p)
        if sol.status == INFEASIBLE:
            found += 1
            y = sol.farkas
            assert all(v >= 0 for v in vecmat(y, A)) and dot(y, b) < 0
        else:
            assert matvec(A, sol.primal) == tuple(b)
    assert found > 10
