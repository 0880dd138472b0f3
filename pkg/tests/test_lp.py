from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catrelmaj.lp import LpError, LpProblem, lp_feasible


def test_simple_feasible_and_infeasible():
    lp = LpProblem(2)
    lp.add({0: 1, 1: 1}, "==", 1)
    lp.add({0: 1}, ">=", F(1, 3))
    out = lp_feasible(lp)
    assert out.feasible and lp.satisfied_by(out.assignment)
    lp.add({0: 1}, "<=", F(1, 4))
    assert not lp_feasible(lp).feasible


def test_negative_right_hand_side():
    lp = LpProblem(2)
    lp.add({0: -1, 1: -1}, "==", -2)
    lp.add({0: 1, 1: -1}, "<=", 0)
    out = lp_feasible(lp)
    assert out.feasible and sum(out.assignment) == 2


def test_malformed_problems():
    lp = LpProblem(1)
    with pytest.raises(LpError):
        lp.add({3: 1}, "==", 0)
    with pytest.raises(LpError):
        lp.add({0: 1}, "<", 0)


def test_json_is_string_exact():
    lp = LpProblem(1)
    lp.add({0: F(1, 3)}, "==", F(2, 3))
    assert lp.to_json()["constraints"][0] == {"coeffs": {"0": "1/3"}, "sense": "==", "rhs": "2/3"}


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 5), min_size=n, max_size=n),
    st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=1, max_size=4))))
def test_planted_solutions_are_found(data):
    x0, rows = data
    lp = LpProblem(len(x0))
    for row in rows:
        lp.add(dict(enumerate(row)), "==", sum(a * b for a, b in zip(row, x0)))
    out = lp_feasible(lp)
    assert out.feasible and lp.satisfied_by(out.assignment)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=2, max_size=4))
def test_contradictory_bounds_are_infeasible(coeffs):
    lp = LpProblem(len(coeffs))
    lp.add(dict(enumerate(coeffs)), "<=", 1)
    lp.add(dict(enumerate(coeffs)), ">=", 2)
    assert not lp_feasible(lp).feasible
