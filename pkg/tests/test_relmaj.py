import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catrelmaj.core import DimensionError, Distribution, apply
from catrelmaj.relmaj import (DistPair, blackwell_criterion, rationalize_distribution,
                              relative_spectrum, relatively_majorizes)

from conftest import exact_dists

D = Distribution.of
HALF = D(["1/2", "1/2"])


def test_self_pair_gives_identity():
    pair = DistPair(D(["1/3", "2/3"]), HALF)
    res = relatively_majorizes(pair, pair)
    assert res.feasible and res.witness.is_doubly_stochastic()
    assert blackwell_criterion(pair, pair)


def test_worked_feasible_pair():
    src, tgt = DistPair(D(["1", "0"]), HALF), DistPair(D(["3/4", "1/4"]), HALF)
    res = relatively_majorizes(src, tgt)
    assert res.feasible and blackwell_criterion(src, tgt)
    assert apply(res.witness, src.p) == tgt.p and apply(res.witness, src.q) == tgt.q


def test_worked_infeasible_pair():
    src, tgt = DistPair(D(["3/4", "1/4"]), HALF), DistPair(D(["1", "0"]), HALF)
    assert not relatively_majorizes(src, tgt).feasible
    assert not blackwell_criterion(src, tgt)


def test_relative_spectrum():
    assert relative_spectrum(DistPair(D(["1", "0"]), HALF)) == (0, 2)
    assert relative_spectrum(DistPair(HALF, D(["1", "0"]))) == (F(1, 2), math.inf)


def test_rationalization_keeps_unit_mass():
    r = rationalize_distribution(D([0.1, 0.2, 0.7]))
    assert r.exact and sum(r) == 1 and r.weights == (F(1, 10), F(1, 5), F(7, 10))


def test_pair_dimension_check():
    with pytest.raises(DimensionError):
        DistPair(D(["1"]), HALF)


def test_float_pairs_are_rationalized():
    src, tgt = DistPair(D([1.0, 0.0]), D([0.5, 0.5])), DistPair(D([0.75, 0.25]), D([0.5, 0.5]))
    assert relatively_majorizes(src, tgt).feasible


@st.composite
def instances(draw):
    k = draw(st.integers(2, 4))
    k2 = draw(st.integers(2, 4))
    return (DistPair(draw(exact_dists(size=k)), draw(exact_dists(size=k, full_rank=True))),
            DistPair(draw(exact_dists(size=k2)), draw(exact_dists(size=k2, full_rank=True))))


@settings(max_examples=80, deadline=None)
@given(instances())
def test_lp_agrees_with_testing_region(inst):
    src, tgt = inst
    res = relatively_majorizes(src, tgt)
    assert res.feasible == blackwell_criterion(src, tgt)
    if res.feasible:
        assert apply(res.witness, src.p) == tgt.p
        assert apply(res.witness, src.q) == tgt.q


@settings(max_examples=40, deadline=None)
@given(instances())
def test_pairs_dominate_their_coarsenings(inst):
    src, _ = inst
    merged = DistPair(D([src.p[0] + src.p[1], *src.p.weights[2:]]),
                      D([src.q[0] + src.q[1], *src.q.weights[2:]]))
    assert relatively_majorizes(src, merged).feasible
    assert blackwell_criterion(src, merged)
