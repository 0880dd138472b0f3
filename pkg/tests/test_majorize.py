import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catrelmaj.core import DimensionError, Distribution, apply
from catrelmaj.majorize import (NotMajorizedError, catalytic_majorization_necessary,
                                construct_doubly_stochastic, majorizes, majorizes_t_criterion)
from catrelmaj.relmaj import majorizes_lp

from conftest import exact_dists

D = Distribution.of


def test_partial_sum_examples():
    assert majorizes(D(["1", "0"]), D(["1/2", "1/2"]))
    assert not majorizes(D(["1/2", "1/2"]), D(["1", "0"]))
    assert majorizes(D(["1/2", "3/10", "1/5"]), D(["2/5", "7/20", "1/4"]))
    assert majorizes(D(["1/5", "1/2", "3/10"]), D(["1/2", "3/10", "1/5"]))


def test_t_criterion_examples():
    assert majorizes_t_criterion(D(["1", "0", "0"]), D(["1/3", "1/3", "1/3"]))
    assert not majorizes_t_criterion(D(["1/3", "1/3", "1/3"]), D(["1", "0", "0"]))


def test_witness_for_worked_pair():
    x, y = D(["1/2", "3/10", "1/5"]), D(["2/5", "7/20", "1/4"])
    w = construct_doubly_stochastic(x, y)
    assert w.t_transform_count <= 2
    assert w.matrix.is_doubly_stochastic()
    assert apply(w.matrix, x) == y


def test_witness_refuses_non_majorized():
    with pytest.raises(NotMajorizedError):
        construct_doubly_stochastic(D(["1/2", "1/2"]), D(["1", "0"]))
    with pytest.raises(DimensionError):
        majorizes(D(["1"]), D(["1/2", "1/2"]))


def test_float_backend_witness():
    x, y = D([0.7, 0.2, 0.1]), D([0.5, 0.3, 0.2])
    w = construct_doubly_stochastic(x, y)
    assert w.verify(x, y)


def test_catalytic_necessary_condition():
    p, pp = D(["1/2", "1/4", "1/4", "0"]), D(["2/5", "2/5", "1/10", "1/10"])
    assert not majorizes(p, pp)
    assert catalytic_majorization_necessary(p, pp)
    assert not catalytic_majorization_necessary(pp, p)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 5).flatmap(lambda k: st.tuples(exact_dists(size=k), exact_dists(size=k))))
def test_four_way_agreement(pair):
    x, y = pair
    verdict = majorizes(x, y)
    assert majorizes_t_criterion(x, y) == verdict
    assert majorizes_lp(x, y).feasible == verdict
    if verdict:
        w = construct_doubly_stochastic(x, y)
        assert apply(w.matrix, x) == y
        assert w.matrix.is_doubly_stochastic()
        assert w.t_transform_count <= len(x) - 1


@settings(max_examples=40, deadline=None)
@given(exact_dists(max_size=6))
def test_everything_majorizes_uniform(x):
    assert majorizes(x, Distribution.uniform(len(x)))
    assert majorizes(Distribution.point(len(x)), x)
