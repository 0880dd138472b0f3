import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catrelmaj.channels import (EmbeddingSpec, RankError, StructureError, embed,
                                embedding_channel, lift_to_embedding, rational_approximation,
                                reversal, split_channel, unembed, unembedding_channel)
from catrelmaj.core import (DimensionError, Distribution, StochasticChannel, apply, compose,
                            direct_sum, trace_distance)
from catrelmaj.divergence import STANDARD_ALPHAS, renyi_divergence

from conftest import exact_dists, float_dists

D = Distribution.of


def test_embed_examples():
    spec = EmbeddingSpec((1, 3))
    assert embed(spec, D(["1/2", "1/2"])).weights == (F(1, 2), F(1, 6), F(1, 6), F(1, 6))
    assert embed(spec, spec.gamma) == Distribution.uniform(4)
    ones = EmbeddingSpec((1, 1, 1))
    p = D(["1/2", "1/3", "1/6"])
    assert embed(ones, p) == p


def test_unembed_examples():
    spec = EmbeddingSpec((2, 2))
    assert unembed(spec, D([0.1, 0.2, 0.3, 0.4])).weights == pytest.approx((0.3, 0.7))
    assert unembed(spec, Distribution.uniform(4)) == spec.gamma
    with pytest.raises(DimensionError):
        unembed(spec, Distribution.uniform(3))


def test_embedding_spec_json_and_validation():
    spec = EmbeddingSpec((2, 5))
    assert spec.to_json() == {"d": [2, 5], "N": 7}
    assert EmbeddingSpec.from_json(spec.to_json()) == spec
    with pytest.raises(ValueError):
        EmbeddingSpec((0, 2))
    with pytest.raises(ValueError):
        EmbeddingSpec.from_json({"d": [1, 2], "N": 4})
    assert EmbeddingSpec.for_rational(D(["1/4", "3/4"])).d == (1, 3)


def test_left_inverse_channels():
    spec = EmbeddingSpec((3, 1, 2))
    roundtrip = compose(unembedding_channel(spec), embedding_channel(spec))
    assert roundtrip == StochasticChannel.identity(3)


def test_irrational_example():
    s = math.sqrt(2) / 2
    approx = rational_approximation(D([s, 1 - s]), 0.01)
    assert approx.N == 200 and approx.spec.d == (142, 58)
    assert approx.q_tilde.weights == (F(71, 100), F(29, 100))
    dist = trace_distance(approx.q, approx.q_tilde)
    assert float(dist) == pytest.approx(0.00289, abs=1e-5) and dist <= F(1, 100)
    assert apply(approx.E, approx.q) == approx.q_tilde
    assert apply(approx.R, approx.q_tilde) == approx.q


def test_rational_input_is_identity():
    q = D(["1/3", "2/3"])
    approx = rational_approximation(q, 0.1)
    assert approx.is_identity and approx.E == StochasticChannel.identity(2)
    scaled = rational_approximation(q, 0.1, min_n=10)
    assert scaled.N == 12 and scaled.spec.d == (4, 8)


def test_unsorted_input_keeps_letter_order():
    q = D([0.2, 0.5, 0.3])
    approx = rational_approximation(q, 0.05, force=True)
    assert apply(approx.E, approx.q) == approx.q_tilde
    assert all(abs(float(a) - b) < 0.05 for a, b in zip(approx.q_tilde, q))


def test_approximation_errors():
    with pytest.raises(RankError):
        rational_approximation(D([1.0, 0.0]), 0.1)
    with pytest.raises(ValueError):
        rational_approximation(D([0.5, 0.5]), 1.5)


def test_reversal_example():
    E = StochasticChannel(((F(1), F(1, 2)), (F(0), F(1, 2))))
    R = reversal(E, D(["1/2", "1/2"]))
    assert R == StochasticChannel(((F(2, 3), F(0)), (F(1, 3), F(1))))
    assert apply(R, D(["3/4", "1/4"])) == D(["1/2", "1/2"])
    assert reversal(StochasticChannel.identity(2), D(["1/3", "2/3"])) == StochasticChannel.identity(2)


def test_reversal_fills_zero_mass_outputs_uniformly():
    E = StochasticChannel(((F(1), F(0)), (F(0), F(1)), (F(0), F(0))))
    R = reversal(E, D(["1/2", "1/2"]))
    assert R.column(2) == (F(1, 2), F(1, 2))


def test_split_examples():
    block = direct_sum(StochasticChannel.permutation([1, 0]), StochasticChannel.identity(1))
    u = D(["1/3", "2/3", "0"])
    first, second = split_channel(block, u, apply(block, u), Distribution.uniform(3))
    assert first == StochasticChannel.permutation([1, 0])
    assert second == StochasticChannel.identity(1)


def test_split_reports_offending_entry():
    mixing = StochasticChannel(((F(1, 2), F(0), F(1, 2)), (F(0), F(1), F(0)),
                                (F(1, 2), F(0), F(1, 2))))
    u = D(["1", "0", "0"])
    with pytest.raises(StructureError, match="does not map u"):
        split_channel(mixing, u, u, Distribution.uniform(3))
    leaky = StochasticChannel(((F(1), F(1)), (F(0), F(0))))
    with pytest.raises(StructureError, match="does not preserve w"):
        split_channel(leaky, D(["1", "0"]), D(["1", "0"]), Distribution.uniform(2))


@st.composite
def birkhoff(draw, n):
    """Doubly stochastic matrix as a rational mixture of permutations."""
    perms = draw(st.lists(st.permutations(range(n)), min_size=1, max_size=3))
    weights = draw(st.lists(st.integers(1, 5), min_size=len(perms), max_size=len(perms)))
    total = sum(weights)
    rows = [[F(0)] * n for _ in range(n)]
    for perm, w in zip(perms, weights):
        for i, j in enumerate(perm):
            rows[j][i] += F(w, total)
    return StochasticChannel(tuple(tuple(r) for r in rows))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3).flatmap(lambda ell: st.tuples(
    birkhoff(ell), birkhoff(2), exact_dists(size=ell, full_rank=True))))
def test_split_round_trip(data):
    first, second, u = data
    ell = first.in_size
    whole = direct_sum(first, second)
    u_full = Distribution(tuple(u) + (F(0), F(0)))
    got = split_channel(whole, u_full, apply(whole, u_full), Distribution.uniform(ell + 2))
    assert got == (first, second)
    assert direct_sum(*got) == whole


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 4).flatmap(lambda k: st.tuples(
    exact_dists(size=k), st.lists(st.integers(1, 4), min_size=k, max_size=k))),
       st.sampled_from(STANDARD_ALPHAS))
def test_embedding_preserves_divergence(data, alpha):
    p, d = data
    spec = EmbeddingSpec(tuple(d))
    lhs = renyi_divergence(alpha, p, spec.gamma)
    rhs = renyi_divergence(alpha, embed(spec, p), Distribution.uniform(spec.N))
    assert lhs == rhs or abs(lhs - rhs) <= 1e-9
    assert unembed(spec, embed(spec, p)) == p


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5).flatmap(lambda k: st.tuples(float_dists(size=k, full_rank=True),
                                                     float_dists(size=k))),
       st.sampled_from([0.1, 0.05, 0.01]))
def test_lemma_bounds(data, eps):
    q, p = data
    approx = rational_approximation(q, eps)
    k = len(q)
    assert trace_distance(approx.q, approx.q_tilde) <= F(repr(eps))
    assert apply(approx.E, approx.q) == approx.q_tilde
    assert apply(approx.R, approx.q_tilde) == approx.q
    pe = p.to_exact()
    bound = math.sqrt(eps / k)
    assert float(trace_distance(pe, apply(approx.E, pe))) <= bound
    assert float(trace_distance(pe, apply(approx.R, pe))) <= 2 * bound
    assert approx.q_tilde.is_full_rank()


def test_lift_is_doubly_stochastic():
    q = D(["1/4", "3/4"])
    spec = EmbeddingSpec.for_rational(q)
    psi = StochasticChannel.identity(4)
    lifted = lift_to_embedding(psi, spec, spec, 2)
    assert lifted.in_size == 8 and lifted.is_doubly_stochastic()
