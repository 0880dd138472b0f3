from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from catrelmaj.core import Distribution, StochasticChannel


def _normalize(counts):
    total = sum(counts)
    return Distribution(tuple(Fraction(c, total) for c in counts))


@st.composite
def exact_dists(draw, min_size=2, max_size=5, size=None, full_rank=False):
    k = size if size is not None else draw(st.integers(min_size, max_size))
    low = 1 if full_rank else 0
    counts = draw(st.lists(st.integers(low, 12), min_size=k, max_size=k)
                  .filter(lambda c: sum(c) > 0))
    return _normalize(counts)


def weights(low=0.0):
    # subnormal weights only exercise float underflow, not the mathematics
    return st.floats(low, 1.0).map(lambda v: 0.0 if v < 1e-6 else v)


@st.composite
def float_dists(draw, min_size=2, max_size=6, size=None, full_rank=False):
    k = size if size is not None else draw(st.integers(min_size, max_size))
    low = 0.05 if full_rank else 0.0
    vals = draw(st.lists(weights(low), min_size=k, max_size=k)
                .filter(lambda v: sum(v) > 0.1))
    total = sum(vals)
    return Distribution(tuple(v / total for v in vals))


@st.composite
def exact_pairs(draw, min_size=2, max_size=4, full_rank_q=True):
    k = draw(st.integers(min_size, max_size))
    return draw(exact_dists(size=k)), draw(exact_dists(size=k, full_rank=full_rank_q))


@st.composite
def exact_channels(draw, n_in, n_out):
    cols = [draw(exact_dists(size=n_out)) for _ in range(n_in)]
    return StochasticChannel.from_columns([list(c) for c in cols])


def random_exact(rng, k, full_rank=False, top=12):
    counts = rng.integers(1 if full_rank else 0, top + 1, size=k)
    if counts.sum() == 0:
        counts[0] = 1
    return _normalize([int(c) for c in counts])


def random_float(rng, k, full_rank=False):
    w = rng.dirichlet(np.ones(k))
    if not full_rank:
        w[rng.random(k) < 0.2] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
    w = w / w.sum()
    return Distribution(tuple(float(x) for x in w))


def random_channel(rng, n_in, n_out):
    cols = rng.dirichlet(np.ones(n_out), size=n_in)
    return StochasticChannel.from_columns([[float(x) for x in c / c.sum()] for c in cols])


@pytest.fixture
def rng():
    return np.random.default_rng(0)
