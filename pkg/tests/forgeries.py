"""Certificates that claim impossible conversions, built several ways."""

from fractions import Fraction

from catrelmaj.catalysis import ConversionCertificate, uniform_on_support
from catrelmaj.core import Distribution, JointDistribution, StochasticChannel, apply

from conftest import random_exact

STRATEGIES = ("random_channel", "onto_target", "onto_reference", "claimed_product",
              "shifted_entry", "identity")


def _random_channel(rng, n):
    cols = [list(random_exact(rng, n)) for _ in range(n)]
    return StochasticChannel.from_columns(cols)


def _constant(out: Distribution, n: int) -> StochasticChannel:
    return StochasticChannel.from_columns([list(out)] * n)


def forge(rng, instance, strategy: str) -> ConversionCertificate:
    p, q, pp, qp = instance.exact_parts()
    k = instance.k
    m = int(rng.integers(1, 4))
    r = random_exact(rng, m, full_rank=True)
    eta = uniform_on_support(r)
    n = k * m
    if strategy == "random_channel":
        lam = _random_channel(rng, n)
    elif strategy == "onto_target":
        lam = _constant(pp.tensor(r), n)
    elif strategy == "onto_reference":
        lam = _constant(qp.tensor(eta), n)
    elif strategy == "shifted_entry":
        base = _constant(pp.tensor(r), n)
        rows = [list(row) for row in base.entries]
        j, i = int(rng.integers(n)), int(rng.integers(n))
        rows[j][i] += Fraction(1, 1000)
        lam = StochasticChannel(tuple(tuple(row) for row in rows), validate=False)
    else:
        lam = StochasticChannel.identity(n)
    if strategy == "claimed_product":
        lam = _random_channel(rng, n)
        joint = JointDistribution.product(pp, r)
    else:
        joint = JointDistribution.from_flat(apply(lam, p.tensor(r)), k, m, validate=False)
    return ConversionCertificate(instance, r, eta, joint, lam, pp, 0.0, Fraction(0), {})
