"""Named channel constructions: embeddings, rational approximation, reversal, splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import (Distribution, DimensionError, StochasticChannel, apply, compose,
                   same, tensor)
from .majorize import descending_order


class RankError(ValueError):
    """A distribution that must have full support does not."""


class StructureError(ValueError):
    """A channel lacks the block structure its hypotheses promise."""


@dataclass(frozen=True)
class EmbeddingSpec:
    d: tuple

    def __post_init__(self) -> None:
        d = tuple(int(x) for x in self.d)
        if not d or any(x < 1 for x in d):
            raise ValueError("embedding multiplicities must be positive integers")
        object.__setattr__(self, "d", d)

    @classmethod
    def for_rational(cls, q: Distribution, total: int | None = None) -> "EmbeddingSpec":
        """Multiplicities ``d_i = q_i * N`` for the smallest (or a given) common denominator."""
        if not q.exact:
            raise ValueError("embedding multiplicities need exact weights")
        lcm = math.lcm(*(w.denominator for w in q))
        n = lcm if total is None else total
        if n % lcm:
            raise ValueError(f"{n} is not a multiple of the common denominator {lcm}")
        d = tuple(w * n for w in q)
        if any(x.denominator != 1 or x < 1 for x in d):
            raise RankError("rational embedding needs a full-rank distribution")
        return cls(tuple(int(x) for x in d))

    @property
    def N(self) -> int:
        return sum(self.d)

    @property
    def k(self) -> int:
        return len(self.d)

    @property
    def gamma(self) -> Distribution:
        n = self.N
        return Distribution(tuple(Fraction(x, n) for x in self.d))

    def blocks(self) -> list[range]:
        out, start = [], 0
        for x in self.d:
            out.append(range(start, start + x))
            start += x
        return out

    def to_json(self) -> dict:
        return {"d": list(self.d), "N": self.N}

    @classmethod
    def from_json(cls, obj: dict) -> "EmbeddingSpec":
        spec = cls(tuple(obj["d"]))
        if "N" in obj and int(obj["N"]) != spec.N:
            raise ValueError("embedding spec N does not equal the sum of d")
        return spec


def embedding_channel(spec: EmbeddingSpec) -> StochasticChannel:
    """``N x k`` channel splitting letter ``i`` uniformly over ``d_i`` sub-letters."""
    zero = Fraction(0)
    rows = []
    for i, block in enumerate(spec.blocks()):
        share = Fraction(1, spec.d[i])
        for _ in block:
            row = [zero] * spec.k
            row[i] = share
            rows.append(tuple(row))
    return StochasticChannel(tuple(rows))


def unembedding_channel(spec: EmbeddingSpec) -> StochasticChannel:
    """``k x N`` left inverse summing each block."""
    one, zero = Fraction(1), Fraction(0)
    rows = []
    for block in spec.blocks():
        rows.append(tuple(one if c in block else zero for c in range(spec.N)))
    return StochasticChannel(tuple(rows))


def embed(spec: EmbeddingSpec, p: Distribution) -> Distribution:
    if len(p) != spec.k:
        raise DimensionError(f"embedding expects {spec.k} letters, got {len(p)}")
    out = []
    for w, di in zip(p, spec.d):
        share = w / di
        out.extend([share] * di)
    return Distribution(tuple(out))


def unembed(spec: EmbeddingSpec, x: Distribution) -> Distribution:
    if len(x) != spec.N:
        raise DimensionError(f"left inverse expects {spec.N} letters, got {len(x)}")
    return Distribution(tuple(sum(x[c] for c in block) for block in spec.blocks()))


@dataclass(frozen=True)
class RationalApproximation:
    q: Distribution              # exact value of the input
    q_tilde: Distribution
    spec: EmbeddingSpec
    E: StochasticChannel
    R: StochasticChannel
    epsilon: Fraction
    N: int

    @property
    def is_identity(self) -> bool:
        return self.q_tilde == self.q


def _as_epsilon(epsilon) -> Fraction:
    if isinstance(epsilon, float):
        return Fraction(repr(epsilon))
    return Fraction(epsilon)


def minimal_n(q_sorted_min: Fraction, k: int, epsilon: Fraction) -> int:
    """Smallest integer ``N >= max{((k+1)/q_k)^2, k/eps, 4}``."""
    bound = max(((k + 1) / q_sorted_min) ** 2, k / epsilon, Fraction(4))
    return math.ceil(bound)


def rational_approximation(q: Distribution, epsilon, *, min_n: int | None = None,
                           force: bool = False) -> RationalApproximation:
    """Full-rank rational ``q~ = d/N`` close to ``q``, with ``E q = q~`` and ``R q~ = q``.

    Exact inputs are already rational and get identity channels unless
    ``force`` is set.  Float inputs are taken at their exact binary value.
    Unsorted inputs are handled by permuting to descending order and back.
    """
    eps = _as_epsilon(epsilon)
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not q.is_full_rank():
        raise RankError("rational approximation needs a full-rank q")
    k = len(q)
    qe = q.to_exact() if not q.exact else q

    if q.exact and not force:
        base = EmbeddingSpec.for_rational(qe)
        n = base.N
        if min_n is not None and n < min_n:
            n *= -(-min_n // n)
        spec = EmbeddingSpec.for_rational(qe, n)
        ident = StochasticChannel.identity(k)
        return RationalApproximation(qe, qe, spec, ident, ident, eps, n)

    order = descending_order(qe.weights)
    qs = [qe[i] for i in order]
    n = minimal_n(qs[-1], k, eps)
    if min_n is not None:
        n = max(n, min_n)
    d = [math.ceil(x * n) for x in qs[:-1]]
    d.append(n - sum(d))
    if d[-1] < 1:
        raise RankError("approximation collapsed the smallest letter")
    qt = [Fraction(x, n) for x in d]
    deltas = [qt[i] - qs[i] for i in range(k - 1)]
    delta = sum(deltas, Fraction(0))
    last = k - 1
    zero, one = Fraction(0), Fraction(1)

    e_rows = [[zero] * k for _ in range(k)]
    r_rows = [[zero] * k for _ in range(k)]
    for i in range(last):
        e_rows[i][i] = one
        e_rows[i][last] = deltas[i] / qs[last]
        r_rows[i][i] = qs[i] / qt[i]
        r_rows[last][i] = deltas[i] / qt[i]
    e_rows[last][last] = 1 - delta / qs[last]
    r_rows[last][last] = one

    # conjugate back to the caller's letter order
    e_orig = [[zero] * k for _ in range(k)]
    r_orig = [[zero] * k for _ in range(k)]
    for a in range(k):
        for b in range(k):
            e_orig[order[a]][order[b]] = e_rows[a][b]
            r_orig[order[a]][order[b]] = r_rows[a][b]
    d_orig = [0] * k
    for pos, i in enumerate(order):
        d_orig[i] = d[pos]
    spec = EmbeddingSpec(tuple(d_orig))
    E = StochasticChannel(tuple(tuple(r) for r in e_orig))
    R = StochasticChannel(tuple(tuple(r) for r in r_orig))
    return RationalApproximation(qe, spec.gamma, spec, E, R, eps, n)


def reversal(channel: StochasticChannel, prior: Distribution) -> StochasticChannel:
    """Bayes inverse ``R(x|y) = E(y|x) p(x) / (E p)(y)``; zero-mass outputs get a uniform column."""
    if channel.in_size != len(prior):
        raise DimensionError(f"channel expects {channel.in_size} letters, got {len(prior)}")
    image = apply(channel, prior)
    n_in = channel.in_size
    ex = channel.exact and prior.exact
    uniform = Fraction(1, n_in) if ex else 1.0 / n_in
    cols = []
    for y in range(channel.out_size):
        py = image[y]
        if py == 0:
            cols.append([uniform] * n_in)
        else:
            cols.append([channel.entries[y][x] * prior[x] / py for x in range(n_in)])
    return StochasticChannel.from_columns(cols)


def split_channel(channel: StochasticChannel, u: Distribution, u_prime: Distribution,
                  w: Distribution) -> tuple[StochasticChannel, StochasticChannel]:
    """Blocks ``(L1, L2)`` with ``channel = L1 ⊕ L2`` on the support prefix of ``u``."""
    n = channel.in_size
    if channel.out_size != n or len(u) != n or len(u_prime) != n or len(w) != n:
        raise DimensionError("splitting needs a square channel and matching distributions")
    if not w.is_full_rank():
        raise StructureError("reference distribution w is not full rank")
    if not same(apply(channel, w), w):
        raise StructureError("channel does not preserve w")
    supp = u.support()
    ell = len(supp)
    if supp != tuple(range(ell)):
        raise StructureError("u must be positive exactly on its first letters")
    if any(i >= ell for i in u_prime.support()):
        raise StructureError("u' has mass outside the first letters")
    if not same(apply(channel, u), u_prime):
        raise StructureError("channel does not map u to u'")
    for j in range(n):
        for i in range(n):
            if (i < ell) != (j < ell) and channel.entries[j][i] != 0:
                raise StructureError(f"off-block mass {channel.entries[j][i]} at [{j}][{i}]")
    e = channel.entries
    first = StochasticChannel(tuple(tuple(e[j][i] for i in range(ell)) for j in range(ell)))
    second = StochasticChannel(tuple(tuple(e[j][i] for i in range(ell, n))
                                     for j in range(ell, n)))
    return first, second


def tensor_id(channel: StochasticChannel, m: int) -> StochasticChannel:
    """``channel ⊗ id_m``."""
    return tensor(channel, StochasticChannel.identity(m, exact_backend=channel.exact))


def lift_to_embedding(psi: StochasticChannel, spec_in: EmbeddingSpec, spec_out: EmbeddingSpec,
                      m: int) -> StochasticChannel:
    """``(Γ_out ⊗ id) ∘ psi ∘ (Γ*_in ⊗ id)``: a channel on ``N m`` letters."""
    return compose(tensor_id(embedding_channel(spec_out), m),
                   compose(psi, tensor_id(unembedding_channel(spec_in), m)))

