"""Relative majorization of dichotomies, decided by exact LP and by the testing-region criterion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .config import TOL
from .core import Distribution, DimensionError, StochasticChannel, exact, rationalize, same
from .lp import LpOutcome, LpProblem, lp_feasible


@dataclass(frozen=True)
class DistPair:
    p: Distribution
    q: Distribution

    def __post_init__(self) -> None:
        if len(self.p) != len(self.q):
            raise DimensionError(f"pair alphabets differ: {len(self.p)} vs {len(self.q)}")

    @property
    def size(self) -> int:
        return len(self.p)

    @property
    def exact(self) -> bool:
        return self.p.exact and self.q.exact


class RelmajResult(NamedTuple):
    feasible: bool
    witness: StochasticChannel | None


def rationalize_distribution(p: Distribution,
                             max_denominator: int = TOL.rationalize_max_denominator) -> Distribution:
    """Exact distribution near ``p``: continued fractions, mass defect put on the largest letter.

    Exact inputs are returned unchanged.
    """
    if p.exact:
        return p
    vals = [rationalize(w, max_denominator) for w in p]
    top = max(range(len(vals)), key=lambda i: (vals[i], -i))
    vals[top] += 1 - sum(vals)
    return Distribution(tuple(vals))


def rationalize_pair(pair: DistPair) -> DistPair:
    return DistPair(rationalize_distribution(pair.p), rationalize_distribution(pair.q))


def relative_spectrum(pair: DistPair) -> tuple:
    """Sorted distinct ratios ``p(x)/q(x)``; ``inf`` where only ``q`` vanishes."""
    vals = set()
    for a, b in zip(pair.p, pair.q):
        if b == 0 or (not pair.exact and float(b) <= TOL.support):
            if a != 0:
                vals.add(math.inf)
            continue
        vals.add(a / b if pair.exact else float(a) / float(b))
    return tuple(sorted(vals))


def relmaj_problem(source: DistPair, target: DistPair) -> LpProblem:
    """LP over channel entries ``N[j][i]`` (index ``j * n_in + i``)."""
    n_in, n_out = source.size, target.size
    lp = LpProblem(n_in * n_out)
    for i in range(n_in):
        lp.add({j * n_in + i: 1 for j in range(n_out)}, "==", 1)
    for src, dst in ((source.p, target.p), (source.q, target.q)):
        for j in range(n_out):
            lp.add({j * n_in + i: exact(src[i]) for i in range(n_in)}, "==", exact(dst[j]))
    return lp


def relatively_majorizes(source: DistPair, target: DistPair) -> RelmajResult:
    """Is there one channel ``N`` with ``N p = p'`` and ``N q = q'``?

    Float pairs are first rationalized (see :func:`rationalize_distribution`).
    """
    source, target = rationalize_pair(source), rationalize_pair(target)
    if source.size == target.size and same(source.p, target.p) and same(source.q, target.q):
        return RelmajResult(True, StochasticChannel.identity(source.size))
    outcome = lp_feasible(relmaj_problem(source, target))
    if not outcome.feasible:
        return RelmajResult(False, None)
    x = outcome.assignment
    n_in = source.size
    rows = tuple(tuple(x[j * n_in:(j + 1) * n_in]) for j in range(target.size))
    return RelmajResult(True, StochasticChannel(rows))


def _l1_tilt(pair: DistPair, t) -> object:
    return sum(abs(a - t * b) for a, b in zip(pair.p, pair.q))


def blackwell_criterion(source: DistPair, target: DistPair) -> bool:
    """Testing-region containment: ``Σ|p - t q| >= Σ|p' - t q'|`` for all ``t >= 0``.

    Both sides are piecewise linear in ``t`` with kinks on the relative
    spectra and slope ``Σq = 1`` beyond the last kink, so the finite
    breakpoint set plus one point past it decides the inequality.
    """
    ex = source.exact and target.exact
    if not ex:
        source, target = rationalize_pair(source), rationalize_pair(target)
    finite = [v for v in relative_spectrum(source) + relative_spectrum(target)
              if v != math.inf]
    points = sorted({Fraction(0)} | {Fraction(v) for v in finite})
    points.append(points[-1] + 1)
    for t in points:
        if _l1_tilt(source, t) < _l1_tilt(target, t):
            return False
    return True


def doubly_stochastic_problem(x: Distribution, y: Distribution) -> LpProblem:
    """Birkhoff-polytope LP: ``D >= 0``, unit row and column sums, ``D x = y``."""
    n = len(x)
    if len(y) != n:
        raise DimensionError("majorization LP needs equal sizes")
    lp = LpProblem(n * n)
    for i in range(n):
        lp.add({j * n + i: 1 for j in range(n)}, "==", 1)
        lp.add({i * n + c: 1 for c in range(n)}, "==", 1)
    for j in range(n):
        lp.add({j * n + i: exact(x[i]) for i in range(n)}, "==", exact(y[j]))
    return lp


def majorizes_lp(x: Distribution, y: Distribution) -> LpOutcome:
    return lp_feasible(doubly_stochastic_problem(rationalize_distribution(x),
                                                 rationalize_distribution(y)))
