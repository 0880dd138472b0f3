"""Majorization: partial sums, the absolute-deviation criterion, T-transform witnesses."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .config import TOL
from .core import (Distribution, DimensionError, Scalar, StochasticChannel, apply,
                   compose, same)
from .divergence import STANDARD_ALPHAS, as_order, renyi_entropy


class NotMajorizedError(ValueError):
    pass


@dataclass(frozen=True)
class MajorizationWitness:
    matrix: StochasticChannel
    t_transform_count: int

    def verify(self, x: Distribution, y: Distribution) -> bool:
        return self.matrix.is_doubly_stochastic() and same(apply(self.matrix, x), y)


def _check(x: Distribution, y: Distribution) -> None:
    if len(x) != len(y):
        raise DimensionError(f"alphabet sizes differ: {len(x)} vs {len(y)}")


def _ge(a: Scalar, b: Scalar) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a >= b
    return a >= b - TOL.equality


def descending_order(values: Sequence) -> list[int]:
    """Indices sorting ``values`` descending, ties by index."""
    return sorted(range(len(values)), key=lambda i: (-values[i], i))


def majorizes(x: Distribution, y: Distribution) -> bool:
    """True iff every partial sum of ``x`` sorted descending dominates that of ``y``."""
    _check(x, y)
    xs, ys = x.descending(), y.descending()
    sx = sy = 0
    for a, b in zip(xs, ys):
        sx += a
        sy += b
        if not _ge(sx, sy):
            return False
    return _ge(sx, sy) and _ge(sy, sx)


def abs_deviation(values: Iterable, t) -> Scalar:
    return sum(abs(v - t) for v in values)


def majorizes_t_criterion(x: Distribution, y: Distribution) -> bool:
    """``Σ|x_i - t| >= Σ|y_i - t|`` for all real t, checked on the breakpoints.

    Both sides are piecewise linear in ``t`` with kinks at the entries, and
    agree in slope outside ``[min, max]`` once the totals match.
    """
    _check(x, y)
    if not (_ge(sum(x), sum(y)) and _ge(sum(y), sum(x))):
        return False
    for t in sorted(set(x.weights) | set(y.weights)):
        if not _ge(abs_deviation(x, t), abs_deviation(y, t)):
            return False
    return True


def _t_transform(n: int, j: int, k: int, lam: Scalar, exact_backend: bool) -> StochasticChannel:
    """``lam * I + (1 - lam) * swap(j, k)``."""
    one, zero = (Fraction(1), Fraction(0)) if exact_backend else (1.0, 0.0)
    rows = [[one if a == b else zero for b in range(n)] for a in range(n)]
    rows[j][j] = rows[k][k] = lam
    rows[j][k] = rows[k][j] = one - lam
    return StochasticChannel(tuple(tuple(r) for r in rows), validate=False)


def construct_doubly_stochastic(x: Distribution, y: Distribution) -> MajorizationWitness:
    """Doubly stochastic ``D`` with ``D x = y`` as a product of at most ``k - 1`` T-transforms."""
    _check(x, y)
    if not majorizes(x, y):
        raise NotMajorizedError("x does not majorize y")
    n = len(x)
    ex = x.exact and y.exact
    ox, oy = descending_order(x.weights), descending_order(y.weights)
    z = [x[i] for i in ox]
    target = [y[i] for i in oy]
    eq = (lambda a, b: a == b) if ex else (lambda a, b: abs(a - b) <= TOL.equality)

    sorted_d = StochasticChannel.identity(n, exact_backend=ex)
    steps = 0
    while True:
        above = [i for i in range(n) if z[i] > target[i] and not eq(z[i], target[i])]
        if not above:
            break
        j = above[-1]
        below = [i for i in range(j + 1, n) if z[i] < target[i] and not eq(z[i], target[i])]
        if not below:
            break
        k = below[0]
        shift = min(z[j] - target[j], target[k] - z[k])
        lam = 1 - shift / (z[j] - z[k])
        sorted_d = compose(_t_transform(n, j, k, lam, ex), sorted_d)
        z[j], z[k] = z[j] - shift, z[k] + shift
        steps += 1
        if steps > n:
            raise RuntimeError("T-transform schedule failed to terminate")

    # y = P_y^T D_sorted P_x x
    to_sorted = [0] * n
    for pos, i in enumerate(ox):
        to_sorted[i] = pos
    from_sorted = list(oy)
    p_x = StochasticChannel.permutation(to_sorted, exact_backend=ex)
    p_y = StochasticChannel.permutation(from_sorted, exact_backend=ex)
    matrix = compose(p_y, compose(sorted_d, p_x))
    return MajorizationWitness(matrix=matrix, t_transform_count=steps)


def catalytic_majorization_necessary(p: Distribution, p_prime: Distribution,
                                     alphas: Iterable = STANDARD_ALPHAS) -> bool:
    """Sampled necessary condition ``H_a(p) <= H_a(p')`` on a grid of orders.

    This is not the complete criterion for catalytic majorization; passing
    it only means no sampled order rules the conversion out.
    """
    _check(p, p_prime)
    for a in alphas:
        a = as_order(a)
        if renyi_entropy(a, p) > renyi_entropy(a, p_prime) + TOL.inequality_slack:
            return False
    return True
