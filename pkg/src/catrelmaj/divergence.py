"""Rényi divergences and entropies over the whole extended real line of orders.

Orders are plain floats; ``math.inf`` and ``-math.inf`` are valid.  For
negative orders the sign convention ``sgn(alpha) = -1`` is used, which keeps
every divergence nonnegative and monotone under channels.  Results are
float64 and may be ``+inf``.
"""

from __future__ import annotations

import math
from typing import Iterable

from .config import TOL
from .core import Distribution, DimensionError, JointDistribution, marginals

INF = math.inf

STANDARD_ALPHAS = (-INF, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0, INF)


def as_order(alpha) -> float:
    """Parse an order (``"inf"``, ``"-inf"`` and numbers) and snap it near 0 and 1."""
    if isinstance(alpha, str):
        a = alpha.strip().lower()
        if a in ("inf", "+inf", "infinity", "∞"):
            return INF
        if a in ("-inf", "-infinity", "-∞"):
            return -INF
        alpha = float(a)
    alpha = float(alpha)
    if math.isnan(alpha):
        raise ValueError("order must not be NaN")
    if abs(alpha) < TOL.alpha_snap:
        return 0.0
    if abs(alpha - 1.0) < TOL.alpha_snap:
        return 1.0
    return alpha


def sgn(alpha: float) -> int:
    return 1 if alpha >= 0 else -1


def _pairs(p: Distribution, q: Distribution) -> list[tuple[float, float]]:
    if len(p) != len(q):
        raise DimensionError(f"alphabet sizes differ: {len(p)} vs {len(q)}")
    return [(float(a), float(b)) for a, b in zip(p, q)]


def _support_mass(p: Distribution, q: Distribution) -> float:
    if p.exact and q.exact:
        return float(sum(b for a, b in zip(p, q) if a != 0))
    return math.fsum(float(b) for a, b in zip(p, q) if float(a) > TOL.support)


def _logsumexp(logs: list[float]) -> float:
    if not logs:
        return -INF
    top = max(logs)
    if top == INF:
        return INF
    if top == -INF:
        return -INF
    return top + math.log(math.fsum(math.exp(v - top) for v in logs))


def min_relative_entropy(p: Distribution, q: Distribution) -> float:
    """``-ln Σ_{p_i > 0} q_i``."""
    mass = _support_mass(p, q)
    if mass <= 0:
        return INF
    return max(0.0, -math.log(mass))


def relative_entropy(p: Distribution, q: Distribution) -> float:
    total = []
    for a, b in _pairs(p, q):
        if a == 0:
            continue
        if b == 0:
            return INF
        total.append(a * (math.log(a) - math.log(b)))
    return max(0.0, math.fsum(total))


def max_relative_entropy(p: Distribution, q: Distribution) -> float:
    best = -INF
    for a, b in _pairs(p, q):
        if a == 0:
            continue
        if b == 0:
            return INF
        best = max(best, math.log(a) - math.log(b))
    return max(0.0, best)


def renyi_divergence(alpha, p: Distribution, q: Distribution) -> float:
    """``D_alpha(p || q)`` for any order in ``[-inf, inf]``."""
    alpha = as_order(alpha)
    if alpha == 0.0:
        return min_relative_entropy(p, q)
    if alpha == 1.0:
        return relative_entropy(p, q)
    if alpha == INF:
        return max_relative_entropy(p, q)
    if alpha == -INF:
        return max_relative_entropy(q, p)
    # ln Σ p^α q^(1-α), with letters where both vanish dropped
    logs = []
    for a, b in _pairs(p, q):
        if a == 0 and b == 0:
            continue
        la = math.log(a) if a > 0 else -INF
        lb = math.log(b) if b > 0 else -INF
        if la == -INF and alpha < 0:
            return INF
        if lb == -INF and alpha > 1:
            return INF
        if la == -INF or lb == -INF:
            continue
        logs.append(alpha * la + (1 - alpha) * lb)
    value = sgn(alpha) / (alpha - 1) * _logsumexp(logs)
    if math.isnan(value):
        return INF
    return max(0.0, value)


def renyi_entropy(alpha, p: Distribution) -> float:
    """``H_alpha(p)`` with the same sign convention as :func:`renyi_divergence`."""
    alpha = as_order(alpha)
    w = p.floats()
    if alpha == 0.0:
        return math.log(len(p.support()))
    if alpha == 1.0:
        return -math.fsum(x * math.log(x) for x in w if x > 0)
    if alpha == INF:
        return -math.log(max(w))
    if alpha == -INF:
        m = min(w)
        return math.log(m) if m > 0 else -INF
    if alpha < 0 and min(w) <= 0:
        return -INF
    logs = [alpha * math.log(x) for x in w if x > 0]
    return sgn(alpha) / (1 - alpha) * _logsumexp(logs)


def shannon_entropy(p: Distribution) -> float:
    return renyi_entropy(1.0, p)


def negative_alpha_residual(alpha, p: Distribution, q: Distribution) -> float:
    """``|D_a(p||q) - |a|/(|a|+1) D_{|a|+1}(q||p)|`` for a negative order ``a``."""
    alpha = as_order(alpha)
    if not (alpha < 0 and math.isfinite(alpha)):
        raise ValueError("identity holds for finite negative orders only")
    lhs = renyi_divergence(alpha, p, q)
    a = abs(alpha)
    rhs = a / (a + 1) * renyi_divergence(a + 1, q, p)
    if math.isinf(lhs) and math.isinf(rhs):
        return 0.0
    return abs(lhs - rhs)


def check_negative_alpha_identity(alpha, p: Distribution, q: Distribution) -> float:
    return negative_alpha_residual(alpha, p, q)


def entropy_uniform_relation(alpha, p: Distribution) -> float:
    """Residual of ``D_a(p || uniform_k) = sgn(a) ln k - H_a(p)``.

    For nonnegative orders this is the familiar ``ln k - H_a(p)``; with the
    ``sgn`` convention for negative orders the ``ln k`` term flips sign.
    """
    alpha = as_order(alpha)
    k = len(p)
    lhs = renyi_divergence(alpha, p, Distribution.uniform(k, exact_backend=p.exact))
    rhs = sgn(alpha) * math.log(k) - renyi_entropy(alpha, p)
    if math.isinf(lhs) and math.isinf(rhs) and lhs == rhs:
        return 0.0
    return abs(lhs - rhs)


def superadditivity_gap(alpha, t: JointDistribution, sigma_a: Distribution,
                        sigma_b: Distribution) -> float:
    """``D(t || sa⊗sb) - D(t_A || sa) - D(t_B || sb)`` for orders 0 and 1."""
    alpha = as_order(alpha)
    if alpha not in (0.0, 1.0):
        raise ValueError("superadditivity is asserted for orders 0 and 1 only")
    n_a, n_b = t.shape
    if len(sigma_a) != n_a or len(sigma_b) != n_b:
        raise DimensionError("reference marginals do not match the joint shape")
    t_a, t_b = marginals(t)
    joint = renyi_divergence(alpha, t.flatten(validate=False), sigma_a.tensor(sigma_b))
    parts = renyi_divergence(alpha, t_a, sigma_a) + renyi_divergence(alpha, t_b, sigma_b)
    if math.isinf(joint) or math.isinf(parts):
        return INF if joint >= parts else -INF
    return joint - parts


def mutual_information(t: JointDistribution) -> float:
    t_a, t_b = marginals(t)
    return relative_entropy(t.flatten(validate=False), t_a.tensor(t_b))


def divergence_table(p: Distribution, q: Distribution,
                     alphas: Iterable = STANDARD_ALPHAS) -> list[tuple[float, float]]:
    return [(as_order(a), renyi_divergence(a, p, q)) for a in alphas]
