"""Bounded catalyst search with exact certificates.

For each candidate catalyst ``r`` the search works on the reduced alphabet
``k x m``: it looks for a channel ``Ψ`` mapping ``q~ ⊗ η`` onto ``q~' ⊗ η``
whose output on ``p~ ⊗ r`` has marginals ``(p~', r)``, minimizing the
correlation ``D(Ψ(p~⊗r) || p~'⊗r)`` by Frank-Wolfe with a float LP oracle.
The iterate is then rebuilt exactly: each visited vertex is recovered in
rationals from its support, and the weights are rationalized.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .catalysis import (ConditionError, ConversionCertificate, ConversionInstance,
                        assemble_pipeline, check_conditions, compare_relative_entropy,
                        uniform_on_support, verify_certificate)
from .channels import (EmbeddingSpec, RationalApproximation, _as_epsilon, lift_to_embedding,
                       rational_approximation, tensor_id)
from .core import (Distribution, JointDistribution, StochasticChannel, apply, compose,
                   marginals, trace_distance)
from .divergence import relative_entropy

DEFAULT_MAX_DIM = 8
DEFAULT_BUDGET = 20_000
FW_MAX_ITER = 200
BATCH = 8
LIFT_CAP = 512          # largest N*m for which Φ₁ is built explicitly
IDENTITY_DENOM_CAP = 4096
VERTEX_TOL = 1e-9
WEIGHT_DENOM = 10**6
BACKOFF = 10


# -- reduction to rational reference distributions ------------------------------

@dataclass
class ReducedPlan:
    mode: str
    p_hat: Distribution
    q_hat: Distribution
    p_hat_prime: Distribution
    q_hat_prime: Distribution
    spec_d: EmbeddingSpec
    spec_d_prime: EmbeddingSpec
    E: StochasticChannel | None
    R_prime: StochasticChannel | None
    p_eps: Distribution
    delta: Fraction
    condition_holds: bool
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "N": self.spec_d.N,
            "d": list(self.spec_d.d),
            "d_prime": list(self.spec_d_prime.d),
            "delta": f"{self.delta.numerator}/{self.delta.denominator}",
            "approximated": self.E is not None,
            "notes": list(self.notes),
        }


def _needs_construction(q: Distribution) -> bool:
    if not q.exact:
        return True
    return math.lcm(*(w.denominator for w in q)) > IDENTITY_DENOM_CAP


def _joint_approximations(q: Distribution, qp: Distribution,
                          eps) -> tuple[RationalApproximation, RationalApproximation]:
    """Approximations of ``q`` and ``q'`` sharing one embedding size ``N``."""
    first = [rational_approximation(x, eps, force=_needs_construction(x)) for x in (q, qp)]
    fixed = [a.N for a, x in zip(first, (q, qp)) if not _needs_construction(x)]
    target = max(a.N for a in first)
    if fixed:
        base = math.lcm(*fixed)
        n = base * -(-target // base)
    else:
        n = target
    a, b = (rational_approximation(x, eps, min_n=n, force=_needs_construction(x))
            for x in (q, qp))
    if a.N != b.N:
        raise RuntimeError(f"embedding sizes disagree: {a.N} vs {b.N}")
    return a, b


def plan_reduction(instance: ConversionInstance) -> ReducedPlan:
    p, q, pp, qp = instance.exact_parts()
    if instance.mode == "exact":
        n = math.lcm(math.lcm(*(w.denominator for w in q)), math.lcm(*(w.denominator for w in qp)))
        return ReducedPlan("exact", p, q, pp, qp, EmbeddingSpec.for_rational(q, n),
                           EmbeddingSpec.for_rational(qp, n), None, None, pp, Fraction(0), True)

    eps = _as_epsilon(instance.epsilon)
    k = instance.k
    eps_l = k * (2 * eps / 9) ** 2
    delta = min(eps / 3, Fraction(1, 100))
    notes: list[str] = []
    plan = None
    for _ in range(2 * BACKOFF):
        a, b = _joint_approximations(instance.source.q, instance.target.q, eps_l)
        mixed = pp.mix(qp, delta)
        p_hat, p_hat_prime = apply(a.E, p), apply(b.E, mixed)
        p_eps = apply(b.R, p_hat_prime)
        holds = compare_relative_entropy(p_hat, a.q_tilde, p_hat_prime, b.q_tilde) >= 0
        plan = ReducedPlan(instance.mode, p_hat, a.q_tilde, p_hat_prime, b.q_tilde, a.spec, b.spec,
                           None if a.is_identity else a.E, None if b.is_identity else b.R,
                           p_eps, delta, holds, notes)
        if trace_distance(pp, p_eps) > eps:
            delta /= 2
            notes.append("delta halved: target perturbation exceeded epsilon")
            continue
        if not holds:
            eps_l /= 4
            notes.append("approximation refined: reduced condition failed")
            continue
        return plan
    plan.notes.append("backoff exhausted")
    return plan


# -- the reduced linear system --------------------------------------------------

class ReducedSystem:
    """Constraints on ``Ψ[o][c]`` (variable ``o * n + c``) over ``n = k m`` letters."""

    def __init__(self, plan: ReducedPlan, r: Distribution):
        k, m = len(plan.p_hat), len(r)
        n = k * m
        self.k, self.m, self.n = k, m, n
        eta = Distribution.uniform(m)
        self.x = plan.p_hat.tensor(r)
        self.qv = plan.q_hat.tensor(eta)
        self.qt = plan.q_hat_prime.tensor(eta)
        self.w = plan.p_hat_prime.tensor(r)
        rows: list[tuple[dict, Fraction]] = []
        for c in range(n):
            rows.append(({o * n + c: Fraction(1) for o in range(n)}, Fraction(1)))
        for o in range(n):
            rows.append(({o * n + c: self.qv[c] for c in range(n)}, self.qt[o]))
        for j in range(k):
            rows.append(({(j * m + b) * n + c: self.x[c] for b in range(m) for c in range(n)
                          if self.x[c]}, plan.p_hat_prime[j]))
        for b in range(m):
            rows.append(({(j * m + b) * n + c: self.x[c] for j in range(k) for c in range(n)
                          if self.x[c]}, r[b]))
        self.rows = rows
        ri, ci, vals = [], [], []
        for i, (coeffs, _) in enumerate(rows):
            for j, v in coeffs.items():
                ri.append(i)
                ci.append(j)
                vals.append(float(v))
        self.A = coo_matrix((vals, (ri, ci)), shape=(len(rows), n * n)).tocsr()
        self.b = np.array([float(rhs) for _, rhs in rows])
        self.xf = np.array(self.x.floats())
        self.wf = np.array(self.w.floats())

    def lmo(self, cost: np.ndarray) -> np.ndarray | None:
        res = linprog(cost, A_eq=self.A, b_eq=self.b, bounds=(0, None), method="highs")
        if res.status != 0:
            return None
        return np.clip(res.x, 0.0, None)

    def output(self, psi: np.ndarray) -> np.ndarray:
        return psi.reshape(self.n, self.n) @ self.xf

    def objective(self, psi: np.ndarray) -> float:
        t = self.output(psi)
        mask = t > 0
        return float(np.sum(t[mask] * np.log(t[mask] / self.wf[mask])))

    def gradient(self, psi: np.ndarray) -> np.ndarray:
        t = np.clip(self.output(psi), 1e-12, None)
        g = np.zeros(self.n)
        pos = self.wf > 0
        g[pos] = np.log(t[pos] / self.wf[pos])
        return np.outer(g, self.xf).ravel()

    def exact_vertex(self, v: np.ndarray) -> list[Fraction] | None:
        """Rational point on the support of ``v`` satisfying every constraint, if one is found."""
        for tol in (VERTEX_TOL, 1e-7, 1e-11):
            sol = self._solve_on_support(v, [j for j in range(v.size) if v[j] > tol])
            if sol is not None:
                return sol
        return None

    def _solve_on_support(self, v: np.ndarray, support: list[int]) -> list[Fraction] | None:
        cols = {j: pos for pos, j in enumerate(support)}
        width = len(support)
        mat = []
        for coeffs, rhs in self.rows:
            row = [Fraction(0)] * (width + 1)
            for j, c in coeffs.items():
                if j in cols:
                    row[cols[j]] = c
            row[-1] = rhs
            mat.append(row)
        pivots = []
        r = 0
        for c in range(width):
            piv = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
            if piv is None:
                continue
            mat[r], mat[piv] = mat[piv], mat[r]
            lead = mat[r][c]
            mat[r] = [a / lead for a in mat[r]]
            for i in range(len(mat)):
                if i != r and mat[i][c] != 0:
                    f = mat[i][c]
                    mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
            pivots.append(c)
            r += 1
        if any(row[-1] != 0 for row in mat[r:]):
            return None
        free = [c for c in range(width) if c not in set(pivots)]
        y = [Fraction(0)] * width
        for c in free:
            y[c] = Fraction(float(v[support[c]])).limit_denominator(WEIGHT_DENOM)
        for i, c in enumerate(pivots):
            y[c] = mat[i][-1] - sum((mat[i][f] * y[f] for f in free), Fraction(0))
        if any(val < 0 for val in y):
            return None
        out = [Fraction(0)] * (self.n * self.n)
        for pos, j in enumerate(support):
            out[j] = y[pos]
        return out

    def satisfied_by(self, x: list[Fraction]) -> bool:
        if any(v < 0 for v in x):
            return False
        return all(sum((c * x[j] for j, c in coeffs.items()), Fraction(0)) == rhs
                   for coeffs, rhs in self.rows)


@dataclass
class CandidateResult:
    r: tuple
    lp_calls: int
    status: str                     # infeasible | unconverged | above_gamma | exactify_failed | found
    psi: list | None = None
    objective: float | None = None
    gap: float | None = None
    iterations: int = 0


def _fw(system: ReducedSystem, gamma: float, cap: int) -> CandidateResult:
    r: tuple = ()
    calls = 0
    if cap < 1:
        return CandidateResult(r, 0, "unconverged")
    v0 = system.lmo(np.zeros(system.n * system.n))
    calls += 1
    if v0 is None:
        return CandidateResult(r, calls, "infeasible")
    keys: dict[bytes, int] = {}
    vertices: list[np.ndarray] = []
    weights: list[float] = []

    def add(v: np.ndarray, weight: float) -> None:
        key = np.round(v, 10).tobytes()
        if key not in keys:
            keys[key] = len(vertices)
            vertices.append(v)
            weights.append(0.0)
        weights[keys[key]] += weight

    add(v0, 1.0)
    psi = v0.copy()
    gap = math.inf
    converged = False
    it = 0
    for it in range(FW_MAX_ITER):
        if calls >= cap:
            break
        grad = system.gradient(psi)
        s = system.lmo(grad)
        calls += 1
        if s is None:
            break
        gap = float(grad @ (psi - s))
        f = system.objective(psi)
        if gap < gamma / 10 or f <= gamma / 2:
            converged = True
            break
        step = 2.0 / (it + 2)
        psi = (1 - step) * psi + step * s
        weights[:] = [w * (1 - step) for w in weights]
        add(s, step)
    result = CandidateResult(r, calls, "unconverged", objective=system.objective(psi), gap=gap,
                             iterations=it)
    if not converged:
        return result
    if result.objective >= gamma:
        result.status = "above_gamma"
        return result

    exact_parts = []
    for v, w in zip(vertices, weights):
        lam = Fraction(w).limit_denominator(WEIGHT_DENOM)
        if lam <= 0:
            continue
        ev = system.exact_vertex(v)
        if ev is None or not system.satisfied_by(ev):
            continue
        exact_parts.append((lam, ev))
    if not exact_parts:
        result.status = "exactify_failed"
        return result
    total = sum(lam for lam, _ in exact_parts)
    size = system.n * system.n
    psi_exact = [Fraction(0)] * size
    for lam, ev in exact_parts:
        share = lam / total
        for j in range(size):
            if ev[j]:
                psi_exact[j] += share * ev[j]
    n = system.n
    channel = StochasticChannel(tuple(tuple(psi_exact[o * n:(o + 1) * n]) for o in range(n)))
    t = apply(channel, system.x)
    value = relative_entropy(t, system.w)
    result.objective = value
    if value > gamma:
        result.status = "above_gamma"
        return result
    result.psi = channel
    result.status = "found"
    return result


# -- candidate grid -------------------------------------------------------------

def _partitions(total: int, parts: int, largest: int) -> Iterator[tuple]:
    """Non-increasing positive integer tuples of length ``parts`` summing to ``total``."""
    if parts == 1:
        if 1 <= total <= largest:
            yield (total,)
        return
    for first in range(min(largest, total - parts + 1), 0, -1):
        for rest in _partitions(total - first, parts - 1, first):
            yield (first,) + rest


def candidate_catalysts(max_dim: int) -> Iterator[Distribution]:
    """Full-rank grid points with resolution ``1/(4m)``, sorted descending, lexicographic order.

    Permuting catalyst letters gives an equivalent problem, so only
    non-increasing grid points are visited.
    """
    for m in range(1, max_dim + 1):
        total = 4 * m
        for counts in sorted(_partitions(total, m, total)):
            yield Distribution(tuple(Fraction(c, total) for c in counts))


# -- driver ---------------------------------------------------------------------

@dataclass
class SearchResult:
    certificate: ConversionCertificate | None
    status: str                     # found | inconclusive
    log: dict


def _identity_certificate(instance: ConversionInstance) -> ConversionCertificate:
    p, _, pp, _ = instance.exact_parts()
    one = Distribution((Fraction(1),))
    joint = JointDistribution.product(p, one)
    return ConversionCertificate(instance, one, one, joint, StochasticChannel.identity(instance.k),
                                 pp, 0.0, Fraction(0),
                                 {"status": "found", "identity": True, "lp_calls": 0,
                                  "candidates_tried": 0})


def _build_certificate(instance: ConversionInstance, plan: ReducedPlan, r: Distribution,
                       psi: StochasticChannel) -> tuple[ConversionCertificate, bool]:
    p, _, pp, _ = instance.exact_parts()
    m = len(r)
    lifted = plan.spec_d.N * m <= LIFT_CAP
    if lifted:
        phi1 = lift_to_embedding(psi, plan.spec_d, plan.spec_d_prime, m)
        lam = assemble_pipeline(plan.spec_d, plan.spec_d_prime, plan.E, plan.R_prime, phi1)
    else:
        lam = psi
        if plan.E is not None:
            lam = compose(lam, tensor_id(plan.E, m))
        if plan.R_prime is not None:
            lam = compose(tensor_id(plan.R_prime, m), lam)
    out = apply(lam, p.tensor(r))
    joint = JointDistribution.from_flat(out, instance.k, m)
    first, _ = marginals(joint)
    target = pp if instance.mode == "exact" else first
    corr = relative_entropy(out, target.tensor(r))
    eps = trace_distance(pp, target)
    cert = ConversionCertificate(instance, r, uniform_on_support(r), joint, lam, target, corr,
                                 eps, {})
    return cert, lifted


def _same(a: Distribution, b: Distribution) -> bool:
    return tuple(a) == tuple(b)


def run_search(instance: ConversionInstance, max_catalyst_dim: int = DEFAULT_MAX_DIM,
               budget: int = DEFAULT_BUDGET, threads: int = 1) -> SearchResult:
    """Search for a certificate; ``budget`` caps the number of LP oracle calls."""
    if max_catalyst_dim < 1:
        raise ValueError("max_catalyst_dim must be at least 1")
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    p, q, pp, qp = instance.exact_parts()
    if _same(p, pp) and _same(q, qp):
        cert = _identity_certificate(instance)
        return SearchResult(cert, "found", cert.search_log)

    report = check_conditions(instance)
    if not report.verdict:
        raise ConditionError("the conversion condition is false; no certificate exists")

    plan = plan_reduction(instance)
    gamma = float(instance.gamma)
    log: dict = {"plan": plan.to_json(), "max_catalyst_dim": max_catalyst_dim,
                 "budget": budget, "lp_calls": 0, "candidates_tried": 0}
    if not plan.condition_holds:
        log.update(status="inconclusive", reason="reduced instance fails the condition")
        return SearchResult(None, "inconclusive", log)

    candidates = candidate_catalysts(max_catalyst_dim)
    used = 0
    tried = 0
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        while True:
            batch = [r for _, r in zip(range(BATCH), candidates)]
            if not batch:
                break
            remaining = budget - used
            if remaining <= 0:
                log.update(status="inconclusive", reason="budget exhausted")
                break
            cap = min(FW_MAX_ITER + 1, remaining)

            def evaluate(r: Distribution, cap=cap) -> CandidateResult:
                res = _fw(ReducedSystem(plan, r), gamma, cap)
                res.r = tuple(r)
                return res

            results = list(pool.map(evaluate, batch)) if pool else [evaluate(r) for r in batch]
            for r, res in zip(batch, results):
                if used + res.lp_calls > budget:
                    used = budget
                    break
                used += res.lp_calls
                tried += 1
                if res.status != "found":
                    continue
                cert, lifted = _build_certificate(instance, plan, r, res.psi)
                if not verify_certificate(instance, cert).passed:
                    continue
                log.update(status="found", lp_calls=used, candidates_tried=tried,
                           accepted={"m": len(r), "r": [str(x) for x in r],
                                     "fw_iterations": res.iterations,
                                     "duality_gap": res.gap,
                                     "reduced_objective": res.objective, "lifted": lifted})
                cert = ConversionCertificate(cert.instance, cert.catalyst_r, cert.eta,
                                             cert.joint_t_prime, cert.channel, cert.p_prime_eps,
                                             cert.achieved_gamma, cert.achieved_epsilon, log)
                return SearchResult(cert, "found", log)
    finally:
        if pool:
            pool.shutdown()
    log["lp_calls"] = used
    log["candidates_tried"] = tried
    log.setdefault("status", "inconclusive")
    log.setdefault("reason", "no candidate catalyst passed")
    log["status"] = "inconclusive"
    return SearchResult(None, "inconclusive", log)


def search_catalyst(instance: ConversionInstance, max_catalyst_dim: int = DEFAULT_MAX_DIM,
                    budget: int = DEFAULT_BUDGET, threads: int = 1) -> ConversionCertificate | None:
    """Certificate for ``instance``, or None when the bounded search is inconclusive.

    None is not a proof of infeasibility.  Raises :class:`ConditionError`
    when the feasibility condition is false.
    """
    return run_search(instance, max_catalyst_dim, budget, threads).certificate
