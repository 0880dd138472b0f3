"""Conversion instances, condition checkers, pipeline assembly and certificate checking.

A certificate claims that a channel ``Λ`` on ``A x B`` turns ``p ⊗ r`` into a
joint ``t'`` whose marginals are the (possibly perturbed) target and the
untouched catalyst ``r``, while mapping ``q ⊗ η`` onto ``q' ⊗ η`` exactly.
Everything on the channel side is checked in exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .config import TOL
from .core import (Distribution, DimensionError, JointDistribution, StochasticChannel, apply,
                   compose, marginals, trace_distance)
from .channels import (EmbeddingSpec, embedding_channel, tensor_id, unembedding_channel)
from .divergence import (min_relative_entropy, relative_entropy, renyi_divergence,
                         shannon_entropy, superadditivity_gap)
from .relmaj import DistPair, relative_spectrum

MODES = ("exact", "approximate", "unital")


class HypothesisError(ValueError):
    """An instance violates a standing hypothesis of the conversion theorems."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class ConditionError(ValueError):
    """The feasibility condition is false, so no certificate can exist."""


class PipelineError(ValueError):
    def __init__(self, junction: int, message: str):
        super().__init__(f"junction {junction}: {message}")
        self.junction = junction


@dataclass(frozen=True)
class ConversionInstance:
    source: DistPair
    target: DistPair
    gamma: Any
    epsilon: Any = None
    mode: str = "exact"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.source.size != self.target.size:
            raise DimensionError("source and target pairs must share an alphabet")
        if not float(self.gamma) > 0:
            raise ValueError("gamma must be positive")
        if self.mode == "exact":
            if self.epsilon is not None:
                raise ValueError("exact mode takes no epsilon")
        elif self.epsilon is None or not 0 < float(self.epsilon) < 1:
            raise ValueError(f"{self.mode} mode needs epsilon in (0, 1)")

    @classmethod
    def unital(cls, p: Distribution, p_prime: Distribution, gamma, epsilon) -> "ConversionInstance":
        eta = Distribution.uniform(len(p))
        return cls(DistPair(p, eta), DistPair(p_prime, eta), gamma, epsilon, "unital")

    @property
    def k(self) -> int:
        return self.source.size

    def exact_parts(self) -> tuple[Distribution, Distribution, Distribution, Distribution]:
        """``(p, q, p', q')`` as exact distributions (floats at their binary value)."""
        return tuple(d if d.exact else d.to_exact()
                     for d in (self.source.p, self.source.q, self.target.p, self.target.q))


@dataclass
class ConditionReport:
    verdict: bool
    values: dict = field(default_factory=dict)


# -- exact comparison of relative entropies ------------------------------------

_MAX_EXPONENT_BITS = 200_000


def _exact_entropy_power(p: Distribution, q: Distribution, scale: int) -> Fraction | None:
    """``∏ (p_i/q_i)^(p_i * scale)``, i.e. ``exp(scale * D(p||q))``, when cheap enough."""
    out = Fraction(1)
    bits = 0
    for a, b in zip(p, q):
        if a == 0:
            continue
        e = a * scale
        if e.denominator != 1:
            return None
        ratio = a / b
        bits += int(e) * (ratio.numerator.bit_length() + ratio.denominator.bit_length())
        if bits > _MAX_EXPONENT_BITS:
            return None
        out *= ratio ** int(e)
    return out


def compare_relative_entropy(p: Distribution, q: Distribution, p2: Distribution,
                             q2: Distribution) -> int:
    """Sign of ``D(p||q) - D(p2||q2)``: exact for rationals when feasible, else float with slack."""
    if all(d.exact for d in (p, q, p2, q2)):
        scale = math.lcm(*(w.denominator for w in (*p, *p2)))
        lhs = _exact_entropy_power(p, q, scale)
        rhs = _exact_entropy_power(p2, q2, scale) if lhs is not None else None
        if lhs is not None and rhs is not None:
            return (lhs > rhs) - (lhs < rhs)
    diff = relative_entropy(p, q) - relative_entropy(p2, q2)
    if math.isinf(diff) or math.isnan(diff):
        a, b = relative_entropy(p, q), relative_entropy(p2, q2)
        return (a > b) - (a < b)
    if abs(diff) <= TOL.inequality_slack:
        return 0
    return 1 if diff > 0 else -1


def _support_mass(p: Distribution, q: Distribution):
    if p.exact and q.exact:
        return sum((b for a, b in zip(p, q) if a != 0), Fraction(0))
    return math.fsum(float(b) for a, b in zip(p, q) if float(a) > TOL.support)


def _divergence_values(p, q, pp, qp) -> dict:
    return {
        "D(p||q)": relative_entropy(p, q),
        "D(p'||q')": relative_entropy(pp, qp),
        "D0(p||q)": min_relative_entropy(p, q),
        "D0(p'||q')": min_relative_entropy(pp, qp),
    }


def _require_full_rank(q: Distribution, qp: Distribution) -> None:
    if not q.is_full_rank():
        raise HypothesisError("rank", "q must have full support")
    if not qp.is_full_rank():
        raise HypothesisError("rank", "q' must have full support")


def check_exact_conditions(instance: ConversionInstance) -> ConditionReport:
    """``D(p||q) > D(p'||q')`` and ``D0(p||q) >= D0(p'||q')`` under the exact-mode hypotheses."""
    p, q = instance.source.p, instance.source.q
    pp, qp = instance.target.p, instance.target.q
    if not (q.exact and qp.exact):
        raise HypothesisError("irrational", "exact mode needs q and q' given as exact rationals")
    _require_full_rank(q, qp)
    spec_src = relative_spectrum(instance.source)
    spec_tgt = relative_spectrum(instance.target)
    if spec_src == spec_tgt:
        raise HypothesisError("equal_spectra", "relative spectra of the two pairs coincide")
    sign = compare_relative_entropy(p, q, pp, qp)
    mass, mass_p = _support_mass(p, q), _support_mass(pp, qp)
    if isinstance(mass, Fraction) and isinstance(mass_p, Fraction):
        d0_ok = mass <= mass_p
    else:
        d0_ok = float(mass) <= float(mass_p) + TOL.inequality_slack
    values = _divergence_values(p, q, pp, qp)
    values["relative_spectrum_source"] = spec_src
    values["relative_spectrum_target"] = spec_tgt
    values["strict_relative_entropy"] = sign > 0
    values["min_relative_entropy_ok"] = d0_ok
    return ConditionReport(sign > 0 and d0_ok, values)


def check_approximate_conditions(instance: ConversionInstance) -> ConditionReport:
    """``D(p||q) >= D(p'||q')`` for full-rank ``q`` and ``q'``."""
    p, q = instance.source.p, instance.source.q
    pp, qp = instance.target.p, instance.target.q
    _require_full_rank(q, qp)
    sign = compare_relative_entropy(p, q, pp, qp)
    values = _divergence_values(p, q, pp, qp)
    return ConditionReport(sign >= 0, values)


def _is_permutation(p: Distribution, pp: Distribution) -> bool:
    if p.exact and pp.exact:
        return sorted(p) == sorted(pp)
    return all(abs(float(a) - float(b)) <= TOL.equality for a, b in zip(sorted(p), sorted(pp)))


def check_unital_conditions(p: Distribution, p_prime: Distribution) -> ConditionReport:
    """``H(p) <= H(p')`` for ``p`` not a permutation of ``p'``."""
    if len(p) != len(p_prime):
        raise DimensionError("p and p' must share an alphabet")
    if _is_permutation(p, p_prime):
        raise HypothesisError("permutation", "p is a permutation of p'")
    eta = Distribution.uniform(len(p), exact_backend=p.exact and p_prime.exact)
    # H(p) <= H(p')  <=>  D(p||eta) >= D(p'||eta)
    sign = compare_relative_entropy(p, eta, p_prime, eta)
    values = {"H(p)": shannon_entropy(p), "H(p')": shannon_entropy(p_prime)}
    return ConditionReport(sign >= 0, values)


def check_conditions(instance: ConversionInstance) -> ConditionReport:
    if instance.mode == "exact":
        return check_exact_conditions(instance)
    if instance.mode == "unital":
        return check_unital_conditions(instance.source.p, instance.target.p)
    return check_approximate_conditions(instance)


# -- pipeline -----------------------------------------------------------------

def assemble_pipeline(spec_d: EmbeddingSpec, spec_d_prime: EmbeddingSpec,
                      E: StochasticChannel | None, E_rev_prime: StochasticChannel | None,
                      phi1: StochasticChannel) -> StochasticChannel:
    """``(E'* ⊗ id) ∘ (Γ*_{d'} ⊗ id) ∘ Φ₁ ∘ (Γ_d ⊗ id) ∘ (E ⊗ id)``.

    ``None`` for ``E`` or ``E'*`` means identity (exact mode).  The catalyst
    size is ``phi1.in_size // N``.
    """
    n = spec_d.N
    if spec_d_prime.N != n:
        raise PipelineError(2, f"embedding totals differ: {n} vs {spec_d_prime.N}")
    if phi1.in_size % n:
        raise PipelineError(1, f"Φ₁ acts on {phi1.in_size} letters, not a multiple of N={n}")
    m = phi1.in_size // n
    k = spec_d.k
    E = E or StochasticChannel.identity(k)
    E_rev_prime = E_rev_prime or StochasticChannel.identity(spec_d_prime.k)
    factors = [
        tensor_id(E, m),
        tensor_id(embedding_channel(spec_d), m),
        phi1,
        tensor_id(unembedding_channel(spec_d_prime), m),
        tensor_id(E_rev_prime, m),
    ]
    for idx in range(len(factors) - 1):
        if factors[idx].out_size != factors[idx + 1].in_size:
            raise PipelineError(idx, f"{factors[idx].out_size} letters feed a factor expecting "
                                     f"{factors[idx + 1].in_size}")
    out = factors[0]
    for f in factors[1:]:
        out = compose(f, out)
    return out


# -- certificates ---------------------------------------------------------------

@dataclass(frozen=True)
class ConversionCertificate:
    instance: ConversionInstance
    catalyst_r: Distribution
    eta: Distribution
    joint_t_prime: JointDistribution
    channel: StochasticChannel
    p_prime_eps: Distribution
    achieved_gamma: float
    achieved_epsilon: Fraction
    search_log: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def uniform_on_support(r: Distribution) -> Distribution:
    supp = r.support()
    share = Fraction(1, len(supp))
    return Distribution(tuple(share if i in supp else Fraction(0) for i in range(len(r))))


def verify_certificate(instance: ConversionInstance,
                       cert: ConversionCertificate) -> VerificationReport:
    """Run every certificate check and report each one."""
    checks: list[Check] = []
    p, q, pp, qp = instance.exact_parts()
    k = instance.k
    r, eta, lam, t = cert.catalyst_r, cert.eta, cert.channel, cert.joint_t_prime
    m = len(r)

    def add(name: str, ok: bool, detail: str = "", always: bool = False) -> None:
        checks.append(Check(name, bool(ok), detail if always or not ok else ""))

    defect = lam.defect()
    shape_ok = lam.in_size == k * m and lam.out_size == k * m
    add("channel_valid", defect is None and shape_ok,
        defect or ("" if shape_ok else f"channel is {lam.out_size}x{lam.in_size}, "
                                       f"expected {k * m}x{k * m}"))

    r_defect = r.defect()
    r_ok = r_defect is None and r.exact
    eta_ok = r_ok and eta.exact and tuple(eta) == tuple(uniform_on_support(r))
    add("catalyst_valid", r_ok and eta_ok,
        r_defect or ("" if eta_ok else "eta is not uniform on the support of r"))

    t_ok = t.shape == (k, m) and t.exact
    if shape_ok and t_ok:
        produced = apply(lam, p.tensor(r))
        add("output_matches", tuple(produced) == tuple(t.flatten(validate=False)),
            "Λ(p⊗r) differs from t'")
    else:
        add("output_matches", False, "joint or channel has the wrong shape")

    if t_ok:
        first, second = marginals(t)
        expected_first = pp if instance.mode == "exact" else cert.p_prime_eps
        add("marginal_target", tuple(first) == tuple(expected_first),
            "first marginal of t' is not the (perturbed) target")
        add("marginal_catalyst", tuple(second) == tuple(r), "second marginal of t' is not r")
    else:
        add("marginal_target", False, "joint has the wrong shape")
        add("marginal_catalyst", False, "joint has the wrong shape")

    if shape_ok and eta_ok:
        lhs = apply(lam, q.tensor(eta))
        add("q_side_exact", tuple(lhs) == tuple(qp.tensor(eta)), "Λ(q⊗η) != q'⊗η")
    else:
        add("q_side_exact", False, "cannot evaluate Λ(q⊗η)")

    target = pp if instance.mode == "exact" else cert.p_prime_eps
    if t_ok and r_ok and target.defect() is None and t.flatten(validate=False).defect() is None:
        corr = relative_entropy(t.flatten(validate=False), target.tensor(r))
        add("correlation_bound", corr <= float(instance.gamma),
            f"D(t'||p'⊗r) = {corr!r} vs gamma = {float(instance.gamma)!r}", always=True)
    else:
        add("correlation_bound", False, "joint or target is not a distribution")

    if instance.mode != "exact":
        pe = cert.p_prime_eps
        if pe.exact and len(pe) == k and pe.defect() is None:
            dist = trace_distance(pp, pe)
            eps = Fraction(repr(instance.epsilon)) if isinstance(instance.epsilon, float) \
                else Fraction(instance.epsilon)
            add("target_closeness", dist <= eps, f"½‖p'−p'_ε‖₁ = {float(dist)!r}", always=True)
        else:
            add("target_closeness", False, "p'_ε is not an exact distribution")
    if instance.mode == "unital":
        if shape_ok:
            u = Distribution.uniform(k * m)
            add("unital", tuple(apply(lam, u)) == tuple(u), "Λ does not preserve uniform")
        else:
            add("unital", False, "channel has the wrong shape")
    return VerificationReport(checks)


# -- converse audit -------------------------------------------------------------

@dataclass(frozen=True)
class AuditLink:
    alpha: float
    name: str
    slack: float


@dataclass
class AuditReport:
    verification: VerificationReport
    links: list
    decomposition_residual: float | None

    @property
    def slacks_ok(self) -> bool:
        return all(l.slack >= -TOL.inequality_slack for l in self.links)

    @property
    def accepted(self) -> bool:
        return self.verification.passed and self.slacks_ok


def converse_audit(instance: ConversionInstance, cert: ConversionCertificate,
                   alphas: Sequence[float] = (0.0, 1.0)) -> AuditReport:
    """Recompute the converse chain on a certificate and report every link's slack.

    Links per order: additivity (equality), data processing through ``Λ``,
    the exact q-side substitution (equality), and superadditivity of the
    output joint.
    """
    verification = verify_certificate(instance, cert)
    p, q, pp, qp = instance.exact_parts()
    r, eta, lam, t = cert.catalyst_r, cert.eta, cert.channel, cert.joint_t_prime
    target = pp if instance.mode == "exact" else cert.p_prime_eps
    links: list[AuditLink] = []
    residual = None
    try:
        pr, qe = p.tensor(r), q.tensor(eta)
        out_p, out_q = apply(lam, pr), apply(lam, qe)
    except (DimensionError, ValueError):
        return AuditReport(verification, [AuditLink(math.nan, "shape", -math.inf)], None)
    for a in alphas:
        d_src = renyi_divergence(a, p, q)
        d_cat = renyi_divergence(a, r, eta)
        d_joint_in = renyi_divergence(a, pr, qe)
        d_out = renyi_divergence(a, out_p, out_q)
        d_sub = renyi_divergence(a, t.flatten(validate=False), qp.tensor(eta))
        gap = superadditivity_gap(a, t, qp, eta) if a in (0.0, 1.0) else math.nan
        links.append(AuditLink(a, "additivity", -abs(d_src + d_cat - d_joint_in)))
        links.append(AuditLink(a, "data_processing", _minus(d_joint_in, d_out)))
        links.append(AuditLink(a, "q_side_substitution", -abs(_minus(d_out, d_sub))
                               if math.isfinite(d_out) or math.isfinite(d_sub) else 0.0))
        links.append(AuditLink(a, "superadditivity", gap))
        if a == 1.0:
            total = _minus(d_src, relative_entropy(target, qp))
            dp = _minus(d_joint_in, d_out)
            if all(math.isfinite(x) for x in (total, dp, gap)):
                residual = abs(dp + gap - total)
    return AuditReport(verification, links, residual)


def _minus(a: float, b: float) -> float:
    if math.isinf(a) and math.isinf(b) and a == b:
        return 0.0
    return a - b
