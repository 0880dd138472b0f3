"""JSON codecs for instances, channels and certificates.

Exact rationals are written as ``"num/den"`` strings and infinities as
``"inf"`` / ``"-inf"``.  Floats are written as JSON numbers, which
round-trip bit for bit.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any

from .catalysis import ConversionCertificate, ConversionInstance
from .core import Distribution, JointDistribution, StochasticChannel
from .relmaj import DistPair

CERTIFICATE_FORMAT = "catrelmaj-certificate"
CERTIFICATE_VERSION = 1
BACKENDS = ("rational", "float", "mixed")


class InstanceError(ValueError):
    """Malformed input document; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"field '{path}': {message}")
        self.path = path


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError("<document>", f"invalid JSON at line {exc.lineno} column "
                                          f"{exc.colno}: {exc.msg}") from None


# -- scalars --------------------------------------------------------------------

def scalar_to_json(x: Any) -> Any:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return f"{x}/1"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x + 0.0      # folds -0.0 into 0.0
    return x


def scalar_from_json(v: Any, path: str, backend: str = "mixed"):
    """Strings parse as exact rationals; numbers follow the backend."""
    if isinstance(v, bool) or v is None:
        raise InstanceError(path, f"expected a number, got {v!r}")
    if isinstance(v, str):
        s = v.strip()
        if s in ("inf", "+inf", "-inf", "nan"):
            return float(s)
        try:
            value = Fraction(s)
        except (ValueError, ZeroDivisionError):
            raise InstanceError(path, f"cannot parse {v!r} as a rational") from None
        return float(value) if backend == "float" else value
    if isinstance(v, (int, float)):
        if backend == "rational" or isinstance(v, int) and backend != "float":
            return Fraction(str(v)) if isinstance(v, float) else Fraction(v)
        return float(v)
    raise InstanceError(path, f"expected a number, got {type(v).__name__}")


def distribution_to_json(p: Distribution) -> list:
    return [scalar_to_json(w) for w in p]


def distribution_from_json(obj: Any, path: str, backend: str = "mixed") -> Distribution:
    if not isinstance(obj, list) or not obj:
        raise InstanceError(path, "expected a non-empty array")
    vals = tuple(scalar_from_json(v, f"{path}[{i}]", backend) for i, v in enumerate(obj))
    for i, v in enumerate(vals):
        if v < 0:
            raise InstanceError(f"{path}[{i}]", "negative weight")
    if any(isinstance(v, float) for v in vals) and not all(isinstance(v, float) for v in vals):
        vals = tuple(float(v) for v in vals)
    d = Distribution(vals, validate=False)
    problem = d.defect()
    if problem:
        raise InstanceError(path, problem)
    return d


def channel_to_json(c: StochasticChannel) -> dict:
    return {"orientation": "output-major",
            "rows": [[scalar_to_json(v) for v in row] for row in c.entries]}


def channel_from_json(obj: Any, path: str) -> StochasticChannel:
    if not isinstance(obj, dict) or "rows" not in obj:
        raise InstanceError(path, "expected an object with 'rows'")
    if obj.get("orientation", "output-major") != "output-major":
        raise InstanceError(f"{path}.orientation", "only output-major channels are supported")
    rows = obj["rows"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InstanceError(f"{path}.rows", "expected a non-empty array of arrays")
    width = len(rows[0])
    if width == 0 or any(len(r) != width for r in rows):
        raise InstanceError(f"{path}.rows", "rows have unequal or zero length")
    entries = tuple(tuple(scalar_from_json(v, f"{path}.rows[{j}][{i}]") for i, v in enumerate(r))
                    for j, r in enumerate(rows))
    return StochasticChannel(entries, validate=False)


def joint_to_json(t: JointDistribution) -> dict:
    return {"shape": list(t.shape),
            "rows": [[scalar_to_json(v) for v in row] for row in t.weights]}


def joint_from_json(obj: Any, path: str) -> JointDistribution:
    if not isinstance(obj, dict) or "rows" not in obj:
        raise InstanceError(path, "expected an object with 'rows'")
    rows = obj["rows"]
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) and r for r in rows):
        raise InstanceError(f"{path}.rows", "expected a non-empty array of arrays")
    if len({len(r) for r in rows}) != 1:
        raise InstanceError(f"{path}.rows", "rows have unequal length")
    weights = tuple(tuple(scalar_from_json(v, f"{path}.rows[{a}][{b}]") for b, v in enumerate(r))
                    for a, r in enumerate(rows))
    return JointDistribution(weights, validate=False)


# -- instances ------------------------------------------------------------------

def _backend_of(values) -> str:
    kinds = {isinstance(v, float) for v in values}
    if kinds == {False}:
        return "rational"
    if kinds == {True}:
        return "float"
    return "mixed"


def parse_distributions(obj: Any, required=("p", "q")) -> tuple[dict, str]:
    """Distributions present in an instance document, keyed by field name."""
    if not isinstance(obj, dict):
        raise InstanceError("<document>", "expected a JSON object")
    backend = obj.get("backend", "rational")
    if backend not in BACKENDS:
        raise InstanceError("backend", f"expected one of {', '.join(BACKENDS)}")
    out = {}
    for key in ("p", "q", "p_prime", "q_prime"):
        if key in obj:
            out[key] = distribution_from_json(obj[key], key, backend)
        elif key in required:
            raise InstanceError(key, "missing")
    sizes = {len(d) for d in out.values()}
    if len(sizes) > 1:
        raise InstanceError("p", "all distributions must share one alphabet size")
    return out, backend


def instance_from_json(obj: Any) -> ConversionInstance:
    if not isinstance(obj, dict):
        raise InstanceError("<document>", "expected a JSON object")
    mode = obj.get("mode", "approximate" if obj.get("epsilon") is not None else "exact")
    if mode not in ("exact", "approximate", "unital"):
        raise InstanceError("mode", f"unknown mode {mode!r}")
    required = ("p", "p_prime") if mode == "unital" else ("p", "q", "p_prime", "q_prime")
    dists, backend = parse_distributions(obj, required)
    if "gamma" not in obj:
        raise InstanceError("gamma", "missing")
    gamma = scalar_from_json(obj["gamma"], "gamma", backend)
    if not gamma > 0 or gamma == math.inf:
        raise InstanceError("gamma", "must be a positive finite number")
    epsilon = None
    if mode != "exact":
        if obj.get("epsilon") is None:
            raise InstanceError("epsilon", f"required in {mode} mode")
        epsilon = scalar_from_json(obj["epsilon"], "epsilon", backend)
        if not 0 < epsilon < 1:
            raise InstanceError("epsilon", "must lie in (0, 1)")
    elif obj.get("epsilon") is not None:
        raise InstanceError("epsilon", "not allowed in exact mode")
    p, pp = dists["p"], dists["p_prime"]
    if mode == "unital":
        k = len(p)
        for key in ("q", "q_prime"):
            if key in dists and any(float(w) != 1 / k for w in dists[key]):
                raise InstanceError(key, "unital mode fixes q and q' to the uniform distribution")
        return ConversionInstance.unital(p, pp, gamma, epsilon)
    return ConversionInstance(DistPair(p, dists["q"]), DistPair(pp, dists["q_prime"]),
                              gamma, epsilon, mode)


def instance_to_json(inst: ConversionInstance) -> dict:
    parts = {"p": inst.source.p, "q": inst.source.q,
             "p_prime": inst.target.p, "q_prime": inst.target.q}
    values = [w for d in parts.values() for w in d] + [inst.gamma]
    if inst.epsilon is not None:
        values.append(inst.epsilon)
    out = {key: distribution_to_json(d) for key, d in parts.items()}
    out.update(mode=inst.mode, backend=_backend_of(values), gamma=scalar_to_json(inst.gamma))
    if inst.epsilon is not None:
        out["epsilon"] = scalar_to_json(inst.epsilon)
    return out


# -- certificates ---------------------------------------------------------------

def plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    return scalar_to_json(obj) if isinstance(obj, (Fraction, float)) else obj


def certificate_to_json(cert: ConversionCertificate) -> dict:
    return {
        "format": CERTIFICATE_FORMAT,
        "version": CERTIFICATE_VERSION,
        "instance": instance_to_json(cert.instance),
        "catalyst_r": distribution_to_json(cert.catalyst_r),
        "eta": distribution_to_json(cert.eta),
        "joint_t_prime": joint_to_json(cert.joint_t_prime),
        "channel": channel_to_json(cert.channel),
        "p_prime_eps": distribution_to_json(cert.p_prime_eps),
        "achieved_gamma": scalar_to_json(float(cert.achieved_gamma)),
        "achieved_epsilon": scalar_to_json(Fraction(cert.achieved_epsilon)),
        "search_log": plain(cert.search_log),
    }


def _loose_distribution(obj: Any, path: str) -> Distribution:
    if not isinstance(obj, list) or not obj:
        raise InstanceError(path, "expected a non-empty array")
    return Distribution(tuple(scalar_from_json(v, f"{path}[{i}]") for i, v in enumerate(obj)),
                        validate=False)


def certificate_from_json(obj: Any) -> ConversionCertificate:
    """Rebuild a certificate without judging it; validity is the verifier's job."""
    if not isinstance(obj, dict):
        raise InstanceError("<document>", "expected a JSON object")
    if obj.get("format") != CERTIFICATE_FORMAT:
        raise InstanceError("format", f"expected {CERTIFICATE_FORMAT!r}")
    if obj.get("version") != CERTIFICATE_VERSION:
        raise InstanceError("version", f"unsupported version {obj.get('version')!r}")
    for key in ("instance", "catalyst_r", "eta", "joint_t_prime", "channel", "p_prime_eps"):
        if key not in obj:
            raise InstanceError(key, "missing")
    try:
        instance = instance_from_json(obj["instance"])
    except InstanceError as exc:
        raise InstanceError(f"instance.{exc.path}", str(exc).split(": ", 1)[1]) from None
    except ValueError as exc:
        raise InstanceError("instance", str(exc)) from None
    return ConversionCertificate(
        instance=instance,
        catalyst_r=_loose_distribution(obj["catalyst_r"], "catalyst_r"),
        eta=_loose_distribution(obj["eta"], "eta"),
        joint_t_prime=joint_from_json(obj["joint_t_prime"], "joint_t_prime"),
        channel=channel_from_json(obj["channel"], "channel"),
        p_prime_eps=_loose_distribution(obj["p_prime_eps"], "p_prime_eps"),
        achieved_gamma=float(scalar_from_json(obj.get("achieved_gamma", "nan"), "achieved_gamma")),
        achieved_epsilon=scalar_from_json(obj.get("achieved_epsilon", "0/1"), "achieved_epsilon"),
        search_log=obj.get("search_log", {}),
    )
