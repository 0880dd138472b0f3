"""Command-line front end.

Exit codes:
  divergence  0 ok, 2 input error
  check       0 condition holds, 1 condition fails, 2 input or hypothesis error
  relmaj      0 majorized, 1 not majorized, 2 input error, 3 methods disagree
  catalyze    0 certificate found, 1 inconclusive, 2 condition false or input error
  verify      0 pass, 1 fail, 2 unreadable certificate
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import Callable, Sequence

from . import __version__
from .catalysis import (ConditionError, HypothesisError, check_conditions, converse_audit,
                        verify_certificate)
from .core import DimensionError, InvalidDistributionError
from .divergence import STANDARD_ALPHAS, as_order, renyi_divergence, renyi_entropy
from .relmaj import DistPair, blackwell_criterion, relatively_majorizes
from .search import DEFAULT_BUDGET, DEFAULT_MAX_DIM, run_search
from .serialize import (InstanceError, certificate_from_json, certificate_to_json,
                        channel_to_json, dumps, instance_from_json, instance_to_json, loads,
                        parse_distributions, plain, scalar_to_json)

EXIT_OK, EXIT_NO, EXIT_ERROR, EXIT_DISAGREE = 0, 1, 2, 3


class _Failure(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code, self.kind = code, kind


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Failure(EXIT_ERROR, "io", f"{path}: {exc.strerror}") from None


def _load(path: str):
    try:
        return loads(_read(path))
    except InstanceError as exc:
        raise _Failure(EXIT_ERROR, "parse", str(exc)) from None


def _instance(path: str):
    try:
        return instance_from_json(_load(path))
    except InstanceError as exc:
        raise _Failure(EXIT_ERROR, "parse", str(exc)) from None
    except (ValueError, DimensionError, InvalidDistributionError) as exc:
        raise _Failure(EXIT_ERROR, "invalid", str(exc)) from None


def _alphas(text: str | None) -> list[float]:
    if not text:
        return list(STANDARD_ALPHAS)
    try:
        return [as_order(a.strip()) for a in text.split(",") if a.strip()]
    except ValueError as exc:
        raise _Failure(EXIT_ERROR, "parse", f"--alpha: {exc}") from None


def _j(x):
    return scalar_to_json(x)


# -- subcommands ----------------------------------------------------------------

def cmd_divergence(args) -> tuple[int, dict]:
    try:
        dists, _ = parse_distributions(_load(args.file))
    except InstanceError as exc:
        raise _Failure(EXIT_ERROR, "parse", str(exc)) from None
    table = []
    for a in _alphas(args.alpha):
        row = {"alpha": _j(a),
               "D(p||q)": _j(renyi_divergence(a, dists["p"], dists["q"])),
               "H(p)": _j(renyi_entropy(a, dists["p"]))}
        if "p_prime" in dists and "q_prime" in dists:
            row["D(p'||q')"] = _j(renyi_divergence(a, dists["p_prime"], dists["q_prime"]))
        if "p_prime" in dists:
            row["H(p')"] = _j(renyi_entropy(a, dists["p_prime"]))
        table.append(row)
    return EXIT_OK, {"table": table}


def cmd_check(args) -> tuple[int, dict]:
    inst = _instance(args.file)
    try:
        report = check_conditions(inst)
    except HypothesisError as exc:
        raise _Failure(EXIT_ERROR, f"hypothesis:{exc.kind}", str(exc)) from None
    values = {k: ([_j(x) for x in v] if isinstance(v, tuple) else _j(v))
              for k, v in report.values.items()}
    return (EXIT_OK if report.verdict else EXIT_NO), {
        "mode": inst.mode, "verdict": report.verdict, "values": values}


def cmd_relmaj(args) -> tuple[int, dict]:
    inst_obj = _load(args.file)
    try:
        dists, _ = parse_distributions(inst_obj, ("p", "q", "p_prime", "q_prime"))
        source = DistPair(dists["p"], dists["q"])
        target = DistPair(dists["p_prime"], dists["q_prime"])
    except InstanceError as exc:
        raise _Failure(EXIT_ERROR, "parse", str(exc)) from None
    lp = relatively_majorizes(source, target)
    blackwell = blackwell_criterion(source, target)
    out = {"lp": lp.feasible, "blackwell": blackwell}
    if lp.feasible != blackwell:
        out["error"] = {"kind": "disagreement", "message": "LP and testing-region verdicts differ"}
        return EXIT_DISAGREE, out
    if args.emit_witness and lp.witness is not None:
        out["witness"] = channel_to_json(lp.witness)
    return (EXIT_OK if lp.feasible else EXIT_NO), out


def cmd_catalyze(args) -> tuple[int, dict]:
    inst = _instance(args.file)
    try:
        result = run_search(inst, args.max_dim, args.budget, args.threads)
    except HypothesisError as exc:
        raise _Failure(EXIT_ERROR, f"hypothesis:{exc.kind}", str(exc)) from None
    except ConditionError as exc:
        raise _Failure(EXIT_ERROR, "condition", str(exc)) from None
    out = {"instance": instance_to_json(inst), "status": result.status,
           "search_log": plain(result.log)}
    if result.certificate is None:
        return EXIT_NO, out
    cert = result.certificate
    report = verify_certificate(inst, cert)
    out["verification"] = _checks_json(report)
    blob = certificate_to_json(cert)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dumps(blob))
        out["certificate_file"] = args.out
    else:
        out["certificate"] = blob
    return (EXIT_OK if report.passed else EXIT_NO), out


def _checks_json(report) -> dict:
    return {"passed": report.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in report.checks]}


def cmd_verify(args) -> tuple[int, dict]:
    try:
        cert = certificate_from_json(_load(args.file))
    except InstanceError as exc:
        raise _Failure(EXIT_ERROR, "parse", str(exc)) from None
    except (ValueError, DimensionError, InvalidDistributionError) as exc:
        raise _Failure(EXIT_ERROR, "invalid", str(exc)) from None
    audit = converse_audit(cert.instance, cert)
    out = _checks_json(audit.verification)
    out["failed"] = audit.verification.failed
    out["audit"] = {
        "links": [{"alpha": _j(l.alpha), "link": l.name, "slack": _j(l.slack)}
                  for l in audit.links],
        "slacks_ok": audit.slacks_ok,
        "decomposition_residual": _j(audit.decomposition_residual),
    }
    passed = audit.accepted
    out["passed"] = passed
    if not passed:
        names = audit.verification.failed or ["converse_audit"]
        print("verification failed: " + ", ".join(names), file=sys.stderr)
    return (EXIT_OK if passed else EXIT_NO), out


# -- wiring -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catrelmaj",
                                     description="Catalytic relative majorization toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="recorded in the report (default 0)")
    common.add_argument("--timing", action="store_true", help="include wall-clock timing")
    common.add_argument("--out", help="write the certificate here (catalyze)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", parents=[common], help="Rényi divergence and entropy table")
    p.add_argument("file", help="instance JSON, or - for stdin")
    p.add_argument("--alpha", help="comma-separated orders, e.g. -inf,0,0.5,1,2,inf")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("check", parents=[common], help="evaluate the conversion condition")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("relmaj", parents=[common], help="decide relative majorization")
    p.add_argument("file")
    p.add_argument("--emit-witness", action="store_true")
    p.set_defaults(func=cmd_relmaj)

    p = sub.add_parser("catalyze", parents=[common], help="search for a catalytic certificate")
    p.add_argument("file")
    p.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="LP oracle call cap")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_catalyze)

    p = sub.add_parser("verify", parents=[common], help="re-check a certificate")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func: Callable = args.func
    start = time.perf_counter()
    header = {"tool": "catrelmaj", "version": __version__, "command": args.command,
              "seed": args.seed}
    try:
        code, body = func(args)
    except _Failure as exc:
        code, body = exc.code, {"error": {"kind": exc.kind, "message": str(exc)}}
        print(f"error: {exc}", file=sys.stderr)
    report = {**header, **body, "exit_code": code}
    if args.timing:
        report["timing"] = {"seconds": time.perf_counter() - start}
    sys.stdout.write(dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
