"""Exact-rational linear feasibility via phase-1 simplex with Bland's rule.

All variables are nonnegative.  Constraints are sparse rows
``Σ coeffs[j] x_j (== | <= | >=) rhs`` over ``Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

SENSES = ("==", "<=", ">=")


class LpError(ValueError):
    """Malformed linear program."""


@dataclass
class LpProblem:
    n_vars: int
    constraints: list = field(default_factory=list)

    def add(self, coeffs: Mapping[int, object], sense: str, rhs) -> None:
        if sense not in SENSES:
            raise LpError(f"unknown constraint sense {sense!r}")
        row = {}
        for j, v in coeffs.items():
            if not 0 <= j < self.n_vars:
                raise LpError(f"variable index {j} out of range")
            v = Fraction(v)
            if v:
                row[j] = row.get(j, Fraction(0)) + v
        self.constraints.append((row, sense, Fraction(rhs)))

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.n_vars or any(v < 0 for v in x):
            return False
        for row, sense, rhs in self.constraints:
            lhs = sum((v * x[j] for j, v in row.items()), Fraction(0))
            if sense == "==" and lhs != rhs:
                return False
            if sense == "<=" and lhs > rhs:
                return False
            if sense == ">=" and lhs < rhs:
                return False
        return True

    def to_json(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "constraints": [
                {"coeffs": {str(j): str(v) for j, v in sorted(row.items())},
                 "sense": sense, "rhs": str(rhs)}
                for row, sense, rhs in self.constraints
            ],
        }


@dataclass(frozen=True)
class LpOutcome:
    feasible: bool
    assignment: tuple | None = None
    pivots: int = 0


def lp_feasible(problem: LpProblem, max_pivots: int = 1_000_000) -> LpOutcome:
    """Decide ``{x >= 0 : constraints}`` exactly; feasible outcomes carry a vertex."""
    n = problem.n_vars
    rows: list[list[Fraction]] = []
    basis: list[int] = []
    n_slack = sum(1 for _, s, _ in problem.constraints if s != "==")
    n_rows = len(problem.constraints)
    width = n + n_slack + n_rows          # originals, slacks, artificials
    art0 = n + n_slack
    zero = Fraction(0)

    slack = n
    for i, (coeffs, sense, rhs) in enumerate(problem.constraints):
        row = [zero] * (width + 1)
        for j, v in coeffs.items():
            row[j] = v
        if sense == "<=":
            row[slack] = Fraction(1)
            slack += 1
        elif sense == ">=":
            row[slack] = Fraction(-1)
            slack += 1
        row[-1] = rhs
        if rhs < 0:
            row = [-v for v in row]
        row[art0 + i] = Fraction(1)
        rows.append(row)
        basis.append(art0 + i)

    # phase-1 objective: minimize the sum of artificials; store reduced costs
    obj = [zero] * (width + 1)
    for row in rows:
        for j in range(art0):
            if row[j]:
                obj[j] -= row[j]
        obj[-1] -= row[-1]

    pivots = 0
    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i, row in enumerate(rows):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            # phase-1 objective is bounded below by zero
            raise RuntimeError("unbounded phase-1 direction")
        _pivot(rows, obj, leave, enter)
        basis[leave] = enter
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("pivot limit exceeded")

    if obj[-1] != 0:
        return LpOutcome(False, None, pivots)
    x = [zero] * n
    for i, b in enumerate(basis):
        if b < n:
            x[b] = rows[i][-1]
    assignment = tuple(x)
    if not problem.satisfied_by(assignment):
        raise RuntimeError("simplex produced an assignment violating its constraints")
    return LpOutcome(True, assignment, pivots)


def _pivot(rows: list[list[Fraction]], obj: list[Fraction], r: int, c: int) -> None:
    prow = rows[r]
    a = prow[c]
    if a != 1:
        prow[:] = [v / a if v else v for v in prow]
    nz = [j for j, v in enumerate(prow) if v]
    for i, row in enumerate(rows):
        if i == r:
            continue
        f = row[c]
        if f:
            for j in nz:
                row[j] -= f * prow[j]
    f = obj[c]
    if f:
        for j in nz:
            obj[j] -= f * prow[j]
