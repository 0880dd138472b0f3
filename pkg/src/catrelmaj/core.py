"""Distributions, stochastic channels and their algebra.

Two scalar backends coexist: ``fractions.Fraction`` (exact) and ``float``.
A container is exact when every entry is a Fraction; any float entry turns
the whole container into float64.  Channels are stored output-major:
``entries[j][i] = P(j | i)`` so every column sums to one.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .config import TOL

Scalar = Union[Fraction, float]


class DimensionError(ValueError):
    """Operands live on alphabets of incompatible sizes."""


class InvalidDistributionError(ValueError):
    pass


class InvalidChannelError(ValueError):
    pass


# -- scalars -----------------------------------------------------------------

def parse_scalar(value) -> Scalar:
    """Read a JSON-ish scalar: ``"3/4"`` and ints are exact, floats stay float."""
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        text = value.strip()
        if text.lower() in ("inf", "+inf", "-inf", "nan"):
            raise ValueError(f"non-finite scalar {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot interpret {value!r} as a scalar")


def exact(value) -> Fraction:
    """Exact rational value of a scalar; a float maps to its binary value."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, float)):
        return Fraction(value)
    return Fraction(parse_scalar(value))


def rationalize(value, max_denominator: int = TOL.rationalize_max_denominator) -> Fraction:
    """Continued-fraction rounding of a float to a nearby small-denominator rational."""
    if isinstance(value, Fraction):
        return value
    return Fraction(value).limit_denominator(max_denominator)


def is_exact_seq(values: Iterable) -> bool:
    return all(isinstance(v, Fraction) for v in values)


def _coerce(values: Sequence) -> tuple:
    vals = [parse_scalar(v) if not isinstance(v, (Fraction, float)) else v for v in values]
    if any(isinstance(v, float) for v in vals):
        return tuple(float(v) for v in vals)
    return tuple(vals)


def _zero(exact_backend: bool) -> Scalar:
    return Fraction(0) if exact_backend else 0.0


def _close(a: Scalar, b: Scalar, tol: float = TOL.equality) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= tol


# -- distributions ------------------------------------------------------------

@dataclass(frozen=True)
class Distribution:
    """Probability vector over ``range(len(weights))``; zero-mass letters are kept."""

    weights: tuple
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        object.__setattr__(self, "weights", _coerce(self.weights))
        if not self.weights:
            raise InvalidDistributionError("empty distribution")
        if validate:
            problem = self.defect()
            if problem:
                raise InvalidDistributionError(problem)

    @classmethod
    def of(cls, values: Iterable, *, exact_backend: bool | None = None) -> "Distribution":
        vals = [parse_scalar(v) for v in values]
        if exact_backend is True:
            vals = [exact(v) for v in vals]
        elif exact_backend is False:
            vals = [float(v) for v in vals]
        return cls(tuple(vals))

    @classmethod
    def uniform(cls, k: int, *, exact_backend: bool = True) -> "Distribution":
        w = Fraction(1, k) if exact_backend else 1.0 / k
        return cls((w,) * k)

    @classmethod
    def point(cls, k: int, index: int = 0, *, exact_backend: bool = True) -> "Distribution":
        one, zero = (Fraction(1), Fraction(0)) if exact_backend else (1.0, 0.0)
        return cls(tuple(one if i == index else zero for i in range(k)))

    def defect(self) -> str | None:
        """Reason the weights are not a probability vector, or None."""
        if any(w < 0 for w in self.weights):
            return "negative weight"
        if any(isinstance(w, float) and not math.isfinite(w) for w in self.weights):
            return "non-finite weight"
        total = sum(self.weights) if self.exact else math.fsum(self.weights)
        if not _close(total, Fraction(1)):
            return f"weights sum to {total}, not 1"
        return None

    @property
    def exact(self) -> bool:
        return is_exact_seq(self.weights)

    @property
    def alphabet_size(self) -> int:
        return len(self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    def support(self, tol: float = TOL.support) -> tuple[int, ...]:
        if self.exact:
            return tuple(i for i, w in enumerate(self.weights) if w != 0)
        return tuple(i for i, w in enumerate(self.weights) if w > tol)

    def is_full_rank(self) -> bool:
        return len(self.support()) == len(self)

    def to_float(self) -> "Distribution":
        return Distribution(tuple(float(w) for w in self.weights))

    def to_exact(self) -> "Distribution":
        """Exact copy; float weights keep their binary value and are renormalized."""
        vals = [exact(w) for w in self.weights]
        total = sum(vals)
        return Distribution(tuple(v / total for v in vals))

    def floats(self) -> list[float]:
        return [float(w) for w in self.weights]

    def tensor(self, other: "Distribution") -> "Distribution":
        return Distribution(tuple(a * b for a in self.weights for b in other.weights))

    def mix(self, other: "Distribution", delta) -> "Distribution":
        """``(1 - delta) * self + delta * other``."""
        if len(self) != len(other):
            raise DimensionError("mixing distributions of different sizes")
        return Distribution(tuple((1 - delta) * a + delta * b
                                  for a, b in zip(self.weights, other.weights)))

    def permuted(self, perm: Sequence[int]) -> "Distribution":
        """Distribution whose letter ``i`` carries ``self[perm[i]]``."""
        return Distribution(tuple(self.weights[j] for j in perm))

    def descending(self) -> tuple:
        """Weights sorted descending; ties keep original index order."""
        order = sorted(range(len(self)), key=lambda i: (-self.weights[i], i))
        return tuple(self.weights[i] for i in order)


# -- channels ---------------------------------------------------------------

@dataclass(frozen=True)
class StochasticChannel:
    """Column-stochastic matrix ``entries[output][input]``."""

    entries: tuple
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        rows = [tuple(r) for r in self.entries]
        if not rows or not rows[0]:
            raise InvalidChannelError("empty channel")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise InvalidChannelError("ragged channel matrix")
        flat = _coerce([v for r in rows for v in r])
        object.__setattr__(self, "entries",
                           tuple(flat[j * width:(j + 1) * width] for j in range(len(rows))))
        if validate:
            problem = self.defect()
            if problem:
                raise InvalidChannelError(problem)

    @classmethod
    def identity(cls, n: int, *, exact_backend: bool = True) -> "StochasticChannel":
        one, zero = (Fraction(1), Fraction(0)) if exact_backend else (1.0, 0.0)
        return cls(tuple(tuple(one if i == j else zero for i in range(n)) for j in range(n)))

    @classmethod
    def permutation(cls, perm: Sequence[int], *, exact_backend: bool = True) -> "StochasticChannel":
        """Channel sending input letter ``i`` to output letter ``perm[i]``."""
        n = len(perm)
        one, zero = (Fraction(1), Fraction(0)) if exact_backend else (1.0, 0.0)
        rows = [[zero] * n for _ in range(n)]
        for i, j in enumerate(perm):
            rows[j][i] = one
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence]) -> "StochasticChannel":
        return cls(tuple(zip(*columns)))

    @property
    def out_size(self) -> int:
        return len(self.entries)

    @property
    def in_size(self) -> int:
        return len(self.entries[0])

    @property
    def exact(self) -> bool:
        return all(is_exact_seq(r) for r in self.entries)

    def column(self, i: int) -> tuple:
        return tuple(r[i] for r in self.entries)

    def column_sums(self) -> list:
        return [sum(r[i] for r in self.entries) for i in range(self.in_size)]

    def row_sums(self) -> list:
        return [sum(r) for r in self.entries]

    def defect(self) -> str | None:
        for j, row in enumerate(self.entries):
            for i, v in enumerate(row):
                if v < 0:
                    return f"negative entry at [{j}][{i}]"
        for i, s in enumerate(self.column_sums()):
            if not _close(s, Fraction(1)):
                return f"input column {i} sums to {s}"
        return None

    def is_doubly_stochastic(self) -> bool:
        if self.in_size != self.out_size or self.defect():
            return False
        return all(_close(s, Fraction(1)) for s in self.row_sums())

    def to_float(self) -> "StochasticChannel":
        return StochasticChannel(tuple(tuple(float(v) for v in r) for r in self.entries))

    def __call__(self, p: Distribution) -> Distribution:
        return apply(self, p)

    def __matmul__(self, other: "StochasticChannel") -> "StochasticChannel":
        return compose(self, other)


def apply(channel: StochasticChannel, p: Distribution) -> Distribution:
    if channel.in_size != len(p):
        raise DimensionError(f"channel expects {channel.in_size} letters, got {len(p)}")
    ex = channel.exact and p.exact
    out = []
    for row in channel.entries:
        acc = _zero(ex)
        for v, w in zip(row, p.weights):
            if v and w:
                acc += v * w
        out.append(acc)
    if not ex:
        out = [float(x) for x in out]
    return Distribution(tuple(out), validate=False)


def compose(a: StochasticChannel, b: StochasticChannel) -> StochasticChannel:
    """``a ∘ b``: apply ``b`` first, then ``a``."""
    if a.in_size != b.out_size:
        raise DimensionError(f"cannot compose: {a.in_size} != {b.out_size}")
    ex = a.exact and b.exact
    zero = _zero(ex)
    out = [[zero] * b.in_size for _ in range(a.out_size)]
    a_cols = [[(j, a.entries[j][l]) for j in range(a.out_size) if a.entries[j][l]]
              for l in range(a.in_size)]
    for l, brow in enumerate(b.entries):
        nz = [(i, v) for i, v in enumerate(brow) if v]
        if not nz:
            continue
        for j, ajl in a_cols[l]:
            row = out[j]
            for i, v in nz:
                row[i] += ajl * v
    return StochasticChannel(tuple(tuple(r) for r in out), validate=False)


def tensor(a: StochasticChannel, b: StochasticChannel) -> StochasticChannel:
    """Kronecker product; letter ``(x, y)`` has index ``x * |B| + y``."""
    rows = []
    for ra in a.entries:
        for rb in b.entries:
            rows.append(tuple(x * y for x in ra for y in rb))
    return StochasticChannel(tuple(rows), validate=False)


def direct_sum(a: StochasticChannel, b: StochasticChannel) -> StochasticChannel:
    ex = a.exact and b.exact
    zero = _zero(ex)
    rows = [tuple(r) + (zero,) * b.in_size for r in a.entries]
    rows += [(zero,) * a.in_size + tuple(r) for r in b.entries]
    return StochasticChannel(tuple(rows), validate=False)


# -- joint distributions ----------------------------------------------------

@dataclass(frozen=True)
class JointDistribution:
    """Distribution on a product alphabet ``A x B``, stored as an ``|A| x |B|`` matrix."""

    weights: tuple
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        rows = [tuple(r) for r in self.weights]
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise InvalidDistributionError("ragged joint distribution")
        flat = _coerce([v for r in rows for v in r])
        object.__setattr__(self, "weights",
                           tuple(flat[a * width:(a + 1) * width] for a in range(len(rows))))
        if validate:
            problem = self.flatten(validate=False).defect()
            if problem:
                raise InvalidDistributionError(problem)

    @classmethod
    def from_flat(cls, flat: Distribution, size_a: int, size_b: int,
                  validate: bool = True) -> "JointDistribution":
        if len(flat) != size_a * size_b:
            raise DimensionError(f"{len(flat)} letters cannot be shaped {size_a}x{size_b}")
        w = flat.weights
        return cls(tuple(w[a * size_b:(a + 1) * size_b] for a in range(size_a)), validate=validate)

    @classmethod
    def product(cls, p: Distribution, r: Distribution) -> "JointDistribution":
        return cls(tuple(tuple(x * y for y in r.weights) for x in p.weights))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.weights), len(self.weights[0])

    @property
    def exact(self) -> bool:
        return all(is_exact_seq(r) for r in self.weights)

    def flatten(self, validate: bool = True) -> Distribution:
        return Distribution(tuple(v for r in self.weights for v in r), validate=validate)


def marginals(t: JointDistribution) -> tuple[Distribution, Distribution]:
    first = tuple(sum(r) for r in t.weights)
    second = tuple(sum(r[b] for r in t.weights) for b in range(t.shape[1]))
    return Distribution(first, validate=False), Distribution(second, validate=False)


def _check_same(p: Distribution, q: Distribution) -> None:
    if len(p) != len(q):
        raise DimensionError(f"alphabet sizes differ: {len(p)} vs {len(q)}")


def trace_distance(p: Distribution, q: Distribution) -> Scalar:
    """``½ Σ |p_i - q_i|``; exact when both inputs are exact."""
    _check_same(p, q)
    if p.exact and q.exact:
        return sum((abs(a - b) for a, b in zip(p, q)), Fraction(0)) / 2
    return 0.5 * math.fsum(abs(float(a) - float(b)) for a, b in zip(p, q))


def trace_distance_one_sided(p: Distribution, q: Distribution) -> Scalar:
    """``Σ_{i: p_i > q_i} (p_i - q_i)``, which equals the trace distance."""
    _check_same(p, q)
    if p.exact and q.exact:
        return sum((a - b for a, b in zip(p, q) if a > b), Fraction(0))
    return math.fsum(float(a) - float(b) for a, b in zip(p, q) if a > b)


def same(p: Distribution, q: Distribution, tol: float = TOL.equality) -> bool:
    """Equality: exact on the exact backend, ``tol`` entrywise otherwise."""
    if len(p) != len(q):
        return False
    return all(_close(a, b, tol) for a, b in zip(p, q))
