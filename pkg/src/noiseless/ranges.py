"""Ranges of uncertain variables.

An uncertain variable is never materialized as a map on an uncertainty space;
everything downstream only needs its ranges. Finite ranges hold exact values
(ints, ``Fraction`` or hashable symbols), and one-dimensional continuous ranges
are finite unions of closed intervals with rational endpoints, so that every
cardinality and measure computed here is exact.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral, Rational, Real
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import DomainError, PreconditionError


def exact(value):
    """Convert a numeric value to an exact rational; symbols pass through.

    Floats are read through their shortest decimal representation, so
    ``exact(0.3) == Fraction(3, 10)``.
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, Integral):
        return int(value)
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"non-finite value {value!r} has no exact representation")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            return value
    return value


def is_number(value) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool)


def order_key(value):
    """Total order over the mixed values that can appear in a range."""
    if is_number(value):
        return (0, value)
    if isinstance(value, str):
        return (1, value)
    if isinstance(value, tuple):
        return (2, tuple(order_key(v) for v in value))
    return (3, repr(value))


def fmt(value) -> str:
    """Render an exact value for reports (``1/2``, ``3``, ``(0, 1/4)``)."""
    if isinstance(value, Fraction) and value.denominator == 1:
        return str(value.numerator)
    if isinstance(value, tuple):
        return "(" + ", ".join(fmt(v) for v in value) + ")"
    return str(value)


class FiniteRange:
    """An ordered set of distinct exact values.

    Iteration is in ``order_key`` order, which makes every enumeration built on
    top of a range reproducible.
    """

    __slots__ = ("_items", "_set")

    def __init__(self, elements: Iterable[Any] = ()):
        values = {exact(v) for v in elements}
        self._items = tuple(sorted(values, key=order_key))
        self._set = frozenset(self._items)

    def __iter__(self) -> Iterator[Any]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, value) -> bool:
        try:
            return exact(value) in self._set
        except (DomainError, TypeError):
            return False

    def __getitem__(self, index):
        return self._items[index]

    def __eq__(self, other) -> bool:
        if isinstance(other, FiniteRange):
            return self._set == other._set
        if isinstance(other, (set, frozenset)):
            return self._set == {exact(v) for v in other}
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._set)

    def __repr__(self) -> str:
        return "FiniteRange({" + ", ".join(fmt(v) for v in self._items) + "})"

    def __or__(self, other: FiniteRange) -> FiniteRange:
        return FiniteRange(itertools.chain(self._items, other))

    def __and__(self, other: FiniteRange) -> FiniteRange:
        return FiniteRange(v for v in self._items if v in other)

    def __sub__(self, other: FiniteRange) -> FiniteRange:
        return FiniteRange(v for v in self._items if v not in other)

    def __xor__(self, other: FiniteRange) -> FiniteRange:
        return (self - other) | (other - self)

    def isdisjoint(self, other: FiniteRange) -> bool:
        return self._set.isdisjoint(other._set)

    def as_set(self) -> frozenset:
        return self._set

    @property
    def is_numeric(self) -> bool:
        return all(is_number(v) for v in self._items)

    def lo(self):
        return min(self._items)

    def hi(self):
        return max(self._items)


@dataclass(frozen=True)
class IntervalUnion:
    """A finite union of closed intervals ``[lo, hi]`` on the real line.

    The representation is canonical: intervals are sorted, and overlapping or
    touching intervals are merged. Degenerate intervals ``[a, a]`` are points.
    """

    intervals: tuple[tuple[Fraction, Fraction], ...] = ()

    def __init__(self, intervals: Iterable[Sequence] = ()):
        pairs = []
        for pair in intervals:
            lo, hi = (exact(v) for v in pair)
            if not (is_number(lo) and is_number(hi)):
                raise DomainError(f"interval endpoints must be numeric, got {pair!r}")
            if lo > hi:
                raise DomainError(f"interval [{fmt(lo)}, {fmt(hi)}] has lo > hi")
            pairs.append((Fraction(lo), Fraction(hi)))
        pairs.sort()
        merged: list[list[Fraction]] = []
        for lo, hi in pairs:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        object.__setattr__(self, "intervals", tuple((a, b) for a, b in merged))

    @classmethod
    def interval(cls, lo, hi) -> IntervalUnion:
        return cls([(lo, hi)])

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __contains__(self, value) -> bool:
        try:
            v = exact(value)
        except DomainError:
            return False
        if not is_number(v):
            return False
        return any(lo <= v <= hi for lo, hi in self.intervals)

    def __or__(self, other: IntervalUnion) -> IntervalUnion:
        return IntervalUnion(self.intervals + other.intervals)

    def __repr__(self) -> str:
        body = " ∪ ".join(f"[{fmt(a)}, {fmt(b)}]" for a, b in self.intervals) or "∅"
        return f"IntervalUnion({body})"

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def measure(self) -> Fraction:
        """Lebesgue measure."""
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    def lo(self) -> Fraction:
        return self.intervals[0][0]

    def hi(self) -> Fraction:
        return self.intervals[-1][1]

    def affine_image(self, weight, shift=0) -> IntervalUnion:
        """The image ``{weight * x + shift : x in self}``."""
        w, s = Fraction(exact(weight)), Fraction(exact(shift))
        return IntervalUnion((w * a + s, w * b + s) for a, b in self.intervals)


def is_finite(domain) -> bool:
    return isinstance(domain, FiniteRange)


def domain_bounds(domain) -> tuple:
    """Smallest and largest element of a numeric domain."""
    if isinstance(domain, IntervalUnion):
        return domain.lo(), domain.hi()
    if not domain.is_numeric:
        raise PreconditionError("domain bounds need a numeric domain")
    return domain.lo(), domain.hi()


def as_pieces(domain) -> list[tuple[Fraction, Fraction]]:
    """A numeric domain as a list of closed intervals (points are degenerate)."""
    if isinstance(domain, IntervalUnion):
        return list(domain.intervals)
    if not domain.is_numeric:
        raise PreconditionError("interval arithmetic needs a numeric domain")
    return [(Fraction(v), Fraction(v)) for v in domain]


def grid_sample(iv: IntervalUnion, step) -> FiniteRange:
    """Discretize an interval union.

    Keeps ``lo, lo + step, ...`` inside every interval together with every
    interval endpoint.
    """
    step = exact(step)
    if not is_number(step) or step <= 0:
        raise PreconditionError(f"grid step must be positive, got {step!r}")
    points = []
    for lo, hi in iv.intervals:
        count = math.floor((hi - lo) / step)
        points.extend(lo + k * step for k in range(count + 1))
        points.append(hi)
    return FiniteRange(points)


def discretize(domain, step) -> FiniteRange:
    if isinstance(domain, FiniteRange):
        return domain
    if step is None:
        raise PreconditionError("continuous domain needs a grid step before it can be enumerated")
    return grid_sample(domain, step)


def product_range(domains: Sequence) -> Iterator[tuple]:
    """Lexicographic enumeration of the joint box of finite domains."""
    for d in domains:
        if not isinstance(d, FiniteRange):
            raise PreconditionError(
                "product_range needs finite domains; discretize continuous ones with grid_sample"
            )
    return itertools.product(*domains)


class JointRelation:
    """The joint range of two uncertain variables as a finite set of pairs."""

    def __init__(self, pairs: Iterable[tuple]):
        self.pairs = frozenset((exact(x), exact(y)) for x, y in pairs)
        if not self.pairs:
            raise PreconditionError("a joint range needs at least one pair")
        self.x_range = FiniteRange(x for x, _ in self.pairs)
        self.y_range = FiniteRange(y for _, y in self.pairs)
        by_y: dict = {}
        by_x: dict = {}
        for x, y in self.pairs:
            by_y.setdefault(y, []).append(x)
            by_x.setdefault(x, []).append(y)
        self._given_y = {y: FiniteRange(xs) for y, xs in by_y.items()}
        self._given_x = {x: FiniteRange(ys) for x, ys in by_x.items()}

    @classmethod
    def from_map(cls, domain: Iterable, fn: Callable) -> JointRelation:
        """Joint range of ``X`` and ``Y = fn(X)`` over a finite domain."""
        return cls((x, fn(x)) for x in domain)

    def given_y(self, y) -> FiniteRange:
        try:
            return self._given_y[exact(y)]
        except KeyError:
            raise DomainError(f"{fmt(y)} is not in the range of the second variable") from None

    def given_x(self, x) -> FiniteRange:
        try:
            return self._given_x[exact(x)]
        except KeyError:
            raise DomainError(f"{fmt(x)} is not in the range of the first variable") from None

    def transpose(self) -> JointRelation:
        return JointRelation((y, x) for x, y in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __repr__(self) -> str:
        return f"JointRelation({len(self.pairs)} pairs, |X|={len(self.x_range)}, |Y|={len(self.y_range)})"


def conditional_range(rel: JointRelation, y) -> FiniteRange:
    """``{x : (x, y) in rel}``."""
    return rel.given_y(y)


@dataclass(frozen=True)
class QuerySpec:
    """A scalar query over the dataset.

    ``kind`` is one of ``affine``, ``mean``, ``sum``, ``table`` or ``custom``.
    Mean and sum are affine queries whose weights depend on the group size.
    """

    kind: str
    weights: tuple = ()
    offset: Fraction = Fraction(0)
    table: Mapping | None = field(default=None, compare=False)
    function: Callable | None = field(default=None, compare=False)
    output_bounds: tuple | None = None

    @classmethod
    def mean(cls, output_bounds=None) -> QuerySpec:
        return cls("mean", output_bounds=_bounds(output_bounds))

    @classmethod
    def sum(cls, output_bounds=None) -> QuerySpec:
        return cls("sum", output_bounds=_bounds(output_bounds))

    @classmethod
    def affine(cls, weights, offset=0, output_bounds=None) -> QuerySpec:
        return cls(
            "affine",
            weights=tuple(Fraction(exact(w)) for w in weights),
            offset=Fraction(exact(offset)),
            output_bounds=_bounds(output_bounds),
        )

    @classmethod
    def from_table(cls, table: Mapping, output_bounds=None) -> QuerySpec:
        normalized = {tuple(exact(v) for v in key): exact(val) for key, val in table.items()}
        return cls("table", table=normalized, output_bounds=_bounds(output_bounds))

    @classmethod
    def custom(cls, function: Callable, output_bounds=None) -> QuerySpec:
        return cls("custom", function=function, output_bounds=_bounds(output_bounds))

    @property
    def is_affine(self) -> bool:
        return self.kind in ("affine", "mean", "sum")

    def coefficients(self, n: int) -> tuple[tuple[Fraction, ...], Fraction]:
        """Weights and offset of an affine query over ``n`` individuals."""
        if self.kind == "mean":
            return (Fraction(1, n),) * n, Fraction(0)
        if self.kind == "sum":
            return (Fraction(1),) * n, Fraction(0)
        if self.kind == "affine":
            return self.weights, self.offset
        raise PreconditionError(f"{self.kind} query has no affine form")

    def __call__(self, x: tuple):
        if self.is_affine:
            weights, offset = self.coefficients(len(x))
            return offset + sum((w * v for w, v in zip(weights, x)), Fraction(0))
        if self.kind == "table":
            try:
                return self.table[tuple(x)]
            except KeyError:
                raise DomainError(f"query table has no entry for {fmt(tuple(x))}") from None
        return exact(self.function(tuple(x)))


def _bounds(pair):
    if pair is None:
        return None
    lo, hi = (Fraction(exact(v)) for v in pair)
    if lo > hi:
        raise DomainError(f"output bounds [{fmt(lo)}, {fmt(hi)}] are reversed")
    return lo, hi


@dataclass(frozen=True)
class DatasetSpec:
    """``n`` individuals with declared domains and the query posed over them."""

    domains: tuple
    query: QuerySpec

    def __post_init__(self):
        domains = tuple(
            d if isinstance(d, (FiniteRange, IntervalUnion)) else FiniteRange(d) for d in self.domains
        )
        object.__setattr__(self, "domains", domains)
        if not domains:
            raise DomainError("a dataset needs at least one individual")
        for i, d in enumerate(domains):
            if (isinstance(d, IntervalUnion) and d.is_empty) or (isinstance(d, FiniteRange) and not len(d)):
                raise DomainError(f"domain of individual {i} is empty")
        q = self.query
        if q.kind == "affine" and len(q.weights) != len(domains):
            raise DomainError(f"affine query has {len(q.weights)} weights for {len(domains)} individuals")
        if q.kind == "table":
            for x in product_range(domains):
                if x not in q.table:
                    raise DomainError(f"query table is not total: missing {fmt(x)}")
        if q.output_bounds is not None and q.is_affine:
            lo, hi = self.image_bounds()
            if lo < q.output_bounds[0] or hi > q.output_bounds[1]:
                raise DomainError(
                    f"query image [{fmt(lo)}, {fmt(hi)}] exceeds declared output bounds "
                    f"[{fmt(q.output_bounds[0])}, {fmt(q.output_bounds[1])}]"
                )

    @property
    def n(self) -> int:
        return len(self.domains)

    @property
    def is_finite(self) -> bool:
        return all(isinstance(d, FiniteRange) for d in self.domains)

    def image_bounds(self) -> tuple[Fraction, Fraction]:
        """Exact bounds of the query image over the domain box."""
        q = self.query
        if q.is_affine:
            weights, offset = q.coefficients(self.n)
            lo = hi = offset
            for w, d in zip(weights, self.domains):
                a, b = domain_bounds(d)
                lo += min(w * a, w * b)
                hi += max(w * a, w * b)
            return lo, hi
        if q.kind == "table":
            values = [q.table[x] for x in product_range(self.domains)]
            if not all(is_number(v) for v in values):
                raise PreconditionError("symbolic query outputs have no numeric bounds")
            return min(values), max(values)
        if q.output_bounds is None:
            raise PreconditionError("custom query needs declared output bounds")
        return q.output_bounds

    @property
    def output_bounds(self) -> tuple[Fraction, Fraction]:
        if self.query.output_bounds is not None:
            return self.query.output_bounds
        return self.image_bounds()

    def check(self, x: Sequence) -> tuple:
        x = tuple(exact(v) for v in x)
        if len(x) != self.n:
            raise DomainError(f"expected {self.n} entries, got {len(x)}")
        for i, (v, d) in enumerate(zip(x, self.domains)):
            if v not in d:
                raise DomainError(f"entry {fmt(v)} of individual {i} lies outside its domain {d!r}")
        return x

    def evaluate(self, x: Sequence):
        """Query output at a point of the domain box."""
        return self.query(self.check(x))


def substitute(dataset: DatasetSpec, i: int, fixed_others: Sequence) -> DatasetSpec:
    """Pin every individual except ``i`` to the given values.

    ``fixed_others`` lists the pinned values in index order, skipping ``i``.
    """
    if not 0 <= i < dataset.n:
        raise DomainError(f"individual index {i} out of range for n={dataset.n}")
    fixed_others = tuple(fixed_others)
    if len(fixed_others) != dataset.n - 1:
        raise DomainError(f"expected {dataset.n - 1} pinned values, got {len(fixed_others)}")
    others = iter(fixed_others)
    domains = []
    for j, d in enumerate(dataset.domains):
        if j == i:
            domains.append(d)
            continue
        v = exact(next(others))
        if v not in d:
            raise DomainError(f"pinned value {fmt(v)} for individual {j} lies outside {d!r}")
        domains.append(FiniteRange([v]))
    return DatasetSpec(tuple(domains), dataset.query)


def join_others(i: int, xi, others: Sequence) -> tuple:
    """Insert ``xi`` at position ``i`` of ``others``."""
    return tuple(others[:i]) + (xi,) + tuple(others[i:])
