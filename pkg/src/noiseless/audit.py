"""Exact privacy audits of deterministic mechanisms and the guarantees they imply.

A mechanism applied to a query is audited by computing, for every individual
``i`` and every assignment of the others, the set of outputs reachable by
varying ``x_i`` alone. The budget ``epsilon_star`` is ``log2`` of the largest
such set. Three paths compute it:

* ``exact-finite``: enumeration over finite domains;
* ``exact-quantizer-affine``: affine query, piecewise-constant mechanism and
  interval domains, handled by interval arithmetic without enumeration;
* ``grid``: continuous domains replaced by grids, which yields a lower bound.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvariantViolation, PreconditionError
from .measures import (
    ChannelSpec,
    EmptyRange,
    PriorSpec,
    maximal_leakage,
    maximin_information,
    nonstochastic_leakage,
    symmetrized_leakage,
    zero_error_code_search,
)
from .mechanisms import Identity, Mechanism
from .ranges import (
    DatasetSpec,
    FiniteRange,
    IntervalUnion,
    JointRelation,
    as_pieces,
    discretize,
    exact,
    fmt,
    join_others,
    product_range,
)

SLACK = 1e-9


def log2_count(count) -> float:
    if count == math.inf:
        return math.inf
    return math.log2(count)


@dataclass(frozen=True)
class WorstCase:
    """Largest conditional output set for one individual."""

    individual: int
    count: int | float
    others: tuple
    outputs: FiniteRange | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AuditReport:
    per_individual: tuple[WorstCase, ...]
    mode: str
    step: Fraction | None = None

    @property
    def max_count(self):
        return max(w.count for w in self.per_individual)

    @property
    def epsilon_star(self) -> float:
        return log2_count(self.max_count)

    @property
    def lower_bound(self) -> bool:
        """Grid audits can miss outputs, so their budget is only a lower bound."""
        return self.mode == "grid"

    def satisfies(self, epsilon: float) -> bool:
        return self.epsilon_star <= epsilon + SLACK

    def to_text(self) -> str:
        lines = [
            f"mode = {self.mode}",
            f"epsilon_star = {self.epsilon_star!r}",
            f"lower_bound = {str(self.lower_bound).lower()}",
        ]
        if self.step is not None:
            lines.append(f"grid_step = {fmt(self.step)}")
        for w in self.per_individual:
            lines.append(f"individual_{w.individual + 1}_count = {w.count}")
            lines.append(f"individual_{w.individual + 1}_argmax_others = {fmt(w.others)}")
        return "\n".join(lines) + "\n"

    CSV_HEADER = "individual,count,argmax_others,epsilon_star,mode"

    def csv_rows(self) -> list[str]:
        rows = []
        for w in self.per_individual:
            others = " ".join(fmt(v) for v in w.others)
            rows.append(f"{w.individual + 1},{w.count},{others},{self.epsilon_star!r},{self.mode}")
        return rows


def outputs_on_intervals(mech: Mechanism, pieces: Sequence[tuple]) -> FiniteRange | None:
    """Distinct outputs of ``mech`` over a union of closed intervals.

    Returns ``None`` when the set is uncountable (identity on a non-degenerate
    interval). On each open gap between consecutive breakpoints the mechanism
    is constant, so probing the breakpoints and one interior point per gap is
    exhaustive.
    """
    points = _probe_points(mech, pieces)
    if points is None:
        return None
    return FiniteRange(mech(t) for t in points)


def _probe_points(mech: Mechanism, pieces):
    bps = mech.breakpoints()
    if bps is None:
        if not isinstance(mech, Identity):
            raise PreconditionError(
                f"{type(mech).__name__} is not piecewise constant; audit it on a grid instead"
            )
        if any(u < v for u, v in pieces):
            return None
        return [u for u, _ in pieces]
    bps = sorted(bps)
    points = []
    for u, v in pieces:
        inner = bps[bisect.bisect_right(bps, u):bisect.bisect_left(bps, v)]
        stops = [u, *inner, v] if u < v else [u]
        points.extend(stops)
        points.extend((a + b) / 2 for a, b in zip(stops, stops[1:]))
    return points


def _enumerate_worst(dataset: DatasetSpec, mech: Mechanism, domains, i: int) -> WorstCase:
    query = dataset.query
    others_domains = domains[:i] + domains[i + 1:]
    best = None
    for rest in product_range(others_domains):
        outs = FiniteRange(mech(query(join_others(i, xi, rest))) for xi in domains[i])
        if best is None or len(outs) > best.count:
            best = WorstCase(i, len(outs), tuple(rest), outs)
    return best


def _interval_worst(dataset: DatasetSpec, mech: Mechanism, i: int) -> WorstCase:
    weights, offset = dataset.query.coefficients(dataset.n)
    wi = weights[i]
    own = [tuple(sorted((wi * a, wi * b))) for a, b in as_pieces(dataset.domains[i])]
    other_idx = [j for j in range(dataset.n) if j != i]
    bps = mech.breakpoints()
    best = None
    for combo in itertools.product(*(as_pieces(dataset.domains[j]) for j in other_idx)):
        lo_c = offset + sum((min(weights[j] * a, weights[j] * b) for j, (a, b) in zip(other_idx, combo)), Fraction(0))
        hi_c = offset + sum((max(weights[j] * a, weights[j] * b) for j, (a, b) in zip(other_idx, combo)), Fraction(0))
        events = {lo_c, hi_c}
        for b in bps or ():
            for a0, a1 in own:
                for t in (b - a0, b - a1):
                    if lo_c <= t <= hi_c:
                        events.add(t)
        events = sorted(events)
        candidates = sorted(set(events) | {(s + t) / 2 for s, t in zip(events, events[1:])})
        for c in candidates:
            outs = outputs_on_intervals(mech, [(c + a0, c + a1) for a0, a1 in own])
            count = math.inf if outs is None else len(outs)
            if best is None or count > best.count:
                rest = _witness([weights[j] for j in other_idx], combo, c - offset)
                best = WorstCase(i, count, rest, outs)
            if count == math.inf:
                return best
    return best


def _witness(weights, pieces, target) -> tuple:
    """A point of the box ``pieces`` whose weighted sum equals ``target``."""
    remaining = target - sum((min(w * a, w * b) for w, (a, b) in zip(weights, pieces)), Fraction(0))
    out = []
    for w, (a, b) in zip(weights, pieces):
        span = abs(w) * (b - a)
        step = min(span, remaining)
        remaining -= step
        if w > 0:
            out.append(a + step / w)
        elif w < 0:
            out.append(b + step / w)
        else:
            out.append(a)
    if remaining != 0:
        raise InvariantViolation("shift lies outside the reachable sum of the other entries")
    return tuple(out)


def _interval_path_ok(dataset: DatasetSpec, mech: Mechanism) -> bool:
    if not dataset.query.is_affine:
        return False
    if mech.breakpoints() is None and not isinstance(mech, Identity):
        return False
    return True


def audit(dataset: DatasetSpec, mech: Mechanism, grid_step=None) -> AuditReport:
    """Worst-case conditional output counts and the resulting budget.

    With ``grid_step`` set, continuous domains are replaced by grids; otherwise
    they are handled exactly when the query is affine and the mechanism is
    piecewise constant (or the identity, whose budget is then infinite).
    """
    if dataset.is_finite:
        domains = dataset.domains
        return AuditReport(tuple(_enumerate_worst(dataset, mech, domains, i) for i in range(dataset.n)), "exact-finite")
    if grid_step is not None:
        step = exact(grid_step)
        domains = tuple(discretize(d, step) for d in dataset.domains)
        return AuditReport(
            tuple(_enumerate_worst(dataset, mech, domains, i) for i in range(dataset.n)), "grid", step
        )
    if not _interval_path_ok(dataset, mech):
        raise PreconditionError(
            "continuous domains need an affine query with a piecewise-constant mechanism, or a grid step"
        )
    return AuditReport(tuple(_interval_worst(dataset, mech, i) for i in range(dataset.n)), "exact-quantizer-affine")


def audit_local(dataset: DatasetSpec, mech: Mechanism, grid_step=None) -> AuditReport:
    """Budget of ``mech`` applied to each individual's own entry."""
    worst = []
    mode = "exact-finite"
    for i, d in enumerate(dataset.domains):
        if isinstance(d, FiniteRange):
            outs = FiniteRange(mech(v) for v in d)
        elif grid_step is not None:
            mode = "grid"
            outs = FiniteRange(mech(v) for v in discretize(d, exact(grid_step)))
        else:
            mode = "exact-quantizer-affine" if mode != "grid" else mode
            outs = outputs_on_intervals(mech, list(d.intervals))
        worst.append(WorstCase(i, math.inf if outs is None else len(outs), (), outs))
    return AuditReport(tuple(worst), mode, exact(grid_step) if mode == "grid" else None)


def conditional_outputs(dataset: DatasetSpec, mech: Mechanism, i: int, others: Sequence, grid_step=None):
    """Outputs reachable by varying individual ``i`` with the others pinned."""
    others = tuple(exact(v) for v in others)
    dataset.check(join_others(i, lowest_point(dataset.domains[i]), others))
    d = dataset.domains[i]
    if isinstance(d, FiniteRange) or grid_step is not None:
        return FiniteRange(mech(dataset.query(join_others(i, xi, others))) for xi in discretize(d, grid_step))
    weights, offset = dataset.query.coefficients(dataset.n)
    c = offset + sum((w * v for w, v in zip(weights[:i] + weights[i + 1:], others)), Fraction(0))
    pieces = [tuple(sorted((weights[i] * a + c, weights[i] * b + c))) for a, b in d.intervals]
    return outputs_on_intervals(mech, pieces)


def lowest_point(domain):
    """Smallest value of a domain; the default pin for individuals not under study."""
    return domain[0] if isinstance(domain, FiniteRange) else domain.lo()


def induced_relation(dataset: DatasetSpec, mech: Mechanism, i: int, others: Sequence, grid_step=None) -> JointRelation:
    """Joint range of ``X_i`` and the output when the others are pinned."""
    others = tuple(exact(v) for v in others)
    points = discretize(dataset.domains[i], grid_step)
    return JointRelation(
        (xi, mech(dataset.evaluate(join_others(i, xi, others)))) for xi in points
    )


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of testing ``x_i = x_a`` (p0) against ``x_i = x_b`` (p1)."""

    y_given_p0: FiniteRange
    y_given_p1: FiniteRange
    symmetric_difference: FiniteRange
    bound: float
    best_test_performance: float | None
    best_test: dict = field(compare=False, default_factory=dict)

    @property
    def distinguishing(self) -> bool:
        return self.best_test_performance is not None

    def to_text(self) -> str:
        perf = "no distinguishing output" if self.best_test_performance is None else repr(self.best_test_performance)
        return "\n".join(
            [
                f"y_given_p0 = {{{', '.join(fmt(v) for v in self.y_given_p0)}}}",
                f"y_given_p1 = {{{', '.join(fmt(v) for v in self.y_given_p1)}}}",
                f"symmetric_difference_size = {len(self.symmetric_difference)}",
                f"bound = {self.bound!r}",
                f"best_test_performance = {perf}",
            ]
        ) + "\n"


def hypothesis_analysis(dataset: DatasetSpec, mech: Mechanism, i: int, x_a, x_b, others: Sequence) -> HypothesisReport:
    """Best non-stochastic test between two candidate values of entry ``i``.

    A test is correct at an output when the hypotheses consistent with that
    output reduce to the test's answer; the best test answers the unique
    consistent hypothesis wherever there is one.
    """
    x_a, x_b = exact(x_a), exact(x_b)
    if x_a == x_b:
        raise PreconditionError("the two hypotheses must name different values")
    others = tuple(exact(v) for v in others)
    y0 = FiniteRange([mech(dataset.evaluate(join_others(i, x_a, others)))])
    y1 = FiniteRange([mech(dataset.evaluate(join_others(i, x_b, others)))])
    delta = y0 ^ y1
    test, correct = {}, []
    for y in y0 | y1:
        consistent = {h for h, ys in (("p0", y0), ("p1", y1)) if y in ys}
        test[y] = next(iter(consistent)) if len(consistent) == 1 else "p0"
        if consistent == {test[y]}:
            correct.append(y)
    bound = math.log2(len(delta)) if len(delta) else EmptyRange("no distinguishing output")
    perf = math.log2(len(correct)) if correct else None
    return HypothesisReport(y0, y1, delta, bound, perf, test)


@dataclass(frozen=True)
class LeakageChain:
    maximin: float
    symmetrized: float
    reverse_leakage: float
    epsilon: float

    @property
    def holds(self) -> bool:
        values = (0.0, self.maximin, self.symmetrized, self.reverse_leakage, self.epsilon)
        return all(a <= b + SLACK for a, b in zip(values, values[1:]))

    def as_tuple(self):
        return (self.maximin, self.symmetrized, self.reverse_leakage, self.epsilon)


def leakage_chain(dataset, mech, i, others, epsilon=None, grid_step=None, strict=False) -> LeakageChain:
    """Information measures between ``X_i`` and the output, next to the budget.

    The chain ``0 <= I* <= L0s <= L0(Y;X_i) <= epsilon`` is expected to hold;
    with ``strict=True`` a violation raises :class:`InvariantViolation`.
    """
    rel = induced_relation(dataset, mech, i, others, grid_step)
    if epsilon is None:
        epsilon = audit(dataset, mech, grid_step).epsilon_star
    chain = LeakageChain(
        maximin_information(rel)[0],
        symmetrized_leakage(rel),
        nonstochastic_leakage(rel, "yx"),
        epsilon,
    )
    if strict and not chain.holds:
        raise InvariantViolation(f"information chain violated: {chain.as_tuple()}")
    return chain


@dataclass(frozen=True)
class CapacityCheck:
    sizes: tuple[int, ...]
    rates: tuple[float, ...]
    epsilon: float

    @property
    def passed(self) -> bool:
        return all(r <= self.epsilon + SLACK for r in self.rates)


def capacity_check(dataset, mech, i, others, k_max=3, epsilon=None, grid_step=None) -> CapacityCheck:
    """Zero-error code rates of the channel from ``X_i`` to the output, ``k = 1..k_max``."""
    rel = induced_relation(dataset, mech, i, others, grid_step)
    channel = ChannelSpec(rel.x_range, {x: rel.given_x(x) for x in rel.x_range})
    if epsilon is None:
        epsilon = audit(dataset, mech, grid_step).epsilon_star
    results = [zero_error_code_search(channel, k) for k in range(1, k_max + 1)]
    return CapacityCheck(tuple(r.size for r in results), tuple(r.rate for r in results), epsilon)


@dataclass(frozen=True)
class LeakageCheck:
    leakage: float
    epsilon: float

    @property
    def passed(self) -> bool:
        return self.leakage <= self.epsilon + SLACK


def maximal_leakage_check(dataset, mech, i, others, prior: PriorSpec, epsilon=None, grid_step=None) -> LeakageCheck:
    """Maximal leakage from ``X_i`` to the output under ``prior``, next to the budget."""
    rel = induced_relation(dataset, mech, i, others, grid_step)
    channel = {x: rel.given_x(x)[0] for x in rel.x_range}
    if epsilon is None:
        epsilon = audit(dataset, mech, grid_step).epsilon_star
    return LeakageCheck(maximal_leakage(channel, prior), epsilon)


@dataclass(frozen=True)
class EstimationCheck:
    empirical: float
    standard_error: float
    bound: float
    epsilon: float
    trials: int
    degenerate: bool = False

    @property
    def passed(self) -> bool:
        return self.empirical >= self.bound - 3 * self.standard_error


def estimation_error_bound(rho, measure, p: int, epsilon: float) -> float:
    """Lower bound on the ``p``-th error moment of any estimator of ``X_i``."""
    if math.isinf(epsilon):
        return 0.0
    return float(rho) * float(measure) ** (p + 1) / 2 ** (2 * p + 2) * 2 ** (-epsilon * (p + 1))


def preimage_cells(dataset: DatasetSpec, mech: Mechanism, i: int, others: Sequence):
    """Split the interval domain of ``X_i`` into the preimages of each output.

    Returns ``(edges, midpoints)``: piece ``k`` is ``[edges[k], edges[k+1]]`` and
    its estimate is the midpoint of the whole preimage it belongs to. Raises if
    some output has a disconnected preimage.
    """
    d = dataset.domains[i]
    if not isinstance(d, IntervalUnion) or len(d) != 1:
        raise PreconditionError("estimation check needs a single-interval domain for the target individual")
    if not dataset.query.is_affine:
        raise PreconditionError("estimation check needs an affine query")
    weights, offset = dataset.query.coefficients(dataset.n)
    wi = weights[i]
    if wi == 0:
        raise PreconditionError("the query does not depend on the target individual")
    c = offset + sum((w * v for w, v in zip(weights[:i] + weights[i + 1:], others)), Fraction(0))
    lo, hi = d.intervals[0]
    bps = mech.breakpoints()
    if bps is None:
        raise PreconditionError("estimation check needs a piecewise-constant mechanism")
    cuts = sorted({lo, hi} | {(b - c) / wi for b in bps if lo < (b - c) / wi < hi})
    symbols = [mech(wi * (a + b) / 2 + c) for a, b in zip(cuts, cuts[1:])]
    groups: list[list] = []  # [symbol, start, end]
    for k, s in enumerate(symbols):
        if groups and groups[-1][0] == s:
            groups[-1][2] = cuts[k + 1]
        else:
            groups.append([s, cuts[k], cuts[k + 1]])
    seen = set()
    for s, _, _ in groups:
        if s in seen:
            raise PreconditionError(f"output {fmt(s)} has a disconnected preimage")
        seen.add(s)
    mid = {s: (a + b) / 2 for s, a, b in groups}
    return cuts, [mid[s] for s in symbols]


def estimation_error_check(
    dataset: DatasetSpec,
    mech: Mechanism,
    i: int,
    prior: PriorSpec,
    p: int,
    *,
    seed: int,
    trials: int = 100_000,
    others: Sequence | None = None,
    epsilon: float | None = None,
) -> EstimationCheck:
    """Monte Carlo error of the conditional-midpoint estimator against the bound.

    ``X_i`` is drawn from ``prior`` with the other entries pinned (default: the
    lower end of each domain). The estimator returns the midpoint of the
    preimage of the published output. The reported moment is ``E|X_i - est|^p``.
    """
    if p < 1 or int(p) != p:
        raise PreconditionError("moment order must be a positive integer")
    if prior.is_finite:
        raise PreconditionError("estimation check needs a density prior")
    if others is None:
        others = tuple(lowest_point(d) for j, d in enumerate(dataset.domains) if j != i)
    others = tuple(exact(v) for v in others)
    cuts, mids = preimage_cells(dataset, mech, i, others)
    if epsilon is None:
        epsilon = audit(dataset, mech).epsilon_star
    rng = np.random.default_rng(seed)
    x = prior.sample(rng, trials)
    edges = np.array([float(v) for v in cuts])
    piece = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(mids) - 1)
    err = np.abs(x - np.array([float(m) for m in mids])[piece]) ** p
    measure = dataset.domains[i].measure()
    rho = prior.rho
    return EstimationCheck(
        float(err.mean()),
        float(err.std(ddof=1) / math.sqrt(trials)),
        estimation_error_bound(rho, measure, p, epsilon),
        epsilon,
        trials,
        degenerate=rho == 0,
    )
