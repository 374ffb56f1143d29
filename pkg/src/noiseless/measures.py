"""Non-stochastic information measures.

Discrete measures are in bits, the differential 0-entropy is in nats. Nothing
converts between the two implicitly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping

from .errors import InvariantViolation, PreconditionError, SearchLimitError
from .ranges import FiniteRange, IntervalUnion, JointRelation, exact, fmt, order_key

DEFAULT_SEARCH_CAP = 10**6


class EmptyRange(float):
    """Negative infinity returned for the entropy of an empty range.

    Behaves as ``-inf`` arithmetically but is distinguishable by type.
    """

    def __new__(cls, reason: str = "empty range"):
        obj = super().__new__(cls, -math.inf)
        obj.reason = reason
        return obj

    def __repr__(self) -> str:
        return f"EmptyRange({self.reason!r})"


def hartley_entropy(r: FiniteRange) -> float:
    """``log2 |r|`` in bits."""
    if not len(r):
        return EmptyRange()
    return math.log2(len(r))


def differential_entropy0(iv: IntervalUnion) -> float:
    """Natural log of the Lebesgue measure of ``iv``, in nats."""
    m = iv.measure()
    if m == 0:
        return EmptyRange("zero measure")
    return math.log(m)


def _log2_ratio(num: int, den: int) -> float:
    return math.log2(num) - math.log2(den)


def nonstochastic_leakage(rel: JointRelation, direction: str = "xy") -> float:
    """Worst-case leakage ``L0``.

    ``direction="xy"`` measures what observing the second coordinate reveals
    about the first (``max_y log2 |X| / |X|y|``); ``"yx"`` swaps the roles.
    """
    marginal, conditionals = _oriented(rel, direction)
    return max(_log2_ratio(marginal, len(c)) for c in conditionals)


def nonstochastic_information(rel: JointRelation, direction: str = "xy") -> float:
    """``I0``: same as :func:`nonstochastic_leakage` with ``min`` for ``max``."""
    marginal, conditionals = _oriented(rel, direction)
    return min(_log2_ratio(marginal, len(c)) for c in conditionals)


def _oriented(rel: JointRelation, direction: str):
    if direction == "xy":
        return len(rel.x_range), [rel.given_y(y) for y in rel.y_range]
    if direction == "yx":
        return len(rel.y_range), [rel.given_x(x) for x in rel.x_range]
    raise PreconditionError(f"direction must be 'xy' or 'yx', got {direction!r}")


def symmetrized_leakage(rel: JointRelation) -> float:
    return min(nonstochastic_leakage(rel, "xy"), nonstochastic_leakage(rel, "yx"))


class UnionFind:
    """Disjoint sets with path halving and union by size."""

    def __init__(self, items: Iterable[Hashable] = ()):
        self.parent = {}
        self.size = {}
        for item in items:
            self.add(item)

    def add(self, item):
        if item not in self.parent:
            self.parent[item] = item
            self.size[item] = 1

    def find(self, item):
        parent = self.parent
        while parent[item] != item:
            parent[item] = parent[parent[item]]
            item = parent[item]
        return item

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def groups(self) -> list[list]:
        out: dict = {}
        for item in self.parent:
            out.setdefault(self.find(item), []).append(item)
        return list(out.values())


@dataclass(frozen=True)
class OverlapPartition:
    """Partition of a marginal range into overlap-connected, mutually isolated blocks."""

    blocks: tuple[FiniteRange, ...]

    def __len__(self) -> int:
        return len(self.blocks)

    def block_of(self, x) -> FiniteRange:
        for b in self.blocks:
            if x in b:
                return b
        raise KeyError(x)


def overlap_partition(rel: JointRelation, direction: str = "xy") -> OverlapPartition:
    """Connected components of the intersection graph of the conditional ranges.

    With ``direction="xy"`` the conditional ranges are ``[[X|y]]`` and the
    blocks partition ``[[X]]``.
    """
    if direction == "yx":
        rel = rel.transpose()
    uf = UnionFind(rel.x_range)
    for y in rel.y_range:
        members = list(rel.given_y(y))
        for other in members[1:]:
            uf.union(members[0], other)
    blocks = [FiniteRange(g) for g in uf.groups()]
    blocks.sort(key=lambda b: order_key(b[0]))
    return OverlapPartition(tuple(blocks))


def maximin_information(rel: JointRelation) -> tuple[float, OverlapPartition]:
    """Maximin information in bits with the overlap partition of ``[[X]]``."""
    forward = overlap_partition(rel, "xy")
    backward = overlap_partition(rel, "yx")
    if len(forward) != len(backward):
        raise InvariantViolation(
            f"overlap partitions disagree in size: {len(forward)} vs {len(backward)}"
        )
    return math.log2(len(forward)), forward


@dataclass(frozen=True)
class ChannelSpec:
    """A memoryless, time-invariant uncertain channel.

    ``output_map[x]`` is the set of outputs the channel may produce on input ``x``.
    """

    input_range: FiniteRange
    output_map: Mapping

    def __post_init__(self):
        mapping = {exact(x): FiniteRange(ys) for x, ys in dict(self.output_map).items()}
        inputs = self.input_range if isinstance(self.input_range, FiniteRange) else FiniteRange(self.input_range)
        object.__setattr__(self, "input_range", inputs)
        object.__setattr__(self, "output_map", mapping)
        for x in inputs:
            if x not in mapping or not len(mapping[x]):
                raise PreconditionError(f"channel has no outputs for input {fmt(x)}")

    @classmethod
    def deterministic(cls, domain: Iterable, fn) -> ChannelSpec:
        domain = FiniteRange(domain)
        return cls(domain, {x: [fn(x)] for x in domain})

    def confusable(self, a, b) -> bool:
        return not self.output_map[a].isdisjoint(self.output_map[b])


def pentagon_channel() -> ChannelSpec:
    """Five inputs; input ``x`` may produce ``x`` or ``x + 1 mod 5``."""
    return ChannelSpec(FiniteRange(range(5)), {x: [x, (x + 1) % 5] for x in range(5)})


@dataclass(frozen=True)
class PriorSpec:
    """A probability law on a finite support or a piecewise-constant density.

    For a finite support ``weights`` maps points to masses. For a continuous
    support ``edges`` are the breakpoints of the density and ``weights`` the
    density on each piece.
    """

    support: FiniteRange | IntervalUnion
    weights: tuple
    edges: tuple = ()

    def __post_init__(self):
        if isinstance(self.support, FiniteRange):
            if len(self.weights) != len(self.support):
                raise PreconditionError("one mass per support point is required")
            if any(w < 0 for w in self.weights):
                raise PreconditionError("masses must be non-negative")
            if abs(float(sum(self.weights)) - 1.0) > 1e-9:
                raise PreconditionError(f"masses sum to {float(sum(self.weights))}, not 1")
        else:
            if len(self.edges) != len(self.weights) + 1:
                raise PreconditionError("a density needs one value per piece between edges")
            if any(w < 0 for w in self.weights):
                raise PreconditionError("density values must be non-negative")
            total = sum(float(w) * float(b - a) for w, a, b in zip(self.weights, self.edges, self.edges[1:]))
            if abs(total - 1.0) > 1e-9:
                raise PreconditionError(f"density integrates to {total}, not 1")

    @classmethod
    def discrete(cls, masses: Mapping) -> PriorSpec:
        support = FiniteRange(masses)
        lookup = {exact(k): v for k, v in masses.items()}
        return cls(support, tuple(lookup[x] for x in support))

    @classmethod
    def uniform(cls, support) -> PriorSpec:
        if isinstance(support, FiniteRange):
            m = Fraction(1, len(support))
            return cls(support, (m,) * len(support))
        if len(support) != 1:
            raise PreconditionError("uniform density is only provided on a single interval")
        lo, hi = support.intervals[0]
        return cls(support, (1 / (hi - lo),), (lo, hi))

    @classmethod
    def piecewise(cls, edges, densities) -> PriorSpec:
        edges = tuple(Fraction(exact(e)) for e in edges)
        return cls(IntervalUnion.interval(edges[0], edges[-1]), tuple(densities), edges)

    @property
    def is_finite(self) -> bool:
        return isinstance(self.support, FiniteRange)

    @property
    def rho(self):
        """Infimum of the density (or of the masses for a finite support)."""
        return min(self.weights)

    def mass(self, x):
        return dict(zip(self.support, self.weights))[exact(x)]

    def sample(self, rng, size: int):
        """Draw ``size`` samples as a float array (continuous) or list (finite)."""
        import numpy as np

        probs = np.array([float(w) for w in self.weights])
        if self.is_finite:
            idx = rng.choice(len(self.support), size=size, p=probs / probs.sum())
            return [self.support[k] for k in idx]
        edges = np.array([float(e) for e in self.edges])
        piece_mass = probs * np.diff(edges)
        piece = rng.choice(len(probs), size=size, p=piece_mass / piece_mass.sum())
        return edges[piece] + rng.random(size) * (edges[piece + 1] - edges[piece])


def maximal_leakage(channel: Mapping, prior: PriorSpec) -> float:
    """Maximal leakage ``log2 sum_y max_{x: P(x) > 0} P(y|x)`` in bits.

    ``channel[x]`` is either a single output (deterministic channel) or a
    mapping from outputs to conditional probabilities.
    """
    if not prior.is_finite:
        raise PreconditionError("maximal leakage is computed for finite priors")
    inputs = FiniteRange(channel)
    if inputs != prior.support:
        raise PreconditionError("prior support does not match the channel input range")
    lookup = {exact(k): v for k, v in channel.items()}
    best: dict = {}
    for x, px in zip(prior.support, prior.weights):
        if px <= 0:
            continue
        row = lookup[x]
        if not isinstance(row, Mapping):
            row = {row: 1}
        for y, pyx in row.items():
            y = exact(y)
            best[y] = max(best.get(y, 0), pyx)
    return math.log2(sum(float(v) for v in best.values()))


@dataclass(frozen=True)
class CodeSearchResult:
    code: tuple[tuple, ...]
    block_length: int

    @property
    def size(self) -> int:
        return len(self.code)

    @property
    def rate(self) -> float:
        return math.log2(len(self.code)) / self.block_length


def confusability_graph(channel: ChannelSpec, k: int, cap: int = DEFAULT_SEARCH_CAP):
    """Words of length ``k`` and their confusability neighbourhoods as bitsets.

    Two words are confusable when, at every position, their output sets
    intersect; a word counts as its own neighbour.
    """
    symbols = list(channel.input_range)
    size = len(symbols) ** k
    if size > cap:
        raise SearchLimitError(size, cap)
    index = {s: j for j, s in enumerate(symbols)}
    single = [
        [index[b] for b in symbols if channel.confusable(a, b)]
        for a in symbols
    ]
    words = list(itertools.product(range(len(symbols)), repeat=k))
    weights = [len(symbols) ** (k - 1 - p) for p in range(k)]
    neighbours = []
    for w in words:
        mask = 0
        for combo in itertools.product(*(single[s] for s in w)):
            mask |= 1 << sum(c * m for c, m in zip(combo, weights))
        neighbours.append(mask)
    return [tuple(symbols[s] for s in w) for w in words], neighbours


def _lowest_bit(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def _cover_order(mask: int, nbrs: list[int]):
    """Greedy partition of ``mask`` into cliques.

    Returns the vertices in class order with, for each, the number of classes
    opened so far. No independent set inside the first ``j`` vertices can be
    larger than that count.
    """
    order, bounds = [], []
    k = 0
    while mask:
        k += 1
        q = mask
        while q:
            v = _lowest_bit(q)
            bit = 1 << v
            q &= nbrs[v] & ~bit
            mask &= ~bit
            order.append(v)
            bounds.append(k)
    return order, bounds


def _components(mask: int, nbrs: list[int]) -> list[int]:
    comps = []
    while mask:
        seed = mask & -mask
        comp, frontier = seed, seed
        while frontier:
            v = _lowest_bit(frontier)
            frontier &= ~(1 << v)
            new = nbrs[v] & mask & ~comp
            comp |= new
            frontier |= new
        comps.append(comp)
        mask &= ~comp
    return comps


def _independence_search(mask: int, nbrs: list[int], floor: int = 0, target: int | None = None) -> int:
    """Size of a maximum independent set of ``mask``, searched above ``floor``.

    Returns ``floor`` when no set larger than ``floor`` exists. With ``target``
    the search stops as soon as a set of that size is found.
    """
    best = [floor]

    def expand(cands: int, size: int) -> bool:
        order, bounds = _cover_order(cands, nbrs)
        for j in range(len(order) - 1, -1, -1):
            if size + bounds[j] <= best[0]:
                return False
            v = order[j]
            rest = cands & ~nbrs[v]
            if rest:
                if expand(rest, size + 1):
                    return True
            elif size + 1 > best[0]:
                best[0] = size + 1
                if target is not None and best[0] >= target:
                    return True
            cands &= ~(1 << v)
        return False

    if mask:
        expand(mask, 0)
    return best[0]


def independence_number(mask: int, nbrs: list[int]) -> int:
    return sum(_independence_search(c, nbrs) for c in _components(mask, nbrs))


def maximum_independent_set(mask: int, nbrs: list[int]) -> int:
    """Lexicographically first maximum independent set of the induced subgraph.

    The size comes from colour-bounded branch and bound over bitsets. The set
    is then built vertex by vertex in increasing order, keeping a vertex
    whenever a maximum set containing it and the earlier choices still exists.
    ``nbrs[v]`` must include ``v`` itself.
    """
    need = independence_number(mask, nbrs)
    chosen, cands = 0, mask
    while need:
        v = _lowest_bit(cands)
        bit = 1 << v
        rest = cands & ~nbrs[v]
        if need == 1 or _independence_search(rest, nbrs, need - 2, need - 1) >= need - 1:
            chosen |= bit
            cands = rest
            need -= 1
        else:
            cands &= ~bit
    return chosen


def zero_error_code_search(channel: ChannelSpec, k: int, cap: int = DEFAULT_SEARCH_CAP) -> CodeSearchResult:
    """Largest zero-error code of block length ``k`` by exact search."""
    if k < 1:
        raise PreconditionError(f"block length must be at least 1, got {k}")
    words, nbrs = confusability_graph(channel, k, cap)
    chosen = maximum_independent_set((1 << len(words)) - 1, nbrs)
    code = tuple(words[v] for v in range(len(words)) if chosen >> v & 1)
    return CodeSearchResult(code, k)
