"""Random instance builders and independent brute-force oracles for the tests."""

import itertools
import math
from fractions import Fraction

import numpy as np

from noiseless import (
    Compose,
    Constant,
    DatasetSpec,
    FiniteRange,
    Identity,
    JointRelation,
    LinearQuantizer,
    PostProcess,
    QuerySpec,
)


def random_domain(rng, size_max=5, lo=-3, hi=6):
    size = int(rng.integers(1, size_max + 1))
    return FiniteRange(int(v) for v in rng.choice(np.arange(lo, hi), size=size, replace=False))


def random_query(rng, domains):
    n = len(domains)
    kind = rng.choice(["mean", "sum", "affine", "table"])
    if kind == "mean":
        return QuerySpec.mean()
    if kind == "sum":
        return QuerySpec.sum()
    if kind == "affine":
        weights = [Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4))) for _ in range(n)]
        return QuerySpec.affine(weights, int(rng.integers(-2, 3)))
    table = {x: int(rng.integers(0, 6)) for x in itertools.product(*domains)}
    return QuerySpec.from_table(table)


def random_mechanism(rng, dataset, depth=0):
    lo, hi = dataset.output_bounds
    kinds = ["identity", "constant", "quantizer", "quantizer"]
    if depth == 0:
        kinds += ["compose", "post"]
    kind = rng.choice(kinds)
    if kind == "identity":
        return Identity()
    if kind == "constant":
        return Constant(int(rng.integers(0, 3)))
    if kind == "quantizer":
        if lo == hi:
            return Constant(lo)
        return LinearQuantizer(int(rng.integers(1, 7)), lo, hi)
    if kind == "compose":
        return Compose((random_mechanism(rng, dataset, 1), random_mechanism(rng, dataset, 1)))
    inner = random_mechanism(rng, dataset, 1)
    return PostProcess(inner, random_map(rng, inner, dataset))


def random_map(rng, inner, dataset):
    """A random finite map on every output ``inner`` can produce over the box."""
    outputs = {inner(dataset.query(x)) for x in itertools.product(*dataset.domains)}
    symbols = inner.output_symbols()
    if symbols is not None:
        outputs |= set(symbols)
    outputs = sorted(outputs, key=repr)
    labels = int(rng.integers(1, len(outputs) + 1))
    return {y: int(rng.integers(0, labels)) for y in outputs}


def random_finite_instance(rng, n_max=3, size_max=5):
    n = int(rng.integers(1, n_max + 1))
    domains = tuple(random_domain(rng, size_max) for _ in range(n))
    dataset = DatasetSpec(domains, random_query(rng, domains))
    return dataset, random_mechanism(rng, dataset)


def random_relation(rng, x_max=8, y_max=8):
    xs = list(range(int(rng.integers(1, x_max + 1))))
    ys = [f"y{k}" for k in range(int(rng.integers(1, y_max + 1)))]
    pairs = {(x, ys[int(rng.integers(len(ys)))]) for x in xs}
    for y in ys:
        pairs.add((xs[int(rng.integers(len(xs)))], y))
    extra = int(rng.integers(0, len(xs) * len(ys) + 1))
    for _ in range(extra):
        pairs.add((xs[int(rng.integers(len(xs)))], ys[int(rng.integers(len(ys)))]))
    return JointRelation(pairs)


# ------------------------------------------------------------------ oracles


def naive_epsilon(dataset, mech):
    """log2 of the largest conditional output set, by plain nested loops."""
    worst = 0
    domains = [list(d) for d in dataset.domains]
    for i in range(len(domains)):
        rest = domains[:i] + domains[i + 1:]
        for others in itertools.product(*rest):
            outs = set()
            for xi in domains[i]:
                x = list(others)
                x.insert(i, xi)
                outs.add(mech(dataset.query(tuple(x))))
            worst = max(worst, len(outs))
    return math.log2(worst)


def naive_first_code(words, confusable):
    """Lexicographically first largest set of pairwise non-confusable words."""
    words = list(words)
    for r in range(len(words), 0, -1):
        for subset in itertools.combinations(words, r):
            if all(not confusable(a, b) for a, b in itertools.combinations(subset, 2)):
                return subset
    return ()
