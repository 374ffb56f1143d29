"""Deterministic output maps applied to query responses, and their synthesis."""

from __future__ import annotations

import decimal
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError, PreconditionError
from .ranges import (
    DatasetSpec,
    FiniteRange,
    domain_bounds,
    exact,
    fmt,
    grid_sample,
    is_number,
    join_others,
    product_range,
)

DEFAULT_MAX_LEVELS = 2**20
DEFAULT_SAFETY_FACTOR = 2
# matches the slack the auditor uses when comparing budgets
BUDGET_SLACK = 1e-9


class InsensitiveQueryWarning(UserWarning):
    """The query does not depend on any single individual."""


class Mechanism:
    """A deterministic map from query outputs to published values."""

    def __call__(self, y):
        raise NotImplementedError

    def breakpoints(self) -> tuple | None:
        """Points where the output may change; ``None`` if not piecewise constant."""
        return None

    def output_symbols(self) -> FiniteRange | None:
        """All symbols the mechanism can emit, when that set is known up front."""
        return None


@dataclass(frozen=True)
class Identity(Mechanism):
    def __call__(self, y):
        return y


@dataclass(frozen=True)
class Constant(Mechanism):
    value: object = 0

    def __call__(self, y):
        return self.value

    def breakpoints(self):
        return ()

    def output_symbols(self):
        return FiniteRange([self.value])


@dataclass(frozen=True)
class LinearQuantizer(Mechanism):
    """A ``levels``-level quantizer over ``[x_min, x_max]`` with equal-width cells.

    Cells are ``[x_k, x_{k+1})`` except the last, which is closed. Symbols default
    to cell midpoints.
    """

    levels: int
    x_min: Fraction
    x_max: Fraction
    symbols: tuple = ()

    def __post_init__(self):
        lo, hi = Fraction(exact(self.x_min)), Fraction(exact(self.x_max))
        if int(self.levels) != self.levels or self.levels < 1:
            raise PreconditionError(f"quantizer needs a positive integer level count, got {self.levels!r}")
        if not lo < hi:
            raise PreconditionError(f"quantizer range [{fmt(lo)}, {fmt(hi)}] is empty")
        object.__setattr__(self, "levels", int(self.levels))
        object.__setattr__(self, "x_min", lo)
        object.__setattr__(self, "x_max", hi)
        if self.symbols:
            symbols = tuple(exact(s) for s in self.symbols)
            if len(symbols) != self.levels or len(set(symbols)) != self.levels:
                raise PreconditionError("quantizer needs one distinct symbol per level")
        else:
            w = self.width
            symbols = tuple(lo + (k + Fraction(1, 2)) * w for k in range(self.levels))
        object.__setattr__(self, "symbols", symbols)

    @property
    def width(self) -> Fraction:
        return (self.x_max - self.x_min) / self.levels

    @property
    def edges(self) -> tuple[Fraction, ...]:
        return tuple(self.x_min + k * self.width for k in range(self.levels)) + (self.x_max,)

    def cell_index(self, x) -> int:
        """Zero-based index of the cell containing ``x``."""
        v = exact(x)
        if not is_number(v) or not self.x_min <= v <= self.x_max:
            raise DomainError(
                f"quantizer input {fmt(v)} outside [{fmt(self.x_min)}, {fmt(self.x_max)}]"
            )
        return min(math.floor((v - self.x_min) / self.width), self.levels - 1)

    def __call__(self, y):
        return self.symbols[self.cell_index(y)]

    def breakpoints(self):
        return self.edges[1:-1]

    def output_symbols(self):
        return FiniteRange(self.symbols)

    def quantize_array(self, values: np.ndarray) -> np.ndarray:
        """Vectorized float quantization returning symbols as floats."""
        lo, hi = float(self.x_min), float(self.x_max)
        values = np.asarray(values, dtype=float)
        if values.size and (values.min() < lo or values.max() > hi):
            raise DomainError(f"quantizer inputs fall outside [{lo}, {hi}]")
        idx = np.minimum(np.floor((values - lo) * self.levels / (hi - lo)), self.levels - 1).astype(int)
        return np.array([float(s) for s in self.symbols])[idx]


def quantize(spec: LinearQuantizer, x):
    return spec(x)


@dataclass(frozen=True)
class Compose(Mechanism):
    """Several mechanisms answering the same query; publishes the tuple of outputs."""

    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise PreconditionError("composition needs at least one mechanism")

    def __call__(self, y):
        return tuple(m(y) for m in self.parts)

    def breakpoints(self):
        points = set()
        for m in self.parts:
            b = m.breakpoints()
            if b is None:
                return None
            points.update(b)
        return tuple(sorted(points))


@dataclass(frozen=True)
class PostProcess(Mechanism):
    """``g`` applied to the output of ``inner``; ``g`` is a finite map or a callable."""

    inner: Mechanism
    g: Mapping | Callable = field(compare=False)

    def __post_init__(self):
        if isinstance(self.g, Mapping):
            object.__setattr__(self, "g", {exact(k): v for k, v in self.g.items()})
            symbols = self.inner.output_symbols()
            if symbols is not None:
                missing = [s for s in symbols if s not in self.g]
                if missing:
                    raise PreconditionError(f"post-processing map is not total: missing {fmt(missing[0])}")

    def __call__(self, y):
        out = self.inner(y)
        if isinstance(self.g, Mapping):
            try:
                return self.g[out]
            except KeyError:
                raise DomainError(f"post-processing map has no entry for {fmt(out)}") from None
        return self.g(out)

    def breakpoints(self):
        return self.inner.breakpoints()

    def output_symbols(self):
        symbols = self.inner.output_symbols()
        if symbols is None:
            return None
        return FiniteRange(self._g(s) for s in symbols)

    def _g(self, s):
        return self.g[s] if isinstance(self.g, Mapping) else self.g(s)


def apply(mech: Mechanism, dataset: DatasetSpec, x):
    """Published output for the dataset realization ``x``."""
    return mech(dataset.evaluate(x))


def compose_budget(eps1: float, eps2: float) -> float:
    """Budget of publishing two mechanisms' outputs for the same query."""
    if eps1 < 0 or eps2 < 0:
        raise PreconditionError("privacy budgets are non-negative")
    return eps1 + eps2


@dataclass(frozen=True)
class SensitivityResult:
    value: Fraction
    method: str
    step: Fraction | None = None

    @property
    def lower_bound(self) -> bool:
        """Grid estimates can only under-estimate the supremum."""
        return self.method == "grid"


def sensitivity(dataset: DatasetSpec, grid_step=None) -> SensitivityResult:
    """Largest change of the query output when one individual's entry varies."""
    q = dataset.query
    if q.is_affine:
        weights, _ = q.coefficients(dataset.n)
        best = Fraction(0)
        for w, d in zip(weights, dataset.domains):
            lo, hi = domain_bounds(d)
            best = max(best, abs(w) * (hi - lo))
        return SensitivityResult(best, "exact-affine")
    if dataset.is_finite:
        return SensitivityResult(_enumerated_sensitivity(dataset, dataset.domains), "exact-enumeration")
    if grid_step is None:
        raise PreconditionError("sensitivity of a non-affine query on continuous domains needs a grid step")
    step = exact(grid_step)
    domains = [d if isinstance(d, FiniteRange) else grid_sample(d, step) for d in dataset.domains]
    return SensitivityResult(_enumerated_sensitivity(dataset, domains), "grid", step)


def _enumerated_sensitivity(dataset: DatasetSpec, domains) -> Fraction:
    best = Fraction(0)
    for i in range(dataset.n):
        others = domains[:i] + domains[i + 1:]
        for rest in product_range(others):
            values = [dataset.query(join_others(i, xi, rest)) for xi in domains[i]]
            if not all(is_number(v) for v in values):
                raise PreconditionError("sensitivity needs a numeric query")
            best = max(best, max(values) - min(values))
    return Fraction(best)


def allowed_outputs(epsilon) -> int:
    """Largest output count ``m`` with ``log2(m) <= epsilon``, up to the audit slack."""
    with decimal.localcontext() as ctx:
        ctx.prec = 60
        if isinstance(epsilon, Fraction):
            e = decimal.Decimal(epsilon.numerator) / decimal.Decimal(epsilon.denominator)
        else:
            e = decimal.Decimal(epsilon)
        m = int((decimal.Decimal(2) ** (e + decimal.Decimal(BUDGET_SLACK))).to_integral_value(decimal.ROUND_FLOOR))
    return max(m, 1)


def quantizer_levels(
    epsilon: float,
    y_min,
    y_max,
    sens,
    *,
    rule: str = "strict",
    max_levels: int = DEFAULT_MAX_LEVELS,
) -> int:
    """Number of quantizer levels that keeps a query within budget ``epsilon``.

    Let ``W = y_max - y_min`` and ``m`` the largest integer with
    ``log2(m) <= epsilon``. A connected image of width ``S`` touches at most
    ``ceil(q S / W) + 1`` of ``q`` equal cells, and never more than ``q``.

    ``rule="strict"`` (default) returns the largest ``q`` for which that count
    stays within ``m``: ``max(m, floor((m - 1) W / S))``.
    ``rule="nominal"`` returns the largest ``q <= 2**epsilon * W / S``, which
    can let an image straddle one more cell than the budget allows.
    The result is clamped to ``[1, max_levels]``.
    """
    if epsilon <= 0:
        raise PreconditionError(f"budget must be positive, got {epsilon}")
    if rule not in ("strict", "nominal"):
        raise PreconditionError(f"unknown level rule {rule!r}")
    span = Fraction(exact(y_max)) - Fraction(exact(y_min))
    sens = Fraction(exact(sens))
    if span <= 0:
        raise PreconditionError("output bounds must satisfy y_min < y_max")
    if sens < 0:
        raise PreconditionError("sensitivity is non-negative")
    if math.isinf(epsilon):
        return max_levels
    if sens == 0:
        warnings.warn(
            f"query insensitive to every individual; levels capped at {max_levels}",
            InsensitiveQueryWarning,
            stacklevel=2,
        )
        return max_levels
    if rule == "strict":
        m = allowed_outputs(epsilon)
        q = max(m, math.floor((m - 1) * span / sens))
    else:
        with decimal.localcontext() as ctx:
            ctx.prec = 60
            bound = _power_of_two(epsilon) * decimal.Decimal(span.numerator) * decimal.Decimal(sens.denominator)
            bound /= decimal.Decimal(span.denominator) * decimal.Decimal(sens.numerator)
            q = int(bound.to_integral_value(rounding=decimal.ROUND_FLOOR))
    return max(1, min(q, max_levels))


def _power_of_two(epsilon) -> decimal.Decimal:
    with decimal.localcontext() as ctx:
        ctx.prec = 60
        if isinstance(epsilon, Fraction):
            e = decimal.Decimal(epsilon.numerator) / decimal.Decimal(epsilon.denominator)
        else:
            e = decimal.Decimal(epsilon)
        return decimal.Decimal(2) ** e


def synthesize_quantizer(
    dataset: DatasetSpec,
    epsilon: float,
    *,
    rule: str = "strict",
    safety_factor: float = DEFAULT_SAFETY_FACTOR,
    max_levels: int = DEFAULT_MAX_LEVELS,
    grid_step=None,
) -> LinearQuantizer:
    """Quantizer over the query's output bounds meeting budget ``epsilon``.

    Grid-estimated sensitivities are multiplied by ``safety_factor`` before use.
    Table queries are rejected since their per-individual images need not be
    connected.
    """
    if dataset.query.kind == "table":
        raise PreconditionError("table queries can be audited but not used for quantizer synthesis")
    sens = sensitivity(dataset, grid_step)
    value = sens.value * Fraction(exact(safety_factor)) if sens.lower_bound else sens.value
    y_min, y_max = dataset.output_bounds
    q = quantizer_levels(epsilon, y_min, y_max, value, rule=rule, max_levels=max_levels)
    return LinearQuantizer(q, y_min, y_max)
