import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noiseless import (
    Compose,
    Constant,
    DatasetSpec,
    DomainError,
    FiniteRange,
    Identity,
    IntervalUnion,
    LinearQuantizer,
    PostProcess,
    PreconditionError,
    QuerySpec,
    apply,
    audit,
    compose_budget,
    quantize,
    quantizer_levels,
    sensitivity,
    synthesize_quantizer,
)
from noiseless.mechanisms import InsensitiveQueryWarning

UNIT4 = LinearQuantizer(4, 0, 1)
budgets = st.floats(min_value=0.05, max_value=12, allow_nan=False)
sensitivities = st.fractions(min_value=Fraction(1, 64), max_value=4, max_denominator=64)


def unit_box(n):
    return (IntervalUnion.interval(0, 1),) * n


class TestQuantize:
    def test_examples(self):
        b = UNIT4.symbols
        assert quantize(UNIT4, 0.3) == b[1]
        assert quantize(UNIT4, 1.0) == b[3]
        assert quantize(UNIT4, 0.25) == b[1]

    def test_default_symbols_are_midpoints(self):
        assert UNIT4.symbols == (Fraction(1, 8), Fraction(3, 8), Fraction(5, 8), Fraction(7, 8))

    def test_out_of_range_names_value_and_bounds(self):
        with pytest.raises(DomainError, match=r"1\.5.*\[0, 1\]|3/2.*\[0, 1\]"):
            quantize(UNIT4, 1.5)

    def test_custom_symbols_must_be_distinct(self):
        with pytest.raises(PreconditionError):
            LinearQuantizer(2, 0, 1, ("a", "a"))

    def test_empty_range(self):
        with pytest.raises(PreconditionError):
            LinearQuantizer(2, 1, 1)

    @given(st.integers(1, 50), st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, q, a, b):
        spec = LinearQuantizer(q, 0, 1)
        lo, hi = sorted((a, b))
        assert spec.cell_index(lo) <= spec.cell_index(hi)

    @given(st.integers(1, 50), st.lists(st.floats(0, 1), min_size=1, max_size=20))
    def test_vectorized_matches_exact(self, q, xs):
        # float fast path; may differ from exact arithmetic within an ulp of an edge
        xs = [x for x in xs if abs(x * q - round(x * q)) > 1e-9]
        spec = LinearQuantizer(q, 0, 1)
        fast = spec.quantize_array(np.array(xs, dtype=float))
        assert fast.tolist() == [float(spec(x)) for x in xs]


class TestSensitivity:
    def test_mean(self):
        s = sensitivity(DatasetSpec(unit_box(4), QuerySpec.mean()))
        assert s.value == Fraction(1, 4) and s.method == "exact-affine" and not s.lower_bound

    def test_sum(self):
        s = sensitivity(DatasetSpec((IntervalUnion.interval(0, 2),) * 2, QuerySpec.sum()))
        assert s.value == 2

    def test_table_constant_in_each_coordinate(self):
        table = {(a, b): 7 for a in (0, 1) for b in (0, 1)}
        ds = DatasetSpec((FiniteRange([0, 1]),) * 2, QuerySpec.from_table(table))
        assert sensitivity(ds).value == 0

    def test_custom_query_needs_grid(self):
        ds = DatasetSpec(unit_box(2), QuerySpec.custom(lambda x: x[0] * x[1], (0, 1)))
        with pytest.raises(PreconditionError, match="grid"):
            sensitivity(ds)
        s = sensitivity(ds, grid_step=Fraction(1, 4))
        assert s.lower_bound and s.value == 1


class TestLevels:
    @pytest.mark.parametrize("eps, sens, q", [(2, 0.25, 16), (1, 0.5, 4), (0.5, 1, 1)])
    def test_nominal_rule(self, eps, sens, q):
        assert quantizer_levels(eps, 0, 1, sens, rule="nominal") == q

    @pytest.mark.parametrize(
        "eps, sens, q",
        [(2, 0.25, 12), (1, 0.5, 2), (0.5, 1, 1), (3, 0.125, 56), (1.5, 0.5, 2), (2, 1, 4), (0.5, 0.2, 1)],
    )
    def test_strict_rule(self, eps, sens, q):
        assert quantizer_levels(eps, 0, 1, sens) == q

    def test_budget_equal_to_log_of_count(self):
        # log2(3) as a float must still allow three outputs
        assert quantizer_levels(math.log2(3), 0, 1, Fraction(1, 4)) == 8

    def test_insensitive_query(self):
        with pytest.warns(InsensitiveQueryWarning):
            assert quantizer_levels(1, 0, 1, 0, max_levels=64) == 64

    def test_bad_budget(self):
        with pytest.raises(PreconditionError):
            quantizer_levels(0, 0, 1, 1)

    @given(budgets, budgets, sensitivities)
    def test_non_decreasing_in_budget(self, e1, e2, s):
        lo, hi = sorted((e1, e2))
        for rule in ("strict", "nominal"):
            assert quantizer_levels(lo, 0, 1, s, rule=rule) <= quantizer_levels(hi, 0, 1, s, rule=rule)

    @given(budgets, sensitivities, sensitivities)
    def test_non_increasing_in_sensitivity(self, e, s1, s2):
        lo, hi = sorted((s1, s2))
        assert quantizer_levels(e, 0, 1, lo) >= quantizer_levels(e, 0, 1, hi)


class TestSynthesis:
    def test_nominal_rule_overshoots(self):
        ds = DatasetSpec(unit_box(2), QuerySpec.mean())
        nominal = synthesize_quantizer(ds, 1, rule="nominal")
        assert nominal.levels == 4
        assert audit(ds, nominal).epsilon_star == pytest.approx(math.log2(3))

    def test_strict_rule_is_sound(self):
        ds = DatasetSpec(unit_box(2), QuerySpec.mean())
        spec = synthesize_quantizer(ds, 1)
        assert spec.levels == 2
        assert audit(ds, spec).epsilon_star == 1.0

    @settings(deadline=None)
    @given(st.integers(1, 6), st.sampled_from([0.5, 1, 1.5, 2, 2.5, 3]))
    def test_mean_of_unit_entries_is_sound(self, n, eps):
        ds = DatasetSpec(unit_box(n), QuerySpec.mean())
        assert audit(ds, synthesize_quantizer(ds, eps)).satisfies(eps)

    @settings(deadline=None)
    @given(st.integers(1, 6), st.sampled_from([0.5, 1, 1.5, 2, 2.5, 3]))
    def test_strict_rule_is_tight(self, n, eps):
        ds = DatasetSpec(unit_box(n), QuerySpec.mean())
        q = synthesize_quantizer(ds, eps).levels
        assert not audit(ds, LinearQuantizer(q + 1, 0, 1)).satisfies(eps)

    def test_table_queries_rejected(self):
        ds = DatasetSpec((FiniteRange([0, 1]),), QuerySpec.from_table({(0,): 0, (1,): 1}))
        with pytest.raises(PreconditionError, match="table"):
            synthesize_quantizer(ds, 1)

    def test_grid_sensitivity_is_derated(self):
        ds = DatasetSpec(unit_box(2), QuerySpec.custom(lambda x: (x[0] + x[1]) / 2, (0, 1)))
        plain = quantizer_levels(2, 0, 1, Fraction(1, 2))
        derated = synthesize_quantizer(ds, 2, grid_step=Fraction(1, 4))
        assert derated.levels == quantizer_levels(2, 0, 1, 1) < plain


class TestComposition:
    def test_budget_examples(self):
        assert compose_budget(1.5, 2.0) == 3.5
        assert compose_budget(0, 0.7) == 0.7
        assert compose_budget(1, 1) == 2

    def test_negative_budget(self):
        with pytest.raises(PreconditionError):
            compose_budget(-1, 1)

    def test_compose_returns_tuple(self):
        m = Compose((LinearQuantizer(2, 0, 1), Constant("c")))
        assert m(Fraction(3, 4)) == (Fraction(3, 4), "c")

    def test_postprocess_map_must_be_total(self):
        with pytest.raises(PreconditionError, match="not total"):
            PostProcess(LinearQuantizer(2, 0, 1), {Fraction(1, 4): "low"})

    def test_postprocess_applies_map(self):
        m = PostProcess(LinearQuantizer(2, 0, 1), {Fraction(1, 4): "low", Fraction(3, 4): "high"})
        assert m(0.9) == "high"


class TestApply:
    def test_examples(self):
        ds = DatasetSpec((FiniteRange([0, 1]),) * 2, QuerySpec.mean())
        assert apply(Identity(), ds, (0, 1)) == Fraction(1, 2)
        q2 = LinearQuantizer(2, 0, 1)
        assert apply(q2, ds, (0, 1)) == q2.symbols[1]
        assert apply(Constant("c"), ds, (1, 1)) == "c"

    def test_out_of_domain(self):
        ds = DatasetSpec((FiniteRange([0, 1]),) * 2, QuerySpec.mean())
        with pytest.raises(DomainError):
            apply(Identity(), ds, (0, 2))
