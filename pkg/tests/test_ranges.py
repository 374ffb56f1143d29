from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from noiseless import (
    DatasetSpec,
    DomainError,
    FiniteRange,
    IntervalUnion,
    JointRelation,
    PreconditionError,
    QuerySpec,
    conditional_range,
    grid_sample,
    product_range,
    substitute,
)
from noiseless.ranges import exact, fmt

small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=8)
intervals = st.lists(st.tuples(small_fractions, small_fractions).map(sorted), max_size=6)


def test_exact_reads_floats_by_repr():
    assert exact(0.3) == Fraction(3, 10)
    assert exact("1/4") == Fraction(1, 4)
    assert exact("a") == "a"
    assert fmt(Fraction(1, 2)) == "1/2"
    assert fmt((Fraction(0), Fraction(1, 4))) == "(0, 1/4)"


class TestFiniteRange:
    def test_sorted_and_deduplicated(self):
        r = FiniteRange([3, 1, 2, 1])
        assert list(r) == [1, 2, 3]
        assert len(r) == 3

    def test_mixed_values_have_a_stable_order(self):
        assert list(FiniteRange(["b", 2, "a", 1])) == [1, 2, "a", "b"]

    def test_set_algebra(self):
        a, b = FiniteRange([1, 2, 3]), FiniteRange([3, 4])
        assert a | b == FiniteRange([1, 2, 3, 4])
        assert a & b == FiniteRange([3])
        assert a - b == FiniteRange([1, 2])
        assert a ^ b == FiniteRange([1, 2, 4])
        assert not a.isdisjoint(b)

    def test_float_membership_is_exact(self):
        assert 0.5 in FiniteRange([Fraction(1, 2)])
        assert 0.1 + 0.2 not in FiniteRange([Fraction(3, 10)])


class TestConditionalRange:
    def test_identity(self):
        rel = JointRelation((v, v) for v in "abc")
        assert conditional_range(rel, "b") == FiniteRange(["b"])

    def test_constant(self):
        rel = JointRelation((v, "k") for v in "abc")
        assert conditional_range(rel, "k") == FiniteRange("abc")

    def test_filter(self):
        rel = JointRelation([(1, "a"), (2, "a"), (3, "b")])
        assert conditional_range(rel, "a") == FiniteRange([1, 2])

    def test_unknown_value_is_named(self):
        rel = JointRelation([(1, "a")])
        with pytest.raises(DomainError, match="zz"):
            conditional_range(rel, "zz")


class TestSubstitute:
    def test_pins_the_others(self):
        ds = DatasetSpec((FiniteRange([0, 1]), FiniteRange([0, 1])), QuerySpec.mean())
        pinned = substitute(ds, 0, (1,))
        assert pinned.domains == (FiniteRange([0, 1]), FiniteRange([1]))

    def test_three_individuals(self):
        ds = DatasetSpec((FiniteRange([0, 1]),) * 3, QuerySpec.sum())
        pinned = substitute(ds, 1, (0, 1))
        assert pinned.domains == (FiniteRange([0]), FiniteRange([0, 1]), FiniteRange([1]))

    def test_out_of_domain(self):
        ds = DatasetSpec((FiniteRange([0, 1]), FiniteRange([0, 1])), QuerySpec.mean())
        with pytest.raises(DomainError):
            substitute(ds, 0, (7,))


class TestProductRange:
    def test_lexicographic(self):
        assert list(product_range([FiniteRange([0, 1])] * 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_singleton(self):
        assert list(product_range([FiniteRange(["a"])])) == [("a",)]

    def test_cardinality(self):
        assert len(list(product_range([FiniteRange([0, 1]), FiniteRange([0, 1, 2])]))) == 6

    def test_continuous_needs_a_grid(self):
        with pytest.raises(PreconditionError, match="grid"):
            list(product_range([IntervalUnion.interval(0, 1)]))


class TestGridSample:
    def test_unit_interval(self):
        assert grid_sample(IntervalUnion.interval(0, 1), 0.5) == FiniteRange([0, Fraction(1, 2), 1])

    def test_union_keeps_endpoints(self):
        iv = IntervalUnion([(0, 0.3), (0.7, 1)])
        expected = FiniteRange([0, Fraction(1, 4), Fraction(3, 10), Fraction(7, 10), Fraction(19, 20), 1])
        assert grid_sample(iv, 0.25) == expected

    def test_empty(self):
        assert len(grid_sample(IntervalUnion(), 0.1)) == 0

    def test_bad_step(self):
        with pytest.raises(PreconditionError):
            grid_sample(IntervalUnion.interval(0, 1), 0)

    @given(intervals, st.fractions(min_value=Fraction(1, 16), max_value=2, max_denominator=16))
    def test_halving_refines(self, pieces, step):
        iv = IntervalUnion(pieces)
        coarse, fine = grid_sample(iv, step), grid_sample(iv, step / 2)
        assert coarse.as_set() <= fine.as_set()


class TestIntervalUnion:
    def test_normalization_merges(self):
        iv = IntervalUnion([(2, 3), (0, 1), (1, 1.5)])
        assert iv.intervals == ((0, Fraction(3, 2)), (2, 3))

    @given(intervals, intervals)
    def test_measure_additive_on_disjoint_parts(self, a, b):
        left = IntervalUnion((lo - 20, hi - 20) for lo, hi in a)
        right = IntervalUnion((lo + 20, hi + 20) for lo, hi in b)
        assert (left | right).measure() == left.measure() + right.measure()

    @given(intervals)
    def test_measure_invariant_under_renormalization(self, pieces):
        iv = IntervalUnion(pieces)
        assert IntervalUnion(iv.intervals).measure() == iv.measure()
        assert IntervalUnion(reversed(pieces)).intervals == iv.intervals

    def test_reversed_endpoints(self):
        with pytest.raises(DomainError):
            IntervalUnion([(1, 0)])


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=1, max_size=20))
def test_conditionals_cover_the_marginal(pairs):
    rel = JointRelation(pairs)
    covered = set()
    for y in rel.y_range:
        covered |= rel.given_y(y).as_set()
    assert covered == rel.x_range.as_set()


class TestDatasetSpec:
    def test_empty_domain(self):
        with pytest.raises(DomainError):
            DatasetSpec((FiniteRange(),), QuerySpec.mean())

    def test_declared_bounds_are_checked(self):
        with pytest.raises(DomainError, match="exceeds"):
            DatasetSpec((IntervalUnion.interval(0, 2),), QuerySpec.sum(output_bounds=(0, 1)))

    def test_affine_arity(self):
        with pytest.raises(DomainError):
            DatasetSpec((FiniteRange([0, 1]),) * 2, QuerySpec.affine([1, 2, 3]))

    def test_table_must_be_total(self):
        with pytest.raises(DomainError, match="not total"):
            DatasetSpec((FiniteRange([0, 1]),), QuerySpec.from_table({(0,): 1}))

    def test_image_bounds_with_negative_weights(self):
        ds = DatasetSpec((IntervalUnion.interval(0, 1), FiniteRange([1, 3])), QuerySpec.affine([-2, 1], 1))
        assert ds.image_bounds() == (0, 4)
