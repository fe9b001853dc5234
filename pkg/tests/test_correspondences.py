from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gromov_lab.core.errors import (
    CapExceeded,
    EmptyRelation,
    EmptySubset,
    IndexOutOfRange,
    NotACorrespondence,
    ParameterError,
)
from gromov_lab.core.random import Lcg64
from gromov_lab.services.correspondences import (
    Correspondence,
    Relation,
    distortion,
    enumerate_minimal_correspondences,
    full_correspondence,
    identity_correspondence,
    nonempty_subsets,
    product_correspondence,
)
from gromov_lab.services.correspondences import hausdorff_distance
from gromov_lab.services.metric_core import PointSet1D, diameter, from_reals, l1_product, random_space
from tests.oracles import all_correspondences, as_correspondence, minimal_correspondences
from tests.strategies import euclidean_spaces, reals

# Distances in products are sums of two rounded floats; the inequality can
# only be off by a few ulps of the largest product distance
SUM_ROUNDING = 4 * np.finfo(float).eps


@lru_cache(maxsize=None)
def _correspondences(n_x, n_y):
    return [as_correspondence(rel) for rel in all_correspondences(n_x, n_y)]


def _pick(rng, n_x, n_y):
    options = _correspondences(n_x, n_y)
    return options[rng.randint(0, len(options) - 1)]


def _integer_line(rng):
    points = sorted({rng.randint(0, 50) for _ in range(rng.randint(1, 3))})
    return from_reals(PointSet1D(tuple(points)))


def _product_and_sum(rng, a1, a2, b1, b2):
    r1, r2 = _pick(rng, a1.size, a2.size), _pick(rng, b1.size, b2.size)
    lhs = distortion(product_correspondence(r1, r2), l1_product(a1, b1), l1_product(a2, b2))
    return lhs, distortion(r1, a1, a2) + distortion(r2, b1, b2)


class TestRelations:
    def test_pairs_are_sorted_and_deduplicated(self):
        rel = Relation(((1, 0), (0, 1), (1, 0)), 2, 2)
        assert rel.pairs == ((0, 1), (1, 0))
        assert len(rel) == 2

    def test_empty(self):
        with pytest.raises(EmptyRelation):
            Relation((), 2, 2)

    def test_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            Relation(((0, 2),), 2, 2)

    def test_correspondence_needs_both_projections(self):
        with pytest.raises(NotACorrespondence) as info:
            Correspondence(((0, 0), (1, 0)), 2, 2)
        assert (info.value.side, info.value.index) == ("y", 1)

    def test_minimality(self):
        full = full_correspondence(2, 2)
        assert full.is_correspondence()
        assert not full.is_minimal()
        assert full.removable_pairs() == [(0, 0), (0, 1), (1, 0), (1, 1)]
        assert identity_correspondence(3).is_minimal()

    def test_image(self):
        rel = Correspondence(((0, 0), (0, 1), (1, 2)), 2, 3)
        assert rel.image(0) == frozenset({0, 1})
        assert rel.image(1) == frozenset({2})


class TestDistortion:
    def test_identity(self, three_points):
        assert distortion(identity_correspondence(3), three_points, three_points) == 0

    def test_full_onto_a_point(self, unit_pair, point):
        assert distortion(full_correspondence(2, 1), unit_pair, point) == 1

    def test_bijection(self):
        rel = Correspondence(((0, 0), (1, 1)), 2, 2)
        assert distortion(rel, reals(0, 1), reals(0, 3)) == 2

    def test_indices_must_fit_the_spaces(self, unit_pair, three_points):
        rel = identity_correspondence(3)
        with pytest.raises(IndexOutOfRange):
            distortion(rel, unit_pair, three_points)


class TestProducts:
    def test_cardinality(self):
        r1 = identity_correspondence(2)
        r2 = Correspondence(((0, 0), (1, 0), (1, 1)), 2, 2)
        assert len(product_correspondence(r1, r2)) == 6

    def test_distortion_of_identity_times_bijection(self, unit_pair):
        r1 = identity_correspondence(2)
        r2 = identity_correspondence(2)
        rel = product_correspondence(r1, r2)
        a1b1 = l1_product(unit_pair, unit_pair)
        a2b2 = l1_product(unit_pair, reals(0, 2))
        assert distortion(rel, a1b1, a2b2) == 1

    def test_subadditive_exactly_on_integer_points(self):
        rng = Lcg64(2024)
        for _ in range(500):
            a1, a2, b1, b2 = (_integer_line(rng) for _ in range(4))
            lhs, rhs = _product_and_sum(rng, a1, a2, b1, b2)
            assert lhs <= rhs

    def test_subadditive_to_rounding_on_euclidean_factors(self):
        rng = Lcg64(2025)
        for _ in range(500):
            a1, a2, b1, b2 = (random_space(rng, rng.randint(1, 3)) for _ in range(4))
            lhs, rhs = _product_and_sum(rng, a1, a2, b1, b2)
            magnitude = max(diameter(l1_product(a1, b1)), diameter(l1_product(a2, b2)))
            assert lhs <= rhs + SUM_ROUNDING * magnitude


class TestDistortionLaws:
    @settings(max_examples=50, deadline=None)
    @given(euclidean_spaces(), euclidean_spaces(), st.data())
    def test_monotone_under_inclusion(self, x, y, data):
        grid = [(i, j) for i in range(x.size) for j in range(y.size)]
        larger = data.draw(st.sets(st.sampled_from(grid), min_size=1))
        smaller = data.draw(st.sets(st.sampled_from(sorted(larger)), min_size=1))
        small_dis = distortion(Relation(tuple(smaller), x.size, y.size), x, y)
        assert small_dis <= distortion(Relation(tuple(larger), x.size, y.size), x, y)

    @settings(max_examples=50, deadline=None)
    @given(euclidean_spaces(), euclidean_spaces(), st.data())
    def test_at_least_the_diameter_gap(self, x, y, data):
        corr = data.draw(st.sampled_from(_correspondences(x.size, y.size)))
        assert distortion(corr, x, y) >= abs(diameter(x) - diameter(y))


class TestHausdorff:
    def test_same_set(self, three_points):
        assert hausdorff_distance([0, 2], [2, 0], three_points) == 0

    @given(
        st.sets(st.integers(min_value=0, max_value=3), min_size=1),
        st.sets(st.integers(min_value=0, max_value=3), min_size=1),
    )
    def test_zero_exactly_for_equal_subsets(self, first, second):
        value = hausdorff_distance(sorted(first), sorted(second), reals(0, 1, 3, 7))
        assert (value == 0) == (first == second)

    def test_farthest_uncovered_point(self):
        assert hausdorff_distance([0], [0, 1], reals(0, 2)) == 2

    def test_max_min(self):
        assert hausdorff_distance([0, 1], [2], reals(0, 1, 2)) == 2

    def test_empty_subsets(self, three_points):
        with pytest.raises(EmptySubset) as info:
            hausdorff_distance([], [0], three_points)
        assert info.value.name == "I"
        with pytest.raises(EmptySubset):
            hausdorff_distance([0], [], three_points)

    def test_index_out_of_range(self, three_points):
        with pytest.raises(ParameterError):
            hausdorff_distance([0], [3], three_points)


class TestMinimalEnumeration:
    def test_single_target(self):
        found = list(enumerate_minimal_correspondences(2, 1))
        assert [c.pairs for c in found] == [((0, 0), (1, 0))]

    def test_two_by_two_are_the_bijections(self):
        found = [c.pairs for c in enumerate_minimal_correspondences(2, 2)]
        assert found == [((0, 0), (1, 1)), ((0, 1), (1, 0))]

    @pytest.mark.parametrize("n_x,n_y", [(1, 1), (1, 3), (2, 3), (3, 2), (3, 3), (2, 4)])
    def test_matches_brute_force(self, n_x, n_y):
        found = {c.pairs for c in enumerate_minimal_correspondences(n_x, n_y)}
        expected = {rel.pairs for rel in minimal_correspondences(n_x, n_y)}
        assert found == expected

    def test_three_onto_two(self):
        assert len(list(enumerate_minimal_correspondences(3, 2))) == 6

    def test_every_result_is_minimal(self):
        for corr in enumerate_minimal_correspondences(3, 3):
            assert corr.is_minimal()

    def test_lexicographic_by_images(self):
        keys = [
            tuple(tuple(sorted(c.image(i))) for i in range(3))
            for c in enumerate_minimal_correspondences(3, 3)
        ]
        assert keys == sorted(keys)
        assert len(keys) == len(set(keys))

    def test_cap(self):
        with pytest.raises(CapExceeded):
            next(enumerate_minimal_correspondences(5, 5, cap=20))

    def test_sizes_must_be_positive(self):
        with pytest.raises(ParameterError):
            next(enumerate_minimal_correspondences(0, 2))

    def test_subsets_are_lexicographic(self):
        assert nonempty_subsets(2) == ((0,), (0, 1), (1,))

    def test_oracle_helper(self):
        assert as_correspondence(minimal_correspondences(1, 1)[0]).pairs == ((0, 0),)
