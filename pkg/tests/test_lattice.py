import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gromov_lab.core.errors import DimensionCapExceeded, ParameterError, SizeOverflow
from gromov_lab.services.lattice import (
    ball_count,
    parse_radius,
    ratio_series,
    unit_ball_volume,
    volume_ratio,
    witness_radius,
    zn_window,
)
from gromov_lab.services.metric_core import check_isometry, diameter
from tests.oracles import box_count
from tests.strategies import reals


class TestParseRadius:
    @pytest.mark.parametrize(
        "value,expected",
        [
            ("5/2", Fraction(5, 2)),
            (2, Fraction(2)),
            (2.5, Fraction(5, 2)),
            ("0.1", Fraction(1, 10)),
            (Fraction(7, 3), Fraction(7, 3)),
        ],
    )
    def test_exact_values(self, value, expected):
        assert parse_radius(value) == expected

    @pytest.mark.parametrize("value", ["1/0", "a/b", "abc", -1, "-3/2"])
    def test_rejects(self, value):
        with pytest.raises(ParameterError):
            parse_radius(value)


class TestBallCount:
    @pytest.mark.parametrize(
        "n,r,expected",
        [(1, 2.5, 5), (2, 1, 5), (2, 2, 13), (2, "2/1", 13), (1, 0, 1), (3, 1, 7)],
    )
    def test_known_counts(self, n, r, expected):
        assert ball_count(n, r) == expected

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(min_value=1, max_value=3),
        st.fractions(min_value=0, max_value=6, max_denominator=12),
    )
    def test_matches_box_enumeration(self, n, r):
        assert ball_count(n, r) == box_count(n, r)

    def test_boundary_points_count(self):
        # 5/1 passes through (3, 4)
        assert ball_count(2, 5) - ball_count(2, Fraction(49999, 10000)) == 12

    def test_dimension_cap(self):
        with pytest.raises(DimensionCapExceeded) as info:
            ball_count(5, 1)
        assert info.value.exit_code == 3

    def test_dimension_must_be_positive(self):
        with pytest.raises(ParameterError):
            ball_count(0, 1)

    @pytest.mark.slow
    def test_partitioned_count_matches(self):
        assert ball_count(2, 2100, workers=2) == ball_count(2, 2100, workers=1)

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(min_value=1, max_value=3),
        st.fractions(min_value=0, max_value=8, max_denominator=12),
        st.fractions(min_value=0, max_value=8, max_denominator=12),
    )
    def test_non_decreasing_in_radius(self, n, r, s):
        low, high = sorted((r, s))
        assert ball_count(n, low) <= ball_count(n, high)

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(min_value=2, max_value=4),
        st.fractions(min_value=0, max_value=5, max_denominator=12),
    )
    def test_at_least_the_lower_dimension(self, n, r):
        assert ball_count(n, r) >= ball_count(n - 1, r)


class TestAsymptotics:
    def test_unit_ball_volume(self):
        assert unit_ball_volume(1) == pytest.approx(2)
        assert unit_ball_volume(2) == pytest.approx(math.pi)
        assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)

    def test_volume_ratio_tends_to_one(self):
        assert volume_ratio(2, 1000) == pytest.approx(1, rel=1e-2)

    def test_volume_ratio_needs_positive_radius(self):
        with pytest.raises(ParameterError):
            volume_ratio(2, 0)


class TestRatioSeries:
    def test_line_closed_form(self):
        report = ratio_series(1, 2, 0, [100])
        row = report.rows[0]
        assert (row.N, row.Nprime) == (401, 201)
        assert row.ratio == pytest.approx(1.995, abs=1e-3)
        assert report.witness_t == 100.0

    def test_lambda_must_exceed_one(self):
        with pytest.raises(ParameterError):
            ratio_series(1, 1, 0, [1])

    def test_plane_ratio_approaches_lambda_squared(self):
        report = ratio_series(2, 2, 0, [500])
        assert report.rows[0].ratio == pytest.approx(4, rel=0.05)

    def test_rational_parameters(self):
        report = ratio_series(1, "3/2", "1/2", ["2/1", 4])
        assert report.lam == 1.5
        assert [row.t for row in report.rows] == [2.0, 4.0]


class TestWitnessRadius:
    def test_first_witness_on_integer_grid(self):
        assert witness_radius(1, 2, 3, list(range(1, 11))) == 2.0

    def test_single_point_grid(self):
        assert witness_radius(1, 2, 0, [1]) == 1.0

    def test_witness_counts_are_exact(self):
        report = ratio_series(1, 2, 3, list(range(1, 11)))
        row = next(row for row in report.rows if row.t == 2.0)
        assert (row.N, row.Nprime) == (9, 7)
        assert (ball_count(1, 4), ball_count(1, "7/2")) == (9, 7)

    def test_no_witness(self):
        assert witness_radius(1, 2, 100, [1, 2, 3]) is None

    def test_agrees_with_series(self):
        grid = list(range(1, 11))
        assert ratio_series(1, 2, 3, grid).witness_t == witness_radius(1, 2, 3, grid)

    @pytest.mark.parametrize("grid", [[], [2, 1], [1, 1]])
    def test_grid_must_increase(self, grid):
        with pytest.raises(ParameterError):
            witness_radius(1, 2, 0, grid)


class TestWindows:
    def test_line_window(self):
        window = zn_window(1, 1)
        assert window.labels == ("-1", "0", "1")
        assert check_isometry(window, reals(-1, 0, 1), [0, 1, 2]).is_isometric

    def test_zero_radius_is_a_point(self):
        window = zn_window(2, 0)
        assert window.size == 1
        assert window.labels == ("0,0",)

    def test_plane_window(self):
        window = zn_window(2, 1)
        assert window.size == 9
        assert diameter(window) == pytest.approx(2 * math.sqrt(2))

    def test_size_cap(self):
        with pytest.raises(SizeOverflow):
            zn_window(3, 2, max_size=100)
