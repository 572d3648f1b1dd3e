"""
Tests for alpha-shadows and round classification
"""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reliaspan.analysis.shadow import (
    as_fraction,
    attack_mask,
    classify_rounds,
    compute_shadow,
    high_alpha_bound,
    shadow_size_bound,
    to_frame,
)
from reliaspan.core.exceptions import InvalidInputError


def brute_shadow(B, alpha, n):
    alpha = Fraction(alpha)
    B = set(B)
    left, right = set(), set()
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            if Fraction(sum(1 for x in range(i, j + 1) if x in B), j - i + 1) >= alpha:
                left.add(i)
                right.add(j)
    return left, right


attacks = st.integers(min_value=1, max_value=24).flatmap(
    lambda n: st.tuples(st.just(n), st.sets(st.integers(min_value=1, max_value=n)))
)
alphas = st.fractions(min_value=Fraction(1, 20), max_value=1, max_denominator=60)


@pytest.mark.unit
class TestComputeShadow:
    def test_single_point_example(self):
        profile = compute_shadow([3], 0.5, 8)
        assert profile.combined == {2, 3, 4}
        assert profile.left == {2, 3}
        assert profile.right == {3, 4}

    def test_empty_attack(self):
        assert compute_shadow([], 0.3, 10).combined == set()

    def test_alpha_one_is_the_attack(self):
        B = {2, 3, 7, 10}
        assert compute_shadow(B, 1, 12).combined == B

    def test_float_alpha_is_exact(self):
        assert as_fraction(0.1) == Fraction(1, 10)
        assert as_fraction(Fraction(2, 7)) == Fraction(2, 7)

    @pytest.mark.parametrize("alpha", [0, -0.5, 1.5])
    def test_rejects_alpha(self, alpha):
        with pytest.raises(InvalidInputError):
            compute_shadow([1], alpha, 4)

    def test_rejects_out_of_range_vertices(self):
        with pytest.raises(InvalidInputError):
            attack_mask([0, 3], 5)

    @given(attacks, alphas)
    @settings(max_examples=150, deadline=None)
    def test_matches_interval_enumeration(self, case, alpha):
        n, B = case
        left, right = brute_shadow(B, alpha, n)
        profile = compute_shadow(sorted(B), alpha, n)
        assert profile.left == left
        assert profile.right == right

    @given(attacks, st.fractions(min_value=Fraction(1, 10), max_value=Fraction(99, 100), max_denominator=100))
    @settings(max_examples=100, deadline=None)
    def test_size_bound(self, case, alpha):
        n, B = case
        assert len(compute_shadow(sorted(B), alpha, n).combined) <= shadow_size_bound(len(B), alpha)

    @given(attacks, st.fractions(min_value=Fraction(67, 100), max_value=Fraction(99, 100), max_denominator=100))
    @settings(max_examples=100, deadline=None)
    def test_high_alpha_bound(self, case, alpha):
        n, B = case
        assert len(compute_shadow(sorted(B), alpha, n).combined) <= high_alpha_bound(len(B), alpha)

    def test_high_alpha_bound_range(self):
        with pytest.raises(InvalidInputError):
            high_alpha_bound(5, 0.5)
        assert high_alpha_bound(4, Fraction(3, 4)) == 8


@pytest.mark.unit
class TestClassifyRounds:
    def test_attacked_points_are_round_zero(self):
        rounds = classify_rounds([2, 5], 0.9, 10)
        assert rounds.round_of(2) == 0
        assert rounds.round_of(5) == 0

    def test_depth_example(self):
        rounds = classify_rounds([3], 0.9, 8)
        assert rounds.round_of(5) == 2
        assert rounds.round_of(4) == 1

    def test_unreached_points_are_infinite(self):
        rounds = classify_rounds([], 0.9, 64)
        assert math.isinf(rounds.round_of(64))
        assert rounds.max_round == 6

    def test_far_point_buried_in_last_round(self):
        assert classify_rounds([1], 0.9, 64).round_of(64) == 6

    def test_shadow_sets_are_nested(self):
        rounds = classify_rounds([4, 9, 10, 20], 0.8, 32)
        for k in range(rounds.max_round):
            assert rounds.shadow(k) <= rounds.shadow(k + 1)

    def test_rejects_sp(self):
        with pytest.raises(InvalidInputError):
            classify_rounds([1], 1.0, 4)

    @given(attacks)
    @settings(max_examples=60, deadline=None)
    def test_depth_is_anti_monotone_in_sp(self, case):
        n, B = case
        high = classify_rounds(sorted(B), 0.9, n).depth
        low = classify_rounds(sorted(B), 0.45, n).depth
        assert np.all(high >= low)

    def test_frame(self):
        profile = compute_shadow([3], 0.5, 8)
        frame = to_frame(profile, classify_rounds([3], 0.5, 8))
        assert list(frame.columns) == ["vertex", "in_left", "in_right", "depth"]
        assert frame.loc[frame.vertex == 3, "depth"].item() == "0"
        assert frame.in_left.sum() == 2
