"""
Tests for the locality-sensitive ordering family
"""
import itertools
from functools import cmp_to_key

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reliaspan.core.exceptions import InvalidInputError
from reliaspan.geometry import lso
from reliaspan.geometry.lso import (
    NormalizationMap,
    OrderingFamily,
    build_orderings,
    compare,
    identity_family,
    keys,
    lso_constant_bound,
    sample_points,
    sort_order,
    to_fixed,
    verify_lso_property,
    walecki_path_of,
    walecki_position,
)


@pytest.mark.unit
class TestWalecki:
    @pytest.mark.parametrize("m", [1, 2, 4, 8])
    def test_paths_are_hamiltonian_and_partition_edges(self, m):
        seen = set()
        for k in range(m):
            pos = walecki_position(np.arange(2 * m), k, m)
            assert sorted(pos.tolist()) == list(range(2 * m))
            order = np.argsort(pos)
            for a, b in zip(order, order[1:]):
                edge = (min(a, b), max(a, b))
                assert edge not in seen
                assert walecki_path_of(int(a), int(b), m) == k
                seen.add(edge)
        assert len(seen) == m * (2 * m - 1)


@pytest.mark.unit
class TestFamily:
    def test_parameters(self):
        family = build_orderings(0.5, 1, w=6)
        assert (family.D, family.L, family.m) == (2, 4, 8)
        assert family.shifts == (0, 21, 42)
        assert family.count == 2 * 3 * 4 * 8

    def test_coarse_family_size(self):
        assert OrderingFamily(varsigma=0.9, d=1, w=20).count == 72

    def test_index_round_trip(self):
        family = build_orderings(0.5, 2, w=10)
        for index in (0, 1, 17, family.count - 1):
            sigma = family.ordering(index)
            assert family.index_of(sigma.shift, sigma.offset, sigma.path, sigma.reverse) == index
        with pytest.raises(InvalidInputError):
            family.ordering(family.count)

    def test_count_against_constant(self):
        family = build_orderings(1 / 8, 2)
        assert family.count <= lso_constant_bound(2) * 8**2 * 3
        assert family.c_lso <= lso_constant_bound(2)

    def test_boundaries(self):
        family = build_orderings(0.5, 1, w=10)
        assert family.boundaries(3) == (11, 7, 3, 0)
        assert family.boundaries(0) == (11, 8, 4, 0)

    @pytest.mark.parametrize("varsigma,d", [(0.0, 2), (1.0, 2), (0.5, 0)])
    def test_rejects_parameters(self, varsigma, d):
        with pytest.raises(InvalidInputError):
            build_orderings(varsigma, d)

    def test_rejects_wide_digits(self):
        with pytest.raises(InvalidInputError, match="64-bit"):
            build_orderings(1e-3, 8)

    def test_descriptor(self):
        family = identity_family()
        assert family.count == 1
        assert family.to_dict()["identity"] is True


@pytest.mark.unit
class TestComparator:
    def test_identity_is_numeric_order(self):
        family = identity_family(w=10)
        sigma = family.ordering(0)
        assert compare(family, sigma, [3], [700]) == -1
        assert compare(family, sigma, [700], [3]) == 1

    def test_equal_points_rejected(self):
        family = build_orderings(0.5, 2, w=10)
        with pytest.raises(InvalidInputError):
            compare(family, family.ordering(0), [5, 5], [5, 5])

    @given(st.integers(min_value=0, max_value=2**16), st.data())
    @settings(max_examples=50, deadline=None)
    def test_total_order_axioms(self, index, data):
        family = build_orderings(0.25, 2, w=12)
        sigma = family.ordering(index % family.count)
        coords = st.lists(st.integers(min_value=0, max_value=2**12 - 1), min_size=2, max_size=2)
        p, q, r = (data.draw(coords) for _ in range(3))
        if p != q:
            assert compare(family, sigma, p, q) == -compare(family, sigma, q, p)
        if len({tuple(p), tuple(q), tuple(r)}) == 3:
            if compare(family, sigma, p, q) < 0 and compare(family, sigma, q, r) < 0:
                assert compare(family, sigma, p, r) < 0

    def test_sort_matches_comparator(self):
        family = build_orderings(0.25, 2, w=16)
        rng = np.random.default_rng(4)
        X = np.unique(rng.integers(0, 2**16, size=(300, 2)), axis=0)
        for index in (0, 5, family.count // 2 + 1):
            sigma = family.ordering(index)
            by_keys = X[sort_order(family, sigma, X)]
            by_compare = sorted(X.tolist(), key=cmp_to_key(lambda a, b: compare(family, sigma, a, b)))
            np.testing.assert_array_equal(by_keys, np.asarray(by_compare))

    def test_reverse_flips_order(self):
        family = build_orderings(0.5, 1, w=8)
        forward = family.ordering(family.index_of(1, 2, 3, False))
        backward = family.ordering(family.index_of(1, 2, 3, True))
        X = np.arange(0, 256, 7)[:, None]
        np.testing.assert_array_equal(sort_order(family, forward, X), sort_order(family, backward, X)[::-1])
        assert keys(family, forward, X).shape[1] == len(family.boundaries(2)) - 1


@pytest.mark.unit
class TestLSOProperty:
    def test_every_grid_pair_in_one_dimension(self):
        family = build_orderings(0.5, 1, w=6)
        samples = np.arange(64)[:, None]
        for a, b in itertools.combinations(range(64), 2):
            assert verify_lso_property(family, [a], [b], samples) is not None, (a, b)

    def test_witness_confines_points(self):
        family = build_orderings(0.5, 1, w=6)
        samples = np.arange(64)[:, None]
        witness = verify_lso_property(family, [10], [45], samples)
        sigma = witness.ordering
        order = sort_order(family, sigma, samples)
        ranked = samples[order, 0].tolist()
        p, q, z = witness.p[0], witness.q[0], witness.z[0]
        assert {p, q} == {10, 45}
        i_p, i_z, i_q = ranked.index(p), ranked.index(z), ranked.index(q)
        assert i_p < i_z <= i_q
        radius = 0.5 * witness.length
        assert all(abs(x - p) <= radius for x in ranked[i_p + 1 : i_z])
        assert all(abs(x - q) <= radius for x in ranked[i_z + 1 : i_q])

    def test_far_corners_in_two_dimensions(self):
        family = build_orderings(0.25, 2, w=10)
        assert verify_lso_property(family, [0, 0], [1023, 1023]) is not None

    def test_adjacent_cells(self):
        family = build_orderings(0.25, 2, w=10)
        witness = verify_lso_property(family, [511, 300], [512, 300])
        assert witness is not None
        assert witness.z == witness.q

    def test_random_pairs(self):
        family = build_orderings(0.25, 2)
        rng = np.random.default_rng(0)
        for _ in range(100):
            p, q = rng.integers(0, 2**53, size=(2, 2))
            if not np.array_equal(p, q):
                assert verify_lso_property(family, p, q) is not None

    @pytest.mark.slow
    @pytest.mark.parametrize("d", [1, 2])
    @pytest.mark.parametrize("varsigma", [0.25, 0.125])
    def test_far_and_close_pairs(self, d, varsigma):
        family = build_orderings(varsigma, d)
        top = 1 << family.w
        rng = np.random.default_rng(d * 100 + int(1 / varsigma))
        failures = []
        for k in range(2500):
            p = rng.integers(0, top, size=d)
            if k % 2:
                q = rng.integers(0, top, size=d)
            else:
                spread = 1 << int(rng.integers(0, 24))
                q = np.clip(p + rng.integers(-spread, spread + 1, size=d), 0, top - 1)
            if np.array_equal(p, q):
                continue
            if verify_lso_property(family, p, q) is None:
                failures.append((p.tolist(), q.tolist()))
        assert failures == []

    def test_default_samples_include_the_pair(self, mocker):
        family = build_orderings(0.5, 1, w=6)
        spy = mocker.spy(lso, "sample_points")
        assert verify_lso_property(family, [10], [45]) is not None
        samples = spy.spy_return
        assert [10] in samples.tolist() and [45] in samples.tolist()

    def test_identity_family_close_pair(self):
        family = identity_family(w=6)
        samples = np.arange(64)[:, None]
        assert verify_lso_property(family, [20], [21], samples) is not None

    def test_distinct_points_required(self):
        with pytest.raises(InvalidInputError):
            verify_lso_property(build_orderings(0.5, 1, w=6), [3], [3])


@pytest.mark.unit
class TestNormalization:
    def test_fit_into_unit_cube(self):
        pts = np.array([[-3.0, 2.0], [5.0, 4.0], [1.0, -6.0]])
        norm = NormalizationMap.fit(pts)
        unit = norm.apply(pts)
        assert unit.min() >= 0 and unit.max() < 1
        d = np.linalg.norm(unit[0] - unit[1])
        assert norm.original_distance(d) == pytest.approx(np.linalg.norm(pts[0] - pts[1]))

    def test_to_fixed(self):
        np.testing.assert_array_equal(to_fixed(np.array([[0.5, 0.25]]), 4), [[8, 4]])
        with pytest.raises(InvalidInputError):
            to_fixed(np.array([[1.0]]), 4)

    def test_sample_grid(self):
        grid = sample_points(2, 10, grid_bits=2)
        assert grid.shape == (16, 2)
        assert set(grid[:, 0].tolist()) == {128, 384, 640, 896}
