"""
Tests for stairways, bad points, monotone paths and 1-D damaged pairs
"""
import networkx as nx
import numpy as np
import pytest

from oracles import damaged_pairs, forward_dag, has_stairway
from reliaspan.analysis.loss import loss_report
from reliaspan.analysis.resilience1d import (
    Direction,
    Stairway,
    bad_mask,
    badness_by_round,
    check_stairway,
    damaged_pairs_1d,
    find_stairway,
    is_bad,
    monotone_path,
    stairway_set,
    usable_bound,
)
from reliaspan.analysis.shadow import attack_mask
from reliaspan.attacks.generators import generate, remark_middle
from reliaspan.construction.spanner1d import boost_union, build_spanner
from reliaspan.core.exceptions import InvalidInputError


def sample_attacks(n):
    yield generate("uniform", n, size=n // 4, seed=1).vertices
    yield generate("uniform", n, size=n // 2, seed=2).vertices
    yield generate("block", n, size=10, seed=3).vertices
    yield generate("multiblock", n, size=14, seed=4, blocks=3).vertices
    yield generate("periodic", n, fraction=0.2, seed=5).vertices


@pytest.mark.unit
class TestStairways:
    def test_empty_attack_has_stairways(self, sparse_spanner):
        s = sparse_spanner
        for v in (1, 20, 64):
            for direction in Direction:
                st = find_stairway(s, [], v, direction)
                assert st is not None
                assert check_stairway(s, [], st) == []

    def test_degenerate_stairway_is_origin(self):
        s = build_spanner(32, 0.25, seed=2)
        st = find_stairway(s, [5, 6], 9, "right")
        assert st.points == (9,)
        assert not is_bad(s, [5, 6], 9)

    def test_attacked_origin(self, sparse_spanner):
        with pytest.raises(InvalidInputError):
            find_stairway(sparse_spanner, [7], 7, "left")
        with pytest.raises(InvalidInputError):
            find_stairway(sparse_spanner, [7], 65, "left")

    def test_usable_bound_is_threshold(self, sparse_spanner):
        s = sparse_spanner
        for i in range(s.M + 1):
            row = s.members(i).tolist()
            right = usable_bound(s, i, Direction.RIGHT)
            left = usable_bound(s, i, Direction.LEFT)
            for x in row:
                assert (x >= right) == s.is_clique([y for y in row if y >= x], i)
                assert (x <= left) == s.is_clique([y for y in row if y <= x], i)

    def test_check_stairway_flags_problems(self, sparse_spanner):
        s = sparse_spanner
        blocked = attack_mask([2], s.n)
        st = Stairway(origin=1, direction=Direction.RIGHT, points=(1, 2))
        problems = check_stairway(s, blocked, st)
        assert any("attacked" in p for p in problems)
        backwards = Stairway(origin=30, direction=Direction.RIGHT, points=(30, 10))
        assert any("monotone" in p for p in check_stairway(s, [], backwards))

    @pytest.mark.parametrize("attack_index", range(5))
    def test_exhaustive_search_matches_oracle(self, sparse_spanner, attack_index):
        s = sparse_spanner
        B = list(sample_attacks(s.n))[attack_index]
        blocked = attack_mask(B, s.n)
        mask = bad_mask(s, blocked, exhaustive=True)
        for v in range(1, s.n + 1):
            expected_bad = blocked[v - 1] or not (
                has_stairway(s, blocked, v, right=True) and has_stairway(s, blocked, v, right=False)
            )
            assert mask[v - 1] == expected_bad, v

    @pytest.mark.parametrize("attack_index", range(5))
    def test_found_stairways_are_valid(self, medium_spanner, attack_index):
        s = medium_spanner
        blocked = attack_mask(list(sample_attacks(s.n))[attack_index], s.n)
        for v in np.flatnonzero(~blocked).tolist():
            for direction in Direction:
                st = find_stairway(s, blocked, v + 1, direction, exhaustive=True)
                if st is not None:
                    assert check_stairway(s, blocked, st) == []

    def test_interval_witness_bad_is_superset(self, sparse_spanner):
        s = sparse_spanner
        for B in sample_attacks(s.n):
            strict = bad_mask(s, B, exhaustive=True)
            witness_only = bad_mask(s, B, exhaustive=False)
            assert np.all(witness_only >= strict)

    def test_stairway_set(self, sparse_spanner):
        s = sparse_spanner
        B = generate("uniform", s.n, size=16, seed=9).vertices
        good = stairway_set(s, B)
        assert good.isdisjoint(B)
        assert good == {v for v in range(1, s.n + 1) if not is_bad(s, B, v)}
        assert stairway_set(s, []) == set(range(1, s.n + 1))


@pytest.mark.unit
class TestMonotonePath:
    def test_direct_edge(self, sparse_spanner):
        assert monotone_path(sparse_spanner, [], 3, 4) == [3, 4]

    def test_endpoints_swapped(self, sparse_spanner):
        path = monotone_path(sparse_spanner, [], 60, 2)
        assert path[0] == 2 and path[-1] == 60

    def test_rejects_attacked_endpoint(self, sparse_spanner):
        with pytest.raises(InvalidInputError):
            monotone_path(sparse_spanner, [5], 5, 30)
        with pytest.raises(InvalidInputError):
            monotone_path(sparse_spanner, [], 5, 5)

    @pytest.mark.parametrize("u,v", [(0, 5), (5, 0), (5, 65), (5, 200), (-1, 3)])
    def test_rejects_vertices_outside_the_line(self, sparse_spanner, u, v):
        with pytest.raises(InvalidInputError, match="outside"):
            monotone_path(sparse_spanner, [], u, v)

    @pytest.mark.parametrize("v", [0, 65])
    def test_is_bad_rejects_vertices_outside_the_line(self, sparse_spanner, v):
        with pytest.raises(InvalidInputError, match="outside"):
            is_bad(sparse_spanner, [3], v)

    @pytest.mark.parametrize("attack_index", range(5))
    def test_agrees_with_reachability(self, sparse_spanner, attack_index):
        s = sparse_spanner
        blocked = attack_mask(list(sample_attacks(s.n))[attack_index], s.n)
        dag = forward_dag(s, blocked)
        good = ~bad_mask(s, blocked)
        rng = np.random.default_rng(attack_index)
        survivors = np.flatnonzero(~blocked) + 1
        for _ in range(200):
            u, v = sorted(rng.choice(survivors, size=2, replace=False).tolist())
            path = monotone_path(s, blocked, u, v)
            if good[u - 1] and good[v - 1]:
                assert path is not None
            if path is None:
                assert not nx.has_path(dag, u, v)
                continue
            assert path[0] == u and path[-1] == v
            assert all(a < b and s.has_edge(a, b) for a, b in zip(path, path[1:]))
            assert not blocked[np.asarray(path) - 1].any()

    def test_union_uses_reachability(self):
        union = boost_union([build_spanner(64, 0.25, c_const=1, seed=k) for k in range(2)])
        B = generate("block", 64, size=8, seed=6).vertices
        blocked = attack_mask(B, 64)
        survivors = np.flatnonzero(~blocked) + 1
        u, v = int(survivors[0]), int(survivors[-1])
        path = monotone_path(union, blocked, u, v)
        dag = forward_dag(union, blocked)
        assert (path is not None) == nx.has_path(dag, u, v)


@pytest.mark.unit
class TestDamagedPairs:
    def test_empty_attack(self, sparse_spanner):
        assert damaged_pairs_1d(sparse_spanner, []).count == 0

    def test_only_an_edge_survives(self, sparse_spanner):
        s = sparse_spanner
        B = [x for x in range(1, s.n + 1) if x not in (10, 11)]
        assert damaged_pairs_1d(s, B).count == 0

    @pytest.mark.parametrize("attack_index", range(5))
    def test_matches_oracle(self, sparse_spanner, attack_index):
        s = sparse_spanner
        blocked = attack_mask(list(sample_attacks(s.n))[attack_index], s.n)
        assert set(damaged_pairs_1d(s, blocked).pairs()) == damaged_pairs(s, blocked)

    def test_union_matches_oracle(self):
        union = boost_union([build_spanner(64, 0.25, c_const=1, seed=k) for k in (3, 4)])
        blocked = attack_mask(generate("uniform", 64, size=24, seed=8).vertices, 64)
        assert set(damaged_pairs_1d(union, blocked).pairs()) == damaged_pairs(union, blocked)

    def test_pairs_between_good_points_survive(self, sparse_spanner):
        s = sparse_spanner
        for B in sample_attacks(s.n):
            bad = bad_mask(s, B)
            for u, v in damaged_pairs_1d(s, B).pairs():
                assert bad[u - 1] or bad[v - 1]

    @pytest.mark.slow
    def test_remark_attack_splits_the_line(self):
        s = build_spanner(4096, 0.25, c_const=1, seed=1)
        attack = remark_middle(s)
        pairs = damaged_pairs_1d(s, attack.vertices)
        survivors = pairs.survivors
        lo = survivors[survivors < s.n // 2]
        hi = survivors[survivors > s.n // 2]
        for u in lo[::97].tolist():
            for v in hi[::89].tolist():
                assert pairs.contains(u, v)
        assert monotone_path(s, attack.vertices, int(lo[0]), int(hi[-1])) is None

        residual = nx.Graph(s.edges())
        residual.add_nodes_from(range(1, s.n + 1))
        residual.remove_nodes_from(attack.vertices)
        sizes = sorted((len(c) for c in nx.connected_components(residual)), reverse=True)
        floor = s.n / 2 - 16 * s.n ** (1 / 3) / s.params.eps_step * np.log2(s.n)
        assert len(sizes) >= 2
        assert sizes[1] >= floor and sizes[1] > 1000

        report = loss_report(pairs, attack.size, "expectation")
        assert report.loss_rate_bounds[0] >= 10 * s.params.rho


@pytest.mark.unit
def test_badness_by_round(sparse_spanner):
    s = sparse_spanner
    B = generate("uniform", s.n, size=16, seed=12).vertices
    table = badness_by_round(s, B)
    assert list(table.columns) == ["round", "points", "bad", "bad_rate", "bound"]
    assert table["points"].sum() <= s.n - len(B)
    assert (table["bad"] <= table["points"]).all()
    if (table["round"] == 1).any():
        assert table.loc[table["round"] == 1, "bound"].item() == pytest.approx((0.25 / 2) / 32)
