"""
Tests for the bad-pair graph, the minimum extension and loss rates
"""
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import min_vertex_cover
from reliaspan.analysis.loss import BadPairGraph, Extension, loss_rate, loss_report, min_extension
from reliaspan.core.exceptions import InvalidInputError, UndefinedLossError

small_graphs = st.integers(min_value=2, max_value=14).flatmap(
    lambda k: st.sets(
        st.tuples(st.integers(min_value=1, max_value=k), st.integers(min_value=1, max_value=k))
        .filter(lambda p: p[0] < p[1]),
        max_size=30,
    )
)


@pytest.mark.unit
class TestBadPairGraph:
    def test_from_pairs(self):
        g = BadPairGraph.from_pairs([(1, 4), (4, 9)], survivors=[1, 2, 4, 9])
        assert g.count == len(g) == 2
        assert list(g.pairs()) == [(1, 4), (4, 9)]
        assert g.contains(4, 1)
        assert not g.contains(1, 2)
        assert not g.contains(3, 4)

    def test_from_matrix_symmetrizes(self):
        m = np.zeros((3, 3), dtype=bool)
        m[0, 2] = True
        m[1, 1] = True
        g = BadPairGraph.from_matrix([5, 6, 7], m)
        assert g.matrix[2, 0]
        assert not g.matrix[1, 1]
        assert g.count == 1

    def test_rejects_non_survivor(self):
        with pytest.raises(InvalidInputError):
            BadPairGraph.from_pairs([(1, 3)], survivors=[1, 2])
        with pytest.raises(InvalidInputError):
            BadPairGraph.from_matrix([1, 2], np.zeros((3, 3), dtype=bool))

    def test_is_cover(self):
        g = BadPairGraph.from_pairs([(1, 2), (2, 3), (3, 4)])
        assert g.is_cover({2, 3})
        assert not g.is_cover({1, 4})


@pytest.mark.unit
class TestMinExtension:
    def test_no_pairs(self):
        ext = min_extension([])
        assert ext == Extension(lower=0, upper=0, exact=True, witness=frozenset())

    def test_star(self):
        ext = min_extension([(1, x) for x in range(2, 7)])
        assert (ext.lower, ext.upper, ext.exact) == (1, 1, True)
        assert ext.witness == frozenset({1})

    def test_odd_cycle(self):
        ext = min_extension([(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)])
        assert ext.upper == 3
        assert ext.exact

    def test_complete_bipartite(self):
        pairs = [(a, b) for a in range(1, 5) for b in range(10, 17)]
        ext = min_extension(pairs)
        assert ext.upper == 4
        assert ext.witness == frozenset(range(1, 5))

    @given(small_graphs)
    @settings(max_examples=80, deadline=None)
    def test_exact_matches_enumeration(self, pairs):
        ext = min_extension(pairs)
        assert ext.exact
        assert ext.upper == min_vertex_cover(pairs)
        assert BadPairGraph.from_pairs(pairs).is_cover(ext.witness)

    @given(small_graphs)
    @settings(max_examples=60, deadline=None)
    def test_bounds_without_exact_search(self, pairs):
        truth = min_vertex_cover(pairs)
        ext = min_extension(pairs, kernel_limit=0)
        assert ext.lower <= truth <= ext.upper
        assert len(ext.witness) == ext.upper
        assert BadPairGraph.from_pairs(pairs).is_cover(ext.witness)

    def test_maximal_matching_lower_bound(self):
        pairs = list(itertools.combinations(range(1, 9), 2))
        exact = min_extension(pairs, kernel_limit=0)
        loose = min_extension(pairs, kernel_limit=0, matching_edge_limit=0)
        assert exact.lower == 4
        assert loose.lower <= exact.lower <= 7 <= loose.upper


@pytest.mark.unit
class TestLossRate:
    def test_definition(self):
        assert loss_rate(10, Extension(2, 2, True, frozenset({1, 2}))) == (0.2, 0.2)

    def test_empty_attack(self):
        with pytest.raises(UndefinedLossError, match="loss undefined for empty attack"):
            loss_rate(0, Extension(0, 0, True, frozenset()))

    def test_whole_domain_attacked(self):
        graph = BadPairGraph(survivors=np.empty(0, dtype=np.int64), matrix=np.zeros((0, 0), dtype=bool))
        report = loss_report(graph, attack_size=12, variant="expectation")
        assert report.loss_rate_bounds == (0.0, 0.0)

    def test_report_dict(self):
        graph = BadPairGraph.from_pairs([(1, 5), (2, 5)], survivors=[1, 2, 5, 7])
        report = loss_report(graph, attack_size=4, variant="probabilistic", stairway_bad=2)
        out = report.to_dict()
        assert out["bad_pairs"] == 2
        assert out["extension_upper"] == 1
        assert out["loss_upper"] == 0.25
        assert out["stairway_loss"] == 0.5
        assert out["variant"] == "probabilistic"
