import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_pairs, brute_force_has_cycle
from sbcn.model import (
    ArcMask, BinaryDataset, Dag, DatasetParseError, InvalidComparison, InvalidGraph,
    InvalidInput, ScoreCache, has_path, is_acyclic, structural_hamming_components,
)


class TestIsAcyclic:
    def test_empty(self):
        assert is_acyclic(set(), 3)

    def test_three_cycle(self):
        assert not is_acyclic({(0, 1), (1, 2), (2, 0)}, 3)

    def test_triangle_dag(self):
        assert is_acyclic({(0, 1), (0, 2), (1, 2)}, 3)

    def test_out_of_range(self):
        with pytest.raises(InvalidGraph):
            is_acyclic({(0, 3)}, 3)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_exhaustive_against_dfs(self, n):
        pairs = all_pairs(n)
        for bits in itertools.product((0, 1), repeat=len(pairs)):
            arcs = [p for p, b in zip(pairs, bits) if b]
            assert is_acyclic(arcs, n) == (not brute_force_has_cycle(arcs, n))

    @settings(max_examples=300, deadline=None)
    @given(st.integers(1, 5).flatmap(
        lambda n: st.tuples(st.just(n), st.sets(st.sampled_from(all_pairs(n)) if n > 1
                                                 else st.nothing()))))
    def test_random_against_dfs(self, case):
        n, arcs = case
        assert is_acyclic(arcs, n) == (not brute_force_has_cycle(arcs, n))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(2, 5).flatmap(
        lambda n: st.tuples(st.just(n), st.sets(st.sampled_from(all_pairs(n))),
                            st.sampled_from(all_pairs(n)))))
    def test_arc_addition_and_path_query(self, case):
        n, arcs, (u, v) = case
        if not is_acyclic(arcs, n) or (u, v) in arcs:
            return
        assert is_acyclic(arcs | {(u, v)}, n) == (not has_path(arcs, n, v, u))


class TestDag:
    def test_rejects_cycle_and_self_loop(self):
        with pytest.raises(InvalidGraph):
            Dag(2, [(0, 1), (1, 0)])
        with pytest.raises(InvalidGraph):
            Dag(2, [(1, 1)])

    def test_parents_and_immutability(self):
        g = Dag(4, [(2, 3), (0, 3), (1, 3)])
        assert g.parents(3) == (0, 1, 2)
        assert g.parents(0) == ()
        with pytest.raises(AttributeError):
            g.n = 5

    def test_duplicates_collapse(self):
        assert len(Dag(2, [(0, 1), (0, 1)])) == 1

    def test_document_roundtrip(self):
        g = Dag(3, [(0, 1), (1, 2)], names=["a", "b", "c"])
        doc = json.loads(json.dumps(g.to_document(extra=1)))
        assert doc["arcs"] == [[0, 1], [1, 2]]
        assert Dag.from_document(doc) == g

    def test_adjacency_roundtrip(self):
        g = Dag(4, [(0, 1), (0, 2), (2, 3)])
        assert Dag.from_adjacency(g.adjacency()) == g


class TestHammingComponents:
    def test_identical(self):
        g = Dag(3, [(0, 1)])
        assert structural_hamming_components(g, g) == (1, 0, 5, 0)

    def test_missing_arc(self):
        assert structural_hamming_components(Dag(3, [(0, 1)]), Dag(3)) == (0, 0, 5, 1)

    def test_extra_arcs(self):
        assert structural_hamming_components(Dag(3), Dag(3, [(0, 1), (1, 2)])) == (0, 2, 4, 0)

    def test_mismatch(self):
        with pytest.raises(InvalidComparison):
            structural_hamming_components(Dag(2), Dag(3))

    def test_against_pair_enumeration(self, rng):
        from conftest import random_dag
        for _ in range(50):
            n = int(rng.integers(1, 7))
            a, b = random_dag(rng, n), random_dag(rng, n)
            counts = [0, 0, 0, 0]
            for pair in all_pairs(n):
                t, i = pair in a.arcs, pair in b.arcs
                counts[{(True, True): 0, (False, True): 1, (False, False): 2, (True, False): 3}[t, i]] += 1
            assert structural_hamming_components(a, b) == tuple(counts)
            assert sum(counts) == n * (n - 1)


class TestBinaryDataset:
    def test_validation(self):
        with pytest.raises(InvalidInput):
            BinaryDataset([[0, 2]])
        with pytest.raises(InvalidInput):
            BinaryDataset([[0, 1]], ["a", "a"])
        with pytest.raises(InvalidInput):
            BinaryDataset(np.zeros((0, 2)))

    def test_immutable(self):
        d = BinaryDataset([[0, 1]])
        with pytest.raises(ValueError):
            d.values[0, 0] = 1

    def test_csv_roundtrip(self):
        d = BinaryDataset([[0, 1, 1], [1, 0, 0]], ["a", "b", "c"])
        text = d.to_csv(["comment line"])
        assert text.startswith("# comment line\na,b,c\n")
        assert BinaryDataset.from_csv(text) == d

    def test_parse_error_names_cell(self):
        with pytest.raises(DatasetParseError) as err:
            BinaryDataset.from_csv("a,b\n0,1\n1,x\n")
        assert err.value.row == 3 and err.value.column == 2
        assert "column 2" in str(err.value)


class TestArcMask:
    def test_rejects_diagonal(self):
        with pytest.raises(InvalidGraph):
            ArcMask(np.eye(2, dtype=bool))

    def test_contains_and_antisymmetry(self):
        mask = ArcMask([[0, 1, 1], [0, 0, 0], [0, 1, 0]])
        assert mask.is_antisymmetric()
        assert mask.contains(Dag(3, [(0, 1), (2, 1)]))
        assert not mask.contains(Dag(3, [(1, 0)]))
        assert len(mask) == 3


def test_score_cache_uses_sorted_keys():
    cache = ScoreCache()
    calls = []

    def compute(parents):
        calls.append(parents)
        return float(len(parents))

    assert cache.get(2, (1, 0), compute) == 2.0
    assert cache.get(2, (0, 1), compute) == 2.0
    assert calls == [(0, 1)]
    assert cache.hits == 1 and cache.misses == 1
