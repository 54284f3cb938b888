from __future__ import annotations

import itertools

from corpus import digraph, graph_g

from scottkit.oracle import EFOracle, brute_force_isomorphic, concrete, ef_equivalent, oracle_rank


def _classes(C, n, alpha, oracle):
    return len({oracle.value(C, t, alpha) for t in itertools.permutations(C.domain, n)})


def test_oracle_counts_for_g():
    C = concrete(graph_g(), 5)
    o = EFOracle()
    assert [_classes(C, n, 0, o) for n in range(6)] == [1, 1, 2, 5, 12, 27]
    assert [_classes(C, n, 1, o) for n in range(5)] == [1, 2, 4, 8, 16]


def test_two_cliques_equivalent():
    a = concrete(digraph(2, [(0, 1), (1, 0)]))
    b = concrete(digraph(2, [(1, 0), (0, 1)]))
    assert ef_equivalent(a, ("a", "b"), b, ("b", "a"), 5)


def test_source_and_sink_separate_at_level_one():
    p = concrete(digraph(2, [(0, 1)]))
    o = EFOracle()
    assert ef_equivalent(p, ("a",), p, ("b",), 0, o)
    assert not ef_equivalent(p, ("a",), p, ("b",), 1, o)


def test_width_mismatch_is_inequivalent():
    p = concrete(digraph(2, [(0, 1)]))
    assert not ef_equivalent(p, ("a",), p, ("a", "b"), 0)


def test_brute_force_iso():
    c3 = digraph(3, [(0, 1), (1, 2), (2, 0)])
    assert brute_force_isomorphic(c3, digraph(3, [(2, 1), (1, 0), (0, 2)]))
    assert not brute_force_isomorphic(c3, digraph(3, [(0, 1), (1, 2)]))


def test_oracle_rank_of_path():
    assert oracle_rank(concrete(digraph(4, [(0, 1), (1, 2), (2, 3)]))) >= 1
    assert oracle_rank(concrete(digraph(3, []))) == 0
