from __future__ import annotations

import itertools
from functools import lru_cache

import pytest

from conftest import STORE
from corpus import clique_omega, digraph, graph_g, unary_split
from mutations import g_limit, single_class_limit

from scottkit.builder import (
    PairError,
    WeavingError,
    WeavingFamily,
    build_model_pair,
    build_thread,
    build_weaving,
    certify_realization,
    realize_model,
    verify_weaving,
)
from scottkit.engine import analyze, analyze_to_stabilization, iso_check
from scottkit.formulas import Injection
from scottkit.levels import OMEGA
from scottkit.processkit import limit_process
from scottkit.structures import UNIT, finite_structure


@lru_cache(maxsize=None)
def g_limit8():
    return limit_process(analyze_to_stabilization(graph_g(), 8, store=STORE))


def _degrees(m):
    deg = {e: 0 for e in m.elements}
    for a, b in m.relations["R"]:
        deg[a] += 1
    return sorted(deg.values())


def test_thread_round_trip_small():
    s = digraph(3, [(0, 1), (1, 2)])
    q = analyze_to_stabilization(s, store=STORE)
    t = build_thread(q, 3)
    assert t.width == 3 and not t.check()
    assert not t.open_obligations()
    assert iso_check(realize_model(t), s)


def test_thread_stops_at_structure_size():
    s = digraph(2, [(0, 1)])
    t = build_thread(analyze_to_stabilization(s, store=STORE), 5)
    assert t.width == 2 and "truncation" in t.notice


def test_empty_thread_realizes_sentence_facts():
    t = build_thread(g_limit(), 0)
    m = realize_model(t)
    assert m.elements == () and m.relations[UNIT] == frozenset({()})


def test_thread_prefix_stability():
    L = g_limit8()
    short, long = build_thread(L, 4), build_thread(L, 6)
    assert long.formulas[:5] == short.formulas


def test_g_thread_realizes_triangle_plus_isolated():
    t = build_thread(g_limit8(), 6)
    assert t.width == 6 and not t.check()
    m = realize_model(t)
    assert _degrees(m) == [0, 0, 0, 2, 2, 2]
    c = certify_realization(t.process, t.formulas[-1], m)
    assert c.ok and c.compared > 0
    assert (1, 0) in c.certified_pairs()


def test_g_thread_at_successor_level():
    q = analyze_to_stabilization(graph_g(), 8, store=STORE)
    t = build_thread(q, 6)
    assert t.width == 6 and not t.check()
    assert certify_realization(q, t.formulas[-1], realize_model(t)).ok


def test_ledger_lines_carry_status_and_witness():
    t = build_thread(g_limit8(), 4)
    lines = t.ledger_lines()
    assert any(line.startswith("met lift") and " by n=" in line for line in lines)
    assert all(line.split()[0] in ("met", "open", "notice:") for line in lines)


def test_degenerate_pair():
    L = g_limit()
    star = {n: L.phi(OMEGA, n) for n in L.widths(OMEGA)}
    mp = build_model_pair(L, star, 4)
    assert mp.Y and set(mp.small.elements) <= set(mp.big.elements)


def test_pair_over_unary_split_keeps_y_inside_p():
    p = analyze(unary_split(), 5, store=STORE).prefix(0)
    star = {n: frozenset(f for f in p.phi(0, n) if all(("P", (i,)) in STORE.node(f).positive for i in range(n))) for n in p.widths(0)}
    mp = build_model_pair(p, star, 5)
    assert len(mp.Y) >= 2
    assert mp.small.relations["P"] == frozenset((e,) for e in mp.small.elements)


def test_pair_from_finite_structure_sub_level():
    s = finite_structure([("P", 1)], "abcd", [("P", ("a",)), ("P", ("b",))])
    p = analyze(s, 1, store=STORE).prefix(0)
    star = {
        n: frozenset(f for f in p.phi(0, n) if all(("P", (i,)) in STORE.node(f).positive for i in range(n)))
        for n in range(3)
    }
    mp = build_model_pair(p, star, 4)
    assert len(mp.small.elements) == 2 < len(mp.big.elements) == 4
    sub = analyze(mp.small, 0, store=STORE)
    assert all(sub.tuple_map[(0, t)] in star[len(t)] for n in range(3) for t in itertools.permutations(mp.small.elements, n))


def test_pair_rejects_b_only_paths_of_g():
    L = g_limit()

    def clique_pattern(f):
        v0 = STORE.node(STORE.v_project(f, 0))
        n = v0.width
        return all(("R", (i, j)) in v0.positive for i in range(n) for j in range(n) if i != j)

    star = {n: frozenset(f for f in L.phi(OMEGA, n) if clique_pattern(f)) for n in L.widths(OMEGA)}
    with pytest.raises(PairError) as info:
        build_model_pair(L, star, 4)
    assert info.value.report is not None and not info.value.report.ok


def test_weaving_through_g_limit():
    w = build_weaving(g_limit(), 4)
    r = verify_weaving(w)
    assert r.ok and r.checked_pairs == 81
    assert all(o.met_at is not None for o in w.ledger)


def test_weaving_k1_is_thread_prefix():
    w = build_weaving(g_limit(), 1)
    t = build_thread(g_limit(), 1)
    assert w.assignment[(0,)] == t.formulas[1] or STORE.h_project(w.assignment[(0,)], Injection((), 1)) == t.formulas[0]
    assert verify_weaving(w).ok


def test_weaving_k0_is_vacuous():
    w = build_weaving(g_limit(), 0)
    r = verify_weaving(w)
    assert r.ok and r.certification is None and r.checked_pairs == 1


def test_weaving_mutation_located():
    w = build_weaving(g_limit(), 3)
    a = (0, 2)
    other = next(f for f in g_limit().phi(OMEGA, 2) if f != w.assignment[a])
    bad = WeavingFamily(w.process, w.level, w.K, {**w.assignment, a: other}, w.ledger)
    r = verify_weaving(bad, realize=False)
    assert not r.ok and r.condition2 is not None
    assert r.condition1 is None


def test_weaving_rejects_non_amalgamative_level():
    with pytest.raises(WeavingError) as info:
        build_weaving(single_class_limit(), 3)
    assert info.value.counterexample is not None


def test_weaving_through_clique():
    q = analyze_to_stabilization(clique_omega(), 6, store=STORE)
    r = verify_weaving(build_weaving(q, 4))
    assert r.ok
