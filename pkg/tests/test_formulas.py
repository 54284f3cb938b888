from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import STORE, g_process
from corpus import digraph, graph_g

from scottkit.engine import analyze
from scottkit.formulas import FormulaStore, Injection
from scottkit.structures import Vocabulary


@st.composite
def injections(draw, m=None, n=None):
    n = draw(st.integers(0, 5)) if n is None else n
    m = draw(st.integers(0, n)) if m is None else m
    imgs = draw(st.permutations(range(n)))[:m]
    return Injection(tuple(imgs), n)


@st.composite
def chains(draw):
    """Composable pair (j, k) with k: X_l -> X_m and j: X_m -> X_n."""
    j = draw(injections())
    k = draw(injections(n=j.m))
    return j, k


def test_injection_rejects_bad_maps():
    with pytest.raises(ValueError):
        Injection((0, 0), 2)
    with pytest.raises(ValueError):
        Injection((2,), 2)


@given(chains(), st.data())
def test_compose_is_associative(jk, data):
    j, k = jk
    h = data.draw(injections(n=k.m))
    assert j.compose(k).compose(h) == j.compose(k.compose(h))


@given(injections())
def test_identity_is_neutral(j):
    assert j.compose(Injection.identity(j.m)) == j
    assert Injection.identity(j.n).compose(j) == j


def test_all_counts_injections():
    assert sum(1 for _ in Injection.all(2, 4)) == 12
    assert list(Injection.all(0, 3)) == [Injection((), 3)]


def test_interning_is_structural():
    v = Vocabulary.of([("R", 2)])
    s = FormulaStore()
    a = s.intern_atoms(v, 2, [("R", (0, 1))])
    b = s.intern_atoms(v, 2, [("R", (0, 1))])
    assert a == b
    assert s.intern_successor(a, []) == s.intern_successor(a, [])
    assert s.intern_atoms(v, 2, [("R", (1, 0))]) != a


def test_canon_independent_of_session():
    p = analyze(graph_g(), 3, store=FormulaStore())
    q = analyze(graph_g(), 3, store=FormulaStore())
    for a in p.level_indices:
        for n in p.widths(a):
            assert sorted(p.store.canon(f) for f in p.phi(a, n)) == sorted(q.store.canon(f) for f in q.phi(a, n))


def _formulas(p):
    return [(a, f) for a in p.level_indices for n in p.widths(a) for f in p.store.sorted_ids(p.phi(a, n))]


G5 = g_process(5)
G5_FORMULAS = _formulas(G5)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(G5_FORMULAS), st.data())
def test_h_composition(af, data):
    _, f = af
    n = STORE.width(f)
    j = data.draw(injections(n=n))
    k = data.draw(injections(n=j.m))
    assert STORE.h_project(STORE.h_project(f, j), k) == STORE.h_project(f, j.compose(k))


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(G5_FORMULAS), st.data())
def test_v_and_h_commute(af, data):
    a, f = af
    j = data.draw(injections(n=STORE.width(f)))
    b = data.draw(st.integers(0, a))
    assert STORE.v_project(STORE.h_project(f, j), b) == STORE.h_project(STORE.v_project(f, b), j)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(G5_FORMULAS))
def test_v_projection_composes(af):
    a, f = af
    for c in range(a + 1):
        for b in range(c, a + 1):
            assert STORE.v_project(STORE.v_project(f, b), c) == STORE.v_project(f, c)


@pytest.mark.parametrize("edges", [[(0, 1), (1, 2)], [(0, 1), (1, 0), (2, 2)], [], [(0, 0), (0, 1)]])
def test_h_is_tuple_restriction(edges):
    """On a structure-derived process H restricts the underlying tuple."""
    s = digraph(3, edges)
    p = analyze(s, 3, store=STORE)
    elems = list(s.elements)
    for a in p.level_indices:
        for n in range(4):
            for t in itertools.permutations(elems, n):
                f = p.tuple_map[(a, t)]
                for j in Injection.all(min(n, 2), n):
                    sub = tuple(t[i] for i in j.images)
                    assert STORE.h_project(f, j) == p.tuple_map[(a, sub)]


def test_render_of_successor_mentions_quantifiers():
    f = next(iter(G5.phi(1, 0)))
    text = STORE.render(f)
    assert "∃" in text and "∀" in text
