from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import digraph, graph_g, star

from scottkit.structures import (
    OMEGA_MULT,
    UNIT,
    MultiplicityStructure,
    StructureError,
    Vocabulary,
    count_atomic_types,
    dump_structure,
    enumerate_tuples,
    expand,
    load_structure,
    validate_twin_uniformity,
)

G_TEXT = """
# isolated points and a clique
vocab R/2
class a mult omega
class b mult omega
elem a1 class a
elem a2 class a
elem b1 class b
elem b2 class b
fact R b1 b2
fact R b2 b1
"""


def test_load_g_matches_constructor():
    s = load_structure(G_TEXT)
    assert s == graph_g()
    assert set(s.vocab.names) == {UNIT, "R"}
    assert not s.is_finite


def test_singleton_structure():
    s = load_structure("class c mult 1\nelem c class c\n")
    assert s.size == 1
    assert s.relations[UNIT] == frozenset({()})


def test_unit_not_injected_with_declared_sentence():
    v = Vocabulary.of([("S", 0), ("R", 2)])
    assert UNIT not in v.names
    assert UNIT in Vocabulary.of([("R", 2)]).names


def test_twin_uniformity_error_on_load():
    bad = G_TEXT.replace("fact R b2 b1\n", "")
    with pytest.raises(StructureError, match="twin"):
        load_structure(bad)


def test_twin_uniformity_report_names_symbol():
    v = Vocabulary.of([("P", 1)])
    s = MultiplicityStructure(
        vocab=v,
        elements=("p1", "p2"),
        element_class={"p1": "p", "p2": "p"},
        multiplicity={"p": OMEGA_MULT},
        relations={UNIT: frozenset({()}), "P": frozenset({("p1",)})},
    )
    bad = validate_twin_uniformity(s)
    assert bad and "P" in str(bad[0])


def test_trivial_classes_are_uniform():
    assert validate_twin_uniformity(digraph(3, [(0, 1), (1, 2)])) == []
    assert validate_twin_uniformity(graph_g()) == []


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("vocab R/x\n", "arity"),
        ("vocab R/2\nclass a mult 0\nelem a class a\n", "multiplicity"),
        ("vocab R/2\nclass a mult 1\nelem a class a\nfact R a\n", "arity mismatch"),
        ("vocab R/2\nclass a mult 1\nelem a class b\n", "undeclared class"),
        ("flub\n", "unknown directive"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(StructureError, match=fragment):
        load_structure(text)


def test_parse_error_carries_line_number():
    with pytest.raises(StructureError) as info:
        load_structure("vocab R/2\n\nclass a mult zero\n")
    assert info.value.lineno == 3


def test_enumerate_tuples():
    assert set(enumerate_tuples(graph_g(), 2)) == {("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")}
    single = load_structure("class c mult 1\nelem c class c\n")
    assert not enumerate_tuples(single, 2)
    assert len(enumerate_tuples(star(), 2)) == 3


def test_count_atomic_types():
    v = Vocabulary.of([("S", 0), ("R", 2)])
    assert [count_atomic_types(v, n) for n in range(4)] == [2, 4, 32, 1024]


def test_expand_names_copies():
    c = expand(graph_g(), 3)
    assert len(c.domain) == 6
    assert all(c.origin[x] in ("a", "b") for x in c.domain)
    with pytest.raises(ValueError):
        expand(graph_g())


def test_dump_sorted_and_reloadable():
    text = dump_structure(graph_g())
    lines = text.splitlines()
    assert lines == sorted(lines)
    assert load_structure(text) == graph_g()


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))))))
def test_dump_round_trip_digraphs(case):
    n, edges = case
    s = digraph(n, sorted(edges))
    assert load_structure(dump_structure(s)) == s
