from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import STORE, g_process
from corpus import digraph
from mutations import g_limit

from scottkit.encoding import DumpError, decode_process, encode_formula, encode_level, encode_process, is_dump
from scottkit.engine import analyze
from scottkit.formulas import FormulaStore
from scottkit.processkit import extend_by_completion, validate_process


def _round_trip(p):
    text = encode_process(p)
    fresh = FormulaStore()
    q = decode_process(text, fresh)
    assert encode_process(q) == text
    return q


def test_g_round_trip():
    q = _round_trip(g_process(4))
    assert q.counts() == g_process(4).counts()
    assert validate_process(q).ok


def test_limit_and_successor_of_limit_round_trip():
    after = extend_by_completion(g_limit())
    q = _round_trip(after)
    assert validate_process(q).ok


def test_decode_into_same_store_reuses_ids():
    p = g_process(4)
    q = decode_process(encode_process(p), STORE)
    assert q.levels == p.levels


def test_dump_header():
    text = encode_process(g_process(4))
    assert is_dump(text)
    assert text.splitlines()[:4] == ["scottkit-dump 1", "vocab @unit/0 R/2", "truncated none", "budget 4"]


def test_level_and_formula_dumps():
    p = g_process(4)
    f = p.tuple_map[(2, ("a", "b"))]
    q = decode_process(encode_formula(STORE, f), FormulaStore())
    assert len(q.phi(2, 2)) == 1
    assert set(decode_process(encode_level(p, 1), FormulaStore()).levels) == {1}


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("hello\n", "header"),
        ("scottkit-dump 1\nvocab R/2\ntruncated none\nbudget 1\n", "end"),
        ("scottkit-dump 1\nvocab R/2\ntruncated none\nbudget 1\ntable 1 0 1\nS 3 | 0\nend\n", "dangling"),
        ("scottkit-dump 1\nvocab R/2\ntruncated none\nbudget 1\nwhat 1\nend\n", "unexpected"),
    ],
)
def test_malformed_dumps(text, fragment):
    with pytest.raises(DumpError, match=fragment):
        decode_process(text, FormulaStore())


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))))))
def test_round_trip_random_digraphs(case):
    n, edges = case
    _round_trip(analyze(digraph(n, sorted(edges)), 2, store=FormulaStore()))
