"""Targeted corruptions of valid processes, each aimed at one condition."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from conftest import STORE, g_process
from corpus import graph_g

from scottkit.engine import analyze_to_stabilization
from scottkit.formulas import Injection
from scottkit.levels import OMEGA
from scottkit.process import ScottProcess
from scottkit.processkit import limit_process


@dataclass(frozen=True)
class Mutation:
    name: str
    target: str
    build: Callable[[], ScottProcess]


def _ids(p, a, n):
    return STORE.sorted_ids(p.phi(a, n))


def _atoms(p, n, atoms):
    return STORE.intern_atoms(p.vocab, n, [("@unit", ())] + atoms)


@lru_cache(maxsize=None)
def g_limit():
    return limit_process(analyze_to_stabilization(graph_g(), 6, store=STORE))


def _wrong_width():
    p = g_process(5)
    return p.replace_set(0, 2, p.phi(0, 2) | {_ids(p, 0, 3)[0]})


def _wrong_level():
    p = g_process(5)
    return p.replace_set(0, 1, p.phi(0, 1) | {_ids(p, 1, 1)[0]})


def _foreign_e_child():
    p = g_process(5)
    loop = _atoms(p, 2, [("R", (0, 0))])
    return p.replace_set(1, 1, p.phi(1, 1) | {STORE.intern_successor(_ids(p, 0, 1)[0], [loop])})


def _missing_preimage():
    p = g_process(5)
    return p.replace_set(2, 2, frozenset(_ids(p, 2, 2)[1:]))


def _one_orientation():
    p = g_process(5)
    sw = Injection.transposition(2, 0, 1)
    asym = [f for f in _ids(p, 1, 2) if STORE.h_project(f, sw) != f]
    return p.replace_set(1, 2, p.phi(1, 2) - {asym[0]})


def _empty_projection():
    p = g_process(5)
    return p.replace_set(0, 1, frozenset())


def _stray_loop_pair():
    p = g_process(5)
    return p.replace_set(0, 2, p.phi(0, 2) | {_atoms(p, 2, [("R", (0, 0))])})


def _drop_fiber_member():
    p = g_process(5)
    return p.replace_set(2, 3, frozenset(_ids(p, 2, 3)[1:]))


def _drop_late_level():
    p = g_process(5)
    return p.replace_set(3, 2, frozenset(_ids(p, 3, 2)[1:]))


def _directed_edge_at_level_zero():
    p = g_process(5).prefix(0)
    return p.replace_set(0, 2, p.phi(0, 2) | {_atoms(p, 2, [("R", (0, 1))])})


def _drop_limit_path():
    L = g_limit()
    return L.replace_set(OMEGA, 2, frozenset(_ids(L, OMEGA, 2)[1:]))


def _non_path_at_limit():
    L = g_limit()
    return L.replace_set(OMEGA, 1, L.phi(OMEGA, 1) | {_ids(L, 2, 1)[0]})


MUTATIONS = (
    Mutation("width-3 formula listed at width 2", "1a", _wrong_width),
    Mutation("level-1 formula listed at level 0", "1a", _wrong_level),
    Mutation("E-child outside the previous level", "1b", _foreign_e_child),
    Mutation("level-1 formula without preimage", "1c", _missing_preimage),
    Mutation("one orientation of an asymmetric pair dropped", "1d", _one_orientation),
    Mutation("width 1 emptied", "1e", _empty_projection),
    Mutation("pair with a loop added", "1e", _stray_loop_pair),
    Mutation("fiber member dropped", "2a", _drop_fiber_member),
    Mutation("later-level formula dropped", "2b", _drop_late_level),
    Mutation("directed edge added to level 0", "2c", _directed_edge_at_level_zero),
    Mutation("isolated path dropped", "1c", _drop_limit_path),
    Mutation("non-path node at the limit level", "1a", _non_path_at_limit),
)


def single_class_limit() -> ScottProcess:
    """G's limit level cut down to paths over one class only: H-closed, not amalgamative."""
    L = g_limit()
    levels = {}
    for n in L.widths(OMEGA):
        keep = set()
        for f in L.phi(OMEGA, n):
            v0 = STORE.node(STORE.v_project(f, 0))
            edges = {args for name, args in v0.positive if name == "R"}
            pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
            if all((i, j) in edges for i, j in pairs) or not edges:
                keep.add(f)
        levels[n] = frozenset(keep)
    return L.with_level(OMEGA, levels)
