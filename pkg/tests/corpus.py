"""Test corpus: small digraphs up to isomorphism, seeded random digraphs, blow-ups."""
from __future__ import annotations

import itertools
import os
import random
from dataclasses import dataclass
from functools import lru_cache

from scottkit.structures import OMEGA_MULT, MultiplicityStructure, finite_structure, make_structure

R = [("R", 2)]


def seed() -> int:
    return int(os.environ.get("SCOTTKIT_SEED", "0"))


def _canonical(n: int, edges: frozenset) -> tuple:
    best = None
    for perm in itertools.permutations(range(n)):
        key = tuple(sorted((perm[a], perm[b]) for a, b in edges))
        if best is None or key < best:
            best = key
    return best


def digraph(n: int, edges) -> MultiplicityStructure:
    names = [chr(ord("a") + i) for i in range(n)]
    return finite_structure(R, names, [("R", (names[a], names[b])) for a, b in edges])


@lru_cache(maxsize=None)
def small_digraphs(max_size: int = 3) -> tuple[tuple[str, MultiplicityStructure], ...]:
    """Every digraph (loops allowed) on 1..max_size vertices, one per isomorphism class."""
    out = []
    for n in range(1, max_size + 1):
        pairs = [(a, b) for a in range(n) for b in range(n)]
        seen = set()
        for bits in itertools.product((0, 1), repeat=len(pairs)):
            edges = frozenset(pr for pr, bit in zip(pairs, bits) if bit)
            key = _canonical(n, edges)
            if key in seen:
                continue
            seen.add(key)
            out.append((f"d{n}-{len(seen) - 1}", digraph(n, key)))
    return tuple(out)


@lru_cache(maxsize=None)
def random_digraphs(count: int = 20, s: int | None = None) -> tuple[tuple[str, MultiplicityStructure], ...]:
    rng = random.Random(seed() if s is None else s)
    out = []
    for i in range(count):
        n = rng.choice((4, 5))
        p = rng.uniform(0.2, 0.6)
        edges = [(a, b) for a in range(n) for b in range(n) if rng.random() < p]
        out.append((f"r{i}-n{n}", digraph(n, edges)))
    return tuple(out)


def graph_g() -> MultiplicityStructure:
    """Countably many isolated vertices plus a countable clique."""
    return make_structure(
        R,
        {"a": OMEGA_MULT, "b": OMEGA_MULT},
        {"a1": "a", "a2": "a", "b1": "b", "b2": "b"},
        [("R", ("b1", "b2")), ("R", ("b2", "b1"))],
    )


def clique_omega() -> MultiplicityStructure:
    return make_structure(R, {"k": OMEGA_MULT}, {"k1": "k", "k2": "k"}, [("R", ("k1", "k2")), ("R", ("k2", "k1"))])


def unary_split() -> MultiplicityStructure:
    """Countably many P-points and countably many non-P points."""
    return make_structure(
        [("P", 1)],
        {"p": OMEGA_MULT, "n": OMEGA_MULT},
        {"p1": "p", "p2": "p", "n1": "n", "n2": "n"},
        [("P", ("p1",)), ("P", ("p2",))],
    )


def star() -> MultiplicityStructure:
    return make_structure(
        R,
        {"c": 1, "l": OMEGA_MULT},
        {"c1": "c", "l1": "l", "l2": "l"},
        [("R", ("c1", "l1")), ("R", ("l1", "c1")), ("R", ("c1", "l2")), ("R", ("l2", "c1"))],
    )


def finite_blowup() -> MultiplicityStructure:
    """A triangle plus two isolated points, presented by two twin classes."""
    return make_structure(
        R,
        {"t": 3, "i": 2},
        {"t1": "t", "t2": "t", "i1": "i", "i2": "i"},
        [("R", ("t1", "t2")), ("R", ("t2", "t1"))],
    )


def blowups() -> tuple[tuple[str, MultiplicityStructure], ...]:
    return (
        ("G", graph_g()),
        ("K_omega", clique_omega()),
        ("P_split", unary_split()),
        ("star", star()),
        ("K3+2K1", finite_blowup()),
    )


@dataclass(frozen=True)
class Entry:
    name: str
    structure: MultiplicityStructure

    @property
    def finite(self) -> bool:
        return self.structure.is_finite


def full_corpus() -> list[Entry]:
    items = list(small_digraphs()) + list(random_digraphs()) + list(blowups())
    return [Entry(n, s) for n, s in items]
