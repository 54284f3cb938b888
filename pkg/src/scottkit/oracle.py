"""Independent back-and-forth oracle and brute-force isomorphism search.

Nothing here touches :mod:`scottkit.formulas` or the refinement engine:
α-types are computed by the naive recursion over concrete tuples of an
explicitly listed structure, and values are interned in a private table.
"""
from __future__ import annotations

import itertools
from typing import Sequence

from .structures import ConcreteStructure, MultiplicityStructure, expand


class EFOracle:
    """Memoized naive α-type recursion; one shared value table per oracle."""

    def __init__(self):
        self._table: dict = {}
        self._memo: dict = {}
        self._keep: dict[int, ConcreteStructure] = {}

    def _intern(self, key) -> int:
        v = self._table.get(key)
        if v is None:
            v = self._table[key] = len(self._table)
        return v

    def value(self, C: ConcreteStructure, tup: Sequence[str], alpha: int) -> int:
        self._keep[id(C)] = C
        tup = tuple(tup)
        if len(set(tup)) != len(tup):
            raise ValueError("tuple entries must be distinct")
        return self._value(C, tup, alpha)

    def _value(self, C, tup, alpha):
        key = (id(C), tup, alpha)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if alpha == 0:
            pos = []
            for name, arity in C.vocab.symbols:
                for idx in itertools.product(range(len(tup)), repeat=arity):
                    if C.holds(name, tuple(tup[i] for i in idx)):
                        pos.append((name, idx))
            v = self._intern(("0", C.vocab, len(tup), frozenset(pos)))
        else:
            here = self._value(C, tup, alpha - 1)
            ext = frozenset(self._value(C, tup + (c,), alpha - 1) for c in C.domain if c not in tup)
            v = self._intern(("S", here, ext))
        self._memo[key] = v
        return v


def ef_equivalent(
    M: ConcreteStructure,
    a: Sequence[str],
    N: ConcreteStructure,
    b: Sequence[str],
    alpha: int,
    oracle: EFOracle | None = None,
) -> bool:
    """Whether ``a`` in ``M`` and ``b`` in ``N`` have the same α-type."""
    if len(a) != len(b):
        return False
    oracle = oracle if oracle is not None else EFOracle()
    return oracle.value(M, a, alpha) == oracle.value(N, b, alpha)


def concrete(s: MultiplicityStructure | ConcreteStructure, copies: int | None = None) -> ConcreteStructure:
    if isinstance(s, ConcreteStructure):
        return s
    return expand(s, copies)


def brute_force_isomorphic(M, N) -> bool:
    """Exhaustive bijection search between two finite structures."""
    M, N = concrete(M), concrete(N)
    if M.vocab != N.vocab or len(M.domain) != len(N.domain):
        return False
    for name in M.vocab.names:
        if len(M.relations[name]) != len(N.relations[name]):
            return False
    for perm in itertools.permutations(N.domain):
        f = dict(zip(M.domain, perm))
        if all(
            frozenset(tuple(f[x] for x in fact) for fact in M.relations[name]) == N.relations[name]
            for name in M.vocab.names
        ):
            return True
    return False


def oracle_rank(C: ConcreteStructure, max_alpha: int = 32) -> int:
    """Least α at which α-equivalence equals (α+1)-equivalence on all tuples."""
    oracle = EFOracle()
    tuples = [t for n in range(len(C.domain) + 1) for t in itertools.permutations(C.domain, n)]

    def classes(alpha):
        return len({oracle.value(C, t, alpha) for t in tuples})

    prev = classes(0)
    for alpha in range(max_alpha):
        nxt = classes(alpha + 1)
        if nxt == prev:
            return alpha
        prev = nxt
    raise RuntimeError("no stabilization within max_alpha")
