"""Scott analysis of multiplicity structures by tuple partition refinement."""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

from .formulas import FormulaStore, default_store
from .levels import Level
from .process import ScottProcess
from .structures import (
    AbstractTuple,
    MultiplicityStructure,
    atomic_diagram,
    enumerate_tuples,
    extensions,
)


class BudgetExhausted(RuntimeError):
    """Raised when stabilization is not reached within the requested budget."""

    def __init__(self, message: str, partial: Optional[ScottProcess] = None):
        super().__init__(message)
        self.partial = partial


class _Refiner:
    """Level-by-level refinement of the tuple partition of one structure."""

    def __init__(
        self,
        s: MultiplicityStructure,
        store: FormulaStore,
        max_width: int,
        workers: int = 1,
        shuffle_seed: Optional[int] = None,
    ):
        self.s = s
        self.store = store
        self.workers = workers
        self.rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
        self.tuples: dict[int, list[AbstractTuple]] = {}
        for n in range(max_width + 1):
            ts = enumerate_tuples(s, n)
            if not ts:
                break
            self.tuples[n] = ts
        self.ids: dict[Level, dict[AbstractTuple, int]] = {}
        self.ext = {t: extensions(self.s, t) for ts in self.tuples.values() for t in ts}

    def _order(self, items: list) -> list:
        if self.rng is None:
            return items
        items = list(items)
        self.rng.shuffle(items)
        return items

    def _run(self, fn, widths: list[int]) -> list:
        widths = self._order(widths)
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                return list(pool.map(fn, widths))
        return [fn(n) for n in widths]

    def level0(self, widths: list[int]) -> None:
        def work(n):
            return {t: self.store.intern_level0(atomic_diagram(self.s, t)) for t in self._order(self.tuples[n])}

        table: dict[AbstractTuple, int] = {}
        for part in self._run(work, [n for n in widths if n in self.tuples]):
            table.update(part)
        self.ids[0] = table

    def step(self, alpha: Level, widths: list[int]) -> None:
        prev = self.ids[alpha]

        def work(n):
            out = {}
            for t in self._order(self.tuples[n]):
                kids = frozenset(prev[u] for u in self.ext[t])
                out[t] = self.store.intern_successor(prev[t], kids)
            return out

        table: dict[AbstractTuple, int] = {}
        for part in self._run(work, [n for n in widths if n in self.tuples]):
            table.update(part)
        self.ids[alpha + 1] = table

    def level_sets(self, alpha: Level) -> dict[int, frozenset]:
        out: dict[int, set] = {}
        for t, fid in self.ids[alpha].items():
            out.setdefault(len(t), set()).add(fid)
        return {n: frozenset(v) for n, v in out.items()}


def _finite_width(s: MultiplicityStructure) -> Optional[int]:
    return int(s.size) if s.is_finite else None


def analyze(
    s: MultiplicityStructure,
    budget: int,
    *,
    store: Optional[FormulaStore] = None,
    max_level: Optional[int] = None,
    workers: int = 1,
    shuffle_seed: Optional[int] = None,
) -> ScottProcess:
    """Compute Φⁿ_α(s) by refinement.

    Finite structures get the full rectangle ``α ≤ budget``, all widths up
    to the domain size.  Structures with an ω class get the triangle
    ``n + α ≤ budget``.  ``max_level`` caps the number of levels in both
    cases.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    store = store if store is not None else default_store()
    top = budget if max_level is None else min(budget, max_level)
    N = _finite_width(s)
    max_w = min(N, budget) if N is not None else budget

    def widths(alpha: int) -> list[int]:
        if N is not None:
            return list(range(N + 1))
        return list(range(budget - alpha + 1))

    if N is not None:
        max_w = N
    ref = _Refiner(s, store, max_w, workers, shuffle_seed)
    ref.level0(widths(0))
    for alpha in range(top):
        ref.step(alpha, widths(alpha + 1))
    return _to_process(ref, s, store, budget, N)


def _to_process(ref: _Refiner, s, store, budget, N) -> ScottProcess:
    levels = {}
    tmap = {}
    for alpha, table in ref.ids.items():
        levels[alpha] = ref.level_sets(alpha)
        for t, fid in table.items():
            tmap[(alpha, t)] = fid
    if N is not None:
        for alpha in levels:
            for n in range(N + 1):
                levels[alpha].setdefault(n, frozenset())
    return ScottProcess(
        store=store,
        vocab=s.vocab,
        levels=levels,
        truncated=N,
        budget=budget,
        origin=s,
        tuple_map=tmap,
    )


def stabilization_level(p: ScottProcess, width: int = 1) -> Optional[int]:
    """Least finite α with |Φⁿ_α| = |Φⁿ_{α+1}| at every explicit width of level α+1.

    For a structure-derived process equal counts mean the partition did
    not split, i.e. V_{α,α+1} is injective there.  With an ω class the
    level α+1 must reach at least ``width``.
    """
    finite = sorted(a for a in p.levels if isinstance(a, int))
    for alpha in finite:
        if alpha + 1 not in p.levels:
            break
        ws = p.widths(alpha + 1)
        if p.truncated is None and (not ws or max(ws) < width):
            break
        if all(len(p.phi(alpha + 1, n)) == len(p.phi(alpha, n)) for n in ws):
            return alpha
    return None


def analyze_to_stabilization(
    s: MultiplicityStructure,
    budget: Optional[int] = None,
    *,
    width: int = 1,
    store: Optional[FormulaStore] = None,
    workers: int = 1,
    shuffle_seed: Optional[int] = None,
) -> ScottProcess:
    """Analyze until the partition stops splitting; keep levels 0..λ+1.

    Finite structures are refined until stable (``budget`` only caps the
    number of levels).  With an ω class the triangle of the given budget is
    computed and the stable level must be certified up to ``width``.
    """
    store = store if store is not None else default_store()
    N = _finite_width(s)
    if N is not None:
        cap = budget if budget is not None else 4 * (N + 2) ** 2
        ref = _Refiner(s, store, N, workers, shuffle_seed)
        ws = list(range(N + 1))
        ref.level0(ws)
        for alpha in range(cap):
            ref.step(alpha, ws)
            before, after = ref.level_sets(alpha), ref.level_sets(alpha + 1)
            if all(len(before.get(n, ())) == len(after.get(n, ())) for n in ws):
                return _to_process(ref, s, store, budget if budget is not None else alpha + 1, N)
        raise BudgetExhausted(
            f"partition still refining after {cap} levels", _to_process(ref, s, store, cap, N)
        )
    B = 6 if budget is None else budget
    p = analyze(s, B, store=store, workers=workers, shuffle_seed=shuffle_seed)
    lam = stabilization_level(p, width)
    if lam is None:
        raise BudgetExhausted(
            f"no stable level certified up to width {width} within budget {B}", p
        )
    return p.prefix(lam + 1)


def rank_of_structure(p: ScottProcess, width: int = 1):
    from .processkit import process_rank

    if p.origin is None:
        raise ValueError("rank_of_structure needs a structure-derived process")
    return process_rank(p, width=width)


def iso_check(M: MultiplicityStructure, N: MultiplicityStructure, store: Optional[FormulaStore] = None) -> bool:
    """Isomorphism of finite structures via joint refinement to a common fixpoint."""
    for s in (M, N):
        if not s.is_finite:
            raise ValueError(
                "iso_check handles finite structures only; compare structures with ω classes "
                "through the canonical dumps of their analyses instead"
            )
    if M.vocab != N.vocab:
        return False
    store = store if store is not None else FormulaStore()
    refs = []
    for s in (M, N):
        n = int(s.size)
        r = _Refiner(s, store, n)
        r.level0(list(range(n + 1)))
        refs.append(r)
    top = max(int(M.size), int(N.size))
    ws = list(range(top + 1))

    def joint(alpha):
        out = {}
        for r in refs:
            for n, ids in r.level_sets(alpha).items():
                out.setdefault(n, set()).update(ids)
        return out

    alpha = 0
    while True:
        for r in refs:
            r.step(alpha, list(r.tuples))
        before, after = joint(alpha), joint(alpha + 1)
        if all(len(before.get(n, ())) == len(after.get(n, ())) for n in ws):
            return refs[0].ids[alpha][()] == refs[1].ids[alpha][()]
        alpha += 1
