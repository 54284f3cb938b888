"""Model construction from Scott processes: threads, model pairs and weavings.

All constructions are prefixes of ω-recursions.  They run to a finite
element budget and keep a ledger of the obligations they discharged and
of the ones still open when the budget ran out.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .engine import analyze
from .formulas import FormulaStore, Injection
from .levels import OMEGA, Level, is_limit
from .process import ScottProcess
from .processkit import (
    AmalgamationFailure,
    ValidationReport,
    amalgamate,
    h_closure_violation,
    is_amalgamative,
    label,
    unique_sentence,
    validate_process,
)
from .structures import MultiplicityStructure, finite_structure


class ThreadError(RuntimeError):
    """No admissible next formula exists although the process claims validity."""


def lift_levels(p: ScottProcess, delta: Level) -> list[Level]:
    """Levels α < δ whose lift obligations the constructions schedule.

    For a successor δ only δ-1 is needed.  For δ = ω the finite levels
    present in the process are used (levels above the stable one are
    copies of it).
    """
    if delta == 0:
        return []
    if not is_limit(delta):
        return [delta - 1]
    return [a for a in p.level_indices if isinstance(a, int) and a + 1 in p.levels]


def _ext(m: int, y: int, n: int, base: Optional[Sequence[int]] = None) -> Injection:
    imgs = tuple(range(m)) if base is None else tuple(base)
    return Injection(imgs + (y,), n)


@dataclass
class Obligation:
    m: int
    alpha: Level
    psi: int
    raised_at: int
    met_by: Optional[tuple[int, int]] = None

    @property
    def met(self) -> bool:
        return self.met_by is not None

    def line(self, store: FormulaStore, kind: str = "lift") -> str:
        head = f"{kind} m={self.m} α={self.alpha} ψ={label(store, self.psi)}"
        if self.met_by is None:
            return f"open {head}"
        n, y = self.met_by
        return f"met {head} by n={n} y={y}"


@dataclass
class Thread:
    process: ScottProcess = field(repr=False)
    level: Level
    formulas: list[int]
    obligations: list[Obligation]
    completeness: list[tuple[int, Optional[tuple[int, tuple[int, ...]]]]]
    notice: Optional[str] = None
    requested: int = 0

    @property
    def width(self) -> int:
        return len(self.formulas) - 1

    def open_obligations(self) -> list[Obligation]:
        return [o for o in self.obligations if not o.met]

    def check(self) -> list[str]:
        """Recheck coherence and every recorded witness; returns problems found."""
        st = self.process.store
        out = []
        top = self.formulas[-1]
        for m, f in enumerate(self.formulas):
            if st.h_project(top, Injection.inclusion(m, self.width)) != f:
                out.append(f"φ_{m} is not the i_{m}-projection of φ_{self.width}")
        for o in self.obligations:
            if o.met_by is None:
                continue
            n, y = o.met_by
            got = st.v_project(st.h_project(self.formulas[n], _ext(o.m, y, n)), o.alpha)
            if got != o.psi:
                out.append(f"witness for {o.line(st)} does not hold")
        for psi, wit in self.completeness:
            if wit is not None:
                n, imgs = wit
                if st.h_project(self.formulas[n], Injection(imgs, n)) != psi:
                    out.append(f"completeness witness for {label(st, psi)} does not hold")
        return out

    def ledger_lines(self) -> list[str]:
        st = self.process.store
        lines = [o.line(st) for o in self.obligations]
        for psi, wit in self.completeness:
            if wit is None:
                lines.append(f"open complete ψ={label(st, psi)}")
            else:
                lines.append(f"met complete ψ={label(st, psi)} by n={wit[0]} j={wit[1]}")
        if self.notice:
            lines.append(f"notice: {self.notice}")
        return lines


def _met(st, top: int, n: int, o: Obligation, base=None) -> Optional[int]:
    ys = [y for y in range(n) if y >= o.m] if base is None else [y for y in range(n) if y not in base]
    for y in ys:
        if st.v_project(st.h_project(top, _ext(o.m, y, n, base)), o.alpha) == o.psi:
            return y
    return None


def _find_covering(st, top: int, n: int, psi: int) -> Optional[tuple[int, ...]]:
    for j in Injection.all(st.width(psi), n):
        if st.h_project(top, j) == psi:
            return j.images
    return None


def build_thread(
    p: ScottProcess,
    N: int,
    delta: Optional[Level] = None,
    complete: bool = True,
) -> Thread:
    """A thread φ_0, φ_1, ... through Φ_δ, grown to width N where possible."""
    delta = p.last if delta is None else delta
    st = p.store
    A = lift_levels(p, delta)
    formulas = [unique_sentence(p, delta)]
    obligations: list[Obligation] = []
    queue: deque[Obligation] = deque()

    def raise_obligations(m: int):
        f = formulas[m]
        for a in A:
            for psi in st.sorted_ids(st.e_set(st.v_project(f, a + 1))):
                o = Obligation(m, a, psi, m)
                obligations.append(o)
                queue.append(o)

    targets: list[tuple[int, Optional[tuple[int, tuple[int, ...]]]]] = []
    if complete:
        for w in p.widths(delta):
            if w <= N:
                targets.extend((psi, None) for psi in st.sorted_ids(p.phi(delta, w)))
    tpos = 0
    plan: list[int] = []
    turn_complete = False
    notice = None
    raise_obligations(0)

    while len(formulas) - 1 < N:
        n = len(formulas) - 1
        cur = formulas[n]
        while queue:
            o = queue[0]
            y = _met(st, cur, n, o)
            if y is None:
                break
            o.met_by = (n, y)
            queue.popleft()
        while tpos < len(targets):
            psi = targets[tpos][0]
            imgs = _find_covering(st, cur, n, psi) if st.width(psi) <= n else None
            if imgs is None:
                break
            targets[tpos] = (psi, (n, imgs))
            tpos += 1
        if not p.known(delta, n + 1):
            notice = f"width {n + 1} at level {delta} is outside the computed budget; thread stops at width {n}"
            break
        fiber = st.sorted_ids(p.fiber(delta, cur))
        if not fiber:
            notice = f"thread exists only up to truncation width {n}"
            break
        theta = None
        if plan:
            theta = plan.pop(0)
        elif queue and not (turn_complete and tpos < len(targets)):
            o = queue[0]
            inj = _ext(o.m, n, n + 1)
            for cand in fiber:
                if st.v_project(st.h_project(cand, inj), o.alpha) == o.psi:
                    theta = cand
                    break
            if theta is None:
                raise ThreadError(f"no extension of φ_{n} discharges {o.line(st)}")
            o.met_by = (n + 1, n)
            queue.popleft()
            turn_complete = True
        else:
            turn_complete = False
            while tpos < len(targets) and theta is None:
                psi = targets[tpos][0]
                w = st.width(psi)
                if n + w > N or not p.known(delta, n + w):
                    tpos += 1
                    continue
                inc = Injection.inclusion(n, n + w)
                injs = list(Injection.all(w, n + w))
                for big in st.sorted_ids(p.phi(delta, n + w)):
                    if st.h_project(big, inc) != cur:
                        continue
                    if any(st.h_project(big, j) == psi for j in injs):
                        steps = [st.h_project(big, Injection.inclusion(k, n + w)) for k in range(n + 1, n + w + 1)]
                        theta, plan = steps[0], steps[1:]
                        break
                else:
                    tpos += 1
            if theta is None:
                theta = fiber[0]
        formulas.append(theta)
        raise_obligations(n + 1)

    n = len(formulas) - 1
    for o in obligations:
        if not o.met:
            y = _met(st, formulas[n], n, o)
            if y is not None:
                o.met_by = (n, y)
    for i, (psi, wit) in enumerate(targets):
        if wit is None and st.width(psi) <= n:
            imgs = _find_covering(st, formulas[n], n, psi)
            if imgs is not None:
                targets[i] = (psi, (n, imgs))
    return Thread(p, delta, formulas, obligations, targets, notice, N)


def realize_from(store: FormulaStore, top: int, names: Sequence[str]) -> MultiplicityStructure:
    """The finite structure on ``names`` whose atomic facts are V_0 of ``top``."""
    base = store.node(store.v_project(top, 0))
    facts = [(name, tuple(names[a] for a in args)) for name, args in base.positive]
    return finite_structure(base.vocab.symbols, list(names), facts)


def element_names(k: int) -> list[str]:
    return [f"c{i}" for i in range(k)]


def realize_model(t: Thread) -> MultiplicityStructure:
    return realize_from(t.process.store, t.formulas[-1], element_names(t.width))


# -- certification of realized prefixes ----------------------------------------------


@dataclass
class CertificationReport:
    certified: int
    compared: int
    mismatches: list[tuple[Level, tuple[int, ...]]]
    pairs: dict[tuple[int, Level], bool]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def certified_pairs(self) -> list[tuple[int, Level]]:
        return sorted(k for k, v in self.pairs.items() if v)


def certify_realization(p: ScottProcess, top: int, realized: MultiplicityStructure) -> CertificationReport:
    """Compare the re-analysis of a realized prefix with the types predicted by ``top``.

    A tuple b of indices is certified at level 0 always, and at α+1 when all
    its one-point extensions inside the prefix are certified at α and
    realize exactly the predicted E-set.  Certified tuples must get the
    predicted α-type in the re-analysis.
    """
    st = p.store
    K = st.width(top)
    delta = st.level(top)
    levels = [a for a in p.level_indices if isinstance(a, int) and a <= delta]
    if is_limit(delta):
        rec = len(st.node(top).record)
        levels = [a for a in levels if a < rec]
    top_level = max(levels)
    names = element_names(K)
    q = analyze(realized, top_level, store=st)
    memo: dict = {}

    def predicted(b, a):
        return st.v_project(st.h_project(top, Injection(b, K)), a)

    def cert(b, a) -> bool:
        key = (b, a)
        if key in memo:
            return memo[key]
        if a == 0:
            ok = True
        else:
            exts = [b + (c,) for c in range(K) if c not in b]
            ok = all(cert(e, a - 1) for e in exts)
            if ok:
                got = {predicted(e, a - 1) for e in exts}
                ok = got == st.e_set(predicted(b, a))
        memo[key] = ok
        return ok

    certified = compared = 0
    mismatches = []
    pairs: dict[tuple[int, Level], bool] = {}
    for n in range(K + 1):
        for b in itertools.permutations(range(K), n):
            for a in levels:
                c = cert(b, a)
                pairs[(n, a)] = pairs.get((n, a), True) and c
                if not c:
                    continue
                certified += 1
                compared += 1
                mine = q.tuple_map[(a, tuple(names[i] for i in b))]
                if mine != predicted(b, a):
                    mismatches.append((a, b))
    return CertificationReport(certified, compared, mismatches, pairs)


# -- model pairs -----------------------------------------------------------------------


@dataclass
class ModelPair:
    small: MultiplicityStructure
    big: MultiplicityStructure
    thread: Thread
    Y: list[int]
    y_obligations: list[Obligation]
    star: dict[int, frozenset] = field(repr=False)

    def ledger_lines(self) -> list[str]:
        st = self.thread.process.store
        lines = [f"Y = {self.Y}"]
        lines += ["N " + s for s in self.thread.ledger_lines()]
        lines += ["M " + o.line(st) for o in self.y_obligations]
        return lines


class PairError(ValueError):
    def __init__(self, message: str, report: Optional[ValidationReport] = None):
        super().__init__(message)
        self.report = report


def build_model_pair(p: ScottProcess, star: dict[int, frozenset], N: int, gamma: Optional[Level] = None) -> ModelPair:
    """A thread through Φ_γ together with an index set Y whose sub-thread runs through Φ*.

    The big model is realized from the thread, the small one is its
    substructure on the Y-indexed elements.
    """
    gamma = p.last if gamma is None else gamma
    st = p.store
    star = {n: frozenset(v) for n, v in star.items()}
    for n, ids in star.items():
        if not ids <= p.phi(gamma, n):
            raise PairError(f"Φ* is not a subset of Φ_{gamma} at width {n}")
    ext = p.prefix(gamma, inclusive=False).with_level(gamma, star)
    report = validate_process(ext)
    if not report.ok:
        raise PairError(
            f"extending by Φ* is not a Scott process (fails {', '.join(report.failed())})", report
        )
    A = lift_levels(p, gamma)
    formulas = [unique_sentence(p, gamma)]
    Y: list[int] = []
    main: list[Obligation] = []
    side: list[Obligation] = []
    mq: deque[Obligation] = deque()
    sq: deque[Obligation] = deque()

    def raise_main(m):
        for a in A:
            for psi in st.sorted_ids(st.e_set(st.v_project(formulas[m], a + 1))):
                o = Obligation(m, a, psi, m)
                main.append(o)
                mq.append(o)

    def sub_formula(n, k):
        """H(φ_n, j_k) for the first k members of Y."""
        return st.h_project(formulas[n], Injection(tuple(Y[:k]), n))

    def raise_side(k, n):
        for a in A:
            for psi in st.sorted_ids(st.e_set(st.v_project(sub_formula(n, k), a + 1))):
                o = Obligation(k, a, psi, n)
                side.append(o)
                sq.append(o)

    def star_ok(theta, n):
        return st.h_project(theta, Injection(tuple(Y) + (n,), n + 1)) in star.get(len(Y) + 1, frozenset())

    raise_main(0)
    raise_side(0, 0)
    turn = 0
    notice = None
    while len(formulas) - 1 < N:
        n = len(formulas) - 1
        cur = formulas[n]
        for q, base_of in ((mq, None), (sq, "Y")):
            while q:
                o = q[0]
                base = tuple(Y[: o.m]) if base_of else None
                y = _met(st, cur, n, o, base)
                if y is None or (base_of and y not in Y):
                    break
                o.met_by = (n, y)
                q.popleft()
        if not p.known(gamma, n + 1):
            notice = f"width {n + 1} at level {gamma} is outside the computed budget"
            break
        fiber = st.sorted_ids(p.fiber(gamma, cur))
        if not fiber:
            notice = f"thread exists only up to truncation width {n}"
            break
        want_side = turn % 2 == 1
        theta = None
        into_y = False
        if want_side and (len(Y) + 1) in star:
            o = sq[0] if sq else None
            inj = Injection(tuple(Y[: o.m]) + (n,), n + 1) if o is not None else None
            for cand in fiber:
                if not star_ok(cand, n):
                    continue
                if o is None or st.v_project(st.h_project(cand, inj), o.alpha) == o.psi:
                    theta = cand
                    break
            if theta is None and o is not None and p.truncated is None:
                raise ThreadError(f"no extension of φ_{n} discharges {o.line(st, 'sub')}")
            if theta is not None:
                if o is not None:
                    o.met_by = (n + 1, n)
                    sq.popleft()
                into_y = True
        if theta is None and mq:
            o = mq[0]
            inj = _ext(o.m, n, n + 1)
            for cand in fiber:
                if st.v_project(st.h_project(cand, inj), o.alpha) == o.psi:
                    theta = cand
                    break
            if theta is None:
                raise ThreadError(f"no extension of φ_{n} discharges {o.line(st)}")
            o.met_by = (n + 1, n)
            mq.popleft()
        if theta is None:
            # keep Y-eligible points in reserve for the Y steps
            theta = next((c for c in fiber if not star_ok(c, n)), fiber[0])
        turn += 1
        formulas.append(theta)
        raise_main(n + 1)
        if into_y:
            Y.append(n)
            raise_side(len(Y), n + 1)

    n = len(formulas) - 1
    for o in main:
        if not o.met:
            y = _met(st, formulas[n], n, o)
            if y is not None:
                o.met_by = (n, y)
    t = Thread(p, gamma, formulas, main, [], notice, N)
    big = realize_model(t)
    names = element_names(n)
    small_top = st.h_project(formulas[n], Injection(tuple(Y), n))
    small = realize_from(st, small_top, [names[y] for y in Y])
    return ModelPair(small, big, t, Y, side, star)


# -- weavings -------------------------------------------------------------------------


class WeavingError(ValueError):
    def __init__(self, message: str, counterexample: Optional[AmalgamationFailure] = None):
        super().__init__(message)
        self.counterexample = counterexample


@dataclass
class WeaveObligation:
    a: tuple[int, ...]
    psi: int
    met_at: Optional[int] = None


@dataclass
class WeavingFamily:
    process: ScottProcess = field(repr=False)
    level: Level
    K: int
    assignment: dict[tuple[int, ...], int]
    ledger: list[WeaveObligation]
    open_count: int = 0

    @staticmethod
    def embedding(a: Sequence[int], b: Sequence[int]) -> Injection:
        """j_{a,b}: the order-preserving map of a into b."""
        pos = {x: i for i, x in enumerate(b)}
        return Injection(tuple(pos[x] for x in a), len(b))

    @property
    def top(self) -> int:
        return self.assignment[tuple(range(self.K))]

    def ledger_lines(self) -> list[str]:
        st = self.process.store
        out = []
        for o in self.ledger:
            state = f"met at index {o.met_at}" if o.met_at is not None else "open"
            out.append(f"{state} a={list(o.a)} ψ={label(st, o.psi)}")
        out.append(f"open obligations beyond budget: {self.open_count}")
        return out


def _subsets(K: int):
    for r in range(K + 1):
        yield from itertools.combinations(range(K), r)


def build_weaving(p: ScottProcess, K: int, delta: Optional[Level] = None) -> WeavingFamily:
    """Assign φ_a for all a ⊆ {0..K-1}, discharging strong-weaving obligations in FIFO order."""
    delta = p.last if delta is None else delta
    st = p.store
    if h_closure_violation(p, delta) is not None:
        raise WeavingError(f"level {delta} is not H-closed")
    amal = is_amalgamative(p, delta)
    if not amal.ok:
        raise WeavingError(
            f"level {delta} does not amalgamate: {amal.counterexample.describe(st)}", amal.counterexample
        )
    if K and not p.known(delta, K):
        raise WeavingError(f"width {K} at level {delta} is outside the computed budget")

    cur = unique_sentence(p, delta)
    scheduled: list[WeaveObligation] = []
    seen: set = set()
    pending: list[WeaveObligation] = []

    def add_for(a):
        if len(a) >= K or not p.known(delta, len(a) + 1):
            return
        phi_a = st.h_project(cur, Injection(a, len_cur()))
        for psi in st.sorted_ids(p.fiber(delta, phi_a)):
            key = (a, psi)
            if key not in seen:
                seen.add(key)
                pending.append(WeaveObligation(a, psi))

    width = [0]

    def len_cur():
        return width[0]

    def is_met(o: WeaveObligation, top: int, w: int) -> bool:
        for b in range(w):
            if b in o.a:
                continue
            if st.h_project(top, Injection(o.a + (b,), w)) == o.psi:
                return True
        return False

    add_for(())
    for alpha in range(K):
        pending = [o for o in pending if not is_met(o, cur, alpha)]
        nxt = None
        if pending:
            o = pending.pop(0)
            j = Injection(o.a, alpha)
            k = Injection.inclusion(len(o.a), len(o.a) + 1)
            rho, jp, kp = amalgamate(p, cur, o.psi, j, k, delta)
            if st.width(rho) != alpha + 1 or kp.images[-1] != alpha:
                raise RuntimeError("amalgamation placed the new point on an existing index")
            o.met_at = alpha
            scheduled.append(o)
            nxt = rho
        else:
            fiber = st.sorted_ids(p.fiber(delta, cur))
            if not fiber:
                raise WeavingError(f"Φ_{delta} has no width-{alpha + 1} extension of the current formula")
            nxt = fiber[0]
        cur = nxt
        width[0] = alpha + 1
        for r in range(alpha + 1):
            for a in itertools.combinations(range(alpha), r):
                add_for(a + (alpha,))
    pending = [o for o in pending if not is_met(o, cur, K)]
    assignment = {a: st.h_project(cur, Injection(a, K)) for a in _subsets(K)}
    return WeavingFamily(p, delta, K, assignment, scheduled, len(pending))


@dataclass
class WeavingReport:
    condition1: Optional[str]
    condition2: Optional[str]
    ledger: Optional[str]
    certification: Optional[CertificationReport]
    checked_pairs: int = 0

    @property
    def ok(self) -> bool:
        cert_ok = self.certification is None or self.certification.ok
        return self.condition1 is None and self.condition2 is None and self.ledger is None and cert_ok

    def lines(self) -> list[str]:
        def fmt(name, err):
            return f"{'FAIL' if err else 'PASS'} {name}" + (f": {err}" if err else "")

        out = [
            fmt("condition 1 (membership)", self.condition1),
            fmt(f"condition 2 (coherence, {self.checked_pairs} pairs)", self.condition2),
            fmt("ledger", self.ledger),
        ]
        c = self.certification
        if c is not None:
            status = "PASS" if c.ok else "FAIL"
            out.append(f"{status} realization: {c.compared} certified tuple types compared, {len(c.mismatches)} mismatches")
        return out


def verify_weaving(w: WeavingFamily, p: Optional[ScottProcess] = None, realize: bool = True) -> WeavingReport:
    p = p or w.process
    st = p.store
    c1 = c2 = led = None
    subsets = list(_subsets(w.K))
    for a in subsets:
        f = w.assignment.get(a)
        if f is None or st.width(f) != len(a) or f not in p.phi(w.level, len(a)):
            c1 = f"φ_{list(a)} is not a width-{len(a)} member of Φ_{w.level}"
            break
    pairs = 0
    if c1 is None:
        for b in subsets:
            for r in range(len(b) + 1):
                for a in itertools.combinations(b, r):
                    pairs += 1
                    if st.h_project(w.assignment[b], w.embedding(a, b)) != w.assignment[a]:
                        if c2 is None:
                            c2 = f"φ_{list(a)} ≠ H(φ_{list(b)}, j_a,b)"
    for o in w.ledger:
        if o.met_at is None:
            led = f"scheduled obligation a={list(o.a)} was not discharged"
            break
        b = o.a + (o.met_at,)
        y = len(b) - 1
        jab = w.embedding(o.a, b)
        if st.h_project(w.assignment[b], Injection(jab.images + (y,), len(b))) != o.psi:
            led = f"obligation a={list(o.a)} is not witnessed by index {o.met_at}"
            break
    cert = None
    if realize and c1 is None and w.K:
        top = w.assignment[tuple(range(w.K))]
        cert = certify_realization(p, top, realize_from(st, top, element_names(w.K)))
    return WeavingReport(c1, c2, led, cert, pairs)
