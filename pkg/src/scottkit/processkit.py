"""Operations on Scott processes viewed as abstract objects.

Every quantifier over "all widths" or "all levels" is bounded by what the
process actually contains: checks that would need an absent width are
counted as skipped, and checks that would need widths beyond the size of
a finite structure are counted as vacuous.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

from .formulas import FormulaStore, Injection, LimitPath, Successor
from .levels import OMEGA, Level, is_limit, is_successor, predecessor
from .process import ScottProcess

CONDITIONS = ("1a", "1b", "1c", "1d", "1e", "2a", "2b", "2c")

DESCRIPTIONS = {
    "1a": "every member of Φⁿ_α is a width-n formula of level α",
    "1b": "E-sets of Φ_{α+1} lie inside Φ_α",
    "1c": "Φ_α is the V-image of each later level",
    "1d": "closed under renaming of free variables",
    "1e": "Φᵐ_α is the i_m-projection of Φⁿ_α",
    "2a": "E(φ) is the V-image of the fiber over φ",
    "2b": "E of a V-projection lies in the V-image of the fiber",
    "2c": "any two formulas are jointly realized by a wider formula",
}


class NotStabilized(ValueError):
    """The operation needs a process whose partition has stopped splitting."""


class InvariantError(AssertionError):
    """Two computations that must agree did not."""


def label(store: FormulaStore, fid: int) -> str:
    return "#" + store.canon(fid).hex()[:10]


# -- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class Counterexample:
    condition: str
    level: Level
    width: int
    formulas: tuple[int, ...]
    detail: str
    injection: Optional[Injection] = None
    other_level: Optional[Level] = None

    def describe(self, store: FormulaStore) -> str:
        names = ", ".join(label(store, f) for f in self.formulas)
        where = f"level {self.level}" + (f"/{self.other_level}" if self.other_level is not None else "")
        extra = f" via {self.injection}" if self.injection is not None else ""
        return f"{where} width {self.width}: {self.detail} [{names}]{extra}"


@dataclass
class Verdict:
    condition: str
    checked: int = 0
    vacuous: int = 0
    skipped: int = 0
    counterexample: Optional[Counterexample] = None

    @property
    def status(self) -> str:
        if self.counterexample is not None:
            return "FAIL"
        if self.vacuous:
            return "VACUOUS"
        return "PASS"

    def line(self, store: FormulaStore) -> str:
        head = f"{self.status} {self.condition}: checked={self.checked} vacuous={self.vacuous} skipped={self.skipped}"
        if self.counterexample is not None:
            head += " -- " + self.counterexample.describe(store)
        return head


@dataclass
class ValidationReport:
    verdicts: dict[str, Verdict]
    store: FormulaStore = field(repr=False)
    budget: Optional[int] = None
    truncated: Optional[int] = None

    @property
    def ok(self) -> bool:
        return all(v.status != "FAIL" for v in self.verdicts.values())

    def failed(self) -> list[str]:
        return [c for c, v in self.verdicts.items() if v.status == "FAIL"]

    def __getitem__(self, cond: str) -> Verdict:
        return self.verdicts[cond]

    def lines(self) -> list[str]:
        return [self.verdicts[c].line(self.store) for c in CONDITIONS if c in self.verdicts]


class _Fail(Exception):
    def __init__(self, cx: Counterexample):
        self.cx = cx


def _sorted(p: ScottProcess, ids) -> list[int]:
    return p.store.sorted_ids(ids)


def _malformation(p: ScottProcess, a: Level, n: int, f: int) -> Optional[str]:
    st = p.store
    nd = st.node(f)
    if nd.width != n:
        return f"formula of width {nd.width} listed at width {n}"
    if nd.level != a:
        return f"formula of level {nd.level} listed at level {a}"
    if st.vocab(f) != p.vocab:
        return "formula over a different vocabulary"
    if a != 0 and is_successor(a) and not isinstance(nd, Successor):
        return "successor level holds a non-successor node"
    if is_limit(a) and not isinstance(nd, LimitPath):
        return "limit level holds a non-path node"
    return None


def _check_1a(p: ScottProcess, v: Verdict) -> None:
    for a in p.level_indices:
        for n in p.widths(a):
            for f in _sorted(p, p.phi(a, n)):
                v.checked += 1
                problem = _malformation(p, a, n, f)
                if problem:
                    raise _Fail(Counterexample("1a", a, n, (f,), problem))


def _well_formed(p: ScottProcess) -> ScottProcess:
    """``p`` without the members that fail 1a; the other checks assume well-formedness."""
    levels = {
        a: {n: frozenset(f for f in ids if _malformation(p, a, n, f) is None) for n, ids in ws.items()}
        for a, ws in p.levels.items()
    }
    if levels == p.levels:
        return p
    return replace(p, levels=levels, tuple_map={})


def _check_1b(p: ScottProcess, v: Verdict) -> None:
    st = p.store
    for a in p.level_indices:
        if not is_successor(a) or predecessor(a) not in p.levels:
            continue
        b = predecessor(a)
        for n in p.widths(a):
            if not p.known(b, n + 1):
                v.skipped += len(p.phi(a, n))
                continue
            target = p.phi(b, n + 1)
            for f in _sorted(p, p.phi(a, n)):
                v.checked += 1
                extra = st.e_set(f) - target
                if extra:
                    bad = _sorted(p, extra)[0]
                    raise _Fail(Counterexample("1b", a, n, (f, bad), "E-child outside Φ_α"))


def _check_1c(p: ScottProcess, v: Verdict) -> None:
    st = p.store
    levels = p.level_indices
    for i, a in enumerate(levels):
        for b in levels[i + 1:]:
            for n in p.widths(b):
                if not p.known(a, n):
                    v.skipped += 1
                    continue
                v.checked += 1
                try:
                    image = {st.v_project(f, a): f for f in _sorted(p, p.phi(b, n))}
                except ValueError as exc:
                    raise _Fail(Counterexample("1c", a, n, (), str(exc), other_level=b)) from None
                here = p.phi(a, n)
                outside = [g for g in image if g not in here]
                if outside:
                    g = _sorted(p, outside)[0]
                    raise _Fail(
                        Counterexample("1c", a, n, (image[g], g), "V-projection lands outside Φ_α", other_level=b)
                    )
                missing = here - set(image)
                if missing:
                    g = _sorted(p, missing)[0]
                    raise _Fail(
                        Counterexample("1c", a, n, (g,), "formula with no V-preimage in the later level", other_level=b)
                    )


def _check_1d(p: ScottProcess, v: Verdict) -> None:
    st = p.store
    for a in p.level_indices:
        for n in p.widths(a):
            here = p.phi(a, n)
            swaps = [Injection.transposition(n, i, i + 1) for i in range(n - 1)]
            for f in _sorted(p, here):
                for s in swaps:
                    v.checked += 1
                    if st.h_project(f, s) not in here:
                        raise _Fail(Counterexample("1d", a, n, (f,), "renamed formula missing", injection=s))


def _check_1e(p: ScottProcess, v: Verdict) -> None:
    st = p.store
    for a in p.level_indices:
        ws = p.widths(a)
        for n in ws:
            for m in range(n):
                if m not in p.levels[a]:
                    v.skipped += 1
                    continue
                v.checked += 1
                inc = Injection.inclusion(m, n)
                proj = {}
                for f in _sorted(p, p.phi(a, n)):
                    proj.setdefault(st.h_project(f, inc), f)
                low = p.phi(a, m)
                outside = [g for g in proj if g not in low]
                if outside:
                    g = _sorted(p, outside)[0]
                    raise _Fail(
                        Counterexample("1e", a, n, (proj[g], g), f"i_{m}-projection outside Φ^{m}", injection=inc)
                    )
                missing = low - set(proj)
                if missing:
                    g = _sorted(p, missing)[0]
                    raise _Fail(
                        Counterexample("1e", a, m, (g,), f"no extension to width {n}", injection=inc)
                    )
        if p.truncated is not None:
            v.vacuous += sum(1 for m in ws if m <= p.truncated)


def _check_2a(p: ScottProcess, v: Verdict) -> None:
    st = p.store
    for a in p.level_indices:
        b = a + 1
        if b not in p.levels:
            continue
        for n in p.widths(b):
            if not p.known(b, n + 1):
                v.skipped += len(p.phi(b, n))
                continue
            for f in _sorted(p, p.phi(b, n)):
                v.checked += 1
                image = frozenset(st.v_project(g, a) for g in p.fiber(b, f))
                if image != st.e_set(f):
                    diff = _sorted(p, image ^ st.e_set(f))[0]
                    side = "missing from E" if diff in image else "in E but not realized by the fiber"
                    raise _Fail(Counterexample("2a", b, n, (f, diff), side))


def _check_2b(p: ScottProcess, v: Verdict) -> None:
    st = p.store
    levels = p.level_indices
    for a in levels:
        if a + 1 not in p.levels:
            continue
        for b in levels:
            if b < a + 1:
                continue
            for n in p.widths(b):
                if not p.known(b, n + 1) or n not in p.levels[a + 1]:
                    v.skipped += 1
                    continue
                for f in _sorted(p, p.phi(b, n)):
                    v.checked += 1
                    image = {st.v_project(g, a) for g in p.fiber(b, f)}
                    need = st.e_set(st.v_project(f, a + 1))
                    missing = need - image
                    if missing:
                        g = _sorted(p, missing)[0]
                        raise _Fail(
                            Counterexample("2b", a, n, (f, g), "E-child not realized by the later fiber", other_level=b)
                        )


def _check_2c(p: ScottProcess, v: Verdict) -> None:
    st = p.store
    for a in p.level_indices:
        ws = p.widths(a)
        for n in ws:
            for m in ws:
                w = n + m
                if w not in p.levels[a]:
                    if p.truncated is not None and w > p.truncated:
                        v.vacuous += 1
                    else:
                        v.skipped += 1
                    continue
                v.checked += 1
                need = p.phi(a, m)
                inc = Injection.inclusion(n, w)
                injs = list(Injection.all(m, w))
                covered: dict[int, set] = {}
                for t in _sorted(p, p.phi(a, w)):
                    head = st.h_project(t, inc)
                    got = covered.setdefault(head, set())
                    if len(got) >= len(need) and need <= got:
                        continue
                    for j in injs:
                        got.add(st.h_project(t, j))
                for f in _sorted(p, p.phi(a, n)):
                    lacking = need - covered.get(f, set())
                    if lacking:
                        g = _sorted(p, lacking)[0]
                        raise _Fail(
                            Counterexample("2c", a, n, (f, g), f"no common extension of width {w}")
                        )


_CHECKS: dict[str, Callable[[ScottProcess, Verdict], None]] = {
    "1a": _check_1a,
    "1b": _check_1b,
    "1c": _check_1c,
    "1d": _check_1d,
    "1e": _check_1e,
    "2a": _check_2a,
    "2b": _check_2b,
    "2c": _check_2c,
}


def validate_process(p: ScottProcess, conditions: Iterable[str] = CONDITIONS) -> ValidationReport:
    """Check the formula and coherence conditions within the computed budget."""
    verdicts = {}
    clean = _well_formed(p)
    for cond in conditions:
        v = Verdict(cond)
        try:
            _CHECKS[cond](p if cond == "1a" else clean, v)
        except _Fail as fail:
            v.counterexample = fail.cx
        verdicts[cond] = v
    return ValidationReport(verdicts, p.store, p.budget, p.truncated)


def unique_sentence(p: ScottProcess, alpha: Level) -> int:
    s = p.phi(alpha, 0)
    if len(s) != 1:
        raise ValueError(f"Φ⁰_{alpha} has {len(s)} members; a valid process has exactly one")
    return next(iter(s))


def reverse_inclusion_failures(p: ScottProcess) -> list[tuple[Level, Level, int]]:
    """Instances where E(V_{α+1}(φ)) differs from the V_α-image of the fiber over φ ∈ Φ_β."""
    st = p.store
    out = []
    for a in p.level_indices:
        if a + 1 not in p.levels:
            continue
        for b in p.level_indices:
            if b < a + 1:
                continue
            for n in p.widths(b):
                if not p.known(b, n + 1) or n not in p.levels[a + 1]:
                    continue
                for f in p.phi(b, n):
                    image = {st.v_project(g, a) for g in p.fiber(b, f)}
                    if image != st.e_set(st.v_project(f, a + 1)):
                        out.append((a, b, f))
    return out


# -- completion and amalgamation -------------------------------------------------


def maximal_completion(p: ScottProcess, delta: Optional[Level] = None) -> dict[int, frozenset]:
    """One successor per φ′ ∈ Φⁿ_δ whose E-set is the full fiber over φ′."""
    delta = p.last if delta is None else delta
    st = p.store
    out = {}
    for n in p.widths(delta):
        if not p.known(delta, n + 1):
            continue
        out[n] = frozenset(st.intern_successor(f, p.fiber(delta, f)) for f in p.phi(delta, n))
    return out


def h_closure_violation(p: ScottProcess, delta: Level) -> Optional[tuple[int, Injection]]:
    st = p.store
    for n in p.widths(delta):
        here = p.phi(delta, n)
        gens = [Injection.transposition(n, i, i + 1) for i in range(n - 1)]
        if n and (n - 1) in p.levels[delta]:
            gens.append(Injection.inclusion(n - 1, n))
        for f in _sorted(p, here):
            for g in gens:
                target = here if g.m == n else p.phi(delta, g.m)
                if st.h_project(f, g) not in target:
                    return f, g
    return None


@dataclass(frozen=True)
class AmalgamationFailure:
    m: int
    n: int
    phi: int
    psi: int

    def describe(self, store: FormulaStore) -> str:
        return (
            f"m={self.m} n={self.n}: φ={label(store, self.phi)} (width {self.m + 1}) and "
            f"ψ={label(store, self.psi)} (width {self.n}) agree on {', '.join(f'x{i}' for i in range(self.m)) or 'the empty tuple'} "
            f"but no width-{self.n + 1} formula extends ψ and contains φ"
        )


@dataclass
class AmalgamationReport:
    ok: bool
    counterexample: Optional[AmalgamationFailure]
    checked: int
    skipped: int
    vacuous: int

    def __bool__(self):
        return self.ok


def is_amalgamative(p: ScottProcess, delta: Optional[Level] = None) -> AmalgamationReport:
    """Amalgamation property of Φ_δ, checked for every width whose successor width is known.

    For a finite structure, widths beyond its size are empty; a pair whose
    joint extension would need such a width must be amalgamated by a point
    already present in ψ.
    """
    delta = p.last if delta is None else delta
    bad = h_closure_violation(p, delta)
    if bad is not None:
        raise ValueError(
            f"level {delta} is not H-closed ({label(p.store, bad[0])} under {bad[1]}); amalgamation is undefined"
        )
    st = p.store
    checked = skipped = vacuous = 0
    for n in p.widths(delta):
        if n == 0:
            continue
        if not p.known(delta, n + 1):
            skipped += 1
            continue
        # Past the size of a finite structure there is no new point: the
        # extension must be realized inside ψ itself.
        inside = p.truncation_empty(delta, n + 1)
        for m in range(n):
            inc_m = Injection.inclusion(m, n)
            for psi in _sorted(p, p.phi(delta, n)):
                checked += 1
                base = st.h_project(psi, inc_m)
                need = p.fiber(delta, base)
                have = set()
                if inside:
                    for y in range(m, n):
                        have.add(st.h_project(psi, Injection(tuple(range(m)) + (y,), n)))
                for theta in p.fiber(delta, psi):
                    for y in range(m, n + 1):
                        have.add(st.h_project(theta, Injection(tuple(range(m)) + (y,), n + 1)))
                lacking = need - have
                if lacking:
                    phi = _sorted(p, lacking)[0]
                    return AmalgamationReport(False, AmalgamationFailure(m, n, phi, psi), checked, skipped, vacuous)
    return AmalgamationReport(True, None, checked, skipped, vacuous)


class CompletionError(ValueError):
    def __init__(self, message: str, report: ValidationReport, counterexample: Optional[AmalgamationFailure]):
        super().__init__(message)
        self.report = report
        self.counterexample = counterexample


def extend_by_completion(p: ScottProcess) -> ScottProcess:
    """Append the maximal completion of the last level; raise if the result is not a Scott process."""
    delta = p.last
    q = p.with_level(delta + 1, maximal_completion(p, delta))
    report = validate_process(q)
    if report.ok:
        return q
    try:
        amal = is_amalgamative(p, delta).counterexample
    except ValueError:
        amal = None
    raise CompletionError(
        f"completion of level {delta} fails condition(s) {', '.join(report.failed())}", report, amal
    )


def amalgamate(
    p: ScottProcess,
    psi: int,
    theta: int,
    j: Injection,
    k: Injection,
    delta: Optional[Level] = None,
) -> tuple[int, Injection, Injection]:
    """Find ρ, j′, k′ with H(ρ,j′)=ψ, H(ρ,k′)=θ, j′∘j = k′∘k and ranges covering X_q.

    The search takes q from max(n, p) upward, fixes j′ = i_n (any solution
    can be renamed into that form since the level is H-closed), walks the
    candidates ρ in canonical order and chooses the new part of k′
    lexicographically.
    """
    delta = p.last if delta is None else delta
    st = p.store
    n, pw = st.width(psi), st.width(theta)
    if psi not in p.phi(delta, n) or theta not in p.phi(delta, pw):
        raise ValueError("ψ and θ must both belong to the level")
    if j.n != n or k.n != pw or j.m != k.m:
        raise ValueError("injection widths do not match the formulas")
    if st.h_project(psi, j) != st.h_project(theta, k):
        raise ValueError("H(ψ, j) and H(θ, k) differ, nothing to amalgamate")
    m = j.m
    fixed = {k.images[i]: j.images[i] for i in range(m)}
    free_src = [x for x in range(pw) if x not in fixed]
    for q in range(max(n, pw), n + pw - m + 1):
        if not p.known(delta, q):
            raise RuntimeError(f"amalgamation needs width {q}, which is outside the computed budget")
        inc = Injection.inclusion(n, q)
        avail = [y for y in range(q) if y not in fixed.values()]
        must = set(range(n, q))
        for rho in _sorted(p, p.phi(delta, q)):
            if st.h_project(rho, inc) != psi:
                continue
            for imgs in itertools.permutations(avail, len(free_src)):
                if not must <= set(imgs):
                    continue
                full = dict(fixed)
                full.update(zip(free_src, imgs))
                kp = Injection(tuple(full[x] for x in range(pw)), q)
                if st.h_project(rho, kp) == theta:
                    return rho, inc, kp
    raise RuntimeError(
        "amalgamation search exhausted; the level does not amalgamate "
        "or the required width exceeds the size of the structure"
    )


# -- F operator ------------------------------------------------------------------


def f_set(p: ScottProcess, phi: int, alpha: Level, k: int) -> frozenset:
    """Members of F(φ) in Φ^{m+k}_α, computed by E-chains and by the fiber characterization."""
    st = p.store
    beta = st.level(phi)
    m = st.width(phi)
    if phi not in p.phi(beta, m):
        raise ValueError("φ must belong to the process")
    if not alpha + k <= beta:
        raise ValueError(f"need α + k ≤ β, got α={alpha}, k={k}, β={beta}")
    if alpha not in p.levels or not p.known(alpha, m + k) or not p.known(beta, m + k):
        raise KeyError("width m + k is outside the computed budget")
    layer = {st.v_project(phi, alpha + k)}
    for i in range(k - 1, -1, -1):
        nxt = set()
        for s in layer:
            nxt |= st.e_set(s)
        layer = nxt
    chains = frozenset(layer) & p.phi(alpha, m + k)
    inc = Injection.inclusion(m, m + k)
    lifts = frozenset(
        st.v_project(t, alpha) for t in p.phi(beta, m + k) if st.h_project(t, inc) == phi
    )
    if chains != lifts:
        raise InvariantError(
            f"F(φ) computed by E-chains ({len(chains)}) and by lifts ({len(lifts)}) disagree"
        )
    return chains


# -- rank -----------------------------------------------------------------------


def injective_beyond(p: ScottProcess, phi: int) -> bool:
    return injectivity_witness(p, phi) is None


def injectivity_witness(p: ScottProcess, phi: int) -> Optional[tuple[int, int]]:
    """A ψ above φ at level β with a non-singleton V-preimage at β+1, with its preimage count."""
    st = p.store
    beta = st.level(phi)
    n = st.width(phi)
    nxt = beta + 1
    if nxt not in p.levels:
        raise KeyError(f"level {nxt} is needed to test injectivity beyond a level-{beta} formula")
    for m in p.widths(nxt):
        if m < n or not p.known(beta, m):
            continue
        counts: dict[int, int] = {}
        for c in p.phi(nxt, m):
            key = st.v_project(c, beta)
            counts[key] = counts.get(key, 0) + 1
        injs = list(Injection.all(n, m))
        for psi in _sorted(p, p.phi(beta, m)):
            if counts.get(psi, 0) == 1:
                continue
            if any(st.h_project(psi, j) == phi for j in injs):
                return psi, counts.get(psi, 0)
    return None


def injective_at(p: ScottProcess, alpha: Level) -> bool:
    """V_{α,α+1} is injective on every explicit width of level α+1."""
    st = p.store
    nxt = alpha + 1
    for n in p.widths(nxt):
        ids = p.phi(nxt, n)
        if len({st.v_project(f, alpha) for f in ids}) != len(ids):
            return False
    return True


@dataclass
class RankReport:
    rank: Optional[Level]
    stabilization_level: Optional[Level]
    exact: bool
    certified_width: Optional[int]
    certificate: list[str]
    persistent: bool = True
    prerank_bound: Optional[Level] = None
    prerank_witness: Optional[tuple[Level, int, int]] = None

    def headline(self) -> str:
        if self.rank is None:
            return "rank: not reached"
        if self.exact:
            return f"rank: {self.rank} (exact)"
        return f"rank: {self.rank} (exact within width {self.certified_width})"


def process_rank(p: ScottProcess, width: int = 1, prerank: bool = True) -> RankReport:
    """Least level β such that V_{β,β+1} is injective, with its certificate."""
    st = p.store
    levels = p.level_indices
    rank = None
    for a in levels:
        if a + 1 not in p.levels:
            continue
        if p.truncated is None and p.max_width(a + 1) < width:
            break
        if injective_at(p, a):
            rank = a
            break
    if rank is None:
        return RankReport(None, None, False, None, ["no injective step within the computed levels"])
    nxt = rank + 1
    cert = []
    for n in p.widths(nxt):
        ids = p.phi(nxt, n)
        img = {st.v_project(f, rank) for f in ids}
        cert.append(f"width {n}: |Φ^{n}_{nxt}| = {len(ids)} = |V[Φ^{n}_{nxt}]|, |Φ^{n}_{rank}| = {len(p.phi(rank, n))}")
    persistent = all(injective_at(p, b) for b in levels if b > rank and b + 1 in p.levels)
    exact = p.truncated is not None
    W = p.truncated if exact else p.max_width(nxt)
    rep = RankReport(rank, rank, exact, W, cert, persistent)
    if prerank:
        rep.prerank_bound, rep.prerank_witness = prerank_bound(p, limit=rank)
    return rep


def prerank_bound(p: ScottProcess, limit: Optional[Level] = None):
    """Least β + n over formulas φ ∈ Φⁿ_β the process is injective beyond."""
    best = limit
    witness = None
    if limit is not None:
        witness = (limit, 0, unique_sentence(p, limit))
    for b in p.level_indices:
        if not isinstance(b, int) or b + 1 not in p.levels:
            continue
        for n in p.widths(b + 1):
            if best is not None and b + n >= best:
                break
            for f in _sorted(p, p.phi(b, n)):
                if injective_beyond(p, f):
                    best, witness = b + n, (b, n, f)
                    break
    return best, witness


# -- limit levels ------------------------------------------------------------------


def _stable_level(p: ScottProcess, width: int) -> Level:
    for a in p.level_indices:
        if not isinstance(a, int) or a + 1 not in p.levels:
            continue
        if p.truncated is None and p.max_width(a + 1) < width:
            break
        if injective_at(p, a):
            return a
    raise NotStabilized("no level with injective V-projection to the next level; refine further first")


def isolated_paths(p: ScottProcess, width: int = 1) -> dict[int, frozenset]:
    """The limit level made of the isolated paths through a stabilized process.

    At a stable level λ every formula of Φ_{λ+1} has a unique continuation
    through all later levels, so each one yields exactly one isolated path,
    recorded by its V-chain down to level 0.
    """
    st = p.store
    lam = _stable_level(p, width)
    top = lam + 1
    out = {}
    for n in p.widths(top):
        out[n] = frozenset(
            st.intern_limit([st.v_project(f, a) for a in range(top + 1)]) for f in p.phi(top, n)
        )
    return out


def limit_process(p: ScottProcess, width: int = 1) -> ScottProcess:
    """Levels 0..λ+1 of a stabilized process followed by its isolated paths at ω."""
    lam = _stable_level(p, width)
    base = p.prefix(lam + 1)
    return base.with_level(OMEGA, isolated_paths(p, width))


def _limit_base(p: ScottProcess, width: int) -> ScottProcess:
    if OMEGA in p.levels:
        return p.prefix(OMEGA)
    return limit_process(p, width)


def minimal_set(p: ScottProcess, rho: int, width: int = 1) -> dict[int, frozenset]:
    """ms(ρ) at the reliable widths: projections of all extensions of ρ among the isolated paths."""
    q = _limit_base(p, width)
    st = q.store
    n = st.width(rho)
    level = q.levels[OMEGA]
    if rho not in level.get(n, frozenset()):
        raise ValueError("ρ is not an isolated path of the process")
    top = max(level)
    reach = top if q.truncated is not None else top - n
    out: dict[int, set] = {w: set() for w in range(reach + 1)}
    for mw in range(n, top + 1):
        inc = Injection.inclusion(n, mw)
        for t in level[mw]:
            if st.h_project(t, inc) != rho:
                continue
            for w in range(min(mw, reach) + 1):
                for f in Injection.all(w, mw):
                    out[w].add(st.h_project(t, f))
    return {w: frozenset(s) for w, s in out.items()}


def extend_at_limit(p: ScottProcess, rho: Optional[int] = None, width: int = 1) -> ScottProcess:
    """Append Φ_ω = ms(ρ); ρ defaults to the empty-tuple path."""
    q = _limit_base(p, width)
    if rho is None:
        rho = next(iter(q.levels[OMEGA][0]))
    base = q.prefix(OMEGA, inclusive=False)
    return base.with_level(OMEGA, minimal_set(q, rho, width))
