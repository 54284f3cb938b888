"""Vocabularies, multiplicity structures and atomic diagrams.

A :class:`MultiplicityStructure` is a finite template whose elements are
grouped into twin-classes; each class carries a multiplicity (a positive
integer or ω).  It denotes the structure obtained by replacing every class
with that many interchangeable copies.  Plain finite structures are the
special case where every class is a singleton of multiplicity 1.
"""
from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence

UNIT = "@unit"
OMEGA_MULT = math.inf

_NAME_RE = re.compile(r"^[A-Za-z_@][A-Za-z0-9_@'.\-]*$")

Atom = tuple[str, tuple[int, ...]]
AbstractTuple = tuple[str, ...]


class StructureError(ValueError):
    """Raised for malformed or inconsistent structure descriptions."""

    def __init__(self, message: str, lineno: Optional[int] = None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True)
class Vocabulary:
    """A finite relational signature; equality is implicit.

    Symbols are kept sorted by ``(arity, name)``, which is also the order
    literals are rendered in.
    """

    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [n for n, _ in self.symbols]
        if len(set(names)) != len(names):
            raise StructureError("duplicate relation symbol")
        for name, arity in self.symbols:
            if name == "=":
                raise StructureError("equality is built in and cannot be declared")
            if not _NAME_RE.match(name):
                raise StructureError(f"bad symbol name {name!r}")
            if arity < 0:
                raise StructureError(f"negative arity for {name}")
        object.__setattr__(
            self, "symbols", tuple(sorted(self.symbols, key=lambda s: (s[1], s[0])))
        )

    @classmethod
    def of(cls, symbols: Iterable[tuple[str, int]], inject_unit: bool = True) -> "Vocabulary":
        symbols = list(symbols)
        if inject_unit and not any(a == 0 for _, a in symbols):
            symbols.append((UNIT, 0))
        return cls(tuple(symbols))

    def arity(self, name: str) -> int:
        for n, a in self.symbols:
            if n == name:
                return a
        raise KeyError(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.symbols)

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self.symbols), default=0)

    def instances(self, width: int) -> tuple[Atom, ...]:
        """All atomic instances over ``x0..x(width-1)``, equality excluded."""
        return _instances(self, width)

    def count_instances(self, width: int) -> int:
        return sum(width**a for _, a in self.symbols)


def _arg_key(args: tuple[int, ...]):
    return (-len(set(args)), args)


_INSTANCE_CACHE: dict = {}


def _instances(vocab: Vocabulary, width: int) -> tuple[Atom, ...]:
    key = (vocab, width)
    hit = _INSTANCE_CACHE.get(key)
    if hit is None:
        out = []
        for name, arity in vocab.symbols:
            tuples = sorted(itertools.product(range(width), repeat=arity), key=_arg_key)
            out.extend((name, t) for t in tuples)
        hit = _INSTANCE_CACHE[key] = tuple(out)
    return hit


@dataclass(frozen=True)
class AtomicDiagram:
    """A complete assignment of signs to the atomic instances over X_width.

    Only the positive instances are stored; every other instance is
    negative.  Distinctness literals ``xi ≠ xj`` are implicit.
    """

    vocab: Vocabulary
    width: int
    positive: frozenset

    def __post_init__(self):
        for name, args in self.positive:
            if len(args) != self.vocab.arity(name):
                raise StructureError(f"arity mismatch in literal {name}{args}")
            if any(not 0 <= a < self.width for a in args):
                raise StructureError(f"variable out of range in {name}{args}")

    def sign(self, name: str, args: tuple[int, ...]) -> bool:
        return (name, tuple(args)) in self.positive

    def literals(self) -> Iterator[tuple[Atom, bool]]:
        for inst in self.vocab.instances(self.width):
            yield inst, inst in self.positive


def count_atomic_types(vocab: Vocabulary, width: int, max_bits: int = 1 << 16) -> int:
    """Number of level-0 formulas of the given width: 2 ** (#atomic instances)."""
    if width < 0:
        raise ValueError("negative width")
    bits = vocab.count_instances(width)
    if bits > max_bits:
        raise OverflowError(f"2**{bits} atomic types at width {width} exceeds the reporting limit")
    return 2**bits


def multiplicity_text(m) -> str:
    return "omega" if m == OMEGA_MULT else str(int(m))


@dataclass(frozen=True)
class Violation:
    cls: str
    swap: tuple[str, str]
    relation: str
    fact: tuple[str, ...]

    def __str__(self):
        a, b = self.swap
        return (
            f"transposition ({a} {b}) in class {self.cls} maps fact "
            f"{self.relation}({', '.join(self.fact)}) outside {self.relation}"
        )


@dataclass(frozen=True, eq=False)
class MultiplicityStructure:
    vocab: Vocabulary
    elements: tuple[str, ...]
    element_class: Mapping[str, str]
    multiplicity: Mapping[str, float]
    relations: Mapping[str, frozenset]
    _key: tuple = field(init=False, repr=False)

    def __post_init__(self):
        rels = {name: frozenset(self.relations.get(name, frozenset())) for name in self.vocab.names}
        for name in self.relations:
            if name not in rels:
                raise StructureError(f"fact for undeclared symbol {name}")
        object.__setattr__(self, "relations", rels)
        object.__setattr__(self, "element_class", dict(self.element_class))
        object.__setattr__(self, "multiplicity", dict(self.multiplicity))
        object.__setattr__(self, "elements", tuple(sorted(self.elements)))
        key = (
            self.vocab,
            self.elements,
            tuple(sorted(self.element_class.items())),
            tuple(sorted(self.multiplicity.items())),
            tuple(sorted((n, tuple(sorted(v))) for n, v in rels.items())),
        )
        object.__setattr__(self, "_key", key)

    def __eq__(self, other):
        return isinstance(other, MultiplicityStructure) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(sorted(self.multiplicity))

    def representatives(self, cls: str) -> tuple[str, ...]:
        return tuple(e for e in self.elements if self.element_class[e] == cls)

    @property
    def is_finite(self) -> bool:
        return all(m != OMEGA_MULT for m in self.multiplicity.values())

    @property
    def size(self) -> float:
        return sum(self.multiplicity.values())

    def holds(self, name: str, args: Sequence[str]) -> bool:
        return tuple(args) in self.relations[name]

    def required_representatives(self, cls: str) -> int:
        m = self.multiplicity[cls]
        if m < 2:
            return 1
        return int(min(m, max(self.vocab.max_arity, 2)))

    # -- blow-up semantics -------------------------------------------------

    def evaluate(self, name: str, args: Sequence[int], tup: AbstractTuple) -> bool:
        """Truth of ``name(x_args)`` for any concrete tuple realizing ``tup``.

        Distinct positions of the same class are sent to distinct template
        representatives in order of first appearance; twin-uniformity makes
        the result independent of that choice.
        """
        slot: dict[int, str] = {}
        used: Counter = Counter()
        elems = []
        for p in args:
            if p not in slot:
                c = tup[p]
                reps = self.representatives(c)
                slot[p] = reps[used[c]]
                used[c] += 1
            elems.append(slot[p])
        return self.holds(name, elems)


def validate_twin_uniformity(s: MultiplicityStructure) -> list[Violation]:
    """Within-class transpositions that fail to be automorphisms (empty if none)."""
    out: list[Violation] = []
    for c in s.classes:
        reps = s.representatives(c)
        for a, b in itertools.combinations(reps, 2):
            swap = {a: b, b: a}
            for name in s.vocab.names:
                facts = s.relations[name]
                for fact in sorted(facts):
                    image = tuple(swap.get(e, e) for e in fact)
                    if image not in facts:
                        out.append(Violation(c, (a, b), name, fact))
                        break
    return out


def check_structure(s: MultiplicityStructure) -> None:
    for e in s.elements:
        if s.element_class.get(e) not in s.multiplicity:
            raise StructureError(f"element {e} has unknown class {s.element_class.get(e)}")
    for c, m in s.multiplicity.items():
        if not (m == OMEGA_MULT or (isinstance(m, int) and m >= 1)):
            raise StructureError(f"class {c}: multiplicity must be >= 1 or omega")
        have = len(s.representatives(c))
        need = s.required_representatives(c)
        if have != need:
            raise StructureError(
                f"class {c} with multiplicity {multiplicity_text(m)} needs exactly {need} template elements, has {have}"
            )
    for name, facts in s.relations.items():
        ar = s.vocab.arity(name)
        for fact in facts:
            if len(fact) != ar:
                raise StructureError(f"arity mismatch: {name} has arity {ar}, fact {fact}")
            for e in fact:
                if e not in s.element_class:
                    raise StructureError(f"fact {name}{fact} uses unknown element {e}")
    bad = validate_twin_uniformity(s)
    if bad:
        raise StructureError(f"twin-uniformity violated: {bad[0]}")


def make_structure(
    symbols: Iterable[tuple[str, int]],
    classes: Mapping[str, float],
    elements: Mapping[str, str],
    facts: Iterable[tuple[str, Sequence[str]]],
) -> MultiplicityStructure:
    vocab = Vocabulary.of(symbols)
    rels: dict[str, set] = {n: set() for n in vocab.names}
    for name, args in facts:
        if name not in rels:
            raise StructureError(f"fact for undeclared symbol {name}")
        rels[name].add(tuple(args))
    if UNIT in rels and not any(n == UNIT for n, _ in symbols):
        rels[UNIT].add(())
    s = MultiplicityStructure(
        vocab=vocab,
        elements=tuple(elements),
        element_class=dict(elements),
        multiplicity=dict(classes),
        relations={n: frozenset(v) for n, v in rels.items()},
    )
    check_structure(s)
    return s


def finite_structure(
    symbols: Iterable[tuple[str, int]],
    domain: Sequence[str],
    facts: Iterable[tuple[str, Sequence[str]]],
) -> MultiplicityStructure:
    """A plain finite structure: every element is its own class."""
    return make_structure(symbols, {e: 1 for e in domain}, {e: e for e in domain}, facts)


# -- file format --------------------------------------------------------------


def load_structure(text: str) -> MultiplicityStructure:
    symbols: list[tuple[str, int]] = []
    classes: dict[str, float] = {}
    elements: dict[str, str] = {}
    raw_facts: list[tuple[int, str, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        kind = words[0]
        if kind == "vocab":
            if len(words) != 2 or "/" not in words[1]:
                raise StructureError("expected 'vocab NAME/ARITY'", lineno)
            name, _, ar = words[1].rpartition("/")
            if not ar.isdigit():
                raise StructureError(f"bad arity {ar!r}", lineno)
            if name == "=":
                raise StructureError("equality is built in and cannot be declared", lineno)
            if any(n == name for n, _ in symbols):
                raise StructureError(f"duplicate symbol {name}", lineno)
            symbols.append((name, int(ar)))
        elif kind == "class":
            if len(words) != 4 or words[2] != "mult":
                raise StructureError("expected 'class ID mult (INT|omega)'", lineno)
            cid, m = words[1], words[3]
            if cid in classes:
                raise StructureError(f"duplicate class {cid}", lineno)
            if m in ("omega", "ω"):
                classes[cid] = OMEGA_MULT
            else:
                try:
                    mv = int(m)
                except ValueError:
                    raise StructureError(f"bad multiplicity {m!r}", lineno) from None
                if mv < 1:
                    raise StructureError("multiplicity must be >= 1", lineno)
                classes[cid] = mv
        elif kind == "elem":
            if len(words) != 4 or words[2] != "class":
                raise StructureError("expected 'elem ID class CLASSID'", lineno)
            if words[1] in elements:
                raise StructureError(f"duplicate element {words[1]}", lineno)
            elements[words[1]] = words[3]
        elif kind == "fact":
            if len(words) < 2:
                raise StructureError("expected 'fact NAME ELEM...'", lineno)
            raw_facts.append((lineno, words[1], words[2:]))
        else:
            raise StructureError(f"unknown directive {kind!r}", lineno)
    arity = dict(symbols)
    for lineno, name, args in raw_facts:
        if name not in arity:
            if name == UNIT and not any(a == 0 for a in arity.values()):
                continue
            raise StructureError(f"fact for undeclared symbol {name}", lineno)
        if len(args) != arity[name]:
            raise StructureError(f"arity mismatch: {name}/{arity[name]} given {len(args)} arguments", lineno)
        for e in args:
            if e not in elements:
                raise StructureError(f"unknown element {e}", lineno)
    for e, c in elements.items():
        if c not in classes:
            raise StructureError(f"element {e} refers to undeclared class {c}")
    return make_structure(symbols, classes, elements, [(n, a) for _, n, a in raw_facts])


def dump_structure(s: MultiplicityStructure) -> str:
    lines = [f"vocab {n}/{a}" for n, a in s.vocab.symbols]
    lines += [f"class {c} mult {multiplicity_text(m)}" for c, m in s.multiplicity.items()]
    lines += [f"elem {e} class {s.element_class[e]}" for e in s.elements]
    for name, facts in s.relations.items():
        for fact in facts:
            lines.append(" ".join(["fact", name, *fact]))
    return "\n".join(sorted(lines)) + "\n"


# -- tuples -------------------------------------------------------------------


def enumerate_tuples(s: MultiplicityStructure, n: int) -> list[AbstractTuple]:
    """All class sequences of length ``n`` respecting the multiplicities."""
    if n < 0:
        raise ValueError("negative width")
    classes = s.classes
    out: list[AbstractTuple] = []

    def rec(prefix: list[str], used: Counter):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        for c in classes:
            if used[c] < s.multiplicity[c]:
                used[c] += 1
                prefix.append(c)
                rec(prefix, used)
                prefix.pop()
                used[c] -= 1

    rec([], Counter())
    return out


def extensions(s: MultiplicityStructure, t: AbstractTuple) -> list[AbstractTuple]:
    used = Counter(t)
    return [t + (c,) for c in s.classes if used[c] < s.multiplicity[c]]


def is_valid_tuple(s: MultiplicityStructure, t: AbstractTuple) -> bool:
    used = Counter(t)
    return all(c in s.multiplicity and k <= s.multiplicity[c] for c, k in used.items())


def atomic_diagram(s: MultiplicityStructure, t: AbstractTuple) -> AtomicDiagram:
    if not is_valid_tuple(s, t):
        raise StructureError(f"tuple {t} is not realizable in the structure")
    pos = frozenset(
        (name, args) for name, args in s.vocab.instances(len(t)) if s.evaluate(name, args, t)
    )
    return AtomicDiagram(s.vocab, len(t), pos)


# -- concrete expansions ------------------------------------------------------


@dataclass(frozen=True)
class ConcreteStructure:
    """An explicitly listed finite structure (used by the back-and-forth oracle)."""

    vocab: Vocabulary
    domain: tuple[str, ...]
    relations: Mapping[str, frozenset]
    origin: Mapping[str, str] = field(default_factory=dict)

    def holds(self, name: str, args: Sequence[str]) -> bool:
        return tuple(args) in self.relations[name]


def expand(s: MultiplicityStructure, copies: Optional[int] = None) -> ConcreteStructure:
    """Materialize ``s``, keeping at most ``copies`` elements of each ω class.

    Finite classes are always expanded in full.  Without ``copies`` the
    structure must be finite.
    """
    domain: list[str] = []
    origin: dict[str, str] = {}
    for c in s.classes:
        m = s.multiplicity[c]
        if m == OMEGA_MULT:
            if copies is None:
                raise ValueError("ω classes need an explicit number of copies")
            k = copies
        else:
            k = int(m)
        names = [c] if (k == 1 and m == 1) else [f"{c}#{i}" for i in range(k)]
        for nm in names:
            domain.append(nm)
            origin[nm] = c
    rels: dict[str, set] = {}
    for name, arity in s.vocab.symbols:
        facts = set()
        for args in itertools.product(domain, repeat=arity):
            order: list[str] = []
            for a in args:
                if a not in order:
                    order.append(a)
            t = tuple(origin[a] for a in order)
            idx = tuple(order.index(a) for a in args)
            if s.evaluate(name, idx, t):
                facts.add(args)
        rels[name] = frozenset(facts)
    return ConcreteStructure(s.vocab, tuple(domain), rels, origin)


def concrete_to_structure(c: ConcreteStructure) -> MultiplicityStructure:
    facts = [(n, a) for n, fs in c.relations.items() for a in fs]
    return make_structure(c.vocab.symbols, {e: 1 for e in c.domain}, {e: e for e in c.domain}, facts)
