"""Interned formula DAGs for the sets Ψⁿ_α with vertical and horizontal projections.

Every formula is a node in a :class:`FormulaStore` and is referred to by an
integer id.  Structurally equal nodes always receive the same id, so
formula equality is id equality.  Three node shapes exist:

* :class:`Atomic` -- a complete atomic diagram over ``x0..x(n-1)`` (level 0);
* :class:`Successor` -- a V-parent at level α plus a set of E-children of
  width ``n + 1`` at level α (level α + 1);
* :class:`LimitPath` -- the V-coherent record of a path through the finite
  levels, stored up to some finite level (level ω).
"""
from __future__ import annotations

import hashlib
import itertools
import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Union

from .levels import OMEGA, Level, OmegaPlus, check_level
from .structures import UNIT, AtomicDiagram, Vocabulary, count_atomic_types  # noqa: F401

__all__ = [
    "Atomic",
    "Successor",
    "LimitPath",
    "Injection",
    "FormulaStore",
    "default_store",
    "count_atomic_types",
]


@dataclass(frozen=True)
class Injection:
    """An injective map from X_m into X_n, as the tuple of image indices."""

    images: tuple[int, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if len(set(self.images)) != len(self.images):
            raise ValueError(f"not injective: {self.images}")
        if any(not 0 <= y < self.n for y in self.images):
            raise ValueError(f"image out of range for target width {self.n}: {self.images}")

    @property
    def m(self) -> int:
        return len(self.images)

    @classmethod
    def inclusion(cls, m: int, n: int) -> "Injection":
        """The map i_m, viewed as an injection into X_n."""
        if m > n:
            raise ValueError("inclusion needs m <= n")
        return cls(tuple(range(m)), n)

    @classmethod
    def identity(cls, n: int) -> "Injection":
        return cls(tuple(range(n)), n)

    @classmethod
    def transposition(cls, n: int, a: int, b: int) -> "Injection":
        imgs = list(range(n))
        imgs[a], imgs[b] = imgs[b], imgs[a]
        return cls(tuple(imgs), n)

    @classmethod
    def all(cls, m: int, n: int) -> Iterator["Injection"]:
        """All injections X_m -> X_n in lexicographic order of images."""
        for imgs in itertools.permutations(range(n), m):
            yield cls(imgs, n)

    def __call__(self, i: int) -> int:
        return self.images[i]

    @property
    def range(self) -> frozenset:
        return frozenset(self.images)

    def compose(self, other: "Injection") -> "Injection":
        """``self ∘ other`` (apply ``other`` first)."""
        if other.n != self.m:
            raise ValueError(f"cannot compose: {other} lands in X_{other.n}, {self} starts at X_{self.m}")
        return Injection(tuple(self.images[i] for i in other.images), self.n)

    def extend(self, y: int) -> "Injection":
        """``self ∪ {(x_m, y)}`` as an injection X_{m+1} -> X_{n+1}."""
        return Injection(self.images + (y,), self.n + 1)

    def inverse_map(self) -> dict[int, int]:
        return {y: i for i, y in enumerate(self.images)}

    def __str__(self):
        inner = ", ".join(f"x{i}↦x{y}" for i, y in enumerate(self.images))
        return "{" + inner + "}" + f"→X{self.n}"


@dataclass(frozen=True)
class Atomic:
    vocab: Vocabulary
    width: int
    positive: frozenset

    @property
    def level(self) -> Level:
        return 0


@dataclass(frozen=True)
class Successor:
    parent: int
    children: frozenset
    width: int
    level: Level


@dataclass(frozen=True)
class LimitPath:
    record: tuple[int, ...]
    width: int

    @property
    def level(self) -> Level:
        return OMEGA


Node = Union[Atomic, Successor, LimitPath]


class FormulaStore:
    """Thread-safe interning table with memoized projections."""

    def __init__(self):
        self._lock = threading.RLock()
        self._index: dict = {}
        self._nodes: list[Node] = []
        self._vocab: list[Vocabulary] = []
        self._vmemo: dict = {}
        self._hmemo: dict = {}
        self._canon: dict[int, bytes] = {}
        self._text: dict[int, str] = {}

    def __len__(self):
        return len(self._nodes)

    def _intern(self, key, make, vocab) -> int:
        hit = self._index.get(key)
        if hit is not None:
            return hit
        with self._lock:
            hit = self._index.get(key)
            if hit is not None:
                return hit
            fid = len(self._nodes)
            self._nodes.append(make())
            self._vocab.append(vocab)
            self._index[key] = fid
            return fid

    # -- construction ----------------------------------------------------

    def intern_level0(self, d: AtomicDiagram) -> int:
        key = ("A", d.vocab, d.width, d.positive)
        return self._intern(key, lambda: Atomic(d.vocab, d.width, d.positive), d.vocab)

    def intern_atoms(self, vocab: Vocabulary, width: int, positive: Iterable) -> int:
        return self.intern_level0(AtomicDiagram(vocab, width, frozenset(positive)))

    def intern_successor(self, parent: int, children: Iterable[int]) -> int:
        children = frozenset(children)
        p = self.node(parent)
        for c in children:
            cn = self.node(c)
            if cn.width != p.width + 1:
                raise ValueError(f"E-child of width {cn.width} under a width-{p.width} parent")
            if cn.level != p.level:
                raise ValueError(f"E-child at level {cn.level} under a level-{p.level} parent")
            if self._vocab[c] != self._vocab[parent]:
                raise ValueError("E-child over a different vocabulary")
        key = ("S", parent, children)
        return self._intern(
            key, lambda: Successor(parent, children, p.width, p.level + 1), self._vocab[parent]
        )

    def intern_limit(self, record: Sequence[int]) -> int:
        record = tuple(record)
        if not record:
            raise ValueError("a path record needs at least its level-0 entry")
        width = self.node(record[0]).width
        for k, fid in enumerate(record):
            nd = self.node(fid)
            if nd.level != k:
                raise ValueError(f"record entry {k} sits at level {nd.level}")
            if nd.width != width:
                raise ValueError("record entries of different widths")
            if k and nd.parent != record[k - 1]:
                raise ValueError(f"record entry {k} does not project onto entry {k - 1}")
        key = ("L", record)
        return self._intern(key, lambda: LimitPath(record, width), self._vocab[record[0]])

    # -- queries ---------------------------------------------------------

    def node(self, fid: int) -> Node:
        try:
            return self._nodes[fid]
        except (IndexError, TypeError):
            raise KeyError(f"unknown formula id {fid!r}") from None

    def width(self, fid: int) -> int:
        return self.node(fid).width

    def level(self, fid: int) -> Level:
        return self.node(fid).level

    def vocab(self, fid: int) -> Vocabulary:
        self.node(fid)
        return self._vocab[fid]

    def e_set(self, fid: int) -> frozenset:
        nd = self.node(fid)
        if not isinstance(nd, Successor):
            raise ValueError(f"E is only defined at successor levels (formula at level {nd.level})")
        return nd.children

    def v_parent(self, fid: int) -> int:
        nd = self.node(fid)
        if not isinstance(nd, Successor):
            raise ValueError(f"no V-parent at level {nd.level}")
        return nd.parent

    def v_project(self, fid: int, alpha: Level) -> int:
        check_level(alpha)
        lvl = self.level(fid)
        if alpha > lvl:
            raise ValueError(f"cannot project a level-{lvl} formula up to level {alpha}")
        key = (fid, alpha)
        hit = self._vmemo.get(key)
        if hit is not None:
            return hit
        cur = fid
        while True:
            nd = self._nodes[cur]
            if nd.level == alpha:
                break
            if isinstance(nd, Successor):
                cur = nd.parent
            elif isinstance(nd, LimitPath):
                if isinstance(alpha, OmegaPlus) or alpha >= len(nd.record):
                    raise ValueError(
                        f"path record only reaches level {len(nd.record) - 1}, asked for {alpha}"
                    )
                cur = nd.record[alpha]
                break
            else:
                raise AssertionError("level-0 node above its level")
        self._vmemo[key] = cur
        return cur

    def h_project(self, fid: int, j: Injection) -> int:
        nd = self.node(fid)
        if j.n != nd.width:
            raise ValueError(f"injection targets X_{j.n} but formula has width {nd.width}")
        if j.m == j.n and j.images == tuple(range(j.n)):
            return fid
        key = (fid, j.images)
        hit = self._hmemo.get(key)
        if hit is not None:
            return hit
        if isinstance(nd, Atomic):
            inv = j.inverse_map()
            pos = frozenset(
                (name, tuple(inv[a] for a in args))
                for name, args in nd.positive
                if all(a in inv for a in args)
            )
            out = self.intern_atoms(nd.vocab, j.m, pos)
        elif isinstance(nd, Successor):
            parent = self.h_project(nd.parent, j)
            free = [y for y in range(j.n + 1) if y not in j.range]
            kids = set()
            for c in nd.children:
                for y in free:
                    kids.add(self.h_project(c, j.extend(y)))
            if not nd.children:
                # Full-width tuple of a finite structure: the dropped entries
                # are still extensions of the sub-tuple, read off the V-parent.
                for y in free:
                    if y < j.n:
                        kids.add(self.h_project(nd.parent, Injection(j.images + (y,), j.n)))
            out = self.intern_successor(parent, kids)
        else:
            out = self.intern_limit(tuple(self.h_project(r, j) for r in nd.record))
        self._hmemo[key] = out
        return out

    # -- canonical keys ---------------------------------------------------

    def canon(self, fid: int) -> bytes:
        """Session-independent structural digest, used as the canonical sort key."""
        hit = self._canon.get(fid)
        if hit is not None:
            return hit
        stack = [fid]
        while stack:
            cur = stack[-1]
            if cur in self._canon:
                stack.pop()
                continue
            nd = self._nodes[cur]
            deps = ()
            if isinstance(nd, Successor):
                deps = (nd.parent, *nd.children)
            elif isinstance(nd, LimitPath):
                deps = nd.record
            missing = [d for d in deps if d not in self._canon]
            if missing:
                stack.extend(missing)
                continue
            h = hashlib.sha256()
            if isinstance(nd, Atomic):
                h.update(b"A|" + vocab_signature(nd.vocab).encode() + b"|%d|" % nd.width)
                h.update(",".join(sorted(atom_text(a) for a in nd.positive)).encode())
            elif isinstance(nd, Successor):
                h.update(b"S|" + self._canon[nd.parent])
                for c in sorted(self._canon[c] for c in nd.children):
                    h.update(c)
            else:
                h.update(b"L|")
                for r in nd.record:
                    h.update(self._canon[r])
            self._canon[cur] = h.digest()
            stack.pop()
        return self._canon[fid]

    def sorted_ids(self, ids: Iterable[int]) -> list[int]:
        return sorted(ids, key=self.canon)

    # -- rendering ---------------------------------------------------------

    def render(self, fid: int) -> str:
        hit = self._text.get(fid)
        if hit is not None:
            return hit
        nd = self.node(fid)
        if isinstance(nd, Atomic):
            out = _render_atomic(nd)
        elif isinstance(nd, Successor):
            out = self._render_successor(nd)
        else:
            parts = [f"({self.render(r)})" for r in nd.record]
            out = "⋀⟨" + " ; ".join(parts) + " ; …⟩"
        self._text[fid] = out
        return out

    def _render_successor(self, nd: Successor) -> str:
        n = nd.width
        xn = f"x{n}"
        kids = sorted(self.render(c) for c in nd.children)
        if not kids:
            ex = "⊤"
            body = "⊥"
        elif len(kids) == 1:
            ex = f"(∃{xn} {kids[0]})"
            body = kids[0]
        else:
            ex = "(" + " ∧ ".join(f"(∃{xn} {k})" for k in kids) + ")"
            body = " ∨ ".join(f"({k})" for k in kids)
        if n == 0:
            fa = f"(∀{xn} {body})"
        elif n == 1:
            fa = f"(∀{xn} {xn}≠x0 → {body})"
        else:
            olds = ",".join(f"x{i}" for i in range(n))
            fa = f"(∀{xn} {xn}∉{{{olds}}} → {body})"
        return f"{self.render(nd.parent)} ∧ {ex} ∧ {fa}"


def vocab_signature(v: Vocabulary) -> str:
    return ",".join(f"{n}/{a}" for n, a in v.symbols)


def atom_text(atom) -> str:
    name, args = atom
    if not args:
        return name
    return f"{name}({','.join(f'x{a}' for a in args)})"


def _render_atomic(nd: Atomic) -> str:
    lits = []
    for inst in nd.vocab.instances(nd.width):
        txt = atom_text(inst)
        lits.append(txt if inst in nd.positive else "¬" + txt)
    for i in range(nd.width):
        for k in range(i + 1, nd.width):
            lits.append(f"x{i}≠x{k}")
    if lits == [UNIT]:
        return UNIT
    return " ∧ ".join(lits)


_DEFAULT: Optional[FormulaStore] = None
_DEFAULT_LOCK = threading.Lock()


def default_store() -> FormulaStore:
    """The process-wide store used when no explicit store is passed."""
    global _DEFAULT
    with _DEFAULT_LOCK:
        if _DEFAULT is None:
            _DEFAULT = FormulaStore()
        return _DEFAULT
