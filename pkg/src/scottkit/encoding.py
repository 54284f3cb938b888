"""Session-independent text encoding of formulas, levels and processes.

Layout (UTF-8, one record per line)::

    scottkit-dump 1
    vocab NAME/ARITY ...
    truncated N|none
    budget B|none
    table LEVEL WIDTH COUNT
    A atom atom ...          level-0 rows, sorted by their atom lists
    S p | c c ...            successor rows: index of the V-parent in the
                             (LEVEL-1, WIDTH) table, indices of E-children in
                             the (LEVEL-1, WIDTH+1) table; sorted
    L r0 r1 ...              limit rows: entry k indexes the (k, WIDTH) table
    members LEVEL WIDTH : idx ...
    end

Tables cover every node reachable from the members and are emitted in
increasing (level, width) order.  Row order only depends on the structure
of the nodes, so equal processes produce byte-identical dumps.
"""
from __future__ import annotations

from typing import Iterable, Optional

from .formulas import Atomic, FormulaStore, LimitPath, Successor, atom_text
from .levels import Level, format_level, parse_level
from .process import ScottProcess
from .structures import Vocabulary

MAGIC = "scottkit-dump 1"


class DumpError(ValueError):
    pass


def _closure(store: FormulaStore, roots: Iterable[int]) -> dict[tuple[Level, int], set[int]]:
    seen: set[int] = set()
    stack = list(roots)
    tables: dict[tuple[Level, int], set[int]] = {}
    while stack:
        f = stack.pop()
        if f in seen:
            continue
        seen.add(f)
        nd = store.node(f)
        tables.setdefault((nd.level, nd.width), set()).add(f)
        if isinstance(nd, Successor):
            stack.append(nd.parent)
            stack.extend(nd.children)
        elif isinstance(nd, LimitPath):
            stack.extend(nd.record)
    return tables


def _encode(
    store: FormulaStore,
    vocab: Vocabulary,
    members: dict[Level, dict[int, frozenset]],
    truncated: Optional[int],
    budget: Optional[int],
) -> str:
    roots = [f for ws in members.values() for ids in ws.values() for f in ids]
    tables = _closure(store, roots)
    index: dict[int, int] = {}
    lines = [
        MAGIC,
        "vocab " + " ".join(f"{n}/{a}" for n, a in vocab.symbols),
        f"truncated {'none' if truncated is None else truncated}",
        f"budget {'none' if budget is None else budget}",
    ]
    for key in sorted(tables):
        level, width = key
        rows = []
        for f in tables[key]:
            nd = store.node(f)
            if isinstance(nd, Atomic):
                atoms = sorted(atom_text(a) for a in nd.positive)
                rows.append(((0, tuple(atoms)), f, " ".join(["A", *atoms])))
            elif isinstance(nd, Successor):
                kids = tuple(sorted(index[c] for c in nd.children))
                sk = (1, (index[nd.parent], kids))
                rows.append((sk, f, f"S {index[nd.parent]} | " + " ".join(map(str, kids))))
            else:
                rec = tuple(index[r] for r in nd.record)
                rows.append(((2, rec), f, "L " + " ".join(map(str, rec))))
        rows.sort(key=lambda r: r[0])
        lines.append(f"table {format_level(level)} {width} {len(rows)}")
        for i, (_, f, text) in enumerate(rows):
            index[f] = i
            lines.append(text.rstrip())
    for level in sorted(members):
        for width in sorted(members[level]):
            idx = sorted(index[f] for f in members[level][width])
            lines.append(f"members {format_level(level)} {width} : " + " ".join(map(str, idx)))
    lines.append("end")
    return "\n".join(line.rstrip() for line in lines) + "\n"


def encode_process(p: ScottProcess) -> str:
    return _encode(p.store, p.vocab, p.levels, p.truncated, p.budget)


def encode_level(p: ScottProcess, alpha: Level) -> str:
    return _encode(p.store, p.vocab, {alpha: p.levels[alpha]}, p.truncated, p.budget)


def encode_formula(store: FormulaStore, fid: int) -> str:
    nd = store.node(fid)
    return _encode(store, store.vocab(fid), {nd.level: {nd.width: frozenset([fid])}}, None, None)


def _parse_atom(text: str, vocab: Vocabulary) -> tuple[str, tuple[int, ...]]:
    if "(" not in text:
        return text, ()
    name, _, rest = text.partition("(")
    if not rest.endswith(")"):
        raise DumpError(f"bad atom {text!r}")
    args = tuple(int(a.strip().lstrip("x")) for a in rest[:-1].split(","))
    if vocab.arity(name) != len(args):
        raise DumpError(f"arity mismatch in atom {text!r}")
    return name, args


def decode_process(text: str, store: FormulaStore) -> ScottProcess:
    """Re-intern every node of a dump into ``store``."""
    lines = [ln.rstrip("\n") for ln in text.splitlines()]
    if not lines or lines[0].strip() != MAGIC:
        raise DumpError("not a scottkit dump (missing header)")
    pos = 1

    def expect(prefix: str) -> str:
        nonlocal pos
        if pos >= len(lines) or not lines[pos].startswith(prefix):
            raise DumpError(f"line {pos + 1}: expected {prefix!r}")
        out = lines[pos][len(prefix):].strip()
        pos += 1
        return out

    syms = []
    for tok in expect("vocab").split():
        name, _, ar = tok.rpartition("/")
        syms.append((name, int(ar)))
    vocab = Vocabulary(tuple(syms))
    tr = expect("truncated")
    truncated = None if tr == "none" else int(tr)
    bd = expect("budget")
    budget = None if bd == "none" else int(bd)
    tables: dict[tuple[Level, int], list[int]] = {}
    members: dict[Level, dict[int, frozenset]] = {}
    try:
        while pos < len(lines):
            line = lines[pos]
            pos += 1
            if line == "end":
                break
            words = line.split()
            if words[0] == "table":
                level, width, count = parse_level(words[1]), int(words[2]), int(words[3])
                ids = []
                for _ in range(count):
                    row = lines[pos]
                    pos += 1
                    ids.append(_decode_row(row, level, width, vocab, store, tables))
                tables[(level, width)] = ids
            elif words[0] == "members":
                level, width = parse_level(words[1]), int(words[2])
                tab = tables.get((level, width), [])
                members.setdefault(level, {})[width] = frozenset(tab[int(i)] for i in words[4:])
            else:
                raise DumpError(f"line {pos}: unexpected record {words[0]!r}")
        else:
            raise DumpError("dump is missing its 'end' line")
    except (IndexError, KeyError) as exc:
        raise DumpError(f"line {pos}: dangling reference ({exc})") from None
    return ScottProcess(store=store, vocab=vocab, levels=members, truncated=truncated, budget=budget)


def _decode_row(row, level, width, vocab, store, tables) -> int:
    kind, _, rest = row.partition(" ")
    if kind == "A":
        atoms = [_parse_atom(a, vocab) for a in rest.split()]
        return store.intern_atoms(vocab, width, atoms)
    if kind == "S":
        left, _, right = rest.partition("|")
        parent = tables[(level - 1, width)][int(left)]
        kids_tab = tables.get((level - 1, width + 1), [])
        return store.intern_successor(parent, [kids_tab[int(c)] for c in right.split()])
    if kind == "L":
        rec = [tables[(k, width)][int(r)] for k, r in enumerate(rest.split())]
        return store.intern_limit(rec)
    raise DumpError(f"bad row {row!r}")


def is_dump(text: str) -> bool:
    return text.lstrip().startswith("scottkit-dump")
