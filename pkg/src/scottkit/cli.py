"""Command-line frontend.

Exit codes: 0 success, 1 semantic failure (FAIL verdict, non-isomorphic,
failed construction), 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from . import builder, encoding, engine, processkit
from .formulas import default_store
from .levels import format_level, parse_level
from .process import ScottProcess
from .structures import (
    MultiplicityStructure,
    StructureError,
    Vocabulary,
    count_atomic_types,
    dump_structure,
    load_structure,
)

DEFAULT_BUDGET = 6
DEFAULT_ELEMENTS = 6
DEFAULT_INDEX_BUDGET = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# -- input handling -------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str) -> MultiplicityStructure | ScottProcess:
    text = _read(path)
    try:
        if encoding.is_dump(text):
            return encoding.decode_process(text, default_store())
        return load_structure(text)
    except (StructureError, encoding.DumpError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _structure(path: str) -> MultiplicityStructure:
    obj = _load(path)
    if isinstance(obj, ScottProcess):
        raise UsageError(f"{path}: this command needs a structure file, not a dump")
    return obj


def _analysis(args) -> ScottProcess:
    obj = _load(args.input)
    if isinstance(obj, ScottProcess):
        return obj
    return engine.analyze(obj, args.budget, workers=args.workers, shuffle_seed=args.schedule_seed)


def _stabilized(args, need_width: int = 0, limit: bool = False) -> ScottProcess:
    p = _stabilized_full(args, need_width, limit)
    cut = getattr(args, "level", None)
    if cut is None:
        return p
    try:
        level = parse_level(cut)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if level not in p.levels:
        raise UsageError(f"level {cut} is not in the process (last level {format_level(p.last)})")
    return p.prefix(level)


def _stabilized_full(args, need_width: int, limit: bool) -> ScottProcess:
    """Stabilized process of the input, with budget raised until ``need_width`` is explicit."""
    obj = _load(args.input)
    if isinstance(obj, ScottProcess):
        return processkit.limit_process(obj, args.width) if limit else obj
    if obj.is_finite:
        p = engine.analyze_to_stabilization(obj, None if not args.fixed_budget else args.budget)
        args.budget = p.budget
        return processkit.limit_process(p, args.width) if limit else p
    B = args.budget
    while True:
        p = engine.analyze_to_stabilization(obj, B, width=args.width)
        if limit:
            p = processkit.limit_process(p, args.width)
        if p.known(p.last, need_width) or args.fixed_budget:
            args.budget = B
            return p
        B += 1


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _header(args, *keys: str) -> str:
    parts = [args.command]
    for k in keys:
        v = getattr(args, k.replace("-", "_"))
        parts.append(f"{k}={v}")
    return "# " + " ".join(parts) + "\n"


# -- commands -------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    p = _analysis(args)
    if args.format == "dump":
        _emit(args, encoding.encode_process(p))
        return 0
    lines = [_header(args, "budget").rstrip("\n"), *p.describe()]
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_rank(args) -> int:
    p = _analysis(args)
    r = processkit.process_rank(p, width=args.width)
    lines = [_header(args, "budget", "width").rstrip("\n"), r.headline()]
    if r.stabilization_level is not None:
        lines.append(f"stabilization level: {format_level(r.stabilization_level)}")
    if r.prerank_bound is not None:
        lines.append(f"prerank bound: {format_level(r.prerank_bound)}")
    lines += [f"certificate: {c}" for c in r.certificate]
    _emit(args, "\n".join(lines) + "\n")
    return 0 if r.rank is not None else 1


def cmd_iso(args) -> int:
    a, b = _structure(args.input), _structure(args.other)
    try:
        same = engine.iso_check(a, b)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, "isomorphic\n" if same else "not isomorphic\n")
    return 0 if same else 1


def cmd_validate(args) -> int:
    p = _analysis(args)
    report = processkit.validate_process(p)
    lines = [_header(args, "budget").rstrip("\n"), *report.lines()]
    _emit(args, "\n".join(lines) + "\n")
    return 0 if report.ok else 1


def _process_out(args, p: ScottProcess, keys=("budget",)) -> None:
    if args.format == "dump":
        _emit(args, encoding.encode_process(p))
    else:
        _emit(args, "\n".join([_header(args, *keys).rstrip("\n"), *p.describe()]) + "\n")


def cmd_complete(args) -> int:
    p = _stabilized(args)
    try:
        q = processkit.extend_by_completion(p)
    except processkit.CompletionError as exc:
        sys.stderr.write(f"completion failed: {exc}\n")
        if exc.counterexample is not None:
            sys.stderr.write(f"counterexample: {exc.counterexample.describe(p.store)}\n")
        return 1
    _process_out(args, q)
    return 0


def cmd_amalgamate(args) -> int:
    p = _stabilized(args)
    r = processkit.is_amalgamative(p)
    lines = [
        _header(args, "budget").rstrip("\n"),
        f"level {format_level(p.last)}: {'amalgamates' if r.ok else 'does not amalgamate'}",
        f"checked={r.checked} vacuous={r.vacuous} skipped={r.skipped}",
    ]
    if r.counterexample is not None:
        lines.append(f"counterexample: {r.counterexample.describe(p.store)}")
    _emit(args, "\n".join(lines) + "\n")
    return 0 if r.ok else 1


def _pick_formula(args, p: ScottProcess, level, width) -> int:
    if args.tuple is not None:
        if not p.tuple_map:
            raise UsageError("--tuple needs a structure input; use --index with dumps")
        key = tuple(x for x in args.tuple.split(",") if x)
        if len(key) != width:
            raise UsageError(f"--tuple has {len(key)} entries but --width is {width}")
        try:
            return p.tuple_map[(level, key)]
        except KeyError:
            raise UsageError(f"no tuple {key} at level {format_level(level)}") from None
    if not p.known(level, width):
        raise UsageError(f"width {width} at level {format_level(level)} is outside the computed budget")
    ids = p.store.sorted_ids(p.phi(level, width))
    if not 0 <= args.index < len(ids):
        raise UsageError(f"--index must be in 0..{len(ids) - 1}")
    return ids[args.index]


def cmd_fset(args) -> int:
    p = _analysis(args)
    level, alpha = parse_level(args.level), parse_level(args.alpha)
    phi = _pick_formula(args, p, level, args.width)
    try:
        out = processkit.f_set(p, phi, alpha, args.k)
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from None
    st = p.store
    lines = [_header(args, "budget", "level", "width", "alpha", "k").rstrip("\n"), f"size: {len(out)}"]
    lines += [f"  {processkit.label(st, f)}  {st.render(f)}" for f in st.sorted_ids(out)]
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_limit_extend(args) -> int:
    p = _stabilized(args)
    try:
        q = processkit.extend_at_limit(p, width=args.width)
    except (processkit.NotStabilized, ValueError) as exc:
        sys.stderr.write(f"limit extension failed: {exc}\n")
        return 1
    _process_out(args, q, ("budget", "width"))
    return 0


def _thread_report(args, t: builder.Thread, model: MultiplicityStructure, extra=()) -> str:
    lines = [_header(args, "budget", "elements").rstrip("\n")]
    lines += [f"# {x}" for x in extra]
    lines += [f"# {x}" for x in t.ledger_lines()]
    return "\n".join(lines) + "\n" + dump_structure(model)


def cmd_build_model(args) -> int:
    p = _stabilized(args, args.elements, limit=args.limit)
    try:
        t = builder.build_thread(p, args.elements)
    except builder.ThreadError as exc:
        sys.stderr.write(f"thread construction failed: {exc}\n")
        return 1
    m = builder.realize_model(t)
    _emit(args, _thread_report(args, t, m, [f"level {format_level(t.level)} width {t.width}"]))
    return 0 if t.width == args.elements or t.notice and "truncation" in t.notice else 1


def _star_from(args, p: ScottProcess) -> dict:
    gamma = p.last
    if not args.within:
        return {n: p.phi(gamma, n) for n in p.widths(gamma)}
    if not p.tuple_map or p.origin is None:
        raise UsageError("--within needs a structure input")
    allowed = set(args.within.split(","))
    s = p.origin
    pool = [e for e in s.elements if e in allowed or s.element_class[e] in allowed]
    if not pool:
        raise UsageError("--within matches no element or class")
    classes = {s.element_class[e] for e in pool}
    star: dict = {}
    for (lvl, tup), fid in p.tuple_map.items():
        if lvl != gamma:
            continue
        if all((x in classes) if p.truncated is None else (x in allowed or s.element_class[x] in allowed) for x in tup):
            star.setdefault(len(tup), set()).add(fid)
    if p.truncated is not None:
        star = {n: v for n, v in star.items() if n <= len(pool)}
    return {n: frozenset(v) for n, v in star.items()}


def cmd_build_pair(args) -> int:
    p = _stabilized(args, args.elements)
    star = _star_from(args, p)
    try:
        mp = builder.build_model_pair(p, star, args.elements)
    except builder.PairError as exc:
        sys.stderr.write(f"rejected: {exc}\n")
        if exc.report is not None:
            sys.stderr.write("\n".join(exc.report.lines()) + "\n")
        return 1
    except builder.ThreadError as exc:
        sys.stderr.write(f"pair construction failed: {exc}\n")
        return 1
    text = _thread_report(args, mp.thread, mp.big, [f"Y = {mp.Y}"] + [f"M {o.line(p.store, 'sub')}" for o in mp.y_obligations])
    text += "# substructure\n" + "".join(f"# {ln}\n" for ln in dump_structure(mp.small).splitlines())
    _emit(args, text)
    return 0


def cmd_weave(args) -> int:
    p = _stabilized(args, args.index_budget, limit=args.limit)
    try:
        w = builder.build_weaving(p, args.index_budget)
    except builder.WeavingError as exc:
        sys.stderr.write(f"rejected: {exc}\n")
        return 1
    r = builder.verify_weaving(w, p)
    lines = [_header(args, "budget", "index-budget").rstrip("\n"), f"level {format_level(w.level)} K={w.K}"]
    lines += r.lines() + w.ledger_lines()
    _emit(args, "\n".join(lines) + "\n")
    return 0 if r.ok else 1


def cmd_render(args) -> int:
    p = _analysis(args)
    level = parse_level(args.level)
    if not p.known(level, args.width):
        raise UsageError(f"width {args.width} at level {format_level(level)} is outside the computed budget")
    st = p.store
    ids = st.sorted_ids(p.phi(level, args.width))
    lines = [_header(args, "budget", "level", "width").rstrip("\n")]
    lines += [f"{i} {processkit.label(st, f)}  {st.render(f)}" for i, f in enumerate(ids)]
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_count_types(args) -> int:
    symbols = []
    for raw in _read(args.vocab).splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] != "vocab" or len(words) != 2 or "/" not in words[1]:
            raise UsageError(f"{args.vocab}: expected 'vocab NAME/ARITY' lines")
        name, _, ar = words[1].rpartition("/")
        if not ar.isdigit():
            raise UsageError(f"{args.vocab}: bad arity {ar!r}")
        symbols.append((name, int(ar)))
    try:
        n = count_atomic_types(Vocabulary.of(symbols), args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, f"{n}\n")
    return 0


# -- parser ---------------------------------------------------------------------------


def _nonneg(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scottkit", description="Scott analyses, Scott processes and model construction.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, *, budget=True, fmt=False, width=None):
        sp.add_argument("input", help="structure file or canonical dump")
        if budget:
            sp.add_argument("--budget", type=_nonneg, default=DEFAULT_BUDGET, help="level/width budget B (default 6)")
        if width is not None:
            sp.add_argument("--width", type=_nonneg, default=width)
        if fmt:
            sp.add_argument("--format", choices=("text", "dump"), default="text")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--workers", type=_nonneg, default=1, help=argparse.SUPPRESS)
        sp.add_argument("--schedule-seed", type=int, default=None, help=argparse.SUPPRESS)
        sp.add_argument("--fixed-budget", action="store_true", help="never raise the budget automatically")
        return sp

    sp = common(sub.add_parser("analyze", help="compute the Scott process of a structure"), fmt=True)
    sp.set_defaults(func=cmd_analyze)
    sp = common(sub.add_parser("rank", help="Scott rank with certificate"), width=1)
    sp.set_defaults(func=cmd_rank)
    sp = sub.add_parser("iso", help="isomorphism test for finite structures")
    sp.add_argument("input")
    sp.add_argument("other")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_iso)
    sp = common(sub.add_parser("validate", help="check the process conditions"))
    sp.set_defaults(func=cmd_validate)
    sp = common(sub.add_parser("complete", help="extend by the maximal completion"), fmt=True, width=1)
    sp.add_argument("--level", help="cut the process at this level")
    sp.set_defaults(func=cmd_complete)
    sp = common(sub.add_parser("amalgamate", help="test whether the last level amalgamates"), width=1)
    sp.add_argument("--level", help="cut the process at this level")
    sp.set_defaults(func=cmd_amalgamate)
    sp = common(sub.add_parser("fset", help="finite-existential closure of a formula"), width=0)
    sp.add_argument("--level", default="1")
    sp.add_argument("--alpha", default="0")
    sp.add_argument("--k", type=_nonneg, default=1, help="number of added variables (default 1)")
    grp = sp.add_mutually_exclusive_group()
    grp.add_argument("--tuple", help="comma-separated element or class names")
    grp.add_argument("--index", type=_nonneg, default=0, help="canonical index within the level")
    sp.set_defaults(func=cmd_fset)
    sp = common(sub.add_parser("limit-extend", help="add the isolated-path level and extend past it"), fmt=True, width=1)
    sp.set_defaults(func=cmd_limit_extend)
    for name, func, help_ in (
        ("build-model", cmd_build_model, "realize a model prefix from a thread"),
        ("build-pair", cmd_build_pair, "realize a model and a substructure from a thread and an index set"),
    ):
        sp = common(sub.add_parser(name, help=help_), width=1)
        sp.add_argument("--elements", type=_nonneg, default=DEFAULT_ELEMENTS)
        sp.add_argument("--level", help="cut the process at this level")
        if name == "build-model":
            sp.add_argument("--limit", action="store_true", help="thread through the isolated-path level")
        else:
            sp.add_argument("--within", help="comma-separated elements or classes whose types form the sub-level")
        sp.set_defaults(func=func)
    sp = common(sub.add_parser("weave", help="build and verify a strong weaving"), width=1)
    sp.add_argument("--index-budget", type=_nonneg, default=DEFAULT_INDEX_BUDGET)
    sp.add_argument("--limit", action="store_true", help="weave through the isolated-path level")
    sp.add_argument("--level", help="cut the process at this level")
    sp.set_defaults(func=cmd_weave)
    sp = common(sub.add_parser("render", help="print the formulas of one level and width"), width=1)
    sp.add_argument("--level", default="0")
    sp.set_defaults(func=cmd_render)
    sp = sub.add_parser("count-types", help="number of atomic diagrams of a width")
    sp.add_argument("--vocab", required=True, help="file of 'vocab NAME/ARITY' lines")
    sp.add_argument("--n", type=_nonneg, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_count_types)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"scottkit: error: {exc}\n")
        return 2
    except engine.BudgetExhausted as exc:
        sys.stderr.write(f"scottkit: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
