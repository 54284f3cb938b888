from __future__ import annotations

import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpus import full_corpus, graph_g  # noqa: E402

from scottkit.engine import analyze, analyze_to_stabilization  # noqa: E402
from scottkit.formulas import FormulaStore  # noqa: E402

DATA = Path(__file__).resolve().parent.parent / "data"

# One store for the whole session so ids are comparable across structures.
STORE = FormulaStore()


def corpus_budget(entry) -> int:
    return 4 if entry.finite else 5


@lru_cache(maxsize=None)
def corpus_processes():
    return tuple((e, analyze(e.structure, corpus_budget(e), store=STORE)) for e in full_corpus())


@lru_cache(maxsize=None)
def stabilized_processes():
    out = []
    for e in full_corpus():
        q = analyze_to_stabilization(e.structure, None if e.finite else 6, store=STORE)
        out.append((e, q))
    return tuple(out)


@lru_cache(maxsize=None)
def g_process(budget: int):
    return analyze(graph_g(), budget, store=STORE)


@pytest.fixture(scope="session")
def store():
    return STORE


@pytest.fixture(scope="session")
def data_dir():
    return DATA


# Filled by the acceptance suite, printed after the run.
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
