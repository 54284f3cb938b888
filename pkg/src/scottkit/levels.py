"""Level indices: finite ordinals (plain ``int``) and ordinals ``ω + k``.

Only one limit ordinal is supported. Finite levels are ordinary Python
integers so that ``level + 1`` and comparisons work uniformly.
"""
from __future__ import annotations

import re
from functools import total_ordering
from typing import Union


@total_ordering
class OmegaPlus:
    """The ordinal ``ω + k`` for ``k >= 0``."""

    __slots__ = ("k",)

    def __init__(self, k: int = 0):
        if k < 0:
            raise ValueError("ω + k needs k >= 0")
        self.k = k

    def __add__(self, other: int) -> "OmegaPlus":
        if not isinstance(other, int):
            return NotImplemented
        return OmegaPlus(self.k + other)

    def __sub__(self, other: int) -> "OmegaPlus":
        if not isinstance(other, int) or other > self.k:
            raise ValueError(f"cannot subtract {other} from {self}")
        return OmegaPlus(self.k - other)

    def __eq__(self, other) -> bool:
        return isinstance(other, OmegaPlus) and other.k == self.k

    def __lt__(self, other) -> bool:
        if isinstance(other, OmegaPlus):
            return self.k < other.k
        if isinstance(other, int):
            return False
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("ω", self.k))

    def __repr__(self) -> str:
        return "ω" if self.k == 0 else f"ω+{self.k}"

    __str__ = __repr__


Level = Union[int, OmegaPlus]

OMEGA = OmegaPlus(0)


def is_limit(level: Level) -> bool:
    return level == OMEGA


def is_successor(level: Level) -> bool:
    if isinstance(level, int):
        return level > 0
    return level.k > 0


def predecessor(level: Level) -> Level:
    if not is_successor(level):
        raise ValueError(f"{level} has no predecessor")
    return level - 1


def check_level(level) -> Level:
    if isinstance(level, bool) or not isinstance(level, (int, OmegaPlus)):
        raise TypeError(f"not a level index: {level!r}")
    if isinstance(level, int) and level < 0:
        raise ValueError(f"negative level {level}")
    return level


_LEVEL_RE = re.compile(r"^\s*(?:(\d+)|(?:omega|ω|w)(?:\s*\+\s*(\d+))?)\s*$")


def parse_level(text: str) -> Level:
    m = _LEVEL_RE.match(text)
    if not m:
        raise ValueError(f"bad level index {text!r}")
    if m.group(1) is not None:
        return int(m.group(1))
    return OmegaPlus(int(m.group(2) or 0))


def format_level(level: Level) -> str:
    return str(level)
