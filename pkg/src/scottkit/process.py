"""The :class:`ScottProcess` container: level-indexed families of formula-id sets."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .formulas import FormulaStore, Injection
from .levels import Level, check_level
from .structures import AbstractTuple, MultiplicityStructure, Vocabulary


@dataclass
class ScottProcess:
    """Levels ``α ↦ (n ↦ Φⁿ_α)`` over a shared :class:`FormulaStore`.

    Only finitely many widths are explicit at each level.  When
    ``truncated`` is an integer, every width above it is known to be empty
    (finite structures); otherwise widths beyond the explicit ones are
    simply unknown (outside the computed budget).
    """

    store: FormulaStore
    vocab: Vocabulary
    levels: dict[Level, dict[int, frozenset]]
    truncated: Optional[int] = None
    budget: Optional[int] = None
    origin: Optional[MultiplicityStructure] = None
    tuple_map: dict[tuple[Level, AbstractTuple], int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.levels = {
            check_level(a): {int(n): frozenset(ids) for n, ids in ws.items()}
            for a, ws in self.levels.items()
        }
        self._fibers: dict = {}

    # -- shape -------------------------------------------------------------

    @property
    def level_indices(self) -> list[Level]:
        return sorted(self.levels)

    @property
    def last(self) -> Level:
        return max(self.levels)

    def widths(self, alpha: Level) -> list[int]:
        return sorted(self.levels.get(alpha, {}))

    def max_width(self, alpha: Level) -> int:
        ws = self.levels.get(alpha)
        return max(ws) if ws else -1

    def known(self, alpha: Level, n: int) -> bool:
        if alpha not in self.levels:
            return False
        if n in self.levels[alpha]:
            return True
        return self.truncated is not None and n > self.truncated

    def truncation_empty(self, alpha: Level, n: int) -> bool:
        """True when Φⁿ_α is empty only because the structure is finite."""
        return self.truncated is not None and n > self.truncated and alpha in self.levels

    def phi(self, alpha: Level, n: int) -> frozenset:
        ws = self.levels.get(alpha)
        if ws is None:
            raise KeyError(f"level {alpha} not in process")
        if n in ws:
            return ws[n]
        if self.truncated is not None and n > self.truncated:
            return frozenset()
        raise KeyError(f"width {n} at level {alpha} is outside the computed budget")

    def all_at(self, alpha: Level) -> frozenset:
        return frozenset().union(*self.levels[alpha].values()) if self.levels.get(alpha) else frozenset()

    # -- derived sets --------------------------------------------------------

    def fiber(self, alpha: Level, phi_id: int) -> frozenset:
        """``{ψ ∈ Φ^{n+1}_α : H(ψ, i_n) = φ}`` for φ of width n."""
        n = self.store.width(phi_id)
        return self._fiber_table(alpha, n).get(phi_id, frozenset())

    def _fiber_table(self, alpha: Level, n: int) -> dict[int, frozenset]:
        key = (alpha, n)
        hit = self._fibers.get(key)
        if hit is None:
            table: dict[int, set] = {}
            inc = Injection.inclusion(n, n + 1)
            for psi in self.phi(alpha, n + 1):
                table.setdefault(self.store.h_project(psi, inc), set()).add(psi)
            hit = self._fibers[key] = {k: frozenset(v) for k, v in table.items()}
        return hit

    def v_image(self, alpha: Level, beta: Level, n: int) -> frozenset:
        return frozenset(self.store.v_project(f, alpha) for f in self.phi(beta, n))

    # -- construction --------------------------------------------------------

    def with_level(self, alpha: Level, widths: Mapping[int, frozenset]) -> "ScottProcess":
        levels = {a: dict(ws) for a, ws in self.levels.items()}
        levels[alpha] = {n: frozenset(ids) for n, ids in widths.items()}
        return replace(self, levels=levels, tuple_map={})

    def prefix(self, upto: Level, inclusive: bool = True) -> "ScottProcess":
        keep = {
            a: dict(ws)
            for a, ws in self.levels.items()
            if (a <= upto if inclusive else a < upto)
        }
        tmap = {k: v for k, v in self.tuple_map.items() if k[0] in keep}
        return replace(self, levels=keep, tuple_map=tmap)

    def replace_set(self, alpha: Level, n: int, ids) -> "ScottProcess":
        levels = {a: dict(ws) for a, ws in self.levels.items()}
        levels[alpha][n] = frozenset(ids)
        return replace(self, levels=levels, tuple_map={})

    def counts(self) -> dict[Level, dict[int, int]]:
        return {a: {n: len(ids) for n, ids in sorted(ws.items())} for a, ws in sorted(self.levels.items())}

    def describe(self) -> list[str]:
        lines = []
        for a in self.level_indices:
            row = " ".join(f"{n}:{len(self.levels[a][n])}" for n in self.widths(a))
            lines.append(f"level {a}: {row}")
        return lines
