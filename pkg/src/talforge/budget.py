"""Enumeration budgets and the environment override."""

from __future__ import annotations

import os
from dataclasses import dataclass

from .symbols import TalforgeError

ENV_VAR = "TALFORGE_BUDGET"


@dataclass(frozen=True)
class StepBudget:
    """Termination guard for enumeration.

    ``max_nodes`` caps the number of derivation-tree nodes an enumeration may
    build in total (and therefore also the size of any single tree).
    ``max_sentential_length`` caps the size of any single search item: the
    stack height of an automaton configuration, the length of a two-level
    node string, the stack carried by a LIG nonterminal, and so on.  Hitting
    either cap never raises; it sets the truncation flag on the result.
    """

    max_nodes: int = 100_000
    max_sentential_length: int = 64

    def __post_init__(self) -> None:
        if self.max_nodes <= 0 or self.max_sentential_length <= 0:
            raise TalforgeError("budget limits must be strictly positive")

    def scaled(self, factor: int) -> "StepBudget":
        return StepBudget(self.max_nodes * factor, self.max_sentential_length * factor)

    @classmethod
    def parse(cls, raw: str, where: str = "budget") -> "StepBudget":
        """``max_nodes`` or ``max_nodes,max_sentential_length`` (``:`` also separates)."""
        try:
            parts = [int(p) for p in raw.replace(":", ",").split(",") if p.strip()]
        except ValueError as exc:
            raise TalforgeError(f"malformed {where} {raw!r}") from exc
        if len(parts) == 1:
            return cls(max_nodes=parts[0])
        if len(parts) == 2:
            return cls(max_nodes=parts[0], max_sentential_length=parts[1])
        raise TalforgeError(f"malformed {where} {raw!r}")

    @classmethod
    def from_env(cls) -> "StepBudget":
        """Default budget, overridden by ``TALFORGE_BUDGET`` (same syntax as :meth:`parse`)."""
        raw = os.environ.get(ENV_VAR, "").strip()
        return cls.parse(raw, ENV_VAR) if raw else cls()


def default_budget() -> StepBudget:
    return StepBudget.from_env()
