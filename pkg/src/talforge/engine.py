"""Generic bounded enumeration of derivation trees.

Every formalism in the package is presented to this module as a *tree
space*: a root label plus an ``expand`` function mapping a node label to the
ways it can be expanded.  Each expansion lists the child labels, the number
of terminals the node itself contributes, and how the node's yield is
assembled from the children's yields.

The solver computes, for each (label, yield length) pair, the list of all
complete subtrees.  Pairs are memoized.  Cyclic dependencies between pairs
(unit cycles, ε-loops, intermediate-symbol guesses that lead back to the
same label) are resolved by iterating the strongly connected component to
a fixpoint.  A component that keeps growing means infinitely many trees;
the node budget stops it and the result is flagged as truncated.
"""

from __future__ import annotations

import sys
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, NamedTuple, Optional, Protocol, Sequence

from .budget import StepBudget
from .symbols import HOLE
from .trees import DerivationTree, Yield

INF = float("inf")


@dataclass(frozen=True)
class Leaf:
    """A terminal leaf in a CFG-style derivation tree."""

    symbol: str

    def render(self) -> str:
        return self.symbol


def concat(yields: Sequence[Yield]) -> Yield:
    out: tuple = ()
    for y in yields:
        out += y
    return out


class Expansion(NamedTuple):
    children: tuple
    emit: int = 0
    combine: Callable[[Sequence[Yield]], Yield] = concat
    edges: Optional[tuple[str, ...]] = None


class TreeSpace(Protocol):
    root: Hashable

    def expand(self, label: Hashable) -> Iterable[Expansion]: ...

    def size(self, label: Hashable) -> int: ...

    def min_yield(self, label: Hashable) -> int: ...


@dataclass
class Enumeration:
    """All complete derivation trees of a space up to a yield length."""

    trees: dict[Yield, list[DerivationTree]]
    truncated: bool
    max_len: int
    nodes_built: int = 0
    reasons: list[str] = field(default_factory=list)

    def counts(self) -> dict[Yield, int]:
        return {y: len(ts) for y, ts in self.trees.items()}

    def strings(self) -> list[Yield]:
        return sorted(self.trees, key=lambda y: (len(y), y))


class _Exhausted(Exception):
    pass


class _Solver:
    def __init__(self, space: TreeSpace, budget: StepBudget):
        self.space = space
        self.budget = budget
        self.memo: dict[tuple, tuple] = {}
        self.partial: dict[tuple, tuple] = {}
        self.index: dict[tuple, int] = {}
        self.active: list[tuple] = []
        self.pending: list[tuple] = []
        self.changes = 0
        self.built = 0
        self.truncated = False
        self.reasons: list[str] = []
        self._exp_cache: dict[Hashable, tuple] = {}
        self._min_cache: dict[Hashable, int] = {}
        self._leaf_cache: dict[str, DerivationTree] = {}

    # -- helpers -------------------------------------------------------------
    def flag(self, reason: str) -> None:
        self.truncated = True
        if reason not in self.reasons:
            self.reasons.append(reason)

    def min_yield(self, label) -> int:
        if isinstance(label, Leaf):
            return 1
        got = self._min_cache.get(label)
        if got is None:
            got = self.space.min_yield(label)
            self._min_cache[label] = got
        return got

    def expansions(self, label) -> tuple:
        got = self._exp_cache.get(label)
        if got is None:
            got = tuple(self.space.expand(label))
            self._exp_cache[label] = got
        return got

    def leaf(self, symbol: str) -> DerivationTree:
        tree = self._leaf_cache.get(symbol)
        if tree is None:
            tree = DerivationTree.make(Leaf(symbol), (), None, (symbol,))
            self._leaf_cache[symbol] = tree
        return tree

    # -- core ----------------------------------------------------------------
    def get(self, label, n: int):
        if isinstance(label, Leaf):
            return ((self.leaf(label.symbol),) if n == 1 else ()), INF
        key = (label, n)
        done = self.memo.get(key)
        if done is not None:
            return done, INF
        idx = self.index.get(key)
        if idx is not None:
            return self.partial.get(key, ()), idx
        pos = len(self.active)
        self.active.append(key)
        self.index[key] = pos
        mark = len(self.pending)
        while True:
            del self.pending[mark:]
            before = self.changes
            value, low = self.compute(label, n)
            old = self.partial.get(key)
            if (old is None and value) or (old is not None and len(old) != len(value)):
                self.changes += 1
            self.partial[key] = value
            if low < pos:
                self.active.pop()
                del self.index[key]
                self.pending.append(key)
                return value, low
            if low == INF or self.changes == before:
                for member in self.pending[mark:]:
                    # a cycle member reached twice in one pass is queued twice
                    if member in self.partial:
                        self.memo[member] = self.partial.pop(member)
                del self.pending[mark:]
                self.memo[key] = self.partial.pop(key)
                self.active.pop()
                del self.index[key]
                return value, INF

    def compute(self, label, n: int):
        low = INF
        if self.min_yield(label) > n:
            return (), low
        if self.space.size(label) > self.budget.max_sentential_length:
            self.flag("max_sentential_length")
            return (), low
        out: list[DerivationTree] = []
        for exp in self.expansions(label):
            rem = n - exp.emit
            if rem < 0:
                continue
            kids = exp.children
            if not kids:
                if rem == 0:
                    out.append(self.build(label, (), exp))
                continue
            mins = [self.min_yield(c) for c in kids]
            if sum(mins) > rem:
                continue
            suffix = [0] * (len(kids) + 1)
            for i in range(len(kids) - 1, -1, -1):
                suffix[i] = suffix[i + 1] + mins[i]
            choices: list[Sequence[DerivationTree]] = []

            def walk(i: int, left: int) -> None:
                nonlocal low
                if i == len(kids) - 1:
                    trees, lo = self.get(kids[i], left)
                    low = min(low, lo)
                    if trees:
                        choices.append(trees)
                        self.emit_products(label, exp, choices, out)
                        choices.pop()
                    return
                for m in range(mins[i], left - suffix[i + 1] + 1):
                    trees, lo = self.get(kids[i], m)
                    low = min(low, lo)
                    if not trees:
                        continue
                    choices.append(trees)
                    walk(i + 1, left - m)
                    choices.pop()

            walk(0, rem)
        return tuple(out), low

    def emit_products(self, label, exp: Expansion, choices, out: list) -> None:
        def rec(i: int, picked: list) -> None:
            if i == len(choices):
                out.append(self.build(label, tuple(picked), exp))
                return
            for t in choices[i]:
                picked.append(t)
                rec(i + 1, picked)
                picked.pop()

        rec(0, [])

    def build(self, label, kids: tuple, exp: Expansion) -> DerivationTree:
        self.built += 1
        if self.built > self.budget.max_nodes:
            self.flag("max_nodes")
            raise _Exhausted
        y = exp.combine([k.yield_ for k in kids])
        return DerivationTree.make(label, kids, exp.edges, y)


def run_deep(fn: Callable[[], Any]) -> Any:
    """Run ``fn`` on a thread with a large stack so deep recursion is safe."""
    result: dict[str, Any] = {}

    def target():
        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 200_000))
        try:
            result["value"] = fn()
        except BaseException as exc:  # re-raised in the caller's thread
            result["error"] = exc

    old_size = threading.stack_size()
    threading.stack_size(512 * 1024 * 1024)
    try:
        worker = threading.Thread(target=target, name="talforge-enumerate")
        worker.start()
        worker.join()
    finally:
        threading.stack_size(old_size)
    if "error" in result:
        raise result["error"]
    return result["value"]


def enumerate_space(space: TreeSpace, max_len: int, budget: StepBudget,
                    lengths: Optional[Iterable[int]] = None) -> Enumeration:
    """Enumerate complete trees of ``space`` with yield length at most ``max_len``.

    Yields that still contain a hole are not complete derivations and are
    dropped.
    """
    solver = _Solver(space, budget)
    wanted = list(range(max_len + 1)) if lengths is None else sorted(set(lengths))

    def go():
        found: dict[Yield, list[DerivationTree]] = {}
        for n in wanted:
            try:
                trees, _ = solver.get(space.root, n)
            except _Exhausted:
                key = (space.root, n)
                trees = solver.memo.get(key) or solver.partial.get(key, ())
                _collect(found, trees)
                # every longer length is unexplored
                break
            _collect(found, trees)
        return found

    found = run_deep(go)
    return Enumeration(found, solver.truncated, max_len, solver.built, solver.reasons)


def _collect(found: dict, trees) -> None:
    for t in trees:
        if HOLE in t.yield_:
            continue
        found.setdefault(t.yield_, []).append(t)
