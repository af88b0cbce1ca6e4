"""Linear indexed grammars."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

from .cf import BIG
from .engine import Expansion, Leaf, concat
from .registry import kind_of, terminal_alphabet, tree_space
from .symbols import NotNormalFormError, TalforgeError, ValidationError, compose, fresh


class LigNt(NamedTuple):
    """A nonterminal occurrence with an explicit stack (top first)."""

    symbol: str
    stack: tuple = ()

    def render(self) -> str:
        return f"{self.symbol}[{' '.join(self.stack)}]"


RhsItem = Union[str, LigNt]


@dataclass(frozen=True)
class LigProduction:
    """``X[A ..] -> rhs``.

    ``rhs`` mixes terminals (plain strings) and :class:`LigNt` occurrences.
    When ``heir`` is an index, that occurrence inherits the rest of the
    stack under its own listed stack (``Y[γ ..]``).  When ``heir`` is None the
    production is lexical: it applies only to ``X[A]`` and its rhs holds at
    most one terminal.
    """

    lhs: str
    pop: str
    rhs: tuple = ()
    heir: Optional[int] = None

    def __post_init__(self):
        items = tuple(i if isinstance(i, str) else LigNt(i[0], tuple(i[1])) for i in self.rhs)
        object.__setattr__(self, "rhs", items)

    @property
    def lexical(self) -> bool:
        return self.heir is None

    def render(self) -> str:
        parts = []
        for i, item in enumerate(self.rhs):
            if isinstance(item, str):
                parts.append(f'"{item}"')
            else:
                inner = " ".join(item.stack + ((("..",) if i == self.heir else ())))
                parts.append(f"{item.symbol} [ {inner} ]" if inner else f"{item.symbol} [ ]")
        head = f"{self.lhs} [ {self.pop} .. ]" if not self.lexical else f"{self.lhs} [ {self.pop} ]"
        return f"{head} -> {' '.join(parts) or 'eps'}"


@dataclass(frozen=True)
class Lig:
    nonterminals: frozenset
    terminals: frozenset
    stack_alphabet: frozenset
    productions: tuple
    start: str
    start_stack: str

    def __post_init__(self):
        for name in ("nonterminals", "terminals", "stack_alphabet"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        prods = tuple(p if isinstance(p, LigProduction) else LigProduction(*p) for p in self.productions)
        object.__setattr__(self, "productions", prods)
        problems = []
        if self.start not in self.nonterminals:
            problems.append(f"start symbol {self.start!r} is not a nonterminal")
        if self.start_stack not in self.stack_alphabet:
            problems.append(f"initial stack symbol {self.start_stack!r} is not a stack symbol")
        if self.nonterminals & self.terminals:
            problems.append(f"alphabet clash: {sorted(self.nonterminals & self.terminals)}")
        for i, p in enumerate(prods):
            if p.lhs not in self.nonterminals:
                problems.append(f"production {i}: undeclared lhs {p.lhs!r}")
            if p.pop not in self.stack_alphabet:
                problems.append(f"production {i}: undeclared stack symbol {p.pop!r}")
            for item in p.rhs:
                if isinstance(item, str):
                    if item not in self.terminals:
                        problems.append(f"production {i}: undeclared terminal {item!r}")
                else:
                    if item.symbol not in self.nonterminals:
                        problems.append(f"production {i}: undeclared nonterminal {item.symbol!r}")
                    for s in item.stack:
                        if s not in self.stack_alphabet:
                            problems.append(f"production {i}: undeclared stack symbol {s!r}")
            if p.lexical:
                if len(p.rhs) > 1 or any(not isinstance(x, str) for x in p.rhs):
                    problems.append(f"production {i}: a production without a stack-inheriting "
                                    "nonterminal must rewrite to a single terminal or eps")
            elif not (0 <= p.heir < len(p.rhs)) or isinstance(p.rhs[p.heir], str):
                problems.append(f"production {i}: the stack-inheriting position is not a nonterminal")
        if problems:
            raise ValidationError(problems)

    def by_key(self) -> dict[tuple[str, str], list[LigProduction]]:
        table: dict[tuple[str, str], list[LigProduction]] = {}
        for p in self.productions:
            table.setdefault((p.lhs, p.pop), []).append(p)
        return table

    def production_type(self, p: LigProduction) -> Optional[int]:
        """1, 2 or 3 for the three normal-form production types, else None."""
        if p.lexical:
            return 3
        rhs = p.rhs
        heir = rhs[p.heir]
        if len(rhs) == 1 and heir.symbol == p.lhs:
            return 2
        if not heir.stack and all(isinstance(x, LigNt) and x.stack == (self.start_stack,)
                                  for i, x in enumerate(rhs) if i != p.heir):
            return 1
        return None

    def is_normal_form(self) -> bool:
        return all(self.production_type(p) is not None for p in self.productions)


# ---------------------------------------------------------------- stepping

def lig_step(form: Sequence, at: int, prod: LigProduction) -> tuple:
    """Rewrite the occurrence at index ``at`` of a sentential form with ``prod``."""
    form = tuple(form)
    if not 0 <= at < len(form) or not isinstance(form[at], LigNt):
        raise TalforgeError(f"position {at} is not a nonterminal occurrence")
    occ = form[at]
    if occ.symbol != prod.lhs:
        raise TalforgeError(f"production for {prod.lhs} applied to {occ.symbol}")
    if not occ.stack:
        raise TalforgeError(f"{occ.render()} has an empty stack; no production applies")
    if occ.stack[0] != prod.pop:
        raise TalforgeError(f"stack top {occ.stack[0]} does not match {prod.pop}")
    rest = occ.stack[1:]
    if prod.lexical:
        if rest:
            raise TalforgeError("a lexical production needs the popped symbol to be the last one")
        return form[:at] + prod.rhs + form[at + 1 :]
    new = []
    for i, item in enumerate(prod.rhs):
        if i == prod.heir:
            new.append(LigNt(item.symbol, item.stack + rest))
        else:
            new.append(item)
    return form[:at] + tuple(new) + form[at + 1 :]


def stack_total(form: Sequence) -> int:
    return sum(len(x.stack) for x in form if isinstance(x, LigNt))


def lig_stack_delta(prod: LigProduction) -> int:
    """Change of the total stack-symbol count caused by one application of ``prod``.

    The inheriting occurrence loses the popped symbol and gains the pushed
    ones; any other occurrence in the rhs arrives with its own fixed stack.
    """
    if prod.lexical:
        return -1
    fixed = sum(len(x.stack) for i, x in enumerate(prod.rhs) if i != prod.heir and isinstance(x, LigNt))
    return len(prod.rhs[prod.heir].stack) - 1 + fixed


# ---------------------------------------------------------------- derivation trees

def _min_yields(g: Lig) -> dict[str, int]:
    best = {x: BIG for x in g.nonterminals}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            total = sum(1 if isinstance(x, str) else best[x.symbol] for x in p.rhs)
            if total < best[p.lhs]:
                best[p.lhs] = total
                changed = True
    return best


class LigSpace:
    def __init__(self, g: Lig):
        self.g = g
        self.root = LigNt(g.start, (g.start_stack,))
        self.table = g.by_key()
        self.mins = _min_yields(g)

    def expand(self, label: LigNt):
        if not label.stack:
            return
        top, rest = label.stack[0], label.stack[1:]
        for p in self.table.get((label.symbol, top), ()):
            if p.lexical:
                if rest:
                    continue
                yield Expansion(tuple(Leaf(a) for a in p.rhs if a), 0, concat)
                continue
            kids = []
            for i, item in enumerate(p.rhs):
                if isinstance(item, str):
                    kids.append(Leaf(item))
                elif i == p.heir:
                    kids.append(LigNt(item.symbol, item.stack + rest))
                else:
                    kids.append(item)
            yield Expansion(tuple(kids), 0, concat)

    def size(self, label: LigNt) -> int:
        return len(label.stack)

    def min_yield(self, label: LigNt) -> int:
        return self.mins.get(label.symbol, BIG)


tree_space.register(Lig, LigSpace)
terminal_alphabet.register(Lig, lambda g: g.terminals)
kind_of.register(Lig, lambda g: "lig")


def lig_replay(g: Lig, tree) -> list[tuple]:
    """Leftmost sentential forms of a derivation tree, with the production used at each step.

    Returns a list of ``(form, position, production)`` triples; the last form
    is not included.  Used to check stepwise invariants on enumerated trees.
    """
    table = g.by_key()
    steps = []
    form: tuple = (tree.label,)
    frontier = [tree]  # derivation nodes aligned with nonterminal occurrences, left to right
    while True:
        at = next((i for i, x in enumerate(form) if isinstance(x, LigNt)), None)
        if at is None:
            return steps
        k = sum(1 for x in form[:at] if isinstance(x, LigNt))
        node = frontier[k]
        prod = _match(table, node)
        steps.append((form, at, prod))
        form = lig_step(form, at, prod)
        kids = [c for c in node.children if isinstance(c.label, LigNt)]
        frontier[k : k + 1] = kids


def _match(table, node) -> LigProduction:
    label = node.label
    rest = label.stack[1:]
    kids = [c.label for c in node.children]
    for p in table.get((label.symbol, label.stack[0]), ()):
        if p.lexical:
            want = [Leaf(a) for a in p.rhs if a]
        else:
            want = [Leaf(x) if isinstance(x, str) else
                    (LigNt(x.symbol, x.stack + rest) if i == p.heir else x) for i, x in enumerate(p.rhs)]
        if want == kids:
            return p
    raise TalforgeError("derivation node does not match any production")


# ---------------------------------------------------------------- normal form

def lig_normal_form(g: Lig) -> Lig:
    """Split productions into the three normal-form types.

    A production that pushes and also has other rhs material first replaces
    the popped symbol by a fresh marker and the pushed string, then pops the
    marker into the final shape.  Terminals next to nonterminals move under
    fresh pre-terminals ``T[S] -> a``; an occurrence carrying a fixed stack
    other than ``[S]`` starts as a fresh nonterminal with ``[S]`` and builds
    that stack itself.  Every split is deterministic, so derivation counts
    per string are preserved.
    """
    if g.is_normal_form():
        return g
    start_sym = g.start_stack
    taken = set(g.nonterminals) | set(g.terminals) | set(g.stack_alphabet)
    nts = set(g.nonterminals)
    stack = set(g.stack_alphabet)
    prods: list[LigProduction] = []
    pre: dict[str, str] = {}

    def preterminal(a: str) -> LigNt:
        if a not in pre:
            name = fresh(compose("T", a if a.isidentifier() else "t"), taken)
            pre[a] = name
            nts.add(name)
            prods.append(LigProduction(name, start_sym, (a,), None))
        return LigNt(pre[a], (start_sym,))

    def fixed(item: LigNt, tag: str) -> LigNt:
        if item.stack == (start_sym,):
            return item
        w = fresh(compose("W", item.symbol, tag), taken)
        m = fresh(compose("M", w), taken)
        nts.add(w)
        stack.add(m)
        prods.append(LigProduction(w, start_sym, (LigNt(w, (m,) + item.stack),), 0))
        prods.append(LigProduction(w, m, (LigNt(item.symbol, ()),), 0))
        return LigNt(w, (start_sym,))

    for i, p in enumerate(g.productions):
        kind = g.production_type(p)
        if kind is not None:
            prods.append(p)
            continue
        heir = p.rhs[p.heir]
        flat = []
        for j, item in enumerate(p.rhs):
            if j == p.heir:
                flat.append(LigNt(heir.symbol, ()))
            elif isinstance(item, str):
                flat.append(preterminal(item))
            else:
                flat.append(fixed(item, f"{i}.{j}"))
        if heir.stack:
            m = fresh(compose("M", str(i)), taken)
            stack.add(m)
            prods.append(LigProduction(p.lhs, p.pop, (LigNt(p.lhs, (m,) + heir.stack),), 0))
            prods.append(LigProduction(p.lhs, m, tuple(flat), p.heir))
        else:
            prods.append(LigProduction(p.lhs, p.pop, tuple(flat), p.heir))
    out = Lig(nts, g.terminals, stack, tuple(prods), g.start, g.start_stack)
    assert out.is_normal_form()
    return out


def require_lig_normal_form(g: Lig) -> None:
    bad = [i for i, p in enumerate(g.productions) if g.production_type(p) is None]
    if bad:
        raise NotNormalFormError(f"LIG productions not in normal form: {bad}")
