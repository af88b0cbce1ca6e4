"""Context-free grammars and pushdown automata."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .budget import StepBudget, default_budget
from .engine import Enumeration, Expansion, Leaf, concat, enumerate_space
from .registry import kind_of, terminal_alphabet, tree_space, tree_style
from .symbols import EPS, NotNormalFormError, TalforgeError, ValidationError, compose, fresh, word
from .trees import DerivationTree

BIG = 10**9


# ===================================================================== CFG

@dataclass(frozen=True)
class Production:
    lhs: str
    rhs: tuple[str, ...] = ()

    def render(self) -> str:
        return f"{self.lhs} -> {' '.join(self.rhs) or 'eps'}"


@dataclass(frozen=True)
class Cfg:
    nonterminals: frozenset
    terminals: frozenset
    productions: tuple
    start: str
    fresh: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "nonterminals", frozenset(self.nonterminals))
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(self, "fresh", frozenset(self.fresh))
        prods = tuple(p if isinstance(p, Production) else Production(p[0], tuple(p[1]))
                      for p in self.productions)
        object.__setattr__(self, "productions", prods)
        problems = []
        if self.start not in self.nonterminals:
            problems.append(f"start symbol {self.start!r} is not a nonterminal")
        clash = self.nonterminals & self.terminals
        if clash:
            problems.append(f"symbols declared both terminal and nonterminal: {sorted(clash)}")
        for i, p in enumerate(prods):
            if p.lhs not in self.nonterminals:
                problems.append(f"production {i}: undeclared lhs {p.lhs!r}")
            for s in p.rhs:
                if s not in self.nonterminals and s not in self.terminals:
                    problems.append(f"production {i}: undeclared symbol {s!r}")
        if problems:
            raise ValidationError(problems)

    def by_lhs(self) -> dict[str, list[Production]]:
        table: dict[str, list[Production]] = {}
        for p in self.productions:
            table.setdefault(p.lhs, []).append(p)
        return table

    def is_normal_form(self) -> bool:
        return all(_cfg_rhs_normal(p.rhs, self.nonterminals) for p in self.productions)


def _cfg_rhs_normal(rhs: Sequence[str], nonterminals) -> bool:
    if all(s in nonterminals for s in rhs):
        return True
    return len(rhs) == 1


def cfg_normal_form(g: Cfg) -> Cfg:
    """Replace each terminal occurrence in a mixed rhs with a fresh pre-terminal.

    Fresh names are derived from the production index and position, so the
    output is reproducible.  Grammars already in normal form are returned
    unchanged.
    """
    if g.is_normal_form():
        return g
    taken = set(g.nonterminals) | set(g.terminals)
    prods: list[Production] = []
    extra: list[Production] = []
    new_nts: list[str] = []
    for i, p in enumerate(g.productions):
        if _cfg_rhs_normal(p.rhs, g.nonterminals):
            prods.append(p)
            continue
        rhs = []
        for j, s in enumerate(p.rhs):
            if s in g.terminals:
                tag = s if s.isidentifier() else f"t{j}"
                name = fresh(compose("T", tag, f"{i}.{j}"), taken)
                new_nts.append(name)
                extra.append(Production(name, (s,)))
                rhs.append(name)
            else:
                rhs.append(s)
        prods.append(Production(p.lhs, tuple(rhs)))
    return Cfg(g.nonterminals | set(new_nts), g.terminals, tuple(prods + extra), g.start,
               g.fresh | set(new_nts))


def cfg_min_yield(g: Cfg) -> dict[str, int]:
    best = {a: BIG for a in g.nonterminals}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            total = 0
            for s in p.rhs:
                total += 1 if s in g.terminals else best[s]
            if total < best[p.lhs]:
                best[p.lhs] = total
                changed = True
    return best


def prune_cfg(g: Cfg) -> Cfg:
    """Drop unproductive and unreachable nonterminals (optional clean-up)."""
    mins = cfg_min_yield(g)
    productive = {a for a, v in mins.items() if v < BIG}
    prods = [p for p in g.productions
             if p.lhs in productive and all(s in g.terminals or s in productive for s in p.rhs)]
    reach = {g.start}
    frontier = [g.start]
    table: dict[str, list[Production]] = {}
    for p in prods:
        table.setdefault(p.lhs, []).append(p)
    while frontier:
        a = frontier.pop()
        for p in table.get(a, ()):
            for s in p.rhs:
                if s in g.nonterminals and s not in reach:
                    reach.add(s)
                    frontier.append(s)
    prods = [p for p in prods if p.lhs in reach]
    keep = (reach & productive) | {g.start}
    return Cfg(keep, g.terminals, tuple(prods), g.start, g.fresh & keep)


# ===================================================================== PDA

@dataclass(frozen=True)
class PdaTransition:
    source: str
    pop: str
    scan: str
    target: str
    push: tuple[str, ...] = ()

    def render(self) -> str:
        scan = f'"{self.scan}"' if self.scan else "eps"
        return f"{self.source} , {self.pop} -> {self.target} , {' '.join(self.push) or 'eps'} @ {scan}"


@dataclass(frozen=True)
class Pda:
    states: frozenset
    input_alphabet: frozenset
    stack_alphabet: frozenset
    transitions: tuple
    initial_state: str
    start_symbol: str
    final_state: str

    def __post_init__(self):
        for name in ("states", "input_alphabet", "stack_alphabet"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        trans = tuple(t if isinstance(t, PdaTransition) else PdaTransition(t[0], t[1], t[2], t[3], tuple(t[4]))
                      for t in self.transitions)
        object.__setattr__(self, "transitions", trans)
        problems = []
        for s in (self.initial_state, self.final_state):
            if s not in self.states:
                problems.append(f"undeclared state {s!r}")
        if self.start_symbol not in self.stack_alphabet:
            problems.append(f"initial stack symbol {self.start_symbol!r} is not a stack symbol")
        for i, t in enumerate(trans):
            for s in (t.source, t.target):
                if s not in self.states:
                    problems.append(f"transition {i}: undeclared state {s!r}")
            for s in (t.pop, *t.push):
                if s not in self.stack_alphabet:
                    problems.append(f"transition {i}: undeclared stack symbol {s!r}")
            if t.scan and t.scan not in self.input_alphabet:
                problems.append(f"transition {i}: undeclared input symbol {t.scan!r}")
        if problems:
            raise ValidationError(problems)

    def is_normal_form(self) -> bool:
        return all(not (t.scan and t.push) for t in self.transitions)

    def by_pop(self) -> dict[tuple[str, str], list[PdaTransition]]:
        table: dict[tuple[str, str], list[PdaTransition]] = {}
        for t in self.transitions:
            table.setdefault((t.source, t.pop), []).append(t)
        return table


def pda_normal_form(p: Pda) -> Pda:
    """Split every transition that both scans and pushes.

    ``q,X -a-> r,γ`` becomes ``q,X -ε-> r,T γ`` and ``r,T -a-> r,ε`` with a
    fresh stack symbol ``T`` per original transition.
    """
    if p.is_normal_form():
        return p
    taken = set(p.stack_alphabet) | set(p.states)
    out: list[PdaTransition] = []
    new_syms: list[str] = []
    for i, t in enumerate(p.transitions):
        if not (t.scan and t.push):
            out.append(t)
            continue
        tag = t.scan if t.scan.isidentifier() else "t"
        sym = fresh(compose("T", tag, str(i)), taken)
        new_syms.append(sym)
        out.append(PdaTransition(t.source, t.pop, EPS, t.target, (sym,) + t.push))
        out.append(PdaTransition(t.target, sym, t.scan, t.target, ()))
    return Pda(p.states, p.input_alphabet, p.stack_alphabet | set(new_syms), tuple(out),
               p.initial_state, p.start_symbol, p.final_state)


def _require_nf(ok: bool, what: str) -> None:
    if not ok:
        raise NotNormalFormError(f"{what} is not in normal form")


def cfg_to_pda(g: Cfg, state: str = "q") -> Pda:
    """Single-state PDA whose stack alphabet is the grammar's nonterminals."""
    _require_nf(g.is_normal_form(), "grammar")
    trans = []
    for p in g.productions:
        if len(p.rhs) == 1 and p.rhs[0] in g.terminals:
            trans.append(PdaTransition(state, p.lhs, p.rhs[0], state, ()))
        else:
            trans.append(PdaTransition(state, p.lhs, EPS, state, p.rhs))
    return Pda({state}, g.terminals, g.nonterminals, tuple(trans), state, g.start, state)


def triple(symbol: str, p: str, q: str) -> str:
    return compose(symbol, p, q)


def pda_to_cfg(p: Pda, prune: bool = False) -> Cfg:
    """Triple construction: nonterminal ``A<p|q>`` derives what pops ``A`` from p to q."""
    _require_nf(p.is_normal_form(), "automaton")
    states = sorted(p.states)
    nts = {triple(a, s, r) for a in p.stack_alphabet for s in states for r in states}
    prods: list[Production] = []
    for t in p.transitions:
        if t.scan:
            prods.append(Production(triple(t.pop, t.source, t.target), (t.scan,)))
            continue
        k = len(t.push)
        if k == 0:
            prods.append(Production(triple(t.pop, t.source, t.target), ()))
            continue
        for rs in itertools.product(states, repeat=k):
            chain = (t.target,) + rs
            rhs = tuple(triple(b, chain[i], chain[i + 1]) for i, b in enumerate(t.push))
            prods.append(Production(triple(t.pop, t.source, rs[-1]), rhs))
    g = Cfg(nts, p.input_alphabet, tuple(prods), triple(p.start_symbol, p.initial_state, p.final_state))
    return prune_cfg(g) if prune else g


def pda_one_state(p: Pda, state: str = "q", require_normal_form: bool = True) -> Pda:
    """Equivalent single-state PDA over stack symbols ``X<q|r>``.

    The construction itself copes with transitions that scan and push at
    once; conversions that must keep run shapes intact pass
    ``require_normal_form=False``.
    """
    if require_normal_form:
        _require_nf(p.is_normal_form(), "automaton")
    states = sorted(p.states)
    syms = {triple(a, s, r) for a in p.stack_alphabet for s in states for r in states}
    trans: list[PdaTransition] = []
    for t in p.transitions:
        k = len(t.push)
        if k == 0:
            trans.append(PdaTransition(state, triple(t.pop, t.source, t.target), t.scan, state, ()))
            continue
        for ss in itertools.product(states, repeat=k):
            chain = (t.target,) + ss
            push = tuple(triple(b, chain[i], chain[i + 1]) for i, b in enumerate(t.push))
            trans.append(PdaTransition(state, triple(t.pop, t.source, ss[-1]), t.scan, state, push))
    return Pda({state}, p.input_alphabet, syms, tuple(trans), state,
               triple(p.start_symbol, p.initial_state, p.final_state), state)


# ===================================================================== tree spaces

class PdaConfig(NamedTuple):
    state: str
    stack: tuple

    def render(self) -> str:
        return f"{self.state},[{' '.join(self.stack)}]"


def _prefix(sym: str):
    if not sym:
        return concat
    head = (sym,)
    return lambda ys: head + ys[0]


def _empty(_ys):
    return ()


class CfgSpace:
    def __init__(self, g: Cfg):
        self.g = g
        self.root = g.start
        self.table = g.by_lhs()
        self.mins = cfg_min_yield(g)

    def expand(self, label):
        for p in self.table.get(label, ()):
            kids = tuple(Leaf(s) if s in self.g.terminals else s for s in p.rhs)
            yield Expansion(kids, 0, concat)

    def size(self, label) -> int:
        return 1

    def min_yield(self, label) -> int:
        return self.mins.get(label, BIG)


def pda_min_pop(transitions: Iterable, symbols) -> dict[str, int]:
    """Lower bound on the terminals scanned while popping each symbol (states ignored)."""
    trans = list(transitions)
    best = {s: BIG for s in symbols}
    changed = True
    while changed:
        changed = False
        for t in trans:
            total = (1 if t.scan else 0) + sum(best.get(y, BIG) for y in t.push)
            if total < best.get(t.pop, BIG):
                best[t.pop] = total
                changed = True
    return best


class PdaSpace:
    def __init__(self, p: Pda):
        self.p = p
        self.root = PdaConfig(p.initial_state, (p.start_symbol,))
        self.table = p.by_pop()
        self.mins = pda_min_pop(p.transitions, p.stack_alphabet)

    def expand(self, label: PdaConfig):
        state, stack = label
        if not stack:
            if state == self.p.final_state:
                yield Expansion((), 0, _empty)
            return
        top, rest = stack[0], stack[1:]
        for t in self.table.get((state, top), ()):
            child = PdaConfig(t.target, t.push + rest)
            yield Expansion((child,), 1 if t.scan else 0, _prefix(t.scan), (t.scan,))

    def size(self, label: PdaConfig) -> int:
        return len(label.stack)

    def min_yield(self, label: PdaConfig) -> int:
        return min(BIG, sum(self.mins.get(s, BIG) for s in label.stack))


tree_space.register(Cfg, CfgSpace)
tree_space.register(Pda, PdaSpace)
terminal_alphabet.register(Cfg, lambda g: g.terminals)
terminal_alphabet.register(Pda, lambda p: p.input_alphabet)
kind_of.register(Cfg, lambda g: "cfg")
kind_of.register(Pda, lambda p: "pda")
tree_style.register(Pda, lambda p: "edges")


# ===================================================================== enumeration

@dataclass
class TreeMultiset:
    """Derivation trees for one string, with the truncation flag."""

    trees: list
    truncated: bool

    def __len__(self) -> int:
        return len(self.trees)

    def __iter__(self):
        return iter(self.trees)


def check_word(w, alphabet) -> tuple:
    w = word(w)
    bad = [s for s in w if s not in alphabet]
    if bad:
        raise TalforgeError(f"symbols outside the terminal alphabet: {sorted(set(bad))}")
    return w


def trees_for(system, w, budget: Optional[StepBudget] = None) -> TreeMultiset:
    """All derivation trees of ``system`` yielding ``w`` (any registered formalism)."""
    budget = budget or default_budget()
    w = check_word(w, terminal_alphabet(system))
    result = enumerate_space(tree_space(system), len(w), budget, lengths=[len(w)])
    return TreeMultiset(list(result.trees.get(w, [])), result.truncated)


def cf_derivation_trees(sys: Union[Cfg, Pda], w, budget: Optional[StepBudget] = None) -> TreeMultiset:
    if not isinstance(sys, (Cfg, Pda)):
        raise TalforgeError("cf_derivation_trees expects a Cfg or a Pda")
    return trees_for(sys, w, budget)


def enumerate_system(system, max_len: int, budget: Optional[StepBudget] = None) -> Enumeration:
    """All derivations with yield length at most ``max_len``."""
    return enumerate_space(tree_space(system), max_len, budget or default_budget())


def cf_enumerate(sys: Union[Cfg, Pda], max_len: int, budget: Optional[StepBudget] = None) -> Enumeration:
    return enumerate_system(sys, max_len, budget)
