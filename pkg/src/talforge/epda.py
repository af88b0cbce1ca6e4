"""Embedded pushdown automata (automata over a stack of stacks)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .cf import BIG
from .engine import Expansion, concat
from .registry import kind_of, terminal_alphabet, tree_space, tree_style
from .symbols import EPS, NotNormalFormError, TalforgeError, ValidationError, compose, fresh


@dataclass(frozen=True)
class EpdaTransition:
    """``source, [pop ..] -scan-> target, above [push ..] below``.

    ``push`` None encodes the popping form ``source, [pop] -scan-> target, eps``
    that removes a whole one-symbol inner stack.  ``above`` and ``below`` are
    tuples of fresh inner stacks (each a tuple of symbols, top first) placed
    above and below the rewritten inner stack.
    """

    source: str
    pop: str
    scan: str
    target: str
    push: Optional[tuple] = ()
    above: tuple = ()
    below: tuple = ()

    def __post_init__(self):
        if self.push is not None:
            object.__setattr__(self, "push", tuple(self.push))
        object.__setattr__(self, "above", tuple(tuple(s) for s in self.above))
        object.__setattr__(self, "below", tuple(tuple(s) for s in self.below))

    @property
    def pops_stack(self) -> bool:
        return self.push is None

    def render(self) -> str:
        scan = f'"{self.scan}"' if self.scan else "eps"
        if self.push is None:
            return f"{self.source} , [ {self.pop} ] -> {self.target} , eps @ {scan}"
        stacks = [f"[ {' '.join(s)} ]" if s else "[ ]" for s in self.above]
        stacks.append(f"[ {' '.join(self.push + ('..',))} ]")
        stacks += [f"[ {' '.join(s)} ]" if s else "[ ]" for s in self.below]
        return f"{self.source} , [ {self.pop} .. ] -> {self.target} , {' '.join(stacks)} @ {scan}"


@dataclass(frozen=True)
class Epda:
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
        trans = tuple(t if isinstance(t, EpdaTransition) else EpdaTransition(*t) for t in self.transitions)
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
            syms = [t.pop, *(t.push or ())] + [x for st in t.above + t.below for x in st]
            for s in syms:
                if s not in self.stack_alphabet:
                    problems.append(f"transition {i}: undeclared stack symbol {s!r}")
            if t.scan and t.scan not in self.input_alphabet:
                problems.append(f"transition {i}: undeclared input symbol {t.scan!r}")
            if t.push is None and (t.above or t.below):
                problems.append(f"transition {i}: a stack-popping transition cannot insert stacks")
        if problems:
            raise ValidationError(problems)

    def by_pop(self) -> dict[tuple[str, str], list[EpdaTransition]]:
        table: dict[tuple[str, str], list[EpdaTransition]] = {}
        for t in self.transitions:
            table.setdefault((t.source, t.pop), []).append(t)
        return table

    def transition_type(self, t: EpdaTransition) -> Optional[int]:
        """1, 2 or 3 for the normal-form transition types, else None."""
        if t.push is None:
            return 3
        if t.scan:
            return None
        fresh_only = all(s == (self.start_symbol,) for s in t.above + t.below)
        if not t.push and fresh_only:
            return 1
        if not t.above and not t.below and t.source == t.target:
            return 2
        return None

    def is_normal_form(self) -> bool:
        return all(self.transition_type(t) is not None for t in self.transitions)


class EpdaConfig(NamedTuple):
    state: str
    stacks: tuple  # inner stacks, top first; each a tuple of symbols, top first

    def render(self) -> str:
        inner = " ".join(f"[{' '.join(s)}]" for s in self.stacks)
        return f"{self.state}, {inner}" if inner else f"{self.state}, eps"


def epda_step(c: EpdaConfig, t: EpdaTransition) -> EpdaConfig:
    """Apply ``t`` to configuration ``c``; only the top inner stack is inspected."""
    if c.state != t.source:
        raise TalforgeError(f"state {c.state} does not match transition source {t.source}")
    if not c.stacks or not c.stacks[0]:
        raise TalforgeError("no symbol on top of the top inner stack")
    top, rest = c.stacks[0], c.stacks[1:]
    if top[0] != t.pop:
        raise TalforgeError(f"top symbol {top[0]} does not match {t.pop}")
    if t.push is None:
        if len(top) != 1:
            raise TalforgeError("a stack-popping transition needs a one-symbol inner stack")
        return EpdaConfig(t.target, rest)
    return EpdaConfig(t.target, t.above + (t.push + top[1:],) + t.below + rest)


def _min_pop(e: Epda) -> dict[str, int]:
    best = {s: BIG for s in e.stack_alphabet}
    changed = True
    while changed:
        changed = False
        for t in e.transitions:
            total = 1 if t.scan else 0
            for s in (t.push or ()) + tuple(x for st in t.above + t.below for x in st):
                total += best[s]
            if total < best[t.pop]:
                best[t.pop] = total
                changed = True
    return best


def _prefix(sym: str):
    if not sym:
        return concat
    head = (sym,)
    return lambda ys: head + ys[0]


def _empty(_ys):
    return ()


class EpdaSpace:
    def __init__(self, e: Epda):
        self.e = e
        self.root = EpdaConfig(e.initial_state, ((e.start_symbol,),))
        self.table = e.by_pop()
        self.mins = _min_pop(e)

    def expand(self, label: EpdaConfig):
        if not label.stacks:
            if label.state == self.e.final_state:
                yield Expansion((), 0, _empty)
            return
        top = label.stacks[0]
        if not top:
            return
        for t in self.table.get((label.state, top[0]), ()):
            if t.push is None and len(top) != 1:
                continue
            child = epda_step(label, t)
            yield Expansion((child,), 1 if t.scan else 0, _prefix(t.scan), (t.scan,))

    def size(self, label: EpdaConfig) -> int:
        return sum(1 + len(s) for s in label.stacks)

    def min_yield(self, label: EpdaConfig) -> int:
        return min(BIG, sum(self.mins[x] for s in label.stacks for x in s))


tree_space.register(Epda, EpdaSpace)
terminal_alphabet.register(Epda, lambda e: e.input_alphabet)
kind_of.register(Epda, lambda e: "epda")
tree_style.register(Epda, lambda e: "edges")


def epda_normal_form(e: Epda) -> Epda:
    """Split transitions into the three normal-form types.

    A transition that does several things at once is broken up with fresh
    marker symbols and fresh states: the popped symbol is replaced in place
    (same state) by markers followed by the pushed string; one marker drives
    the scan through a fresh ``[S]`` stack rewritten to a one-symbol stack and
    popped, the other performs the stack insertion and the state change.
    Inserted stacks other than ``[S]`` cannot be expressed in normal form and
    are rejected.
    """
    if e.is_normal_form():
        return e
    start_sym = e.start_symbol
    taken = set(e.states) | set(e.stack_alphabet)
    states = set(e.states)
    syms = set(e.stack_alphabet)
    out: list[EpdaTransition] = []
    for i, t in enumerate(e.transitions):
        if e.transition_type(t) is not None:
            out.append(t)
            continue
        if any(s != (start_sym,) for s in t.above + t.below):
            raise NotNormalFormError(
                f"transition {i} inserts an inner stack other than [{start_sym}]; no normal form exists")
        markers = []
        if t.scan:
            m_scan = fresh(compose("M", str(i), "scan"), taken)
            markers.append(m_scan)
        m_move = fresh(compose("M", str(i)), taken)
        markers.append(m_move)
        syms.update(markers)
        out.append(EpdaTransition(t.source, t.pop, EPS, t.source, tuple(markers) + t.push))
        here = t.source
        if t.scan:
            s1 = fresh(compose(t.source, str(i), "1"), taken)
            s2 = fresh(compose(t.source, str(i), "2"), taken)
            tsym = fresh(compose("T", str(i)), taken)
            states.update((s1, s2))
            syms.add(tsym)
            out.append(EpdaTransition(here, m_scan, EPS, s1, (), ((start_sym,),), ()))
            out.append(EpdaTransition(s1, start_sym, EPS, s1, (tsym,)))
            out.append(EpdaTransition(s1, tsym, t.scan, s2, None))
            here = s2
        out.append(EpdaTransition(here, m_move, EPS, t.target, (), t.above, t.below))
    result = Epda(states, e.input_alphabet, syms, tuple(out), e.initial_state, start_sym, e.final_state)
    assert result.is_normal_form()
    return result


def require_epda_normal_form(e: Epda) -> None:
    bad = [i for i, t in enumerate(e.transitions) if e.transition_type(t) is None]
    if bad:
        raise NotNormalFormError(f"EPDA transitions not in normal form: {bad}")
