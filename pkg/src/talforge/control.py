"""Labeled-distinguished systems and two-level (controller/controllee) systems."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .budget import StepBudget, default_budget
from .cf import (BIG, Cfg, Pda, PdaTransition, Production, TreeMultiset, cfg_min_yield,
                 cfg_normal_form, check_word, enumerate_system, pda_min_pop, pda_normal_form,
                 triple)
from .engine import Expansion, Leaf, concat, enumerate_space
from .registry import kind_of, terminal_alphabet, tree_space, tree_style
from .symbols import (EPS, HOLE, NotNormalFormError, TalforgeError, ValidationError, compose,
                      fresh)
from .trees import DerivationTree, plug, plug_chain


# ===================================================================== LD systems

def _marks(marks) -> tuple:
    if marks is None:
        return ()
    if isinstance(marks, int):
        return (marks,)
    return tuple(marks)


@dataclass(frozen=True)
class LdProduction:
    label: str
    lhs: str
    rhs: tuple[str, ...] = ()
    marks: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rhs", tuple(self.rhs))
        object.__setattr__(self, "marks", _marks(self.marks))

    @property
    def dist(self) -> Optional[int]:
        return self.marks[0] if self.marks else None

    def render(self) -> str:
        body = " ".join(("^" if i in self.marks else "") + s for i, s in enumerate(self.rhs))
        return f"{self.label}: {self.lhs} -> {body or 'eps'}"


@dataclass(frozen=True)
class LdCfg:
    nonterminals: frozenset
    terminals: frozenset
    labels: frozenset
    productions: tuple
    start: str

    def __post_init__(self):
        for name in ("nonterminals", "terminals", "labels"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        prods = tuple(p if isinstance(p, LdProduction) else LdProduction(*p) for p in self.productions)
        object.__setattr__(self, "productions", prods)

    def by_label(self) -> dict[str, list[LdProduction]]:
        table: dict[str, list[LdProduction]] = {}
        for p in self.productions:
            table.setdefault(p.label, []).append(p)
        return table

    def is_normal_form(self) -> bool:
        for p in self.productions:
            if all(s in self.nonterminals for s in p.rhs):
                continue
            if len(p.rhs) == 1 and not p.marks:
                continue
            return False
        return True

    def as_cfg(self) -> Cfg:
        """The underlying CFG (labels and marks dropped)."""
        return Cfg(self.nonterminals, self.terminals,
                   tuple(Production(p.lhs, p.rhs) for p in self.productions), self.start)


@dataclass(frozen=True)
class LdPdaTransition:
    label: str
    source: str
    pop: str
    scan: str
    target: str
    push: tuple[str, ...] = ()
    marks: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "push", tuple(self.push))
        object.__setattr__(self, "marks", _marks(self.marks))

    @property
    def dist(self) -> Optional[int]:
        return self.marks[0] if self.marks else None

    def render(self) -> str:
        body = " ".join(("^" if i in self.marks else "") + s for i, s in enumerate(self.push))
        scan = f'"{self.scan}"' if self.scan else "eps"
        return f"{self.label}: {self.source} , {self.pop} -> {self.target} , {body or 'eps'} @ {scan}"


@dataclass(frozen=True)
class LdPda:
    states: frozenset
    input_alphabet: frozenset
    stack_alphabet: frozenset
    labels: frozenset
    transitions: tuple
    initial_state: str
    start_symbol: str
    final_state: str

    def __post_init__(self):
        for name in ("states", "input_alphabet", "stack_alphabet", "labels"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        trans = tuple(t if isinstance(t, LdPdaTransition) else LdPdaTransition(*t) for t in self.transitions)
        object.__setattr__(self, "transitions", trans)

    def by_label(self) -> dict[str, list[LdPdaTransition]]:
        table: dict[str, list[LdPdaTransition]] = {}
        for t in self.transitions:
            table.setdefault(t.label, []).append(t)
        return table

    def is_normal_form(self) -> bool:
        return all(not (t.scan and t.push) for t in self.transitions)

    def as_pda(self) -> Pda:
        return Pda(self.states, self.input_alphabet, self.stack_alphabet,
                   tuple(PdaTransition(t.source, t.pop, t.scan, t.target, t.push) for t in self.transitions),
                   self.initial_state, self.start_symbol, self.final_state)


def ld_violations(sys: Union[LdCfg, LdPda]) -> list[str]:
    problems: list[str] = []
    seen: dict[str, int] = {}
    if isinstance(sys, LdCfg):
        rules = sys.productions
        symbols = sys.nonterminals
        if sys.start not in sys.nonterminals:
            problems.append(f"start symbol {sys.start!r} is not a nonterminal")
        clash = sys.nonterminals & sys.terminals
        if clash:
            problems.append(f"alphabet clash between nonterminals and terminals: {sorted(clash)}")
    elif isinstance(sys, LdPda):
        rules = sys.transitions
        symbols = sys.stack_alphabet
        for s in (sys.initial_state, sys.final_state):
            if s not in sys.states:
                problems.append(f"undeclared state {s!r}")
        if sys.start_symbol not in sys.stack_alphabet:
            problems.append(f"initial stack symbol {sys.start_symbol!r} is not a stack symbol")
    else:
        raise TalforgeError("ld_validate expects an LdCfg or an LdPda")
    for i, r in enumerate(rules):
        if r.label in seen:
            problems.append(f"duplicate label {r.label!r} (rules {seen[r.label]} and {i})")
        else:
            seen[r.label] = i
        if r.label not in sys.labels:
            problems.append(f"rule {i}: undeclared label {r.label!r}")
        if len(r.marks) > 1:
            problems.append(f"rule {i} ({r.label}): two distinguished symbols")
        if isinstance(sys, LdCfg):
            body = r.rhs
            if r.lhs not in sys.nonterminals:
                problems.append(f"rule {i} ({r.label}): undeclared lhs {r.lhs!r}")
            for s in body:
                if s not in sys.nonterminals and s not in sys.terminals:
                    problems.append(f"rule {i} ({r.label}): undeclared symbol {s!r}")
        else:
            body = r.push
            for s in (r.source, r.target):
                if s not in sys.states:
                    problems.append(f"rule {i} ({r.label}): undeclared state {s!r}")
            for s in (r.pop, *body):
                if s not in sys.stack_alphabet:
                    problems.append(f"rule {i} ({r.label}): undeclared stack symbol {s!r}")
            if r.scan and r.scan not in sys.input_alphabet:
                problems.append(f"rule {i} ({r.label}): undeclared input symbol {r.scan!r}")
        for m in r.marks:
            if not 0 <= m < len(body) or body[m] not in symbols:
                problems.append(f"rule {i} ({r.label}): distinguished mark on a non-nonterminal")
    clash = sys.labels & (symbols | (sys.terminals if isinstance(sys, LdCfg) else sys.input_alphabet))
    if clash:
        problems.append(f"labels clash with other symbols: {sorted(clash)}")
    return problems


def ld_validate(sys: Union[LdCfg, LdPda]):
    """Check every labeled-distinguished invariant; return ``sys`` or raise."""
    problems = ld_violations(sys)
    if problems:
        raise ValidationError(problems)
    return sys


# ===================================================================== two-level systems

Controller = Union[Cfg, Pda]
Controllee = Union[LdCfg, LdPda]


@dataclass(frozen=True)
class TwoLevel:
    """A controller (CFG or PDA over labels) controlling an LD system."""

    controller: Controller
    controllee: Controllee
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not isinstance(self.controller, (Cfg, Pda)):
            raise TalforgeError("controller must be a Cfg or a Pda")
        if not isinstance(self.controllee, (LdCfg, LdPda)):
            raise TalforgeError("controllee must be an LdCfg or an LdPda")
        ld_validate(self.controllee)
        if controller_terminals(self.controller) != self.controllee.labels:
            raise ValidationError([
                "controller terminal alphabet must equal the controllee label set: "
                f"{sorted(controller_terminals(self.controller))} vs {sorted(self.controllee.labels)}"])

    @property
    def pairing(self) -> str:
        a = "CFG" if isinstance(self.controller, Cfg) else "PDA"
        b = "CFG" if isinstance(self.controllee, LdCfg) else "PDA"
        return f"{a}∘{b}"

    @property
    def terminals(self) -> frozenset:
        c = self.controllee
        return c.terminals if isinstance(c, LdCfg) else c.input_alphabet

    def is_normal_form(self) -> bool:
        return self.controller.is_normal_form() and self.controllee.is_normal_form()


def controller_terminals(c: Controller) -> frozenset:
    return c.terminals if isinstance(c, Cfg) else c.input_alphabet


def add_controller_words(c: Controller, words: Sequence[str]) -> Controller:
    """Let the controller also accept each single-label word in ``words``."""
    if not words:
        return c
    if isinstance(c, Cfg):
        prods = c.productions + tuple(Production(c.start, (w,)) for w in words)
        return Cfg(c.nonterminals, c.terminals | set(words), prods, c.start, c.fresh)
    trans = c.transitions + tuple(PdaTransition(c.initial_state, c.start_symbol, w, c.final_state, ())
                                  for w in words)
    return Pda(c.states, c.input_alphabet | set(words), c.stack_alphabet, trans,
               c.initial_state, c.start_symbol, c.final_state)


def relabel_controller(c: Controller, copies: dict[str, list[str]]) -> Controller:
    """Replace each label ``l`` the controller scans by every label in ``copies[l]``."""
    if all(v == [k] for k, v in copies.items()):
        return c
    if isinstance(c, Cfg):
        prods = []
        for p in c.productions:
            hits = [i for i, s in enumerate(p.rhs) if s in c.terminals]
            if not hits:
                prods.append(p)
                continue
            options = [copies.get(s, [s]) if s in c.terminals else [s] for s in p.rhs]
            for combo in itertools.product(*options):
                prods.append(Production(p.lhs, tuple(combo)))
        terms = set()
        for t in c.terminals:
            terms.update(copies.get(t, [t]))
        return Cfg(c.nonterminals, terms, tuple(prods), c.start, c.fresh)
    trans = []
    for t in c.transitions:
        if t.scan:
            for new in copies.get(t.scan, [t.scan]):
                trans.append(PdaTransition(t.source, t.pop, new, t.target, t.push))
        else:
            trans.append(t)
    terms = set()
    for t in c.input_alphabet:
        terms.update(copies.get(t, [t]))
    return Pda(c.states, terms, c.stack_alphabet, tuple(trans), c.initial_state, c.start_symbol,
               c.final_state)


def ld_normal_form(sys: Controllee) -> tuple[Controllee, list[str]]:
    """Normal form for an LD system.

    Returns the new system and the fresh single-label control words the
    controller must additionally accept.  The original label stays on the
    piece that performs the distinguished push; each split-off terminal gets
    its own rule whose label is the original label plus a suffix.
    """
    if sys.is_normal_form():
        return sys, []
    words: list[str] = []
    if isinstance(sys, LdCfg):
        taken = set(sys.nonterminals) | set(sys.terminals) | set(sys.labels)
        prods: list[LdProduction] = []
        extra: list[LdProduction] = []
        new_nts: list[str] = []
        for i, p in enumerate(sys.productions):
            if all(s in sys.nonterminals for s in p.rhs) or (len(p.rhs) == 1 and not p.marks):
                prods.append(p)
                continue
            rhs = []
            for j, s in enumerate(p.rhs):
                if s in sys.terminals:
                    tag = s if s.isidentifier() else f"t{j}"
                    nt = fresh(compose("T", tag, f"{i}.{j}"), taken)
                    lab = fresh(compose(p.label, f"t{j}"), taken)
                    new_nts.append(nt)
                    words.append(lab)
                    extra.append(LdProduction(lab, nt, (s,)))
                    rhs.append(nt)
                else:
                    rhs.append(s)
            prods.append(LdProduction(p.label, p.lhs, tuple(rhs), p.marks))
        out = LdCfg(sys.nonterminals | set(new_nts), sys.terminals, sys.labels | set(words),
                    tuple(prods + extra), sys.start)
        return ld_validate(out), words
    taken = set(sys.stack_alphabet) | set(sys.states) | set(sys.labels)
    trans: list[LdPdaTransition] = []
    new_syms: list[str] = []
    for i, t in enumerate(sys.transitions):
        if not (t.scan and t.push):
            trans.append(t)
            continue
        tag = t.scan if t.scan.isidentifier() else "t"
        sym = fresh(compose("T", tag, str(i)), taken)
        lab = fresh(compose(t.label, "t"), taken)
        new_syms.append(sym)
        words.append(lab)
        trans.append(LdPdaTransition(t.label, t.source, t.pop, EPS, t.target, (sym,) + t.push,
                                     tuple(m + 1 for m in t.marks)))
        trans.append(LdPdaTransition(lab, t.target, sym, t.scan, t.target, ()))
    out = LdPda(sys.states, sys.input_alphabet, sys.stack_alphabet | set(new_syms),
                sys.labels | set(words), tuple(trans), sys.initial_state, sys.start_symbol,
                sys.final_state)
    return ld_validate(out), words


def normalize_two_level(sys: TwoLevel) -> TwoLevel:
    """Bring controller and controllee into normal form (idempotent)."""
    if sys.is_normal_form():
        return sys
    ll, words = ld_normal_form(sys.controllee)
    ctrl = add_controller_words(sys.controller, words)
    ctrl = cfg_normal_form(ctrl) if isinstance(ctrl, Cfg) else pda_normal_form(ctrl)
    return TwoLevel(ctrl, ll, sys.notes)


def ld_pda_one_state(sys: TwoLevel, state: str = "q") -> TwoLevel:
    """Make an LD-PDA controllee single-state, relabelling the controller to match.

    A transition that pushes k symbols is copied once per choice of k
    intermediate states; each copy gets its own label and the controller
    accepts any copy wherever it accepted the original.
    """
    ll = sys.controllee
    if not isinstance(ll, LdPda):
        raise TalforgeError("controllee is not an LD-PDA")
    states = sorted(ll.states)
    if len(states) == 1 and states[0] == state:
        return sys
    taken = set(ll.labels)
    trans: list[LdPdaTransition] = []
    copies: dict[str, list[str]] = {}
    for t in ll.transitions:
        k = len(t.push)
        if k == 0:
            trans.append(LdPdaTransition(t.label, state, triple(t.pop, t.source, t.target), t.scan,
                                         state, (), ()))
            copies[t.label] = [t.label]
            continue
        choices = list(itertools.product(states, repeat=k))
        names = []
        for ss in choices:
            chain = (t.target,) + ss
            push = tuple(triple(b, chain[i], chain[i + 1]) for i, b in enumerate(t.push))
            lab = t.label if len(choices) == 1 else fresh(compose(t.label, *ss), taken)
            names.append(lab)
            trans.append(LdPdaTransition(lab, state, triple(t.pop, t.source, ss[-1]), t.scan, state,
                                         push, t.marks))
        copies[t.label] = names
    syms = {triple(a, s, r) for a in ll.stack_alphabet for s in states for r in states}
    labels = {n for v in copies.values() for n in v} | (ll.labels - set(copies))
    for lab in ll.labels - set(copies):
        copies[lab] = [lab]
    new_ll = LdPda({state}, ll.input_alphabet, syms, labels, tuple(trans), state,
                   triple(ll.start_symbol, ll.initial_state, ll.final_state), state)
    return TwoLevel(relabel_controller(sys.controller, copies), new_ll,
                    sys.notes + ("controllee made single-state",))


# ===================================================================== node labels

class TriLabel(NamedTuple):
    """``A<X|Z>``: controller nonterminal A over controllee symbols X and Z (None = ⊥)."""

    ctrl: str
    top: str
    bottom: Optional[str]

    def render(self) -> str:
        return compose(self.ctrl, self.top, self.bottom)


class PdaCfgNode(NamedTuple):
    """``X[q, γ]``: controllee nonterminal X carrying a controller configuration."""

    symbol: str
    state: str
    stack: tuple

    def render(self) -> str:
        return f"{self.symbol}[{self.state},{' '.join(self.stack)}]"


class CfgPdaNode(NamedTuple):
    """``(q, Ψ)`` with Ψ a string of tri-labels and holes."""

    state: str
    items: tuple

    def render(self) -> str:
        body = " ".join(i if i == HOLE else i.render() for i in self.items)
        return f"({self.state}, {body})"


class PdaPdaNode(NamedTuple):
    """``q, X1[s1,γ1] ... Xn[sn,γn]``."""

    state: str
    entries: tuple

    def render(self) -> str:
        body = " ".join(f"{x}[{s},{' '.join(g)}]" for x, s, g in self.entries)
        return f"{self.state}, {body}"


class NodeExpansion(NamedTuple):
    case: str
    children: tuple
    scanned: str
    combine: object


def _template(rhs: Sequence[str], dist: Optional[int], child_of) -> tuple[tuple, object]:
    """Children and yield rule for a controllee rhs with an optional hole."""
    kids = []
    slots = []
    for i, s in enumerate(rhs):
        if i == dist:
            slots.append(None)
            continue
        slots.append(len(kids))
        kids.append(child_of(s))

    def combine(ys, slots=tuple(slots)):
        out: tuple = ()
        for slot in slots:
            out += (HOLE,) if slot is None else ys[slot]
        return out

    return tuple(kids), combine


def _hole(_ys):
    return (HOLE,)


def _empty(_ys):
    return ()


def _prefix(sym: str):
    if not sym:
        return concat
    head = (sym,)
    return lambda ys: head + ys[0]


def _starred(stars: int, scanned: str, inner):
    head = (HOLE,) * stars + ((scanned,) if scanned else ())
    if not head:
        return inner
    return lambda ys: head + inner(ys)


def pair_relation(steps, symbols) -> tuple[dict, dict]:
    """Least fixpoint of which tagged controller symbols ``A<x|z>`` can be used up.

    ``steps`` yields ``(A, seeds, gamma)``: replacing A while controllee
    symbol x is in force leaves y in force for ``gamma`` for each ``(x, y)``
    in ``seeds`` (y None ends the controllee stack, so gamma must be empty).
    Returns the relation ``A -> {(x, z)}`` and a successor table
    ``(A, x) -> [z, ..]`` without the None entries.
    """
    steps = [(a, frozenset(seeds), tuple(gamma)) for a, seeds, gamma in steps]
    rel: dict[str, set] = {}

    def through(ys: set, gamma: tuple) -> set:
        cur = ys
        for b in gamma:
            step: dict = {}
            for x, z in rel.get(b, ()):
                step.setdefault(x, []).append(z)
            cur = {z for y in cur if y is not None for z in step.get(y, ())}
            if not cur:
                break
        return cur

    changed = True
    while changed:
        changed = False
        for a, seeds, gamma in steps:
            have = rel.setdefault(a, set())
            for x, y in seeds:
                for z in through({y}, gamma):
                    if (x, z) not in have:
                        have.add((x, z))
                        changed = True
    succ: dict = {}
    for a, pairs in rel.items():
        for x, z in pairs:
            if z is not None:
                succ.setdefault((a, x), []).append(z)
    for v in succ.values():
        v.sort()
    return rel, succ


def pair_chains(rel: dict, succ: dict, gamma: Sequence[str], first: str, last: Optional[str]):
    """Every chain ``first = X0, .., Xk = last`` with each ``(X_{i-1}, X_i)`` in ``rel[gamma[i-1]]``."""
    k = len(gamma)
    if k == 0:
        if first == last:
            yield (first,)
        return
    stack = [(first,)]
    while stack:
        chain = stack.pop()
        i = len(chain) - 1
        if i == k - 1:
            if (chain[-1], last) in rel.get(gamma[i], ()):
                yield chain + (last,)
            continue
        for y in reversed(succ.get((gamma[i], chain[-1]), ())):
            stack.append(chain + (y,))


class _Space:
    """Shared plumbing for the four pairings."""

    style = "leaves"

    def __init__(self, sys: TwoLevel):
        if not is_ready(sys):
            raise NotNormalFormError("the CFG controller must be in normal form "
                                     "(and a PDA controllee it controls single-state)")
        self.sys = sys
        self.ctrl = sys.controller
        self.ll = sys.controllee
        self.rules = self.ll.by_label()
        if isinstance(self.ll, LdCfg):
            self.ll_min = cfg_min_yield(self.ll.as_cfg())
            self.ll_nts = sorted(self.ll.nonterminals)
        else:
            self.ll_min = pda_min_pop(self.ll.transitions, self.ll.stack_alphabet)
            self.ll_nts = sorted(self.ll.stack_alphabet)
        if isinstance(self.ctrl, Cfg):
            self.ctrl_rules = self.ctrl.by_lhs()
            self.S2 = self.ctrl.start
        else:
            self.ctrl_rules = self.ctrl.by_pop()
            self.S2 = self.ctrl.start_symbol

    def chains(self, rhs: Sequence[str], ll_sym: str, ll_exit: Optional[str]):
        """Controllee symbols X = X0, X1, .., Xk = Z threading a case-(c) split of ``rhs``.

        Only chains where every ``B_i<X_{i-1}|X_i>`` can derive something are
        produced; the others would be dead children.
        """
        if not hasattr(self, "_rel"):
            self._rel, self._succ = pair_relation(self.ctrl_steps(), self.ll_nts)
        return pair_chains(self._rel, self._succ, rhs, ll_sym, ll_exit)

    def ctrl_steps(self):
        base: dict[str, set] = {}
        for lab, rules in self.rules.items():
            if isinstance(self.ll, LdCfg):
                base[lab] = {(r.lhs, r.rhs[r.dist] if r.dist is not None else None) for r in rules}
            else:
                base[lab] = {(r.pop, r.push[r.dist] if r.dist is not None else None) for r in rules}
        ident = {(x, x) for x in self.ll_nts}
        for p in self.ctrl.productions:
            if len(p.rhs) == 1 and p.rhs[0] in self.ctrl.terminals:
                yield p.lhs, base.get(p.rhs[0], set()), ()
            else:
                yield p.lhs, ident, p.rhs

    def expand(self, label):
        for item in self.cases(label):
            yield Expansion(item.children, 1 if item.scanned else 0, item.combine,
                            (item.scanned,) if self.style == "edges" else None)

    def ll_leaf(self, s: str):
        return Leaf(s)


class CfgCfgSpace(_Space):
    style = "plug"

    def __init__(self, sys: TwoLevel):
        super().__init__(sys)
        self.root = TriLabel(self.S2, self.ll.start, None)

    def child(self, s: str):
        return Leaf(s) if s in self.ll.terminals else TriLabel(self.S2, s, None)

    def cases(self, label: TriLabel):
        ctrl_sym, ll_sym, ll_exit = label
        for p in self.ctrl_rules.get(ctrl_sym, ()):
            if len(p.rhs) == 1 and p.rhs[0] in self.ctrl.terminals:
                for r in self.rules.get(p.rhs[0], ()):
                    if r.lhs != ll_sym:
                        continue
                    d = r.dist
                    if d is None:
                        if ll_exit is not None:
                            continue
                        kids, comb = _template(r.rhs, None, self.child)
                        yield NodeExpansion("a", kids, EPS, comb)
                    else:
                        if ll_exit is None or r.rhs[d] != ll_exit:
                            continue
                        kids, comb = _template(r.rhs, d, self.child)
                        yield NodeExpansion("b", kids, EPS, comb)
                continue
            k = len(p.rhs)
            if k == 0:
                if ll_exit is not None and ll_sym == ll_exit:
                    yield NodeExpansion("c", (), EPS, _hole)
                continue
            for chain in self.chains(p.rhs, ll_sym, ll_exit):
                kids = tuple(TriLabel(b, chain[i], chain[i + 1]) for i, b in enumerate(p.rhs))
                yield NodeExpansion("c", kids, EPS, plug_chain)

    def size(self, label) -> int:
        return 1

    def min_yield(self, label: TriLabel) -> int:
        return self.ll_min.get(label.top, BIG) if label.bottom is None else 0


class PdaCfgSpace(_Space):
    def __init__(self, sys: TwoLevel):
        super().__init__(sys)
        c = self.ctrl
        self.q0, self.qf = c.initial_state, c.final_state
        self.root = PdaCfgNode(self.ll.start, self.q0, (self.S2,))

    def child(self, s: str):
        return Leaf(s) if s in self.ll.terminals else PdaCfgNode(s, self.q0, (self.S2,))

    def cases(self, label: PdaCfgNode):
        ll_sym, q, stack = label
        if not stack:
            return
        ctrl_sym, beta = stack[0], stack[1:]
        for t in self.ctrl_rules.get((q, ctrl_sym), ()):
            if not t.scan:
                yield NodeExpansion("c", (PdaCfgNode(ll_sym, t.target, t.push + beta),), EPS, concat)
                continue
            for r in self.rules.get(t.scan, ()):
                if r.lhs != ll_sym:
                    continue
                d = r.dist
                if d is None:
                    if t.target != self.qf or t.push or beta:
                        continue
                    kids, comb = _template(r.rhs, None, self.child)
                    yield NodeExpansion("a", kids, EPS, comb)
                else:
                    inherit = PdaCfgNode(r.rhs[d], t.target, t.push + beta)
                    kids = tuple(inherit if i == d else self.child(s) for i, s in enumerate(r.rhs))
                    yield NodeExpansion("b", kids, EPS, concat)

    def size(self, label) -> int:
        return len(label.stack)

    def min_yield(self, label: PdaCfgNode) -> int:
        return self.ll_min.get(label.symbol, BIG)


class CfgPdaSpace(_Space):
    style = "edges"

    def __init__(self, sys: TwoLevel):
        if len(sys.controllee.states) != 1:
            raise TalforgeError("CFG∘PDA derivations need a single-state controllee")
        super().__init__(sys)
        self.q = self.ll.initial_state
        self.root = CfgPdaNode(self.q, (TriLabel(self.S2, self.ll.start_symbol, None),))
        self.by_pop: dict[tuple[str, str], list[LdPdaTransition]] = {}

    def cases(self, label: CfgPdaNode):
        q, items = label
        stars = 0
        while stars < len(items) and items[stars] == HOLE:
            stars += 1
        if stars == len(items):
            yield NodeExpansion("leaf", (), EPS, (lambda ys, h=(HOLE,) * stars: h))
            return
        ctrl_sym, ll_sym, ll_exit = items[stars]
        rest = items[stars + 1 :]
        for p in self.ctrl_rules.get(ctrl_sym, ()):
            if len(p.rhs) == 1 and p.rhs[0] in self.ctrl.terminals:
                for r in self.rules.get(p.rhs[0], ()):
                    if r.pop != ll_sym:
                        continue
                    d = r.dist
                    if d is None:
                        if ll_exit is not None:
                            continue
                        new = tuple(TriLabel(self.S2, y, None) for y in r.push)
                        yield NodeExpansion("a", (CfgPdaNode(q, new + rest),), r.scan,
                                            _starred(stars, r.scan, concat))
                    else:
                        if ll_exit is None or r.push[d] != ll_exit:
                            continue
                        new = tuple(HOLE if i == d else TriLabel(self.S2, y, None)
                                    for i, y in enumerate(r.push))
                        yield NodeExpansion("b", (CfgPdaNode(q, new + rest),), r.scan,
                                            _starred(stars, r.scan, concat))
                continue
            k = len(p.rhs)
            if k == 0:
                if ll_exit is not None and ll_sym == ll_exit:
                    yield NodeExpansion("c", (CfgPdaNode(q, (HOLE,) + rest),), EPS,
                                        _starred(stars, EPS, concat))
                continue
            for chain in self.chains(p.rhs, ll_sym, ll_exit):
                kids = [CfgPdaNode(q, (TriLabel(p.rhs[0], chain[0], chain[1]),) + rest)]
                kids += [CfgPdaNode(q, (TriLabel(b, chain[i], chain[i + 1]),))
                         for i, b in enumerate(p.rhs) if i > 0]
                yield NodeExpansion("c", tuple(kids), EPS, _starred(stars, EPS, plug_chain))

    def expand(self, label):
        # (c) has several children, so edge annotations only make sense on unary steps
        for item in self.cases(label):
            edges = (item.scanned,) if len(item.children) == 1 else None
            yield Expansion(item.children, 1 if item.scanned else 0, item.combine, edges)

    def size(self, label) -> int:
        return len(label.items)

    def min_yield(self, label: CfgPdaNode) -> int:
        total = 0
        for it in label.items:
            if it != HOLE and it.bottom is None:
                total += self.ll_min.get(it.top, BIG)
        return min(total, BIG)


class PdaPdaSpace(_Space):
    style = "edges"

    def __init__(self, sys: TwoLevel):
        super().__init__(sys)
        c = self.ctrl
        self.q0, self.qf = c.initial_state, c.final_state
        self.root = PdaPdaNode(self.ll.initial_state, ((self.ll.start_symbol, self.q0, (self.S2,)),))
        self.ll_by_pop: dict[tuple[str, str, str], list[LdPdaTransition]] = {}
        for t in self.ll.transitions:
            self.ll_by_pop.setdefault((t.label, t.source, t.pop), []).append(t)

    def cases(self, label: PdaPdaNode):
        state, entries = label
        if not entries:
            if state == self.ll.final_state:
                yield NodeExpansion("leaf", (), EPS, _empty)
            return
        (ll_sym, s, stack), rest = entries[0], entries[1:]
        if not stack:
            return
        ctrl_sym, beta = stack[0], stack[1:]
        for t in self.ctrl_rules.get((s, ctrl_sym), ()):
            if not t.scan:
                child = PdaPdaNode(state, ((ll_sym, t.target, t.push + beta),) + rest)
                yield NodeExpansion("c", (child,), EPS, concat)
                continue
            for r in self.ll_by_pop.get((t.scan, state, ll_sym), ()):
                d = r.dist
                if d is None:
                    if t.target != self.qf or t.push or beta:
                        continue
                    new = tuple((y, self.q0, (self.S2,)) for y in r.push)
                    case = "a"
                else:
                    new = tuple((y, t.target, t.push + beta) if i == d else (y, self.q0, (self.S2,))
                                for i, y in enumerate(r.push))
                    case = "b"
                yield NodeExpansion(case, (PdaPdaNode(r.target, new + rest),), r.scan, _prefix(r.scan))

    def size(self, label) -> int:
        return sum(1 + len(g) for _, _, g in label.entries)

    def min_yield(self, label: PdaPdaNode) -> int:
        return min(BIG, sum(self.ll_min.get(x, BIG) for x, _, _ in label.entries))


def two_level_space(sys: TwoLevel):
    sys = prepare(sys)
    if isinstance(sys.controller, Cfg):
        return CfgCfgSpace(sys) if isinstance(sys.controllee, LdCfg) else CfgPdaSpace(sys)
    return PdaCfgSpace(sys) if isinstance(sys.controllee, LdCfg) else PdaPdaSpace(sys)


def prepare(sys: TwoLevel) -> TwoLevel:
    """Make ``sys`` expandable.

    A CFG controller is brought into normal form.  PDA controllers and both
    kinds of controllee are expanded in their general form, so they are left
    alone; a PDA controllee under a CFG controller is made single-state.
    """
    if isinstance(sys.controller, Cfg) and not sys.controller.is_normal_form():
        sys = TwoLevel(cfg_normal_form(sys.controller), sys.controllee, sys.notes)
    if isinstance(sys.controller, Cfg) and isinstance(sys.controllee, LdPda) and len(sys.controllee.states) != 1:
        sys = ld_pda_one_state(sys)
    return sys


def is_ready(sys: TwoLevel) -> bool:
    if isinstance(sys.controller, Cfg):
        if not sys.controller.is_normal_form():
            return False
        if isinstance(sys.controllee, LdPda) and len(sys.controllee.states) != 1:
            return False
    return True


tree_space.register(TwoLevel, two_level_space)
terminal_alphabet.register(TwoLevel, lambda s: s.terminals)
kind_of.register(TwoLevel, lambda s: "twolevel")
tree_style.register(TwoLevel, lambda s: "edges" if isinstance(s.controllee, LdPda) else
                    ("plug" if isinstance(s.controller, Cfg) else "leaves"))


def expand_node(sys: TwoLevel, node) -> list[NodeExpansion]:
    """Every way the derivation-tree node ``node`` can be expanded.

    Each entry carries the case letter (a/b/c, or ``leaf`` for a completed
    automaton configuration), the children, the scanned terminal and the
    function that assembles the node's yield from the children's yields.
    """
    if isinstance(sys.controller, Cfg):
        space = CfgCfgSpace(sys) if isinstance(sys.controllee, LdCfg) else CfgPdaSpace(sys)
    else:
        space = PdaCfgSpace(sys) if isinstance(sys.controllee, LdCfg) else PdaPdaSpace(sys)
    return list(space.cases(node))


def root_node(sys: TwoLevel):
    return two_level_space(sys).root


def two_level_trees(sys: TwoLevel, w, budget: Optional[StepBudget] = None) -> TreeMultiset:
    budget = budget or default_budget()
    w = check_word(w, sys.terminals)
    result = enumerate_space(two_level_space(sys), len(w), budget, lengths=[len(w)])
    return TreeMultiset(list(result.trees.get(w, [])), result.truncated)


# ===================================================================== Weir semantics

class ControlOracle:
    """Membership in the controller language, by bounded enumeration."""

    def __init__(self, controller: Controller, budget: StepBudget):
        self.controller = controller
        self.budget = budget
        self.bound = -1
        self.words: set = set()
        self.truncated = False

    def __contains__(self, w: tuple) -> bool:
        if len(w) > self.bound:
            bound = max(len(w), 2 * self.bound, 4)
            result = enumerate_system(self.controller, bound, self.budget)
            self.words = set(result.trees)
            self.truncated = self.truncated or result.truncated
            self.bound = bound
        return w in self.words


class WeirNode(NamedTuple):
    symbol: str
    control: tuple

    def render(self) -> str:
        return f"{self.symbol}[{''.join(self.control)}]"


class WeirConfig(NamedTuple):
    state: str
    stack: tuple  # of (symbol, control word)

    def render(self) -> str:
        return f"{self.state},[" + " ".join(f"{s}[{''.join(c)}]" for s, c in self.stack) + "]"


@dataclass
class WeirDerivation:
    tree: DerivationTree
    control_words: list

    @property
    def yield_(self) -> tuple:
        return self.tree.yield_


@dataclass
class WeirResult:
    derivations: list
    truncated: bool

    def __len__(self) -> int:
        return len(self.derivations)

    def __iter__(self):
        return iter(self.derivations)


class _WeirCfgSpace:
    def __init__(self, sys: TwoLevel, oracle: ControlOracle):
        self.ll = sys.controllee
        self.oracle = oracle
        self.root = WeirNode(self.ll.start, ())
        self.by_lhs: dict[str, list[LdProduction]] = {}
        for p in self.ll.productions:
            self.by_lhs.setdefault(p.lhs, []).append(p)
        self.mins = cfg_min_yield(self.ll.as_cfg())

    def expand(self, label: WeirNode):
        ll_sym, w = label
        for r in self.by_lhs.get(ll_sym, ()):
            w2 = w + (r.label,)
            d = r.dist
            if d is None and w2 not in self.oracle:
                continue
            kids = tuple(Leaf(s) if s in self.ll.terminals else
                         WeirNode(s, w2 if i == d else ()) for i, s in enumerate(r.rhs))
            yield Expansion(kids, 0, concat)

    def size(self, label) -> int:
        return len(label.control) + 1

    def min_yield(self, label) -> int:
        return self.mins.get(label.symbol, BIG)


class _WeirPdaSpace:
    def __init__(self, sys: TwoLevel, oracle: ControlOracle):
        self.ll = sys.controllee
        self.oracle = oracle
        self.root = WeirConfig(self.ll.initial_state, ((self.ll.start_symbol, ()),))
        self.by_pop: dict[tuple[str, str], list[LdPdaTransition]] = {}
        for t in self.ll.transitions:
            self.by_pop.setdefault((t.source, t.pop), []).append(t)
        self.mins = pda_min_pop(self.ll.transitions, self.ll.stack_alphabet)

    def expand(self, label: WeirConfig):
        state, stack = label
        if not stack:
            if state == self.ll.final_state:
                yield Expansion((), 0, _empty)
            return
        (ll_sym, w), rest = stack[0], stack[1:]
        for t in self.by_pop.get((state, ll_sym), ()):
            w2 = w + (t.label,)
            d = t.dist
            if d is None and w2 not in self.oracle:
                continue
            new = tuple((y, w2 if i == d else ()) for i, y in enumerate(t.push))
            yield Expansion((WeirConfig(t.target, new + rest),), 1 if t.scan else 0,
                            _prefix(t.scan), (t.scan,))

    def size(self, label) -> int:
        return sum(1 + len(c) for _, c in label.stack)

    def min_yield(self, label) -> int:
        return min(BIG, sum(self.mins.get(s, BIG) for s, _ in label.stack))


def weir_derive(sys: TwoLevel, w, budget: Optional[StepBudget] = None) -> WeirResult:
    """Derivations under the control-word semantics.

    Nonterminals (or stack symbols) carry the control word accumulated along
    their distinguished path; a rule without a distinguished symbol closes
    the word, which must belong to the controller's language.  Membership is
    decided by enumerating the controller with four times the budget.
    """
    budget = budget or default_budget()
    w = check_word(w, sys.terminals)
    oracle = ControlOracle(sys.controller, budget.scaled(4))
    space = _WeirCfgSpace(sys, oracle) if isinstance(sys.controllee, LdCfg) else _WeirPdaSpace(sys, oracle)
    result = enumerate_space(space, len(w), budget, lengths=[len(w)])
    derivs = [WeirDerivation(t, completed_words(t, sys)) for t in result.trees.get(w, [])]
    return WeirResult(derivs, result.truncated or oracle.truncated)


def completed_words(tree: DerivationTree, sys: TwoLevel) -> list:
    """Control words closed by the rules of a Weir derivation tree."""
    ll = sys.controllee
    out = []
    if isinstance(ll, LdCfg):
        for node in tree.nodes():
            lab = node.label
            if not isinstance(lab, WeirNode):
                continue
            kids = [c.label for c in node.children]
            matches = [r for r in ll.productions if r.lhs == lab.symbol and len(r.rhs) == len(kids)
                       and all((isinstance(k, Leaf) and k.symbol == s) or
                               (isinstance(k, WeirNode) and k.symbol == s) for k, s in zip(kids, r.rhs))]
            for r in matches:
                w2 = lab.control + (r.label,)
                ok = all(not isinstance(k, WeirNode) or k.control == (w2 if i == r.dist else ())
                         for i, k in enumerate(kids))
                if ok:
                    if r.dist is None:
                        out.append(w2)
                    break
    else:
        node = tree
        while node.children:
            before, after = node.label, node.children[0].label
            if before.stack:
                (ll_sym, wd), rest = before.stack[0], before.stack[1:]
                pushed = after.stack[: len(after.stack) - len(rest)]
                if not any(c for _, c in pushed):
                    for t in ll.transitions:
                        if (t.source, t.pop, t.target) == (before.state, ll_sym, after.state) and \
                                tuple(s for s, _ in pushed) == t.push and t.dist is None and \
                                (t.scan or EPS) == (node.edges[0] if node.edges else EPS):
                            out.append(wd + (t.label,))
                            break
            node = node.children[0]
    return sorted(out)
