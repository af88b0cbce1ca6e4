"""Conversions between the two-level systems and the four TAL formalisms.

Four pairs of constructions, each mapping derivation trees one to one:

=========  ==============  ===================
formalism  two-level form  functions
=========  ==============  ===================
TAG        CFG∘CFG         tag_to_cfg_cfg / cfg_cfg_to_tag
LIG        PDA∘CFG         lig_to_pda_cfg / pda_cfg_to_lig
PAA        CFG∘PDA         paa_to_cfg_pda / cfg_pda_to_paa
EPDA       PDA∘PDA         epda_to_pda_pda / pda_pda_to_epda
=========  ==============  ===================

plus :func:`swap_controller` and :func:`swap_controllee`, which move between
the four pairings while keeping per-string derivation counts.

Every function accepts an optional :class:`ConversionReport` and fills it in:
which construction ran, every fresh symbol it made and what that symbol
stands for, and any preparatory step that was applied to the input.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

from .cf import Cfg, Pda, PdaTransition, Production, cfg_normal_form, cfg_to_pda, pda_normal_form, \
    pda_one_state, pda_to_cfg
from .control import (LdCfg, LdPda, LdPdaTransition, LdProduction, TwoLevel, ld_pda_one_state,
                      normalize_two_level, pair_chains, pair_relation, relabel_controller)
from .epda import Epda, EpdaTransition
from .lig import Lig, LigNt, LigProduction
from .paa import Paa, PaaNode, PaaTransition, paa_normal_form
from .paa import require_spinal as paa_require_spinal
from .registry import kind_of
from .symbols import EPS, TalforgeError, compose, fresh
from .tag import FOOT, SUBST, Tag, TagProduction, TagTree, foot_leaf, subst_leaf, tag_normal_form, \
    term_leaf
from .tag import require_spinal as tag_require_spinal


# ===================================================================== report

@dataclass
class ConversionReport:
    construction: str = ""
    source_kind: str = ""
    target_kind: str = ""
    direction: str = ""
    fresh_symbols: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def begin(self, construction: str, source: str, target: str, direction: str) -> None:
        self.construction = f"{self.construction}+{construction}" if self.construction else construction
        self.source_kind = self.source_kind or source
        self.target_kind = target
        self.direction = direction if self.direction in ("", direction) else "mixed"

    def record(self, symbol: str, meaning: str) -> str:
        """Note that ``symbol`` was made up to stand for ``meaning``."""
        old = self.fresh_symbols.get(symbol)
        if old is not None and old != meaning:
            raise TalforgeError(f"fresh symbol {symbol!r} used for both {old!r} and {meaning!r}")
        self.fresh_symbols[symbol] = meaning
        return symbol

    def is_injective(self) -> bool:
        return len(set(self.fresh_symbols.values())) == len(self.fresh_symbols)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2, ensure_ascii=False)


def _report(report: Optional[ConversionReport]) -> ConversionReport:
    return report if report is not None else ConversionReport()


class _Names:
    """Fresh composite names, one per meaning, recorded in the report."""

    def __init__(self, taken, report: ConversionReport, prefix: str = ""):
        self.taken = set(taken)
        self.report = report
        self.prefix = prefix
        self.cache: dict = {}

    def __call__(self, base: str, *parts: Optional[str]) -> str:
        key = (base, parts)
        if key not in self.cache:
            name = fresh(compose(base, *parts), self.taken)
            meaning = self.prefix + compose(base, *parts)
            self.cache[key] = self.report.record(name, meaning)
        return self.cache[key]

    def reserve(self, name: str, meaning: str) -> str:
        name = fresh(name, self.taken)
        return self.report.record(name, meaning)


def _one_state_controller(ctrl: Pda, rep: ConversionReport) -> Pda:
    if len(ctrl.states) == 1:
        return ctrl
    rep.notes.append("controller made single-state with the state-triple construction")
    return pda_one_state(ctrl, sorted(ctrl.states)[0], require_normal_form=False)


def _require_pairing(s: TwoLevel, pairing: str) -> None:
    if not isinstance(s, TwoLevel) or s.pairing != pairing:
        got = s.pairing if isinstance(s, TwoLevel) else type(s).__name__
        raise TalforgeError(f"expected a {pairing} system, got {got}")


# ===================================================================== LIG <-> PDA∘CFG

def lig_to_pda_cfg(g: Lig, report: Optional[ConversionReport] = None) -> TwoLevel:
    """A single-state controller runs each LIG stack; the LIG productions become labeled rules.

    Every production gets its own label.  ``X[A ..] -> .. Y[γ ..] ..``
    becomes the controllee rule ``l: X -> .. ^Y ..`` with the controller
    transition ``q, A -l-> q, γ``; a lexical ``X[A] -> a`` becomes
    ``l: X -> a`` with ``q, A -l-> q, eps``.  A non-inheriting child with the
    fresh stack ``[S]`` keeps its name.  A child ``Y[σ]`` with any other fixed
    stack becomes a new nonterminal ``Y<σ>`` whose rules are the first
    productions of ``Y[σ]`` fused with a controller move that pops ``S``, so
    every LIG step is still exactly one tree node.
    """
    rep = _report(report)
    rep.begin("lig_to_pda_cfg", "lig", "pda-cfg", "forward")
    start_sym = g.start_stack
    names = _Names(set(g.nonterminals) | set(g.terminals) | set(g.stack_alphabet), rep)
    q = "q"
    nts = set(g.nonterminals)
    prods: list[LdProduction] = []
    ctrl: list[PdaTransition] = []
    pending: list[LigNt] = []

    def fixed(item: LigNt) -> str:
        key = ("fixed", item)
        if key not in names.cache:
            nt = names(item.symbol, *item.stack) if item.stack else names(item.symbol, "")
            nts.add(nt)
            names.cache[key] = nt
            pending.append(item)
        return names.cache[key]

    def emit(lab: str, p, lhs: str, rest: tuple, pop: str) -> None:
        if p.lexical:
            if rest:  # a lexical production needs a one-symbol stack
                return
            prods.append(LdProduction(lab, lhs, tuple(a for a in p.rhs if a)))
            ctrl.append(PdaTransition(q, pop, lab, q, ()))
            return
        rhs = []
        for j, item in enumerate(p.rhs):
            if isinstance(item, str):
                rhs.append(item)
            elif j == p.heir or item.stack == (start_sym,):
                rhs.append(item.symbol)
            else:
                rhs.append(fixed(item))
        prods.append(LdProduction(lab, lhs, tuple(rhs), (p.heir,)))
        ctrl.append(PdaTransition(q, pop, lab, q, p.rhs[p.heir].stack + rest))

    for i, p in enumerate(g.productions):
        emit(names("l", str(i)), p, p.lhs, (), p.pop)
    while pending:
        item = pending.pop(0)
        if not item.stack:  # nothing can be popped from an empty stack
            continue
        fused = 0
        for i, p in enumerate(g.productions):
            if p.lhs == item.symbol and p.pop == item.stack[0]:
                fused += 1
                emit(names("l", str(i), item.symbol, *item.stack), p, fixed(item), item.stack[1:], start_sym)
        rep.notes.append(f"fixed stack {item.render()} starts with {fused} fused first step(s)")
    labels = {t.scan for t in ctrl}
    controller = Pda({q}, labels, g.stack_alphabet, tuple(ctrl), q, start_sym, q)
    controllee = LdCfg(nts, g.terminals, labels, tuple(prods), g.start)
    return TwoLevel(controller, controllee)


def pda_cfg_to_lig(s: TwoLevel, report: Optional[ConversionReport] = None) -> Lig:
    """Index each controllee nonterminal by a controller state: ``X<q>``.

    The LIG stack is the controller stack.  A controller ε-move becomes
    ``X<q>[A ..] -> X<r>[γ ..]`` for every X; a label scan applies the labeled
    rule, the distinguished child inheriting the controller configuration and
    the others starting afresh.  A non-distinguished rule can only finish a
    run, so it must be lexical: non-distinguished branching has no LIG
    counterpart and is rejected.
    """
    _require_pairing(s, "PDA∘CFG")
    rep = _report(report)
    rep.begin("pda_cfg_to_lig", "pda-cfg", "lig", "reverse")
    ctrl, ll = s.controller, s.controllee
    q0, qf, S2 = ctrl.initial_state, ctrl.final_state, ctrl.start_symbol
    names = _Names(set(ll.terminals) | set(ctrl.stack_alphabet), rep)
    node = {(x, st): names(x, st) for x in sorted(ll.nonterminals) for st in sorted(ctrl.states)}
    rules = ll.by_label()
    prods: list[LigProduction] = []
    for t in ctrl.transitions:
        if not t.scan:
            for x in sorted(ll.nonterminals):
                prods.append(LigProduction(node[x, t.source], t.pop,
                                           (LigNt(node[x, t.target], t.push),), 0))
            continue
        for r in rules.get(t.scan, ()):
            d = r.dist
            if d is None:
                if t.target != qf or t.push:
                    continue
                if any(y in ll.nonterminals for y in r.rhs) or len(r.rhs) > 1:
                    raise TalforgeError(
                        f"rule {r.label} is non-distinguished but not lexical ({r.render()}); "
                        "a LIG cannot start several fresh stacks without an inheriting child")
                prods.append(LigProduction(node[r.lhs, t.source], t.pop, r.rhs, None))
                continue
            rhs = []
            for i, y in enumerate(r.rhs):
                if y in ll.terminals:
                    rhs.append(y)
                elif i == d:
                    rhs.append(LigNt(node[y, t.target], t.push))
                else:
                    rhs.append(LigNt(node[y, q0], (S2,)))
            prods.append(LigProduction(node[r.lhs, t.source], t.pop, tuple(rhs), d))
    return Lig(set(node.values()), ll.terminals, ctrl.stack_alphabet, tuple(prods),
               node[ll.start, q0], S2)


# ===================================================================== EPDA <-> PDA∘PDA

def epda_to_pda_pda(e: Epda, report: Optional[ConversionReport] = None) -> TwoLevel:
    """The controller runs the inner stacks; the controllee keeps the EPDA states.

    The controllee has one stack symbol ``X`` per inner stack.  Transition
    ``p, [A ..] -a-> r, Υ1 [γ ..] Υ2`` becomes controller ``q, A -l-> q, γ``
    with controllee ``l: p, X -a-> r, X.. ^X X..`` (one X per inserted
    stack); a whole-stack pop becomes a non-distinguished ``l: p, X -a-> r``.

    An inserted stack ``σ`` other than ``[S]`` starts from its own controllee
    symbol ``X<σ>``.  Its first move is fused into a dedicated label whose
    controller rule pops ``S`` and pushes what the move leaves on ``σ``, so
    every EPDA move is still exactly one tree node.
    """
    rep = _report(report)
    rep.begin("epda_to_pda_pda", "epda", "pda-pda", "forward")
    start_sym = e.start_symbol
    names = _Names(set(e.states) | set(e.stack_alphabet) | set(e.input_alphabet), rep)
    inner_sym = names.reserve("X", "inner stack")
    q = "q"
    syms = {inner_sym}
    ll: list[LdPdaTransition] = []
    ctrl: list[PdaTransition] = []
    pending: list[tuple] = []

    def entry(stack: tuple) -> str:
        if stack == (start_sym,):
            return inner_sym
        key = ("start", stack)
        if key not in names.cache:
            sym = names(inner_sym, *stack) if stack else names(inner_sym, "")
            syms.add(sym)
            names.cache[key] = sym
            pending.append(stack)
        return names.cache[key]

    def emit(lab: str, t, top: str, rest: tuple, pop: str) -> None:
        if t.push is None:
            if rest:  # a whole-stack pop needs a one-symbol inner stack
                return
            ll.append(LdPdaTransition(lab, t.source, top, t.scan, t.target, ()))
            ctrl.append(PdaTransition(q, pop, lab, q, ()))
            return
        push = tuple(entry(st) for st in t.above) + (inner_sym,) + tuple(entry(st) for st in t.below)
        ll.append(LdPdaTransition(lab, t.source, top, t.scan, t.target, push, (len(t.above),)))
        ctrl.append(PdaTransition(q, pop, lab, q, tuple(t.push) + rest))

    for i, t in enumerate(e.transitions):
        emit(names("l", str(i)), t, inner_sym, (), t.pop)
    while pending:
        stack = pending.pop(0)
        if not stack:  # an empty inner stack can never move
            continue
        fused = 0
        for i, t in enumerate(e.transitions):
            if t.pop == stack[0]:
                fused += 1
                emit(names("l", str(i), *stack), t, entry(stack), stack[1:], start_sym)
        rep.notes.append(f"inserted stack [{' '.join(stack)}] starts with {fused} fused first move(s)")
    labels = {t.label for t in ll}
    controller = Pda({q}, labels, e.stack_alphabet, tuple(ctrl), q, start_sym, q)
    controllee = LdPda(e.states, e.input_alphabet, syms, labels, tuple(ll), e.initial_state, inner_sym,
                       e.final_state)
    return TwoLevel(controller, controllee)


def pda_pda_to_epda(s: TwoLevel, report: Optional[ConversionReport] = None) -> Epda:
    """Inner stacks hold controller stacks whose symbols are tagged ``A<X|Z>``.

    X is the controllee symbol in force while A is on top and Z the one in
    force when A is popped (empty for the bottom symbol).  The controller is
    made single-state first if needed; the controllee states become the EPDA
    states.
    """
    _require_pairing(s, "PDA∘PDA")
    rep = _report(report)
    rep.begin("pda_pda_to_epda", "pda-pda", "epda", "reverse")
    ctrl = _one_state_controller(s.controller, rep)
    ll = s.controllee
    S2 = ctrl.start_symbol
    ll_syms = sorted(ll.stack_alphabet)
    names = _Names(set(ll.states) | set(ll.input_alphabet), rep)

    def sym(a: str, x: str, z: Optional[str]) -> str:
        return names(a, x, z)

    by_label = ll.by_label()
    steps = []
    for t in ctrl.transitions:
        if not t.scan:
            steps.append((t.pop, {(x, x) for x in ll_syms}, t.push))
        else:
            steps.append((t.pop, {(r.pop, None if r.dist is None else r.push[r.dist])
                                  for r in by_label.get(t.scan, ())}, t.push))
    rel, succ = pair_relation(steps, ll_syms)

    def chains(first: str, gamma: tuple, last: Optional[str]):
        """Tagged versions of ``gamma`` from controllee symbol ``first`` down to ``last``.

        Chains through a tagged symbol that can never be used up are skipped.
        """
        for chain in pair_chains(rel, succ, gamma, first, last):
            yield tuple(sym(c, chain[i], chain[i + 1]) for i, c in enumerate(gamma))

    def start(y: str) -> tuple:
        return (sym(S2, y, None),)

    trans: list[EpdaTransition] = []
    for t in ctrl.transitions:
        popped, gamma = t.pop, t.push
        if not t.scan:
            for p in sorted(ll.states):
                for x in ll_syms:
                    if not gamma:
                        trans.append(EpdaTransition(p, sym(popped, x, x), EPS, p, ()))
                        continue
                    for z in ll_syms + [None]:
                        for push in chains(x, gamma, z):
                            trans.append(EpdaTransition(p, sym(popped, x, z), EPS, p, push))
            continue
        for r in by_label.get(t.scan, ()):
            x = r.pop
            d = r.dist
            if d is None:
                if gamma:
                    continue
                if not r.push:
                    trans.append(EpdaTransition(r.source, sym(popped, x, None), r.scan, r.target, None))
                else:
                    above = tuple(start(y) for y in r.push[:-1])
                    trans.append(EpdaTransition(r.source, sym(popped, x, None), r.scan, r.target,
                                                start(r.push[-1]), above))
                continue
            yd = r.push[d]
            above = tuple(start(y) for y in r.push[:d])
            below = tuple(start(y) for y in r.push[d + 1 :])
            if not gamma:
                trans.append(EpdaTransition(r.source, sym(popped, x, yd), r.scan, r.target, (), above, below))
                continue
            for z in ll_syms + [None]:
                for push in chains(yd, gamma, z):
                    trans.append(EpdaTransition(r.source, sym(popped, x, z), r.scan, r.target, push,
                                                above, below))
    first = sym(S2, ll.start_symbol, None)
    used = {first}
    for t in trans:
        used.add(t.pop)
        used.update(t.push or ())
        for st in t.above + t.below:
            used.update(st)
    return Epda(ll.states, ll.input_alphabet, used, tuple(trans), ll.initial_state, first,
                ll.final_state)


def _controller_steps(ctrl, rules: dict, ll_syms: list, shape):
    """Steps of a normal-form CFG controller for :func:`pair_relation`."""
    ident = {(x, x) for x in ll_syms}
    for p in ctrl.productions:
        if len(p.rhs) == 1 and p.rhs[0] in ctrl.terminals:
            seeds = set()
            for r in rules.get(p.rhs[0], ()):
                head, body = shape(r)
                seeds.add((head, body[r.dist] if r.dist is not None else None))
            yield p.lhs, seeds, ()
        else:
            yield p.lhs, ident, p.rhs


def _live_chains(rel: dict, succ: dict, rhs: tuple, ll_syms: list, footed: bool):
    """Chains X0..Xk over ``rhs`` whose tagged symbols can all be used up; Xk is None if footless."""
    for x in ll_syms:
        for z in (ll_syms if footed else [None]):
            yield from pair_chains(rel, succ, rhs, x, z)


# ===================================================================== TAG <-> CFG∘CFG

def _tag_form(g: Tag, p: TagProduction):
    """Classify a rhs the direct construction understands.

    ``("flat", items)``: a constant over leaves; items are ``("t", a)``,
    ``("v", Y)`` for a substitution leaf and ``("foot", Z)`` for a constant
    foot.  ``("chain", [B1..Bk], footed)``: a unary chain of variables.
    ``("hole",)``: a lone constant foot.  None otherwise.
    """
    r = p.rhs
    var_set, const_set = g.variables, g.constants
    if not r.children:
        if r.mark == FOOT:
            return ("hole",) if r.symbol in const_set else ("chain", [r.symbol], True)
        if r.mark == SUBST:
            return ("chain", [r.symbol], False)
        return None
    if r.symbol in const_set:
        items = []
        for c in r.children:
            if c.children:
                return None
            if c.mark == FOOT:
                if c.symbol not in const_set:
                    return None
                items.append(("foot", c.symbol))
            elif c.mark == SUBST:
                items.append(("v", c.symbol))
            elif c.symbol:
                items.append(("t", c.symbol))
        return ("flat", items)
    chain = []
    node = r
    while node.children:
        if node.symbol not in var_set or len(node.children) != 1:
            return None
        chain.append(node.symbol)
        node = node.children[0]
    if node.symbol not in var_set or node.mark not in (FOOT, SUBST):
        return None
    chain.append(node.symbol)
    return ("chain", chain, node.mark == FOOT)


def tag_to_cfg_cfg(g: Tag, report: Optional[ConversionReport] = None) -> TwoLevel:
    """Controller nonterminals spell the adjunctions along each spine.

    The controllee nonterminals (owners) are the start variable and every
    variable at a substitution leaf of a flat production.  A footless
    variable V met at the end of a chain is tracked together with the owner
    A whose spine it finishes, as the controller nonterminal ``V<A>``; a
    footed variable B is its own controller nonterminal, and its flat
    productions become labeled rules ``X' -> .. ^X' ..`` for every owner X'.
    Inputs outside the flat/chain shapes are brought into normal form first.
    """
    tag_require_spinal(g)
    rep = _report(report)
    rep.begin("tag_to_cfg_cfg", "tag", "cfg-cfg", "forward")
    if any(_tag_form(g, p) is None for p in g.productions):
        g = tag_normal_form(g)
        rep.notes.append("input brought into normal form first (derivation counts kept, shapes may change)")
    forms = [(p, _tag_form(g, p)) for p in g.productions]
    owners = {g.start}
    for p, f in forms:
        if f[0] == "flat":
            owners.update(y for kind, y in f[1] if kind == "v")
    owners = sorted(owners)
    names = _Names(set(g.variables) | set(g.constants) | set(g.terminals), rep)
    S2 = names.reserve("S2", "controller start")
    ctrl_nts = {S2} | set(g.variables)
    ctrl: list[Production] = []
    ll: dict[str, LdProduction] = {}

    def label(i: int, owner: str, footed: bool, items) -> str:
        lab = names("l", str(i), owner) if not footed else names("l", str(i), owner, "adj")
        if lab not in ll:
            rhs, marks = [], ()
            for kind, y in items:
                if kind == "foot":
                    marks = (len(rhs),)
                    rhs.append(owner)
                else:
                    rhs.append(y)
            ll[lab] = LdProduction(lab, owner, tuple(rhs), marks)
        return lab

    pairs: dict[tuple[str, str], str] = {}
    todo: list[tuple[str, str]] = []

    def pair(v: str, owner: str) -> str:
        if (v, owner) not in pairs:
            pairs[v, owner] = names(v, owner)
            ctrl_nts.add(pairs[v, owner])
            todo.append((v, owner))
        return pairs[v, owner]

    def footless(v: str, owner: str, lhs: str) -> None:
        for i, (p, f) in enumerate(forms):
            if p.lhs != v or p.footed:
                continue
            if f[0] == "flat":
                ctrl.append(Production(lhs, (label(i, owner, False, f[1]),)))
            else:
                chain = f[1]
                ctrl.append(Production(lhs, tuple(chain[:-1]) + (pair(chain[-1], owner),)))

    for a in owners:
        footless(a, a, S2)
    while todo:
        v, owner = todo.pop()
        footless(v, owner, pairs[v, owner])
    for i, (p, f) in enumerate(forms):
        if not p.footed:
            continue
        if f[0] == "hole":
            ctrl.append(Production(p.lhs, ()))
        elif f[0] == "chain":
            ctrl.append(Production(p.lhs, tuple(f[1])))
        else:
            for x in owners:
                ctrl.append(Production(p.lhs, (label(i, x, True, f[1]),)))
    labels = set(ll)
    controller = Cfg(ctrl_nts, labels, tuple(ctrl), S2)
    controllee = LdCfg(set(owners), g.terminals, labels, tuple(ll.values()), g.start)
    return TwoLevel(controller, controllee)


def _prepare_cfg_controller(s: TwoLevel, rep: ConversionReport) -> TwoLevel:
    if not s.controller.is_normal_form():
        rep.notes.append("controller brought into normal form first")
        s = TwoLevel(cfg_normal_form(s.controller), s.controllee, s.notes)
    return s


def cfg_cfg_to_tag(s: TwoLevel, report: Optional[ConversionReport] = None) -> Tag:
    """TAG variables ``A<X|Z>``: controller nonterminal A deriving a spine from X down to Z.

    An empty Z marks a footless variable.  Controller rules become spine
    chains (footed for every X0..Xk, footless ending in ``Bk<X|>!``),
    ``A -> eps`` becomes ``A<X|X> -> X*``, and each labeled controllee rule
    becomes a flat tree under the constant X whose distinguished child is
    the foot.
    """
    _require_pairing(s, "CFG∘CFG")
    rep = _report(report)
    rep.begin("cfg_cfg_to_tag", "cfg-cfg", "tag", "reverse")
    s = _prepare_cfg_controller(s, rep)
    ctrl, ll = s.controller, s.controllee
    ll_syms = sorted(ll.nonterminals)
    names = _Names(set(ll.nonterminals) | set(ll.terminals), rep)

    def var(a: str, x: str, z: Optional[str]) -> str:
        return names(a, x, z)

    rules = ll.by_label()
    rel, succ = pair_relation(_controller_steps(ctrl, rules, ll_syms, lambda r: (r.lhs, r.rhs)), ll_syms)
    prods: list[TagProduction] = []
    for p in ctrl.productions:
        a = p.lhs
        if len(p.rhs) == 1 and p.rhs[0] in ctrl.terminals:
            for r in rules.get(p.rhs[0], ()):
                kids = []
                for i, y in enumerate(r.rhs):
                    if i == r.dist:
                        kids.append(foot_leaf(y))
                    elif y in ll.nonterminals:
                        kids.append(subst_leaf(var(ctrl.start, y, None)))
                    else:
                        kids.append(term_leaf(y))
                z = r.rhs[r.dist] if r.dist is not None else None
                prods.append(TagProduction(var(a, r.lhs, z), TagTree(r.lhs, tuple(kids) or (term_leaf(EPS),))))
            continue
        k = len(p.rhs)
        if k == 0:
            for x in ll_syms:
                prods.append(TagProduction(var(a, x, x), foot_leaf(x)))
            continue
        for chain in _live_chains(rel, succ, p.rhs, ll_syms, footed=True):
            node = foot_leaf(var(p.rhs[-1], chain[-2], chain[-1]))
            for i in range(k - 2, -1, -1):
                node = TagTree(var(p.rhs[i], chain[i], chain[i + 1]), (node,))
            prods.append(TagProduction(var(a, chain[0], chain[-1]), node))
        for chain in _live_chains(rel, succ, p.rhs, ll_syms, footed=False):
            node = subst_leaf(var(p.rhs[-1], chain[-2], None))
            for i in range(k - 2, -1, -1):
                node = TagTree(var(p.rhs[i], chain[i], chain[i + 1]), (node,))
            prods.append(TagProduction(var(a, chain[0], None), node))
    start = var(ctrl.start, ll.start, None)
    variables = {start}
    for p in prods:
        variables.add(p.lhs)
        variables.update(n.symbol for n in p.rhs.preorder()
                         if n.symbol not in ll.nonterminals and (n.children or n.mark))
    return Tag(variables, ll.nonterminals, ll.terminals, tuple(prods), start)


# ===================================================================== PAA <-> CFG∘PDA

def _paa_form(m: Paa, t: PaaTransition):
    """``("flat", items)`` or ``("chain", [B1..Bk], footed)`` or None.

    Flat: every node of rho is childless, variables are pushed and at most
    one constant foot marks the distinguished position (a childless
    constant elsewhere is deleted on arrival and ignored).  Chain: a unary
    chain of variables, scanning nothing.
    """
    var_set, const_set = m.variables, m.constants
    rho = t.rho
    if len(rho) == 1 and rho[0].symbol in var_set and not t.scan:
        chain = []
        node = rho[0]
        while True:
            if node.symbol not in var_set:
                chain = None
                break
            chain.append(node.symbol)
            if not node.children:
                break
            if len(node.children) != 1:
                chain = None
                break
            node = node.children[0]
        if chain is not None:
            return ("chain", chain, node.foot)
    if all(not n.children for n in rho):
        items = []
        for n in rho:
            if n.foot:
                if n.symbol not in const_set:
                    return None
                items.append(("foot", n.symbol))
            elif n.symbol in var_set:
                items.append(("v", n.symbol))
        return ("flat", items)
    return None


def paa_to_cfg_pda(m: Paa, report: Optional[ConversionReport] = None) -> TwoLevel:
    """Same owner scheme as :func:`tag_to_cfg_cfg`, with a single-state controllee.

    A PAA applies footed transitions to variables without embedded stacks
    too (the foot then receives nothing), so every transition of a footless
    occurrence contributes: chains become controller chains ending in a
    ``V<A>`` nonterminal, flat transitions become non-distinguished pushes
    (their foot dropped).  Footed occurrences use footed transitions only.
    """
    paa_require_spinal(m)
    rep = _report(report)
    rep.begin("paa_to_cfg_pda", "paa", "cfg-pda", "forward")
    if any(_paa_form(m, t) is None for t in m.transitions):
        m = paa_normal_form(m)
        rep.notes.append("input brought into normal form first (derivation counts kept, shapes may change)")
    forms = [(t, _paa_form(m, t)) for t in m.transitions]
    owners = {m.start}
    for t, f in forms:
        if f[0] == "flat":
            owners.update(y for kind, y in f[1] if kind == "v")
    owners = sorted(owners)
    names = _Names(set(m.variables) | set(m.constants) | set(m.terminals), rep)
    S2 = names.reserve("S2", "controller start")
    q = "q"
    ctrl_nts = {S2} | set(m.variables)
    ctrl: list[Production] = []
    ll: dict[str, LdPdaTransition] = {}

    def label(i: int, owner: str, footed: bool, t: PaaTransition, items) -> str:
        lab = names("l", str(i), owner) if not footed else names("l", str(i), owner, "adj")
        if lab not in ll:
            push, marks = [], ()
            for kind, y in items:
                if kind == "foot":
                    if footed:
                        marks = (len(push),)
                        push.append(owner)
                else:
                    push.append(y)
            ll[lab] = LdPdaTransition(lab, q, owner, t.scan, q, tuple(push), marks)
        return lab

    pairs: dict[tuple[str, str], str] = {}
    todo: list[tuple[str, str]] = []

    def pair(v: str, owner: str) -> str:
        if (v, owner) not in pairs:
            pairs[v, owner] = names(v, owner)
            ctrl_nts.add(pairs[v, owner])
            todo.append((v, owner))
        return pairs[v, owner]

    def childless(v: str, owner: str, lhs: str) -> None:
        for i, (t, f) in enumerate(forms):
            if t.lhs != v:
                continue
            if f[0] == "flat":
                ctrl.append(Production(lhs, (label(i, owner, False, t, f[1]),)))
            else:
                chain = f[1]
                ctrl.append(Production(lhs, tuple(chain[:-1]) + (pair(chain[-1], owner),)))

    for a in owners:
        childless(a, a, S2)
    while todo:
        v, owner = todo.pop()
        childless(v, owner, pairs[v, owner])
    for i, (t, f) in enumerate(forms):
        if not t.footed:
            continue
        if f[0] == "chain":
            ctrl.append(Production(t.lhs, tuple(f[1])))
        else:
            for x in owners:
                ctrl.append(Production(t.lhs, (label(i, x, True, t, f[1]),)))
    labels = set(ll)
    controller = Cfg(ctrl_nts, labels, tuple(ctrl), S2)
    controllee = LdPda({q}, m.terminals, set(owners), labels, tuple(ll.values()), q, m.start, q)
    return TwoLevel(controller, controllee)


def cfg_pda_to_paa(s: TwoLevel, report: Optional[ConversionReport] = None) -> Paa:
    """PAA variables ``A<X|Z>`` as in :func:`cfg_cfg_to_tag`; constants are controllee stack symbols.

    Controller chains become nested embedded stacks, ``A -> eps`` becomes
    ``A<X|X> -> X*`` and a labeled transition pushes ``S2<Y|>`` for each
    pushed Y, its distinguished symbol becoming the constant foot.  A
    multi-state controllee is made single-state first.
    """
    _require_pairing(s, "CFG∘PDA")
    rep = _report(report)
    rep.begin("cfg_pda_to_paa", "cfg-pda", "paa", "reverse")
    s = _prepare_cfg_controller(s, rep)
    if len(s.controllee.states) != 1:
        rep.notes.append("controllee made single-state with the state-triple construction "
                         "(controller labels copied per state choice)")
        s = ld_pda_one_state(s)
    ctrl, ll = s.controller, s.controllee
    ll_syms = sorted(ll.stack_alphabet)
    names = _Names(set(ll.stack_alphabet) | set(ll.input_alphabet), rep)

    def var(a: str, x: str, z: Optional[str]) -> str:
        return names(a, x, z)

    rules = ll.by_label()
    rel, succ = pair_relation(_controller_steps(ctrl, rules, ll_syms, lambda r: (r.pop, r.push)), ll_syms)
    trans: list[PaaTransition] = []
    for p in ctrl.productions:
        a = p.lhs
        if len(p.rhs) == 1 and p.rhs[0] in ctrl.terminals:
            for r in rules.get(p.rhs[0], ()):
                rho = tuple(PaaNode(y, (), True) if i == r.dist else PaaNode(var(ctrl.start, y, None))
                            for i, y in enumerate(r.push))
                z = r.push[r.dist] if r.dist is not None else None
                trans.append(PaaTransition(var(a, r.pop, z), r.scan, rho))
            continue
        k = len(p.rhs)
        if k == 0:
            for x in ll_syms:
                trans.append(PaaTransition(var(a, x, x), EPS, (PaaNode(x, (), True),)))
            continue
        for chain in _live_chains(rel, succ, p.rhs, ll_syms, footed=True):
            node = PaaNode(var(p.rhs[-1], chain[-2], chain[-1]), (), True)
            for i in range(k - 2, -1, -1):
                node = PaaNode(var(p.rhs[i], chain[i], chain[i + 1]), (node,))
            trans.append(PaaTransition(var(a, chain[0], chain[-1]), EPS, (node,)))
        for chain in _live_chains(rel, succ, p.rhs, ll_syms, footed=False):
            node = PaaNode(var(p.rhs[-1], chain[-2], None))
            for i in range(k - 2, -1, -1):
                node = PaaNode(var(p.rhs[i], chain[i], chain[i + 1]), (node,))
            trans.append(PaaTransition(var(a, chain[0], None), EPS, (node,)))
    start = var(ctrl.start, ll.start_symbol, None)
    variables = {start}
    for t in trans:
        variables.add(t.lhs)
        stack = list(t.rho)
        while stack:
            n = stack.pop()
            if n.symbol not in ll.stack_alphabet:
                variables.add(n.symbol)
            stack.extend(n.children)
    return Paa(variables, ll.stack_alphabet, ll.input_alphabet, tuple(trans), start)


# ===================================================================== swaps

def swap_controller(s: TwoLevel, report: Optional[ConversionReport] = None) -> TwoLevel:
    """Replace a CFG controller by a PDA or the other way round (counts kept)."""
    rep = _report(report)
    src = _pairing_kind(s)
    s = normalize_two_level(s)
    c = s.controller
    if isinstance(c, Cfg):
        new = cfg_to_pda(c)
    else:
        new = pda_to_cfg(pda_normal_form(c), prune=True)
    out = TwoLevel(new, s.controllee, s.notes)
    rep.begin("swap_controller", src, _pairing_kind(out), "swap")
    return out


def swap_controllee(s: TwoLevel, report: Optional[ConversionReport] = None) -> TwoLevel:
    """Replace an LD-CFG controllee by a single-state LD-PDA or the other way round.

    LD-CFG to LD-PDA keeps every label: ``l: X -> α`` becomes
    ``l: q, X -> q, α`` and ``l: X -> a`` becomes ``l: q, X -a-> q``.  LD-PDA
    to LD-CFG is the state-triple construction; a transition pushing k
    symbols is copied per choice of k states, each copy under its own label,
    and the controller is relabeled to accept any copy.
    """
    rep = _report(report)
    src = _pairing_kind(s)
    s = normalize_two_level(s)
    ll = s.controllee
    if isinstance(ll, LdCfg):
        q = "q"
        trans = []
        for p in ll.productions:
            if len(p.rhs) == 1 and p.rhs[0] in ll.terminals:
                trans.append(LdPdaTransition(p.label, q, p.lhs, p.rhs[0], q, (), ()))
            else:
                trans.append(LdPdaTransition(p.label, q, p.lhs, EPS, q, p.rhs, p.marks))
        new = LdPda({q}, ll.terminals, ll.nonterminals, ll.labels, tuple(trans), q, ll.start, q)
        out = TwoLevel(s.controller, new, s.notes)
    else:
        states = sorted(ll.states)
        taken = set(ll.labels)
        prods: list[LdProduction] = []
        copies: dict[str, list[str]] = {}
        for t in ll.transitions:
            k = len(t.push)
            if k == 0:
                prods.append(LdProduction(t.label, compose(t.pop, t.source, t.target),
                                          (t.scan,) if t.scan else ()))
                copies[t.label] = [t.label]
                continue
            options = list(itertools.product(states, repeat=k))
            copies[t.label] = []
            for ss in options:
                chain = (t.target,) + ss
                rhs = tuple(compose(b, chain[i], chain[i + 1]) for i, b in enumerate(t.push))
                lab = t.label if len(options) == 1 else fresh(compose(t.label, *ss), taken)
                if lab != t.label:
                    rep.record(lab, f"{t.label} with states {' '.join(ss)}")
                copies[t.label].append(lab)
                prods.append(LdProduction(lab, compose(t.pop, t.source, ss[-1]), rhs, t.marks))
        for lab in ll.labels - set(copies):
            copies[lab] = [lab]
        nts = {compose(a, p, r) for a in ll.stack_alphabet for p in states for r in states}
        labels = {n for v in copies.values() for n in v}
        new = LdCfg(nts, ll.input_alphabet, labels, tuple(prods),
                    compose(ll.start_symbol, ll.initial_state, ll.final_state))
        out = TwoLevel(relabel_controller(s.controller, copies), new, s.notes)
    rep.begin("swap_controllee", src, _pairing_kind(out), "swap")
    return out


# ===================================================================== dispatch

PAIRINGS = {"CFG∘CFG": "cfg-cfg", "PDA∘CFG": "pda-cfg", "CFG∘PDA": "cfg-pda", "PDA∘PDA": "pda-pda"}
TARGETS = ("tag", "lig", "paa", "epda", "cfg-cfg", "pda-cfg", "cfg-pda", "pda-pda")
_FORWARD = {"tag": (tag_to_cfg_cfg, "cfg-cfg"), "lig": (lig_to_pda_cfg, "pda-cfg"),
            "paa": (paa_to_cfg_pda, "cfg-pda"), "epda": (epda_to_pda_pda, "pda-pda")}
_REVERSE = {"tag": (cfg_cfg_to_tag, "cfg-cfg"), "lig": (pda_cfg_to_lig, "pda-cfg"),
            "paa": (cfg_pda_to_paa, "cfg-pda"), "epda": (pda_pda_to_epda, "pda-pda")}


def _pairing_kind(s: TwoLevel) -> str:
    return PAIRINGS[s.pairing]


def source_kind(system) -> str:
    return _pairing_kind(system) if isinstance(system, TwoLevel) else kind_of(system)


def convert(system, target: str,
            report: Optional[ConversionReport] = None) -> tuple[Union[TwoLevel, Tag, Lig, Paa, Epda],
                                                               ConversionReport]:
    """Route ``system`` to ``target`` (a TAL kind or a pairing such as ``cfg-pda``).

    A TAL formalism goes to its own pairing first; pairings are moved with
    the swaps; a TAL target is reached from its pairing.  Only the direct
    formalism/pairing steps keep derivation shapes; swaps keep counts.
    """
    rep = _report(report)
    if target not in TARGETS:
        raise TalforgeError(f"unknown target kind {target!r}; choose from {', '.join(TARGETS)}")
    kind = source_kind(system)
    if kind == target:
        rep.begin("identity", kind, target, "none")
        return system, rep
    if kind in _FORWARD:
        fn, _ = _FORWARD[kind]
        system = fn(system, rep)
    elif not isinstance(system, TwoLevel):
        raise TalforgeError(f"cannot convert a {kind} system")
    goal = _REVERSE[target][1] if target in _REVERSE else target
    now = _pairing_kind(system)
    if now.split("-")[0] != goal.split("-")[0]:
        system = swap_controller(system, rep)
    if _pairing_kind(system).split("-")[1] != goal.split("-")[1]:
        system = swap_controllee(system, rep)
    if target in _REVERSE:
        system = _REVERSE[target][0](system, rep)
    return system, rep
