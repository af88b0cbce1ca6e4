"""Seeded generators of small random systems for property and acceptance tests.

Every generator takes a ``random.Random`` and stays within at most three
nonterminals (or states, or stack symbols) and at most six rules.

Symbols are ranked by their index.  A rule that reads or produces no
terminal may only replace a symbol by strictly higher-ranked ones, so no
sequence of such rules can repeat.  Every string therefore has finitely many
derivations and a bounded enumeration can be complete.  Rules that do
read or produce a terminal are unrestricted, so recursion is still common.
"""

from __future__ import annotations

import random

from talforge.cf import Cfg, Pda, PdaTransition, Production
from talforge.control import LdCfg, LdPda, LdPdaTransition, LdProduction, TwoLevel
from talforge.epda import Epda, EpdaTransition
from talforge.lig import Lig, LigNt, LigProduction
from talforge.paa import Paa, PaaNode, PaaTransition
from talforge.tag import Tag, TagProduction, TagTree, foot_leaf, subst_leaf, term_leaf

TERMINALS = ("a", "b")
MAX_RULES = 6


def _symbols(prefix: str, rng: random.Random, lo: int = 1, hi: int = 3) -> list[str]:
    return [f"{prefix}{i}" for i in range(rng.randint(lo, hi))]


def _above(syms: list[str], sym: str) -> list[str]:
    """The symbols ranked strictly above ``sym``."""
    return syms[syms.index(sym) + 1:]


def _pick(rng: random.Random, pool: list[str], k: int) -> tuple:
    return tuple(rng.choice(pool) for _ in range(k)) if pool else ()


def _distinct(rules: list) -> tuple:
    """Drop exact repeats, keeping first occurrences; rule collections are sets."""
    return tuple(dict.fromkeys(rules))


def _n_rules(rng: random.Random, at_least: int) -> int:
    return rng.randint(min(at_least + 1, MAX_RULES), MAX_RULES)


# ---------------------------------------------------------------- context-free

def random_nf_pda(rng: random.Random, max_states: int = 3) -> Pda:
    """A normal-form PDA with finitely many runs per input.

    Popping transitions always scan; a one-symbol push moves to a higher
    stack symbol; two-symbol pushes are unrestricted.  A run on n symbols
    then has exactly n pops and n - 1 two-symbol pushes.
    """
    states = _symbols("p", rng, 1, max_states)
    stack = _symbols("Z", rng)
    trans = [PdaTransition(rng.choice(states), z, rng.choice(TERMINALS), rng.choice(states), ()) for z in stack]
    target = _n_rules(rng, len(trans))
    while len(trans) < target:
        z = rng.choice(stack)
        kind = rng.random()
        if kind < 0.4:
            push = _pick(rng, stack, 2)
        elif kind < 0.6 and _above(stack, z):
            push = _pick(rng, _above(stack, z), 1)
        else:
            trans.append(PdaTransition(rng.choice(states), z, rng.choice(TERMINALS), rng.choice(states), ()))
            continue
        trans.append(PdaTransition(rng.choice(states), z, "", rng.choice(states), push))
    return Pda(states, TERMINALS, stack, _distinct(trans), states[0], stack[0], rng.choice(states))


def _random_controller_cfg(rng: random.Random, ends: list[str], mids: list[str]) -> Cfg:
    """Controller grammar biased toward words of ``mids`` labels closed by one of ``ends``."""
    labels = sorted(ends + mids)
    nts = _symbols("C", rng)
    closers = ends or labels
    prods = [Production(nts[i % len(nts)], (lab,)) for i, lab in enumerate(closers)]
    prods += [Production(a, (rng.choice(closers),)) for a in nts[len(closers):]]
    target = _n_rules(rng, len(prods))
    while len(prods) < target:
        a = rng.choice(nts)
        roll = rng.random()
        if roll < 0.4 and mids:
            rhs = [rng.choice(mids), rng.choice(nts)]
        elif roll < 0.8:
            rhs = list(_pick(rng, nts + labels, rng.randint(0, 3)))
            if not any(s in labels for s in rhs):
                rhs.insert(rng.randint(0, len(rhs)), rng.choice(labels))
        else:
            rhs = list(_pick(rng, _above(nts, a), rng.randint(0, 3)))
        prods.append(Production(a, tuple(rhs)))
    return Cfg(nts, labels, _distinct(prods), nts[0])


def _random_controller_pda(rng: random.Random, ends: list[str], mids: list[str]) -> Pda:
    """Controller automaton with the same bias as :func:`_random_controller_cfg`."""
    labels = sorted(ends + mids)
    states = _symbols("r", rng)
    stack = _symbols("K", rng)
    final = rng.choice(states)
    closers = ends or labels
    trans = [PdaTransition(rng.choice(states), stack[i % len(stack)], lab, final, ()) for i, lab in enumerate(closers)]
    trans += [PdaTransition(rng.choice(states), z, rng.choice(closers), final, ()) for z in stack[len(closers):]]
    target = _n_rules(rng, len(trans))
    while len(trans) < target:
        z = rng.choice(stack)
        roll = rng.random()
        if roll < 0.4 and mids:
            q = rng.choice(states)
            trans.append(PdaTransition(q, z, rng.choice(mids), q, (z,)))
            continue
        if roll < 0.8:
            scan, push = rng.choice(labels), _pick(rng, stack, rng.randint(0, 2))
        else:
            scan, push = "", _pick(rng, _above(stack, z), rng.randint(0, 2))
        trans.append(PdaTransition(rng.choice(states), z, scan, rng.choice(states), push))
    return Pda(states, labels, stack, _distinct(trans), states[0], stack[0], final)


# ---------------------------------------------------------------- controllees

def _random_ld_cfg(rng: random.Random, lexical_only: bool) -> LdCfg:
    """Labeled CFG.  With ``lexical_only`` a rule without a distinguished symbol has at most one terminal."""
    nts = _symbols("N", rng)
    prods = []
    for a in nts:
        prods.append((a, (rng.choice(TERMINALS),) if rng.random() < 0.8 else (), ()))
    target = _n_rules(rng, len(prods))
    while len(prods) < target:
        a = rng.choice(nts)
        productive = rng.random() < 0.7
        pool = nts if productive else _above(nts, a)
        if not pool:
            continue
        rhs = list(_pick(rng, pool, rng.randint(1, 2)))
        spot = rng.randrange(len(rhs))
        if productive:
            rhs.insert(rng.randint(0, len(rhs)), rng.choice(TERMINALS))
            spot = next(i for i, s in enumerate(rhs) if s in nts)
        marks = () if (not lexical_only and rng.random() < 0.25) else (spot,)
        prods.append((a, tuple(rhs), marks))
    prods = _distinct(prods)
    labels = [f"l{i}" for i in range(len(prods))]
    rules = tuple(LdProduction(lab, a, rhs, marks) for lab, (a, rhs, marks) in zip(labels, prods))
    return LdCfg(nts, TERMINALS, labels, rules, nts[0])


def _random_ld_pda(rng: random.Random) -> LdPda:
    """Labeled PDA following the same run-counting discipline as :func:`random_nf_pda`."""
    states = _symbols("s", rng)
    stack = _symbols("Y", rng)
    trans = [(rng.choice(states), z, rng.choice(TERMINALS), rng.choice(states), (), ()) for z in stack]
    target = _n_rules(rng, len(trans))
    while len(trans) < target:
        z = rng.choice(stack)
        if rng.random() < 0.6:
            push = _pick(rng, stack, 2)
        elif _above(stack, z):
            push = _pick(rng, _above(stack, z), 1)
        else:
            continue
        marks = (rng.randrange(len(push)),) if rng.random() < 0.8 else ()
        trans.append((rng.choice(states), z, "", rng.choice(states), push, marks))
    trans = _distinct(trans)
    labels = [f"l{i}" for i in range(len(trans))]
    rules = tuple(LdPdaTransition(lab, *t) for lab, t in zip(labels, trans))
    return LdPda(states, TERMINALS, stack, labels, rules, states[0], stack[0], rng.choice(states))


def random_two_level(rng: random.Random, pairing: str) -> TwoLevel:
    """``pairing`` is one of ``cfg-cfg``, ``pda-cfg``, ``cfg-pda``, ``pda-pda``."""
    ctrl_kind, ll_kind = pairing.split("-")
    ll = _random_ld_cfg(rng, lexical_only=(ctrl_kind == "pda")) if ll_kind == "cfg" else _random_ld_pda(rng)
    rules = ll.productions if ll_kind == "cfg" else ll.transitions
    ends = sorted(r.label for r in rules if not r.marks)
    mids = sorted(r.label for r in rules if r.marks)
    make = _random_controller_cfg if ctrl_kind == "cfg" else _random_controller_pda
    ctrl = make(rng, ends, mids)
    return TwoLevel(ctrl, ll)


# ---------------------------------------------------------------- tree-adjoining

def random_lig(rng: random.Random, any_fixed: bool = False) -> Lig:
    """LIG whose non-inheriting children carry ``[S]``, or any one-symbol stack with ``any_fixed``."""
    nts = _symbols("X", rng)
    stack = ["S"] + _symbols("A", rng, 0, 2)
    prods = []
    for z in stack:  # a lexical way out for every stack symbol
        prods.append(LigProduction(rng.choice(nts), z, (rng.choice(TERMINALS),) if rng.random() < 0.8 else ()))
    target = _n_rules(rng, len(prods))
    while len(prods) < target:
        lhs, pop = rng.choice(nts), rng.choice(stack)
        productive = rng.random() < 0.7
        pool = nts if productive else _above(nts, lhs)
        if not pool:
            continue
        gamma = _pick(rng, stack, rng.randint(0, 2))
        others = [LigNt(rng.choice(pool), (rng.choice(stack),) if any_fixed else ("S",))
                  for _ in range(rng.randint(0, 1))]
        if productive:
            others.insert(rng.randint(0, len(others)), rng.choice(TERMINALS))
        pos = rng.randint(0, len(others))
        rhs = tuple(others[:pos]) + (LigNt(rng.choice(pool), gamma),) + tuple(others[pos:])
        prods.append(LigProduction(lhs, pop, rhs, pos))
    return Lig(nts, TERMINALS, stack, _distinct(prods), nts[0], "S")


def random_epda(rng: random.Random, any_inserted: bool = False) -> Epda:
    """EPDA in which only scanning transitions insert stacks.

    Inserted inner stacks are ``[S]`` unless ``any_inserted`` is set, in which
    case they may hold any single stack symbol.
    """
    states = _symbols("q", rng)
    stack = ["S"] + _symbols("B", rng, 0, 2)
    trans = [EpdaTransition(rng.choice(states), z, rng.choice(TERMINALS) if rng.random() < 0.8 else "",
                            rng.choice(states), None) for z in stack]
    target = _n_rules(rng, len(trans))
    while len(trans) < target:
        z = rng.choice(stack)
        if rng.random() < 0.7:
            push = _pick(rng, stack, rng.randint(0, 2))
            fresh = (lambda: (rng.choice(stack),)) if any_inserted else (lambda: ("S",))
            above = tuple(fresh() for _ in range(rng.randint(0, 1)))
            below = tuple(fresh() for _ in range(rng.randint(0, 1)))
            trans.append(EpdaTransition(rng.choice(states), z, rng.choice(TERMINALS), rng.choice(states), push,
                                        above, below))
        else:
            push = _pick(rng, _above(stack, z), rng.randint(0, 2))
            trans.append(EpdaTransition(rng.choice(states), z, "", rng.choice(states), push))
    return Epda(states, TERMINALS, stack, _distinct(trans), states[0], "S", rng.choice(states))


def random_spinal_tag(rng: random.Random) -> Tag:
    """A TAG whose productions are flat trees, unary variable chains or lone constant feet."""
    var_names = _symbols("V", rng)
    prods = []

    def flat(lhs: str, footed: bool, productive: bool) -> TagTree:
        pool = var_names if productive else _above(var_names, lhs)
        kids = [subst_leaf(v) for v in _pick(rng, pool, rng.randint(0, 2))]
        if productive:
            kids.insert(rng.randint(0, len(kids)), term_leaf(rng.choice(TERMINALS)))
        if footed:
            kids.insert(rng.randint(0, len(kids)), foot_leaf("K"))
        return TagTree("K", tuple(kids) or (term_leaf(""),))

    def chain(lhs: str, footed: bool):
        elems = _pick(rng, _above(var_names, lhs), rng.randint(1, 2))
        if not elems:
            return None
        node = foot_leaf(elems[-1]) if footed else subst_leaf(elems[-1])
        for v in reversed(elems[:-1]):
            node = TagTree(v, (node,))
        return node

    for v in var_names:  # every variable can finish
        prods.append(TagProduction(v, flat(v, False, rng.random() < 0.8)))
    prods.append(TagProduction(rng.choice(var_names), foot_leaf("K")))
    target = _n_rules(rng, len(prods))
    while len(prods) < target:
        lhs, footed = rng.choice(var_names), rng.random() < 0.5
        rhs = flat(lhs, footed, rng.random() < 0.7) if rng.random() < 0.7 else chain(lhs, footed)
        if rhs is not None:
            prods.append(TagProduction(lhs, rhs))
    return Tag(var_names, ["K"], TERMINALS, _distinct(prods), var_names[0])


def random_spinal_paa(rng: random.Random) -> Paa:
    """A PAA whose transitions are flat pushes or unary variable chains."""
    var_names = _symbols("V", rng)
    trans = []

    def flat(lhs: str, footed: bool, scan: str) -> tuple:
        pool = var_names if scan else _above(var_names, lhs)
        nodes = [PaaNode(v) for v in _pick(rng, pool, rng.randint(0, 2))]
        if footed:
            nodes.insert(rng.randint(0, len(nodes)), PaaNode("K", (), True))
        return tuple(nodes)

    def chain(lhs: str, footed: bool):
        elems = _pick(rng, _above(var_names, lhs), rng.randint(1, 2))
        if not elems:
            return None
        node = PaaNode(elems[-1], (), footed)
        for v in reversed(elems[:-1]):
            node = PaaNode(v, (node,))
        return (node,)

    for v in var_names:
        trans.append(PaaTransition(v, rng.choice(TERMINALS) if rng.random() < 0.8 else "", ()))
    trans.append(PaaTransition(rng.choice(var_names), "", (PaaNode("K", (), True),)))
    target = _n_rules(rng, len(trans))
    while len(trans) < target:
        lhs, footed = rng.choice(var_names), rng.random() < 0.5
        if rng.random() < 0.7:
            scan = rng.choice(TERMINALS) if rng.random() < 0.7 else ""
            trans.append(PaaTransition(lhs, scan, flat(lhs, footed, scan)))
        else:
            rho = chain(lhs, footed)
            if rho is not None:
                trans.append(PaaTransition(lhs, "", rho))
    return Paa(var_names, ["K"], TERMINALS, _distinct(trans), var_names[0])
