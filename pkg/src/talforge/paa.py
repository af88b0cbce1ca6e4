"""Pushdown adjoining automata: a stack whose symbols carry embedded stacks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .budget import StepBudget, default_budget
from .cf import BIG
from .engine import Expansion, concat
from .registry import kind_of, terminal_alphabet, tree_space, tree_style
from .symbols import (EPS, HOLE, NotNormalFormError, NotSpinalError, TalforgeError,
                      ValidationError, compose, fresh, word)
from .trees import fill_holes


@dataclass(frozen=True)
class PaaNode:
    """A stack entry.  ``children`` is the embedded stack, top first.

    ``foot`` marks the foot of a transition's rhs; configurations never carry
    feet.
    """

    symbol: str
    children: tuple = ()
    foot: bool = False

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def render(self) -> str:
        if self.foot:
            return f"{self.symbol}*"
        if self.children:
            return f"{self.symbol}( {' , '.join(c.render() for c in self.children)} )"
        return self.symbol

    def preorder(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def render_stack(nodes: tuple) -> str:
    return " , ".join(n.render() for n in nodes) if nodes else "eps"


def _walk(nodes: tuple):
    for n in nodes:
        yield from n.preorder()


@dataclass(frozen=True)
class PaaTransition:
    """``lhs -scan-> rho``; ``rho`` lists the nodes placed under the root ⊤."""

    lhs: str
    scan: str
    rho: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "rho", tuple(self.rho))

    @property
    def footed(self) -> bool:
        return any(n.foot for n in _walk(self.rho))

    def render(self) -> str:
        scan = f'"{self.scan}"' if self.scan else "eps"
        return f"{self.lhs} -> {render_stack(self.rho)} @ {scan}"


@dataclass(frozen=True)
class Paa:
    variables: frozenset
    constants: frozenset
    terminals: frozenset
    transitions: tuple
    start: str

    def __post_init__(self):
        for name in ("variables", "constants", "terminals"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        trans = tuple(t if isinstance(t, PaaTransition) else PaaTransition(*t) for t in self.transitions)
        object.__setattr__(self, "transitions", trans)
        problems = []
        if self.start not in self.variables:
            problems.append(f"initial symbol {self.start!r} is not a variable")
        for a, b in ((self.variables, self.constants), (self.variables, self.terminals),
                     (self.constants, self.terminals)):
            if a & b:
                problems.append(f"alphabet clash: {sorted(a & b)}")
        for i, t in enumerate(trans):
            if t.lhs not in self.variables:
                problems.append(f"transition {i}: lhs {t.lhs!r} is not a variable")
            if t.scan and t.scan not in self.terminals:
                problems.append(f"transition {i}: undeclared input symbol {t.scan!r}")
            feet = 0
            for n in _walk(t.rho):
                if n.symbol not in self.variables and n.symbol not in self.constants:
                    problems.append(f"transition {i}: {n.symbol!r} is not a variable or constant")
                if n.foot:
                    feet += 1
                    if n.children:
                        problems.append(f"transition {i}: the foot cannot have children")
            if feet > 1:
                problems.append(f"transition {i}: more than one foot")
        if problems:
            raise ValidationError(problems)

    def by_lhs(self) -> dict[str, list[PaaTransition]]:
        table: dict[str, list[PaaTransition]] = {}
        for t in self.transitions:
            table.setdefault(t.lhs, []).append(t)
        return table


# ---------------------------------------------------------------- spinal rules

def paa_spine(rho: tuple) -> Optional[list]:
    """Spine of ``⊤(rho)`` below the root, or None if not spinal.

    Footed: the path to the foot.  Footless: follow the unique entry that has
    an embedded stack; spinal when there is never more than one.
    """
    feet = [n for n in _walk(rho) if n.foot]
    target = feet[0] if feet else None
    path: list = []
    level = rho
    while level:
        if target is not None:
            nxt = [c for c in level if c is target or target in set(c.preorder())]
        else:
            nxt = [c for c in level if c.children]
        if len(nxt) > 1:
            return None
        off = [c for c in level if not nxt or c is not nxt[0]]
        if any(c.children for c in off):
            return None
        if not nxt:
            break
        path.append(nxt[0])
        level = nxt[0].children
    return path


def paa_is_spinal(m: Paa) -> tuple[bool, list[int]]:
    bad = [i for i, t in enumerate(m.transitions) if paa_spine(t.rho) is None]
    return not bad, bad


def require_spinal(m: Paa) -> None:
    ok, bad = paa_is_spinal(m)
    if not ok:
        raise NotSpinalError(bad, "transition")


# ---------------------------------------------------------------- literal steps

def top_variable(m: Paa, config: tuple) -> Optional[tuple]:
    """Address of the top variable: descend into the first entry while it is a constant."""
    path: list[int] = []
    level = config
    while level:
        node = level[0]
        path.append(0)
        if node.symbol in m.variables:
            return tuple(path)
        level = node.children
    return None


def _prune(m: Paa, nodes: tuple) -> tuple:
    out = []
    for n in nodes:
        kids = _prune(m, n.children)
        if n.symbol in m.constants and not kids:
            continue
        out.append(PaaNode(n.symbol, kids))
    return tuple(out)


def paa_step(m: Paa, config: tuple, t: PaaTransition) -> tuple:
    """Rewrite the top variable of ``config`` with ``t`` and delete empty constants."""
    at = top_variable(m, config)
    if at is None:
        raise TalforgeError("configuration has no top variable")

    def get(level, path):
        node = level[path[0]]
        return node if len(path) == 1 else get(node.children, path[1:])

    x = get(config, at)
    if x.symbol != t.lhs:
        raise TalforgeError(f"top variable {x.symbol} does not match {t.lhs}")
    if x.children and not t.footed:
        raise TalforgeError("a footless transition needs an empty embedded stack")

    def inst(n: PaaNode) -> PaaNode:
        if n.foot:
            return PaaNode(n.symbol, x.children)
        return PaaNode(n.symbol, tuple(inst(c) for c in n.children))

    new = tuple(inst(n) for n in t.rho)

    def rebuild(level, path):
        i = path[0]
        if len(path) == 1:
            return level[:i] + new + level[i + 1 :]
        node = level[i]
        return level[:i] + (PaaNode(node.symbol, rebuild(node.children, path[1:])),) + level[i + 1 :]

    return _prune(m, rebuild(config, at))


def constants_ok(m: Paa, config: tuple) -> bool:
    """No constant in ``config`` has an empty embedded stack."""
    return all(n.children or n.symbol not in m.constants for n in _walk(config))


def _var_items(nodes: tuple, variables) -> list[tuple[str, bool]]:
    return [(n.symbol, bool(n.children)) for n in _walk(nodes) if n.symbol in variables]


def paa_count(m: Paa, w, budget: Optional[StepBudget] = None, check=None) -> tuple[int, bool]:
    """Count accepting runs on ``w`` by exhaustive search over configurations.

    ``check``, when given, is called on every configuration reached.  Returns
    ``(count, truncated)``; runs that revisit a configuration at the same
    input position are cut and flag truncation.
    """
    budget = budget or default_budget()
    w = word(w)
    table = m.by_lhs()
    mins = _min_yields(m)
    state = {"steps": 0, "truncated": False}
    memo: dict = {}
    active: set = set()

    def count(config: tuple, pos: int) -> int:
        if check is not None:
            check(config)
        if not config:
            return 1 if pos == len(w) else 0
        key = (config, pos)
        if key in memo:
            return memo[key]
        if key in active:
            state["truncated"] = True
            return 0
        need = sum(mins.get(k, BIG) for k in _var_items(config, m.variables))
        if need > len(w) - pos:
            return 0
        if sum(1 for _ in _walk(config)) > budget.max_sentential_length:
            state["truncated"] = True
            return 0
        active.add(key)
        at = top_variable(m, config)
        node = config
        level = config
        for i in at:
            node = level[i]
            level = node.children
        total = 0
        for t in table.get(node.symbol, ()):
            if node.children and not t.footed:
                continue
            if t.scan and (pos >= len(w) or w[pos] != t.scan):
                continue
            state["steps"] += 1
            if state["steps"] > budget.max_nodes:
                state["truncated"] = True
                break
            total += count(paa_step(m, config, t), pos + (1 if t.scan else 0))
        active.discard(key)
        memo[key] = total
        return total

    from .engine import run_deep
    n = run_deep(lambda: count((PaaNode(m.start),), 0))
    return n, state["truncated"]


def paa_accepts(m: Paa, w, budget: Optional[StepBudget] = None) -> bool:
    return paa_count(m, w, budget)[0] > 0


# ---------------------------------------------------------------- derivation trees

class PaaItem(NamedTuple):
    """A variable entry whose embedded stack is either empty or handled elsewhere."""

    var: str
    has_children: bool

    def render(self) -> str:
        return f"{self.var}(*)" if self.has_children else self.var


class PaaContent(NamedTuple):
    """Derivation-tree node: a stack sequence with embedded stacks cut out as holes."""

    items: tuple

    def render(self) -> str:
        return " ".join(HOLE if i == HOLE else i.render() for i in self.items) or "eps"


class _Fill(NamedTuple):
    kid: int
    plan: tuple


def _translate(rho: tuple, hc: bool, variables) -> tuple[tuple, list, tuple]:
    """Flatten ``rho`` into a content sequence, the embedded-stack labels, and a fill plan."""
    embedded: list = []

    def flat(nodes) -> tuple[list, list]:
        items: list = []
        plan: list = []
        for n in nodes:
            if n.foot:
                if n.symbol in variables:
                    items.append(PaaItem(n.symbol, hc))
                    if hc:
                        plan.append(None)
                elif hc:
                    items.append(HOLE)
                    plan.append(None)
            elif n.symbol in variables:
                slot = len(embedded)
                embedded.append(None)
                sub_items, sub_plan = flat(n.children)
                if sub_items:
                    embedded[slot] = PaaContent(tuple(sub_items))
                    items.append(PaaItem(n.symbol, True))
                    plan.append(_Fill(slot + 1, tuple(sub_plan)))
                else:
                    embedded.pop()
                    items.append(PaaItem(n.symbol, False))
            else:
                sub_items, sub_plan = flat(n.children)
                items += sub_items
                plan += sub_plan
        return items, plan

    items, plan = flat(rho)
    return tuple(items), embedded, tuple(plan)


def _apply(plan: tuple, y: tuple, ys) -> tuple:
    return fill_holes(y, [None if f is None else _apply(f.plan, ys[f.kid], ys) for f in plan])


def _combine(stars: int, scan: str, plan: tuple):
    head = (HOLE,) * stars + ((scan,) if scan else ())

    def combine(ys):
        return head + _apply(plan, ys[0], ys)

    return combine


def _min_yields(m: Paa) -> dict[tuple[str, bool], int]:
    best = {(v, h): BIG for v in m.variables for h in (False, True)}
    changed = True
    while changed:
        changed = False
        for t in m.transitions:
            for hc in (False, True):
                if hc and not t.footed:
                    continue
                items, embedded, _ = _translate(t.rho, hc, m.variables)
                total = 1 if t.scan else 0
                for label in (PaaContent(items), *embedded):
                    for it in label.items:
                        if it != HOLE:
                            total += best[(it.var, it.has_children)]
                total = min(total, BIG)
                if total < best[(t.lhs, hc)]:
                    best[(t.lhs, hc)] = total
                    changed = True
    return best


class PaaSpace:
    def __init__(self, m: Paa):
        self.m = m
        self.root = PaaContent((PaaItem(m.start, False),))
        self.table = m.by_lhs()
        self.mins = _min_yields(m)
        self._rules: dict[tuple[str, bool], list] = {}
        for t in m.transitions:
            for hc in (False, True):
                if hc and not t.footed:
                    continue
                items, embedded, plan = _translate(t.rho, hc, m.variables)
                self._rules.setdefault((t.lhs, hc), []).append((t.scan, items, tuple(embedded), plan))

    def expand(self, label: PaaContent):
        items = label.items
        stars = 0
        while stars < len(items) and items[stars] == HOLE:
            stars += 1
        if stars == len(items):
            yield Expansion((), 0, lambda ys, h=(HOLE,) * stars: h)
            return
        top, rest = items[stars], items[stars + 1 :]
        for scan, new, embedded, plan in self._rules.get((top.var, top.has_children), ()):
            kids = (PaaContent(new + rest),) + embedded
            edges = (scan,) if len(kids) == 1 else None
            yield Expansion(kids, 1 if scan else 0, _combine(stars, scan, plan), edges)

    def size(self, label: PaaContent) -> int:
        return len(label.items)

    def min_yield(self, label: PaaContent) -> int:
        total = 0
        for it in label.items:
            if it != HOLE:
                total += self.mins.get((it.var, it.has_children), BIG)
        return min(total, BIG)


tree_space.register(Paa, PaaSpace)
terminal_alphabet.register(Paa, lambda m: m.terminals)
kind_of.register(Paa, lambda m: "paa")
tree_style.register(Paa, lambda m: "edges")


# ---------------------------------------------------------------- normal form

def paa_shape(m: Paa, t: PaaTransition) -> Optional[int]:
    """Which of the five normal-form templates ``t`` matches (1-5), if any.

    1. ``A -> Y1 .. Z* .. Yk`` (ε) with variables Yi and a constant Z
    2. ``A -> B1( B2( .. Bk* ) )`` (ε) with variables only
    3. ``A -> B1( B2( .. Bk ) )`` (ε) with variables only
    4. ``A -> X*`` (ε) with a constant X
    5. ``A -> eps`` scanning a terminal or ε

    Returns 6 for a footless ``A -> Y1 , .. , Yk`` (ε) over k >= 2 variable
    leaves: not part of the normal form, but handled directly by the
    conversions to and from two-level systems.
    """
    var_set, const_set = m.variables, m.constants
    rho = t.rho
    if not rho:
        return 5
    if t.scan:
        return None
    if len(rho) == 1 and rho[0].foot and rho[0].symbol in const_set:
        return 4
    if all(not n.children for n in rho):
        feet = [n for n in rho if n.foot]
        if (len(rho) > 1 and len(feet) == 1 and feet[0].symbol in const_set
                and all(n.symbol in var_set for n in rho if not n.foot)):
            return 1
        if len(rho) > 1 and not feet and all(n.symbol in var_set for n in rho):
            return 6
    if len(rho) != 1:
        return None
    node = rho[0]
    while True:
        if node.symbol not in var_set:
            return None
        if not node.children:
            return 2 if node.foot else 3
        if len(node.children) != 1:
            return None
        node = node.children[0]


NORMAL_SHAPES = (1, 2, 3, 4, 5)


def paa_is_normal_form(m: Paa) -> bool:
    return all(paa_shape(m, t) in NORMAL_SHAPES for t in m.transitions)


def _chain(elems: list[str], last: Optional[PaaNode]) -> tuple:
    if last is None:
        if not elems:
            return ()
        last, elems = PaaNode(elems[-1]), elems[:-1]
    node = last
    for v in reversed(elems):
        node = PaaNode(v, (node,))
    return (node,)


def paa_normal_form(m: Paa) -> Paa:
    """Rewrite every spinal transition into the five normal-form templates.

    A transition that scans and also pushes first moves through a fresh
    variable that scans on its own; the pushing part is then split along its
    spine like a TAG rule: variables become chain elements and the leaves
    hanging off a spine level move into a fresh variable that wraps them
    around a constant foot.  Fresh variables have one transition each, so run
    counts per string are preserved.
    """
    require_spinal(m)
    if paa_is_normal_form(m):
        return m
    taken = set(m.variables) | set(m.constants) | set(m.terminals)
    var_set = set(m.variables)
    const_set = set(m.constants)
    foot_const = fresh("K", taken)
    const_set.add(foot_const)
    out: list[PaaTransition] = []

    def new_var(tag: str) -> str:
        name = fresh(tag, taken)
        var_set.add(name)
        return name

    def wrapper(tag: str, left: list, right: list) -> str:
        name = new_var(compose("W", tag))
        out.append(PaaTransition(name, EPS, tuple(left) + (PaaNode(foot_const, (), True),) + tuple(right)))
        return name

    def split(i: int, lhs: str, rho: tuple) -> None:
        t = PaaTransition(lhs, EPS, rho)
        if paa_shape(PaaView(var_set, const_set), t) in NORMAL_SHAPES:
            out.append(t)
            return
        path = paa_spine(rho)
        footed = t.footed
        elems: list[str] = []
        final: list = []
        level = rho
        depth = 0
        while True:
            nxt = path[depth] if depth < len(path) else None
            if nxt is None:
                left, right = list(level), []
            else:
                j = next(k for k, c in enumerate(level) if c is nxt)
                left, right = list(level[:j]), list(level[j + 1 :])
            left = [PaaNode(x.symbol) for x in left if x.symbol in var_set]
            right = [PaaNode(x.symbol) for x in right if x.symbol in var_set]
            if nxt is None:
                final = left
                break
            if left or right:
                elems.append(wrapper(f"{i}|{depth}", left, right))
            if nxt.foot:
                break
            if nxt.symbol in var_set:
                elems.append(nxt.symbol)
            level = nxt.children
            depth += 1
        if footed:
            end = path[-1]
            if end.symbol in var_set:
                elems.append(end.symbol)
            if elems:
                new_rho = _chain(elems[:-1], PaaNode(elems[-1], (), True))
            else:
                new_rho = (PaaNode(end.symbol, (), True),)
        else:
            if len(final) == 1:
                last = final[0]
            elif not final:
                last = None
            else:
                last = PaaNode(wrapper(f"{i}|end", final, []))
            new_rho = _chain(elems, last)
        out.append(PaaTransition(lhs, EPS, new_rho))

    for i, t in enumerate(m.transitions):
        if paa_shape(m, t) in NORMAL_SHAPES:
            out.append(t)
            continue
        if t.scan:
            u = new_var(compose("U", str(i)))
            v = new_var(compose("V", str(i)))
            tv = new_var(compose("T", str(i)))
            if t.footed:
                out.append(PaaTransition(t.lhs, EPS, (PaaNode(u, (PaaNode(v, (), True),)),)))
            else:
                out.append(PaaTransition(t.lhs, EPS, (PaaNode(u, (PaaNode(v),)),)))
            out.append(PaaTransition(u, EPS, (PaaNode(tv), PaaNode(foot_const, (), True))))
            out.append(PaaTransition(tv, t.scan, ()))
            split(i, v, t.rho)
        else:
            split(i, t.lhs, t.rho)
    result = Paa(var_set, const_set, m.terminals, tuple(out), m.start)
    assert paa_is_normal_form(result)
    return result


class PaaView(NamedTuple):
    """Just the alphabets, for classifying rules of a system under construction."""

    variables: set
    constants: set


def require_paa_normal_form(m: Paa) -> None:
    require_spinal(m)
    bad = [i for i, t in enumerate(m.transitions) if paa_shape(m, t) not in NORMAL_SHAPES]
    if bad:
        raise NotNormalFormError(f"PAA transitions not in normal form: {bad}")
