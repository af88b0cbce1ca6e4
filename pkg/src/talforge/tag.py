"""Tree-adjoining grammars with variables and constants."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

from .budget import StepBudget, default_budget
from .cf import BIG
from .engine import Expansion, Leaf
from .registry import kind_of, terminal_alphabet, tree_space, tree_style
from .symbols import (EPS, HOLE, NotNormalFormError, NotSpinalError, TalforgeError,
                      ValidationError, compose, fresh, word)
from .trees import plug

FOOT = "foot"
SUBST = "subst"


@dataclass(frozen=True)
class TagTree:
    """An rhs tree (or a derived tree).

    ``mark`` is ``"foot"`` for the foot leaf, ``"subst"`` for a variable leaf
    that is filled by a footless production, and ``""`` otherwise.  A leaf
    with an empty mark holds a terminal or ``""`` for ε.
    """

    symbol: str
    children: tuple = ()
    mark: str = ""

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def render(self) -> str:
        if self.mark == FOOT:
            return f"{self.symbol}*"
        if self.mark == SUBST:
            return f"{self.symbol}!"
        if not self.children:
            return f'"{self.symbol}"' if self.symbol else "eps"
        return f"{self.symbol}( {' , '.join(c.render() for c in self.children)} )"

    def preorder(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def foot(self) -> Optional["TagTree"]:
        return next((n for n in self.preorder() if n.mark == FOOT), None)

    def size(self) -> int:
        return sum(1 for _ in self.preorder())


def foot_leaf(symbol: str) -> TagTree:
    return TagTree(symbol, (), FOOT)


def subst_leaf(symbol: str) -> TagTree:
    return TagTree(symbol, (), SUBST)


def term_leaf(symbol: str) -> TagTree:
    return TagTree(symbol, (), "")


@dataclass(frozen=True)
class TagProduction:
    lhs: str
    rhs: TagTree

    @property
    def footed(self) -> bool:
        return self.rhs.foot() is not None

    def render(self) -> str:
        return f"{self.lhs} -> {self.rhs.render()}"


@dataclass(frozen=True)
class Tag:
    variables: frozenset
    constants: frozenset
    terminals: frozenset
    productions: tuple
    start: str

    def __post_init__(self):
        for name in ("variables", "constants", "terminals"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        prods = tuple(p if isinstance(p, TagProduction) else TagProduction(*p) for p in self.productions)
        object.__setattr__(self, "productions", prods)
        problems = []
        if self.start not in self.variables:
            problems.append(f"start symbol {self.start!r} is not a variable")
        for a, b in ((self.variables, self.constants), (self.variables, self.terminals),
                     (self.constants, self.terminals)):
            if a & b:
                problems.append(f"alphabet clash: {sorted(a & b)}")
        for i, p in enumerate(prods):
            if p.lhs not in self.variables:
                problems.append(f"production {i}: lhs {p.lhs!r} is not a variable")
            feet = 0
            for node in p.rhs.preorder():
                if node.children:
                    if node.mark:
                        problems.append(f"production {i}: marked node {node.symbol!r} has children")
                    if node.symbol not in self.variables and node.symbol not in self.constants:
                        problems.append(f"production {i}: interior node {node.symbol!r} is not a "
                                        "variable or constant")
                elif node.mark == FOOT:
                    feet += 1
                    if node.symbol not in self.variables and node.symbol not in self.constants:
                        problems.append(f"production {i}: foot {node.symbol!r} is not a variable or constant")
                elif node.mark == SUBST:
                    if node.symbol not in self.variables:
                        problems.append(f"production {i}: substitution leaf {node.symbol!r} is not a variable")
                elif node.symbol and node.symbol not in self.terminals:
                    problems.append(f"production {i}: leaf {node.symbol!r} must be a terminal, eps, "
                                    "a foot or a substitution variable")
            if feet > 1:
                problems.append(f"production {i}: more than one foot")
        if problems:
            raise ValidationError(problems)

    def by_lhs(self) -> dict[str, list[TagProduction]]:
        table: dict[str, list[TagProduction]] = {}
        for p in self.productions:
            table.setdefault(p.lhs, []).append(p)
        return table

    def is_variable(self, s: str) -> bool:
        return s in self.variables


# ---------------------------------------------------------------- spinal rules

def spine(rhs: TagTree) -> Optional[list[TagTree]]:
    """The spine of ``rhs`` as a node list, or None if the tree is not spinal.

    With a foot the spine is the path from the root to the foot.  Without one
    it follows the unique child that has children of its own; the rule is
    spinal when there is never more than one such child.
    """
    path = [rhs]
    node = rhs
    target = rhs.foot()
    while node.children:
        if target is not None:
            nxt = [c for c in node.children if c is target or target in set(c.preorder())]
        else:
            nxt = [c for c in node.children if c.children]
        if len(nxt) > 1:
            return None
        if not nxt:
            break
        node = nxt[0]
        path.append(node)
    on_spine = {id(n) for n in path}
    for n in path:
        for c in n.children:
            if id(c) not in on_spine and c.children:
                return None
    return path


def tag_is_spinal(g: Tag) -> tuple[bool, list[int]]:
    bad = [i for i, p in enumerate(g.productions) if spine(p.rhs) is None]
    return not bad, bad


def require_spinal(g: Tag) -> None:
    ok, bad = tag_is_spinal(g)
    if not ok:
        raise NotSpinalError(bad)


# ---------------------------------------------------------------- literal adjunction

def tag_step(tree: TagTree, at: tuple, prod: TagProduction) -> TagTree:
    """Rewrite the node at path ``at`` (child indices from the root) with ``prod``.

    A footed rhs takes the place of the node and its foot receives the node's
    children.  A footless rhs may only replace a leaf.
    """
    node = tree
    for i in at:
        if not 0 <= i < len(node.children):
            raise TalforgeError(f"no node at address {at}")
        node = node.children[i]
    if node.symbol != prod.lhs:
        raise TalforgeError(f"production for {prod.lhs} applied to {node.symbol}")
    if node.children and not prod.footed:
        raise TalforgeError("a footless tree can only replace a leaf")
    kids = node.children

    def inst(n: TagTree) -> TagTree:
        if n.mark == FOOT:
            return TagTree(n.symbol, kids, "" if kids else SUBST)
        return TagTree(n.symbol, tuple(inst(c) for c in n.children), n.mark)

    new = inst(prod.rhs)

    def rebuild(n: TagTree, path: tuple) -> TagTree:
        if not path:
            return new
        i = path[0]
        ch = list(n.children)
        ch[i] = rebuild(ch[i], path[1:])
        return TagTree(n.symbol, tuple(ch), n.mark)

    return rebuild(tree, tuple(at))


def tag_frontier(tree: TagTree) -> tuple:
    return tuple(n.symbol for n in tree.preorder() if not n.children and not n.mark and n.symbol)


def first_variable(g: Tag, tree: TagTree) -> Optional[tuple]:
    """Address of the leftmost-outermost variable node (preorder)."""
    stack = [(tree, ())]
    while stack:
        node, path = stack.pop()
        if node.symbol in g.variables and (node.children or node.mark):
            return path
        for i in range(len(node.children) - 1, -1, -1):
            stack.append((node.children[i], path + (i,)))
    return None


def _subsequence(small: tuple, big: tuple) -> bool:
    it = iter(big)
    return all(any(s == b for b in it) for s in small)


def tag_count(g: Tag, w, budget: Optional[StepBudget] = None) -> tuple[int, bool]:
    """Count derived trees of ``w`` by exhaustive adjunction search.

    Always rewrites the leftmost-outermost variable node, so each derivation
    is found once.  A node with children takes footed productions and a leaf
    takes footless ones.  Returns ``(count, truncated)``.
    """
    budget = budget or default_budget()
    w = word(w)
    mins = _min_yields(g)
    table = g.by_lhs()
    cap = 4 * budget.max_sentential_length
    count = 0
    steps = 0
    truncated = False
    todo = [TagTree(g.start, (), SUBST)]
    while todo:
        tree = todo.pop()
        at = first_variable(g, tree)
        if at is None:
            if tag_frontier(tree) == w:
                count += 1
            continue
        node = tree
        for i in at:
            node = node.children[i]
        for p in table.get(node.symbol, ()):
            if p.footed != bool(node.children):
                continue
            steps += 1
            if steps > budget.max_nodes:
                return count, True
            new = tag_step(tree, at, p)
            front = tag_frontier(new)
            if not _subsequence(front, w):
                continue
            need = len(front) + sum(mins.get((n.symbol, bool(n.children)), BIG)
                                    for n in new.preorder()
                                    if n.symbol in g.variables and (n.children or n.mark))
            if need > len(w):
                continue
            if new.size() > cap:
                truncated = True
                continue
            todo.append(new)
    return count, truncated


# ---------------------------------------------------------------- derivation trees

class TagNode(NamedTuple):
    """Derivation-tree node: a variable occurrence, footed when it has children."""

    var: str
    footed: bool

    def render(self) -> str:
        return f"{self.var}{'*' if self.footed else ''}"


def _program(rhs: TagTree, variables) -> tuple[tuple, object]:
    kids: list = []

    def walk(n: TagTree):
        if not n.children:
            if n.mark == FOOT:
                if n.symbol in variables:
                    kids.append(TagNode(n.symbol, True))
                    return ("kid", len(kids) - 1)
                return ("lit", (HOLE,))
            if n.mark == SUBST:
                kids.append(TagNode(n.symbol, False))
                return ("kid", len(kids) - 1)
            if n.symbol:
                kids.append(Leaf(n.symbol))
                return ("kid", len(kids) - 1)
            return ("lit", ())
        if n.symbol in variables:
            kids.append(TagNode(n.symbol, True))
            idx = len(kids) - 1
            return ("plug", idx, tuple(walk(c) for c in n.children))
        return ("cat", tuple(walk(c) for c in n.children))

    prog = walk(rhs)
    return tuple(kids), prog


def _run(prog, ys) -> tuple:
    op = prog[0]
    if op == "kid":
        return ys[prog[1]]
    if op == "lit":
        return prog[1]
    inner: tuple = ()
    for sub in prog[-1]:
        inner += _run(sub, ys)
    if op == "cat":
        return inner
    return plug(ys[prog[1]], inner)


def _min_yields(g: Tag) -> dict[tuple[str, bool], int]:
    best = {(v, f): BIG for v in g.variables for f in (False, True)}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            total = 0
            for n in p.rhs.preorder():
                if n.symbol in g.variables and (n.children or n.mark):
                    total += best[(n.symbol, bool(n.children) or n.mark == FOOT)]
                elif not n.children and not n.mark and n.symbol:
                    total += 1
            key = (p.lhs, p.footed)
            if total < best[key]:
                best[key] = total
                changed = True
    return best


class TagSpace:
    def __init__(self, g: Tag):
        self.g = g
        self.root = TagNode(g.start, False)
        self.programs: dict[tuple[str, bool], list] = {}
        for p in g.productions:
            kids, prog = _program(p.rhs, g.variables)
            self.programs.setdefault((p.lhs, p.footed), []).append((kids, prog))
        self.mins = _min_yields(g)

    def expand(self, label: TagNode):
        for kids, prog in self.programs.get((label.var, label.footed), ()):
            yield Expansion(kids, 0, lambda ys, prog=prog: _run(prog, ys))

    def size(self, label) -> int:
        return 1

    def min_yield(self, label: TagNode) -> int:
        return self.mins.get((label.var, label.footed), BIG)


tree_space.register(Tag, TagSpace)
terminal_alphabet.register(Tag, lambda g: g.terminals)
kind_of.register(Tag, lambda g: "tag")
tree_style.register(Tag, lambda g: "plug")


# ---------------------------------------------------------------- normal form

def tag_shape(g: Tag, p: TagProduction) -> Optional[int]:
    """Which of the five normal-form templates ``p`` matches (1-5), if any.

    1. ``X( Y1! .. Z* .. Yk! )`` with constants X, Z
    2. ``B1( B2( .. Bk* ) )`` with variables only
    3. ``B1( B2( .. Bk! ) )`` with variables only
    4. ``X*`` with a constant X
    5. ``X( a )`` with a constant X and a terminal or eps

    Returns 6 for ``X( Y1! .. Yk! )``: a constant over substitution leaves
    and no foot.  That shape is not part of the normal form but the
    conversions to and from two-level systems handle it directly.
    """
    r = p.rhs
    var_set, const_set = g.variables, g.constants
    if not r.children:
        if r.mark == FOOT:
            return 4 if r.symbol in const_set else 2
        if r.mark == SUBST:
            return 3
        return None
    if r.symbol in const_set:
        kids = r.children
        if len(kids) == 1 and not kids[0].children and not kids[0].mark:
            return 5
        if all(c.mark == SUBST for c in kids):
            return 6
        feet = [c for c in kids if c.mark == FOOT]
        if (len(feet) == 1 and feet[0].symbol in const_set
                and all(c.mark == SUBST for c in kids if c.mark != FOOT)):
            return 1
        return None
    node = r
    while node.children:
        if node.symbol not in var_set or len(node.children) != 1:
            return None
        node = node.children[0]
    if node.symbol in var_set and node.mark == FOOT:
        return 2
    if node.mark == SUBST:
        return 3
    return None


def tag_is_normal_form(g: Tag) -> bool:
    return all(tag_shape(g, p) in NORMAL_SHAPES for p in g.productions)


NORMAL_SHAPES = (1, 2, 3, 4, 5)


def _chain(elems: list[str], last: TagTree) -> TagTree:
    tree = last
    for v in reversed(elems):
        tree = TagTree(v, (tree,))
    return tree


def tag_normal_form(g: Tag) -> Tag:
    """Rewrite every spinal production into the five normal-form templates.

    Walking down the spine, each variable becomes a chain element and each
    level with leaves hanging off the spine becomes a fresh variable whose
    production wraps those leaves around a constant foot.  Terminals off the
    spine move under fresh variables ``T<a> -> K(a)``.  Fresh variables have
    one production each, so derivation counts per string are preserved; tree
    shapes are not.
    """
    require_spinal(g)
    if tag_is_normal_form(g):
        return g
    taken = set(g.variables) | set(g.constants) | set(g.terminals)
    var_set = set(g.variables)
    const_set = set(g.constants)
    foot_const = fresh("K", taken)
    const_set.add(foot_const)
    out: list[TagProduction] = []
    pre: dict[str, str] = {}

    def var_for_leaf(leaf: TagTree) -> TagTree:
        if leaf.mark == SUBST:
            return leaf
        a = leaf.symbol
        if a not in pre:
            name = fresh(compose("T", a if a.isidentifier() else ("eps" if not a else "t")), taken)
            pre[a] = name
            var_set.add(name)
            out.append(TagProduction(name, TagTree(foot_const, (term_leaf(a),))))
        return subst_leaf(pre[a])

    def wrapper(tag: str, left: list, right: list) -> str:
        name = fresh(compose("W", tag), taken)
        var_set.add(name)
        kids = tuple(var_for_leaf(x) for x in left) + (foot_leaf(foot_const),) + tuple(var_for_leaf(x) for x in right)
        out.append(TagProduction(name, TagTree(foot_const, kids)))
        return name

    for i, p in enumerate(g.productions):
        if tag_shape(g, p) in NORMAL_SHAPES:
            out.append(p)
            continue
        path = spine(p.rhs)
        footed = p.footed
        elems: list[str] = []
        final: list[TagTree] = []
        for level, node in enumerate(path):
            if not node.children:
                break
            nxt = path[level + 1] if level + 1 < len(path) else None
            if nxt is None:
                left, right = list(node.children), []
            else:
                j = next(k for k, c in enumerate(node.children) if c is nxt)
                left, right = list(node.children[:j]), list(node.children[j + 1 :])
            left = [x for x in left if x.mark or x.symbol]
            right = [x for x in right if x.mark or x.symbol]
            if node.symbol in var_set:
                elems.append(node.symbol)
            if nxt is None and not footed:
                final = left
            elif left or right:
                elems.append(wrapper(f"{i}|{level}", left, right))
        end = path[-1]
        if footed:
            if end.symbol in var_set:
                elems.append(end.symbol)
                rhs = _chain(elems[:-1], foot_leaf(elems[-1]))
            elif elems:
                rhs = _chain(elems[:-1], foot_leaf(elems[-1]))
            else:
                rhs = foot_leaf(end.symbol)
        else:
            if not end.children:
                final = [end] if (end.mark or end.symbol) else []
            if len(final) == 1:
                last = var_for_leaf(final[0])
            elif not final:
                last = var_for_leaf(term_leaf(EPS))
            else:
                elems.append(wrapper(f"{i}|end", final, []))
                last = var_for_leaf(term_leaf(EPS))
            rhs = _chain(elems, last)
        out.append(TagProduction(p.lhs, rhs))
    result = Tag(var_set, const_set, g.terminals, tuple(out), g.start)
    assert tag_is_normal_form(result)
    return result


def require_tag_normal_form(g: Tag) -> None:
    require_spinal(g)
    bad = [i for i, p in enumerate(g.productions) if tag_shape(g, p) not in NORMAL_SHAPES]
    if bad:
        raise NotNormalFormError(f"TAG productions not in normal form: {bad}")
