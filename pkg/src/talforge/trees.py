"""Derivation trees and holed strings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from .symbols import HOLE, TalforgeError

Yield = tuple  # tuple of terminal symbols, possibly containing HOLE


@dataclass(frozen=True, eq=False)
class DerivationTree:
    """A node-labelled ordered tree.

    ``edges`` is either ``None`` (CFG-style trees) or holds one annotation per
    child: the terminal scanned on the way to that child, ``""`` for ε.
    ``yield_`` is stored explicitly because for controlled-grammar trees it is
    assembled with :func:`plug` rather than by reading leaves left to right.
    """

    label: Any
    children: tuple["DerivationTree", ...] = ()
    edges: Optional[tuple[str, ...]] = None
    yield_: Yield = ()
    size: int = field(default=1)

    @staticmethod
    def make(label: Any, children: Sequence["DerivationTree"] = (), edges=None,
             yield_: Yield = ()) -> "DerivationTree":
        kids = tuple(children)
        return DerivationTree(label, kids, None if edges is None else tuple(edges),
                              tuple(yield_), 1 + sum(c.size for c in kids))

    def word(self) -> str:
        """The yield joined into a display string."""
        return "".join(self.yield_)

    def height(self) -> int:
        best = 0
        stack = [(self, 0)]
        while stack:
            node, depth = stack.pop()
            best = max(best, depth)
            stack.extend((c, depth + 1) for c in node.children)
        return best

    def nodes(self) -> Iterable["DerivationTree"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


def leaf_yield(tree: DerivationTree, is_terminal) -> Yield:
    """Concatenate terminal leaves (CFG-style reading of a tree)."""
    out = []
    for node in tree.nodes():
        if not node.children and is_terminal(node.label):
            out.append(node.label)
    return tuple(out)


def edge_yield(tree: DerivationTree) -> Yield:
    """Concatenate edge annotations down a unary chain (PDA-style reading)."""
    out = []
    node = tree
    while node.children:
        if len(node.children) != 1:
            raise TalforgeError("edge yield is only defined on unary chains")
        if node.edges and node.edges[0]:
            out.append(node.edges[0])
        node = node.children[0]
    return tuple(out)


# ---------------------------------------------------------------- rendering

def label_text(label: Any) -> str:
    if isinstance(label, str):
        return label
    render = getattr(label, "render", None)
    if callable(render):
        return render()
    return str(label)


def tree_to_json(tree: DerivationTree) -> dict:
    """``{label, edge, children}`` document; ``edge`` is the annotation on the
    edge from the parent (``null`` at the root and in CFG-style trees)."""

    def build(node: DerivationTree, edge):
        return {
            "label": label_text(node.label),
            "edge": edge,
            "children": [
                build(child, None if node.edges is None else node.edges[i])
                for i, child in enumerate(node.children)
            ],
        }

    # iterative fallback is unnecessary for the tree sizes the CLI prints
    return build(tree, None)


def tree_to_dot(tree: DerivationTree, name: str = "derivation") -> str:
    lines = [f"digraph {json.dumps(name)} {{", "  node [shape=box];"]
    counter = 0
    stack = [(tree, None, None)]
    while stack:
        node, parent, edge = stack.pop()
        me = f"n{counter}"
        counter += 1
        lines.append(f"  {me} [label={json.dumps(label_text(node.label))}];")
        if parent is not None:
            attr = f" [label={json.dumps(edge or 'ε')}]" if edge is not None else ""
            lines.append(f"  {parent} -> {me}{attr};")
        for i in range(len(node.children) - 1, -1, -1):
            e = None if node.edges is None else node.edges[i]
            stack.append((node.children[i], me, e))
    lines.append("}")
    # keep node declarations in creation order for stable diffs
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- holed strings

@dataclass(frozen=True)
class HoledString:
    """Terminal string interleaved with hole markers.

    Controlled-grammar yields use at most one hole per string; intermediate
    yields of automaton-controlled nodes may carry several, filled left to
    right.
    """

    symbols: tuple[str, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "HoledString":
        return cls(tuple(text))

    @property
    def holes(self) -> int:
        return sum(1 for s in self.symbols if s == HOLE)

    def __str__(self) -> str:
        return "".join(self.symbols)

    def plug(self, other: "HoledString") -> "HoledString":
        return HoledString(plug(self.symbols, other.symbols))


def plug(u: Sequence[str], v: Sequence[str]) -> Yield:
    """Replace the first hole of ``u`` by ``v``."""
    u = tuple(u)
    try:
        i = u.index(HOLE)
    except ValueError:
        raise TalforgeError("cannot plug into a string without a hole") from None
    return u[:i] + tuple(v) + u[i + 1 :]


def plug_chain(parts: Sequence[Sequence[str]]) -> Yield:
    """``w1(w2(...(wk)))`` -- right-nested plugging."""
    if not parts:
        return (HOLE,)
    acc = tuple(parts[-1])
    for part in reversed(parts[:-1]):
        acc = plug(part, acc)
    return acc


def fill_holes(u: Sequence[str], fillers: Sequence[Optional[Sequence[str]]]) -> Yield:
    """Fill the holes of ``u`` positionally; ``None`` keeps a hole open."""
    out: list[str] = []
    it = iter(fillers)
    for sym in u:
        if sym == HOLE:
            repl = next(it, None)
            if repl is None:
                out.append(HOLE)
            else:
                out.extend(repl)
        else:
            out.append(sym)
    return tuple(out)
