"""Bounded language and derivation-shape comparison of any two systems.

Two systems are compared on every derivation whose yield has at most
``max_len`` symbols.  The weak check compares how many derivations each
string has; the strong check also requires the derivation trees of each
string to match up to isomorphism of unordered, unlabeled trees.  Trees are
compared through :func:`canonical_code`.

An enumeration that hits its budget only gives lower bounds, so a check
says ``inconclusive`` unless the difference it found is certain.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .budget import StepBudget, default_budget
from .cf import enumerate_system
from .registry import terminal_alphabet, tree_style
from .symbols import TalforgeError
from .trees import DerivationTree

EQUAL = "equal"
UNEQUAL = "unequal"
INCONCLUSIVE = "inconclusive"


class AlphabetMismatchError(TalforgeError):
    """The two systems do not share a terminal alphabet."""


def canonical_code(tree: DerivationTree) -> str:
    """AHU code: ``"(" + sorted child codes + ")"``; labels and edges are ignored."""
    codes: dict[int, str] = {}  # subtrees are shared between trees, so memoize by identity
    stack = [(tree, False)]
    while stack:
        node, done = stack.pop()
        if id(node) in codes:
            continue
        if done:
            codes[id(node)] = "(" + "".join(sorted(codes[id(c)] for c in node.children)) + ")"
            continue
        stack.append((node, True))
        stack.extend((c, False) for c in node.children if id(c) not in codes)
    return codes[id(tree)]


def word_text(y: tuple) -> str:
    """Display form of a yield: symbols glued together, or spaced if any is longer than one character."""
    return "".join(y) if all(len(s) == 1 for s in y) else " ".join(y)


@dataclass
class LanguageProfile:
    counts: dict  # yield tuple -> number of derivations
    truncated: bool
    bound: int
    budget: StepBudget
    nodes_built: int = 0

    def to_json(self) -> str:
        body = {
            "bound": self.bound,
            "budget": {"max_nodes": self.budget.max_nodes,
                       "max_sentential_length": self.budget.max_sentential_length},
            "counts": {word_text(y): n for y, n in sorted(self.counts.items(), key=_order)},
            "truncated": self.truncated,
        }
        return json.dumps(body, sort_keys=True, ensure_ascii=False)


@dataclass
class ShapeProfile:
    shapes: dict  # yield tuple -> Counter of canonical codes
    truncated: bool
    bound: int
    style: str  # how the system reads yields: "leaves", "edges" or "plug"

    def pairs(self) -> Counter:
        out: Counter = Counter()
        for y, codes in self.shapes.items():
            for code, n in codes.items():
                out[(code, y)] += n
        return out

    def to_json(self) -> str:
        body = {
            "bound": self.bound,
            "shapes": [[code, word_text(y), n] for (code, y), n
                       in sorted(self.pairs().items(), key=lambda kv: (_order((kv[0][1], 0)), kv[0][0]))],
            "style": self.style,
            "truncated": self.truncated,
        }
        return json.dumps(body, sort_keys=True, ensure_ascii=False)


def _order(item):
    y = item[0]
    return (len(y), y)


def profiles(system, max_len: int, budget: Optional[StepBudget] = None) -> tuple[LanguageProfile, ShapeProfile]:
    budget = budget or default_budget()
    e = enumerate_system(system, max_len, budget)
    lang = LanguageProfile(e.counts(), e.truncated, max_len, budget, e.nodes_built)
    shapes = {y: Counter(canonical_code(t) for t in ts) for y, ts in e.trees.items()}
    return lang, ShapeProfile(shapes, e.truncated, max_len, tree_style(system))


def language_profile(system, max_len: int, budget: Optional[StepBudget] = None) -> LanguageProfile:
    return profiles(system, max_len, budget)[0]


def shape_profile(system, max_len: int, budget: Optional[StepBudget] = None) -> ShapeProfile:
    return profiles(system, max_len, budget)[1]


@dataclass
class Verdict:
    verdict: str
    mode: str
    max_len: int
    witness: Optional[tuple] = None
    counts: tuple = (0, 0)  # derivations of the witness on each side
    truncated: tuple = (False, False)
    detail: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return {EQUAL: 0, UNEQUAL: 1, INCONCLUSIVE: 2}[self.verdict]

    def to_json(self) -> str:
        body = {
            "counts": list(self.counts),
            "max_len": self.max_len,
            "mode": self.mode,
            "truncated": list(self.truncated),
            "verdict": self.verdict,
            "witness": None if self.witness is None else word_text(self.witness),
        }
        if self.detail:
            body["detail"] = self.detail
        return json.dumps(body, sort_keys=True, ensure_ascii=False)


def _check_alphabets(a, b) -> None:
    sa, sb = terminal_alphabet(a), terminal_alphabet(b)
    if sa != sb:
        raise AlphabetMismatchError(f"terminal alphabets differ: {sorted(sa)} vs {sorted(sb)}")


def _certain(na: int, nb: int, ta: bool, tb: bool) -> bool:
    """Whether counts ``na != nb`` prove a difference, given that truncated counts are lower bounds."""
    if not ta and not tb:
        return True
    if ta and tb:
        return False
    return na > nb if ta else nb > na


def _compare(table_a: dict, table_b: dict, ta: bool, tb: bool):
    """First differing key (in key order) and whether some difference is certain.

    Tables map keys to counts.  Returns ``(first_certain or first_any, certain)``.
    """
    keys = sorted(set(table_a) | set(table_b), key=lambda k: (len(k[0]), k))
    first = None
    for k in keys:
        na, nb = table_a.get(k, 0), table_b.get(k, 0)
        if na == nb:
            continue
        if _certain(na, nb, ta, tb):
            return k, True
        if first is None:
            first = k
    return first, False


def _verdict(mode: str, max_len: int, key, certain: bool, ta: bool, tb: bool, count_a, count_b,
             detail=None) -> Verdict:
    if key is None:
        v = INCONCLUSIVE if (ta or tb) else EQUAL
        return Verdict(v, mode, max_len, truncated=(ta, tb))
    y = key[0]
    return Verdict(UNEQUAL if certain else INCONCLUSIVE, mode, max_len, y, (count_a(y), count_b(y)),
                   (ta, tb), detail or {})


def check_d_weak(a, b, max_len: int, budget: Optional[StepBudget] = None) -> Verdict:
    """Compare per-string derivation counts up to ``max_len``."""
    _check_alphabets(a, b)
    pa = language_profile(a, max_len, budget)
    pb = language_profile(b, max_len, budget)
    ta = {(y,): n for y, n in pa.counts.items()}
    tb = {(y,): n for y, n in pb.counts.items()}
    key, certain = _compare(ta, tb, pa.truncated, pb.truncated)
    return _verdict("dweak", max_len, key, certain, pa.truncated, pb.truncated,
                    lambda y: pa.counts.get(y, 0), lambda y: pb.counts.get(y, 0))


def check_d_strong(a, b, max_len: int, budget: Optional[StepBudget] = None) -> Verdict:
    """Compare per-string multisets of tree shapes up to ``max_len``."""
    _check_alphabets(a, b)
    _, sa = profiles(a, max_len, budget)
    _, sb = profiles(b, max_len, budget)
    ta = {(y, c): n for (c, y), n in sa.pairs().items()}
    tb = {(y, c): n for (c, y), n in sb.pairs().items()}
    key, certain = _compare(ta, tb, sa.truncated, sb.truncated)
    detail = None
    if key is not None:
        y = key[0]
        detail = {"shapes_a": dict(sorted(sa.shapes.get(y, Counter()).items())),
                  "shapes_b": dict(sorted(sb.shapes.get(y, Counter()).items()))}
    return _verdict("dstrong", max_len, key, certain, sa.truncated, sb.truncated,
                    lambda y: sum(sa.shapes.get(y, Counter()).values()),
                    lambda y: sum(sb.shapes.get(y, Counter()).values()), detail)
