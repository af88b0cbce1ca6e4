from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from talforge.budget import StepBudget
from talforge.cf import Cfg
from talforge.equiv import (AlphabetMismatchError, canonical_code, check_d_strong, check_d_weak,
                            language_profile, shape_profile, word_text)
from talforge.trees import DerivationTree


def random_tree(rng: random.Random, budget: int) -> DerivationTree:
    kids = []
    while budget > 1 and rng.random() < 0.6:
        size = rng.randint(1, budget - 1)
        kids.append(random_tree(rng, size))
        budget -= size
    return DerivationTree.make(rng.choice("xyz"), kids)


def shuffled(rng: random.Random, t: DerivationTree) -> DerivationTree:
    kids = [shuffled(rng, c) for c in t.children]
    rng.shuffle(kids)
    return DerivationTree.make("relabelled", kids)


def test_canonical_code_ignores_labels_and_child_order():
    a = DerivationTree.make("S", [DerivationTree.make("A"), DerivationTree.make("B", [DerivationTree.make("b")])])
    b = DerivationTree.make("T", [DerivationTree.make("C", [DerivationTree.make("c")]), DerivationTree.make("D")])
    assert canonical_code(a) == canonical_code(b) == "((())())"


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_canonical_code_is_shuffle_invariant(seed):
    rng = random.Random(seed)
    t = random_tree(rng, 25)
    assert canonical_code(shuffled(rng, t)) == canonical_code(t)


def test_aa_pair_differs_only_in_shape(aa):
    strong = check_d_strong(aa["G_aa"], aa["P_aa"], 4)
    assert strong.verdict == "unequal"
    assert strong.witness == ("a", "a")
    assert strong.counts == (1, 1)  # same count, different shape
    assert strong.exit_code == 1
    assert check_d_weak(aa["G_aa"], aa["P_aa"], 4).verdict == "equal"


def test_verdict_json_is_stable(aa):
    v = check_d_strong(aa["G_aa"], aa["P_aa"], 4)
    body = json.loads(v.to_json())
    assert body["witness"] == "aa"
    assert body["mode"] == "dstrong"
    assert body["detail"]["shapes_a"] == {"((())(()))": 1}
    assert body["detail"]["shapes_b"] == {"(((())))": 1}
    assert v.to_json() == check_d_strong(aa["G_aa"], aa["P_aa"], 4).to_json()


def test_alphabets_must_agree(aa):
    other = Cfg({"S"}, {"b"}, [("S", ("b",))], "S")
    with pytest.raises(AlphabetMismatchError):
        check_d_weak(aa["G_aa"], other, 3)


def test_truncation_makes_an_agreeing_check_inconclusive(weir):
    tight = StepBudget(max_nodes=10)
    v = check_d_weak(weir["G2oG1"], weir["TAGofWeir"], 12, tight)
    assert v.verdict == "inconclusive"
    assert v.exit_code == 2
    assert any(v.truncated)


def test_truncated_side_with_more_derivations_is_still_a_difference():
    many = Cfg({"S"}, {"a"}, [("S", ("S",)), ("S", ("a",))], "S")  # infinitely ambiguous
    once = Cfg({"S"}, {"a"}, [("S", ("a",))], "S")
    v = check_d_weak(many, once, 1, StepBudget(max_nodes=200))
    assert v.truncated == (True, False)
    assert v.verdict == "unequal" and v.witness == ("a",)


def test_profiles(weir, aa):
    lang = language_profile(weir["G2oG1"], 8)
    assert json.loads(lang.to_json())["counts"] == {"": 1, "abcd": 1, "aabbccdd": 1}
    shapes = shape_profile(weir["TAGofWeir"], 4)
    assert shapes.style == "plug"
    assert shape_profile(weir["P2"], 4).style == "edges"
    assert shape_profile(weir["G2oG1"], 4).style == "plug"
    assert shape_profile(weir["P2oG1"], 4).style == "leaves"
    assert sum(shapes.pairs().values()) == 2
    assert shape_profile(aa["G_aa"], 2).style == "leaves"


def test_word_text_spaces_long_symbols():
    assert word_text(("a", "b")) == "ab"
    assert word_text(("l1", "l2")) == "l1 l2"
