from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cfg_word_count
from systems_gen import random_two_level
from talforge.cf import Cfg, enumerate_system
from talforge.control import (LdCfg, LdProduction, TriLabel, TwoLevel, completed_words, expand_node,
                              ld_normal_form, ld_pda_one_state, ld_validate, normalize_two_level, pair_chains,
                              pair_relation, root_node, two_level_trees, weir_derive)
from talforge.equiv import check_d_strong, check_d_weak
from talforge.symbols import HOLE, TalforgeError, ValidationError
from talforge.textfmt import parse_file

WEIR_12 = {(): 1, tuple("abcd"): 1, tuple("aabbccdd"): 1, tuple("aaabbbcccddd"): 1}
PAIRINGS = {"G2oG1": "CFG∘CFG", "P2oG1": "PDA∘CFG", "G2oP1": "CFG∘PDA", "P2oP1": "PDA∘PDA"}

seeds = st.integers(min_value=0, max_value=10_000)


def test_ld_validation_reports_each_violation():
    bad = LdCfg({"S", "A"}, {"a"}, {"l1", "l2"},
                (LdProduction("l1", "S", ("A", "A"), (0, 1)),
                 LdProduction("l1", "A", ("a",), (0,)),
                 LdProduction("l3", "A", ("a",))), "S")
    with pytest.raises(ValidationError) as err:
        ld_validate(bad)
    text = " / ".join(err.value.violations)
    assert "duplicate label 'l1'" in text
    assert "two distinguished symbols" in text
    assert "distinguished mark on a non-nonterminal" in text
    assert "undeclared label 'l3'" in text


def test_controller_alphabet_must_match_labels(weir):
    g1 = weir["G1"]
    wrong = Cfg({"S"}, {"l1"}, [("S", ("l1",))], "S")
    with pytest.raises(ValidationError, match="controllee label set"):
        TwoLevel(wrong, g1)
    with pytest.raises(TalforgeError):
        TwoLevel(g1, g1)


@pytest.mark.parametrize("name", sorted(PAIRINGS))
def test_each_pairing_derives_the_weir_language(weir, name):
    s = weir[name]
    assert s.pairing == PAIRINGS[name]
    e = enumerate_system(s, 12)
    assert not e.truncated
    assert e.counts() == WEIR_12


def test_tree_semantics_agrees_with_control_word_semantics(weir):
    s = weir["G2oG1"]
    for y in WEIR_12:
        assert len(weir_derive(s, y)) == len(two_level_trees(s, y)) == 1
    assert len(weir_derive(s, "abcdd")) == len(two_level_trees(s, "abcdd")) == 0


def test_completed_control_words_are_accepted_by_the_controller(weir):
    s = weir["G2oG1"]
    ctrl_lang = set(enumerate_system(s.controller, 8).counts())
    (d,) = weir_derive(s, "aabbccdd")
    words = completed_words(d.tree, s)
    assert ("l1", "l1", "l2", "l2", "l3") in words
    assert all(w in ctrl_lang for w in words)


def test_normalization_adds_controller_words():
    text = """
    system ldcfg L { l1: S -> "a" ^S "b" ; l2: S -> eps ; }
    system cfg C { S -> "l1" S ; S -> "l2" ; }
    system twolevel T { controller C ; controllee L ; }
    """
    wb = parse_file(text)
    ll, words = ld_normal_form(wb["L"])
    assert ll.is_normal_form() and len(words) == 2
    assert set(words) <= ll.labels
    nf = normalize_two_level(wb["T"])
    assert nf.is_normal_form()
    assert normalize_two_level(nf) is nf
    assert check_d_weak(wb["T"], nf, 8).verdict == "equal"
    assert enumerate_system(nf, 6).counts() == {(): 1, ("a", "b"): 1, tuple("aabb"): 1, tuple("aaabbb"): 1}


def test_cfg_cfg_root_expansion(weir):
    s = normalize_two_level(weir["G2oG1"])
    root = root_node(s)
    assert root == TriLabel("S", "S", None)
    cases = expand_node(s, root)
    # the normalized start rule S -> R T splits the path; only live splits are offered
    assert [c.case for c in cases] == ["c"] * len(cases)
    shapes = {tuple((k.ctrl, k.top, k.bottom) for k in c.children) for c in cases}
    assert ("R", "S", "S") in {kids[0] for kids in shapes}
    assert all(kids[-1][2] is None for kids in shapes)


def test_hole_discipline_in_cfg_cfg_trees(weir):
    s = weir["G2oG1"]
    for w in ("abcd", "aabbccdd"):
        (t,) = two_level_trees(s, w)
        for node in t.nodes():
            if isinstance(node.label, TriLabel):
                holes = sum(1 for x in node.yield_ if x == HOLE)
                assert holes == (0 if node.label.bottom is None else 1)


def test_empty_after_last_label_is_not_a_separate_derivation():
    # C0 -> C1 C1 reads l5 l2 either as (l5 C0)(eps) or (eps)(l5 C0); only
    # the second leaves nothing after the last label.
    text = """
    system cfg C {
      C0 -> "l0" ; C1 -> "l1" ; C0 -> "l2" ; C0 -> C1 C1 ; C1 -> "l5" C0 ; C1 -> eps ;
      terminals "l3" "l4" ;
    }
    system ldcfg L {
      l0: N0 -> "a" ; l1: N1 -> "a" ; l2: N2 -> "a" ;
      l3: N0 -> N1 ^N2 ; l4: N2 -> ^N1 "b" ; l5: N0 -> ^N2 "a" N0 ;
      start N0 ;
    }
    system twolevel T { controller C ; controllee L ; }
    """
    wb = parse_file(text)
    c = wb["C"]
    prods = [(p.lhs, p.rhs) for p in c.productions]
    assert cfg_word_count(c.nonterminals, prods, "C0", ("l5", "l2")) == 2
    assert cfg_word_count(c.nonterminals, prods, "C0", ("l5", "l2"), trailing_empty=False) == 1
    assert enumerate_system(wb["T"], 5).counts() == {("a",): 1, tuple("aaa"): 1, tuple("aaaaa"): 1}


def test_pair_relation_and_chains():
    # A can move x -> y, B can move y -> end; A B threads x to the end only through y
    steps = [("A", {("x", "y")}, ()), ("B", {("y", None)}, ()), ("S", {("x", "x")}, ("A", "B"))]
    rel, succ = pair_relation(steps, ["x", "y"])
    assert rel["S"] == {("x", None)}
    assert succ[("A", "x")] == ["y"]
    assert list(pair_chains(rel, succ, ("A", "B"), "x", None)) == [("x", "y", None)]
    assert list(pair_chains(rel, succ, ("B", "A"), "x", None)) == []
    assert list(pair_chains(rel, succ, (), "x", "x")) == [("x",)]


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_single_state_controllee_keeps_counts(seed):
    s = random_two_level(random.Random(seed), "cfg-pda")
    one = ld_pda_one_state(s)
    assert len(one.controllee.states) == 1
    assert check_d_weak(s, one, 5).verdict == "equal"


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from(["cfg-cfg", "pda-cfg", "cfg-pda", "pda-pda"]))
def test_normalization_keeps_derivation_counts(seed, pairing):
    s = random_two_level(random.Random(seed), pairing)
    assert check_d_weak(s, normalize_two_level(s), 5).verdict == "equal"


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_every_tree_yield_is_hole_free(seed):
    s = random_two_level(random.Random(seed), "cfg-cfg")
    for y, trees in enumerate_system(s, 5).trees.items():
        assert HOLE not in y
        assert all(t.yield_ == y for t in trees)
