from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from systems_gen import random_nf_pda
from talforge.budget import StepBudget
from talforge.cf import (Cfg, Pda, PdaTransition, Production, cfg_min_yield, cfg_normal_form, cfg_to_pda,
                         enumerate_system, pda_normal_form, pda_one_state, pda_to_cfg, prune_cfg, trees_for)
from talforge.equiv import check_d_strong, check_d_weak
from talforge.symbols import NotNormalFormError, TalforgeError, ValidationError

seeds = st.integers(min_value=0, max_value=10_000)


def sums() -> Cfg:
    return Cfg({"E"}, {"x", "+"}, [("E", ("E", "+", "E")), ("E", ("x",))], "E")


def test_cfg_validation_lists_every_problem():
    with pytest.raises(ValidationError) as err:
        Cfg({"S"}, {"a"}, [("T", ("a",)), ("S", ("b",))], "U")
    text = " / ".join(err.value.violations)
    assert "start symbol 'U'" in text
    assert "undeclared lhs 'T'" in text
    assert "undeclared symbol 'b'" in text


def test_pda_validation():
    with pytest.raises(ValidationError, match="undeclared state"):
        Pda({"p"}, {"a"}, {"Z"}, [("p", "Z", "a", "r", ())], "p", "Z", "p")


def test_cfg_normal_form_introduces_preterminals_and_keeps_counts():
    g = sums()
    nf = cfg_normal_form(g)
    assert nf.is_normal_form() and not g.is_normal_form()
    assert nf.fresh and nf.fresh <= nf.nonterminals
    assert cfg_normal_form(nf) is nf
    assert enumerate_system(nf, 7).counts() == enumerate_system(g, 7).counts()


def test_pda_normal_form_splits_scan_and_push():
    p = Pda({"q"}, {"a"}, {"S"}, [("q", "S", "a", "q", ("S",)), ("q", "S", "a", "q", ())], "q", "S", "q")
    nf = pda_normal_form(p)
    assert nf.is_normal_form()
    assert len(nf.transitions) == 3
    assert check_d_weak(p, nf, 6).verdict == "equal"


def test_conversions_require_normal_form():
    with pytest.raises(NotNormalFormError):
        cfg_to_pda(sums())
    p = Pda({"q"}, {"a"}, {"S"}, [("q", "S", "a", "q", ("S",))], "q", "S", "q")
    with pytest.raises(NotNormalFormError):
        pda_to_cfg(p)
    with pytest.raises(NotNormalFormError):
        pda_one_state(p)


def test_cfg_to_pda_keeps_counts_but_not_shapes():
    g = cfg_normal_form(sums())
    p = cfg_to_pda(g)
    assert len(p.states) == 1 and p.stack_alphabet == g.nonterminals
    assert check_d_weak(g, p, 7).verdict == "equal"
    strong = check_d_strong(g, p, 7)
    assert strong.verdict == "unequal" and strong.witness == tuple("x+x")


def test_min_yield_and_pruning():
    g = Cfg({"S", "A", "Dead", "Far"}, {"a"},
            [("S", ("A", "A")), ("A", ("a",)), ("Dead", ("Dead",)), ("Far", ("a",))], "S")
    assert cfg_min_yield(g)["S"] == 2
    assert cfg_min_yield(g)["Dead"] > 10 ** 6
    pruned = prune_cfg(g)
    assert pruned.nonterminals == {"S", "A"}
    assert enumerate_system(pruned, 4).counts() == {("a", "a"): 1}


def test_trees_for_counts_ambiguity():
    found = trees_for(sums(), "x+x+x+x")
    assert len(found) == 5 and not found.truncated
    assert {t.yield_ for t in found} == {tuple("x+x+x+x")}


def test_trees_for_rejects_foreign_symbols():
    with pytest.raises(TalforgeError, match="outside the terminal alphabet"):
        trees_for(sums(), "xy")


def test_empty_language_and_empty_word():
    g = Cfg({"S"}, {"a"}, [("S", ())], "S")
    assert enumerate_system(g, 3).counts() == {(): 1}
    dead = Cfg({"S"}, {"a"}, [("S", ("S", "S"))], "S")
    e = enumerate_system(dead, 3)
    assert e.counts() == {} and not e.truncated


def test_budget_truncation_is_flagged_not_raised():
    e = enumerate_system(sums(), 9, StepBudget(max_nodes=20))
    assert e.truncated and "max_nodes" in e.reasons


def test_infinite_ambiguity_truncates():
    g = Cfg({"S"}, {"a"}, [("S", ("S",)), ("S", ("a",))], "S")
    assert enumerate_system(g, 1, StepBudget(max_nodes=500)).truncated


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("TALFORGE_BUDGET", "5")
    assert enumerate_system(sums(), 7).truncated
    monkeypatch.setenv("TALFORGE_BUDGET", "50000,32")
    assert StepBudget.from_env() == StepBudget(50000, 32)
    monkeypatch.setenv("TALFORGE_BUDGET", "lots")
    with pytest.raises(TalforgeError):
        StepBudget.from_env()


def test_budget_must_be_positive():
    with pytest.raises(TalforgeError):
        StepBudget(0)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_one_state_automaton_is_d_strong(seed):
    p = random_nf_pda(random.Random(seed))
    q = pda_one_state(p)
    assert len(q.states) == 1
    assert check_d_strong(p, q, 5).verdict == "equal"


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_triple_grammar_keeps_counts(seed):
    p = random_nf_pda(random.Random(seed))
    assert check_d_weak(p, pda_to_cfg(p), 5).verdict == "equal"
    assert check_d_weak(p, pda_to_cfg(p, prune=True), 5).verdict == "equal"


def test_explicit_transition_objects_are_accepted():
    t = PdaTransition("q", "S", "a", "q", ())
    p = Pda({"q"}, {"a"}, {"S"}, (t,), "q", "S", "q")
    assert enumerate_system(p, 2).counts() == {("a",): 1}
    assert Production("S", ()).render() == "S -> eps"
