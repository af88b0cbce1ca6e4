from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from systems_gen import random_epda, random_lig, random_spinal_paa, random_spinal_tag
from talforge.budget import StepBudget
from talforge.cf import enumerate_system, trees_for
from talforge.equiv import check_d_weak
from talforge.lig import lig_replay, lig_stack_delta, lig_step, stack_total
from talforge.paa import constants_ok, paa_accepts, paa_count
from talforge.symbols import NotNormalFormError, NotSpinalError, TalforgeError
from talforge.tag import tag_count
from talforge.tal import is_spinal, tal_enumerate, tal_is_normal_form, tal_normal_form
from talforge.textfmt import parse_file

WEIR_12 = {(): 1, tuple("abcd"): 1, tuple("aabbccdd"): 1, tuple("aaabbbcccddd"): 1}
TAL_WEIR = ("TAGofWeir", "LIG_WEIR", "EPDA_WEIR", "PAA_WEIR")

seeds = st.integers(min_value=0, max_value=10_000)

NOT_SPINAL = """
system tag T {
  constants X ;
  S -> X( X( "a" ) , X( "b" ) ) ;
  S -> X( "c" ) ;
}
system paa M {
  constants X ;
  S -> X( A ) , X( A ) @ eps ;
  A -> eps @ "a" ;
}
"""


@pytest.mark.parametrize("name", TAL_WEIR)
def test_weir_language_in_every_formalism(weir, name):
    e = tal_enumerate(weir[name], 12)
    assert not e.truncated
    assert e.counts() == WEIR_12


@pytest.mark.parametrize("name", ("TAGofWeir", "LIG_WEIR", "PAA_WEIR"))
def test_normal_form_keeps_counts(weir, name):
    g = weir[name]
    nf = tal_normal_form(g)
    assert tal_is_normal_form(nf)
    assert check_d_weak(g, nf, 8).verdict == "equal"


def test_epda_inserting_other_stacks_has_no_normal_form(weir):
    with pytest.raises(NotNormalFormError, match="inner stack other than"):
        tal_normal_form(weir["EPDA_WEIR"])


def test_only_tal_systems_are_accepted(weir):
    with pytest.raises(TalforgeError, match="expected a TAG, LIG, EPDA or PAA"):
        tal_enumerate(weir["G2"], 3)


def test_spinal_check_names_offending_rules(weir):
    wb = parse_file(NOT_SPINAL)
    assert is_spinal(wb["T"]) == (False, [0])
    assert is_spinal(wb["M"]) == (False, [0])
    assert is_spinal(weir["TAGofWeir"]) == (True, [])
    assert is_spinal(weir["LIG_WEIR"]) == (True, [])
    with pytest.raises(NotSpinalError) as err:
        tal_normal_form(wb["T"])
    assert err.value.offending == [0]
    with pytest.raises(NotSpinalError, match="transitions"):
        tal_normal_form(wb["M"])


def test_literal_adjunction_counts_match_the_tree_engine(weir):
    g = weir["TAGofWeir"]
    for w in ("", "abcd", "aabbccdd", "abdc", "aabbcd"):
        n, truncated = tag_count(g, w)
        assert not truncated
        assert n == len(trees_for(g, w))


def test_paa_membership(weir):
    m = weir["PAA_WEIR"]
    assert paa_accepts(m, "aabbccdd")
    assert not paa_accepts(m, "aabbccd")
    assert not paa_accepts(m, "abab")
    assert paa_count(m, "abcd") == (1, False)


def test_paa_configurations_never_strand_a_constant(weir):
    m = weir["PAA_WEIR"]
    seen = []
    paa_count(m, "aabbccdd", check=lambda c: seen.append(constants_ok(m, c)))
    assert seen and all(seen)


def test_lig_steps_change_stack_size_by_the_rule_delta(weir):
    g = weir["LIG_WEIR"]
    (t,) = trees_for(g, "aabbccdd")
    steps = lig_replay(g, t)
    assert len(steps) == 6
    for form, at, prod in steps:
        assert stack_total(lig_step(form, at, prod)) - stack_total(form) == lig_stack_delta(prod)


def test_epda_budget_truncation(weir):
    e = tal_enumerate(weir["EPDA_WEIR"], 12, StepBudget(max_nodes=30))
    assert e.truncated


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_random_tag_adjunction_agrees_with_engine(seed):
    g = random_spinal_tag(random.Random(seed))
    e = enumerate_system(g, 4)
    assert not e.truncated
    for y, n in e.counts().items():
        assert tag_count(g, y) == (n, False)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_random_paa_runs_agree_with_engine(seed):
    m = random_spinal_paa(random.Random(seed))
    e = enumerate_system(m, 4)
    assert not e.truncated
    for y, n in e.counts().items():
        assert paa_count(m, y) == (n, False)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([random_spinal_tag, random_lig, random_epda, random_spinal_paa]))
def test_random_normal_forms_keep_counts(seed, gen):
    g = gen(random.Random(seed))
    nf = tal_normal_form(g)
    assert tal_is_normal_form(nf)
    assert check_d_weak(g, nf, 5).verdict == "equal"
