"""End-to-end acceptance checks, one test per criterion.

Each test prints one ``PASS`` or ``FAIL`` line (with its measurements) and
then asserts.  The lines are written with output capture disabled so they
show up in a plain ``pytest -v`` run.
"""

from __future__ import annotations

import random
import time
from functools import lru_cache

import pytest

from systems_gen import (random_epda, random_lig, random_nf_pda, random_spinal_paa, random_spinal_tag,
                         random_two_level)
from talforge.cf import enumerate_system, pda_one_state
from talforge.convert import (cfg_cfg_to_tag, cfg_pda_to_paa, epda_to_pda_pda, lig_to_pda_cfg, paa_to_cfg_pda,
                              pda_cfg_to_lig, pda_pda_to_epda, swap_controllee, swap_controller, tag_to_cfg_cfg)
from talforge.equiv import canonical_code, check_d_strong, check_d_weak
from talforge.lig import Lig, LigNt, lig_replay, lig_stack_delta, lig_step, stack_total
from talforge.paa import Paa, constants_ok, paa_accepts, paa_count
from talforge.symbols import HOLE
from talforge.trees import DerivationTree, plug

WEIR_12 = {(): 1, tuple("abcd"): 1, tuple("aabbccdd"): 1, tuple("aaabbbcccddd"): 1}

WEIR_CONSTRUCTIONS = [
    ("TAGofWeir", tag_to_cfg_cfg), ("LIG_WEIR", lig_to_pda_cfg), ("PAA_WEIR", paa_to_cfg_pda),
    ("EPDA_WEIR", epda_to_pda_pda), ("G2oG1", cfg_cfg_to_tag), ("P2oG1", pda_cfg_to_lig),
    ("G2oP1", cfg_pda_to_paa), ("P2oP1", pda_pda_to_epda),
]

RANDOM_DIRECTIONS = {
    "tag_to_cfg_cfg": (random_spinal_tag, tag_to_cfg_cfg),
    "lig_to_pda_cfg": (lambda rng: random_lig(rng, any_fixed=True), lig_to_pda_cfg),
    "paa_to_cfg_pda": (random_spinal_paa, paa_to_cfg_pda),
    "epda_to_pda_pda": (lambda rng: random_epda(rng, any_inserted=True), epda_to_pda_pda),
    "cfg_cfg_to_tag": (lambda rng: random_two_level(rng, "cfg-cfg"), cfg_cfg_to_tag),
    "pda_cfg_to_lig": (lambda rng: random_two_level(rng, "pda-cfg"), pda_cfg_to_lig),
    "cfg_pda_to_paa": (lambda rng: random_two_level(rng, "cfg-pda"), cfg_pda_to_paa),
    "pda_pda_to_epda": (lambda rng: random_two_level(rng, "pda-pda"), pda_pda_to_epda),
}
PER_DIRECTION = 50
CHECK_LEN = 6


@pytest.fixture
def say(capsys):
    def emit(ok: bool, criterion: str, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
    return emit


@lru_cache(maxsize=None)
def random_cases() -> tuple:
    """``(direction, index, source, output)`` for every seeded random system."""
    cases = []
    for name, (gen, fn) in RANDOM_DIRECTIONS.items():
        rng = random.Random(name)
        for i in range(PER_DIRECTION):
            src = gen(rng)
            cases.append((name, i, src, fn(src)))
    return tuple(cases)


def test_weir_language(weir, say):
    t0 = time.perf_counter()
    e = enumerate_system(weir["G2oG1"], 12)
    took = time.perf_counter() - t0
    ok = e.counts() == WEIR_12 and not e.truncated and took < 10
    say(ok, "criterion 1", f"counts={sorted(len(w) for w in e.counts())} truncated={e.truncated} "
                           f"time={took:.2f}s")
    assert ok


def test_four_pairings_agree(weir, say):
    t0 = time.perf_counter()
    g = weir["G2oG1"]
    a = swap_controller(g)
    b = swap_controllee(g)
    c = swap_controllee(a)
    systems = [g, a, b, c]
    pairings = {s.pairing for s in systems}
    verdicts = [check_d_weak(x, y, 10).verdict for i, x in enumerate(systems) for y in systems[i + 1:]]
    took = time.perf_counter() - t0
    ok = len(pairings) == 4 and verdicts == ["equal"] * 6 and took < 60
    say(ok, "criterion 2", f"pairings={sorted(pairings)} verdicts={verdicts} time={took:.2f}s")
    assert ok


def _acceptable(v) -> bool:
    return v.verdict == "equal" or (v.verdict == "inconclusive" and any(v.truncated))


def test_constructions_are_d_strong(weir, say):
    t0 = time.perf_counter()
    weir_bad = [name for name, fn in WEIR_CONSTRUCTIONS
                if check_d_strong(weir[name], fn(weir[name]), CHECK_LEN).verdict != "equal"]
    per_dir: dict = {}
    bad = []
    for name, i, src, out in random_cases():
        v = check_d_strong(src, out, CHECK_LEN)
        stats = per_dir.setdefault(name, [0, 0])
        stats[0] += 1
        stats[1] += any(v.truncated)
        if not _acceptable(v):
            bad.append((name, i, v.verdict))
    total = sum(n for n, _ in per_dir.values())
    truncated = sum(t for _, t in per_dir.values())
    rate = truncated / total
    took = time.perf_counter() - t0
    ok = not weir_bad and not bad and rate < 0.10 and all(n >= 50 for n, _ in per_dir.values())
    say(ok, "criterion 3", f"weir failures={weir_bad} random={total} not-equal={bad} "
                           f"truncated={truncated} ({rate:.1%}) "
                           f"per-direction={ {k: t for k, (_, t) in per_dir.items()} } time={took:.1f}s")
    assert ok


def test_same_counts_different_shapes(aa, say):
    strong = check_d_strong(aa["G_aa"], aa["P_aa"], 4)
    weak = check_d_weak(aa["G_aa"], aa["P_aa"], 4)
    ok = strong.verdict == "unequal" and strong.witness == ("a", "a") and weak.verdict == "equal"
    say(ok, "criterion 4", f"dstrong={strong.verdict} witness={strong.witness} dweak={weak.verdict}")
    assert ok


def test_one_state_pdas(say):
    rng = random.Random("one-state")
    verdicts = []
    for _ in range(100):
        p = random_nf_pda(rng, max_states=3)
        v = check_d_strong(p, pda_one_state(p), CHECK_LEN)
        verdicts.append(v.verdict)
    ok = verdicts.count("equal") == 100 and "unequal" not in verdicts
    say(ok, "criterion 5", f"equal={verdicts.count('equal')} unequal={verdicts.count('unequal')} "
                           f"inconclusive={verdicts.count('inconclusive')}")
    assert ok


def test_paa_weir(weir, say):
    m = weir["PAA_WEIR"]
    accepts = {w: paa_accepts(m, w) for w in ("aabbccdd", "aabbccd", "abab")}
    e = enumerate_system(m, 12)
    ok = accepts == {"aabbccdd": True, "aabbccd": False, "abab": False} and e.counts() == WEIR_12 \
        and not e.truncated
    say(ok, "criterion 6", f"accepts={accepts} enumeration matches={e.counts() == WEIR_12}")
    assert ok


# ---------------------------------------------------------------- invariants

def _random_tree(rng: random.Random, size: int) -> DerivationTree:
    kids = []
    while size > 1 and rng.random() < 0.6:
        part = rng.randint(1, size - 1)
        kids.append(_random_tree(rng, part))
        size -= part
    return DerivationTree.make(rng.choice("xyz"), kids)


def _shuffled(rng: random.Random, t: DerivationTree) -> DerivationTree:
    kids = [_shuffled(rng, c) for c in t.children]
    rng.shuffle(kids)
    return DerivationTree.make(t.label, kids)


def _lig_step_is_linear(form, at, prod) -> bool:
    """The parent's remaining stack goes to the inheriting child and nowhere else."""
    after = lig_step(form, at, prod)
    if stack_total(after) - stack_total(form) != lig_stack_delta(prod):
        return False
    if prod.lexical:
        return after == form[:at] + prod.rhs + form[at + 1:]
    rest = form[at].stack[1:]
    expected = tuple(LigNt(x.symbol, x.stack + rest) if i == prod.heir else x for i, x in enumerate(prod.rhs))
    return after == form[:at] + expected + form[at + 1:]


def _tal_systems(weir) -> tuple[list, list]:
    ligs, paas = [weir["LIG_WEIR"]], [weir["PAA_WEIR"]]
    for _, _, src, out in random_cases():
        for s in (src, out):
            if isinstance(s, Lig):
                ligs.append(s)
            elif isinstance(s, Paa):
                paas.append(s)
    return ligs, paas


def test_invariants(weir, say):
    rng = random.Random("invariants")
    shuffles_ok = True
    for _ in range(100):
        t = _random_tree(rng, rng.randint(1, 40))
        code = canonical_code(t)
        shuffles_ok &= all(canonical_code(_shuffled(rng, t)) == code for _ in range(100))

    pieces = ("a", "b", HOLE)
    assoc_ok = True
    for _ in range(1000):
        u, v, w = (tuple(rng.choice(pieces) for _ in range(rng.randint(0, 5))) + (HOLE,) for _ in range(3))
        u = tuple(rng.sample(u, len(u)))
        v = tuple(rng.sample(v, len(v)))
        assoc_ok &= plug(plug(u, v), w) == plug(u, plug(v, w))

    ligs, paas = _tal_systems(weir)
    lig_steps = lig_bad = 0
    for g in ligs:
        max_len = 12 if g is weir["LIG_WEIR"] else CHECK_LEN
        for trees in enumerate_system(g, max_len).trees.values():
            for t in trees:
                for form, at, prod in lig_replay(g, t):
                    lig_steps += 1
                    lig_bad += not _lig_step_is_linear(form, at, prod)

    paa_configs = paa_bad = 0
    for m in paas:
        max_len = 12 if m is weir["PAA_WEIR"] else CHECK_LEN
        for w in enumerate_system(m, max_len).counts():
            seen = []
            paa_count(m, w, check=lambda c, m=m, seen=seen: seen.append(constants_ok(m, c)))
            paa_configs += len(seen)
            paa_bad += seen.count(False)

    ok = shuffles_ok and assoc_ok and lig_bad == 0 and paa_bad == 0 and lig_steps > 0 and paa_configs > 0
    say(ok, "criterion 7", f"canonical shuffles={shuffles_ok} plug associativity={assoc_ok} "
                           f"lig systems={len(ligs)} steps={lig_steps} bad={lig_bad} "
                           f"paa systems={len(paas)} configurations={paa_configs} bad={paa_bad}")
    assert ok
