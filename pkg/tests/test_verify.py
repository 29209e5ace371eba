import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synchrolab.core import Automaton, fixture
from synchrolab.genx import GenerationPlan, run_plan
from synchrolab.search import reset_length
from synchrolab.structure import is_irreducibly_synchronizing, is_strongly_connected
from synchrolab.verify import (
    CAMPAIGNS,
    GRID_CAMPAIGNS,
    CampaignResult,
    campaign_gaps,
    campaign_plan,
    check_cerny,
    check_conjecture1,
    check_conjecture2,
    check_conjecture3,
    check_conjecture4,
    check_conjecture5,
    check_conjecture6,
    chunk_count,
    evaluate_chunk,
    replay,
    run_campaign,
    spectrum_gaps,
    subset_bound,
)
from synchrolab.search import greedy_compress_worst, greedy_extend_worst


# -- per-automaton checkers -----------------------------------------------------------

def test_check_cerny():
    r = check_cerny(fixture("cerny", 5))
    assert r.applicable and r.ok and r.details["reset_length"] == 16
    assert not check_cerny(Automaton.from_rows([[1, 0]])).applicable


def test_check_conjecture1():
    r = check_conjecture1(fixture("cerny", 6))
    assert r.applicable and r.ok and r.details["max_extension"] == {0: 6}
    # prime cycle lengths are outside the hypothesis
    assert not check_conjecture1(fixture("cerny", 5)).applicable


def test_check_conjecture2():
    for n in range(2, 9):
        r = check_conjecture2(fixture("aperiodic3", n))
        assert r.applicable and r.ok
    assert not check_conjecture2(fixture("cerny", 4)).applicable


def test_check_conjecture3():
    path = Automaton.from_rows([[1, 2, 2], [0, 0, 1]])
    r = check_conjecture3(path)
    assert r.applicable and r.ok and r.details["reset_length"] == 2
    assert not check_conjecture3(fixture("cerny", 4)).applicable


def test_check_conjecture4():
    r = check_conjecture4(fixture("cerny", 5))
    assert r.applicable and r.ok
    assert max(r.details["avoid_lengths"]) <= 8
    # a letter that misses a state avoids it in one step
    assert min(r.details["avoid_lengths"]) == 1


def test_check_conjecture5_kari():
    for name in ("kari", "kari_prime"):
        r = check_conjecture5(fixture(name))
        assert r.ok
        assert r.details["exempt"] == [4]
        assert r.details["lengths"][4] == 17


def test_check_conjecture5_without_exemption(monkeypatch):
    import synchrolab.verify as V

    monkeypatch.setattr(V, "is_kari_like", lambda A: False)
    r = V.check_conjecture5(fixture("kari"))
    assert r.violations == ["rank 2 needs length 17 > 16"]


def test_check_conjecture5_small_d():
    r = check_conjecture5(fixture("cerny", 5))
    assert r.ok and all(v <= d * d for d, v in r.details["lengths"].items())


def test_subset_bound_formula():
    for n in range(2, 10):
        assert subset_bound(n, n) == (n - 1) ** 2
        assert subset_bound(n, 1) == 0


def test_check_conjecture6_cerny5_tight():
    r = check_conjecture6(fixture("cerny", 5))
    assert r.applicable and r.ok
    pairs = [S for S in r.details["tight_subsets"] if bin(S).count("1") == 2]
    assert pairs
    assert subset_bound(5, 2) == 10


def test_unsynchronizing_checkers_skip():
    A = Automaton.from_rows([[1, 0, 2], [0, 1, 2]])
    for chk in (check_cerny, check_conjecture1, check_conjecture2, check_conjecture3,
                check_conjecture4, check_conjecture6):
        r = chk(A)
        assert not r.applicable and r.ok


# -- CampaignResult -------------------------------------------------------------------

def _random_part(rng, index):
    r = CampaignResult("cerny", {"n": 4, "k": 2})
    r.tally("examined", rng.randint(0, 50))
    r.count("reset", [rng.randint(0, 9) for _ in range(rng.randint(0, 6))])
    v = rng.randint(0, 3)
    r.extreme("reset", v, [f"4 2 : {rng.randint(0, 3)} 0 0 0 ; 0 0 0 0"])
    for _ in range(rng.randint(0, 2)):
        r.violate(f"4 2 : {rng.randint(0, 3)} 1 1 1 ; 0 0 0 0", "d")
    r.chunks = [[index, index]]
    return r


@settings(max_examples=50)
@given(st.integers(0, 10 ** 6), st.integers(1, 8), st.randoms())
def test_merge_order_independent(seed, count, shuffler):
    rng = random.Random(seed)
    parts = [_random_part(rng, i) for i in range(count)]
    base = CampaignResult("cerny", {"n": 4, "k": 2})
    a = base
    for p in parts:
        a = a.merge(p)
    order = parts[:]
    shuffler.shuffle(order)
    b = base
    for p in order:
        b = p.merge(b)
    assert a.to_json() == b.to_json()
    assert CampaignResult.from_dict(json.loads(a.to_json())).to_json() == a.to_json()
    assert a.chunks == [[0, count - 1]]


def test_merge_rejects_double_counting():
    r = _random_part(random.Random(1), 3)
    with pytest.raises(ValueError):
        r.merge(r)
    with pytest.raises(ValueError):
        r.merge(CampaignResult("conj2", {"n": 4, "k": 2}))


def test_witness_cap_and_extremes():
    r = CampaignResult("x", {})
    r.extreme("m", 3, [f"w{i:02d}" for i in range(30)])
    assert len(r.extremes["m"]["witnesses"]) == 20
    r.extreme("m", 2, ["zzz"])
    assert r.extremes["m"]["value"] == 3
    r.extreme("m", 4, ["b", "a"])
    assert r.extremes["m"] == {"value": 4, "witnesses": ["a", "b"]}


def test_spectrum_gaps():
    assert spectrum_gaps({1: 2, 2: 1, 5: 1, 9: 3}) == [[3, 4], [6, 8]]
    assert spectrum_gaps({4: 1}) == []
    assert spectrum_gaps({}) == []


# -- campaigns against the per-automaton checkers ----------------------------------------

def _sweep(n, k):
    return list(run_plan(GenerationPlan(n, k)))


def test_cerny_campaign_matches_checkers():
    res = run_campaign("cerny", 4, 2)
    autos = _sweep(4, 2)
    assert res.tallies["examined"] == len(autos) == 1474
    resets = [reset_length(A) for A in autos]
    sync = [r for r in resets if r is not None]
    assert res.tallies["synchronizing"] == len(sync)
    assert sum(res.spectra["reset"].values()) == len(sync)
    sc = [r for A, r in zip(autos, resets) if r is not None and is_strongly_connected(A)]
    assert sum(res.spectra["reset_sc"].values()) == len(sc)
    assert res.extremes["reset"]["value"] == 9
    assert res.violation_count == 0
    assert res.chunks == [[0, chunk_count(campaign_plan(4, 2)) - 1]]


@pytest.mark.parametrize("name,check", [
    ("conj1", check_conjecture1), ("conj2", check_conjecture2), ("conj3", check_conjecture3),
    ("conj4", check_conjecture4), ("conj6", check_conjecture6),
])
def test_hypothesis_counts_match_checkers(name, check):
    res = run_campaign(name, 4, 2)
    applicable = sum(check(A).applicable for A in _sweep(4, 2))
    assert res.tallies["in_hypothesis"] == applicable
    assert res.violation_count == 0


def test_conj5_campaign():
    res = run_campaign("conj5", 4, 2)
    assert res.violation_count == 0 and res.tallies["examined"] == 1474


def test_problem1_small():
    res = run_campaign("problem1", 4, 2)
    autos = [A for A in _sweep(4, 2) if reset_length(A) is not None and is_irreducibly_synchronizing(A)]
    assert res.tallies["irreducibly_synchronizing"] == len(autos)
    assert res.extremes["greedy_compress"]["value"] == max(greedy_compress_worst(A) for A in autos)
    sc = [A for A in autos if is_strongly_connected(A)]
    assert res.extremes["greedy_extend"]["value"] == max(greedy_extend_worst(A) for A in sc)


def test_greedy_campaign_small():
    res = run_campaign("greedy", 4, 2)
    sc = [A for A in _sweep(4, 2) if reset_length(A) is not None and is_strongly_connected(A)]
    assert res.tallies["strongly_connected_synchronizing"] == len(sc)
    assert res.extremes["greedy_compress"]["value"] == max(greedy_compress_worst(A) for A in sc)


def test_evaluate_chunk_records():
    plan = campaign_plan(3, 2)
    res, recs = evaluate_chunk("cerny", plan, 0, records=True)
    assert len(recs) == res.tallies["examined"]
    for rec in recs:
        A = Automaton.parse(rec["a"])
        r = reset_length(A)
        assert rec["props"]["reset_length"] == (-1 if r is None else r)


def test_gaps_small():
    assert campaign_gaps(4, 2) == []


def test_replay():
    r = replay("cerny", fixture("cerny", 4).line())
    assert r.ok and r.details["reset_length"] == 9
    with pytest.raises(ValueError):
        replay("problem1", fixture("cerny", 4).line())


def test_registry():
    assert set(CAMPAIGNS) == {"cerny", "conj1", "conj2", "conj3", "conj4", "conj5", "conj6", "problem1", "greedy"}
    assert set(GRID_CAMPAIGNS) == {"cerny-binary-12", "cerny-ternary-8", "spectrum-binary-12",
                                   "gaps-binary-9-12", "greedy-binary-7"}
    assert not set(GRID_CAMPAIGNS) & set(CAMPAIGNS)
