import itertools
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from synchrolab.bounds import (
    PairSet,
    bound_report,
    compressible_pairs,
    corollary3_bound,
    cyclotomic,
    dstar,
    dstar_bruteforce,
    dstar_table,
    franklpin_sequence,
    is_prime,
    max_franklpin,
    one_cluster_data,
    one_cluster_words,
    pin_chain_bound,
    pin_rank_step,
    steinberg_eq1_bound,
    theorem1_bound,
    theorem1_reset_bound,
    theorem2_bound,
    transformation_cluster,
)
from synchrolab.core import Automaton, Transformation, fixture
from synchrolab.search import reset_length
from test_core import automata


def all_pairs(n):
    return [(x, y) for x in range(n) for y in range(x + 1, n)]


# -- pairs and Frankl-Pin sequences ------------------------------------------------------

def test_compressible_pairs_cerny4():
    A = fixture("cerny", 4)
    P = compressible_pairs(A)
    assert P.pairs == frozenset(all_pairs(4))
    expect = {p: oracles.merge_length(A, *p) for p in all_pairs(4)}
    assert P.lengths == expect
    assert P.height == max(expect.values())


def test_compressible_pairs_identity():
    P = compressible_pairs(Automaton.from_rows([[0, 1, 2]]))
    assert len(P) == 0 and P.height == 0


@settings(max_examples=100)
@given(automata(max_n=6))
def test_compressible_pairs_oracle(A):
    P = compressible_pairs(A)
    for p in all_pairs(A.n):
        d = oracles.merge_length(A, *p)
        assert P.lengths.get(p) == d


def test_restricted_pairs():
    P = PairSet.from_lengths(4, {(0, 1): 1, (0, 2): 3, (1, 3): 2})
    R = P.restricted(2)
    assert R.pairs == {(0, 1), (1, 3)} and R.height == 2
    assert len(P) == 3 and P.height == 3


def test_franklpin_examples():
    assert max_franklpin([], 4, 2) == 0
    assert max_franklpin(all_pairs(4), 4, 2) == 6
    assert max_franklpin([(1, 3)], 4, 2) == 1


def _fp_oracle(pairs, n, m):
    """Longest Frankl-Pin sequence by plain depth-first search."""
    subsets = [frozenset(c) for c in itertools.combinations(range(n), m)]
    best = 0

    def rec(chosen, length):
        nonlocal best
        best = max(best, length)
        for M in subsets:
            for x, y in pairs:
                if x in M and y in M and not any(x in C and y in C for C in chosen):
                    rec(chosen + [M], length + 1)
                    break

    rec([], 0)
    return best


@pytest.mark.parametrize("n,m", [(3, 2), (3, 3), (4, 2), (4, 3), (4, 4), (5, 4)])
def test_franklpin_exact_small(n, m):
    rng = itertools.islice(itertools.combinations(all_pairs(n), 3), 0, None, 3)
    for pairs in itertools.chain([tuple(all_pairs(n))], rng):
        assert max_franklpin(pairs, n, m) == _fp_oracle(pairs, n, m)


def test_franklpin_all_pairs_binomial():
    for n in range(2, 8):
        for m in range(2, n + 1):
            assert max_franklpin(all_pairs(n), n, m) == math.comb(n - m + 2, 2)


@settings(max_examples=80)
@given(st.integers(2, 7).flatmap(lambda n: st.tuples(
    st.just(n), st.integers(2, n), st.sets(st.sampled_from(all_pairs(n)), max_size=12))))
def test_franklpin_sequences_are_valid(args):
    n, m, pairs = args
    seq = franklpin_sequence(sorted(pairs), n, m)
    assert seq.is_valid(pairs)
    assert len(seq) == max_franklpin(sorted(pairs), n, m)
    # independent recheck of the two conditions
    for i, (M, x, y) in enumerate(seq.entries):
        assert bin(M).count("1") == m and M >> x & 1 and M >> y & 1
        assert all(not (Mj >> x & 1 and Mj >> y & 1) for Mj, _, _ in seq.entries[:i])


def test_franklpin_budget_still_valid():
    seq = franklpin_sequence(all_pairs(7), 7, 3, budget=1)
    assert seq.is_valid(set(all_pairs(7)))
    assert len(seq) >= 1


# -- closed-form bounds ------------------------------------------------------------------

def test_theorem1_formula():
    assert theorem1_bound(5, 3, 0, 0) == 6
    assert theorem1_bound(5, 3, 4, 2) == 4
    for n in range(2, 12):
        assert sum(theorem1_bound(n, m, 0, 0) for m in range(2, n + 1)) == (n ** 3 - n) // 6
    with pytest.raises(ValueError):
        theorem1_bound(5, 1, 0, 0)


@settings(max_examples=100)
@given(automata(max_n=5, max_k=2))
def test_theorem1_sound_random(A):
    P = compressible_pairs(A)
    for t in sorted(set(P.lengths.values())):
        Q = P.restricted(t)
        for m in range(2, A.n + 1):
            b = theorem1_bound(A.n, m, max_franklpin(Q, A.n, m), Q.height)
            for S in itertools.combinations(range(A.n), m):
                d = oracles.compress_length(A, S)
                if d is not None:
                    assert d <= b


def test_theorem1_reset_bound():
    C = fixture("cerny", 5)
    assert theorem1_reset_bound(5, compressible_pairs(C)) >= 16


def test_pin_steps():
    assert pin_rank_step(0, 6, 6) == 1
    assert pin_rank_step(10, 10, 3) == 28
    for n in range(2, 10):
        assert pin_chain_bound(n) >= (n - 1) ** 2
    with pytest.raises(ValueError):
        pin_rank_step(0, 5, 1)


def test_theorem2_examples():
    assert theorem2_bound(6, 1, 2, 4) == 27
    assert theorem2_bound(6, 1, 2, 4, dstar_values=(3, 2, 3)) == 27
    with pytest.raises(ValueError):
        theorem2_bound(6, 1, 2, 4, dstar_values=(3, 2))
    with pytest.raises(ValueError):
        theorem2_bound(6, 1, 2, 1)


@pytest.mark.parametrize("m", [2, 3, 5, 7, 11])
def test_theorem2_prime_closed_form(m):
    for n in range(m, m + 6):
        for l in range(0, 4):
            v = theorem2_bound(n, 1, l, m)
            assert v == (m - 1) * (n + l) + l
            assert v == steinberg_eq1_bound(n, l, m) + (m - 1)


def test_corollary3():
    assert corollary3_bound(10, 2) == 28
    assert corollary3_bound(2, 2) == 4
    with pytest.raises(ValueError):
        corollary3_bound(5, 1)


def test_steinberg():
    assert steinberg_eq1_bound(5, 0, 5) == 16
    assert steinberg_eq1_bound(6, 1, 5) == 25
    with pytest.raises(ValueError):
        steinberg_eq1_bound(6, 1, 4)
    assert [m for m in range(20) if is_prime(m)] == [2, 3, 5, 7, 11, 13, 17, 19]


# -- D* ----------------------------------------------------------------------------------

def test_cyclotomic():
    assert cyclotomic(1) == (-1, 1)
    assert cyclotomic(4) == (1, 0, 1)
    assert cyclotomic(6) == (1, -1, 1)
    assert cyclotomic(12) == (1, 0, -1, 0, 1)


def test_dstar_values():
    assert dstar_table(2).values == (1,)
    assert dstar_table(4).values == (3, 2, 3)
    assert dstar_table(5).values == (4, 4, 4, 4)
    assert dstar_table(12).values == (11, 8, 7, 6, 7, 6, 7, 6, 7, 8, 11)
    assert dstar_table(4).total == 8
    with pytest.raises(ValueError):
        dstar(4, 4)
    with pytest.raises(ValueError):
        dstar_bruteforce(1, 1)


@pytest.mark.parametrize("m", range(2, 10))
def test_dstar_oracle(m):
    for k in range(1, m):
        assert dstar(m, k) == dstar_bruteforce(m, k)
        assert dstar(m, k) == dstar(m, m - k)


# -- one-cluster letters --------------------------------------------------------------

def test_one_cluster_data():
    d = one_cluster_data(fixture("cerny", 5), 0)
    assert (d.m, d.level, d.cycle) == (5, 0, 0b11111)
    assert d.cycle_order == (0, 1, 2, 3, 4)
    assert one_cluster_data(fixture("kari"), 0) is None
    assert one_cluster_data(fixture("aperiodic3", 6), 0) is None
    t = transformation_cluster(Transformation((1, 2, 1, 0, 3)))
    assert (t.m, t.level, t.cycle_order) == (2, 3, (1, 2))
    with pytest.raises(ValueError):
        one_cluster_data(fixture("cerny", 5), 2)


def test_one_cluster_words():
    found = list(one_cluster_words(fixture("cerny", 4), max_len=2))
    words = [w for w, _ in found]
    assert (0,) in words and (1,) not in words
    assert all(d.m > 1 for _, d in found)


@settings(max_examples=60)
@given(automata(max_n=6, max_k=3))
def test_one_cluster_bounds_sound(A):
    r = reset_length(A)
    if r is None:
        return
    for w, d in one_cluster_words(A, max_len=2):
        assert theorem2_bound(A.n, len(w), d.level, d.m) >= r
        if len(w) == 1:
            assert corollary3_bound(A.n, d.m) >= r
            if is_prime(d.m):
                assert steinberg_eq1_bound(A.n, d.level, d.m) >= r


def test_bound_report():
    rep = bound_report(fixture("cerny", 5))
    d = json.loads(rep.to_json())
    names = {e["bound"] for e in d["bounds"]}
    assert {"theorem1_sum", "pin_chain", "theorem2", "corollary3", "steinberg_eq1"} <= names
    assert d["best_reset_bound"] >= 16
    assert rep.best() == d["best_reset_bound"]
    unsync = bound_report(Automaton.from_rows([[1, 0, 2], [0, 1, 1]]))
    assert all(e["bound"] == "theorem1_compress" for e in unsync.entries)
    assert unsync.best() is None
