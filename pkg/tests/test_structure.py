import itertools

import pytest
from hypothesis import given, settings

import oracles
from synchrolab.core import Automaton, fixture
from synchrolab.search import is_synchronizing, reset_length
from synchrolab.structure import (
    SEMIGROUP_MAX_N,
    IndeterminateError,
    is_aperiodic,
    is_bidirectional_path,
    is_irreducibly_synchronizing,
    is_kari_like,
    is_permutation_automaton,
    is_strongly_connected,
    semigroup_scan,
    weak_components,
)
from test_core import automata


@settings(max_examples=150)
@given(automata(max_n=5))
def test_aperiodic_matches_semigroup_oracle(A):
    assert is_aperiodic(A) == oracles.aperiodic(A)
    scan = semigroup_scan(A)
    if scan.aperiodic:
        assert scan.size == len(oracles.semigroup(A))


@settings(max_examples=150)
@given(automata(max_n=6))
def test_strong_connectivity_oracle(A):
    assert is_strongly_connected(A) == oracles.strongly_connected(A)


def test_aperiodic_series():
    for n in range(2, 13):
        A = fixture("aperiodic3", n)
        assert is_aperiodic(A)
        assert reset_length(A) == n + n // 2 - 2


def test_cerny_is_not_aperiodic():
    assert not is_aperiodic(fixture("cerny", 4))


def test_semigroup_cap():
    A = fixture("aperiodic3", 8)
    with pytest.raises(IndeterminateError):
        is_aperiodic(A, cap=10)
    scan = semigroup_scan(A, cap=10)
    assert scan.truncated and scan.aperiodic is None


def test_semigroup_size_limit():
    with pytest.raises(ValueError):
        semigroup_scan(fixture("cerny", SEMIGROUP_MAX_N + 1))


def _irreducible_oracle(A):
    for r in range(1, A.k):
        for letters in itertools.combinations(range(A.k), r):
            B = Automaton(A.n, r, tuple(A.delta[x] for x in letters))
            if oracles.reset_length(B) is not None:
                return False
    return True


@settings(max_examples=150)
@given(automata(max_n=5, max_k=4))
def test_irreducible_oracle(A):
    if not is_synchronizing(A):
        with pytest.raises(ValueError):
            is_irreducibly_synchronizing(A)
        return
    assert is_irreducibly_synchronizing(A) == _irreducible_oracle(A)


def test_irreducible_fixtures():
    assert is_irreducibly_synchronizing(fixture("fig1"))
    for g in ("g1", "g2", "g3", "g4"):
        assert is_irreducibly_synchronizing(fixture(g))
    for n in range(4, 13):
        assert is_irreducibly_synchronizing(fixture("aperiodic3", n))
    # adding a reset letter makes the other letters redundant only if they synchronize alone
    C = fixture("cerny", 4)
    assert not is_irreducibly_synchronizing(C.add_letter((0, 0, 0, 0)))
    # a unary synchronizing automaton has no proper non-empty sub-alphabet
    assert is_irreducibly_synchronizing(Automaton.from_rows([[0, 0, 1]]))


def test_bidirectional_path():
    # 0 <-> 1 <-> 2 with self-loops elsewhere
    A = Automaton.from_rows([[1, 2, 2], [0, 0, 1]])
    assert is_bidirectional_path(A)
    assert reset_length(A) == 2
    assert not is_bidirectional_path(fixture("cerny", 3))
    star = Automaton.from_rows([[1, 0, 0, 0], [2, 1, 0, 2], [3, 1, 2, 0]])
    assert not is_bidirectional_path(star)
    assert is_bidirectional_path(Automaton.from_rows([[0]]))
    assert not is_bidirectional_path(Automaton.from_rows([[1, 0, 2], [0, 1, 2]]))


def test_components_and_permutations():
    A = Automaton.from_rows([[1, 0, 3, 2, 4], [0, 0, 2, 2, 4]])
    assert weak_components(A) == [[0, 1], [2, 3], [4]]
    assert not is_permutation_automaton(A)
    assert is_permutation_automaton(Automaton.from_rows([[1, 2, 0]]))


def test_kari_like():
    K = fixture("kari")
    assert is_kari_like(K)
    assert is_kari_like(fixture("kari_prime"))
    # renaming states and letters
    assert is_kari_like(K.relabel([3, 1, 5, 0, 2, 4]).permute_letters([1, 0]))
    # trivial extensions: identity letter and repeated letter
    assert is_kari_like(K.add_letter(tuple(range(6))))
    assert is_kari_like(K.add_letter(K.delta[0]))
    assert not is_kari_like(fixture("cerny", 6))
    assert not is_kari_like(K.add_letter((0, 0, 0, 0, 0, 0)))


def test_kari_like_disjoint_union():
    K = fixture("kari")
    rows = [K.delta[0] + (6, 7), K.delta[1] + (7, 6)]
    assert is_kari_like(Automaton.from_rows(rows))
    # a second non-permutation component is not allowed
    rows = [K.delta[0] + (6, 6), K.delta[1] + (7, 6)]
    assert not is_kari_like(Automaton.from_rows(rows))
