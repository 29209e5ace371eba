import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synchrolab.core import (
    FIXTURES,
    Automaton,
    AutomatonFormatError,
    Transformation,
    apply,
    automorphisms,
    canonical_form,
    fixture,
    format_word,
    full_set,
    is_isomorphic,
    members,
    parse_word,
    popcount,
    restrict,
    stateset,
    word_rank,
)


@st.composite
def automata(draw, max_n=6, max_k=3, min_k=1):
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(min_k, max_k))
    rows = draw(st.lists(st.lists(st.integers(0, n - 1), min_size=n, max_size=n), min_size=k, max_size=k))
    return Automaton.from_rows(rows, n)


def test_parse_and_print():
    A = Automaton.parse("4 2 : 1 2 3 0 ; 1 1 2 3")
    assert A.n == 4 and A.k == 2
    assert A.delta == ((1, 2, 3, 0), (1, 1, 2, 3))
    assert A.line() == "4 2 : 1 2 3 0 ; 1 1 2 3"
    assert str(A) == A.line()


@pytest.mark.parametrize(
    "line",
    [
        "4 2 : 1 2",
        "4 2 : 1 2 3 0 ; 1 1 2",
        "4 2 : 1 2 3 4 ; 1 1 2 3",
        "4 2 1 2 3 0 ; 1 1 2 3",
        "x 2 : 1",
        "2 1 : 0 a",
        "0 0 :",
    ],
)
def test_malformed_lines(line):
    with pytest.raises(AutomatonFormatError):
        Automaton.parse(line)


@given(automata())
def test_line_round_trip(A):
    assert Automaton.parse(A.line()) == A


def test_statesets():
    assert stateset([0, 2]) == 0b101
    assert members(0b1011) == [0, 1, 3]
    assert popcount(0b1011) == 3
    assert full_set(4) == 15
    assert stateset([]) == 0


def test_words():
    assert parse_word("aca") == (0, 2, 0)
    assert parse_word("0 1 1") == (0, 1, 1)
    assert parse_word("1") == (1,)
    assert parse_word([1, 0]) == (1, 0)
    assert parse_word("") == ()
    assert format_word((0, 2, 0), letters=True) == "aca"
    assert format_word((0, 2, 0)) == "0 2 0"
    with pytest.raises(ValueError):
        parse_word("a!")


def test_transformation_basics():
    t = Transformation((1, 2, 0, 0))
    assert t(3) == 0
    assert t.rank == 3
    assert not t.is_permutation()
    assert t.cycles() == [(0, 1, 2)]
    assert t.image(0b1000) == 0b0001
    assert t.preimage(0b0001) == 0b1100
    assert t.power(3) == Transformation((0, 1, 2, 2))
    assert t.power(0) == Transformation.identity(4)
    with pytest.raises(ValueError):
        Transformation((0, 5))


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(*[st.lists(st.integers(0, n - 1), min_size=n, max_size=n)] * 3)))
def test_composition_is_associative(rows):
    s, t, u = (Transformation(tuple(r)) for r in rows)
    assert (s * t) * u == s * (t * u)


def test_cerny_reset_word_applies():
    A = fixture("cerny", 4)
    w = parse_word("baaabaaab")
    assert popcount(apply(A, full_set(4), w)) == 1
    assert word_rank(A, w) == 1
    assert word_rank(A, "") == 4
    assert apply(A, [0, 3], "b") == stateset([1, 3])


@given(automata(), st.data())
def test_apply_is_a_homomorphism(A, data):
    u = data.draw(st.lists(st.integers(0, A.k - 1), max_size=5))
    v = data.draw(st.lists(st.integers(0, A.k - 1), max_size=5))
    S = data.draw(st.integers(0, full_set(A.n)))
    assert apply(A, S, u + v) == apply(A, apply(A, S, u), v)
    assert A.action(u + v) == A.action(u) * A.action(v)
    assert A.action(u).image(S) == apply(A, S, u)


def test_apply_rejects_bad_letters():
    with pytest.raises(ValueError):
        apply(fixture("cerny", 3), 7, "c")


def test_restrict():
    A = fixture("g1")
    B = restrict(A, [2, 0])
    assert B.k == 2 and B.delta == (A.delta[0], A.delta[2])
    with pytest.raises(ValueError):
        restrict(A, [])
    with pytest.raises(ValueError):
        restrict(A, [3])


def _brute_canonical(A):
    best = None
    for p in itertools.permutations(range(A.n)):
        cand = A.relabel(p).delta
        if best is None or cand < best:
            best = cand
    return best


@settings(max_examples=60)
@given(automata(max_n=5))
def test_canonical_form_is_lexmin(A):
    assert canonical_form(A).delta == _brute_canonical(A)


@settings(max_examples=60)
@given(automata(max_n=8), st.data())
def test_canonical_form_relabel_invariant(A, data):
    p = data.draw(st.permutations(range(A.n)))
    assert canonical_form(A.relabel(p)) == canonical_form(A)
    assert is_isomorphic(A, A.relabel(p))


@settings(max_examples=25, deadline=None)
@given(automata(max_n=11, max_k=2), st.data())
def test_canonical_form_large_n(A, data):
    # above the brute-force size a refinement search is used instead
    p = data.draw(st.permutations(range(A.n)))
    assert canonical_form(A.relabel(p)) == canonical_form(A)


def test_canonical_form_separates_large_automata():
    A, B = fixture("cerny", 10), fixture("cerny", 10).permute_letters([1, 0])
    assert not is_isomorphic(A, B)
    assert is_isomorphic(A, B, permute_letters=True)


def test_canonical_with_letter_permutation():
    A = fixture("g1")
    for order in itertools.permutations(range(3)):
        assert canonical_form(A.permute_letters(order), permute_letters=True) == canonical_form(A, permute_letters=True)


def test_automorphisms():
    C = fixture("cerny", 5)
    assert automorphisms(C) == [(0, 1, 2, 3, 4)]
    cycle = Automaton.from_rows([[1, 2, 3, 0]])
    assert len(automorphisms(cycle)) == 4
    big = Automaton.from_rows([[(q + 1) % 10 for q in range(10)]])
    assert len(automorphisms(big)) == 10


@settings(max_examples=40)
@given(automata(max_n=6))
def test_automorphisms_commute(A):
    for p in automorphisms(A):
        assert A.relabel(p) == A


def test_fixtures_shapes():
    assert fixture("cerny", 4).line() == "4 2 : 1 2 3 0 ; 1 1 2 3"
    sizes = {"fig1": (12, 3), "g1": (5, 3), "g2": (6, 3), "g3": (6, 3), "g4": (6, 3),
             "kari": (6, 2), "kari_prime": (9, 3)}
    for name, (n, k) in sizes.items():
        A = fixture(name)
        assert (A.n, A.k) == (n, k)
    assert fixture("aperiodic3", 7).k == 3
    assert set(FIXTURES) >= set(sizes) | {"cerny", "aperiodic3"}


@pytest.mark.parametrize("args", [("cerny",), ("cerny", 1), ("nope",), ("kari", 7)])
def test_fixture_errors(args):
    with pytest.raises(ValueError):
        fixture(*args)
