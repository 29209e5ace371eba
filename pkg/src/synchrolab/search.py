"""Exact power-automaton searches.

All functions here are exact.  Anything that indexes the full subset lattice
is limited to ``n <= max_subset_bits()`` (24 unless overridden through the
``SYNCHROLAB_MAX_SUBSET_BITS`` environment variable).  Non-synchronizing
inputs give ``None`` rather than raising, so sweeps can stream past them.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .core import Automaton, full_set, popcount

__all__ = [
    "SubsetGuardError",
    "max_subset_bits",
    "is_synchronizing",
    "pair_distances",
    "reset_length",
    "reset_word",
    "shortest_word_of_rank",
    "word_of_rank",
    "rank",
    "avoid_length",
    "avoid_lengths",
    "SyncProfile",
    "sync_profile",
    "GreedyTrace",
    "greedy_compress_worst",
    "greedy_trace",
    "greedy_extend_worst",
    "one_cluster_extension_max",
]


class SubsetGuardError(ValueError):
    """Raised when a 2**n table would exceed the configured size guard."""


def max_subset_bits() -> int:
    return int(os.environ.get("SYNCHROLAB_MAX_SUBSET_BITS", "24"))


def _guard(A: Automaton) -> np.ndarray:
    if A.n > max_subset_bits():
        raise SubsetGuardError(
            f"n={A.n} exceeds the subset guard of {max_subset_bits()} bits "
            "(set SYNCHROLAB_MAX_SUBSET_BITS to raise it)"
        )
    return A.table


def _all_letters(A: Automaton) -> int:
    return (1 << A.k) - 1


def pair_distances(A: Automaton) -> np.ndarray:
    """Shortest merging length of every pair (-1 where no word merges it)."""
    return K.pair_distances(A.table, _all_letters(A))


def is_synchronizing(A: Automaton) -> bool:
    if A.n == 1:
        return True
    if A.k == 0:
        return False
    return bool(K.is_sync_pairs(A.table, _all_letters(A)))


def _bfs(A, start, mode, param, want_path):
    d, _, word = K.bfs_from(_guard(A), start, mode, param, want_path)
    if d < 0:
        return None, None
    return int(d), tuple(int(x) for x in word)


def reset_length(A: Automaton) -> int | None:
    return shortest_word_of_rank(A, 1)


def reset_word(A: Automaton) -> tuple[int, ...] | None:
    return word_of_rank(A, 1)


def shortest_word_of_rank(A: Automaton, r: int) -> int | None:
    """Length of a shortest w with |Qw| <= r, or None if the rank of A exceeds r."""
    if not 1 <= r <= A.n:
        raise ValueError(f"rank target {r} outside 1..{A.n}")
    if r == A.n:
        return 0
    if A.k == 0:
        return None
    return _bfs(A, full_set(A.n), 0, r, False)[0]


def word_of_rank(A: Automaton, r: int) -> tuple[int, ...] | None:
    """A shortest word of rank at most r (None if there is none)."""
    if not 1 <= r <= A.n:
        raise ValueError(f"rank target {r} outside 1..{A.n}")
    if r == A.n:
        return ()
    if A.k == 0:
        return None
    return _bfs(A, full_set(A.n), 0, r, True)[1]


def rank(A: Automaton) -> int:
    """Minimum of |Qw| over all words."""
    if A.k == 0:
        return A.n
    best, _ = K.explore(_guard(A))
    return int(min(c for c in range(A.n + 1) if best[c] >= 0))


def avoid_length(A: Automaton, q: int) -> int | None:
    """Length of a shortest w with q outside Qw."""
    if not 0 <= q < A.n:
        raise ValueError(f"state {q} out of range")
    if A.k == 0:
        return None
    return _bfs(A, full_set(A.n), 1, q, False)[0]


def avoid_lengths(A: Automaton) -> list[int | None]:
    if A.k == 0:
        return [None] * A.n
    _, avoid = K.explore(_guard(A))
    return [None if v < 0 else int(v) for v in avoid]


# -- subset synchronization -----------------------------------------------------

class SyncProfile:
    """Shortest synchronizing length L(S) of every non-empty subset S.

    Index with a bitmask or an iterable of states; ``None`` means that no word
    maps S to a singleton.
    """

    def __init__(self, A: Automaton, table: np.ndarray):
        self.automaton = A
        self.table = table

    def _mask(self, S) -> int:
        if isinstance(S, (int, np.integer)):
            mask = int(S)
        else:
            mask = 0
            for q in S:
                mask |= 1 << q
        if mask <= 0 or mask >= len(self.table):
            raise ValueError("subset must be a non-empty subset of the states")
        return mask

    def __getitem__(self, S) -> int | None:
        v = int(self.table[self._mask(S)])
        return None if v < 0 else v

    def witness(self, S) -> tuple[int, ...] | None:
        A = self.automaton
        mask = self._mask(S)
        if self.table[mask] < 0:
            return None
        word = []
        while self.table[mask] > 0:
            target = self.table[mask] - 1
            for x in range(A.k):
                T = A.image(mask, x)
                if self.table[T] == target:
                    word.append(x)
                    mask = T
                    break
        return tuple(word)

    def max_by_size(self) -> dict[int, int | None]:
        """Largest L(S) for each cardinality (None if some subset of that size never synchronizes)."""
        out: dict[int, int | None] = {}
        pc = K.popcounts(len(self.table))
        for s in range(1, self.automaton.n + 1):
            vals = self.table[1:][pc[1:] == s]
            out[s] = None if (vals < 0).any() else int(vals.max())
        return out


def sync_profile(A: Automaton) -> SyncProfile:
    return SyncProfile(A, K.sync_profile(_guard(A)))


# -- greedy algorithms ------------------------------------------------------------

@dataclass(frozen=True)
class GreedyTrace:
    """One run of the greedy compressing algorithm: (set, word) steps down to a singleton."""

    steps: tuple[tuple[int, tuple[int, ...]], ...]
    final: int

    @property
    def length(self) -> int:
        return sum(len(w) for _, w in self.steps)

    @property
    def word(self) -> tuple[int, ...]:
        return tuple(x for _, w in self.steps for x in w)


def greedy_compress_worst(A: Automaton) -> int | None:
    """Worst total length of the greedy compressing algorithm started at Q."""
    if not is_synchronizing(A):
        return None
    if A.n == 1:
        return 0
    W = K.greedy_compress_table(_guard(A))
    return int(W[full_set(A.n)])


def compress_options(A: Automaton, S: int) -> tuple[int, dict[int, tuple[int, ...]]]:
    """Shortest compressing length for S and every image reachable at that length.

    Returns (d, {image: a word of length d reaching it}); d is -1 if S is
    incompressible.
    """
    size = popcount(S)
    parent = {S: None}
    layer = [S]
    d = 0
    while layer:
        d += 1
        nxt = []
        found = {}
        for T in layer:
            for x in range(A.k):
                U = A.image(T, x)
                if U in parent:
                    continue
                parent[U] = (T, x)
                nxt.append(U)
                if popcount(U) < size:
                    found[U] = True
        if found:
            out = {}
            for U in sorted(found):
                word = []
                V = U
                while parent[V] is not None:
                    V, x = parent[V]
                    word.append(x)
                out[U] = tuple(reversed(word))
            return d, out
        layer = nxt
    return -1, {}


def greedy_trace(A: Automaton) -> GreedyTrace | None:
    """A worst-case greedy run (ties broken toward the smallest bitmask)."""
    if not is_synchronizing(A):
        return None
    W = K.greedy_compress_table(_guard(A))
    S = full_set(A.n)
    steps = []
    while popcount(S) > 1:
        _, options = compress_options(A, S)
        T = max(options, key=lambda U: (W[U], -U))
        steps.append((S, options[T]))
        S = T
    return GreedyTrace(tuple(steps), S)


def greedy_extend_worst(A: Automaton, start: str = "adversarial") -> int:
    """Worst total length of the greedy extending algorithm.

    ``start="adversarial"`` lets the adversary pick the initial singleton;
    ``start="best"`` takes the most favourable singleton.
    """
    if start not in ("adversarial", "best"):
        raise ValueError("start must be 'adversarial' or 'best'")
    from .structure import is_strongly_connected

    if not is_synchronizing(A) or not is_strongly_connected(A):
        raise ValueError("greedy extension needs a synchronizing, strongly connected automaton")
    if A.n == 1:
        return 0
    v = int(K.greedy_extend_worst(_guard(A), start == "adversarial"))
    if v < 0:
        raise RuntimeError("greedy extension got stuck; automaton violates its preconditions")
    return v


# -- one-cluster letters ------------------------------------------------------------

def one_cluster_extension_max(A: Automaton, a: int) -> int | None:
    """Max over non-empty proper S inside the cycle C of letter ``a`` of the
    least |w| with |S (w a^l)^-1 & C| > |S|; None if some S admits no such w."""
    if not 0 <= a < A.k:
        raise ValueError(f"letter {a} out of range")
    table = _guard(A)
    ok, cyc, m, level = K.letter_cluster(table, a)
    if not ok:
        raise ValueError(f"letter {a} is not one-cluster")
    v = int(K.one_cluster_ext(table, a, cyc, level))
    return None if v < 0 else v

