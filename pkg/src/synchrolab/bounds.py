"""Upper bounds on shortest compressing and reset words, and their ingredients."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from . import _kernels as K
from .core import Automaton, Transformation, popcount

__all__ = [
    "PairSet",
    "compressible_pairs",
    "FranklPinSequence",
    "franklpin_sequence",
    "max_franklpin",
    "theorem1_bound",
    "theorem1_reset_bound",
    "pin_rank_step",
    "pin_chain_bound",
    "DStarTable",
    "dstar",
    "dstar_table",
    "dstar_bruteforce",
    "OneClusterData",
    "one_cluster_data",
    "transformation_cluster",
    "one_cluster_words",
    "theorem2_bound",
    "corollary3_bound",
    "steinberg_eq1_bound",
    "is_prime",
    "BoundReport",
    "bound_report",
]

DEFAULT_FP_BUDGET = 20_000


# -- compressible pairs ---------------------------------------------------------

@dataclass(frozen=True)
class PairSet:
    """Compressible pairs with their shortest merging lengths.

    ``lengths`` maps ``(x, y)`` with ``x < y`` to the merge length.
    """

    n: int
    lengths: dict = field(compare=False, hash=False)
    pairs: frozenset = frozenset()

    @classmethod
    def from_lengths(cls, n: int, lengths: dict) -> "PairSet":
        return cls(n, dict(lengths), frozenset(lengths))

    @property
    def height(self) -> int:
        return max(self.lengths.values(), default=0)

    def restricted(self, max_length: int) -> "PairSet":
        """Sub-set of pairs merged within ``max_length`` steps."""
        return PairSet.from_lengths(self.n, {p: d for p, d in self.lengths.items() if d <= max_length})

    def __len__(self) -> int:
        return len(self.pairs)


def compressible_pairs(A: Automaton) -> PairSet:
    D = K.pair_distances(A.table, (1 << A.k) - 1)
    lengths = {
        (x, y): int(D[x, y])
        for x in range(A.n)
        for y in range(x + 1, A.n)
        if D[x, y] >= 0
    }
    return PairSet.from_lengths(A.n, lengths)


# -- Frankl-Pin sequences ---------------------------------------------------------

@dataclass(frozen=True)
class FranklPinSequence:
    """Entries ``(M, x, y)``: an m-subset bitmask and a marked pair inside it."""

    m: int
    entries: tuple[tuple[int, int, int], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def is_valid(self, pairs=None) -> bool:
        for i, (M, x, y) in enumerate(self.entries):
            if popcount(M) != self.m or not (M >> x & 1 and M >> y & 1) or x == y:
                return False
            if pairs is not None and (min(x, y), max(x, y)) not in pairs:
                return False
            for Mj, _, _ in self.entries[:i]:
                if Mj >> x & 1 and Mj >> y & 1:
                    return False
        return True


def _fp_search(inside: list[tuple[int, int]], npairs: int, budget: int) -> tuple[int, ...]:
    """Longest chain of subsets each covering a not-yet-covered pair.

    ``inside`` lists (subset mask, bitmask of pair indices it contains).
    Returns the chosen subsets in order.
    """
    full = (1 << npairs) - 1
    cover = dict(inside)

    # greedy: always take the subset adding the fewest new pairs
    greedy = []
    cov = 0
    while True:
        opts = [(popcount(ins & ~cov), M) for M, ins in inside if ins & ~cov]
        if not opts:
            break
        _, M = min(opts)
        greedy.append(M)
        cov |= cover[M]

    memo: dict[int, tuple[int, ...]] = {}
    nodes = 0
    aborted = False

    def rec(cov: int) -> tuple[int, ...]:
        nonlocal nodes, aborted
        if cov in memo:
            return memo[cov]
        nodes += 1
        if nodes > budget:
            aborted = True
            return ()
        opts: dict[int, int] = {}
        for M, ins in inside:
            new = ins & ~cov
            if new and new not in opts:
                opts[new] = M
        best: tuple[int, ...] = ()
        room = popcount(full & ~cov)
        for new, M in sorted(opts.items(), key=lambda t: (popcount(t[0]), t[1])):
            if len(best) >= room:
                break
            sub = rec(cov | cover[M])
            if 1 + len(sub) > len(best):
                best = (M,) + sub
            if aborted:
                break
        if not aborted:
            memo[cov] = best
        return best

    exact = rec(0)
    return exact if len(exact) > len(greedy) else tuple(greedy)


def franklpin_sequence(P: PairSet | Sequence, n: int, m: int, budget: int = DEFAULT_FP_BUDGET) -> FranklPinSequence:
    """A long m-subset Frankl-Pin sequence over the pairs P.

    Exact when branch and bound finishes within ``budget`` nodes; otherwise
    the better of the partial search and a greedy construction.
    """
    if not 2 <= m <= n:
        raise ValueError("need 2 <= m <= n")
    pairs = sorted(P.pairs if isinstance(P, PairSet) else {(min(p), max(p)) for p in P})
    if not pairs:
        return FranklPinSequence(m, ())
    inside = []
    for combo in itertools.combinations(range(n), m):
        M = sum(1 << q for q in combo)
        ins = 0
        for i, (x, y) in enumerate(pairs):
            if M >> x & 1 and M >> y & 1:
                ins |= 1 << i
        if ins:
            inside.append((M, ins))
    chosen = _fp_search(inside, len(pairs), budget)
    entries = []
    covered = 0
    cover = dict(inside)
    for M in chosen:
        new = cover[M] & ~covered
        i = (new & -new).bit_length() - 1
        entries.append((M, pairs[i][0], pairs[i][1]))
        covered |= cover[M]
    return FranklPinSequence(m, tuple(entries))


def max_franklpin(P: PairSet | Sequence, n: int, m: int, budget: int = DEFAULT_FP_BUDGET) -> int:
    return len(franklpin_sequence(P, n, m, budget))


def theorem1_bound(n: int, m: int, p: int, h: int) -> int:
    """Bound on a shortest word compressing any compressible m-subset."""
    if not 2 <= m <= n or p < 0 or h < 0:
        raise ValueError("need 2 <= m <= n and p, h >= 0")
    return math.comb(n - m + 2, 2) - p + h


@lru_cache(maxsize=4096)
def _fp_lengths(n: int, pairs: frozenset, budget: int) -> tuple[int, ...]:
    return tuple(max_franklpin(pairs, n, m, budget) for m in range(2, n + 1))


def theorem1_reset_bound(n: int, P: PairSet, budget: int = DEFAULT_FP_BUDGET) -> int:
    """Sum over m of the compressing bound: a reset bound for any synchronizing
    automaton on n states in which every pair of P merges within h(P) steps."""
    p = _fp_lengths(n, P.pairs, budget)
    h = P.height
    return sum(theorem1_bound(n, m, p[m - 2], h) for m in range(2, n + 1))


# -- rank steps ---------------------------------------------------------------

def pin_rank_step(wlen: int, n: int, r: int) -> int:
    """Bound on a word of rank < r given a word of rank r and length wlen."""
    if r < 2 or wlen < 0:
        raise ValueError("need r >= 2 and wlen >= 0")
    return 2 * wlen + n - r + 1


def pin_chain_bound(n: int) -> int:
    """Reset bound obtained by chaining the rank step from the empty word."""
    length = 0
    for r in range(n, 1, -1):
        length = pin_rank_step(length, n, r)
    return length


# -- D*(m, k) ---------------------------------------------------------------------

def _poly_divmod(num: list[int], den: Sequence[int]) -> tuple[list[int], list[int]]:
    """Division by a monic integer polynomial (coefficients lowest degree first)."""
    num = list(num)
    dd = len(den) - 1
    if len(num) - 1 < dd:
        return [0], num
    quot = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c:
            quot[i - dd] = c
            for j in range(dd + 1):
                num[i - dd + j] -= c * den[j]
    rem = num[:dd] or [0]
    return quot, rem


@lru_cache(maxsize=None)
def cyclotomic(d: int) -> tuple[int, ...]:
    poly = [-1] + [0] * (d - 1) + [1]
    for e in range(1, d):
        if d % e == 0:
            poly, rem = _poly_divmod(poly, cyclotomic(e))
            assert not any(rem)
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return tuple(poly)


def _period(S: int, m: int) -> int:
    full = (1 << m) - 1
    for q in range(1, m + 1):
        if ((S << q) | (S >> (m - q))) & full == S:
            return q
    return m


def _span_dim(S: int, m: int) -> int:
    k = popcount(S)
    g = [m * (S >> i & 1) - k for i in range(m)]
    deg = 0
    for d in range(1, m + 1):
        if m % d == 0:
            _, rem = _poly_divmod(g, cyclotomic(d))
            if not any(rem):
                deg += len(cyclotomic(d)) - 1
    return m - deg


def _subsets(m: int, k: int):
    for combo in itertools.combinations(range(m), k):
        yield sum(1 << i for i in combo)


@dataclass(frozen=True)
class DStarTable:
    m: int
    values: tuple[int, ...]

    def __getitem__(self, k: int) -> int:
        if not 1 <= k <= self.m - 1:
            raise IndexError(k)
        return self.values[k - 1]

    @property
    def total(self) -> int:
        return sum(self.values)


@lru_cache(maxsize=None)
def dstar_table(m: int) -> DStarTable:
    """D*(m, k) for k = 1..m-1 via cyclotomic divisibility."""
    if m < 2:
        raise ValueError("m must be at least 2")
    vals = []
    for k in range(1, m):
        vals.append(min(m - _period(S, m) + _span_dim(S, m) for S in _subsets(m, k)))
    return DStarTable(m, tuple(vals))


def dstar(m: int, k: int) -> int:
    if m < 2 or not 1 <= k <= m - 1:
        raise ValueError("need m >= 2 and 1 <= k <= m-1")
    return dstar_table(m)[k]


def _rank(rows: list[list[Fraction]]) -> int:
    rows = [r[:] for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][c] != 0:
                f = rows[i][c] / rows[rank][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def dstar_bruteforce(m: int, k: int) -> int:
    """D*(m, k) from the rank of the rational circulant of gamma_S."""
    if m < 2 or not 1 <= k <= m - 1:
        raise ValueError("need m >= 2 and 1 <= k <= m-1")
    best = None
    for combo in itertools.combinations(range(m), k):
        S = set(combo)
        gamma = [Fraction(int(i in S)) - Fraction(k, m) for i in range(m)]
        shifts = [[gamma[(i + j) % m] for i in range(m)] for j in range(m)]
        q = next(q for q in range(1, m + 1) if {(i + q) % m for i in S} == S)
        v = m - q + _rank(shifts)
        best = v if best is None else min(best, v)
    return best


# -- one-cluster bounds -------------------------------------------------------------

@dataclass(frozen=True)
class OneClusterData:
    letter: int | None
    cycle: int
    m: int
    level: int
    cycle_order: tuple[int, ...]


def transformation_cluster(t: Transformation, letter: int | None = None) -> OneClusterData | None:
    """Cycle and level of a transformation whose functional graph is connected."""
    cyc = t.cycles()
    if len(cyc) != 1:
        return None
    C = cyc[0]
    cmask = sum(1 << q for q in C)
    level = 0
    for q in range(t.n):
        steps = 0
        while not cmask >> q & 1:
            q = t(q)
            steps += 1
        level = max(level, steps)
    start = min(C)
    order = [start]
    q = t(start)
    while q != start:
        order.append(q)
        q = t(q)
    return OneClusterData(letter, cmask, len(C), level, tuple(order))


def one_cluster_data(A: Automaton, a: int) -> OneClusterData | None:
    if not 0 <= a < A.k:
        raise ValueError(f"letter {a} out of range")
    return transformation_cluster(A.letter(a), a)


def one_cluster_words(A: Automaton, max_len: int = 3):
    """Yield (word, data) for words up to ``max_len`` inducing one-cluster
    transformations with a cycle longer than 1."""
    for L in range(1, max_len + 1):
        for w in itertools.product(range(A.k), repeat=L):
            data = transformation_cluster(A.action(w))
            if data is not None and data.m > 1:
                yield w, data


def theorem2_bound(n: int, s: int, l: int, m: int, dstar_values: DStarTable | Sequence[int] | None = None) -> int:
    if m < 2 or s < 1 or l < 0:
        raise ValueError("need m >= 2, s >= 1, l >= 0")
    if dstar_values is None:
        dstar_values = dstar_table(m)
    vals = dstar_values.values if isinstance(dstar_values, DStarTable) else tuple(dstar_values)
    if len(vals) != m - 1:
        raise ValueError(f"expected {m - 1} D* values, got {len(vals)}")
    return s * (l + m - 2) * (m - 1) + (n + 1) * (m - 1) + s * l - sum(vals)


def corollary3_bound(n: int, m: int) -> int:
    if m < 2:
        raise ValueError("m must be at least 2")
    return math.ceil(2 * n * m - 4 * m * math.log((m + 3) / 2) + 2 * m - n + 1)


def is_prime(m: int) -> bool:
    return m >= 2 and all(m % d for d in range(2, math.isqrt(m) + 1))


def steinberg_eq1_bound(n: int, l: int, m: int) -> int:
    if not is_prime(m):
        raise ValueError(f"cycle length {m} is not prime")
    return n - m + 1 + 2 * l + (m - 2) * (n + l)


# -- reports ----------------------------------------------------------------------

@dataclass
class BoundReport:
    automaton: str
    entries: list = field(default_factory=list)

    def add(self, name: str, value: int, **inputs) -> None:
        self.entries.append({"bound": name, "value": value, "inputs": inputs})

    def best(self) -> int | None:
        vals = [e["value"] for e in self.entries if e["bound"] != "theorem1_compress"]
        return min(vals, default=None)

    def to_dict(self) -> dict:
        return {"automaton": self.automaton, "bounds": self.entries, "best_reset_bound": self.best()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def bound_report(A: Automaton, word_cap: int = 3, budget: int = DEFAULT_FP_BUDGET) -> BoundReport:
    """Every applicable bound for A.  Reset bounds appear only for synchronizing A."""
    from .search import is_synchronizing

    rep = BoundReport(A.line())
    P = compressible_pairs(A)
    sync = is_synchronizing(A)
    if len(P):
        for m in range(2, A.n + 1):
            p = max_franklpin(P, A.n, m, budget)
            rep.add("theorem1_compress", theorem1_bound(A.n, m, p, P.height), m=m, p=p, h=P.height, pairs=len(P))
    if not sync:
        return rep
    if A.n >= 2:
        rep.add("theorem1_sum", theorem1_reset_bound(A.n, P, budget), h=P.height, pairs=len(P))
        rep.add("pin_chain", pin_chain_bound(A.n), n=A.n)
    seen = set()
    for w, data in one_cluster_words(A, word_cap):
        key = (len(w), data.level, data.m)
        if key in seen:
            continue
        seen.add(key)
        word = " ".join(map(str, w))
        rep.add("theorem2", theorem2_bound(A.n, len(w), data.level, data.m), word=word, s=len(w), l=data.level, m=data.m)
        if len(w) == 1:
            rep.add("corollary3", corollary3_bound(A.n, data.m), letter=w[0], m=data.m)
            if is_prime(data.m):
                rep.add("steinberg_eq1", steinberg_eq1_bound(A.n, data.level, data.m), letter=w[0], l=data.level, m=data.m)
    return rep

