"""Automata, transformations, words, state sets, isomorphism and fixtures.

States and letters are 0-based.  A state set is an ``int`` bitmask (bit ``q``
set iff state ``q`` is a member); this keeps image computations cheap and
makes sets hashable for free.  Words are tuples of letter indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Automaton",
    "Transformation",
    "AutomatonFormatError",
    "stateset",
    "members",
    "popcount",
    "full_set",
    "parse_word",
    "format_word",
    "apply",
    "word_rank",
    "restrict",
    "canonical_form",
    "is_isomorphic",
    "automorphisms",
    "fixture",
    "FIXTURES",
]

LETTER_NAMES = "abcdefghijklmnopqrstuvwxyz"


class AutomatonFormatError(ValueError):
    """Raised for malformed automaton lines or inconsistent tables."""


# -- state sets ---------------------------------------------------------------

def stateset(states: Iterable[int]) -> int:
    mask = 0
    for q in states:
        mask |= 1 << q
    return mask


def members(mask: int) -> list[int]:
    out = []
    q = 0
    while mask:
        if mask & 1:
            out.append(q)
        mask >>= 1
        q += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def full_set(n: int) -> int:
    return (1 << n) - 1


# -- words ------------------------------------------------------------------------

def parse_word(text: str | Sequence[int]) -> tuple[int, ...]:
    """Parse ``"0 1 0"``, ``"aca"`` or a sequence of ints into a word."""
    if not isinstance(text, str):
        return tuple(int(x) for x in text)
    text = text.strip()
    if not text:
        return ()
    if text.replace(" ", "").isdigit() and (" " in text or len(text) == 1):
        return tuple(int(x) for x in text.split())
    if all(ch in LETTER_NAMES for ch in text):
        return tuple(LETTER_NAMES.index(ch) for ch in text)
    raise ValueError(f"cannot parse word {text!r}")


def format_word(word: Sequence[int], letters: bool = False) -> str:
    if letters:
        return "".join(LETTER_NAMES[x] for x in word)
    return " ".join(str(x) for x in word)


# -- transformations ------------------------------------------------------------

@dataclass(frozen=True)
class Transformation:
    """A self-map of ``{0..n-1}``; composition ``s * t`` means apply s, then t."""

    map: tuple[int, ...]

    def __post_init__(self):
        n = len(self.map)
        if any(not 0 <= v < n for v in self.map):
            raise ValueError(f"transformation entries must lie in [0, {n})")

    @classmethod
    def identity(cls, n: int) -> "Transformation":
        return cls(tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.map)

    def __call__(self, q: int) -> int:
        return self.map[q]

    def __mul__(self, other: "Transformation") -> "Transformation":
        if other.n != self.n:
            raise ValueError("size mismatch")
        return Transformation(tuple(other.map[v] for v in self.map))

    def power(self, e: int) -> "Transformation":
        result = Transformation.identity(self.n)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def image(self, mask: int) -> int:
        out = 0
        for q in members(mask):
            out |= 1 << self.map[q]
        return out

    def preimage(self, mask: int) -> int:
        out = 0
        for q, v in enumerate(self.map):
            if mask >> v & 1:
                out |= 1 << q
        return out

    @property
    def rank(self) -> int:
        return len(set(self.map))

    def is_permutation(self) -> bool:
        return self.rank == self.n

    def cycles(self) -> list[tuple[int, ...]]:
        """Cycles of the functional graph, each starting at its least state."""
        n = self.n
        on_cycle = set()
        for q in range(n):
            p = q
            for _ in range(n):
                p = self.map[p]
            on_cycle.add(p)
        out = []
        seen = set()
        for c in sorted(on_cycle):
            if c in seen:
                continue
            cyc = [c]
            seen.add(c)
            p = self.map[c]
            while p != c:
                cyc.append(p)
                seen.add(p)
                p = self.map[p]
            out.append(tuple(cyc))
        return out

    def components(self) -> list[list[int]]:
        """Weakly connected components of the functional graph."""
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for q, v in enumerate(self.map):
            a, b = find(q), find(v)
            if a != b:
                parent[a] = b
        groups: dict[int, list[int]] = {}
        for q in range(self.n):
            groups.setdefault(find(q), []).append(q)
        return sorted(groups.values())


# -- automata -----------------------------------------------------------------

@dataclass(frozen=True)
class Automaton:
    """Complete DFA without initial or final states.

    ``delta[x][q]`` is the state reached from ``q`` by letter ``x``.
    """

    n: int
    k: int
    delta: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise AutomatonFormatError("an automaton needs at least one state")
        if self.k < 0 or len(self.delta) != self.k:
            raise AutomatonFormatError(f"expected {self.k} letter rows, got {len(self.delta)}")
        for x, row in enumerate(self.delta):
            if len(row) != self.n:
                raise AutomatonFormatError(f"row {x} has {len(row)} entries, expected {self.n}")
            for v in row:
                if not 0 <= v < self.n:
                    raise AutomatonFormatError(f"row {x} has out-of-range state {v}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], n: int | None = None) -> "Automaton":
        rows = tuple(tuple(int(v) for v in r) for r in rows)
        if n is None:
            if not rows:
                raise AutomatonFormatError("cannot infer n from an empty alphabet")
            n = len(rows[0])
        return cls(n, len(rows), rows)

    @classmethod
    def parse(cls, line: str) -> "Automaton":
        """Parse ``n k : r0 ; r1 ; ...``."""
        head, sep, body = line.strip().partition(":")
        if not sep:
            raise AutomatonFormatError("missing ':' separator")
        try:
            n, k = (int(t) for t in head.split())
        except ValueError:
            raise AutomatonFormatError(f"bad header {head.strip()!r}") from None
        chunks = [c for c in body.split(";")] if body.strip() else []
        if len(chunks) != k:
            raise AutomatonFormatError(f"expected {k} rows, found {len(chunks)}")
        try:
            rows = tuple(tuple(int(t) for t in c.split()) for c in chunks)
        except ValueError:
            raise AutomatonFormatError("non-integer entry") from None
        return cls(n, k, rows)

    def line(self) -> str:
        rows = " ; ".join(" ".join(str(v) for v in row) for row in self.delta)
        return f"{self.n} {self.k} : {rows}"

    def __str__(self) -> str:
        return self.line()

    @cached_property
    def table(self) -> np.ndarray:
        """Transition table as a read-only ``(k, n)`` int64 array."""
        arr = np.array(self.delta, dtype=np.int64).reshape(self.k, self.n)
        arr.setflags(write=False)
        return arr

    def letter(self, x: int) -> Transformation:
        return Transformation(self.delta[x])

    def action(self, word: Sequence[int]) -> Transformation:
        self._check_word(word)
        m = list(range(self.n))
        for x in word:
            row = self.delta[x]
            m = [row[v] for v in m]
        return Transformation(tuple(m))

    def _check_word(self, word: Sequence[int]) -> None:
        for x in word:
            if not 0 <= x < self.k:
                raise ValueError(f"letter {x} out of range for a {self.k}-letter alphabet")

    def image(self, mask: int, x: int) -> int:
        row = self.delta[x]
        out = 0
        q = 0
        while mask:
            if mask & 1:
                out |= 1 << row[q]
            mask >>= 1
            q += 1
        return out

    def preimage(self, mask: int, x: int) -> int:
        row = self.delta[x]
        out = 0
        for q in range(self.n):
            if mask >> row[q] & 1:
                out |= 1 << q
        return out

    def relabel(self, perm: Sequence[int]) -> "Automaton":
        """Rename state ``q`` to ``perm[q]``."""
        rows = []
        for row in self.delta:
            new = [0] * self.n
            for q in range(self.n):
                new[perm[q]] = perm[row[q]]
            rows.append(tuple(new))
        return Automaton(self.n, self.k, tuple(rows))

    def permute_letters(self, order: Sequence[int]) -> "Automaton":
        return Automaton(self.n, self.k, tuple(self.delta[x] for x in order))

    def add_letter(self, row: Sequence[int]) -> "Automaton":
        return Automaton(self.n, self.k + 1, self.delta + (tuple(row),))


# -- basic operations ---------------------------------------------------------

def _as_mask(S) -> int:
    if isinstance(S, (int, np.integer)):
        return int(S)
    return stateset(S)


def apply(A: Automaton, S, w: Sequence[int] | str) -> int:
    """Image ``Sw`` of a state set (bitmask or iterable of states)."""
    word = parse_word(w)
    A._check_word(word)
    mask = _as_mask(S)
    for x in word:
        mask = A.image(mask, x)
    return mask


def word_rank(A: Automaton, w: Sequence[int] | str) -> int:
    return popcount(apply(A, full_set(A.n), w))


def restrict(A: Automaton, letters: Iterable[int]) -> Automaton:
    letters = sorted(set(letters))
    if not letters:
        raise ValueError("restriction needs a non-empty sub-alphabet")
    for x in letters:
        if not 0 <= x < A.k:
            raise ValueError(f"letter {x} out of range")
    return Automaton(A.n, len(letters), tuple(A.delta[x] for x in letters))


# -- isomorphism ----------------------------------------------------------------

BRUTE_FORCE_MAX_N = 8


@lru_cache(maxsize=None)
def permutation_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All permutations of ``range(n)`` in lexicographic order, and their inverses."""
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)
    inv = np.empty_like(perms)
    rows = np.arange(perms.shape[0])[:, None]
    inv[rows, perms] = np.arange(n)[None, :]
    perms.setflags(write=False)
    inv.setflags(write=False)
    return perms, inv


def _relabel_all(table: np.ndarray) -> np.ndarray:
    """``out[x, p, i]``: row x of the automaton relabeled by permutation p."""
    k, n = table.shape
    perms, inv = permutation_table(n)
    rows = np.arange(perms.shape[0])[:, None]
    return np.stack([perms[rows, table[x][inv]] for x in range(k)]) if k else np.empty((0, perms.shape[0], n), np.int64)


def _lexmin_brute(table: np.ndarray) -> np.ndarray:
    k, n = table.shape
    if k == 0:
        return table.copy()
    out = _relabel_all(table)
    weights = n ** np.arange(n - 1, -1, -1, dtype=np.int64)
    cand = np.arange(out.shape[1])
    for x in range(k):
        codes = out[x, cand] @ weights
        cand = cand[codes == codes.min()]
        if cand.size == 1:
            break
    return out[:, cand[0], :]


def _automorphisms_brute(table: np.ndarray) -> list[tuple[int, ...]]:
    k, n = table.shape
    perms, _ = permutation_table(n)
    if k == 0:
        return [tuple(int(v) for v in p) for p in perms]
    out = _relabel_all(table)
    ok = np.all(out == table[:, None, :], axis=(0, 2))
    return [tuple(int(v) for v in p) for p in perms[ok]]


class _Refiner:
    """Colour refinement plus individualisation for automata with n > 8."""

    def __init__(self, table: Sequence[Sequence[int]], n: int):
        self.table = [list(r) for r in table]
        self.n = n
        self.k = len(self.table)
        self.pre = [[[] for _ in range(n)] for _ in range(self.k)]
        for x, row in enumerate(self.table):
            for q, v in enumerate(row):
                self.pre[x][v].append(q)

    def refine(self, colors: list[int]) -> list[int]:
        n, k = self.n, self.k
        ncol = len(set(colors))
        while True:
            sigs = []
            for q in range(n):
                out = tuple(colors[self.table[x][q]] for x in range(k))
                inn = tuple(sorted((x, colors[p]) for x in range(k) for p in self.pre[x][q]))
                sigs.append((colors[q], out, inn))
            rank = {s: i for i, s in enumerate(sorted(set(sigs)))}
            colors = [rank[s] for s in sigs]
            if len(rank) == ncol:
                return colors
            ncol = len(rank)

    @staticmethod
    def individualize(colors: list[int], v: int) -> list[int]:
        c = colors[v]
        raw = [2 * col + (1 if col == c and q != v else 0) for q, col in enumerate(colors)]
        rank = {s: i for i, s in enumerate(sorted(set(raw)))}
        return [rank[s] for s in raw]

    def leaf_table(self, colors: list[int]) -> tuple[tuple[int, ...], ...]:
        rows = []
        for row in self.table:
            new = [0] * self.n
            for q in range(self.n):
                new[colors[q]] = colors[row[q]]
            rows.append(tuple(new))
        return tuple(rows)

    def canonical(self) -> tuple[tuple[int, ...], ...]:
        best: list = [None]
        seen: dict = {}
        gens: list[list[int]] = []

        def orbit_partition(prefix, cell):
            fixing = [g for g in gens if all(g[v] == v for v in prefix)]
            parent = {v: v for v in range(self.n)}

            def find(x):
                while parent[x] != x:
                    x = parent[x]
                return x

            for g in fixing:
                for v in range(self.n):
                    a, b = find(v), find(g[v])
                    if a != b:
                        parent[a] = b
            return find

        def search(colors, prefix):
            colors = self.refine(colors)
            if len(set(colors)) == self.n:
                tab = self.leaf_table(colors)
                if tab in seen:
                    other = seen[tab]
                    inv = [0] * self.n
                    for q, c in enumerate(other):
                        inv[c] = q
                    gens.append([inv[colors[q]] for q in range(self.n)])
                else:
                    seen[tab] = colors
                if best[0] is None or tab < best[0]:
                    best[0] = tab
                return
            sizes: dict[int, int] = {}
            for c in colors:
                sizes[c] = sizes.get(c, 0) + 1
            target = min(c for c, s in sizes.items() if s > 1)
            cell = [q for q in range(self.n) if colors[q] == target]
            tried: list[int] = []
            for v in cell:
                if tried:
                    find = orbit_partition(prefix, cell)
                    if any(find(v) == find(u) for u in tried):
                        continue
                tried.append(v)
                search(self.individualize(colors, v), prefix + [v])

        search([0] * self.n, [])
        return best[0]

    def automorphisms(self) -> list[tuple[int, ...]]:
        colors = self.refine([0] * self.n)
        n = self.n
        out: list[tuple[int, ...]] = []
        sigma = [-1] * n
        used = [False] * n

        def assign(q, v, trail):
            stack = [(q, v)]
            while stack:
                a, b = stack.pop()
                if sigma[a] == b:
                    continue
                if sigma[a] != -1 or used[b] or colors[a] != colors[b]:
                    return False
                sigma[a] = b
                used[b] = True
                trail.append(a)
                for row in self.table:
                    stack.append((row[a], row[b]))
            return True

        def undo(trail):
            for a in trail:
                used[sigma[a]] = False
                sigma[a] = -1

        def rec():
            try:
                q = sigma.index(-1)
            except ValueError:
                out.append(tuple(sigma))
                return
            for v in range(n):
                if used[v] or colors[v] != colors[q]:
                    continue
                trail: list[int] = []
                if assign(q, v, trail):
                    rec()
                undo(trail)

        rec()
        return sorted(out)


def _state_canonical(A: Automaton) -> tuple[tuple[int, ...], ...]:
    if A.k == 0:
        return ()
    if A.n <= BRUTE_FORCE_MAX_N:
        return tuple(tuple(int(v) for v in row) for row in _lexmin_brute(A.table))
    return _Refiner(A.delta, A.n).canonical()


def canonical_form(A: Automaton, permute_letters: bool = False) -> Automaton:
    """Canonical representative of the isomorphism class of ``A``.

    For ``n <= 8`` this is the lexicographically least transition table (letter
    rows compared in order) over all state relabelings; above that, the least
    table over the leaves of an individualisation-refinement search, which is
    canonical but not necessarily the global lexicographic minimum.  With
    ``permute_letters`` the minimum is also taken over letter orders.
    """
    if not permute_letters or A.k <= 1:
        return Automaton(A.n, A.k, _state_canonical(A))
    best = None
    for order in itertools.permutations(range(A.k)):
        cand = _state_canonical(A.permute_letters(order))
        if best is None or cand < best:
            best = cand
    return Automaton(A.n, A.k, best)


def is_isomorphic(A: Automaton, B: Automaton, permute_letters: bool = False) -> bool:
    if (A.n, A.k) != (B.n, B.k):
        return False
    return canonical_form(A, permute_letters) == canonical_form(B, permute_letters)


def automorphisms(A: Automaton) -> list[tuple[int, ...]]:
    """All state permutations commuting with every letter, sorted."""
    if A.n <= BRUTE_FORCE_MAX_N:
        return _automorphisms_brute(A.table)
    return _Refiner(A.delta, A.n).automorphisms()


# -- fixtures -----------------------------------------------------------------
# Source tables number states 1..n; here they are 0..n-1.

_STATIC_FIXTURES = {
    "fig1": (
        (0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 11),
        (1, 0, 7, 7, 5, 4, 6, 3, 9, 8, 11, 10),
        (0, 1, 3, 2, 4, 5, 6, 7, 8, 9, 10, 11),
    ),
    "g1": ((2, 1, 2, 3, 4), (3, 1, 3, 0, 4), (1, 0, 2, 4, 3)),
    "g2": ((2, 1, 2, 3, 4, 5), (3, 1, 3, 0, 5, 4), (1, 0, 2, 4, 3, 5)),
    "g3": ((1, 0, 2, 4, 3, 5), (3, 4, 2, 4, 1, 5), (0, 2, 3, 2, 5, 4)),
    "g4": ((3, 1, 2, 3, 4, 5), (4, 2, 1, 4, 0, 5), (1, 0, 2, 3, 5, 4)),
    "kari": ((1, 2, 0, 4, 5, 3), (0, 1, 5, 3, 2, 2)),
    "kari_prime": (
        (1, 2, 0, 4, 5, 3, 6, 7, 8),
        (0, 1, 5, 3, 2, 2, 7, 8, 6),
        (1, 2, 0, 4, 5, 3, 7, 6, 8),
    ),
}

FIXTURES = ("cerny", "fig1", "g1", "g2", "g3", "g4", "aperiodic3", "kari", "kari_prime")


def _cerny(n: int) -> Automaton:
    a = tuple((q + 1) % n for q in range(n))
    b = tuple(1 if q == 0 else q for q in range(n))
    return Automaton(n, 2, (a, b))


def _aperiodic3(n: int) -> Automaton:
    # v_i is state i-1
    a, b, c = list(range(n)), list(range(n)), list(range(n))
    for i in range(1, n - 1):
        a[i - 1] = i
    for i in range(2, n):
        b[i - 1] = i - 2
    c[n // 2 - 1] = n - 1
    return Automaton(n, 3, (tuple(a), tuple(b), tuple(c)))


def fixture(name: str, n: int | None = None) -> Automaton:
    """Named automata: the Cerny series, the figure automata and the aperiodic series."""
    if name in ("cerny", "aperiodic3"):
        if n is None or not isinstance(n, int) or n < 2:
            raise ValueError(f"fixture {name!r} needs an integer n >= 2")
        return _cerny(n) if name == "cerny" else _aperiodic3(n)
    if name in _STATIC_FIXTURES:
        if n is not None and n != len(_STATIC_FIXTURES[name][0]):
            raise ValueError(f"fixture {name!r} has a fixed size")
        return Automaton.from_rows(_STATIC_FIXTURES[name])
    raise ValueError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
