"""Structural classifiers: connectivity, aperiodicity, irreducibility, Kari-like shape."""

from __future__ import annotations

from dataclasses import dataclass

from . import _kernels as K
from .core import Automaton, canonical_form, fixture, restrict
from .search import is_synchronizing

__all__ = [
    "IndeterminateError",
    "SemigroupScan",
    "DEFAULT_SEMIGROUP_CAP",
    "SEMIGROUP_MAX_N",
    "semigroup_scan",
    "is_strongly_connected",
    "is_aperiodic",
    "is_irreducibly_synchronizing",
    "is_bidirectional_path",
    "is_permutation_automaton",
    "weak_components",
    "is_kari_like",
]

DEFAULT_SEMIGROUP_CAP = 50_000_000


class IndeterminateError(RuntimeError):
    """The semigroup scan hit its element cap before reaching a verdict."""


@dataclass(frozen=True)
class SemigroupScan:
    """Outcome of closing the letters under composition.

    ``aperiodic`` is None when the scan was truncated.  ``size`` counts the
    elements generated before stopping (the whole semigroup when aperiodic).
    """

    aperiodic: bool | None
    size: int
    truncated: bool


# Elements are hashed as base-n integers, which must fit in int64.
SEMIGROUP_MAX_N = 15


def semigroup_scan(A: Automaton, cap: int = DEFAULT_SEMIGROUP_CAP) -> SemigroupScan:
    if A.n > SEMIGROUP_MAX_N:
        raise ValueError(f"semigroup scans are limited to n <= {SEMIGROUP_MAX_N}")
    status, size = K.semigroup_aperiodic(A.table, cap)
    if status < 0:
        return SemigroupScan(None, int(size), True)
    return SemigroupScan(bool(status), int(size), False)


def is_aperiodic(A: Automaton, cap: int = DEFAULT_SEMIGROUP_CAP) -> bool:
    scan = semigroup_scan(A, cap)
    if scan.truncated:
        raise IndeterminateError(f"semigroup exceeded {cap} elements without a cycle")
    return scan.aperiodic


def is_strongly_connected(A: Automaton) -> bool:
    if A.n == 1:
        return True
    if A.k == 0:
        return False
    return bool(K.strongly_connected(A.table))


def is_irreducibly_synchronizing(A: Automaton) -> bool:
    """Synchronizing, and no proper non-empty sub-alphabet synchronizes.

    Unary synchronizing automata qualify vacuously.
    """
    if not is_synchronizing(A):
        raise ValueError("automaton is not synchronizing")
    # maximal proper sub-alphabets suffice: synchronization is monotone in letters
    for drop in range(A.k):
        letters = [x for x in range(A.k) if x != drop]
        if letters and is_synchronizing(restrict(A, letters)):
            return False
    return True


def _edges(A: Automaton) -> set[tuple[int, int]]:
    return {(q, row[q]) for row in A.delta for q in range(A.n) if row[q] != q}


def is_bidirectional_path(A: Automaton) -> bool:
    """Loop-free underlying digraph is a path through all states, every edge in both directions."""
    E = _edges(A)
    if any((v, u) not in E for u, v in E):
        return False
    if A.n == 1:
        return not E
    undirected = {frozenset(e) for e in E}
    if len(undirected) != A.n - 1:
        return False
    deg = [0] * A.n
    adj = [[] for _ in range(A.n)]
    for e in undirected:
        u, v = tuple(e)
        deg[u] += 1
        deg[v] += 1
        adj[u].append(v)
        adj[v].append(u)
    if max(deg) > 2:
        return False
    # n-1 edges, max degree 2, connected => path
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == A.n


def is_permutation_automaton(A: Automaton) -> bool:
    return all(len(set(row)) == A.n for row in A.delta)


def weak_components(A: Automaton) -> list[list[int]]:
    """Weakly connected components of the underlying digraph, sorted by least state."""
    parent = list(range(A.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for row in A.delta:
        for q in range(A.n):
            a, b = find(q), find(row[q])
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for q in range(A.n):
        groups.setdefault(find(q), []).append(q)
    return sorted(groups.values())


def _component(A: Automaton, states: list[int]) -> Automaton:
    index = {q: i for i, q in enumerate(states)}
    rows = tuple(tuple(index[row[q]] for q in states) for row in A.delta)
    return Automaton(len(states), A.k, rows)


def _reduced_letters(A: Automaton) -> Automaton:
    """Drop identity letters and repeated letters (first occurrence kept)."""
    ident = tuple(range(A.n))
    kept = []
    for row in A.delta:
        if row != ident and row not in kept:
            kept.append(row)
    return Automaton(A.n, len(kept), tuple(kept))


def is_kari_like(A: Automaton) -> bool:
    """Kari's automaton up to trivial extensions and disjoint unions with permutation automata.

    Exactly one weak component must reduce (after dropping identity and
    duplicate letters) to an isomorphic copy of Kari's automaton; every letter
    must permute each remaining component.
    """
    kari = fixture("kari")
    target = canonical_form(kari, permute_letters=True)
    found = False
    for states in weak_components(A):
        part = _component(A, states)
        if is_permutation_automaton(part):
            continue
        if found or part.n != kari.n:
            return False
        red = _reduced_letters(part)
        if red.k != kari.k or canonical_form(red, permute_letters=True) != target:
            return False
        found = True
    return found

