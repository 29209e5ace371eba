"""Isomorph-free generation of automata, one letter at a time.

Unary automata are conjugacy classes of transformations.  A (k+1)-letter
automaton is built from a canonical k-letter one by adding a letter that is
least in its orbit under the automorphism group, which makes the result
canonical too.  Optionally, extensions that are not least over reorderings of
their letters are dropped, so each automaton appears once up to renaming both
states and letters.

Extension relies on a table of all ``n**n`` transformations and is limited to
``n <= 8``; unary enumeration works beyond that through a structural generator.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from . import _genkernels as G
from . import _kernels as K
from .bounds import compressible_pairs, one_cluster_data, theorem1_reset_bound, theorem2_bound
from .core import Automaton, canonical_form, permutation_table

__all__ = [
    "GEN_TABLE_MAX_N",
    "enumerate_unary",
    "extend_one_letter",
    "extension_reset_ubound",
    "GenerationPlan",
    "plan_seeds",
    "plan_chunks",
    "chunk_tables",
    "run_plan",
]

GEN_TABLE_MAX_N = 8


@dataclass(frozen=True)
class _ClassTable:
    cls: np.ndarray
    via: np.ndarray
    reps: np.ndarray
    cent_ptr: np.ndarray
    cent_idx: np.ndarray
    perms: np.ndarray
    inv: np.ndarray


@lru_cache(maxsize=2)
def class_table(n: int) -> _ClassTable:
    if not 1 <= n <= GEN_TABLE_MAX_N:
        raise ValueError(f"transformation tables are limited to 1 <= n <= {GEN_TABLE_MAX_N}")
    perms, inv = permutation_table(n)
    perms = np.ascontiguousarray(perms)
    inv = np.ascontiguousarray(inv)
    cls, via, reps, ptr, idx = G.build_class_table(n, perms)
    return _ClassTable(cls, via, reps, ptr, idx, perms, inv)


@lru_cache(maxsize=None)
def _letter_orders(k: int) -> np.ndarray:
    orders = [p for p in itertools.permutations(range(k)) if p != tuple(range(k))]
    return np.array(orders, dtype=np.int64).reshape(len(orders), k)


def _extension_rows(table: np.ndarray, dedupe: bool) -> np.ndarray:
    k, n = table.shape
    ct = class_table(n)
    ok = G.automorphism_mask(table, ct.perms, ct.inv)
    aut = np.ascontiguousarray(ct.perms[ok])
    aut_inv = np.ascontiguousarray(ct.inv[ok])
    return G.extension_rows(
        np.ascontiguousarray(table, dtype=np.int64), aut, aut_inv, dedupe, _letter_orders(k + 1),
        ct.cls, ct.via, ct.perms, ct.inv, ct.cent_ptr, ct.cent_idx,
    )


# -- unary automata ---------------------------------------------------------------

@lru_cache(maxsize=None)
def _trees(size: int) -> tuple:
    """Rooted unlabeled trees with ``size`` nodes, as sorted tuples of child trees."""
    return tuple(_forests(size - 1, None))


@lru_cache(maxsize=None)
def _forests(total: int, bound) -> tuple:
    if total == 0:
        return ((),)
    out = []
    for s in range(1, total + 1):
        for T in _trees(s):
            if bound is not None and T > bound:
                continue
            for rest in _forests(total - s, T):
                out.append((T,) + rest)
    return tuple(out)


def _tree_size(T) -> int:
    return 1 + sum(_tree_size(c) for c in T)


@lru_cache(maxsize=None)
def _components(size: int) -> tuple:
    """Connected functional graphs: cycles of rooted trees up to rotation."""
    out = []
    for c in range(1, size + 1):
        for sizes in _compositions(size, c):
            for seq in itertools.product(*(_trees(s) for s in sizes)):
                if all(seq <= seq[i:] + seq[:i] for i in range(1, c)):
                    out.append(seq)
    return tuple(sorted(set(out)))


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _graphs(total: int, bound=None):
    if total == 0:
        yield ()
        return
    for s in range(1, total + 1):
        for comp in _components(s):
            if bound is not None and (s, comp) > bound:
                continue
            for rest in _graphs(total - s, (s, comp)):
                yield ((s, comp),) + rest


def _graph_to_map(graph) -> tuple[int, ...]:
    out: list[int] = []

    def place_tree(T, parent):
        me = len(out)
        out.append(parent)
        for child in T:
            place_tree(child, me)

    for _, cycle in graph:
        roots = []
        for T in cycle:
            roots.append(len(out))
            place_tree(T, -1)
        for i, r in enumerate(roots):
            out[r] = roots[(i + 1) % len(roots)]
    return tuple(out)


def _unary_structural(n: int) -> list[Automaton]:
    reps = {canonical_form(Automaton(n, 1, (_graph_to_map(g),))) for g in _graphs(n)}
    return sorted(reps, key=lambda A: A.delta)


def enumerate_unary(n: int) -> Iterator[Automaton]:
    """One automaton per conjugacy class of transformations, in canonical order."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n <= GEN_TABLE_MAX_N:
        rows = _extension_rows(np.zeros((0, n), np.int64), False)
        for row in rows:
            yield Automaton(n, 1, (tuple(int(v) for v in row),))
    else:
        yield from _unary_structural(n)


def extend_one_letter(
    A: Automaton,
    prune: Callable[[Automaton], bool] | None = None,
    dedupe_letters: bool = False,
) -> Iterator[Automaton]:
    """Non-isomorphic extensions of a canonical automaton by one letter.

    ``prune(B)`` returning True drops B.  With ``dedupe_letters``, A must itself
    be least over letter reorderings, as produced by this function.
    """
    rows = _extension_rows(A.table, dedupe_letters)
    for row in rows:
        B = A.add_letter(tuple(int(v) for v in row))
        if prune is None or not prune(B):
            yield B


# -- pruning ---------------------------------------------------------------------

def extension_reset_ubound(A: Automaton, budget: int = 200) -> float:
    """Upper bound on the reset length of every synchronizing extension of A.

    Uses only facts that survive adding letters: the compressible pairs of A
    with their merge lengths, and one-cluster letters.  ``math.inf`` when
    neither applies.
    """
    best = math.inf
    P = compressible_pairs(A)
    if len(P):
        best = theorem1_reset_bound(A.n, P, budget)
    for a in range(A.k):
        data = one_cluster_data(A, a)
        if data is not None and data.m >= 2:
            best = min(best, theorem2_bound(A.n, 1, data.level, data.m))
    return best


# -- plans ------------------------------------------------------------------------

@dataclass(frozen=True)
class GenerationPlan:
    """What to enumerate: n states, k letters, optional pruning threshold and filters.

    Seeds whose extensions provably all have reset length below ``threshold``
    are dropped.  ``chunk_size`` counts seeds per chunk.
    """

    n: int
    k: int
    threshold: int | None = None
    strongly_connected: bool = False
    irreducible: bool = False
    dedupe_letters: bool = True
    budget: int = 200
    chunk_size: int = 1

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("plans need n >= 1 and k >= 1")
        if self.k > 1 and self.n > GEN_TABLE_MAX_N:
            raise ValueError(f"extension is limited to n <= {GEN_TABLE_MAX_N}")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be positive")

    def key(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _keep_seed(plan: GenerationPlan, table: np.ndarray) -> bool:
    if plan.threshold is None:
        return True
    A = Automaton.from_rows(table.tolist(), plan.n)
    return extension_reset_ubound(A, plan.budget) >= plan.threshold


def plan_seeds(plan: GenerationPlan) -> list[np.ndarray]:
    """The (k-1)-letter automata whose extensions the plan emits, as tables."""
    if plan.k == 1:
        return [np.zeros((0, plan.n), np.int64)]
    seeds = [np.zeros((0, plan.n), np.int64)]
    for _ in range(plan.k - 1):
        nxt = []
        for S in seeds:
            for row in _extension_rows(S, plan.dedupe_letters):
                T = np.vstack([S, row[None, :]])
                if _keep_seed(plan, T):
                    nxt.append(T)
        seeds = nxt
    return seeds


def plan_chunks(plan: GenerationPlan) -> list[list[np.ndarray]]:
    seeds = plan_seeds(plan)
    cs = plan.chunk_size
    return [seeds[i:i + cs] for i in range(0, len(seeds), cs)]


def chunk_tables(plan: GenerationPlan, chunk: list[np.ndarray]) -> np.ndarray:
    """All final automata of a chunk as an (N, k, n) array, in stream order."""
    parts = []
    for S in chunk:
        rows = _extension_rows(S, plan.dedupe_letters)
        block = np.empty((len(rows), plan.k, plan.n), np.int64)
        block[:, : plan.k - 1, :] = S[None, :, :]
        block[:, plan.k - 1, :] = rows
        parts.append(block)
    if not parts:
        return np.empty((0, plan.k, plan.n), np.int64)
    return np.concatenate(parts)


def _passes(plan: GenerationPlan, table: np.ndarray) -> bool:
    if plan.strongly_connected and not (plan.n == 1 or K.strongly_connected(table)):
        return False
    if plan.irreducible:
        full = (1 << plan.k) - 1
        if plan.n > 1 and not K.is_sync_pairs(table, full):
            return False
        if K.irreducible(table) != 1:
            return False
    return True


def run_plan(plan: GenerationPlan) -> Iterator[Automaton]:
    """Stream the plan's automata, chunk by chunk, in a fixed order."""
    for chunk in plan_chunks(plan):
        for table in chunk_tables(plan, chunk):
            if _passes(plan, table):
                yield Automaton.from_rows(table.tolist(), plan.n)
