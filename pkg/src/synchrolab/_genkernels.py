"""Compiled helpers for isomorph-free generation.

A transformation of ``range(n)`` is encoded as the base-``n`` integer of its
row read left to right, so code order is lexicographic row order.  Relabeling
a row ``t`` by a permutation ``s`` gives ``u[s[q]] = s[t[q]]``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def encode(row, n):
    c = np.int64(0)
    for q in range(n):
        c = c * n + row[q]
    return c


@njit(cache=True)
def decode(c, n, out):
    for q in range(n - 1, -1, -1):
        out[q] = c % n
        c //= n


@njit(cache=True)
def build_class_table(n, perms):
    """Conjugacy classes of all n**n transformations.

    Returns (cls, via, reps, cent_ptr, cent_idx): ``cls[c]`` is the class
    index of code c (classes numbered by increasing least code), ``via[c]`` a
    permutation index j with c = relabel(reps[cls[c]], perms[j]), and the
    centralizer of each representative as permutation indices in CSR form.
    """
    N = np.int64(n) ** n
    P = perms.shape[0]
    cls = np.full(N, -1, np.int32)
    via = np.zeros(N, np.int32)
    reps = np.empty(N, np.int64)
    cent_ptr = np.zeros(N + 1, np.int64)
    cent_idx = np.empty(1024, np.int32)
    ncent = 0
    nreps = 0
    t = np.empty(n, np.int64)
    u = np.empty(n, np.int64)
    for c in range(N):
        if cls[c] >= 0:
            continue
        idx = nreps
        reps[idx] = c
        nreps += 1
        decode(c, n, t)
        for j in range(P):
            for q in range(n):
                u[perms[j, q]] = perms[j, t[q]]
            code = encode(u, n)
            if cls[code] < 0:
                cls[code] = idx
                via[code] = j
            if code == c:
                if ncent == cent_idx.shape[0]:
                    bigger = np.empty(2 * ncent, np.int32)
                    bigger[:ncent] = cent_idx[:ncent]
                    cent_idx = bigger
                cent_idx[ncent] = j
                ncent += 1
        cent_ptr[idx + 1] = ncent
    return cls, via, reps[:nreps].copy(), cent_ptr[: nreps + 1].copy(), cent_idx[:ncent].copy()


@njit(cache=True)
def _orbit_min(t, aut, aut_inv, n):
    """True if no automorphism relabels t to a lexicographically smaller row."""
    for a in range(aut.shape[0]):
        for i in range(n):
            v = aut[a, t[aut_inv[a, i]]]
            if v < t[i]:
                return False
            if v > t[i]:
                break
    return True


@njit(cache=True)
def _letter_canonical(B, lperms, codes, cls, via, perms, inv, cent_ptr, cent_idx):
    """True if no reordering of the letters of B has a smaller canonical table.

    Assumes B is already the least table over state relabelings.
    """
    k, n = B.shape
    c0 = cls[codes[0]]
    sigma = np.empty(n, np.int64)
    sinv = np.empty(n, np.int64)
    for p in range(lperms.shape[0]):
        f = lperms[p, 0]
        cf = cls[codes[f]]
        if cf > c0:
            continue
        if cf < c0:
            return False
        s0 = inv[via[codes[f]]]
        for ci in range(cent_ptr[c0], cent_ptr[c0 + 1]):
            alpha = perms[cent_idx[ci]]
            for q in range(n):
                sigma[q] = alpha[s0[q]]
            for q in range(n):
                sinv[sigma[q]] = q
            cmp = 0
            for x in range(1, k):
                row = B[lperms[p, x]]
                for i in range(n):
                    v = sigma[row[sinv[i]]]
                    if v < B[x, i]:
                        cmp = -1
                        break
                    if v > B[x, i]:
                        cmp = 1
                        break
                if cmp != 0:
                    break
            if cmp < 0:
                return False
    return True


@njit(cache=True)
def extension_rows(A, aut, aut_inv, dedupe, lperms, cls, via, perms, inv, cent_ptr, cent_idx):
    """New-letter rows giving pairwise non-isomorphic extensions of A.

    A is a (k, n) table in canonical form, ``aut``/``aut_inv`` its
    automorphisms and their inverses.  With ``dedupe`` only extensions that are
    also least over letter reorderings are kept (``lperms`` lists the
    non-identity orders of k + 1 letters).
    """
    k, n = A.shape
    N = np.int64(n) ** n
    out = np.empty((1024, n), np.int64)
    cnt = 0
    t = np.empty(n, np.int64)
    B = np.empty((k + 1, n), np.int64)
    codes = np.empty(k + 1, np.int64)
    B[:k] = A
    for x in range(k):
        codes[x] = encode(A[x], n)
    min_cls = -1
    if dedupe and k >= 1:
        min_cls = cls[codes[0]]
    for c in range(N):
        if min_cls >= 0 and cls[c] < min_cls:
            continue
        decode(c, n, t)
        if not _orbit_min(t, aut, aut_inv, n):
            continue
        if dedupe and k >= 1:
            B[k] = t
            codes[k] = c
            if not _letter_canonical(B, lperms, codes, cls, via, perms, inv, cent_ptr, cent_idx):
                continue
        if cnt == out.shape[0]:
            bigger = np.empty((2 * cnt, n), np.int64)
            bigger[:cnt] = out[:cnt]
            out = bigger
        out[cnt] = t
        cnt += 1
    return out[:cnt].copy()


@njit(cache=True)
def automorphism_mask(A, perms, inv):
    """Which permutations commute with every letter of A."""
    k, n = A.shape
    P = perms.shape[0]
    ok = np.ones(P, np.bool_)
    for j in range(P):
        for x in range(k):
            for i in range(n):
                if perms[j, A[x, inv[j, i]]] != A[x, i]:
                    ok[j] = False
                    break
            if not ok[j]:
                break
    return ok
