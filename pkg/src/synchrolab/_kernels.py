"""Compiled inner loops.

Every kernel takes the transition table as a ``(k, n)`` int64 array and state
sets as int64 bitmasks.  Kernels that index flat ``2**n`` arrays must only be
called for ``n`` within the subset-bit guard (see ``search.max_subset_bits``).
"""

import numpy as np
from numba import njit

# columns of the batch evaluation matrix
RESET = 0
SC = 1
IRRED = 2
APERIODIC = 3
AVOID_MAX = 4
RANK = 5
RANK_FAIL_D = 6
RANK_FAIL_LEN = 7
GREEDY_C = 8
GREEDY_E = 9
SUBSET_EXCESS = 10
SUBSET_TIGHT = 11
OC_EXT = 12
OC_CYCLE = 13
NCOLS = 14

# batch evaluation flags
F_SC = 1
F_IRRED = 2
F_APERIODIC = 4
F_EXPLORE = 8
F_GREEDY_C = 16
F_GREEDY_E = 32
F_SUBSET = 64
F_ONECLUSTER = 128
F_ONLY_SC = 256
F_ONLY_IRRED = 512

NOT_COMPUTED = -9


@njit(cache=True)
def popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def image(delta, x, S):
    r = 0
    q = 0
    while S:
        if S & 1:
            r |= np.int64(1) << delta[x, q]
        S >>= 1
        q += 1
    return r


@njit(cache=True)
def preimage(delta, x, S):
    n = delta.shape[1]
    r = 0
    for q in range(n):
        if (S >> delta[x, q]) & 1:
            r |= np.int64(1) << q
    return r


@njit(cache=True)
def image_tables(delta):
    k, n = delta.shape
    N = np.int64(1) << n
    img = np.zeros((k, N), np.int64)
    for x in range(k):
        for q in range(n):
            lo = np.int64(1) << q
            bit = np.int64(1) << delta[x, q]
            for S in range(lo, 2 * lo):
                img[x, S] = img[x, S - lo] | bit
    return img


@njit(cache=True)
def preimage_tables(delta):
    k, n = delta.shape
    N = np.int64(1) << n
    pre = np.zeros((k, N), np.int64)
    for x in range(k):
        single = np.zeros(n, np.int64)
        for q in range(n):
            single[delta[x, q]] |= np.int64(1) << q
        for q in range(n):
            lo = np.int64(1) << q
            for S in range(lo, 2 * lo):
                pre[x, S] = pre[x, S - lo] | single[q]
    return pre


@njit(cache=True)
def popcounts(N):
    pc = np.zeros(N, np.int64)
    for S in range(1, N):
        pc[S] = pc[S >> 1] + (S & 1)
    return pc


# -- power automaton BFS ------------------------------------------------------

@njit(cache=True)
def bfs_from(delta, start, mode, param, want_path):
    """Shortest word from ``start`` to a goal set.

    mode 0: goal is |S| <= param.  mode 1: goal is ``param not in S``.
    mode 2: goal is the set ``param`` itself.
    Returns (length or -1, goal set, word array).
    """
    k, n = delta.shape
    N = np.int64(1) << n
    seen = np.zeros(N, np.uint8)
    queue = np.empty(N, np.int64)
    dist = np.empty(N, np.int32)
    if want_path:
        parent = np.full(N, -1, np.int64)
        via = np.zeros(N, np.int8)
    else:
        parent = np.full(1, -1, np.int64)
        via = np.zeros(1, np.int8)
    queue[0] = start
    dist[0] = 0
    seen[start] = 1
    head = 0
    tail = 1
    found = -1
    goal = np.int64(0)
    while head < tail:
        S = queue[head]
        d = dist[head]
        head += 1
        hit = False
        if mode == 0:
            hit = popcount(S) <= param
        elif mode == 1:
            hit = ((S >> param) & 1) == 0
        else:
            hit = S == param
        if hit:
            found = d
            goal = S
            break
        for x in range(k):
            T = image(delta, x, S)
            if not seen[T]:
                seen[T] = 1
                queue[tail] = T
                dist[tail] = d + 1
                tail += 1
                if want_path:
                    parent[T] = S
                    via[T] = x
    if found < 0 or not want_path:
        return found, goal, np.zeros(0, np.int64)
    word = np.zeros(found, np.int64)
    S = goal
    for i in range(found - 1, -1, -1):
        word[i] = via[S]
        S = parent[S]
    return found, goal, word


@njit(cache=True)
def explore(delta):
    """BFS over all images of Q.

    Returns ``best`` (best[c] = shortest word with |Qw| = c, or -1) and
    ``avoid`` (avoid[q] = shortest word with q not in Qw, or -1).
    """
    k, n = delta.shape
    N = np.int64(1) << n
    seen = np.zeros(N, np.uint8)
    queue = np.empty(N, np.int64)
    dist = np.empty(N, np.int32)
    best = np.full(n + 1, -1, np.int64)
    avoid = np.full(n, -1, np.int64)
    full = N - 1
    queue[0] = full
    dist[0] = 0
    seen[full] = 1
    head = 0
    tail = 1
    missing = n
    while head < tail:
        S = queue[head]
        d = dist[head]
        head += 1
        c = popcount(S)
        if best[c] < 0:
            best[c] = d
        if missing > 0 and c < n:
            for q in range(n):
                if avoid[q] < 0 and ((S >> q) & 1) == 0:
                    avoid[q] = d
                    missing -= 1
        for x in range(k):
            T = image(delta, x, S)
            if not seen[T]:
                seen[T] = 1
                queue[tail] = T
                dist[tail] = d + 1
                tail += 1
    return best, avoid


# -- pair automaton -----------------------------------------------------------

@njit(cache=True)
def pair_distances(delta, letter_mask):
    """Shortest merging-word length for every pair, -1 if none; 0 on the diagonal."""
    k, n = delta.shape
    start = np.zeros((k, n + 1), np.int64)
    order = np.empty((k, n), np.int64)
    for x in range(k):
        counts = np.zeros(n, np.int64)
        for q in range(n):
            counts[delta[x, q]] += 1
        for s in range(n):
            start[x, s + 1] = start[x, s] + counts[s]
        fill = start[x, :n].copy()
        for q in range(n):
            s = delta[x, q]
            order[x, fill[s]] = q
            fill[s] += 1
    D = np.full((n, n), -1, np.int64)
    queue = np.empty(n * n, np.int64)
    tail = 0
    for s in range(n):
        D[s, s] = 0
        queue[tail] = s * n + s
        tail += 1
    head = 0
    while head < tail:
        code = queue[head]
        head += 1
        p = code // n
        q = code % n
        d = D[p, q]
        for x in range(k):
            if not (letter_mask >> x) & 1:
                continue
            for i in range(start[x, p], start[x, p + 1]):
                pp = order[x, i]
                for j in range(start[x, q], start[x, q + 1]):
                    qq = order[x, j]
                    if pp != qq and D[pp, qq] < 0:
                        D[pp, qq] = d + 1
                        D[qq, pp] = d + 1
                        queue[tail] = pp * n + qq
                        tail += 1
    return D


@njit(cache=True)
def is_sync_pairs(delta, letter_mask):
    n = delta.shape[1]
    D = pair_distances(delta, letter_mask)
    for p in range(n):
        for q in range(p + 1, n):
            if D[p, q] < 0:
                return False
    return True


@njit(cache=True)
def strongly_connected(delta):
    k, n = delta.shape
    fwd = np.zeros(n, np.uint8)
    stack = np.empty(n, np.int64)
    fwd[0] = 1
    stack[0] = 0
    top = 1
    cnt = 1
    while top > 0:
        top -= 1
        q = stack[top]
        for x in range(k):
            v = delta[x, q]
            if not fwd[v]:
                fwd[v] = 1
                cnt += 1
                stack[top] = v
                top += 1
    if cnt < n:
        return False
    bwd = np.zeros(n, np.uint8)
    bwd[0] = 1
    cnt = 1
    changed = True
    while changed:
        changed = False
        for x in range(k):
            for q in range(n):
                if not bwd[q] and bwd[delta[x, q]]:
                    bwd[q] = 1
                    cnt += 1
                    changed = True
    return cnt == n


@njit(cache=True)
def irreducible(delta):
    """1 if no (k-1)-letter restriction synchronizes, else 0 (input assumed synchronizing)."""
    k = delta.shape[0]
    if k <= 1:
        return 1
    full = (np.int64(1) << k) - 1
    for x in range(k):
        if is_sync_pairs(delta, full ^ (np.int64(1) << x)):
            return 0
    return 1


# -- transition semigroup -----------------------------------------------------

@njit(cache=True)
def _has_long_cycle(t, n):
    for q in range(n):
        p = q
        for _ in range(n):
            p = t[p]
        if t[p] != p:
            return True
    return False


@njit(cache=True)
def _hash_insert(keys, code):
    """Insert code; return True if it was new.  ``keys`` has power-of-two size."""
    mask = keys.shape[0] - 1
    h = (code * np.int64(0x9E3779B97F4A7C15)) & np.int64(0x7FFFFFFFFFFFFFFF)
    i = h & mask
    while True:
        if keys[i] == -1:
            keys[i] = code
            return True
        if keys[i] == code:
            return False
        i = (i + 1) & mask


@njit(cache=True)
def semigroup_aperiodic(delta, cap):
    """Closure of the letters under right multiplication.

    Returns (status, size): status 1 aperiodic, 0 not, -1 cap exceeded.
    Stops at the first element with a cycle of length >= 2.
    """
    k, n = delta.shape
    if k == 0:
        return 1, 0
    if n == 1:
        return 1, 1
    cap_alloc = 1024
    elems = np.empty((cap_alloc, n), np.int64)
    keys = np.full(4096, -1, np.int64)
    count = 0
    t = np.empty(n, np.int64)
    for x in range(k):
        code = 0
        for q in range(n):
            t[q] = delta[x, q]
            code = code * n + t[q]
        if _hash_insert(keys, code):
            if _has_long_cycle(t, n):
                return 0, count + 1
            elems[count, :] = t
            count += 1
    head = 0
    while head < count:
        for x in range(k):
            code = 0
            for q in range(n):
                t[q] = delta[x, elems[head, q]]
                code = code * n + t[q]
            if _hash_insert(keys, code):
                if _has_long_cycle(t, n):
                    return 0, count + 1
                if count >= cap:
                    return -1, count
                if count == elems.shape[0]:
                    bigger = np.empty((elems.shape[0] * 2, n), np.int64)
                    bigger[:count] = elems[:count]
                    elems = bigger
                elems[count, :] = t
                count += 1
                if 2 * count > keys.shape[0]:
                    newkeys = np.full(keys.shape[0] * 4, -1, np.int64)
                    for i in range(keys.shape[0]):
                        if keys[i] != -1:
                            _hash_insert(newkeys, keys[i])
                    keys = newkeys
        head += 1
    return 1, count


# -- subset synchronization -----------------------------------------------------

@njit(cache=True)
def sync_profile(delta):
    """L[S] = shortest word with |Sw| = 1; -1 if none; L[0] = -2."""
    k, n = delta.shape
    N = np.int64(1) << n
    img = image_tables(delta)
    L = np.full(N, -1, np.int64)
    L[0] = -2
    for q in range(n):
        L[np.int64(1) << q] = 0
    t = 0
    changed = True
    while changed:
        changed = False
        t += 1
        for S in range(1, N):
            if L[S] != -1:
                continue
            for x in range(k):
                if L[img[x, S]] == t - 1:
                    L[S] = t
                    changed = True
                    break
    return L


@njit(cache=True)
def subset_bound(n, s):
    a = (n - s + s - 1) // s
    b = (n + s - 1) // s
    return (n - 1) * (n - 1) - a * (2 * n - s * b - 1)


@njit(cache=True)
def subset_check(L, n):
    """(max over S of L(S) - bound(|S|), number of S with 2 <= |S| meeting the bound)."""
    N = L.shape[0]
    excess = np.int64(-(1 << 40))
    tight = 0
    bounds = np.zeros(n + 1, np.int64)
    for s in range(1, n + 1):
        bounds[s] = subset_bound(n, s)
    for S in range(1, N):
        if L[S] < 0:
            return np.int64(1 << 40), tight
        s = popcount(S)
        e = L[S] - bounds[s]
        if e > excess:
            excess = e
        if e == 0 and s >= 2:
            tight += 1
    return excess, tight


# -- greedy worst cases -------------------------------------------------------

@njit(cache=True)
def _by_size(N):
    pc = popcounts(N)
    order = np.argsort(pc, kind="mergesort")
    n = 0
    while (np.int64(1) << n) < N:
        n += 1
    offsets = np.zeros(n + 2, np.int64)
    for S in range(N):
        offsets[pc[S] + 1] += 1
    for c in range(n + 1):
        offsets[c + 1] += offsets[c]
    return pc, order, offsets


@njit(cache=True)
def greedy_compress_table(delta):
    """W[S]: worst total length of greedy compression from S to a singleton."""
    k, n = delta.shape
    N = np.int64(1) << n
    img = image_tables(delta)
    pc, order, offsets = _by_size(N)
    W = np.full(N, -1, np.int64)
    for q in range(n):
        W[np.int64(1) << q] = 0
    dist = np.full(N, -1, np.int64)
    F = np.full(N, -1, np.int64)
    for m in range(2, n + 1):
        lo = offsets[m]
        hi = offsets[m + 1]
        t = 0
        progress = True
        while progress:
            progress = False
            t += 1
            for i in range(lo, hi):
                S = order[i]
                if dist[S] >= 0:
                    continue
                hit = False
                best = np.int64(-1)
                for x in range(k):
                    T = img[x, S]
                    if pc[T] < m:
                        if t == 1 and W[T] >= 0:
                            hit = True
                            if W[T] > best:
                                best = W[T]
                    elif t >= 2 and dist[T] == t - 1:
                        hit = True
                        if F[T] > best:
                            best = F[T]
                if hit:
                    dist[S] = t
                    F[S] = best
                    progress = True
        for i in range(lo, hi):
            S = order[i]
            if dist[S] >= 0:
                W[S] = dist[S] + F[S]
    return W


@njit(cache=True)
def greedy_extend_table(delta):
    """X[S]: worst total length of greedy extension from S up to Q (-1 if stuck)."""
    k, n = delta.shape
    N = np.int64(1) << n
    pre = preimage_tables(delta)
    pc, order, offsets = _by_size(N)
    X = np.full(N, -1, np.int64)
    X[N - 1] = 0
    dist = np.full(N, -1, np.int64)
    F = np.full(N, -1, np.int64)
    for m in range(n - 1, 0, -1):
        lo = offsets[1]
        hi = offsets[m + 1]
        for i in range(lo, hi):
            dist[order[i]] = -1
            F[order[i]] = -1
        t = 0
        progress = True
        while progress:
            progress = False
            t += 1
            for i in range(lo, hi):
                T = order[i]
                if dist[T] >= 0:
                    continue
                hit = False
                best = np.int64(-1)
                for x in range(k):
                    U = pre[x, T]
                    c = pc[U]
                    if c > m:
                        if t == 1 and X[U] >= 0:
                            hit = True
                            if X[U] > best:
                                best = X[U]
                    elif c >= 1 and t >= 2 and dist[U] == t - 1:
                        hit = True
                        if F[U] > best:
                            best = F[U]
                if hit:
                    dist[T] = t
                    F[T] = best
                    progress = True
        for i in range(offsets[m], offsets[m + 1]):
            S = order[i]
            if dist[S] >= 0:
                X[S] = dist[S] + F[S]
    return X


@njit(cache=True)
def greedy_extend_worst(delta, adversarial):
    n = delta.shape[1]
    X = greedy_extend_table(delta)
    res = np.int64(-1)
    for q in range(n):
        v = X[np.int64(1) << q]
        if v < 0:
            return np.int64(-1)
        if res < 0 or (adversarial and v > res) or (not adversarial and v < res):
            res = v
    return res


# -- one-cluster letters --------------------------------------------------------

@njit(cache=True)
def letter_cluster(delta, a):
    """(one_cluster, cycle mask, cycle length, level) of letter ``a``."""
    n = delta.shape[1]
    cyc = np.int64(0)
    for q in range(n):
        p = q
        for _ in range(n):
            p = delta[a, p]
        cyc |= np.int64(1) << p
    # count cycles
    seen = np.int64(0)
    ncycles = 0
    for q in range(n):
        if (cyc >> q) & 1 and not (seen >> q) & 1:
            ncycles += 1
            p = q
            while not (seen >> p) & 1:
                seen |= np.int64(1) << p
                p = delta[a, p]
    m = popcount(cyc)
    if ncycles != 1:
        return False, cyc, m, 0
    level = 0
    for q in range(n):
        p = q
        steps = 0
        while not (cyc >> p) & 1:
            p = delta[a, p]
            steps += 1
        if steps > level:
            level = steps
    return True, cyc, m, level


@njit(cache=True)
def one_cluster_ext(delta, a, cyc, level):
    """Max over nonempty proper S of the cycle of the least |w| with
    |S (w a^level)^-1 & C| > |S|; -1 if some S admits no such w."""
    k, n = delta.shape
    N = np.int64(1) << n
    pre = preimage_tables(delta)
    cm = np.empty(n, np.int64)
    m = 0
    for q in range(n):
        if (cyc >> q) & 1:
            cm[m] = q
            m += 1
    stamp = np.zeros(N, np.int64)
    queue = np.empty(N, np.int64)
    dist = np.empty(N, np.int64)
    result = np.int64(0)
    for sub in range(1, (np.int64(1) << m) - 1):
        S = np.int64(0)
        for i in range(m):
            if (sub >> i) & 1:
                S |= np.int64(1) << cm[i]
        s = popcount(sub)
        U = S
        for _ in range(level):
            U = pre[a, U]
        tag = sub + 1
        stamp[U] = tag
        queue[0] = U
        dist[0] = 0
        head = 0
        tail = 1
        found = np.int64(-1)
        while head < tail:
            T = queue[head]
            d = dist[head]
            head += 1
            if popcount(T & cyc) > s:
                found = d
                break
            for x in range(k):
                V = pre[x, T]
                if stamp[V] != tag:
                    stamp[V] = tag
                    queue[tail] = V
                    dist[tail] = d + 1
                    tail += 1
        if found < 0:
            return np.int64(-1)
        if found > result:
            result = found
    return result


@njit(cache=True)
def _is_prime(m):
    if m < 2:
        return False
    d = 2
    while d * d <= m:
        if m % d == 0:
            return False
        d += 1
    return True


@njit(cache=True)
def nonprime_cluster_ext(delta):
    """Worst one-cluster extension over letters with non-prime cycle length >= 4.

    Returns (value, cycle length): value -2 when no letter qualifies, -1 when
    some subset cannot be extended.
    """
    k = delta.shape[0]
    worst = np.int64(-2)
    worst_m = np.int64(0)
    for a in range(k):
        ok, cyc, m, level = letter_cluster(delta, a)
        if not ok or m < 4 or _is_prime(m):
            continue
        v = one_cluster_ext(delta, a, cyc, level)
        if v == -1:
            return np.int64(-1), np.int64(m)
        if v > worst:
            worst = v
            worst_m = m
    return worst, worst_m


# -- batch evaluation -----------------------------------------------------------

@njit(cache=True)
def evaluate(delta, flags, cap, out):
    k, n = delta.shape
    for c in range(NCOLS):
        out[c] = NOT_COMPUTED
    full = (np.int64(1) << n) - 1
    if n == 1:
        out[RESET] = 0
    else:
        d, _, _ = bfs_from(delta, full, 0, 1, False)
        out[RESET] = d
    sync = out[RESET] >= 0
    if flags & F_SC:
        out[SC] = 1 if strongly_connected(delta) else 0
    if flags & F_IRRED:
        out[IRRED] = irreducible(delta) if sync else -1
    if (flags & F_ONLY_SC) and out[SC] != 1:
        return
    if (flags & F_ONLY_IRRED) and out[IRRED] != 1:
        return
    if flags & F_APERIODIC:
        st, _ = semigroup_aperiodic(delta, cap)
        out[APERIODIC] = st
    if flags & F_EXPLORE:
        best, avoid = explore(delta)
        worst = np.int64(0)
        for q in range(n):
            if avoid[q] < 0:
                worst = -1
                break
            if avoid[q] > worst:
                worst = avoid[q]
        if n == 1:
            worst = -1
        out[AVOID_MAX] = worst
        rank = n
        for c in range(n + 1):
            if best[c] >= 0 and c < rank:
                rank = c
        out[RANK] = rank
        out[RANK_FAIL_D] = 0
        out[RANK_FAIL_LEN] = 0
        running = np.int64(-1)
        for d in range(0, n):
            r = n - d
            if best[r] >= 0 and (running < 0 or best[r] < running):
                running = best[r]
            if d >= 1 and running >= 0 and running > d * d:
                out[RANK_FAIL_D] = d
                out[RANK_FAIL_LEN] = running
                break
    if flags & F_GREEDY_C:
        if sync:
            W = greedy_compress_table(delta)
            out[GREEDY_C] = W[full]
        else:
            out[GREEDY_C] = -1
    if flags & F_GREEDY_E:
        if sync and (n == 1 or strongly_connected(delta)):
            out[GREEDY_E] = greedy_extend_worst(delta, True) if n > 1 else 0
        else:
            out[GREEDY_E] = -1
    if flags & F_SUBSET:
        if sync:
            L = sync_profile(delta)
            e, t = subset_check(L, n)
            out[SUBSET_EXCESS] = e
            out[SUBSET_TIGHT] = t
        else:
            out[SUBSET_EXCESS] = NOT_COMPUTED
            out[SUBSET_TIGHT] = 0
    if flags & F_ONECLUSTER:
        v, m = nonprime_cluster_ext(delta)
        out[OC_EXT] = v
        out[OC_CYCLE] = m


@njit(cache=True)
def evaluate_batch(deltas, flags, cap):
    N = deltas.shape[0]
    out = np.empty((N, NCOLS), np.int64)
    for i in range(N):
        evaluate(deltas[i], flags, cap, out[i])
    return out


@njit(cache=True)
def compress_lengths(delta):
    """out[m] = max over m-subsets S of the shortest w with |Sw| < m (-1 if some S is stuck)."""
    n = delta.shape[1]
    N = np.int64(1) << n
    out = np.zeros(n + 1, np.int64)
    for S in range(1, N):
        m = popcount(S)
        if m < 2 or out[m] < 0:
            continue
        d, _, _ = bfs_from(delta, S, 0, m - 1, False)
        if d < 0:
            out[m] = -1
        elif d > out[m]:
            out[m] = d
    return out
