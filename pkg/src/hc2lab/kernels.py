"""Hot inner loops over uint64 bitmasks.

Every kernel exists twice: ``<name>_nb`` (numba) and ``<name>_np`` (numpy, or
plain Python where no vectorized form exists). The unsuffixed name is bound to
whichever backend ``HC2LAB_NUMBA`` selects. Edge-set arrays are ``(N, W)``
uint64 with edge ``e`` stored at bit ``e & 63`` of word ``e >> 6``; vertex
sets (n <= 64) are single uint64 words.

The ``_nb`` variants are only callable when numba is active: with
``HC2LAB_NUMBA=0`` the shared helpers are bound to plain Python so that the
fallback path never touches numba. ``power_search_np`` always runs on plain
Python helpers, so it can be compared against ``power_search_nb`` in-process.
"""
import itertools
import math
import time
import types

import numpy as np

from ._accel import USE_NUMBA, clock, njit

_ONE = np.uint64(1)
_ZERO = np.uint64(0)


def _popc_impl(x):
    # SWAR popcount without multiplication (no overflow on the Python path)
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    x = x + (x >> np.uint64(8))
    x = x + (x >> np.uint64(16))
    x = x + (x >> np.uint64(32))
    return np.int64(x & np.uint64(0x7F))


_popc = njit(_popc_impl) if USE_NUMBA else _popc_impl


def _bit_impl(i):
    return np.uint64(1) << np.uint64(i)


_bit = njit(_bit_impl) if USE_NUMBA else _bit_impl


def _ctz_impl(b):
    # index of the single set bit in b
    return _popc(b - np.uint64(1))


_ctz = njit(_ctz_impl) if USE_NUMBA else _ctz_impl


# ---------------------------------------------------------------------------
# catalog enumeration


def _enumerate_copies_impl(n, k, eidx, nwords, total):
    orders = np.empty((total, n), dtype=np.int8)
    masks = np.zeros((total, nwords), dtype=np.uint64)
    r = n - 1
    perm = np.arange(1, n).astype(np.int64)
    row = np.empty(n, dtype=np.int64)
    idx = 0
    while True:
        if r < 2 or perm[0] < perm[r - 1]:
            row[0] = 0
            for t in range(r):
                row[t + 1] = perm[t]
            for t in range(n):
                orders[idx, t] = row[t]
            for i in range(n):
                a = row[i]
                for j in range(1, k + 1):
                    b = row[(i + j) % n]
                    if a != b:
                        e = eidx[a, b]
                        masks[idx, e >> 6] |= np.uint64(1) << np.uint64(e & 63)
            idx += 1
        p = r - 2
        while p >= 0 and perm[p] > perm[p + 1]:
            p -= 1
        if p < 0:
            break
        q = r - 1
        while perm[q] < perm[p]:
            q -= 1
        tmp = perm[p]
        perm[p] = perm[q]
        perm[q] = tmp
        lo = p + 1
        hi = r - 1
        while lo < hi:
            tmp = perm[lo]
            perm[lo] = perm[hi]
            perm[hi] = tmp
            lo += 1
            hi -= 1
    return orders, masks


enumerate_copies_nb = njit(_enumerate_copies_impl)


def enumerate_copies_np(n, k, eidx, nwords, total):
    r = n - 1
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.permutations(range(1, n))),
        dtype=np.int8,
        count=math.factorial(r) * r,
    )
    perms = flat.reshape(-1, r)
    if r >= 2:
        perms = perms[perms[:, 0] < perms[:, -1]]
    orders = np.zeros((perms.shape[0], n), dtype=np.int8)
    orders[:, 1:] = perms
    del flat, perms
    masks = np.zeros((orders.shape[0], nwords), dtype=np.uint64)
    cols = orders.astype(np.intp)
    for i in range(n):
        for j in range(1, k + 1):
            jj = (i + j) % n
            if jj == i:
                continue
            e = eidx[cols[:, i], cols[:, jj]]
            bits = np.left_shift(np.uint64(1), (e & 63).astype(np.uint64))
            word = e >> 6
            for w in range(nwords):
                masks[:, w] |= np.where(word == w, bits, np.uint64(0))
    assert orders.shape[0] == total
    return orders, masks


# ---------------------------------------------------------------------------
# catalog scans


def _count_supersets_impl(masks, q):
    count = 0
    for r in range(masks.shape[0]):
        ok = True
        for w in range(masks.shape[1]):
            if (masks[r, w] & q[w]) != q[w]:
                ok = False
                break
        if ok:
            count += 1
    return count


count_supersets_nb = njit(_count_supersets_impl)


def count_supersets_np(masks, q):
    return int(np.count_nonzero(np.all((masks & q) == q, axis=1)))


def _overlap_counts_impl(masks, q):
    out = np.zeros(masks.shape[0], dtype=np.int64)
    for r in range(masks.shape[0]):
        s = 0
        for w in range(masks.shape[1]):
            s += _popc(masks[r, w] & q[w])
        out[r] = s
    return out


overlap_counts_nb = njit(_overlap_counts_impl)


def overlap_counts_np(masks, q):
    return np.bitwise_count(masks & q).sum(axis=1, dtype=np.int64)


def _count_subsets_many_impl(masks, ys):
    """For each row y of ``ys``, the number of mask rows contained in y."""
    out = np.zeros(ys.shape[0], dtype=np.int64)
    for t in range(ys.shape[0]):
        c = 0
        for r in range(masks.shape[0]):
            ok = True
            for w in range(masks.shape[1]):
                if (masks[r, w] & ~ys[t, w]) != np.uint64(0):
                    ok = False
                    break
            if ok:
                c += 1
        out[t] = c
    return out


count_subsets_many_nb = njit(_count_subsets_many_impl)


def count_subsets_many_np(masks, ys):
    out = np.zeros(ys.shape[0], dtype=np.int64)
    for t in range(ys.shape[0]):
        out[t] = np.count_nonzero(np.all((masks & ~ys[t]) == 0, axis=1))
    return out


def _gather_local_impl(masks, positions):
    """Project each mask onto the listed edge indices, giving a compact pattern."""
    out = np.zeros(masks.shape[0], dtype=np.int64)
    for r in range(masks.shape[0]):
        v = np.int64(0)
        for t in range(positions.shape[0]):
            e = positions[t]
            if (masks[r, e >> 6] >> np.uint64(e & 63)) & np.uint64(1):
                v |= np.int64(1) << np.int64(t)
        out[r] = v
    return out


gather_local_nb = njit(_gather_local_impl)


def gather_local_np(masks, positions):
    out = np.zeros(masks.shape[0], dtype=np.int64)
    for t, e in enumerate(positions):
        b = (masks[:, e >> 6] >> np.uint64(e & 63)) & np.uint64(1)
        out |= b.astype(np.int64) << t
    return out


def _pair_intersection_hist_impl(masks, maxbits):
    """Histogram of |A & B| over all ordered pairs of rows (A, B)."""
    hist = np.zeros(maxbits + 1, dtype=np.int64)
    N = masks.shape[0]
    for a in range(N):
        hist[_row_popc(masks, a, a)] += 1
        for b in range(a + 1, N):
            hist[_row_popc(masks, a, b)] += 2
    return hist


def _row_popc_impl(masks, a, b):
    s = 0
    for w in range(masks.shape[1]):
        s += _popc(masks[a, w] & masks[b, w])
    return s


_row_popc = njit(_row_popc_impl) if USE_NUMBA else _row_popc_impl
pair_intersection_hist_nb = njit(_pair_intersection_hist_impl)


def pair_intersection_hist_np(masks, maxbits, chunk=512):
    hist = np.zeros(maxbits + 1, dtype=np.int64)
    for lo in range(0, masks.shape[0], chunk):
        block = masks[lo:lo + chunk]
        inter = np.bitwise_count(block[:, None, :] & masks[None, :, :]).sum(axis=2)
        hist += np.bincount(inter.ravel(), minlength=maxbits + 1)[: maxbits + 1]
    return hist


def _min_fragment_batch_impl(s_masks, d_masks, d_sizes, cap):
    """For each row S, the smallest d_sizes[t] with d_masks[t] inside S.

    ``d_masks`` must be sorted by ``d_sizes`` ascending. Returns (size, t) per
    row, or (-1, -1) when every contained d exceeds ``cap``.
    """
    N = s_masks.shape[0]
    best = np.full(N, -1, dtype=np.int64)
    arg = np.full(N, -1, dtype=np.int64)
    for r in range(N):
        for t in range(d_masks.shape[0]):
            if d_sizes[t] > cap:
                break
            ok = True
            for w in range(s_masks.shape[1]):
                if (d_masks[t, w] & ~s_masks[r, w]) != np.uint64(0):
                    ok = False
                    break
            if ok:
                best[r] = d_sizes[t]
                arg[r] = t
                break
    return best, arg


min_fragment_batch_nb = njit(_min_fragment_batch_impl)


def min_fragment_batch_np(s_masks, d_masks, d_sizes, cap):
    N = s_masks.shape[0]
    best = np.full(N, -1, dtype=np.int64)
    arg = np.full(N, -1, dtype=np.int64)
    open_rows = np.arange(N)
    for t in range(d_masks.shape[0]):
        if d_sizes[t] > cap or open_rows.size == 0:
            break
        hit = np.all((d_masks[t] & ~s_masks[open_rows]) == 0, axis=1)
        rows = open_rows[hit]
        best[rows] = d_sizes[t]
        arg[rows] = t
        open_rows = open_rows[~hit]
    return best, arg


def _pad_lowest_impl(frags, s_masks, k):
    """Extend each fragment row to k bits with the lowest bits of its S row."""
    out = frags.copy()
    for r in range(frags.shape[0]):
        need = k
        for w in range(frags.shape[1]):
            need -= _popc(frags[r, w])
        for w in range(frags.shape[1]):
            rem = s_masks[r, w] & ~frags[r, w]
            while need > 0 and rem != np.uint64(0):
                b = rem & (~rem + np.uint64(1))
                out[r, w] |= b
                rem ^= b
                need -= 1
    return out


pad_lowest_nb = njit(_pad_lowest_impl)


def pad_lowest_np(frags, s_masks, k):
    out = frags.copy()
    rem = s_masks & ~frags
    need = k - np.bitwise_count(frags).sum(axis=1, dtype=np.int64)
    rows = np.arange(frags.shape[0])
    while True:
        active = (need > 0) & np.any(rem != 0, axis=1)
        if not active.any():
            return out
        r = rows[active]
        w = np.argmax(rem[r] != 0, axis=1)
        word = rem[r, w]
        low = word & (~word + np.uint64(1))
        out[r, w] |= low
        rem[r, w] ^= low
        need[r] -= 1


# ---------------------------------------------------------------------------
# backtracking search for a spanning power of a Hamilton cycle

SEARCH_EXHAUSTED = 0
SEARCH_DONE = 1
SEARCH_BUDGET = 2


def _power_search_impl(adj, wadj, k, v0, prio, cap, first_only, prune, node_limit, deadline):
    """Search sequences v0, v1, ... whose k-th power lies inside ``adj``.

    The cost of a copy is the number of its edges absent from ``wadj``; the
    search returns the cheapest copy with cost <= cap. Position i must be
    adjacent to every earlier position at cyclic distance <= k; rotation is
    fixed by v0 and reflection by requiring v1 < v_{n-1}.

    Returns (status, best_cost, best_order, nodes).
    """
    n = adj.shape[0]
    if n == 64:
        full = ~np.uint64(0)
    else:
        full = (np.uint64(1) << np.uint64(n)) - np.uint64(1)
    need = 2 * k
    if need > n - 1:
        need = n - 1
    order = np.full(n, -1, dtype=np.int64)
    best_order = np.full(n, -1, dtype=np.int64)
    cand = np.zeros(n + 1, dtype=np.uint64)
    cost = np.zeros(n + 1, dtype=np.int64)
    best = -1
    nodes = 0
    if prune:
        for v in range(n):
            if _popc(adj[v]) < need:
                return SEARCH_DONE, best, best_order, nodes
    order[0] = v0
    used = _bit(v0)
    if n == 1:
        best_order[0] = v0
        return SEARCH_DONE, 0, best_order, nodes
    i = 1
    cand[1] = _candidates(adj, order, used, full, 1, n, k)
    while i >= 1:
        if order[i] >= 0:
            used &= ~_bit(order[i])
            order[i] = -1
        if cand[i] == np.uint64(0):
            i -= 1
            continue
        # fail-first: fewest unplaced neighbours, ties broken by prio
        free = full & ~used
        m = cand[i]
        c = -1
        cs = 1 << 30
        cp = 1 << 30
        while m != np.uint64(0):
            b = m & (~m + np.uint64(1))
            m ^= b
            v = _ctz(b)
            s = _popc(adj[v] & free)
            if s < cs or (s == cs and prio[v] < cp):
                c = v
                cs = s
                cp = prio[v]
        cand[i] &= ~_bit(c)
        nodes += 1
        if nodes > node_limit:
            return SEARCH_BUDGET, best, best_order, nodes
        if deadline > 0.0 and (nodes & 1023) == 0 and clock() > deadline:
            return SEARCH_BUDGET, best, best_order, nodes
        inc = 0
        for j in range(i):
            if i - j <= k or j <= i + k - n:
                if ((wadj[c] >> np.uint64(order[j])) & np.uint64(1)) == np.uint64(0):
                    inc += 1
        newcost = cost[i - 1] + inc
        if newcost > cap:
            continue
        if best >= 0 and newcost >= best:
            continue
        if i == n - 1:
            best = newcost
            for t in range(n - 1):
                best_order[t] = order[t]
            best_order[n - 1] = c
            if first_only or best == 0:
                return SEARCH_DONE, best, best_order, nodes
            continue
        order[i] = c
        used |= _bit(c)
        cost[i] = newcost
        if prune and not _forward_ok(adj, order, used, full, i, n, k, need):
            continue
        i += 1
        cand[i] = _candidates(adj, order, used, full, i, n, k)
    return SEARCH_DONE, best, best_order, nodes


def _candidates_impl(adj, order, used, full, i, n, k):
    m = full & ~used
    for j in range(i):
        if i - j <= k or j <= i + k - n:
            m &= adj[order[j]]
    if i == n - 1 and n >= 3:
        b = _bit(order[1])
        m &= ~(b | (b - np.uint64(1)))
    return m


def _forward_ok_impl(adj, order, used, full, i, n, k, need):
    # an unplaced vertex can only ever be joined to unplaced vertices, the
    # last k placed, or the first k placed (through the wrap-around)
    window = np.uint64(0)
    lo = i - k + 1
    if lo < 0:
        lo = 0
    for j in range(lo, i + 1):
        window |= _bit(order[j])
    top = k
    if top > i + 1:
        top = i + 1
    for j in range(top):
        window |= _bit(order[j])
    free = full & ~used
    reach = free | window
    m = free
    while m != np.uint64(0):
        b = m & (~m + np.uint64(1))
        m ^= b
        u = _ctz(b)
        if _popc(adj[u] & reach) < need:
            return False
    # closing the cycle: position n-j must see positions 0 .. k-j, so the
    # free vertices adjacent to all of v_0 .. v_{k-j} must number at least j
    if k - 1 <= i < n - k and n > 2 * k:
        closing = free
        for s in range(k):
            closing &= adj[order[s]]
        if n >= 3:
            b = _bit(order[1])
            last = closing & ~(b | (b - np.uint64(1)))
            if last == np.uint64(0):
                return False
        for j in range(1, k + 1):
            if _popc(closing) < j:
                return False
            if j < k:
                closing = free
                for s in range(k - j):
                    closing &= adj[order[s]]
    return True


_candidates = njit(_candidates_impl) if USE_NUMBA else _candidates_impl
_forward_ok = njit(_forward_ok_impl) if USE_NUMBA else _forward_ok_impl
power_search_nb = njit(_power_search_impl)


def _rebind(fn, ns):
    return types.FunctionType(fn.__code__, ns, fn.__name__, fn.__defaults__)


# the pure path must not call compiled helpers, which return Python ints
_py_ns = dict(globals(), _popc=_popc_impl, _bit=_bit_impl, _ctz=_ctz_impl, clock=time.perf_counter)
_py_ns["_candidates"] = _rebind(_candidates_impl, _py_ns)
_py_ns["_forward_ok"] = _rebind(_forward_ok_impl, _py_ns)
power_search_np = _rebind(_power_search_impl, _py_ns)


if USE_NUMBA:
    enumerate_copies = enumerate_copies_nb
    count_supersets = count_supersets_nb
    overlap_counts = overlap_counts_nb
    count_subsets_many = count_subsets_many_nb
    gather_local = gather_local_nb
    pair_intersection_hist = pair_intersection_hist_nb
    min_fragment_batch = min_fragment_batch_nb
    pad_lowest = pad_lowest_nb
    power_search = power_search_nb
else:
    enumerate_copies = enumerate_copies_np
    count_supersets = count_supersets_np
    overlap_counts = overlap_counts_np
    count_subsets_many = count_subsets_many_np
    gather_local = gather_local_np
    pair_intersection_hist = pair_intersection_hist_np
    min_fragment_batch = min_fragment_batch_np
    pad_lowest = pad_lowest_np
    power_search = power_search_np


def superset_sums(table):
    """In-place superset-sum (zeta) transform over a length-2^b array."""
    b = int(table.shape[0]).bit_length() - 1
    for t in range(b):
        view = table.reshape(-1, 2, 1 << t)
        view[:, 0, :] += view[:, 1, :]
    return table
