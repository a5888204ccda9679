# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled hot loops. ``_kernels_py`` holds the reference twins."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector
from cython.operator cimport dereference as deref, preincrement as inc

cnp.import_array()

ctypedef unordered_map[uint64_t, Py_ssize_t] StateMap


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int popcount64(uint64_t x) nogil:
    return __builtin_popcountll(x)


cdef inline int ctz64(uint64_t x) nogil:
    return __builtin_ctzll(x)


cdef inline Py_ssize_t _slot(StateMap& m, vector[int64_t]& buf, uint64_t key, int K):
    cdef StateMap.iterator f = m.find(key)
    cdef Py_ssize_t s
    cdef int k
    if f != m.end():
        return deref(f).second
    s = m.size()
    m[key] = s
    for k in range(K):
        buf.push_back(0)
    return s


def pair_degrees(const int64_t[::1] idx, Py_ssize_t n):
    """Vertex degrees from sorted row-major pair indices."""
    cdef cnp.ndarray[int64_t, ndim=1] deg = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] d = deg
    cdef Py_ssize_t k, m = idx.shape[0]
    cdef int64_t i = 0, nxt, x
    if n < 2:
        return deg
    nxt = n - 1
    with nogil:
        for k in range(m):
            x = idx[k]
            while x >= nxt:
                i += 1
                nxt += n - 1 - i
            d[i] += 1
            d[i + 1 + x - (nxt - (n - 1 - i))] += 1
    return deg


def matching_poly(const uint64_t[::1] adj, int n):
    """Matching-number counts via the pivot profile DP (n <= 63)."""
    cdef int K = n // 2 + 1
    cdef StateMap cur, nxt
    cdef vector[int64_t] cbuf, nbuf
    cdef uint64_t state, ns, bit, avail, low
    cdef Py_ssize_t slot, nslot, k
    cdef int i, j
    cdef StateMap.iterator it
    cur[0] = 0
    cbuf.resize(K, 0)
    cbuf[0] = 1
    for i in range(n):
        bit = (<uint64_t>1) << i
        nxt.clear()
        nbuf.clear()
        it = cur.begin()
        while it != cur.end():
            state = deref(it).first
            slot = deref(it).second
            if state & bit:
                ns = state & ~bit
                nslot = _slot(nxt, nbuf, ns, K)
                for k in range(K):
                    nbuf[nslot * K + k] += cbuf[slot * K + k]
            else:
                nslot = _slot(nxt, nbuf, state, K)
                for k in range(K):
                    nbuf[nslot * K + k] += cbuf[slot * K + k]
                avail = adj[i] & ~state & ~((bit << 1) - 1)
                while avail:
                    low = avail & (~avail + 1)
                    avail ^= low
                    nslot = _slot(nxt, nbuf, state | low, K)
                    for k in range(K - 1):
                        nbuf[nslot * K + k + 1] += cbuf[slot * K + k]
            inc(it)
        cur.swap(nxt)
        cbuf.swap(nbuf)
    out = np.zeros(K, dtype=np.int64)
    for k in range(K):
        out[k] = cbuf[cur[0] * K + k]
    return out



def perfect_matchings(const uint64_t[::1] adj, int n):
    """Number of perfect matchings via the pivot profile DP (n <= 63)."""
    cdef unordered_map[uint64_t, int64_t] cur, nxt
    cdef unordered_map[uint64_t, int64_t].iterator it
    cdef uint64_t state, bit, avail, low
    cdef int64_t c
    cdef int i
    if n % 2:
        return 0
    cur[0] = 1
    for i in range(n):
        bit = (<uint64_t>1) << i
        nxt.clear()
        it = cur.begin()
        while it != cur.end():
            state = deref(it).first
            c = deref(it).second
            if state & bit:
                nxt[state & ~bit] = nxt[state & ~bit] + c
            else:
                avail = adj[i] & ~state & ~((bit << 1) - 1)
                while avail:
                    low = avail & (~avail + 1)
                    avail ^= low
                    nxt[state | low] = nxt[state | low] + c
            inc(it)
        cur.swap(nxt)
    if cur.count(0):
        return cur[0]
    return 0


cdef int64_t _embed(const uint64_t[:, ::1] rows, int W, int v, const int64_t[::1] back,
                    int64_t* image, uint64_t* used, uint64_t* cand, int t) nogil:
    cdef int w, s
    cdef int64_t total = 0
    cdef uint64_t word, low
    cdef uint64_t* c = cand + t * W
    cdef int64_t x
    for w in range(W):
        c[w] = ~used[w]
    for s in range(t):
        if back[t] & ((<int64_t>1) << s):
            x = image[s]
            for w in range(W):
                c[w] &= rows[x, w]
    if t == v - 1:
        for w in range(W):
            total += popcount64(c[w])
        return total
    for w in range(W):
        word = c[w]
        while word:
            low = word & (~word + 1)
            word ^= low
            x = w * 64 + ctz64(low)
            image[t] = x
            used[w] |= low
            total += _embed(rows, W, v, back, image, used, cand, t + 1)
            used[w] &= ~low
    return total


def count_embeddings(const uint64_t[:, ::1] rows, Py_ssize_t n, const int64_t[::1] back):
    """Injective homomorphisms of a pattern into the graph with bit-rows ``rows``.

    ``back[t]`` is the mask of earlier pattern vertices adjacent to vertex t;
    the pattern must be connected in that order (back[t] != 0 for t > 0).
    """
    cdef int v = back.shape[0]
    cdef int W = rows.shape[1]
    cdef int w
    cdef int64_t total
    cdef int64_t[::1] image = np.zeros(max(v, 1), dtype=np.int64)
    used_arr = np.zeros(W, dtype=np.uint64)
    cand_arr = np.zeros(max(v, 1) * W, dtype=np.uint64)
    cdef uint64_t[::1] used = used_arr
    cdef uint64_t[::1] cand = cand_arr
    if v == 0:
        return 0
    # bits beyond n are permanently "used"
    for w in range(W):
        if (w + 1) * 64 > n:
            if w * 64 >= n:
                used[w] = ~(<uint64_t>0)
            else:
                used[w] = ~(((<uint64_t>1) << (n - w * 64)) - 1)
    with nogil:
        total = _embed(rows, W, v, back, &image[0], &used[0], &cand[0], 0)
    return total


def connected_signed_sum(const uint64_t[::1] adj, int m):
    """Sum over connected spanning subgraphs S of (-1)^{|S|} (m <= 20)."""
    cdef Py_ssize_t full = ((<Py_ssize_t>1) << m) - 1
    cdef Py_ssize_t S, T, rest, sub, low
    cdef int i
    if m == 0:
        return 0
    g_arr = np.zeros(full + 1, dtype=np.int8)
    c_arr = np.zeros(full + 1, dtype=np.int64)
    cdef signed char[::1] g = g_arr
    cdef int64_t[::1] c = c_arr
    cdef int64_t acc
    with nogil:
        g[0] = 1
        for S in range(1, full + 1):
            low = S & (-S)
            i = ctz64(<uint64_t>low)
            if g[S ^ low] and not (adj[i] & <uint64_t>S):
                g[S] = 1
        for S in range(1, full + 1):
            low = S & (-S)
            rest = S ^ low
            acc = g[S]
            sub = rest
            # proper subsets T' of rest (T = low | T', T != S)
            while True:
                if sub != rest:
                    T = low | sub
                    if g[S ^ T]:
                        acc -= c[T]
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            c[S] = acc
    return int(c[full])
