"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Signatures and results match exactly; these are used when the extension
is not built and serve as the reference in the kernel equivalence tests.
"""

from __future__ import annotations

import numpy as np


def pair_degrees(idx: np.ndarray, n: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    if n < 2 or idx.size == 0:
        return deg
    i = np.arange(n, dtype=np.int64)
    offsets = i * (2 * n - i - 1) // 2
    rows = np.searchsorted(offsets, idx, side="right") - 1
    cols = rows + 1 + (idx - offsets[rows])
    deg += np.bincount(rows, minlength=n)
    deg += np.bincount(cols, minlength=n)
    return deg


def matching_poly(adj: np.ndarray, n: int) -> np.ndarray:
    K = n // 2 + 1
    cur: dict[int, list[int]] = {0: [1] + [0] * (K - 1)}
    for i in range(n):
        bit = 1 << i
        above = ~((bit << 1) - 1)
        nxt: dict[int, list[int]] = {}
        for state, coeffs in cur.items():
            if state & bit:
                _add(nxt, state & ~bit, coeffs, 0)
                continue
            _add(nxt, state, coeffs, 0)
            avail = int(adj[i]) & ~state & above
            while avail:
                low = avail & -avail
                avail ^= low
                _add(nxt, state | low, coeffs, 1)
        cur = nxt
    return np.array(cur[0], dtype=np.int64)


def _add(table: dict, key: int, coeffs: list[int], shift: int) -> None:
    row = table.get(key)
    if row is None:
        row = [0] * len(coeffs)
        table[key] = row
    for k in range(len(coeffs) - shift):
        row[k + shift] += coeffs[k]


def perfect_matchings(adj: np.ndarray, n: int) -> int:
    if n % 2:
        return 0
    cur = {0: 1}
    for i in range(n):
        bit = 1 << i
        above = ~((bit << 1) - 1)
        nxt: dict[int, int] = {}
        for state, c in cur.items():
            if state & bit:
                key = state & ~bit
                nxt[key] = nxt.get(key, 0) + c
                continue
            avail = int(adj[i]) & ~state & above
            while avail:
                low = avail & -avail
                avail ^= low
                nxt[state | low] = nxt.get(state | low, 0) + c
        cur = nxt
    return cur.get(0, 0)


def count_embeddings(rows: np.ndarray, n: int, back: np.ndarray) -> int:
    v = len(back)
    if v == 0:
        return 0
    masks = [_row_to_int(rows[x]) for x in range(n)]
    backs = [int(b) for b in back]
    everything = (1 << n) - 1
    image = [0] * v

    def rec(t: int, used: int) -> int:
        cand = everything & ~used
        b = backs[t]
        s = 0
        while b:
            if b & 1:
                cand &= masks[image[s]]
            b >>= 1
            s += 1
        if t == v - 1:
            return cand.bit_count()
        total = 0
        while cand:
            low = cand & -cand
            cand ^= low
            image[t] = low.bit_length() - 1
            total += rec(t + 1, used | low)
        return total

    return rec(0, 0)


def _row_to_int(words: np.ndarray) -> int:
    out = 0
    for w, word in enumerate(words):
        out |= int(word) << (64 * w)
    return out


def connected_signed_sum(adj: np.ndarray, m: int) -> int:
    if m == 0:
        return 0
    masks = [int(a) for a in adj]
    full = (1 << m) - 1
    g = bytearray(full + 1)
    g[0] = 1
    for S in range(1, full + 1):
        low = S & -S
        i = low.bit_length() - 1
        if g[S ^ low] and not (masks[i] & S):
            g[S] = 1
    c = [0] * (full + 1)
    for S in range(1, full + 1):
        low = S & -S
        rest = S ^ low
        acc = g[S]
        sub = rest
        while True:
            if sub != rest and g[S ^ (low | sub)]:
                acc -= c[low | sub]
            if sub == 0:
                break
            sub = (sub - 1) & rest
        c[S] = acc
    return c[full]
