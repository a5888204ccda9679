"""Simple undirected graphs, Erdos-Renyi sampling and subgraph counts.

A graph on ``n`` vertices (0-indexed in the API) is stored as the sorted array
of its row-major pair indices. For ``i < j`` the pair index is
``i * (2n - i - 1) / 2 + (j - i - 1)``. Degrees and bit-rows are derived
lazily, so Monte Carlo code that only needs the degree sequence never pays for
the adjacency structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from . import kernels


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(i: np.ndarray | int, j: np.ndarray | int, n: int):
    """Row-major index of the unordered pair {i, j} (requires i != j)."""
    a = np.minimum(i, j)
    b = np.maximum(i, j)
    return a * (2 * n - a - 1) // 2 + (b - a - 1)


def pair_endpoints(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`pair_index` for an array of indices."""
    idx = np.asarray(idx, dtype=np.int64)
    i = np.arange(n, dtype=np.int64)
    offsets = i * (2 * n - i - 1) // 2
    rows = np.searchsorted(offsets, idx, side="right") - 1
    return rows, rows + 1 + (idx - offsets[rows])


class Graph:
    """Immutable simple graph.

    Parameters
    ----------
    n : int
        Number of vertices.
    pairs : array of int64
        Pair indices of the edges; deduplicated and sorted on construction.
    """

    __slots__ = ("n", "pairs", "__dict__")

    def __init__(self, n: int, pairs: np.ndarray | None = None, *, _trusted: bool = False):
        if n < 0:
            raise ValueError("n must be nonnegative")
        self.n = int(n)
        if pairs is None:
            arr = np.zeros(0, dtype=np.int64)
        elif _trusted:
            arr = pairs
        else:
            arr = np.unique(np.asarray(pairs, dtype=np.int64))
            if arr.size and (arr[0] < 0 or arr[-1] >= n_pairs(self.n)):
                raise ValueError("pair index out of range")
        arr.setflags(write=False)
        self.pairs = arr

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if e.size:
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            if e.min() < 0 or e.max() >= n:
                raise ValueError("vertex out of range")
        return cls(n, pair_index(e[:, 0], e[:, 1], n))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, np.arange(n_pairs(n), dtype=np.int64), _trusted=True)

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def from_adjacency(cls, adj: np.ndarray) -> "Graph":
        adj = np.asarray(adj, dtype=bool)
        if adj.shape[0] != adj.shape[1] or not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be square and symmetric")
        if np.any(np.diag(adj)):
            raise ValueError("adjacency must have an empty diagonal")
        i, j = np.nonzero(np.triu(adj, 1))
        return cls(adj.shape[0], pair_index(i, j, adj.shape[0]))

    @property
    def edge_count(self) -> int:
        return int(self.pairs.size)

    def edges(self) -> np.ndarray:
        """Edges as an (m, 2) array with ``u < v``, in pair-index order."""
        u, v = pair_endpoints(self.pairs, self.n)
        return np.stack([u, v], axis=1)

    @cached_property
    def degrees(self) -> np.ndarray:
        d = kernels.pair_degrees(self.pairs, self.n)
        d.setflags(write=False)
        return d

    @cached_property
    def rows(self) -> np.ndarray:
        """Adjacency bit-rows, shape (n, ceil(n/64)), dtype uint64."""
        W = max(1, (self.n + 63) // 64)
        rows = np.zeros((self.n, W), dtype=np.uint64)
        if self.pairs.size:
            u, v = pair_endpoints(self.pairs, self.n)
            for a, b in ((u, v), (v, u)):
                np.bitwise_or.at(rows, (a, b // 64), np.left_shift(np.uint64(1), (b % 64).astype(np.uint64)))
        rows.setflags(write=False)
        return rows

    @cached_property
    def masks(self) -> tuple[int, ...]:
        """Adjacency rows as Python integers (bit j of masks[i] set iff i ~ j)."""
        out = []
        for r in self.rows:
            x = 0
            for w, word in enumerate(r):
                x |= int(word) << (64 * w)
            out.append(x)
        return tuple(out)

    def adjacency_matrix(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        e = self.edges()
        adj[e[:, 0], e[:, 1]] = True
        adj[e[:, 1], e[:, 0]] = True
        return adj

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        k = int(pair_index(i, j, self.n))
        pos = np.searchsorted(self.pairs, k)
        return bool(pos < self.pairs.size and self.pairs[pos] == k)

    def relabel(self, perm: np.ndarray) -> "Graph":
        """Graph with vertex ``i`` renamed ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        e = self.edges()
        return Graph(self.n, pair_index(perm[e[:, 0]], perm[e[:, 1]], self.n))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and np.array_equal(self.pairs, other.pairs)

    def __hash__(self) -> int:
        return hash((self.n, self.pairs.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class SignedCountParams:
    center: float

    def __post_init__(self):
        if not 0.0 < self.center < 1.0:
            raise ValueError("centering density must lie in (0, 1)")


# ---------------------------------------------------------------- sampling


def bernoulli_pairs(rng: np.random.Generator, total: int, q: float) -> np.ndarray:
    """Sorted indices of a Bernoulli(q) subset of ``range(total)``.

    Uses geometric gaps, so the cost is proportional to the number of hits.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    if total == 0 or q == 0.0:
        return np.zeros(0, dtype=np.int64)
    if q == 1.0:
        return np.arange(total, dtype=np.int64)
    if q > 0.5:
        miss = bernoulli_pairs(rng, total, 1.0 - q)
        keep = np.ones(total, dtype=bool)
        keep[miss] = False
        return np.flatnonzero(keep).astype(np.int64)
    chunks = []
    pos = -1
    while True:
        expect = (total - pos) * q
        size = int(expect + 6.0 * math.sqrt(expect) + 16)
        steps = np.cumsum(rng.geometric(q, size=size), dtype=np.int64) + pos
        if steps[-1] >= total:
            chunks.append(steps[steps < total])
            break
        chunks.append(steps)
        pos = int(steps[-1])
    return np.concatenate(chunks)


def sample_gnq(n: int, q: float, seed: int) -> Graph:
    """Erdos-Renyi graph G(n, q); identical seeds give identical graphs."""
    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    return Graph(n, bernoulli_pairs(rng, n_pairs(n), q), _trusted=True)


# ---------------------------------------------------------- signed counts


def _center(params: SignedCountParams | float) -> float:
    if isinstance(params, SignedCountParams):
        return params.center
    return SignedCountParams(float(params)).center


def signed_edge_count(G: Graph, params: SignedCountParams | float) -> float:
    """Sum over all pairs of (A_ij - q), i.e. |A| - C(n,2) q."""
    q = _center(params)
    return G.edge_count - n_pairs(G.n) * q


def signed_wedge_count(G: Graph, params: SignedCountParams | float) -> float:
    """Sum over wedges i-j-k of (A_ij - q)(A_jk - q), from the degree sequence."""
    q = _center(params)
    if G.n < 3:
        raise ValueError("signed wedge count needs n >= 3")
    return signed_wedge_from_degrees(G.degrees, G.n, q)


def signed_wedge_from_degrees(deg: np.ndarray, n: int, q: float) -> float:
    d = np.asarray(deg, dtype=np.float64)
    s = d - (n - 1) * q
    sq = d * (1.0 - q) ** 2 + (n - 1 - d) * q * q
    return float(np.sum(s * s - sq) / 2.0)


# ------------------------------------------------------ template counting


def _falling(n: int, k: int) -> int:
    return math.perm(n, k) if 0 <= k <= n else 0


def embedding_order(v: int, edges: Iterable[tuple[int, int]]) -> tuple[list[int], list[int]]:
    """BFS order of a connected pattern and, per position, the mask of earlier neighbours."""
    nbrs = [set() for _ in range(v)]
    for a, b in edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    start = max(range(v), key=lambda x: (len(nbrs[x]), -x))
    order = [start]
    seen = {start}
    k = 0
    while k < len(order):
        for y in sorted(nbrs[order[k]], key=lambda y: (-len(nbrs[y]), y)):
            if y not in seen:
                seen.add(y)
                order.append(y)
        k += 1
    if len(order) != v:
        raise ValueError("pattern must be connected")
    pos = {x: t for t, x in enumerate(order)}
    back = []
    for x in order:
        mask = 0
        for y in nbrs[x]:
            if pos[y] < pos[x]:
                mask |= 1 << pos[y]
        back.append(mask)
    return order, back


def count_labeled_embeddings(G: Graph, v: int, edges: Iterable[tuple[int, int]]) -> int:
    """Number of injective maps V(pattern) -> V(G) sending edges to edges."""
    if v > G.n:
        return 0
    _, back = embedding_order(v, list(edges))
    return int(kernels.count_embeddings(G.rows, G.n, np.asarray(back, dtype=np.int64)))


def _star_size(v: int, edges: list[tuple[int, int]]) -> int | None:
    if len(edges) != v - 1 or v < 2:
        return None
    deg = [0] * v
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    if max(deg) == v - 1:
        return v - 1
    return None


def count_simple_template(G: Graph, t) -> int:
    """Number of subgraphs of G isomorphic to the simple connected template ``t``."""
    if not t.is_simple:
        raise ValueError("template has repeated edges; count its simple support instead")
    edges = [(a, b) for a, b, _ in t.edges]
    k = _star_size(t.v, edges)
    if k is not None:
        if k == 1:
            return G.edge_count
        return sum(math.comb(int(d), k) for d in G.degrees)
    emb = count_labeled_embeddings(G, t.v, edges)
    aut = t.aut
    assert emb % aut == 0
    return emb // aut


def count_template_in_Kn(n: int, t) -> int:
    """(n)_v / aut(t): copies of the simple template ``t`` in K_n."""
    if t.v > n:
        raise ValueError("template has more vertices than K_n")
    return _falling(n, t.v) // t.aut


# ------------------------------------------------------------ edge lists


def write_edgelist(G: Graph, path: str | Path) -> None:
    lines = [f"n {G.n}"] + [f"{u + 1} {v + 1}" for u, v in G.edges()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edgelist(path: str | Path) -> Graph:
    return parse_edgelist(Path(path).read_text())


def parse_edgelist(text: str) -> Graph:
    n = None
    edges = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise ValueError("edge list must start with a header line 'n <n>'")
            n = int(parts[1])
            continue
        if len(parts) != 2:
            raise ValueError(f"bad edge line: {raw!r}")
        i, j = int(parts[0]), int(parts[1])
        if not (1 <= i <= n and 1 <= j <= n) or i == j:
            raise ValueError(f"bad edge {i} {j} for n={n}")
        edges.append((i - 1, j - 1))
    if n is None:
        raise ValueError("empty edge list")
    return Graph.from_edges(n, edges)
