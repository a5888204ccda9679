"""Connected multigraph templates: canonical forms, enumeration and weights.

A template is an unlabeled connected multigraph without self-loops. It is
stored in canonical form: vertices ``0..v-1`` and a sorted tuple of
``(a, b, multiplicity)`` with ``a < b``. Canonical labelling uses colour
refinement with individualization over the full search tree, so the number
of leaves achieving the minimal certificate is the automorphism count.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations

import numpy as np

from . import kernels

#: Largest total multiplicity handled by enumeration and series code.
TEMPLATE_CAP = 7


class TemplateFilter(enum.Enum):
    ALL = "all"
    SIMPLE_TREES = "simple-trees"
    ONE_REP_TREES = "one-rep-trees"
    TWO_REP_TREES = "two-rep-trees"
    SIMPLE_CYCLIC = "simple-cyclic"

    @classmethod
    def parse(cls, s: "str | TemplateFilter") -> "TemplateFilter":
        if isinstance(s, TemplateFilter):
            return s
        key = s.strip().lower().replace("_", "-")
        aliases = {"simpletrees": "simple-trees", "onereptrees": "one-rep-trees",
                   "tworeptrees": "two-rep-trees", "simplecyclic": "simple-cyclic"}
        return cls(aliases.get(key, key))


# ------------------------------------------------------------ canonical form


def _refine(W, cells):
    while True:
        index = {}
        for ci, cell in enumerate(cells):
            for x in cell:
                index[x] = ci
        new = []
        split = False
        for cell in cells:
            if len(cell) == 1:
                new.append(cell)
                continue
            groups: dict = {}
            for x in cell:
                row = W[x]
                sig = [0] * len(cells)
                for y, w in enumerate(row):
                    if w:
                        # weight each neighbour class by multiplicity pattern
                        sig[index[y]] += w * 64 + 1
                groups.setdefault(tuple(sig), []).append(x)
            if len(groups) > 1:
                split = True
                for key in sorted(groups):
                    new.append(groups[key])
            else:
                new.append(cell)
        cells = new
        if not split:
            return cells


def canonical_labelling(v: int, W) -> tuple[tuple, list[int], int]:
    """Return (certificate, order, automorphism count) for a weighted graph.

    ``order[i]`` is the original vertex that receives canonical label ``i``.
    """
    best_cert = None
    best_order = None
    count = 0

    def leaf(cells):
        nonlocal best_cert, best_order, count
        order = [c[0] for c in cells]
        cert = tuple(W[order[i]][order[j]] for i in range(v) for j in range(i + 1, v))
        if best_cert is None or cert < best_cert:
            best_cert, best_order, count = cert, order, 1
        elif cert == best_cert:
            count += 1

    def search(cells):
        for i, cell in enumerate(cells):
            if len(cell) > 1:
                break
        else:
            leaf(cells)
            return
        for x in cell:
            rest = [y for y in cell if y != x]
            search(_refine(W, cells[:i] + [[x], rest] + cells[i + 1:]))

    search(_refine(W, [list(range(v))]))
    return best_cert, best_order, count


def _canon(v: int, edges) -> tuple[tuple, int]:
    W = [[0] * v for _ in range(v)]
    for a, b, k in edges:
        W[a][b] += k
        W[b][a] += k
    _, order, aut = canonical_labelling(v, W)
    pos = {x: i for i, x in enumerate(order)}
    out = []
    for a, b, k in edges:
        x, y = sorted((pos[a], pos[b]))
        out.append((x, y, k))
    return tuple(sorted(out)), aut


# ------------------------------------------------------------------ template


@dataclass(frozen=True, eq=False)
class ClusterTemplate:
    """Unlabeled connected multigraph in canonical form."""

    v: int
    edges: tuple[tuple[int, int, int], ...]

    @classmethod
    def from_edges(cls, v: int, edges) -> "ClusterTemplate":
        """Build from pairs ``(a, b)`` (repeats allowed) or triples ``(a, b, mult)``."""
        mult: dict[tuple[int, int], int] = {}
        for e in edges:
            a, b = int(e[0]), int(e[1])
            k = int(e[2]) if len(e) == 3 else 1
            if a == b:
                raise ValueError("self-loops are not allowed")
            if not (0 <= a < v and 0 <= b < v):
                raise ValueError("vertex out of range")
            if k < 1:
                raise ValueError("multiplicity must be positive")
            key = (min(a, b), max(a, b))
            mult[key] = mult.get(key, 0) + k
        raw = tuple((a, b, k) for (a, b), k in sorted(mult.items()))
        if not _connected_cover(v, raw):
            raise ValueError("template must be connected with no isolated vertices")
        canon, aut = _canon(v, raw)
        t = cls(v, canon)
        t.__dict__["aut"] = aut
        return t

    @property
    def m(self) -> int:
        return sum(k for _, _, k in self.edges)

    @property
    def distinct_edges(self) -> int:
        return len(self.edges)

    @property
    def is_simple(self) -> bool:
        return all(k == 1 for _, _, k in self.edges)

    @property
    def excess(self) -> int:
        """Repeated copies beyond a spanning tree of the support: m - (v - 1)."""
        return self.m - (self.v - 1)

    @property
    def support_is_tree(self) -> bool:
        return self.distinct_edges == self.v - 1

    @property
    def is_tree(self) -> bool:
        return self.is_simple and self.support_is_tree

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(k for _, _, k in self.edges)

    @cached_property
    def aut(self) -> int:
        return _canon(self.v, self.edges)[1]

    @cached_property
    def support(self) -> "ClusterTemplate":
        """Simple graph with every repeated edge collapsed to one copy."""
        if self.is_simple:
            return self
        return ClusterTemplate.from_edges(self.v, [(a, b) for a, b, _ in self.edges])

    def degrees(self, with_multiplicity: bool = False) -> list[int]:
        d = [0] * self.v
        for a, b, k in self.edges:
            w = k if with_multiplicity else 1
            d[a] += w
            d[b] += w
        return d

    def key(self) -> tuple:
        return (self.v, self.edges)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ClusterTemplate) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __lt__(self, other: "ClusterTemplate") -> bool:
        return sort_key(self) < sort_key(other)

    def edge_string(self) -> str:
        """1-indexed multiset, e.g. ``1-2x2,2-3``."""
        parts = []
        for a, b, k in self.edges:
            s = f"{a + 1}-{b + 1}"
            parts.append(s if k == 1 else f"{s}x{k}")
        return ",".join(parts)

    @classmethod
    def parse_edge_string(cls, v: int, s: str) -> "ClusterTemplate":
        edges = []
        for part in s.split(","):
            part = part.strip()
            pair, _, mult = part.partition("x")
            a, b = pair.split("-")
            edges.append((int(a) - 1, int(b) - 1, int(mult) if mult else 1))
        return cls.from_edges(v, edges)

    def slots(self) -> list[tuple[int, int]]:
        """Edge list with repeated edges expanded into parallel copies."""
        return [(a, b) for a, b, k in self.edges for _ in range(k)]

    def __repr__(self) -> str:
        return f"ClusterTemplate(v={self.v}, edges={self.edge_string()})"


def _connected_cover(v: int, edges) -> bool:
    if v < 2:
        return False
    parent = list(range(v))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    touched = set()
    for a, b, _ in edges:
        touched.update((a, b))
        parent[find(a)] = find(b)
    return len(touched) == v and len({find(x) for x in range(v)}) == 1


def sort_key(t: ClusterTemplate) -> tuple:
    return (t.m, t.v, -t.distinct_edges, t.edges)


# -------------------------------------------------------------- enumeration


def _grow(t: ClusterTemplate):
    """All one-edge extensions of t (raise a multiplicity, add an edge, add a leaf)."""
    edges = list(t.edges)
    present = {(a, b) for a, b, _ in edges}
    for i, (a, b, k) in enumerate(edges):
        yield t.v, edges[:i] + [(a, b, k + 1)] + edges[i + 1:]
    for a, b in combinations(range(t.v), 2):
        if (a, b) not in present:
            yield t.v, edges + [(a, b, 1)]
    for a in range(t.v):
        yield t.v + 1, edges + [(a, t.v, 1)]


@lru_cache(maxsize=None)
def _level(m: int) -> tuple[ClusterTemplate, ...]:
    if m == 1:
        return (ClusterTemplate.from_edges(2, [(0, 1)]),)
    seen: dict[tuple, ClusterTemplate] = {}
    for t in _level(m - 1):
        for v, edges in _grow(t):
            canon, aut = _canon(v, edges)
            if (v, canon) not in seen:
                new = ClusterTemplate(v, canon)
                new.__dict__["aut"] = aut
                seen[(v, canon)] = new
    return tuple(sorted(seen.values(), key=sort_key))


def _accept(t: ClusterTemplate, f: TemplateFilter) -> bool:
    if f is TemplateFilter.ALL:
        return True
    if f is TemplateFilter.SIMPLE_CYCLIC:
        return t.is_simple and not t.support_is_tree
    if not t.support_is_tree:
        return False
    return t.excess == {TemplateFilter.SIMPLE_TREES: 0, TemplateFilter.ONE_REP_TREES: 1,
                        TemplateFilter.TWO_REP_TREES: 2}[f]


def enumerate_templates(max_edges: int, filter: "TemplateFilter | str" = TemplateFilter.ALL,
                        *, cumulative: bool = False, cap: int = TEMPLATE_CAP) -> list[ClusterTemplate]:
    """Isomorphism classes of connected multigraphs with ``max_edges`` edges.

    With ``cumulative=True`` all sizes ``1..max_edges`` are returned, grouped
    by size. The order is deterministic.
    """
    if max_edges < 1:
        raise ValueError("max_edges must be positive")
    if max_edges > cap:
        raise ValueError(f"max_edges={max_edges} exceeds the template cap {cap}")
    f = TemplateFilter.parse(filter)
    sizes = range(1, max_edges + 1) if cumulative else (max_edges,)
    return [t for m in sizes for t in _level(m) if _accept(t, f)]


def simple_trees(edges: int) -> list[ClusterTemplate]:
    """Unlabeled trees with the given number of edges."""
    return enumerate_templates(edges, TemplateFilter.SIMPLE_TREES, cap=max(TEMPLATE_CAP, edges))


# ---------------------------------------------------------- ursell & weights


@dataclass(frozen=True)
class IncompatibilityGraph:
    """Simple graph on edge slots, given by neighbour bitmasks."""

    masks: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.masks)

    @classmethod
    def from_edges(cls, m: int, edges) -> "IncompatibilityGraph":
        masks = [0] * m
        for i, j in edges:
            if i == j:
                raise ValueError("no self-loops")
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return cls(tuple(masks))

    @classmethod
    def of_slots(cls, slots) -> "IncompatibilityGraph":
        """Slots conflict when they share an endpoint (parallel copies always do)."""
        m = len(slots)
        masks = [0] * m
        for i in range(m):
            for j in range(i + 1, m):
                if set(slots[i]) & set(slots[j]):
                    masks[i] |= 1 << j
                    masks[j] |= 1 << i
        return cls(tuple(masks))

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.m) for j in range(i + 1, self.m) if self.masks[i] >> j & 1]

    def is_connected(self) -> bool:
        if self.m == 0:
            return False
        seen = 1
        frontier = 1
        while frontier:
            nxt = 0
            for i in range(self.m):
                if frontier >> i & 1:
                    nxt |= self.masks[i]
            frontier = nxt & ~seen
            seen |= nxt
        return seen == (1 << self.m) - 1


def connected_signed_sum(H: IncompatibilityGraph) -> int:
    """Sum over connected spanning subgraphs S of H of (-1)^|E(S)|."""
    if H.m == 0:
        return 0
    if not H.is_connected():
        return 0
    return int(kernels.connected_signed_sum(np.array(H.masks, dtype=np.uint64), H.m))


@lru_cache(maxsize=4096)
def _ursell_cached(masks: tuple[int, ...]) -> Fraction:
    H = IncompatibilityGraph(masks)
    return Fraction(connected_signed_sum(H), math.factorial(H.m))


def ursell(H: IncompatibilityGraph) -> Fraction:
    """Ursell function: (1/m!) times the signed connected-spanning-subgraph sum."""
    if H.m < 1:
        raise ValueError("H needs at least one vertex")
    return _ursell_cached(H.masks)


def incompatibility_graph(t: ClusterTemplate) -> IncompatibilityGraph:
    return IncompatibilityGraph.of_slots(t.slots())


@dataclass(frozen=True)
class TemplateTerm:
    template: ClusterTemplate
    ursell: Fraction
    psi: int
    aut: int
    ordering: int

    @property
    def weight(self) -> Fraction:
        """psi * ordering * ursell, the coefficient of lambda^m G0(.) in the series."""
        return self.psi * self.ordering * self.ursell

    @property
    def phi_tilde(self) -> Fraction:
        """m! * ursell, the signed connected-spanning-subgraph sum."""
        return math.factorial(self.template.m) * self.ursell

    def dump(self) -> str:
        t = self.template
        u = self.ursell
        return (f"m={t.m} v={t.v} edges={t.edge_string()} psi={self.psi} aut={self.aut} "
                f"ordering={self.ordering} ursell={u.numerator}/{u.denominator}")


@lru_cache(maxsize=None)
def template_weights(t: ClusterTemplate) -> TemplateTerm:
    psi, rem = divmod(t.support.aut, t.aut)
    assert rem == 0
    ordering = math.factorial(t.m)
    for k in t.multiplicities:
        ordering //= math.factorial(k)
    return TemplateTerm(t, ursell(incompatibility_graph(t)), psi, t.aut, ordering)


def parse_dump_line(line: str) -> TemplateTerm:
    fields = dict(part.split("=", 1) for part in line.split())
    t = ClusterTemplate.parse_edge_string(int(fields["v"]), fields["edges"])
    if t.m != int(fields["m"]):
        raise ValueError("m disagrees with the edge multiset")
    return TemplateTerm(t, Fraction(fields["ursell"]), int(fields["psi"]), int(fields["aut"]),
                        int(fields["ordering"]))


def spanning_tree_count(H: IncompatibilityGraph) -> int:
    """Matrix-tree theorem with a fraction-free (Bareiss) determinant."""
    m = H.m
    if m == 0 or not H.is_connected():
        return 0
    if m == 1:
        return 1
    L = [[0] * m for _ in range(m)]
    for i, j in H.edges():
        L[i][j] -= 1
        L[j][i] -= 1
        L[i][i] += 1
        L[j][j] += 1
    return _bareiss([row[1:] for row in L[1:]])


def _bareiss(M: list[list[int]]) -> int:
    M = [row[:] for row in M]
    n = len(M)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for r in range(k + 1, n):
                if M[r][k]:
                    M[k], M[r] = M[r], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def penrose_check(H: IncompatibilityGraph) -> bool:
    """|signed connected spanning sum| <= number of spanning trees."""
    if not H.is_connected():
        return True
    return abs(connected_signed_sum(H)) <= spanning_tree_count(H)
