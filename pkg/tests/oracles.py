"""Independent brute-force reference implementations used by the tests.

Nothing here imports the package's algorithms; only plain Python loops over
explicit enumerations.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def all_pairs(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def matchings_of(edges):
    """All matchings (as lists of edges) of the given edge list."""
    edges = list(edges)
    out = []

    def rec(start, used, cur):
        out.append(list(cur))
        for k in range(start, len(edges)):
            a, b = edges[k]
            if a not in used and b not in used:
                cur.append((a, b))
                rec(k + 1, used | {a, b}, cur)
                cur.pop()

    rec(0, frozenset(), [])
    return out


def matching_counts(n, edges):
    counts = [0] * (n // 2 + 1)
    for M in matchings_of(edges):
        counts[len(M)] += 1
    while len(counts) > 1 and counts[-1] == 0:
        counts.pop()
    return counts


def perfect_matching_count(n, edges):
    if n % 2:
        return 0
    return sum(1 for M in matchings_of(edges) if len(M) == n // 2)


def llr_by_enumeration(n, edges, p, q, lam):
    """log of sum_M mu(M) P(A|M) / Q(A) over all matchings of K_n."""
    N = n * (n - 1) // 2
    A = {tuple(sorted(e)) for e in edges}
    a = len(A)
    Ms = matchings_of(all_pairs(n))
    if math.isinf(lam):
        Ms = [M for M in Ms if len(M) == n // 2]
        w = [1.0] * len(Ms)
    else:
        w = [lam ** len(M) for M in Ms]
    Z = sum(w)
    tot = 0.0
    for M, wm in zip(Ms, w):
        if set(M) <= A:
            tot += wm / Z * p ** (a - len(M)) * (1 - p) ** (N - a)
    Q = q ** a * (1 - q) ** (N - a)
    return math.log(tot / Q) if tot > 0 else -math.inf


def labeled_copies(n, edges, pattern_v, pattern_edges):
    """Number of injective maps of the pattern into the graph preserving edges."""
    E = {tuple(sorted(e)) for e in edges}
    count = 0
    for img in itertools.permutations(range(n), pattern_v):
        if all(tuple(sorted((img[a], img[b]))) in E for a, b in pattern_edges):
            count += 1
    return count


def pattern_automorphisms(v, edges):
    """Vertex permutations preserving the edge multiset."""
    from collections import Counter

    base = Counter(tuple(sorted(e)) for e in edges)
    return sum(1 for perm in itertools.permutations(range(v))
               if Counter(tuple(sorted((perm[a], perm[b]))) for a, b in edges) == base)


def subgraph_count(n, edges, pattern_v, pattern_edges):
    return labeled_copies(n, edges, pattern_v, pattern_edges) // pattern_automorphisms(pattern_v, pattern_edges)


def wedge_sum_direct(n, edges, q):
    """Triple loop over centres j and unordered pairs {i, k} of signed wedge terms."""
    E = {tuple(sorted(e)) for e in edges}

    def x(a, b):
        return (1.0 if tuple(sorted((a, b))) in E else 0.0) - q

    total = 0.0
    for j in range(n):
        others = [i for i in range(n) if i != j]
        for i, k in itertools.combinations(others, 2):
            total += x(i, j) * x(j, k)
    return total


def connected(vertices, edge_list):
    vertices = list(vertices)
    if not vertices:
        return False
    adj = {v: set() for v in vertices}
    for a, b in edge_list:
        adj[a].add(b)
        adj[b].add(a)
    seen = {vertices[0]}
    stack = [vertices[0]]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(vertices)


def signed_spanning_sum(m, edges):
    """Sum over connected spanning edge subsets S of (-1)^|S| by direct enumeration."""
    edges = list(edges)
    total = 0
    for r in range(len(edges) + 1):
        for S in itertools.combinations(edges, r):
            if connected(range(m), S):
                total += (-1) ** r
    return total


def ursell_direct(m, edges):
    return Fraction(signed_spanning_sum(m, edges), math.factorial(m))


def spanning_trees_direct(m, edges):
    edges = list(edges)
    if m == 1:
        return 1
    return sum(1 for S in itertools.combinations(edges, m - 1) if connected(range(m), S))


def connected_subgraph_count_Kn(n, v_max):
    """Number of connected edge subsets of K_n (at least one edge), by vertex count."""
    pairs = all_pairs(n)
    by_size = {}
    for r in range(1, len(pairs) + 1):
        for S in itertools.combinations(pairs, r):
            verts = sorted({x for e in S for x in e})
            if len(verts) <= v_max and connected(verts, S):
                by_size[len(verts)] = by_size.get(len(verts), 0) + 1
    return by_size


def signed_wedge_of(n, E, q):
    def x(a, b):
        return (1.0 if (min(a, b), max(a, b)) in E else 0.0) - q

    return sum(x(i, j) * x(j, k) for j in range(n)
               for i, k in itertools.combinations([v for v in range(n) if v != j], 2))


def planted_count_moments(n, p, q, lam):
    """Exact (mean, var) of the signed edge and wedge counts under the planted model.

    Sums over every graph on n vertices and every matching of K_n.
    """
    pairs = all_pairs(n)
    N = len(pairs)
    Ms = matchings_of(pairs)
    if math.isinf(lam):
        Ms = [M for M in Ms if 2 * len(M) == n]
        w = [1.0] * len(Ms)
    else:
        w = [lam ** len(M) for M in Ms]
    Z = sum(w)
    Ms = [(frozenset(M), wm / Z) for M, wm in zip(Ms, w)]
    e1 = e2 = w1 = w2 = 0.0
    for bits in range(1 << N):
        E = {pairs[i] for i in range(N) if bits >> i & 1}
        a = len(E)
        prob = sum(mu * p ** (a - len(M)) * (1 - p) ** (N - a) for M, mu in Ms if M <= E)
        if prob == 0:
            continue
        ke = a - N * q
        kw = signed_wedge_of(n, E, q)
        e1 += prob * ke
        e2 += prob * ke * ke
        w1 += prob * kw
        w2 += prob * kw * kw
    return (e1, e2 - e1 * e1), (w1, w2 - w1 * w1)
