import itertools
import math
import time
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from oracles import connected, pattern_automorphisms, signed_spanning_sum, spanning_trees_direct, ursell_direct
from plantmatch.expansion import golden_table
from plantmatch.templates import (
    TEMPLATE_CAP,
    ClusterTemplate,
    IncompatibilityGraph,
    TemplateFilter,
    connected_signed_sum,
    enumerate_templates,
    incompatibility_graph,
    parse_dump_line,
    penrose_check,
    simple_trees,
    spanning_tree_count,
    template_weights,
    ursell,
)


def T(*edges):
    v = 1 + max(max(e[0], e[1]) for e in edges)
    return ClusterTemplate.from_edges(v, edges)


def H(m, edges=()):
    return IncompatibilityGraph.from_edges(m, edges)


def complete_H(m):
    return H(m, itertools.combinations(range(m), 2))


def path_H(m):
    return H(m, [(i, i + 1) for i in range(m - 1)])


def line_graph(edges):
    m = len(edges)
    return [(i, j) for i in range(m) for j in range(i + 1, m) if set(edges[i]) & set(edges[j])]


STAR3 = T((0, 1), (0, 2), (0, 3))
PATH3 = T((0, 1), (1, 2), (2, 3))
TRIANGLE = T((0, 1), (1, 2), (0, 2))


@st.composite
def multigraphs(draw, max_v=6, max_m=6):
    """Random connected multigraph as (v, labelled edge list)."""
    v = draw(st.integers(2, max_v))
    edges = [(draw(st.integers(0, i - 1)), i) for i in range(1, v)]
    extra = draw(st.integers(0, max(0, max_m - len(edges))))
    for _ in range(extra):
        a, b = draw(st.lists(st.integers(0, v - 1), min_size=2, max_size=2, unique=True))
        edges.append((a, b))
    return v, edges


@st.composite
def small_graphs(draw, max_v=6, connected_only=True):
    m = draw(st.integers(1, max_v))
    pairs = list(itertools.combinations(range(m), 2))
    bits = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [e for e, b in zip(pairs, bits) if b]
    if connected_only and m > 1 and not connected(range(m), edges):
        # join consecutive vertices to force connectivity
        edges = sorted(set(edges) | {(i, i + 1) for i in range(m - 1)})
    return m, edges


def brute_force_classes(m):
    """Connected loopless multigraphs with m edges up to isomorphism, by permuting labels."""
    classes = set()
    for v in range(2, m + 2):
        pairs = list(itertools.combinations(range(v), 2))
        perms = list(itertools.permutations(range(v)))
        for multiset in itertools.combinations_with_replacement(pairs, m):
            if {x for e in multiset for x in e} != set(range(v)) or not connected(range(v), multiset):
                continue
            classes.add((v, min(tuple(sorted(tuple(sorted((p[a], p[b]))) for a, b in multiset))
                                for p in perms)))
    return classes


class TestClusterTemplate:
    def test_rejects_disconnected(self):
        with pytest.raises(ValueError):
            ClusterTemplate.from_edges(4, [(0, 1), (2, 3)])

    def test_rejects_isolated_vertex(self):
        with pytest.raises(ValueError):
            ClusterTemplate.from_edges(3, [(0, 1)])

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            ClusterTemplate.from_edges(2, [(0, 0)])

    def test_pairs_and_triples_agree(self):
        assert T((0, 1), (0, 1), (1, 2)) == T((0, 1, 2), (1, 2))

    @given(multigraphs(), st.randoms(use_true_random=False))
    def test_canonical_under_relabelling(self, g, rnd):
        v, edges = g
        perm = list(range(v))
        rnd.shuffle(perm)
        moved = [(perm[a], perm[b]) for a, b in edges]
        assert ClusterTemplate.from_edges(v, edges) == ClusterTemplate.from_edges(v, moved)

    @given(multigraphs())
    def test_aut_matches_permutation_count(self, g):
        v, edges = g
        assert ClusterTemplate.from_edges(v, edges).aut == pattern_automorphisms(v, edges)

    @given(multigraphs())
    def test_edge_string_roundtrip(self, g):
        t = ClusterTemplate.from_edges(*g)
        assert ClusterTemplate.parse_edge_string(t.v, t.edge_string()) == t

    def test_support_collapses_repeats(self):
        assert T((0, 1, 2), (1, 2)).support == T((0, 1), (1, 2))

    def test_properties(self):
        t = T((0, 1, 3), (1, 2))
        assert (t.m, t.v, t.distinct_edges, t.excess) == (4, 3, 2, 2)
        assert t.support_is_tree and not t.is_tree and not t.is_simple
        assert sorted(t.degrees()) == [1, 1, 2] and sorted(t.degrees(True)) == [1, 3, 4]


class TestEnumeration:
    def test_m2(self):
        assert set(enumerate_templates(2)) == {T((0, 1, 2)), T((0, 1), (1, 2))}

    def test_m3(self):
        expected = {T((0, 1, 3)), T((0, 1, 2), (1, 2)), TRIANGLE, STAR3, PATH3}
        got = enumerate_templates(3, "all")
        assert len(got) == 5 and set(got) == expected

    def test_m3_simple_trees(self):
        assert set(enumerate_templates(3, TemplateFilter.SIMPLE_TREES)) == {STAR3, PATH3}

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_matches_brute_force(self, m):
        assert len(enumerate_templates(m)) == len(brute_force_classes(m))

    @pytest.mark.parametrize("m", range(1, TEMPLATE_CAP + 1))
    def test_trees_cayley(self, m):
        # labelled trees on m+1 vertices, summed over unlabelled classes
        total = sum(Fraction(math.factorial(m + 1), t.aut) for t in simple_trees(m))
        assert total == (m + 1) ** (m - 1)

    @pytest.mark.parametrize("m", range(1, 6))
    def test_no_duplicates_and_connected(self, m):
        ts = enumerate_templates(m)
        assert len(ts) == len(set(ts))
        assert all(t.m == m and connected(range(t.v), [(a, b) for a, b, _ in t.edges]) for t in ts)

    def test_filters_partition_trees(self):
        m = 5
        trees = [t for t in enumerate_templates(m) if t.support_is_tree]
        by_filter = [set(enumerate_templates(m, f)) for f in
                     ("simple-trees", "one-rep-trees", "two-rep-trees")]
        assert all(t.excess == e for e, s in enumerate(by_filter) for t in s)
        assert set().union(*by_filter) == {t for t in trees if t.excess <= 2}

    def test_simple_cyclic(self):
        got = enumerate_templates(4, "SimpleCyclic")
        assert set(got) == {T((0, 1), (1, 2), (2, 3), (3, 0)), T((0, 1), (1, 2), (0, 2), (2, 3))}

    def test_cumulative(self):
        got = enumerate_templates(3, cumulative=True)
        assert [t.m for t in got] == [1, 2, 2, 3, 3, 3, 3, 3]

    def test_deterministic_order(self):
        assert enumerate_templates(5) == enumerate_templates(5)

    def test_cap(self):
        with pytest.raises(ValueError):
            enumerate_templates(TEMPLATE_CAP + 1)
        with pytest.raises(ValueError):
            enumerate_templates(0)


class TestUrsell:
    def test_single_vertex(self):
        assert ursell(H(1)) == 1

    def test_single_edge(self):
        assert ursell(complete_H(2)) == Fraction(-1, 2)

    def test_triangle(self):
        assert ursell(complete_H(3)) == Fraction(1, 3)

    def test_path(self):
        assert ursell(path_H(3)) == Fraction(1, 6)

    def test_line_graphs_of_trees(self):
        assert ursell(complete_H(4)) == Fraction(-1, 4)
        assert ursell(path_H(4)) == Fraction(-1, 24)
        tail = [(0, 1), (0, 2), (0, 3), (3, 4)]
        assert ursell(H(4, line_graph(tail))) == Fraction(-1, 12)

    def test_disconnected_is_zero(self):
        assert ursell(H(4, [(0, 1), (2, 3)])) == 0
        assert ursell(H(2)) == 0

    def test_needs_a_vertex(self):
        with pytest.raises(ValueError):
            ursell(H(0))

    @given(small_graphs(max_v=6, connected_only=False))
    def test_matches_direct_enumeration(self, g):
        m, edges = g
        assert ursell(H(m, edges)) == ursell_direct(m, edges)

    def test_parallel_copies_are_adjacent(self):
        t = T((0, 1, 2), (2, 3), (1, 2))
        G = incompatibility_graph(t)
        slots = t.slots()
        twins = [(i, j) for i in range(4) for j in range(i + 1, 4) if slots[i] == slots[j]]
        assert G.m == 4 and len(twins) == 1
        assert all(G.masks[i] >> j & 1 for i, j in twins)

    def test_simple_template_gives_line_graph(self):
        edges = [(0, 1), (1, 2), (2, 3), (1, 3)]
        t = T(*edges)
        G = incompatibility_graph(t)
        assert len(G.edges()) == len(line_graph([(a, b) for a, b, _ in t.edges]))


class TestWeights:
    def test_repeated_wedge(self):
        w = template_weights(T((0, 1, 2), (1, 2)))
        assert (w.psi, w.ordering, w.ursell) == (2, 3, Fraction(1, 3))

    def test_path3_leaf_repeat(self):
        w = template_weights(T((0, 1, 2), (1, 2), (2, 3)))
        assert (w.psi, w.ordering, w.ursell) == (2, 12, Fraction(-1, 12))

    def test_path3_middle_repeat(self):
        w = template_weights(T((0, 1), (1, 2, 2), (2, 3)))
        assert (w.psi, w.ordering, w.ursell) == (1, 12, Fraction(-1, 6))

    def test_path4(self):
        w = template_weights(T((0, 1), (1, 2), (2, 3), (3, 4)))
        assert (w.psi, w.ordering, w.ursell) == (1, 24, Fraction(-1, 24))

    @pytest.mark.parametrize("m", range(1, 6))
    def test_simple_have_psi_one(self, m):
        for t in enumerate_templates(m):
            w = template_weights(t)
            assert w.psi >= 1
            if t.is_simple:
                assert w.psi == 1 and w.ordering == math.factorial(m)

    @pytest.mark.parametrize("m", range(1, 5))
    def test_psi_counts_placements(self, m):
        # psi = number of labelled multiplicity assignments on the support giving an isomorphic multigraph
        for t in enumerate_templates(m):
            sup = [(a, b) for a, b, _ in t.support.edges]
            target = sorted(t.multiplicities)
            count = 0
            for mults in itertools.product(range(1, m + 1), repeat=len(sup)):
                if sorted(mults) != target:
                    continue
                cand = ClusterTemplate.from_edges(t.v, [(a, b, k) for (a, b), k in zip(sup, mults)])
                count += cand == t
            assert template_weights(t).psi == count

    def test_dump_roundtrip(self):
        for t in enumerate_templates(4, cumulative=True):
            w = template_weights(t)
            assert parse_dump_line(w.dump()) == w


class TestGoldenTable:
    def test_reproduces_every_row(self):
        start = time.perf_counter()
        computed = {t: template_weights(t) for t in enumerate_templates(4, cumulative=True)}
        for row in golden_table():
            w = computed[row.template]
            assert (w.psi, w.ordering, w.ursell) == (row.psi, row.ordering, row.ursell), row.dump()
            assert w.aut == row.aut
        assert time.perf_counter() - start < 1.0

    def test_row_count(self):
        rows = golden_table()
        assert [sum(r.template.m == m for r in rows) for m in range(1, 5)] == [1, 2, 5, 9]


class TestPenrose:
    def test_triangle(self):
        G = complete_H(3)
        assert spanning_tree_count(G) == 3 and connected_signed_sum(G) == 2 and penrose_check(G)

    def test_single_edge(self):
        G = complete_H(2)
        assert spanning_tree_count(G) == 1 and connected_signed_sum(G) == -1 and penrose_check(G)

    def test_disconnected(self):
        G = H(3, [(0, 1)])
        assert spanning_tree_count(G) == 0 and penrose_check(G)

    @pytest.mark.parametrize("m", range(1, 9))
    def test_complete_cayley(self, m):
        assert spanning_tree_count(complete_H(m)) == m ** (m - 2) if m > 1 else 1

    @given(small_graphs(max_v=6))
    def test_counts_match_direct(self, g):
        m, edges = g
        assert spanning_tree_count(H(m, edges)) == spanning_trees_direct(m, edges)
        assert connected_signed_sum(H(m, edges)) == signed_spanning_sum(m, edges)

    @settings(max_examples=100)
    @given(small_graphs(max_v=8))
    def test_bound_holds(self, g):
        assert penrose_check(H(*g))
