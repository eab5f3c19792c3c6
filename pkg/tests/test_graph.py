import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doomsday.exceptions import GraphError
from doomsday.graph import (
    DegreeDistribution,
    GraphBuilder,
    MultiGraph,
    bareiss_determinant,
    connected_components,
    contract_edge,
    degree_distribution,
    delete_vertex,
    largest_component,
    spanning_tree_count,
)

from oracles import brute_spanning_trees


def path(n):
    return MultiGraph(range(n), [(i, i + 1) for i in range(n - 1)])


def complete(n):
    return MultiGraph(range(n), itertools.combinations(range(n), 2))


TRIANGLE = MultiGraph([0, 1, 2], [(0, 1), (1, 2), (0, 2)])


@st.composite
def multigraphs(draw, max_vertices=7, max_edges=12):
    n = draw(st.integers(0, max_vertices))
    if n < 2:
        return MultiGraph(range(n))
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1])
    return MultiGraph(range(n), draw(st.lists(pairs, max_size=max_edges)))


class TestConstruction:
    def test_parallel_edges_accumulate(self):
        g = MultiGraph([0, 1], [(0, 1), (1, 0), (0, 1)])
        assert g.multiplicity(0, 1) == 3
        assert g.n_edges == 3
        assert list(g.edges()) == [(0, 1, 0), (0, 1, 1), (0, 1, 2)]

    def test_self_loop_rejected(self):
        with pytest.raises(GraphError, match="self-loop"):
            MultiGraph([0], [(0, 0)])

    def test_dangling_endpoint_rejected(self):
        with pytest.raises(GraphError, match="unknown vertex 5"):
            MultiGraph([0, 1], [(0, 5)])

    def test_builder(self):
        g = GraphBuilder().add_vertex(3, "x").add_edge(0, 1, 2).add_edge(1, 3).build()
        assert g.vertices == [0, 1, 3]
        assert g.degree(1) == 3
        assert g.label(3) == "x"

    def test_equality_includes_labels(self):
        assert MultiGraph([0, 1], [(0, 1)]) == MultiGraph([1, 0], [(1, 0)])
        assert MultiGraph([0], labels={0: "a"}) != MultiGraph([0])


class TestComponents:
    def test_path(self):
        assert connected_components(path(3)).count == 1

    def test_path_after_deleting_middle(self):
        part = connected_components(delete_vertex(path(3), 1))
        assert part.count == 2
        assert part.assignment == {0: 0, 2: 1}

    def test_empty(self):
        assert connected_components(MultiGraph()).count == 0

    def test_indices_follow_smallest_member(self):
        g = MultiGraph([0, 1, 2, 5, 7], [(5, 0), (7, 1)])
        assert connected_components(g).components() == [[0, 5], [1, 7], [2]]

    def test_largest_component_tie_goes_to_smallest_id(self):
        g = MultiGraph([0, 1, 2, 3], [(2, 3), (0, 1)])
        assert largest_component(g) == {0, 1}
        assert largest_component(MultiGraph()) == frozenset()


class TestDeletion:
    def test_triangle(self):
        assert delete_vertex(TRIANGLE, 2) == MultiGraph([0, 1], [(0, 1)])

    def test_parallel_copies_all_removed(self):
        g = MultiGraph([0, 1], {(0, 1): 3})
        assert delete_vertex(g, 0) == MultiGraph([1])

    def test_isolated_vertex(self):
        g = MultiGraph([0, 1, 2, 3], [(0, 1), (1, 2)])
        assert delete_vertex(g, 3) == path(3)

    def test_unknown_vertex_named(self):
        with pytest.raises(GraphError, match="42"):
            delete_vertex(path(3), 42)

    def test_input_not_mutated(self):
        g = path(3)
        delete_vertex(g, 1)
        assert g == path(3)


class TestContraction:
    def test_triangle_gives_double_edge(self):
        h = contract_edge(TRIANGLE, (0, 1))
        assert h == MultiGraph([0, 2], {(0, 2): 2})

    def test_double_edge_collapses(self):
        h = contract_edge(MultiGraph([0, 1], {(0, 1): 2}), (0, 1, 1))
        assert h == MultiGraph([0])

    def test_path(self):
        assert contract_edge(path(3), (1, 0)) == MultiGraph([0, 2], [(0, 2)])

    def test_keeps_smaller_id(self):
        g = MultiGraph([3, 8, 9], [(8, 3), (8, 9)])
        assert contract_edge(g, (8, 3)).vertices == [3, 9]

    def test_unknown_edge(self):
        with pytest.raises(GraphError):
            contract_edge(path(3), (0, 2))
        with pytest.raises(GraphError):
            contract_edge(path(3), (0, 1, 1))


class TestDegreeDistribution:
    def test_k3(self):
        assert degree_distribution(complete(3)).as_dict() == {2: 1.0}

    def test_star(self):
        star = MultiGraph(range(4), [(0, 1), (0, 2), (0, 3)])
        assert degree_distribution(star).as_dict() == {1: 0.75, 3: 0.25}

    def test_isolated(self):
        assert degree_distribution(MultiGraph([0])).as_dict() == {0: 1.0}

    def test_parallel_edges_count(self):
        d = degree_distribution(MultiGraph([0, 1], {(0, 1): 2}))
        assert d == DegreeDistribution((2,), (1.0,))

    def test_empty_errors(self):
        with pytest.raises(GraphError):
            degree_distribution(MultiGraph())


class TestSpanningTrees:
    @pytest.mark.parametrize("n, expected", [(1, 1), (2, 1), (3, 3), (4, 16), (5, 125), (6, 1296)])
    def test_cayley(self, n, expected):
        assert spanning_tree_count(complete(n)) == expected

    def test_double_edge(self):
        assert spanning_tree_count(MultiGraph([0, 1], {(0, 1): 2})) == 2

    def test_disconnected_is_zero(self):
        assert spanning_tree_count(MultiGraph([0, 1, 2, 3], [(0, 1), (2, 3)])) == 0
        assert spanning_tree_count(MultiGraph()) == 0

    def test_exact_beyond_float_range(self):
        # K_40 has 40^38 spanning trees, far beyond float precision
        assert spanning_tree_count(complete(40)) == 40**38

    def test_cycle(self):
        cycle = MultiGraph(range(7), [(i, (i + 1) % 7) for i in range(7)])
        assert spanning_tree_count(cycle) == 7

    def test_bareiss_needs_pivoting(self):
        assert bareiss_determinant([[0, 1], [1, 0]]) == -1
        assert bareiss_determinant([[0, 0], [0, 5]]) == 0
        assert bareiss_determinant([[2, -1, 0], [-1, 2, -1], [0, -1, 2]]) == 4

    def test_random_multigraphs_match_brute_force(self):
        rng = random.Random(7)
        for _ in range(60):
            n = rng.randint(2, 5)
            edges = [tuple(rng.sample(range(n), 2)) for _ in range(rng.randint(n - 1, 8))]
            expected = brute_spanning_trees(n, edges)
            assert spanning_tree_count(MultiGraph(range(n), edges)) == expected


@settings(max_examples=300, deadline=None)
@given(multigraphs(), st.data())
def test_deletion_never_decreases_components(g, data):
    if g.n_vertices == 0:
        return
    v = data.draw(st.sampled_from(g.vertices))
    before = connected_components(g).count
    after = connected_components(delete_vertex(g, v)).count
    if g.degree(v) > 0:
        assert after >= before
    else:
        # an isolated vertex is its own component
        assert after == before - 1


@settings(max_examples=300, deadline=None)
@given(multigraphs(), st.data())
def test_contraction_preserves_components(g, data):
    edges = list(g.edges())
    if not edges:
        return
    e = data.draw(st.sampled_from(edges))
    assert connected_components(contract_edge(g, e)).count == connected_components(g).count


@settings(max_examples=1000, deadline=None)
@given(multigraphs(max_vertices=12, max_edges=30))
def test_degree_masses_sum_to_one(g):
    if g.n_vertices == 0:
        return
    d = degree_distribution(g)
    assert abs(sum(d.mass) - 1.0) <= 1e-12
    assert all(p > 0 for p in d.mass)
    assert list(d.support) == sorted(d.support)


@settings(max_examples=300, deadline=None)
@given(multigraphs(), st.data())
def test_delete_then_restore_roundtrip(g, data):
    if g.n_vertices == 0:
        return
    v = data.draw(st.sampled_from(g.vertices))
    former = [(v, w) for _, w, _ in g.incident_edges(v)]
    assert delete_vertex(g, v).with_vertex(v, former) == g
