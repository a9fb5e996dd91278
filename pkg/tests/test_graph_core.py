import pytest
from hypothesis import given, settings, strategies as st

from conftest import all_graphs
from trekci.graph_core import (
    CyclicGraphError, DirectedGraph, Trek, VertexError, ancestors,
    ancestors_of_set, directed_paths, is_dag, shortest_trek, topological_order,
    trek_graph, trek_shape,
)


def graphs(max_n=6):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_n))
        pairs = [(a, b) for a in range(1, n + 1) for b in range(1, n + 1) if a != b]
        chosen = draw(st.sets(st.sampled_from(pairs))) if pairs else set()
        return DirectedGraph(n, frozenset(chosen))
    return build()


def test_ancestors_examples(chain_collider, trek4):
    assert ancestors(chain_collider, 3) == {1, 2, 3, 4}
    assert ancestors(DirectedGraph(3), 2) == {2}
    cyc = DirectedGraph.from_edges(3, [(1, 2), (2, 3), (3, 1)])
    assert ancestors(cyc, 2) == {1, 2, 3}
    assert ancestors_of_set(chain_collider, {1, 4}) == {1, 4}
    assert ancestors_of_set(chain_collider, set()) == set()
    assert ancestors_of_set(trek4, {4}) == {1, 3, 4}


def test_vertex_range_errors(chain_collider):
    with pytest.raises(VertexError):
        ancestors(chain_collider, 0)
    with pytest.raises(VertexError):
        ancestors(chain_collider, 5)
    with pytest.raises(VertexError):
        DirectedGraph(2, frozenset({(1, 3)}))


def test_self_loops():
    g = DirectedGraph.from_edges(2, [(1, 1), (1, 2)])
    assert g.edges == {(1, 2)}
    with pytest.raises(ValueError):
        DirectedGraph(2, frozenset({(2, 2)}))


def test_trek_graph_examples(chain_collider, zigzag5):
    bg = trek_graph(chain_collider)
    missing = {(a, b) for a in range(1, 5) for b in range(a + 1, 5)} - set(bg.pairs())
    assert missing == {(1, 4), (2, 4)}
    assert trek_graph(DirectedGraph(4)).pairs() == []
    # 3 and 5 share no ancestor in the zig-zag
    assert trek_graph(zigzag5).pairs() == [(1, 3), (1, 4), (2, 4), (2, 5), (3, 4), (4, 5)]


def test_shortest_trek_examples(chain_collider, diamond):
    t = shortest_trek(chain_collider, 1, 3)
    assert t == Trek((1,), (1, 2, 3)) and t.lengths == (0, 2)
    assert shortest_trek(chain_collider, 1, 4) is None
    t = shortest_trek(diamond, 3, 4)
    assert t == Trek((3,), (3, 4)) and t.lengths == (0, 1)
    assert shortest_trek(diamond, 2, 3) == Trek((1, 2), (1, 3))


def test_shortest_trek_tie_break():
    # 4 has parents 2 and 3, both children of 1
    g = DirectedGraph.from_edges(5, [(1, 2), (1, 3), (2, 4), (3, 4), (1, 5)])
    assert shortest_trek(g, 4, 5) == Trek((1, 2, 4), (1, 5))
    assert shortest_trek(g, 5, 4) == Trek((1, 5), (1, 2, 4))


def test_topological_order(chain_collider):
    assert is_dag(chain_collider)
    assert topological_order(chain_collider) == [1, 2, 4, 3]
    cyc = DirectedGraph.from_edges(2, [(1, 2), (2, 1)])
    assert not is_dag(cyc)
    with pytest.raises(CyclicGraphError):
        topological_order(cyc)
    assert topological_order(DirectedGraph(1)) == [1]


def test_trek_shape_labels():
    g, t = trek_shape(2, 1)
    assert t.top == 3 and t.source == 1 and t.sink == 4
    assert g.edges == {(3, 2), (2, 1), (3, 4)}


def _brute_shortest(g, i, j):
    best = None
    for t in g.vertices:
        for left in directed_paths(g, t, i):
            for right in directed_paths(g, t, j):
                key = (len(left) + len(right), tuple(reversed(left)) + right[1:], len(left))
                if best is None or key < best[0]:
                    best = (key, Trek(left, right))
    return None if best is None else best[1]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_exhaustive_equivalence(n):
    for g in all_graphs(n):
        bg = trek_graph(g)
        an = {v: ancestors(g, v) for v in g.vertices}
        for i in g.vertices:
            for j in g.vertices:
                if i == j:
                    continue
                t = shortest_trek(g, i, j)
                assert bg.has_edge(i, j) == bool(an[i] & an[j]) == (t is not None)
                if t is not None:
                    assert t.is_valid_in(g)
                    assert t.source == i and t.sink == j
                    assert len(set(t.left)) == len(t.left)
                    assert len(set(t.right)) == len(t.right)


def test_exhaustive_equivalence_n5_sampled():
    # 2^20 graphs is too many for the default run; take a fixed stride
    for k, g in enumerate(all_graphs(5)):
        if k % 997:
            continue
        bg = trek_graph(g)
        for i in g.vertices:
            for j in g.vertices:
                if i != j:
                    t = shortest_trek(g, i, j)
                    assert bg.has_edge(i, j) == (t is not None)
                    assert t == _brute_shortest(g, i, j)


@settings(max_examples=150, deadline=None)
@given(graphs())
def test_shortest_trek_matches_brute_force(g):
    for i in g.vertices:
        for j in g.vertices:
            if i != j:
                assert shortest_trek(g, i, j) == _brute_shortest(g, i, j)


@settings(max_examples=150, deadline=None)
@given(graphs(), st.data())
def test_ancestor_properties(g, data):
    bg = trek_graph(g)
    for i in g.vertices:
        assert i in ancestors(g, i)
        for j in g.vertices:
            if i != j:
                assert bg.has_edge(i, j) == bg.has_edge(j, i)
    if g.n >= 2:
        a = data.draw(st.integers(1, g.n))
        b = data.draw(st.integers(1, g.n).filter(lambda v: v != a))
        bigger = g.add_edges([(a, b)])
        for v in g.vertices:
            assert ancestors(g, v) <= ancestors(bigger, v)


@settings(max_examples=100, deadline=None)
@given(graphs())
def test_topological_order_respects_edges(g):
    if not is_dag(g):
        return
    pos = {v: k for k, v in enumerate(topological_order(g))}
    assert all(pos[a] < pos[b] for a, b in g.edges)
