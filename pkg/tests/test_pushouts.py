import pytest

from gramweave.graphs import (
    Edge,
    EdgeType,
    GraphMorphism,
    Node,
    NodeType,
    TypeGraph,
    TypedGraph,
)
from gramweave.homs import is_isomorphic
from gramweave.pushouts import (
    GluingViolation,
    check_gluing,
    pushout,
    pushout_complement,
)
from gramweave.terms import Lit

from conftest import node

TG = TypeGraph((NodeType("N"),), (EdgeType("e", "N", "N"),))


def g(nodes, edges=()):
    return TypedGraph(
        TG,
        tuple(Node(i, "N") for i in nodes),
        tuple(Edge(i, "e", s, t) for i, (s, t) in enumerate(edges)),
    )


def inj(src, tgt, node_pairs, edge_pairs=()):
    return GraphMorphism(src, tgt, tuple(node_pairs), tuple(edge_pairs))


def test_pushout_glues_along_shared_node():
    # B: 0-e->1   C: 0-e->1   shared: single node (B's 1 ~ C's 0)
    a = g([0])
    b = g([0, 1], [(0, 1)])
    c = g([0, 1], [(0, 1)])
    f = inj(a, b, [(0, 1)])
    h = inj(a, c, [(0, 0)])
    d, f_star, g_star = pushout(f, h)
    assert len(d.nodes) == 3
    assert len(d.edges) == 2
    assert f_star.node_map[1] == g_star.node_map[0]
    # B keeps its ids, C's tail gets a fresh one
    assert f_star.node_map == {0: 0, 1: 1}
    assert g_star.node_map[1] == 2
    # path of length two
    path = g([0, 1, 2], [(0, 1), (1, 2)])
    assert is_isomorphic(d, path)


def test_pushout_with_empty_apex_is_disjoint_union():
    a = g([])
    b = g([0, 1], [(0, 1)])
    c = g([0])
    d, _, g_star = pushout(inj(a, b, []), inj(a, c, []))
    assert len(d.nodes) == 3
    assert len(d.edges) == 1
    assert g_star.node_map[0] == 2


def test_pushout_merges_b_elements_through_shared_image():
    # a has two nodes both sent to the same C node: B's two nodes merge
    a = g([0, 1])
    b = g([0, 1])
    c = g([0])
    d, f_star, g_star = pushout(inj(a, b, [(0, 0), (1, 1)]), inj(a, c, [(0, 0), (1, 0)]))
    assert len(d.nodes) == 1
    assert f_star.node_map == {0: 0, 1: 0}


def test_pushout_right_operand_attribute_wins(tiny_types):
    shared = TypedGraph(tiny_types, (node(0, "A", tag="?t"),))
    old = TypedGraph(tiny_types, (node(0, "A", tag="old"),))
    new = TypedGraph(tiny_types, (node(0, "A", tag="new"),))
    f = GraphMorphism(shared, old, ((0, 0),), ())
    h = GraphMorphism(shared, new, ((0, 0),), ())
    d, _, _ = pushout(f, h)
    assert d.node(0).attr("tag") == Lit("new")


def span(k, l_graph, node_pairs, edge_pairs=()):
    return inj(k, l_graph, node_pairs, edge_pairs)


class TestGluing:
    def test_delete_isolated_node_ok(self):
        l_graph = g([0])
        k = g([])
        host = g([0, 1], [(0, 1)])
        # match node 0 of L onto an isolated host node
        host_iso = g([0, 1, 2], [(0, 1)])
        m = inj(l_graph, host_iso, [(0, 2)])
        assert check_gluing(span(k, l_graph, []), m) is None

    def test_dangling_edge_blocks_deletion(self):
        l_graph = g([0])
        k = g([])
        host = g([0, 1], [(0, 1)])
        m = inj(l_graph, host, [(0, 0)])
        violation = check_gluing(span(k, l_graph, []), m)
        assert isinstance(violation, GluingViolation)
        assert violation.kind == "dangling"
        assert violation.edge_ids == (0,)

    def test_deleting_node_with_its_edges_ok(self):
        l_graph = g([0, 1], [(0, 1)])
        k_graph = g([1])
        host = g([0, 1], [(0, 1)])
        m = inj(l_graph, host, [(0, 0), (1, 1)], [(0, 0)])
        lspan = span(k_graph, l_graph, [(1, 1)])
        assert check_gluing(lspan, m) is None
        out = pushout_complement(lspan, m)
        assert not isinstance(out, GluingViolation)
        d, k_star, incl = out
        assert d.node_ids == (1,)
        assert d.edge_ids == ()
        assert k_star.node_map == {1: 1}
        assert incl.node_map == {1: 1}

    def test_identification_condition(self):
        # non-injective match folding a deleted node onto a kept one
        l_graph = g([0, 1])
        k_graph = g([1])
        host = g([0])
        m = inj(l_graph, host, [(0, 0), (1, 0)])
        violation = check_gluing(span(k_graph, l_graph, [(1, 1)]), m)
        assert violation is not None
        assert violation.kind == "identification"

    def test_identification_of_two_kept_nodes_is_fine(self):
        l_graph = g([0, 1])
        k_graph = g([0, 1])
        host = g([0])
        m = inj(l_graph, host, [(0, 0), (1, 0)])
        assert check_gluing(span(k_graph, l_graph, [(0, 0), (1, 1)]), m) is None


def test_pushout_complement_keeps_host_ids():
    l_graph = g([0])
    k = g([])
    host = g([0, 1, 2], [(1, 2)])
    m = inj(l_graph, host, [(0, 0)])
    out = pushout_complement(span(k, l_graph, []), m)
    d, _, _ = out
    assert d.node_ids == (1, 2)
    assert d.edge_ids == (0,)


def test_complement_then_pushout_restores_host():
    """Removing L\\K and gluing it back must reproduce the host exactly."""
    l_graph = g([0, 1], [(0, 1)])
    k_graph = g([1])
    host = g([0, 1, 2], [(0, 1), (1, 2)])
    m = inj(l_graph, host, [(0, 0), (1, 1)], [(0, 0)])
    lspan = span(k_graph, l_graph, [(1, 1)])
    d, k_star, _ = pushout_complement(lspan, m)
    restored, _, _ = pushout(k_star, lspan)
    assert is_isomorphic(restored, host)
