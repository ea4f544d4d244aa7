import pytest

from gramweave.graphs import (
    AttrDecl,
    Edge,
    EdgeType,
    Node,
    NodeType,
    TypeGraph,
    TypedGraph,
)
from gramweave.terms import Lit, Var


@pytest.fixture
def tiny_types() -> TypeGraph:
    """Two node types, one labelled, and two edge types between them."""
    return TypeGraph(
        node_types=(
            NodeType("A", (AttrDecl("tag", "string"),)),
            NodeType("B", ()),
        ),
        edge_types=(
            EdgeType("ab", "A", "B"),
            EdgeType("loop", "B", "B"),
        ),
    )


@pytest.fixture
def tiny_graph(tiny_types) -> TypedGraph:
    """a0 --ab--> b1 with a loop on b1, plus an isolated a2."""
    return TypedGraph(
        tiny_types,
        nodes=(
            Node(0, "A", (("tag", Lit("x")),)),
            Node(1, "B"),
            Node(2, "A", (("tag", Lit("y")),)),
        ),
        edges=(
            Edge(0, "ab", 0, 1),
            Edge(1, "loop", 1, 1),
        ),
    )


def node(nid, typ, **attrs):
    """Shorthand node constructor used across the test suite.

    Attribute values may be raw literals or prepared terms; a string
    prefixed with ``?`` becomes a variable.
    """
    packed = []
    for name, value in attrs.items():
        if isinstance(value, str) and value.startswith("?"):
            packed.append((name, Var(value[1:])))
        elif isinstance(value, (str, int, bool)):
            packed.append((name, Lit(value)))
        else:
            packed.append((name, value))
    return Node(nid, typ, tuple(packed))
