"""Typed attributed multigraphs.

A :class:`TypeGraph` declares node types (each with an ordered list of
attribute declarations) and edge types (each with fixed source/target
node types).  A :class:`TypedGraph` is an instance over a type graph:
nodes carry one attribute term per declared attribute, edges connect
node ids, and parallel edges of the same type are allowed.

Ids are plain integers, scoped to the graph that owns them.  All
structures are immutable; construction validates well-typedness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional

from .terms import AttrTerm, Lit, SORTS, is_ground


class GraphError(Exception):
    """Raised when a graph or morphism fails validation."""


@dataclass(frozen=True)
class AttrDecl:
    """One attribute slot on a node type: a name and a sort."""

    name: str
    sort: str

    def __post_init__(self) -> None:
        if self.sort not in SORTS:
            raise GraphError(f"unknown sort {self.sort!r} for attribute {self.name!r}")


@dataclass(frozen=True)
class NodeType:
    name: str
    attrs: tuple[AttrDecl, ...] = ()

    def __post_init__(self) -> None:
        names = [a.name for a in self.attrs]
        if len(set(names)) != len(names):
            raise GraphError(f"duplicate attribute on node type {self.name!r}")

    def attr_sort(self, attr: str) -> str:
        for decl in self.attrs:
            if decl.name == attr:
                return decl.sort
        raise GraphError(f"node type {self.name!r} has no attribute {attr!r}")


@dataclass(frozen=True)
class EdgeType:
    name: str
    src: str
    tgt: str


@dataclass(frozen=True)
class TypeGraph:
    node_types: tuple[NodeType, ...]
    edge_types: tuple[EdgeType, ...]

    def __post_init__(self) -> None:
        nt_names = [nt.name for nt in self.node_types]
        if len(set(nt_names)) != len(nt_names):
            raise GraphError("duplicate node type name")
        et_names = [et.name for et in self.edge_types]
        if len(set(et_names)) != len(et_names):
            raise GraphError("duplicate edge type name")
        known = set(nt_names)
        for et in self.edge_types:
            if et.src not in known or et.tgt not in known:
                raise GraphError(
                    f"edge type {et.name!r} references unknown node type"
                )

    @cached_property
    def node_type_map(self) -> dict[str, NodeType]:
        return {nt.name: nt for nt in self.node_types}

    @cached_property
    def edge_type_map(self) -> dict[str, EdgeType]:
        return {et.name: et for et in self.edge_types}

    def node_type(self, name: str) -> NodeType:
        try:
            return self.node_type_map[name]
        except KeyError:
            raise GraphError(f"unknown node type {name!r}") from None

    def edge_type(self, name: str) -> EdgeType:
        try:
            return self.edge_type_map[name]
        except KeyError:
            raise GraphError(f"unknown edge type {name!r}") from None

    def extend(
        self,
        node_types: Iterable[NodeType] = (),
        edge_types: Iterable[EdgeType] = (),
    ) -> "TypeGraph":
        """A new type graph with extra types appended."""
        return TypeGraph(
            self.node_types + tuple(node_types),
            self.edge_types + tuple(edge_types),
        )


@dataclass(frozen=True)
class Node:
    """A node instance: id, type name, and attribute terms in declaration order."""

    id: int
    type: str
    attrs: tuple[tuple[str, AttrTerm], ...] = ()

    @cached_property
    def attr_map(self) -> dict[str, AttrTerm]:
        return dict(self.attrs)

    def attr(self, name: str) -> AttrTerm:
        return self.attr_map[name]

    def with_attrs(self, attrs: Mapping[str, AttrTerm]) -> "Node":
        return Node(
            self.id,
            self.type,
            tuple((name, attrs.get(name, term)) for name, term in self.attrs),
        )


@dataclass(frozen=True)
class Edge:
    id: int
    type: str
    src: int
    tgt: int


@dataclass(frozen=True)
class TypedGraph:
    """An immutable graph instance over a type graph."""

    type_graph: TypeGraph
    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id)))
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.id)))
        self._validate()

    def _validate(self) -> None:
        node_ids = set()
        for node in self.nodes:
            if node.id in node_ids:
                raise GraphError(f"duplicate node id {node.id}")
            node_ids.add(node.id)
            nt = self.type_graph.node_type(node.type)
            declared = tuple(d.name for d in nt.attrs)
            if tuple(name for name, _ in node.attrs) != declared:
                raise GraphError(
                    f"node {node.id} of type {node.type!r}: attributes must be "
                    f"exactly {declared}, got {tuple(n for n, _ in node.attrs)}"
                )
            for name, term in node.attrs:
                _check_sort(term, nt.attr_sort(name), node.id, name)
        edge_ids = set()
        by_id = {n.id: n for n in self.nodes}
        for edge in self.edges:
            if edge.id in edge_ids:
                raise GraphError(f"duplicate edge id {edge.id}")
            edge_ids.add(edge.id)
            et = self.type_graph.edge_type(edge.type)
            src = by_id.get(edge.src)
            tgt = by_id.get(edge.tgt)
            if src is None or tgt is None:
                raise GraphError(f"edge {edge.id} has a dangling endpoint")
            if src.type != et.src or tgt.type != et.tgt:
                raise GraphError(
                    f"edge {edge.id} of type {edge.type!r} connects "
                    f"{src.type!r}->{tgt.type!r}, expected {et.src!r}->{et.tgt!r}"
                )

    @cached_property
    def node_map(self) -> dict[int, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def edge_map(self) -> dict[int, Edge]:
        return {e.id: e for e in self.edges}

    def node(self, node_id: int) -> Node:
        return self.node_map[node_id]

    def edge(self, edge_id: int) -> Edge:
        return self.edge_map[edge_id]

    @property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(n.id for n in self.nodes)

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.edges)

    def incident_edges(self, node_id: int) -> tuple[Edge, ...]:
        return tuple(
            e for e in self.edges if e.src == node_id or e.tgt == node_id
        )

    def is_ground(self) -> bool:
        """True when every attribute term is a literal-only term."""
        return all(
            is_ground(term) for n in self.nodes for _, term in n.attrs
        )

    def next_node_id(self) -> int:
        return max((n.id for n in self.nodes), default=-1) + 1

    def next_edge_id(self) -> int:
        return max((e.id for e in self.edges), default=-1) + 1

    def with_nodes(
        self,
        add: Iterable[Node] = (),
        drop: Iterable[int] = (),
        replace: Iterable[Node] = (),
    ) -> "TypedGraph":
        dropped = set(drop)
        replaced = {n.id: n for n in replace}
        nodes = [replaced.get(n.id, n) for n in self.nodes if n.id not in dropped]
        return TypedGraph(self.type_graph, tuple(nodes) + tuple(add), self.edges)

    def with_edges(
        self, add: Iterable[Edge] = (), drop: Iterable[int] = ()
    ) -> "TypedGraph":
        dropped = set(drop)
        edges = [e for e in self.edges if e.id not in dropped]
        return TypedGraph(self.type_graph, self.nodes, tuple(edges) + tuple(add))


def _check_sort(term: AttrTerm, sort: str, node_id: int, attr: str) -> None:
    if isinstance(term, Lit) and term.sort != sort:
        raise GraphError(
            f"node {node_id}.{attr}: literal {term.value!r} is not of sort {sort}"
        )
    # Variables and composite terms are sort-checked on evaluation.


@dataclass(frozen=True)
class GraphMorphism:
    """A structure-preserving map between typed graphs over one type graph.

    Stored as explicit id pairs; validation checks totality, type
    preservation, and commutation with source/target.  Attribute terms
    are *not* compared here — rule spans and matches impose their own
    attribute conditions.
    """

    source: TypedGraph
    target: TypedGraph
    node_pairs: tuple[tuple[int, int], ...]
    edge_pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "node_pairs", tuple(sorted(self.node_pairs))
        )
        object.__setattr__(
            self, "edge_pairs", tuple(sorted(self.edge_pairs))
        )
        self._validate()

    def _validate(self) -> None:
        nm = dict(self.node_pairs)
        if len(nm) != len(self.node_pairs):
            raise GraphError("morphism maps a node twice")
        em = dict(self.edge_pairs)
        if len(em) != len(self.edge_pairs):
            raise GraphError("morphism maps an edge twice")
        if set(nm) != set(self.source.node_ids):
            raise GraphError("node map is not total on the source")
        if set(em) != set(self.source.edge_ids):
            raise GraphError("edge map is not total on the source")
        for sid, tid in nm.items():
            s = self.source.node(sid)
            if tid not in self.target.node_map:
                raise GraphError(f"node {sid} maps to missing node {tid}")
            t = self.target.node(tid)
            if s.type != t.type:
                raise GraphError(
                    f"node {sid} ({s.type}) maps to node {tid} ({t.type})"
                )
        for sid, tid in em.items():
            s = self.source.edge(sid)
            if tid not in self.target.edge_map:
                raise GraphError(f"edge {sid} maps to missing edge {tid}")
            t = self.target.edge(tid)
            if s.type != t.type:
                raise GraphError(
                    f"edge {sid} ({s.type}) maps to edge {tid} ({t.type})"
                )
            if nm[s.src] != t.src or nm[s.tgt] != t.tgt:
                raise GraphError(f"edge {sid} does not commute with endpoints")

    @cached_property
    def node_map(self) -> dict[int, int]:
        return dict(self.node_pairs)

    @cached_property
    def edge_map(self) -> dict[int, int]:
        return dict(self.edge_pairs)

    def map_node(self, node_id: int) -> int:
        return self.node_map[node_id]

    def map_edge(self, edge_id: int) -> int:
        return self.edge_map[edge_id]

    def is_injective(self) -> bool:
        return len(set(self.node_map.values())) == len(self.node_pairs) and len(
            set(self.edge_map.values())
        ) == len(self.edge_pairs)

    def compose(self, other: "GraphMorphism") -> "GraphMorphism":
        """The composite ``other ∘ self`` (apply self first)."""
        if self.target is not other.source and self.target != other.source:
            raise GraphError("composition mismatch: target != source")
        return GraphMorphism(
            self.source,
            other.target,
            tuple((a, other.node_map[b]) for a, b in self.node_pairs),
            tuple((a, other.edge_map[b]) for a, b in self.edge_pairs),
        )

    @staticmethod
    def identity(graph: TypedGraph) -> "GraphMorphism":
        return GraphMorphism(
            graph,
            graph,
            tuple((i, i) for i in graph.node_ids),
            tuple((i, i) for i in graph.edge_ids),
        )


def empty_graph(type_graph: TypeGraph) -> TypedGraph:
    return TypedGraph(type_graph, (), ())


def graph_union_ids(g: TypedGraph, h: TypedGraph) -> bool:
    """True when the id spaces of ``g`` and ``h`` are disjoint."""
    return not (
        set(g.node_ids) & set(h.node_ids) or set(g.edge_ids) & set(h.edge_ids)
    )


def disjoint_union(
    g: TypedGraph, h: TypedGraph
) -> tuple[TypedGraph, GraphMorphism, GraphMorphism]:
    """Disjoint union of two graphs over the same type graph.

    ``g`` keeps its ids; ``h``'s ids are shifted past them.  Returns the
    union together with the two injections.
    """
    if g.type_graph != h.type_graph:
        raise GraphError("disjoint union requires a common type graph")
    node_shift = max((n.id for n in g.nodes), default=-1) + 1
    edge_shift = max((e.id for e in g.edges), default=-1) + 1
    h_nodes = tuple(
        Node(n.id + node_shift, n.type, n.attrs) for n in h.nodes
    )
    h_edges = tuple(
        Edge(e.id + edge_shift, e.type, e.src + node_shift, e.tgt + node_shift)
        for e in h.edges
    )
    union = TypedGraph(g.type_graph, g.nodes + h_nodes, g.edges + h_edges)
    inj_g = GraphMorphism(
        g,
        union,
        tuple((i, i) for i in g.node_ids),
        tuple((i, i) for i in g.edge_ids),
    )
    inj_h = GraphMorphism(
        h,
        union,
        tuple((n.id, n.id + node_shift) for n in h.nodes),
        tuple((e.id, e.id + edge_shift) for e in h.edges),
    )
    return union, inj_g, inj_h
