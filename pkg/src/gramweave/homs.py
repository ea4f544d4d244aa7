"""Homomorphism enumeration between typed attributed graphs.

The search backtracks over pattern nodes in ascending id order, pruning
a candidate as soon as an edge to an already-placed neighbour cannot be
realised, then enumerates edge images (parallel edges give genuine
choice).  Results come back in a deterministic order: lexicographic in
the node assignment, then in the edge assignment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Literal, Optional

from .graphs import GraphMorphism, TypedGraph
from .terms import AttrTerm, match_term

AttrPolicy = Literal["match", "equal", "ignore"]


@dataclass(frozen=True)
class Hom:
    """A homomorphism together with the variable binding it induced."""

    morphism: GraphMorphism
    binding: tuple[tuple[str, AttrTerm], ...]

    @property
    def binding_map(self) -> dict[str, AttrTerm]:
        return dict(self.binding)


def enumerate_homomorphisms(
    pattern: TypedGraph,
    host: TypedGraph,
    *,
    injective_only: bool = False,
    attrs: AttrPolicy = "match",
    seed_binding: Optional[dict[str, AttrTerm]] = None,
) -> Iterator[Hom]:
    """Yield all homomorphisms from ``pattern`` into ``host``.

    ``attrs`` selects how node attributes are compared: ``"match"``
    treats pattern terms as one-way patterns over host terms and
    accumulates a binding, ``"equal"`` demands syntactically identical
    terms, ``"ignore"`` skips the comparison entirely.
    """
    if pattern.type_graph != host.type_graph:
        return
    p_nodes = pattern.nodes
    binding: dict[str, AttrTerm] = dict(seed_binding or {})
    node_image: dict[int, int] = {}
    used_nodes: set[int] = set()

    host_by_type: dict[str, list] = {}
    for n in host.nodes:
        host_by_type.setdefault(n.type, []).append(n)

    # Pattern edges indexed by endpoint for incremental pruning.
    adj: dict[int, list] = {n.id: [] for n in p_nodes}
    for e in pattern.edges:
        adj[e.src].append(e)
        if e.tgt != e.src:
            adj[e.tgt].append(e)

    def attrs_ok(p_node, h_node, added: list[str]) -> bool:
        if attrs == "ignore":
            return True
        for (name, p_term), (_, h_term) in zip(p_node.attrs, h_node.attrs):
            if attrs == "equal":
                if p_term != h_term:
                    return False
            else:
                before = set(binding)
                if not match_term(p_term, h_term, binding):
                    return False
                added.extend(set(binding) - before)
        return True

    def edges_realisable(v: int) -> bool:
        for e in adj[v]:
            other = e.tgt if e.src == v else e.src
            if other not in node_image and other != v:
                continue
            s = node_image[e.src]
            t = node_image[e.tgt]
            if not any(
                he.type == e.type and he.src == s and he.tgt == t
                for he in host.edges
            ):
                return False
        return True

    def assign_nodes(idx: int) -> Iterator[Hom]:
        if idx == len(p_nodes):
            yield from assign_edges(0, {}, set())
            return
        p_node = p_nodes[idx]
        for h_node in host_by_type.get(p_node.type, ()):
            if injective_only and h_node.id in used_nodes:
                continue
            added: list[str] = []
            if not attrs_ok(p_node, h_node, added):
                for name in added:
                    del binding[name]
                continue
            node_image[p_node.id] = h_node.id
            used_nodes.add(h_node.id)
            if edges_realisable(p_node.id):
                yield from assign_nodes(idx + 1)
            del node_image[p_node.id]
            used_nodes.discard(h_node.id)
            for name in added:
                del binding[name]

    def assign_edges(
        idx: int, edge_image: dict[int, int], used_edges: set[int]
    ) -> Iterator[Hom]:
        if idx == len(pattern.edges):
            yield Hom(
                GraphMorphism(
                    pattern,
                    host,
                    tuple(node_image.items()),
                    tuple(edge_image.items()),
                ),
                tuple(sorted(binding.items())),
            )
            return
        p_edge = pattern.edges[idx]
        s = node_image[p_edge.src]
        t = node_image[p_edge.tgt]
        for h_edge in host.edges:
            if h_edge.type != p_edge.type or h_edge.src != s or h_edge.tgt != t:
                continue
            if injective_only and h_edge.id in used_edges:
                continue
            edge_image[p_edge.id] = h_edge.id
            used_edges.add(h_edge.id)
            yield from assign_edges(idx + 1, edge_image, used_edges)
            del edge_image[p_edge.id]
            used_edges.discard(h_edge.id)

    yield from assign_nodes(0)


def find_homomorphisms(
    pattern: TypedGraph,
    host: TypedGraph,
    *,
    injective_only: bool = False,
) -> list[GraphMorphism]:
    """All attribute-compatible homomorphisms, in deterministic order."""
    return [
        h.morphism
        for h in enumerate_homomorphisms(
            pattern, host, injective_only=injective_only, attrs="match"
        )
    ]


def find_isomorphism(g: TypedGraph, h: TypedGraph) -> Optional[GraphMorphism]:
    """An isomorphism g → h with exactly equal attribute terms, or None."""
    if len(g.nodes) != len(h.nodes) or len(g.edges) != len(h.edges):
        return None
    for hom in enumerate_homomorphisms(g, h, injective_only=True, attrs="equal"):
        return hom.morphism
    return None


def is_isomorphic(g: TypedGraph, h: TypedGraph) -> bool:
    return find_isomorphism(g, h) is not None
