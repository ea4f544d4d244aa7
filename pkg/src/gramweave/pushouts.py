"""Pushout and pushout-complement constructions.

These are the two halves of a double-pushout rewrite step.  Both keep
ids stable where they can: the pushout of ``B ← A → C`` reuses ``B``'s
ids for anything ``B`` contributes and mints fresh ids past them for
``C``-only elements; the pushout complement carves ``D`` out of ``G``
without renumbering.

Gluing failures are ordinary values (:class:`GluingViolation`), not
exceptions — callers decide whether a failed precondition is an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .graphs import Edge, GraphError, GraphMorphism, Node, TypedGraph


@dataclass(frozen=True)
class GluingViolation:
    """Why a rule cannot be applied at a match."""

    kind: str  # "dangling" or "identification"
    message: str
    node_ids: tuple[int, ...] = ()
    edge_ids: tuple[int, ...] = ()

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict = {}

    def add(self, x) -> None:
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def pushout(
    f: GraphMorphism, g: GraphMorphism
) -> tuple[TypedGraph, GraphMorphism, GraphMorphism]:
    """Pushout of the span ``B ←f− A −g→ C``.

    Returns ``(D, f*, g*)`` with ``f*: B → D`` and ``g*: C → D``.
    Elements glued from both sides take ``C``'s attribute terms — the
    right-hand operand is the one carrying updated values in every use
    of this construction.
    """
    if f.source != g.source:
        raise GraphError("pushout legs must share their source")
    b, c = f.target, g.target
    if b.type_graph != c.type_graph:
        raise GraphError("pushout requires a common type graph")

    nodes_uf, edges_uf = _UnionFind(), _UnionFind()
    for nid in b.node_ids:
        nodes_uf.add(("b", nid))
    for nid in c.node_ids:
        nodes_uf.add(("c", nid))
    for eid in b.edge_ids:
        edges_uf.add(("b", eid))
    for eid in c.edge_ids:
        edges_uf.add(("c", eid))
    for aid in f.source.node_ids:
        nodes_uf.union(("b", f.node_map[aid]), ("c", g.node_map[aid]))
    for aid in f.source.edge_ids:
        edges_uf.union(("b", f.edge_map[aid]), ("c", g.edge_map[aid]))

    def assign(uf: _UnionFind, b_ids, c_ids) -> dict:
        class_id: dict = {}
        for i in b_ids:
            root = uf.find(("b", i))
            if root not in class_id:
                class_id[root] = i
        fresh = max(b_ids, default=-1) + 1
        for i in c_ids:
            root = uf.find(("c", i))
            if root not in class_id:
                class_id[root] = fresh
                fresh += 1
        return class_id

    node_class = assign(nodes_uf, b.node_ids, c.node_ids)
    edge_class = assign(edges_uf, b.edge_ids, c.edge_ids)

    # Attribute terms: prefer the C-side member with the smallest id.
    node_winner: dict = {}
    for n in c.nodes:
        root = nodes_uf.find(("c", n.id))
        if root not in node_winner:
            node_winner[root] = n
    for n in b.nodes:
        root = nodes_uf.find(("b", n.id))
        node_winner.setdefault(root, n)

    def node_id_of(tag: str, nid: int) -> int:
        return node_class[nodes_uf.find((tag, nid))]

    d_nodes = []
    for root, winner in node_winner.items():
        d_nodes.append(Node(node_class[root], winner.type, winner.attrs))

    d_edges = []
    seen_edge_roots = set()
    for tag, graph in (("b", b), ("c", c)):
        for e in graph.edges:
            root = edges_uf.find((tag, e.id))
            if root in seen_edge_roots:
                continue
            seen_edge_roots.add(root)
            d_edges.append(
                Edge(
                    edge_class[root],
                    e.type,
                    node_id_of(tag, e.src),
                    node_id_of(tag, e.tgt),
                )
            )

    d = TypedGraph(b.type_graph, tuple(d_nodes), tuple(d_edges))
    f_star = GraphMorphism(
        b,
        d,
        tuple((i, node_id_of("b", i)) for i in b.node_ids),
        tuple((i, edge_class[edges_uf.find(("b", i))]) for i in b.edge_ids),
    )
    g_star = GraphMorphism(
        c,
        d,
        tuple((i, node_id_of("c", i)) for i in c.node_ids),
        tuple((i, edge_class[edges_uf.find(("c", i))]) for i in c.edge_ids),
    )
    return d, f_star, g_star


def check_gluing(
    l: GraphMorphism, match: GraphMorphism
) -> Optional[GluingViolation]:
    """Check the gluing condition for deleting ``match(L − l(K))`` from the host.

    ``l`` is the interface inclusion ``K → L`` and ``match`` embeds
    ``L`` into the host.  Returns ``None`` when the rule is applicable,
    otherwise the first violation in a deterministic scan order.
    """
    if l.target != match.source:
        raise GraphError("interface inclusion and match do not share L")
    host = match.target
    kept_nodes = set(l.node_map.values())
    kept_edges = set(l.edge_map.values())

    # Identification: distinct L elements sharing a host image must all
    # be interface elements.
    by_image: dict[int, list[int]] = {}
    for lid, hid in match.node_pairs:
        by_image.setdefault(hid, []).append(lid)
    for hid, lids in sorted(by_image.items()):
        if len(lids) > 1 and any(lid not in kept_nodes for lid in lids):
            return GluingViolation(
                "identification",
                f"nodes {sorted(lids)} share host node {hid} "
                "but not all of them are preserved",
                node_ids=tuple(sorted(lids)),
            )
    by_image = {}
    for lid, hid in match.edge_pairs:
        by_image.setdefault(hid, []).append(lid)
    for hid, lids in sorted(by_image.items()):
        if len(lids) > 1 and any(lid not in kept_edges for lid in lids):
            return GluingViolation(
                "identification",
                f"edges {sorted(lids)} share host edge {hid} "
                "but not all of them are preserved",
                edge_ids=tuple(sorted(lids)),
            )

    # Dangling: every host edge at a deleted node must itself be deleted.
    deleted_host_nodes = {
        match.node_map[lid]
        for lid in match.source.node_ids
        if lid not in kept_nodes
    }
    deleted_host_edges = {
        match.edge_map[lid]
        for lid in match.source.edge_ids
        if lid not in kept_edges
    }
    for hid in sorted(deleted_host_nodes):
        for e in host.incident_edges(hid):
            if e.id not in deleted_host_edges:
                return GluingViolation(
                    "dangling",
                    f"deleting node {hid} would leave edge {e.id} "
                    f"({e.type}) dangling",
                    node_ids=(hid,),
                    edge_ids=(e.id,),
                )
    return None


def pushout_complement(
    l: GraphMorphism, match: GraphMorphism
) -> Union[tuple[TypedGraph, GraphMorphism, GraphMorphism], GluingViolation]:
    """Remove the matched non-interface part of the host.

    Returns ``(D, k*, incl)`` where ``k*: K → D`` tracks the interface
    and ``incl: D → G`` is the inclusion, or a :class:`GluingViolation`
    when the deletion is not well-defined.  ``D`` keeps the host's ids.
    """
    violation = check_gluing(l, match)
    if violation is not None:
        return violation
    host = match.target
    kept_nodes = set(l.node_map.values())
    kept_edges = set(l.edge_map.values())
    drop_nodes = {
        match.node_map[lid]
        for lid in match.source.node_ids
        if lid not in kept_nodes
    }
    drop_edges = {
        match.edge_map[lid]
        for lid in match.source.edge_ids
        if lid not in kept_edges
    }
    d = TypedGraph(
        host.type_graph,
        tuple(n for n in host.nodes if n.id not in drop_nodes),
        tuple(e for e in host.edges if e.id not in drop_edges),
    )
    k_star = GraphMorphism(
        l.source,
        d,
        tuple((k, match.node_map[v]) for k, v in l.node_pairs),
        tuple((k, match.edge_map[v]) for k, v in l.edge_pairs),
    )
    incl = GraphMorphism(
        d,
        host,
        tuple((i, i) for i in d.node_ids),
        tuple((i, i) for i in d.edge_ids),
    )
    return d, k_star, incl
