"""Rules and grammars flattened into plain typed graphs.

The workbench sometimes needs to treat rules themselves as rewritable
data — most prominently when an advice, which rewrites rules, is turned
into an ordinary rule that rewrites rule *encodings*.  This module
provides that change of representation:

* :func:`encode_type_graph` widens a type graph with per-side copies of
  every type, so that the three sides of a rule can live next to each
  other in one graph.  Edges become nodes with explicit endpoint
  pointers, spans become edges between the interface copy and the two
  outer copies, and every rule gets a single identity node that ties its
  elements together.
* :func:`encode_rule` / :func:`encode_grammar` produce such graphs and
  remember where every piece came from.
* :func:`encode_advice` / :func:`encode_aogg` turn an aspect-oriented
  grammar into an ordinary one whose states are encoded grammars.
* :func:`decode_rule` / :func:`decode_grammar` invert the construction
  from the graph alone, complaining with :class:`MalformedEncoding`
  when the input does not have the expected shape.

Encoded type names are built with ``@`` and ``%``; input type graphs may
not use either character, which makes decoding unambiguous and keeps an
already-encoded graph from being encoded again by accident.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .aspects import (
    Advice,
    AspectedGrammar,
    IllFormedResult,
    retype_advice,
    retype_graph,
    widen_grammar,
)
from .engine import Grammar
from .graphs import (
    AttrDecl,
    Edge,
    EdgeType,
    GraphError,
    GraphMorphism,
    Node,
    NodeType,
    TypedGraph,
    TypeGraph,
)
from .rules import Rule, RuleError, validate_rule
from .terms import AttrTerm, Lit, Var

__all__ = [
    "SLOTS",
    "RULE_ID_TYPE",
    "EncodingError",
    "MalformedEncoding",
    "EncodedTypeGraph",
    "encode_type_graph",
    "base_type_graph",
    "RuleEncoding",
    "encode_rule",
    "Origin",
    "EncodingTrace",
    "encode_grammar",
    "AdviceEncoding",
    "advice_encoding",
    "encode_advice",
    "encode_aogg",
    "encode_aogg_with_trace",
    "extract_rule_component",
    "decode_rule",
    "decode_grammar",
]

#: The three sides of a rule, in the order their copies are laid out.
SLOTS = ("L", "K", "R")

#: Type of the per-rule identity node.  Its ``key`` attribute carries the
#: registry key of the encoded rule and ``name`` its name.
RULE_ID_TYPE = "%rule"


class EncodingError(GraphError):
    """The input cannot be encoded (e.g. reserved characters in names)."""


class MalformedEncoding(EncodingError):
    """A graph handed to a decoder does not have encoding shape."""


def slot_type(name: str, slot: str) -> str:
    """Name of the per-side copy of a type."""
    return f"{name}@{slot}"


def endpoint_type(name: str, slot: str, role: str) -> str:
    """Name of the src/tgt pointer type for an edge-as-node copy."""
    return f"{name}@{slot}%{role}"


def span_type(name: str, leg: str) -> str:
    """Name of the interface-to-outer-side edge type (``leg`` is l or r)."""
    return f"{name}@K%{leg}"


def identity_type(name: str, slot: str) -> str:
    """Name of the element-to-rule-identity edge type."""
    return f"{name}@{slot}%id"


def _is_mangled(name: str) -> bool:
    return "@" in name or "%" in name


@dataclass(frozen=True)
class EncodedTypeGraph:
    """A type graph together with its rule-encoding extension.

    ``combined`` contains every type of ``base`` unchanged (so start
    states remain typable) plus the copies described in the module
    docstring.
    """

    base: TypeGraph
    combined: TypeGraph


def encode_type_graph(tg: TypeGraph) -> EncodedTypeGraph:
    """Widen ``tg`` with the types needed to store rules over it."""
    for nt in tg.node_types:
        if _is_mangled(nt.name):
            raise EncodingError(f"node type {nt.name!r} uses a reserved character")
    for et in tg.edge_types:
        if _is_mangled(et.name):
            raise EncodingError(f"edge type {et.name!r} uses a reserved character")

    new_nodes: list[NodeType] = []
    new_edges: list[EdgeType] = []
    for slot in SLOTS:
        for nt in tg.node_types:
            new_nodes.append(NodeType(slot_type(nt.name, slot), nt.attrs))
        for et in tg.edge_types:
            new_nodes.append(NodeType(slot_type(et.name, slot)))
    new_nodes.append(
        NodeType(RULE_ID_TYPE, (AttrDecl("key", "string"), AttrDecl("name", "string")))
    )

    for slot in SLOTS:
        for et in tg.edge_types:
            new_edges.append(
                EdgeType(
                    endpoint_type(et.name, slot, "src"),
                    slot_type(et.name, slot),
                    slot_type(et.src, slot),
                )
            )
            new_edges.append(
                EdgeType(
                    endpoint_type(et.name, slot, "tgt"),
                    slot_type(et.name, slot),
                    slot_type(et.tgt, slot),
                )
            )
    all_names = [nt.name for nt in tg.node_types] + [et.name for et in tg.edge_types]
    for name in all_names:
        new_edges.append(EdgeType(span_type(name, "l"), slot_type(name, "K"), slot_type(name, "L")))
        new_edges.append(EdgeType(span_type(name, "r"), slot_type(name, "K"), slot_type(name, "R")))
    for slot in SLOTS:
        for name in all_names:
            new_edges.append(
                EdgeType(identity_type(name, slot), slot_type(name, slot), RULE_ID_TYPE)
            )

    return EncodedTypeGraph(tg, tg.extend(new_nodes, new_edges))


def base_type_graph(combined: TypeGraph) -> TypeGraph:
    """Strip the encoding types off a combined type graph."""
    return TypeGraph(
        tuple(nt for nt in combined.node_types if not _is_mangled(nt.name)),
        tuple(et for et in combined.edge_types if not _is_mangled(et.name)),
    )


@dataclass(frozen=True)
class RuleEncoding:
    """One rule as a graph, with maps back to the rule's elements.

    All four dictionaries are keyed on the *rule* side: ``element_nodes``
    by ``(slot, kind, element id)`` where kind is ``"node"`` or
    ``"edge"``; ``endpoint_edges`` by ``(slot, edge id, role)``;
    ``span_edges`` by ``(kind, interface id, leg)``; ``identity_edges``
    like ``element_nodes``.  Values are ids in :attr:`graph`.
    """

    rule: Rule
    key: str
    graph: TypedGraph
    rule_node: int
    element_nodes: dict[tuple[str, str, int], int]
    endpoint_edges: dict[tuple[str, int, str], int]
    span_edges: dict[tuple[str, int, str], int]
    identity_edges: dict[tuple[str, str, int], int]


def encode_rule(
    rule: Rule,
    etg: EncodedTypeGraph,
    *,
    key: Optional[str] = None,
    start_node: int = 0,
    start_edge: int = 0,
    key_term: Optional[AttrTerm] = None,
    name_term: Optional[AttrTerm] = None,
    interface_attrs: Optional[Mapping[tuple[int, str], AttrTerm]] = None,
) -> RuleEncoding:
    """Encode one rule as a typed graph over ``etg.combined``.

    ``start_node``/``start_edge`` offset the fresh ids so several
    encodings can share one host graph.  ``key_term``/``name_term``
    override the literals stored on the rule-identity node (used by the
    advice encoder, which needs them to be variables).
    ``interface_attrs`` overrides individual interface attribute terms by
    ``(node id, attr name)`` — again an advice-encoder hook.
    """
    if key is None:
        key = rule.name
    nodes: list[Node] = []
    edges: list[Edge] = []
    element_nodes: dict[tuple[str, str, int], int] = {}
    endpoint_edges: dict[tuple[str, int, str], int] = {}
    span_edges: dict[tuple[str, int, str], int] = {}
    identity_edges: dict[tuple[str, str, int], int] = {}
    origin_types: dict[tuple[str, str, int], str] = {}
    next_node = start_node
    next_edge = start_edge

    sides = (("L", rule.left), ("K", rule.interface), ("R", rule.right))
    for slot, graph in sides:
        for n in graph.nodes:
            attrs = n.attrs
            if slot == "K" and interface_attrs:
                attrs = tuple(
                    (a, interface_attrs.get((n.id, a), t)) for a, t in n.attrs
                )
            element_nodes[(slot, "node", n.id)] = next_node
            origin_types[(slot, "node", n.id)] = n.type
            nodes.append(Node(next_node, slot_type(n.type, slot), attrs))
            next_node += 1
        for e in graph.edges:
            element_nodes[(slot, "edge", e.id)] = next_node
            origin_types[(slot, "edge", e.id)] = e.type
            nodes.append(Node(next_node, slot_type(e.type, slot)))
            next_node += 1
        for e in graph.edges:
            carrier = element_nodes[(slot, "edge", e.id)]
            for role, end in (("src", e.src), ("tgt", e.tgt)):
                endpoint_edges[(slot, e.id, role)] = next_edge
                edges.append(
                    Edge(
                        next_edge,
                        endpoint_type(e.type, slot, role),
                        carrier,
                        element_nodes[(slot, "node", end)],
                    )
                )
                next_edge += 1

    for kind, ids, l_map, r_map in (
        ("node", rule.interface.node_ids, rule.l.node_map, rule.r.node_map),
        ("edge", rule.interface.edge_ids, rule.l.edge_map, rule.r.edge_map),
    ):
        for k_id in ids:
            k_enc = element_nodes[("K", kind, k_id)]
            tname = origin_types[("K", kind, k_id)]
            for leg, image in (("l", l_map[k_id]), ("r", r_map[k_id])):
                span_edges[(kind, k_id, leg)] = next_edge
                edges.append(
                    Edge(
                        next_edge,
                        span_type(tname, leg),
                        k_enc,
                        element_nodes[("L" if leg == "l" else "R", kind, image)],
                    )
                )
                next_edge += 1

    rule_node = next_node
    nodes.append(
        Node(
            rule_node,
            RULE_ID_TYPE,
            (
                ("key", key_term if key_term is not None else Lit(key)),
                ("name", name_term if name_term is not None else Lit(rule.name)),
            ),
        )
    )
    next_node += 1

    for ref, enc_id in element_nodes.items():
        slot, _kind, _elem = ref
        identity_edges[ref] = next_edge
        edges.append(
            Edge(next_edge, identity_type(origin_types[ref], slot), enc_id, rule_node)
        )
        next_edge += 1

    graph = TypedGraph(etg.combined, tuple(nodes), tuple(edges))
    return RuleEncoding(
        rule, key, graph, rule_node,
        element_nodes, endpoint_edges, span_edges, identity_edges,
    )


@dataclass(frozen=True)
class Origin:
    """Where an element of an encoded-grammar graph came from.

    ``role`` is ``"initial"`` for start-state elements carried over
    verbatim, ``"element"``/``"endpoint"``/``"span"``/``"identity"`` for
    the corresponding encoding pieces, and ``"rule-id"`` for identity
    nodes.  The remaining fields locate the piece inside its rule and
    are ``None`` where they do not apply.
    """

    rule_key: Optional[str]
    role: str
    slot: Optional[str] = None
    kind: Optional[str] = None
    element: Optional[int] = None
    detail: Optional[str] = None


@dataclass(frozen=True)
class EncodingTrace:
    """Reverse directory for a whole encoded grammar."""

    etg: EncodedTypeGraph
    encodings: tuple[RuleEncoding, ...]
    nodes: dict[int, Origin] = field(repr=False)
    edges: dict[int, Origin] = field(repr=False)

    def encoding(self, key: str) -> RuleEncoding:
        for enc in self.encodings:
            if enc.key == key:
                return enc
        raise KeyError(key)


def encode_grammar(
    grammar: Grammar, *, etg: Optional[EncodedTypeGraph] = None
) -> tuple[TypedGraph, EncodingTrace]:
    """Pack a grammar's start state and all its rules into one graph.

    The start state keeps its ids; rule encodings follow with fresh ids
    in registry order.  Returns the graph and the trace that says what
    every element encodes.
    """
    if etg is None:
        etg = encode_type_graph(grammar.type_graph)
    nodes: dict[int, Origin] = {}
    edges: dict[int, Origin] = {}
    host = retype_graph(grammar.initial, etg.combined)
    for n in host.nodes:
        nodes[n.id] = Origin(None, "initial")
    for e in host.edges:
        edges[e.id] = Origin(None, "initial")

    all_nodes = list(host.nodes)
    all_edges = list(host.edges)
    encodings: list[RuleEncoding] = []
    next_node = host.next_node_id()
    next_edge = host.next_edge_id()
    for rule_key, rule in grammar.rules:
        enc = encode_rule(
            rule, etg, key=rule_key, start_node=next_node, start_edge=next_edge
        )
        all_nodes.extend(enc.graph.nodes)
        all_edges.extend(enc.graph.edges)
        next_node = enc.graph.next_node_id()
        next_edge = enc.graph.next_edge_id()
        encodings.append(enc)
        nodes[enc.rule_node] = Origin(rule_key, "rule-id")
        for (slot, kind, elem), nid in enc.element_nodes.items():
            nodes[nid] = Origin(rule_key, "element", slot, kind, elem)
        for (slot, elem, role), eid in enc.endpoint_edges.items():
            edges[eid] = Origin(rule_key, "endpoint", slot, "edge", elem, role)
        for (kind, elem, leg), eid in enc.span_edges.items():
            edges[eid] = Origin(rule_key, "span", "K", kind, elem, leg)
        for (slot, kind, elem), eid in enc.identity_edges.items():
            edges[eid] = Origin(rule_key, "identity", slot, kind, elem)

    graph = TypedGraph(etg.combined, tuple(all_nodes), tuple(all_edges))
    return graph, EncodingTrace(etg, tuple(encodings), nodes, edges)


@dataclass(frozen=True)
class AdviceEncoding:
    """An advice encoded as a rule, with the three component encodings."""

    advice: Advice
    rule: Rule
    pointcut: RuleEncoding
    interface: RuleEncoding
    effect: RuleEncoding


def advice_encoding(advice: Advice, etg: EncodedTypeGraph) -> AdviceEncoding:
    """Encode an advice as a rule over encoded rules.

    The resulting rule's left side is the encoded pointcut, so matching
    it in an encoded grammar is matching the pointcut against the stored
    rules.  Three wrinkles keep that faithful:

    * the identity node's key and name become shared variables, so any
      rule matches and its name flows through to ``rulename()`` uses;
    * interface attribute slots become wildcard variables — the
      pointcut's own interface terms are placeholders and must not
      constrain the subject rule's placeholders;
    * each wildcard is *the same* variable on the pointcut and effect
      side wherever the advice preserves the slot, so the encoded rule
      provably leaves those attributes alone.
    """
    key_term = Var("~rkey")
    name_term = Var("~rname")
    fresh = itertools.count()
    p_over: dict[tuple[int, str], AttrTerm] = {}
    e_over: dict[tuple[int, str], AttrTerm] = {}
    for k_node in advice.interface.interface.nodes:
        p_id = advice.to_pointcut.interface.map_node(k_node.id)
        e_id = advice.to_effect.interface.map_node(k_node.id)
        for attr, _term in k_node.attrs:
            wild = Var(f"~s{next(fresh)}")
            p_over[(p_id, attr)] = wild
            e_over[(e_id, attr)] = wild
    for p_node in advice.pointcut.interface.nodes:
        for attr, _term in p_node.attrs:
            p_over.setdefault((p_node.id, attr), Var(f"~s{next(fresh)}"))

    common = dict(etg=etg, key_term=key_term, name_term=name_term)
    enc_p = encode_rule(advice.pointcut, interface_attrs=p_over, **common)
    enc_i = encode_rule(advice.interface, **common)
    enc_e = encode_rule(advice.effect, interface_attrs=e_over, **common)

    legs = []
    for outer, morphism in (
        (enc_p, advice.to_pointcut),
        (enc_e, advice.to_effect),
    ):
        comps = {
            "L": morphism.left,
            "K": morphism.interface,
            "R": morphism.right,
        }
        node_pairs = [(enc_i.rule_node, outer.rule_node)]
        for (slot, kind, elem), nid in enc_i.element_nodes.items():
            comp = comps[slot]
            image = comp.map_node(elem) if kind == "node" else comp.map_edge(elem)
            node_pairs.append((nid, outer.element_nodes[(slot, kind, image)]))
        edge_pairs = []
        for (slot, elem, role), eid in enc_i.endpoint_edges.items():
            image = comps[slot].map_edge(elem)
            edge_pairs.append((eid, outer.endpoint_edges[(slot, image, role)]))
        for (kind, elem, leg), eid in enc_i.span_edges.items():
            comp = comps["K"]
            image = comp.map_node(elem) if kind == "node" else comp.map_edge(elem)
            edge_pairs.append((eid, outer.span_edges[(kind, image, leg)]))
        for (slot, kind, elem), eid in enc_i.identity_edges.items():
            comp = comps[slot]
            image = comp.map_node(elem) if kind == "node" else comp.map_edge(elem)
            edge_pairs.append((eid, outer.identity_edges[(slot, kind, image)]))
        legs.append(
            GraphMorphism(enc_i.graph, outer.graph, tuple(node_pairs), tuple(edge_pairs))
        )

    rule = Rule(advice.name, enc_p.graph, enc_i.graph, enc_e.graph, legs[0], legs[1])
    return AdviceEncoding(advice, rule, enc_p, enc_i, enc_e)


def encode_advice(advice: Advice, etg: EncodedTypeGraph) -> Union[Rule, IllFormedResult]:
    """Encode ``advice`` as a rule, or report why that is impossible."""
    try:
        enc = advice_encoding(advice, etg)
        validate_rule(enc.rule, symbolic=True)
    except (RuleError, GraphError) as err:
        return IllFormedResult(str(err))
    return enc.rule


def encode_aogg_with_trace(
    aogg: AspectedGrammar,
) -> tuple[Grammar, EncodingTrace]:
    """Like :func:`encode_aogg`, also returning the element directory."""
    widened = aogg.base
    for aspect in aogg.aspects:
        widened = widen_grammar(widened, aspect)
    etg = encode_type_graph(widened.type_graph)
    big, trace = encode_grammar(widened, etg=etg)
    encoded: list[tuple[str, Rule]] = []
    for aspect in aogg.aspects:
        for advice in aspect.advices:
            adv = retype_advice(advice, widened.type_graph)
            rule = encode_advice(adv, etg)
            if isinstance(rule, IllFormedResult):
                raise EncodingError(
                    f"advice {aspect.name}.{advice.name} cannot be encoded: {rule.reason}"
                )
            encoded.append((f"{aspect.name}.{advice.name}", rule))
    return Grammar(etg.combined, big, tuple(encoded)), trace


def encode_aogg(aogg: AspectedGrammar) -> Grammar:
    """Turn an aspect-oriented grammar into an ordinary one.

    The start state is the base grammar — widened by every aspect's type
    and start-state extensions — encoded as a single graph; the rules
    are the encoded advices, keyed ``aspect.advice``.  Running this
    grammar rewrites stored rules exactly as weaving would.
    """
    grammar, _trace = encode_aogg_with_trace(aogg)
    return grammar


def extract_rule_component(graph: TypedGraph, rule_node: int) -> TypedGraph:
    """The sub-graph reachable from ``rule_node`` ignoring direction."""
    adjacency: dict[int, set[int]] = {}
    for e in graph.edges:
        adjacency.setdefault(e.src, set()).add(e.tgt)
        adjacency.setdefault(e.tgt, set()).add(e.src)
    seen = {rule_node}
    frontier = [rule_node]
    while frontier:
        current = frontier.pop()
        for other in adjacency.get(current, ()):
            if other not in seen:
                seen.add(other)
                frontier.append(other)
    return TypedGraph(
        graph.type_graph,
        tuple(n for n in graph.nodes if n.id in seen),
        tuple(e for e in graph.edges if e.src in seen and e.tgt in seen),
    )


def _origin_slot(type_name: str) -> tuple[str, str]:
    base, sep, slot = type_name.rpartition("@")
    if not sep or slot not in SLOTS or _is_mangled(base):
        raise MalformedEncoding(f"type {type_name!r} is not an element encoding")
    return base, slot


def decode_rule(enc: TypedGraph, *, type_graph: Optional[TypeGraph] = None) -> Rule:
    """Read one rule back out of its encoding.

    ``enc`` must contain exactly one rule-identity node and nothing from
    outside that rule's encoding.  The decoded sides reuse the encoded
    node ids, so decoding after an in-place rewrite of the encoding
    keeps stable identities for preserved elements.
    """
    tg = type_graph if type_graph is not None else base_type_graph(enc.type_graph)
    id_nodes = [n for n in enc.nodes if n.type == RULE_ID_TYPE]
    if len(id_nodes) != 1:
        raise MalformedEncoding(
            f"expected exactly one rule-identity node, found {len(id_nodes)}"
        )
    identity = id_nodes[0]
    name_term = identity.attr_map.get("name")
    if not isinstance(name_term, Lit) or not isinstance(name_term.value, str):
        raise MalformedEncoding("rule-identity node carries no literal name")

    kinds: dict[int, tuple[str, str, str]] = {}  # node id -> (kind, base type, slot)
    for n in enc.nodes:
        if n.id == identity.id:
            continue
        base, slot = _origin_slot(n.type)
        if base in tg.node_type_map:
            kinds[n.id] = ("node", base, slot)
        elif base in tg.edge_type_map:
            kinds[n.id] = ("edge", base, slot)
        else:
            raise MalformedEncoding(f"node {n.id} encodes unknown type {base!r}")

    src_of: dict[int, int] = {}
    tgt_of: dict[int, int] = {}
    span_l: dict[int, int] = {}
    span_r: dict[int, int] = {}
    linked: dict[int, int] = {}
    pointer = {"src": src_of, "tgt": tgt_of, "l": span_l, "r": span_r}
    for e in enc.edges:
        _base, sep, suffix = e.type.rpartition("%")
        if not sep:
            raise MalformedEncoding(f"edge {e.id} has non-encoding type {e.type!r}")
        if suffix == "id":
            linked[e.src] = linked.get(e.src, 0) + 1
        elif suffix in pointer:
            if e.src in pointer[suffix]:
                raise MalformedEncoding(
                    f"node {e.src} has two {suffix!r} pointers"
                )
            pointer[suffix][e.src] = e.tgt
        else:
            raise MalformedEncoding(f"edge {e.id} has non-encoding type {e.type!r}")

    for nid in kinds:
        if linked.get(nid, 0) != 1:
            raise MalformedEncoding(
                f"element node {nid} must link to the rule-identity node exactly once"
            )

    sides: dict[str, tuple[list[Node], list[Edge]]] = {s: ([], []) for s in SLOTS}
    for n in enc.nodes:
        if n.id == identity.id:
            continue
        kind, base, slot = kinds[n.id]
        side_nodes, side_edges = sides[slot]
        if kind == "node":
            side_nodes.append(Node(n.id, base, n.attrs))
        else:
            if n.id not in src_of or n.id not in tgt_of:
                raise MalformedEncoding(f"edge encoding {n.id} lacks endpoint pointers")
            side_edges.append(Edge(n.id, base, src_of[n.id], tgt_of[n.id]))

    try:
        graphs = {
            slot: TypedGraph(tg, tuple(ns), tuple(es))
            for slot, (ns, es) in sides.items()
        }
    except GraphError as err:
        raise MalformedEncoding(f"decoded side is not a valid graph: {err}") from err

    node_pairs: dict[str, list[tuple[int, int]]] = {"l": [], "r": []}
    edge_pairs: dict[str, list[tuple[int, int]]] = {"l": [], "r": []}
    for n in graphs["K"].nodes:
        for leg, spans in (("l", span_l), ("r", span_r)):
            if n.id not in spans:
                raise MalformedEncoding(
                    f"interface element {n.id} has no {leg!r}-side counterpart"
                )
            node_pairs[leg].append((n.id, spans[n.id]))
    for e in graphs["K"].edges:
        for leg, spans in (("l", span_l), ("r", span_r)):
            if e.id not in spans:
                raise MalformedEncoding(
                    f"interface element {e.id} has no {leg!r}-side counterpart"
                )
            edge_pairs[leg].append((e.id, spans[e.id]))

    try:
        rule = Rule(
            name_term.value,
            graphs["L"],
            graphs["K"],
            graphs["R"],
            GraphMorphism(
                graphs["K"], graphs["L"],
                tuple(node_pairs["l"]), tuple(edge_pairs["l"]),
            ),
            GraphMorphism(
                graphs["K"], graphs["R"],
                tuple(node_pairs["r"]), tuple(edge_pairs["r"]),
            ),
        )
        validate_rule(rule, symbolic=True)
    except (RuleError, GraphError) as err:
        raise MalformedEncoding(f"decoded spans do not form a rule: {err}") from err
    return rule


def decode_grammar(enc: TypedGraph, *, type_graph: Optional[TypeGraph] = None) -> Grammar:
    """Split an encoded grammar back into start state and rules.

    Rules are recovered in identity-node id order; whatever is connected
    to no identity node is the start state and must use base types only.
    """
    tg = type_graph if type_graph is not None else base_type_graph(enc.type_graph)
    rule_nodes = sorted(n.id for n in enc.nodes if n.type == RULE_ID_TYPE)
    claimed_nodes: set[int] = set()
    claimed_edges: set[int] = set()
    rules: list[tuple[str, Rule]] = []
    for rid in rule_nodes:
        component = extract_rule_component(enc, rid)
        ids = set(component.node_ids)
        if ids & claimed_nodes:
            raise MalformedEncoding("rule encodings share elements")
        key_term = component.node(rid).attr_map.get("key")
        if not isinstance(key_term, Lit) or not isinstance(key_term.value, str):
            raise MalformedEncoding("rule-identity node carries no literal key")
        rules.append((key_term.value, decode_rule(component, type_graph=tg)))
        claimed_nodes |= ids
        claimed_edges |= set(component.edge_ids)

    rest_nodes = []
    for n in enc.nodes:
        if n.id in claimed_nodes:
            continue
        if _is_mangled(n.type):
            raise MalformedEncoding(
                f"encoding element {n.id} is attached to no rule-identity node"
            )
        rest_nodes.append(n)
    rest_edges = [e for e in enc.edges if e.id not in claimed_edges]
    try:
        initial = TypedGraph(tg, tuple(rest_nodes), tuple(rest_edges))
        return Grammar(tg, initial, tuple(rules))
    except GraphError as err:
        raise MalformedEncoding(f"left-over elements are not a start state: {err}") from err
