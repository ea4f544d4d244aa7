"""Aspects: crosscutting extensions woven into a grammar's rules.

An advice is itself a span of rules — a pointcut to look for, an effect
to put in its place, and an interface rule shared by both.  Matching an
advice against a rule is rule-into-rule matching (componentwise, term
patterns included); applying it runs the same two-step construction as
ordinary rewriting, once per component, and then re-induces the span of
the woven rule.

An aspect packages advices with the extra types and start-state
elements they need.  Weaving an aspect over a grammar replaces every
rule some advice matches by all of its one-step weaving results and
keeps the others untouched; the semantics of a grammar with several
aspects is the left fold of that operation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .engine import Grammar
from .graphs import (
    Edge,
    EdgeType,
    GraphError,
    GraphMorphism,
    Node,
    NodeType,
    TypeGraph,
    TypedGraph,
)
from .homs import enumerate_homomorphisms
from .pushouts import GluingViolation, pushout, pushout_complement
from .rules import Rule, validate_rule
from .terms import (
    AttrTerm,
    Concat,
    Lit,
    RuleName,
    Var,
    match_term,
    rename_vars,
    substitute,
    vars_of_terms,
)


class WeaveError(Exception):
    """Weaving could not produce a well-formed grammar."""


@dataclass(frozen=True)
class IllFormedResult:
    """An advice application that failed to yield a valid rule."""

    reason: str


@dataclass(frozen=True)
class RuleMorphism:
    """A componentwise graph morphism between rules, commuting with spans."""

    source: Rule
    target: Rule
    left: GraphMorphism
    interface: GraphMorphism
    right: GraphMorphism

    def __post_init__(self) -> None:
        if (
            self.left.source != self.source.left
            or self.interface.source != self.source.interface
            or self.right.source != self.source.right
        ):
            raise GraphError("rule morphism components must start at the source rule")
        if (
            self.left.target != self.target.left
            or self.interface.target != self.target.interface
            or self.right.target != self.target.right
        ):
            raise GraphError("rule morphism components must end at the target rule")
        _require_square(self.source.l, self.left, self.interface, self.target.l, "l")
        _require_square(self.source.r, self.right, self.interface, self.target.r, "r")

    def is_injective(self) -> bool:
        return (
            self.left.is_injective()
            and self.interface.is_injective()
            and self.right.is_injective()
        )


def _require_square(
    span_src: GraphMorphism,
    outer: GraphMorphism,
    inner: GraphMorphism,
    span_tgt: GraphMorphism,
    which: str,
) -> None:
    for kid in span_src.source.node_ids:
        if outer.node_map[span_src.node_map[kid]] != span_tgt.node_map[inner.node_map[kid]]:
            raise GraphError(f"rule morphism does not commute with the {which} leg")
    for kid in span_src.source.edge_ids:
        if outer.edge_map[span_src.edge_map[kid]] != span_tgt.edge_map[inner.edge_map[kid]]:
            raise GraphError(f"rule morphism does not commute with the {which} leg")


@dataclass(frozen=True)
class Advice:
    """A named span of rules: pointcut ← interface → effect."""

    name: str
    pointcut: Rule
    interface: Rule
    effect: Rule
    to_pointcut: RuleMorphism
    to_effect: RuleMorphism

    def __post_init__(self) -> None:
        if self.to_pointcut.source != self.interface or self.to_pointcut.target != self.pointcut:
            raise GraphError(f"advice {self.name!r}: bad pointcut leg")
        if self.to_effect.source != self.interface or self.to_effect.target != self.effect:
            raise GraphError(f"advice {self.name!r}: bad effect leg")
        if not (self.to_pointcut.is_injective() and self.to_effect.is_injective()):
            raise GraphError(f"advice {self.name!r}: span legs must be injective")


def make_advice(
    name: str,
    pointcut: Rule,
    effect: Rule,
    shared_nodes: dict[str, Iterable[tuple[int, int]]],
    shared_edges: Optional[dict[str, Iterable[tuple[int, int]]]] = None,
) -> Advice:
    """Assemble an advice from its outer rules plus overlap tables.

    ``shared_nodes``/``shared_edges`` map each component (``"left"``,
    ``"interface"``, ``"right"``) to pairs ``(pointcut_id, effect_id)``
    of elements the two rules have in common.  The interface rule is cut
    out of the pointcut along those pairs, keeping pointcut ids.
    """
    shared_edges = shared_edges or {}

    def component(which: str) -> tuple[TypedGraph, TypedGraph, dict, dict]:
        p_graph = getattr(pointcut, which)
        node_pairs = tuple(shared_nodes.get(which, ()))
        edge_pairs = tuple(shared_edges.get(which, ()))
        keep_nodes = {p for p, _ in node_pairs}
        keep_edges = {p for p, _ in edge_pairs}
        cut = TypedGraph(
            p_graph.type_graph,
            tuple(n for n in p_graph.nodes if n.id in keep_nodes),
            tuple(e for e in p_graph.edges if e.id in keep_edges),
        )
        return cut, p_graph, dict(node_pairs), dict(edge_pairs)

    cut_l, _, map_l_n, map_l_e = component("left")
    cut_k, _, map_k_n, map_k_e = component("interface")
    cut_r, _, map_r_n, map_r_e = component("right")

    def restrict(m: GraphMorphism, src: TypedGraph, tgt: TypedGraph) -> GraphMorphism:
        return GraphMorphism(
            src,
            tgt,
            tuple((i, m.node_map[i]) for i in src.node_ids),
            tuple((i, m.edge_map[i]) for i in src.edge_ids),
        )

    i_rule = Rule(
        name + ".interface",
        cut_l,
        cut_k,
        cut_r,
        restrict(pointcut.l, cut_k, cut_l),
        restrict(pointcut.r, cut_k, cut_r),
    )

    def inclusion(src: TypedGraph, tgt: TypedGraph) -> GraphMorphism:
        return GraphMorphism(
            src,
            tgt,
            tuple((i, i) for i in src.node_ids),
            tuple((i, i) for i in src.edge_ids),
        )

    def across(src: TypedGraph, tgt: TypedGraph, nmap: dict, emap: dict) -> GraphMorphism:
        return GraphMorphism(
            src,
            tgt,
            tuple((i, nmap[i]) for i in src.node_ids),
            tuple((i, emap[i]) for i in src.edge_ids),
        )

    to_pointcut = RuleMorphism(
        i_rule,
        pointcut,
        inclusion(cut_l, pointcut.left),
        inclusion(cut_k, pointcut.interface),
        inclusion(cut_r, pointcut.right),
    )
    to_effect = RuleMorphism(
        i_rule,
        effect,
        across(cut_l, effect.left, map_l_n, map_l_e),
        across(cut_k, effect.interface, map_k_n, map_k_e),
        across(cut_r, effect.right, map_r_n, map_r_e),
    )
    return Advice(name, pointcut, i_rule, effect, to_pointcut, to_effect)


@dataclass(frozen=True)
class TypeDelta:
    """Node and edge types an aspect adds to the grammar's type graph."""

    node_types: tuple[NodeType, ...] = ()
    edge_types: tuple[EdgeType, ...] = ()


@dataclass(frozen=True)
class GraphDelta:
    """Elements an aspect adds to the start state.

    Delta ids must not collide with the base state's ids; edge endpoints
    may reference base nodes or delta nodes.  When a later weave has
    already taken an id, the delta element is renumbered on the fly.
    """

    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()


@dataclass(frozen=True)
class Aspect:
    name: str
    advices: tuple[Advice, ...]
    type_delta: TypeDelta = field(default_factory=TypeDelta)
    graph_delta: GraphDelta = field(default_factory=GraphDelta)


@dataclass(frozen=True)
class AspectedGrammar:
    """A base grammar plus the aspects to weave over it, in order.

    ``config`` carries workbench settings from the source document
    (``seed``, ``max_steps``); the algebra below never looks at it.
    """

    base: Grammar
    aspects: tuple[Aspect, ...]
    config: tuple[tuple[str, int], ...] = ()

    @property
    def config_map(self) -> dict[str, int]:
        return dict(self.config)


# ---------------------------------------------------------------------------
# retyping over an extended type graph


def retype_graph(graph: TypedGraph, tg: TypeGraph) -> TypedGraph:
    return TypedGraph(tg, graph.nodes, graph.edges)


def retype_rule(rule: Rule, tg: TypeGraph) -> Rule:
    left = retype_graph(rule.left, tg)
    interface = retype_graph(rule.interface, tg)
    right = retype_graph(rule.right, tg)
    return Rule(
        rule.name,
        left,
        interface,
        right,
        GraphMorphism(interface, left, rule.l.node_pairs, rule.l.edge_pairs),
        GraphMorphism(interface, right, rule.r.node_pairs, rule.r.edge_pairs),
    )


def _retype_rule_morphism(rm: RuleMorphism, src: Rule, tgt: Rule) -> RuleMorphism:
    return RuleMorphism(
        src,
        tgt,
        GraphMorphism(src.left, tgt.left, rm.left.node_pairs, rm.left.edge_pairs),
        GraphMorphism(
            src.interface, tgt.interface, rm.interface.node_pairs, rm.interface.edge_pairs
        ),
        GraphMorphism(src.right, tgt.right, rm.right.node_pairs, rm.right.edge_pairs),
    )


def retype_advice(advice: Advice, tg: TypeGraph) -> Advice:
    p = retype_rule(advice.pointcut, tg)
    i = retype_rule(advice.interface, tg)
    e = retype_rule(advice.effect, tg)
    return Advice(
        advice.name,
        p,
        i,
        e,
        _retype_rule_morphism(advice.to_pointcut, i, p),
        _retype_rule_morphism(advice.to_effect, i, e),
    )


# ---------------------------------------------------------------------------
# advice matching


def find_advice_matches(advice: Advice, rule: Rule) -> list[RuleMorphism]:
    """All injective occurrences of the pointcut inside ``rule``.

    The left components are enumerated; the interface component is then
    forced (both spans are injective), and the right components are
    enumerated under the binding the left match established.  Attribute
    terms on the interface carry no information and are skipped.
    """
    p = advice.pointcut
    out: list[RuleMorphism] = []
    inv_l_nodes = {v: k for k, v in rule.l.node_pairs}
    inv_l_edges = {v: k for k, v in rule.l.edge_pairs}

    for hom_l in enumerate_homomorphisms(
        p.left, rule.left, injective_only=True, attrs="match"
    ):
        theta = hom_l.binding_map
        k_nodes = []
        k_edges = []
        ok = True
        for kid in p.interface.node_ids:
            image = inv_l_nodes.get(hom_l.morphism.node_map[p.l.node_map[kid]])
            if image is None:
                ok = False
                break
            k_nodes.append((kid, image))
        if ok:
            for kid in p.interface.edge_ids:
                image = inv_l_edges.get(hom_l.morphism.edge_map[p.l.edge_map[kid]])
                if image is None:
                    ok = False
                    break
                k_edges.append((kid, image))
        if not ok:
            continue
        hom_k = GraphMorphism(
            p.interface, rule.interface, tuple(k_nodes), tuple(k_edges)
        )
        for hom_r in enumerate_homomorphisms(
            p.right,
            rule.right,
            injective_only=True,
            attrs="match",
            seed_binding=theta,
        ):
            if all(
                hom_r.morphism.node_map[p.r.node_map[kid]]
                == rule.r.node_map[hom_k.node_map[kid]]
                for kid in p.interface.node_ids
            ) and all(
                hom_r.morphism.edge_map[p.r.edge_map[kid]]
                == rule.r.edge_map[hom_k.edge_map[kid]]
                for kid in p.interface.edge_ids
            ):
                out.append(
                    RuleMorphism(p, rule, hom_l.morphism, hom_k, hom_r.morphism)
                )
    return out


def advice_binding(rm: RuleMorphism) -> dict[str, AttrTerm]:
    """The variable binding a pointcut match induces, recomputed.

    Left and right components contribute; the synthesised interface
    terms do not.
    """
    theta: dict[str, AttrTerm] = {}
    for component, mapping in (("left", rm.left), ("right", rm.right)):
        src = getattr(rm.source, component)
        tgt = getattr(rm.target, component)
        for node in src.nodes:
            image = tgt.node(mapping.node_map[node.id])
            for attr, term in node.attrs:
                if not match_term(term, image.attr(attr), theta):
                    raise WeaveError(
                        f"pointcut terms do not match the rule at node "
                        f"{node.id}.{attr}"
                    )
    return theta


# ---------------------------------------------------------------------------
# advice application


def apply_advice(advice: Advice, rm: RuleMorphism) -> Union[Rule, IllFormedResult]:
    """Weave one advice occurrence into the matched rule.

    Componentwise: remove what is only in the pointcut, glue in the
    instantiated effect, then re-induce the span of the result.  Any
    failure along the way — a gluing violation, a span that no longer
    commutes, a result that fails validation — comes back as an
    :class:`IllFormedResult` rather than a half-woven rule.
    """
    rule = rm.target
    theta = advice_binding(rm)

    # Variables private to the effect must not capture the rule's own.
    pointcut_vars = _rule_vars(advice.pointcut)
    effect_vars = _rule_vars(advice.effect)
    rule_vars = _rule_vars(rule)
    renaming: dict[str, str] = {}
    taken = rule_vars | effect_vars | pointcut_vars
    for name in sorted((effect_vars - pointcut_vars) & rule_vars):
        k = 1
        while f"{name}_{k}" in taken:
            k += 1
        renaming[name] = f"{name}_{k}"
        taken.add(f"{name}_{k}")

    def instantiate(graph: TypedGraph) -> TypedGraph:
        nodes = []
        for node in graph.nodes:
            attrs = {
                attr: substitute(rename_vars(term, renaming), theta)
                for attr, term in node.attrs
            }
            nodes.append(node.with_attrs(attrs))
        return TypedGraph(graph.type_graph, tuple(nodes), graph.edges)

    eff_l = instantiate(advice.effect.left)
    eff_k = instantiate(advice.effect.interface)
    eff_r = instantiate(advice.effect.right)

    def weave_component(
        which: str, eff: TypedGraph
    ) -> Union[tuple[TypedGraph, GraphMorphism, GraphMorphism], IllFormedResult]:
        leg = getattr(advice.to_pointcut, which)
        match = getattr(rm, which)
        outcome = pushout_complement(leg, match)
        if isinstance(outcome, GluingViolation):
            return IllFormedResult(
                f"{which} component cannot drop the pointcut-only part: {outcome}"
            )
        context, keep, _ = outcome
        eff_leg_src = getattr(advice.to_effect, which)
        eff_leg = GraphMorphism(
            keep.source, eff, eff_leg_src.node_pairs, eff_leg_src.edge_pairs
        )
        woven, from_context, from_effect = pushout(keep, eff_leg)
        return woven, from_context, from_effect

    out_l = weave_component("left", eff_l)
    if isinstance(out_l, IllFormedResult):
        return out_l
    out_k = weave_component("interface", eff_k)
    if isinstance(out_k, IllFormedResult):
        return out_k
    out_r = weave_component("right", eff_r)
    if isinstance(out_r, IllFormedResult):
        return out_r
    w_l, ctx_to_l, eff_to_l = out_l
    w_k, ctx_to_k, eff_to_k = out_k
    w_r, ctx_to_r, eff_to_r = out_r

    def induce_leg(
        side_graph: TypedGraph,
        rule_leg: GraphMorphism,
        eff_leg: GraphMorphism,
        ctx_side: GraphMorphism,
        eff_side: GraphMorphism,
    ) -> Union[tuple[tuple, tuple], IllFormedResult]:
        node_map: dict[int, int] = {}
        edge_map: dict[int, int] = {}

        def put(table: dict, key: int, value: int) -> bool:
            if table.setdefault(key, value) != value:
                return False
            return True

        # Route through the rule's own span (context part).
        for kid in ctx_to_k.source.node_ids:
            target = rule_leg.node_map[kid]
            if target not in ctx_side.node_map:
                return IllFormedResult(
                    "an interface element's image was removed from the "
                    f"{'left' if side_graph is w_l else 'right'} side"
                )
            if not put(node_map, ctx_to_k.node_map[kid], ctx_side.node_map[target]):
                return IllFormedResult("woven span is inconsistent")
        for kid in ctx_to_k.source.edge_ids:
            target = rule_leg.edge_map[kid]
            if target not in ctx_side.edge_map:
                return IllFormedResult(
                    "an interface edge's image was removed from a side"
                )
            if not put(edge_map, ctx_to_k.edge_map[kid], ctx_side.edge_map[target]):
                return IllFormedResult("woven span is inconsistent")
        # Route through the effect's span.
        for kid in eff_leg.source.node_ids:
            if not put(
                node_map,
                eff_to_k.node_map[kid],
                eff_side.node_map[eff_leg.node_map[kid]],
            ):
                return IllFormedResult("woven span is inconsistent")
        for kid in eff_leg.source.edge_ids:
            if not put(
                edge_map,
                eff_to_k.edge_map[kid],
                eff_side.edge_map[eff_leg.edge_map[kid]],
            ):
                return IllFormedResult("woven span is inconsistent")
        if set(node_map) != set(w_k.node_ids) or set(edge_map) != set(w_k.edge_ids):
            return IllFormedResult("woven span is not total on the interface")
        return tuple(sorted(node_map.items())), tuple(sorted(edge_map.items()))

    leg_l = induce_leg(w_l, rule.l, advice.effect.l, ctx_to_l, eff_to_l)
    if isinstance(leg_l, IllFormedResult):
        return leg_l
    leg_r = induce_leg(w_r, rule.r, advice.effect.r, ctx_to_r, eff_to_r)
    if isinstance(leg_r, IllFormedResult):
        return leg_r

    # Re-synthesise interface terms from the left side so the woven rule
    # obeys the same interface conventions as a freshly built one.
    l_nodes_by_id = w_l.node_map
    norm_nodes = []
    node_leg_l = dict(leg_l[0])
    for node in w_k.nodes:
        image = l_nodes_by_id[node_leg_l[node.id]]
        attrs = tuple(
            (attr, term if isinstance(term, Var) else Var(f"~k{node.id}.{attr}"))
            for attr, term in image.attrs
        )
        norm_nodes.append(Node(node.id, node.type, attrs))
    w_k_norm = TypedGraph(w_k.type_graph, tuple(norm_nodes), w_k.edges)

    try:
        woven = Rule(
            rule.name,
            w_l,
            w_k_norm,
            w_r,
            GraphMorphism(w_k_norm, w_l, leg_l[0], leg_l[1]),
            GraphMorphism(w_k_norm, w_r, leg_r[0], leg_r[1]),
        )
        validate_rule(woven)
    except GraphError as exc:
        return IllFormedResult(f"woven rule failed validation: {exc}")
    return woven


def _rule_vars(rule: Rule) -> set[str]:
    return vars_of_terms(
        term
        for graph in (rule.left, rule.right)
        for node in graph.nodes
        for _, term in node.attrs
    )


# ---------------------------------------------------------------------------
# weaving


def widen_grammar(grammar: Grammar, aspect: Aspect) -> Grammar:
    """Apply an aspect's type and start-graph extensions only.

    The rules are carried over unchanged (retyped onto the wider type
    graph) — this is the structural half of weaving, shared with the
    grammar encoder.
    """
    tg = grammar.type_graph.extend(
        aspect.type_delta.node_types, aspect.type_delta.edge_types
    )
    initial = _extend_initial(grammar.initial, aspect.graph_delta, tg)
    rules = tuple((key, retype_rule(rule, tg)) for key, rule in grammar.rules)
    return Grammar(tg, initial, rules)


def weave_aspect(grammar: Grammar, aspect: Aspect) -> Grammar:
    """One aspect pass over every rule of the grammar.

    Rules nothing matches are kept as they are; a matched rule is
    replaced by one woven rule per advice occurrence.  Woven registry
    keys record the origin: ``key@advice#index``.
    """
    widened = widen_grammar(grammar, aspect)
    tg = widened.type_graph
    initial = widened.initial
    advices = [retype_advice(a, tg) for a in aspect.advices]
    entries: list[tuple[str, Rule]] = []
    for key, retyped in widened.rules:
        replacements: list[tuple[str, Rule]] = []
        for advice in advices:
            for index, rm in enumerate(find_advice_matches(advice, retyped)):
                outcome = apply_advice(advice, rm)
                if isinstance(outcome, IllFormedResult):
                    raise WeaveError(
                        f"advice {advice.name!r} on rule {key!r}: {outcome.reason}"
                    )
                replacements.append((f"{key}@{advice.name}#{index}", outcome))
        entries.extend(replacements if replacements else [(key, retyped)])
    return Grammar(tg, initial, tuple(entries))


def _extend_initial(
    initial: TypedGraph, delta: GraphDelta, tg: TypeGraph
) -> TypedGraph:
    nodes = list(retype_graph(initial, tg).nodes)
    edges = list(initial.edges)
    taken_nodes = {n.id for n in nodes}
    taken_edges = {e.id for e in edges}
    node_remap: dict[int, int] = {}
    next_node = max(taken_nodes, default=-1) + 1
    for node in delta.nodes:
        nid = node.id
        if nid in taken_nodes:
            nid = next_node
        node_remap[node.id] = nid
        taken_nodes.add(nid)
        next_node = max(next_node, nid + 1)
        nodes.append(Node(nid, node.type, node.attrs))
    next_edge = max(taken_edges, default=-1) + 1
    for edge in delta.edges:
        eid = edge.id
        if eid in taken_edges:
            eid = next_edge
        taken_edges.add(eid)
        next_edge = max(next_edge, eid + 1)
        edges.append(
            Edge(
                eid,
                edge.type,
                node_remap.get(edge.src, edge.src),
                node_remap.get(edge.tgt, edge.tgt),
            )
        )
    return TypedGraph(tg, tuple(nodes), tuple(edges))


def weave_all(
    grammar: Grammar, aspects: Iterable[Aspect], order: Optional[list[str]] = None
) -> Grammar:
    """Fold the aspects over the grammar, left to right.

    ``order`` names a permutation of the aspects to weave in instead of
    their given order.
    """
    aspects = list(aspects)
    if order is not None:
        by_name = {a.name: a for a in aspects}
        if sorted(order) != sorted(by_name):
            raise WeaveError(
                f"order {order!r} does not name the aspects "
                f"{sorted(by_name)!r} exactly once each"
            )
        aspects = [by_name[name] for name in order]
    woven = grammar
    for aspect in aspects:
        woven = weave_aspect(woven, aspect)
    return woven


def woven_semantics(aspected: AspectedGrammar) -> Grammar:
    """The grammar an aspected grammar denotes: all aspects woven in order."""
    return weave_all(aspected.base, aspected.aspects)


# ---------------------------------------------------------------------------
# isomorphism up to ids and variable renaming


def _terms_alpha_equal(
    t1: AttrTerm, t2: AttrTerm, forward: dict[str, str], backward: dict[str, str]
) -> bool:
    if isinstance(t1, Var) and isinstance(t2, Var):
        if forward.setdefault(t1.name, t2.name) != t2.name:
            return False
        if backward.setdefault(t2.name, t1.name) != t1.name:
            return False
        return True
    if isinstance(t1, Lit) and isinstance(t2, Lit):
        return t1 == t2
    if isinstance(t1, RuleName) and isinstance(t2, RuleName):
        return True
    if isinstance(t1, Concat) and isinstance(t2, Concat):
        return len(t1.parts) == len(t2.parts) and all(
            _terms_alpha_equal(a, b, forward, backward)
            for a, b in zip(t1.parts, t2.parts)
        )
    return False


def rule_isomorphic(r1: Rule, r2: Rule) -> bool:
    """Structural equality of rules up to ids and variable renaming.

    Rule names are not compared.  The variable bijection must be
    consistent across the left and right sides together; interface
    terms are synthesised and therefore skipped.
    """
    if (
        len(r1.left.nodes) != len(r2.left.nodes)
        or len(r1.left.edges) != len(r2.left.edges)
        or len(r1.interface.nodes) != len(r2.interface.nodes)
        or len(r1.interface.edges) != len(r2.interface.edges)
        or len(r1.right.nodes) != len(r2.right.nodes)
        or len(r1.right.edges) != len(r2.right.edges)
    ):
        return False
    if r1.left.type_graph != r2.left.type_graph:
        tg1, tg2 = r1.left.type_graph, r2.left.type_graph
        if set(tg1.node_types) != set(tg2.node_types) or set(
            tg1.edge_types
        ) != set(tg2.edge_types):
            return False
        r2 = retype_rule(r2, tg1)

    inv_l2_nodes = {v: k for k, v in r2.l.node_pairs}
    inv_l2_edges = {v: k for k, v in r2.l.edge_pairs}

    for iso_l in enumerate_homomorphisms(
        r1.left, r2.left, injective_only=True, attrs="ignore"
    ):
        # The interface part is forced by the left isomorphism.
        k_nodes = {}
        k_edges = {}
        ok = True
        for kid in r1.interface.node_ids:
            image = inv_l2_nodes.get(iso_l.morphism.node_map[r1.l.node_map[kid]])
            if image is None:
                ok = False
                break
            k_nodes[kid] = image
        if ok:
            for kid in r1.interface.edge_ids:
                image = inv_l2_edges.get(iso_l.morphism.edge_map[r1.l.edge_map[kid]])
                if image is None:
                    ok = False
                    break
                k_edges[kid] = image
        if not ok or len(set(k_nodes.values())) != len(r2.interface.nodes):
            continue
        if len(set(k_edges.values())) != len(r2.interface.edges):
            continue
        for iso_r in enumerate_homomorphisms(
            r1.right, r2.right, injective_only=True, attrs="ignore"
        ):
            if not all(
                iso_r.morphism.node_map[r1.r.node_map[kid]]
                == r2.r.node_map[k_nodes[kid]]
                for kid in r1.interface.node_ids
            ):
                continue
            if not all(
                iso_r.morphism.edge_map[r1.r.edge_map[kid]]
                == r2.r.edge_map[k_edges[kid]]
                for kid in r1.interface.edge_ids
            ):
                continue
            forward: dict[str, str] = {}
            backward: dict[str, str] = {}
            if _alpha_component(r1.left, r2.left, iso_l.morphism, forward, backward) and _alpha_component(
                r1.right, r2.right, iso_r.morphism, forward, backward
            ):
                return True
    return False


def _alpha_component(
    g1: TypedGraph,
    g2: TypedGraph,
    iso: GraphMorphism,
    forward: dict[str, str],
    backward: dict[str, str],
) -> bool:
    for node in g1.nodes:
        image = g2.node(iso.node_map[node.id])
        for (attr, t1), (_, t2) in zip(node.attrs, image.attrs):
            if not _terms_alpha_equal(t1, t2, forward, backward):
                return False
    return True


def grammar_isomorphic(g1: Grammar, g2: Grammar) -> bool:
    """Grammar equivalence up to ids, variable names, and rule order.

    Type graphs must declare the same types (order is irrelevant — it
    records weaving history, nothing more); start states must be
    isomorphic; rules must admit a bijection of isomorphic pairs.
    """
    if set(g1.type_graph.node_types) != set(g2.type_graph.node_types):
        return False
    if set(g1.type_graph.edge_types) != set(g2.type_graph.edge_types):
        return False
    from .homs import is_isomorphic

    initial2 = retype_graph(g2.initial, g1.type_graph)
    if not is_isomorphic(g1.initial, initial2):
        return False
    rules1 = [rule for _, rule in g1.rules]
    rules2 = [retype_rule(rule, g1.type_graph) for _, rule in g2.rules]
    if len(rules1) != len(rules2):
        return False

    used: set[int] = set()

    def assign(i: int) -> bool:
        if i == len(rules1):
            return True
        for j, candidate in enumerate(rules2):
            if j in used:
                continue
            if rule_isomorphic(rules1[i], candidate):
                used.add(j)
                if assign(i + 1):
                    return True
                used.discard(j)
        return False

    return assign(0)
