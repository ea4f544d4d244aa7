"""Rewrite rules as monic spans and their application.

A rule names a span ``L ← K → R``: the left side is the pattern, the
interface is what survives, the right side is the replacement.  Applying
a rule at a match is the usual two-step construction — carve the host
down to the context, then glue the instantiated right side back in.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

from .graphs import GraphError, GraphMorphism, TypedGraph
from .homs import enumerate_homomorphisms
from .pushouts import GluingViolation, check_gluing, pushout, pushout_complement
from .terms import (
    AttrTerm,
    Lit,
    Var,
    evaluate,
    match_term,
    substitute,
    term_vars,
    vars_of_terms,
)


class RuleError(GraphError):
    """An ill-formed rule."""


class GluingError(Exception):
    """A rule application attempted at a match that violates gluing."""

    def __init__(self, violation: GluingViolation) -> None:
        super().__init__(str(violation))
        self.violation = violation


@dataclass(frozen=True)
class Rule:
    """A named monic span of typed graphs."""

    name: str
    left: TypedGraph
    interface: TypedGraph
    right: TypedGraph
    l: GraphMorphism  # interface -> left
    r: GraphMorphism  # interface -> right

    def renamed(self, name: str) -> "Rule":
        return Rule(name, self.left, self.interface, self.right, self.l, self.r)

    @cached_property
    def deleted_node_ids(self) -> frozenset[int]:
        return frozenset(self.left.node_ids) - frozenset(self.l.node_map.values())

    @cached_property
    def deleted_edge_ids(self) -> frozenset[int]:
        return frozenset(self.left.edge_ids) - frozenset(self.l.edge_map.values())

    @cached_property
    def created_node_ids(self) -> frozenset[int]:
        return frozenset(self.right.node_ids) - frozenset(self.r.node_map.values())

    @cached_property
    def created_edge_ids(self) -> frozenset[int]:
        return frozenset(self.right.edge_ids) - frozenset(self.r.edge_map.values())

    def deletes_anything(self) -> bool:
        return bool(self.deleted_node_ids or self.deleted_edge_ids)

    def creates_anything(self) -> bool:
        return bool(self.created_node_ids or self.created_edge_ids)


def make_rule(
    name: str,
    left: TypedGraph,
    right: TypedGraph,
    preserved_nodes,
    preserved_edges=(),
) -> Rule:
    """Build a rule from its two sides plus a preservation correspondence.

    ``preserved_nodes`` / ``preserved_edges`` pair left ids with right
    ids; everything unpaired on the left is deleted, everything unpaired
    on the right is created.  The interface is synthesised: it reuses
    left ids, mirrors left-side variables, and fills literal slots with
    reserved placeholder variables (``~`` is not a legal identifier
    character in the text format, so these can never clash with user
    variables).
    """
    from .graphs import Edge, Node  # local to avoid a wide import surface

    preserved_nodes = tuple(preserved_nodes)
    preserved_edges = tuple(preserved_edges)
    k_nodes = []
    for lid, _rid in preserved_nodes:
        ln = left.node(lid)
        attrs = tuple(
            (attr, term if isinstance(term, Var) else Var(f"~k{lid}.{attr}"))
            for attr, term in ln.attrs
        )
        k_nodes.append(Node(lid, ln.type, attrs))
    k_edges = []
    for lid, _rid in preserved_edges:
        le = left.edge(lid)
        k_edges.append(Edge(lid, le.type, le.src, le.tgt))
    interface = TypedGraph(left.type_graph, tuple(k_nodes), tuple(k_edges))
    l = GraphMorphism(
        interface,
        left,
        tuple((lid, lid) for lid, _ in preserved_nodes),
        tuple((lid, lid) for lid, _ in preserved_edges),
    )
    r = GraphMorphism(interface, right, preserved_nodes, preserved_edges)
    return Rule(name, left, interface, right, l, r)


def validate_rule(rule: Rule, *, symbolic: bool = False) -> None:
    """Raise :class:`RuleError` when ``rule`` is not a well-formed span.

    In the default strict mode the rule must also be executable against
    concrete states: left terms are literals or variables, interface
    terms are variables, and every right-side variable is bound on the
    left.  ``symbolic=True`` relaxes those term conditions — rules that
    only ever rewrite other rules' encodings carry residual terms that a
    concrete rule may not.
    """
    if rule.l.source is not rule.interface and rule.l.source != rule.interface:
        raise RuleError(f"rule {rule.name!r}: l must start at the interface")
    if rule.r.source is not rule.interface and rule.r.source != rule.interface:
        raise RuleError(f"rule {rule.name!r}: r must start at the interface")
    if rule.l.target != rule.left:
        raise RuleError(f"rule {rule.name!r}: l must end at the left side")
    if rule.r.target != rule.right:
        raise RuleError(f"rule {rule.name!r}: r must end at the right side")
    if not rule.l.is_injective() or not rule.r.is_injective():
        raise RuleError(f"rule {rule.name!r}: span legs must be injective")
    tg = rule.interface.type_graph
    if rule.left.type_graph != tg or rule.right.type_graph != tg:
        raise RuleError(f"rule {rule.name!r}: sides disagree on the type graph")
    if symbolic:
        return

    for node in rule.interface.nodes:
        for attr, term in node.attrs:
            if not isinstance(term, Var):
                raise RuleError(
                    f"rule {rule.name!r}: interface node {node.id}.{attr} "
                    "must carry a variable"
                )
    left_vars: set[str] = set()
    for node in rule.left.nodes:
        for attr, term in node.attrs:
            if not isinstance(term, (Lit, Var)):
                raise RuleError(
                    f"rule {rule.name!r}: left node {node.id}.{attr} must be "
                    "a literal or a variable"
                )
            left_vars.update(term_vars(term))
    right_vars = vars_of_terms(
        term for node in rule.right.nodes for _, term in node.attrs
    )
    unbound = right_vars - left_vars
    if unbound:
        raise RuleError(
            f"rule {rule.name!r}: right side uses unbound "
            f"variable(s) {sorted(unbound)}"
        )


@dataclass(frozen=True)
class Match:
    """An occurrence of a rule's left side in a host graph."""

    morphism: GraphMorphism
    binding: tuple[tuple[str, AttrTerm], ...] = ()

    @cached_property
    def binding_map(self) -> dict[str, AttrTerm]:
        return dict(self.binding)


def find_matches(
    rule: Rule, host: TypedGraph, *, injective_only: bool = True
) -> list[Match]:
    """All matches of the rule's left side, deterministically ordered."""
    return [
        Match(h.morphism, h.binding)
        for h in enumerate_homomorphisms(
            rule.left, host, injective_only=injective_only, attrs="match"
        )
    ]


def check_rule_applicable(rule: Rule, match: Match) -> Optional[GluingViolation]:
    """Value-style applicability check at a specific match."""
    return check_gluing(rule.l, match.morphism)


@dataclass(frozen=True)
class RewriteStep:
    """The output of one rule application."""

    rule_name: str
    match: Match
    intermediate: TypedGraph  # the host minus the deleted part
    result: TypedGraph
    comatch: GraphMorphism  # right side -> result


def apply_rule(rule: Rule, match: Match, *, symbolic: bool = False) -> RewriteStep:
    """Apply ``rule`` at ``match``; raises :class:`GluingError` if blocked.

    Concrete mode (the default) evaluates every right-side term to a
    literal — the rule-name builtin becomes this rule's name.  Symbolic
    mode only substitutes the binding and leaves residual terms intact,
    so a rule can be rewritten inside another graph without committing
    the bits that only make sense at execution time.
    """
    outcome = pushout_complement(rule.l, match.morphism)
    if isinstance(outcome, GluingViolation):
        raise GluingError(outcome)
    context, interface_in_context, _ = outcome

    binding = match.binding_map
    new_nodes = []
    for node in rule.right.nodes:
        attrs = {}
        for attr, term in node.attrs:
            if symbolic:
                attrs[attr] = substitute(term, binding)
            else:
                attrs[attr] = evaluate(term, binding, rule.name)
        new_nodes.append(node.with_attrs(attrs))
    right_inst = TypedGraph(
        rule.right.type_graph, tuple(new_nodes), rule.right.edges
    )
    r_inst = GraphMorphism(
        rule.interface, right_inst, rule.r.node_pairs, rule.r.edge_pairs
    )

    result, _, comatch = pushout(interface_in_context, r_inst)
    return RewriteStep(rule.name, match, context, result, comatch)


def disturbs(rule1: Rule, match1: Match, rule2: Rule, match2: Match) -> bool:
    """Does applying ``rule1`` first invalidate or alter ``rule2``'s step?

    Both matches must target the same ground host graph.  Applying
    ``rule1`` disturbs the other application when afterwards the second
    match no longer exists (an image element was deleted, a left-side
    term stopped matching, or the gluing condition broke), when the
    re-derived binding changes a variable the second rule's right side
    uses, or when both rules write different values into the same
    attribute slot.  The relation is directional on purpose: a pure
    reader is disturbed by a writer, never the other way around.
    """
    host = match1.morphism.target
    result = apply_rule(rule1, match1).result

    surviving_nodes = set(result.node_ids)
    surviving_edges = set(result.edge_ids)
    for _, image in match2.morphism.node_pairs:
        if image not in surviving_nodes:
            return True
    for _, image in match2.morphism.edge_pairs:
        if image not in surviving_edges:
            return True

    rebind: dict[str, AttrTerm] = {}
    for left_node in rule2.left.nodes:
        now = result.node(match2.morphism.map_node(left_node.id))
        for attr, pattern in left_node.attrs:
            if not match_term(pattern, now.attr(attr), rebind):
                return True
    residual = GraphMorphism(
        rule2.left, result, match2.morphism.node_pairs, match2.morphism.edge_pairs
    )
    if check_gluing(rule2.l, residual) is not None:
        return True

    old_binding = match2.binding_map
    for var in _effect_vars(rule2):
        if rebind.get(var) != old_binding.get(var):
            return True

    writes1 = _evaluated_writes(rule1, match1, host)
    writes2 = _evaluated_writes(rule2, match2, host)
    for slot in writes1.keys() & writes2.keys():
        if writes1[slot] != writes2[slot]:
            return True
    return False


def _effect_vars(rule: Rule) -> set[str]:
    """Variables whose value can show up in the application's output.

    Terms on created nodes count, and so do rewritten slots of preserved
    nodes; a right-side term that merely repeats its left-side slot
    copies whatever the host holds and is insensitive to the binding.
    """
    out: set[str] = set()
    copied = {
        rule.r.map_node(k_id): rule.l.map_node(k_id)
        for k_id in rule.interface.node_ids
    }
    for right_node in rule.right.nodes:
        left_terms = (
            rule.left.node(copied[right_node.id]).attr_map
            if right_node.id in copied
            else None
        )
        for attr, term in right_node.attrs:
            if left_terms is not None and left_terms[attr] == term:
                continue
            out.update(term_vars(term))
    return out


def _evaluated_writes(
    rule: Rule, match: Match, host: TypedGraph
) -> dict[tuple[int, str], Lit]:
    """Host attribute slots the application overwrites, with new values."""
    binding = match.binding_map
    writes: dict[tuple[int, str], Lit] = {}
    for k_id in rule.interface.node_ids:
        host_id = match.morphism.map_node(rule.l.map_node(k_id))
        current = host.node(host_id)
        for attr, term in rule.right.node(rule.r.map_node(k_id)).attrs:
            value = evaluate(term, binding, rule.name)
            if value != current.attr(attr):
                writes[(host_id, attr)] = value
    return writes


def parallel_independent(
    rule1: Rule, match1: Match, rule2: Rule, match2: Match
) -> bool:
    """True when neither application disturbs the other."""
    return not disturbs(rule1, match1, rule2, match2) and not disturbs(
        rule2, match2, rule1, match1
    )
