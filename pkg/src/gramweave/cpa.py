"""Static interference analysis between rule applications.

Two rules can step on each other in two directions: one can destroy or
alter what the other is about to use (a *conflict*, witnessed on the two
left sides), or one can produce what the other needs (a *dependency*,
witnessed between the first rule's right side and the second rule's
left).  Either way the witness is an overlap: a way of laying the two
sides over each other so that they share at least one element and both
applications actually exist.

The analysis enumerates those overlaps pair by pair and reports a matrix
of counts keyed by the grammar's rule registry.  It over-approximates
run-time behaviour in the usual way — every reachable interference shows
up in some cell, but a nonzero cell need not be reachable from the start
state.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional

from .encoding import encode_aogg
from .engine import Grammar
from .aspects import AspectedGrammar
from .graphs import Edge, GraphMorphism, Node, TypedGraph
from .rules import Rule
from .terms import AttrTerm, Concat, Lit, RuleName, Var, term_vars

__all__ = [
    "MAX_OVERLAPS_ENV",
    "DEFAULT_MAX_OVERLAPS",
    "Overlap",
    "Verdict",
    "CellAnalysis",
    "CpaReport",
    "InterferenceReport",
    "enumerate_overlaps",
    "analyze_conflicts",
    "analyze_dependencies",
    "analyze_weaving",
    "cross_aspect_interference",
]

#: Environment variable bounding the overlap search per rule pair.
MAX_OVERLAPS_ENV = "GRAMWEAVE_MAX_OVERLAPS"
DEFAULT_MAX_OVERLAPS = 100_000


@dataclass(frozen=True)
class Overlap:
    """Two rule sides glued along shared elements.

    ``m1`` and ``m2`` embed the two sides into :attr:`glue`;
    ``shared_nodes``/``shared_edges`` list the identified pairs as
    ``(side1 id, side2 id)``.  Ids from side 1 survive into the glue,
    which makes ``m1`` an inclusion.
    """

    side1: TypedGraph
    side2: TypedGraph
    glue: TypedGraph
    m1: GraphMorphism
    m2: GraphMorphism
    shared_nodes: tuple[tuple[int, int], ...]
    shared_edges: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Verdict:
    """One concrete reason an overlap is critical.

    ``kind`` is ``delete-use``, ``produce-use``, ``attribute-write-read``
    or ``attribute-write-write``; ``element`` names the shared node or
    edge on side 1, with ``attr`` set for the attribute kinds.
    """

    kind: str
    subject: str
    element: int
    attr: Optional[str] = None


@dataclass(frozen=True)
class CellAnalysis:
    """A critical overlap together with everything it proves."""

    overlap: Overlap
    verdicts: tuple[Verdict, ...]


@dataclass(frozen=True)
class InterferenceReport:
    """Do advices from different aspects ever collide?"""

    order_independent: bool
    cross_cells: tuple[tuple[str, str], ...]
    message: str


@dataclass(frozen=True)
class CpaReport:
    """A full pairwise matrix for one analysis mode."""

    mode: str  # "conflicts" or "dependencies"
    keys: tuple[str, ...]
    cells: dict[tuple[str, str], tuple[CellAnalysis, ...]]
    truncated: dict[tuple[str, str], int]

    def count(self, key1: str, key2: str) -> int:
        return len(self.cells[(key1, key2)])

    @cached_property
    def matrix(self) -> dict[tuple[str, str], int]:
        return {cell: len(found) for cell, found in self.cells.items()}

    def nonzero(self) -> set[tuple[str, str]]:
        return {cell for cell, count in self.matrix.items() if count}


def _max_overlaps(explicit: Optional[int]) -> int:
    if explicit is not None:
        return explicit
    raw = os.environ.get(MAX_OVERLAPS_ENV)
    return int(raw) if raw else DEFAULT_MAX_OVERLAPS


def _pairings(
    side1: TypedGraph, side2: TypedGraph
) -> Iterator[tuple[dict[int, int], dict[int, int]]]:
    """All nonempty partial isomorphisms between two sides.

    Yields ``(node pairing, edge pairing)`` keyed side1 → side2.  Pairing
    an edge silently requires its endpoints to be paired, so the search
    walks nodes first and then matches edges compatible with the choice.
    """
    nodes1 = side1.nodes

    def node_choices(index, taken, current):
        if index == len(nodes1):
            yield dict(current)
            return
        n = nodes1[index]
        yield from node_choices(index + 1, taken, current)
        for candidate in side2.nodes:
            if candidate.type == n.type and candidate.id not in taken:
                current[n.id] = candidate.id
                yield from node_choices(index + 1, taken | {candidate.id}, current)
                del current[n.id]

    for node_pairing in node_choices(0, frozenset(), {}):
        candidates = []
        for e1 in side1.edges:
            if e1.src not in node_pairing or e1.tgt not in node_pairing:
                continue
            options = [
                e2.id
                for e2 in side2.edges
                if e2.type == e1.type
                and e2.src == node_pairing[e1.src]
                and e2.tgt == node_pairing[e1.tgt]
            ]
            if options:
                candidates.append((e1.id, options))

        def edge_choices(index, taken, current):
            if index == len(candidates):
                yield dict(current)
                return
            eid, options = candidates[index]
            yield from edge_choices(index + 1, taken, current)
            for option in options:
                if option not in taken:
                    current[eid] = option
                    yield from edge_choices(index + 1, taken | {option}, current)
                    del current[eid]

        for edge_pairing in edge_choices(0, frozenset(), {}):
            if node_pairing or edge_pairing:
                yield node_pairing, edge_pairing


def _build_overlap(
    side1: TypedGraph,
    side2: TypedGraph,
    node_pairing: dict[int, int],
    edge_pairing: dict[int, int],
) -> Overlap:
    """Glue the two sides along a pairing; side 1 keeps its ids."""
    node_into: dict[int, int] = {}  # side2 id -> glue id
    edge_into: dict[int, int] = {}
    paired_nodes = {v: k for k, v in node_pairing.items()}
    paired_edges = {v: k for k, v in edge_pairing.items()}
    nodes = list(side1.nodes)
    edges = list(side1.edges)
    next_node = side1.next_node_id()
    next_edge = side1.next_edge_id()
    for n in side2.nodes:
        if n.id in paired_nodes:
            node_into[n.id] = paired_nodes[n.id]
        else:
            node_into[n.id] = next_node
            nodes.append(Node(next_node, n.type, n.attrs))
            next_node += 1
    for e in side2.edges:
        if e.id in paired_edges:
            edge_into[e.id] = paired_edges[e.id]
        else:
            edge_into[e.id] = next_edge
            edges.append(Edge(next_edge, e.type, node_into[e.src], node_into[e.tgt]))
            next_edge += 1
    glue = TypedGraph(side1.type_graph, tuple(nodes), tuple(edges))
    m1 = GraphMorphism(
        side1, glue,
        tuple((i, i) for i in side1.node_ids),
        tuple((i, i) for i in side1.edge_ids),
    )
    m2 = GraphMorphism(
        side2, glue,
        tuple(sorted(node_into.items())),
        tuple(sorted(edge_into.items())),
    )
    return Overlap(
        side1, side2, glue, m1, m2,
        tuple(sorted(node_pairing.items())),
        tuple(sorted(edge_pairing.items())),
    )


def enumerate_overlaps(
    side1: TypedGraph, side2: TypedGraph, *, max_overlaps: Optional[int] = None
) -> list[Overlap]:
    """Every way of gluing two graphs along at least one element."""
    limit = _max_overlaps(max_overlaps)
    out = []
    for count, (node_pairing, edge_pairing) in enumerate(_pairings(side1, side2)):
        if count >= limit:
            raise OverflowError(
                f"more than {limit} overlaps; raise {MAX_OVERLAPS_ENV} to continue"
            )
        out.append(_build_overlap(side1, side2, node_pairing, edge_pairing))
    return out


# --- attribute compatibility -------------------------------------------------

# Variables on the two sides live in separate namespaces, so the solver
# keys them by (side, name).  Matching is structural: a shared host value
# exists exactly when the two terms unify syntactically.


def _walk(term: AttrTerm, side: int, subst) -> tuple[AttrTerm, int]:
    while isinstance(term, Var) and (side, term.name) in subst:
        term, side = subst[(side, term.name)]
    return term, side


def _occurs(name: str, side: int, term: AttrTerm, term_side: int, subst) -> bool:
    term, term_side = _walk(term, term_side, subst)
    if isinstance(term, Var):
        return term_side == side and term.name == name
    if isinstance(term, Concat):
        return any(_occurs(name, side, p, term_side, subst) for p in term.parts)
    return False


def _unify(a: AttrTerm, sa: int, b: AttrTerm, sb: int, subst) -> bool:
    a, sa = _walk(a, sa, subst)
    b, sb = _walk(b, sb, subst)
    if isinstance(a, Var) and isinstance(b, Var) and (sa, a.name) == (sb, b.name):
        return True
    if isinstance(a, Var):
        if _occurs(a.name, sa, b, sb, subst):
            return False
        subst[(sa, a.name)] = (b, sb)
        return True
    if isinstance(b, Var):
        return _unify(b, sb, a, sa, subst)
    if isinstance(a, Lit) or isinstance(b, Lit):
        return a == b
    if isinstance(a, RuleName) or isinstance(b, RuleName):
        return isinstance(a, RuleName) and isinstance(b, RuleName)
    if len(a.parts) != len(b.parts):
        return False
    return all(_unify(pa, sa, pb, sb, subst) for pa, pb in zip(a.parts, b.parts))


def _attr_terms_compatible(
    side1: TypedGraph, side2: TypedGraph, node_pairing: dict[int, int]
) -> bool:
    subst: dict[tuple[int, str], tuple[AttrTerm, int]] = {}
    for id1, id2 in node_pairing.items():
        attrs2 = side2.node(id2).attr_map
        for attr, term1 in side1.node(id1).attrs:
            if not _unify(term1, 1, attrs2[attr], 2, subst):
                return False
    return True


# --- read/write footprints ---------------------------------------------------


def _written_slots(rule: Rule) -> tuple[set[tuple[int, str]], set[tuple[int, str]]]:
    """Attribute slots the rule rewrites, keyed by left and by right id."""
    by_left: set[tuple[int, str]] = set()
    by_right: set[tuple[int, str]] = set()
    for k_id in rule.interface.node_ids:
        left_id = rule.l.map_node(k_id)
        right_id = rule.r.map_node(k_id)
        left_terms = rule.left.node(left_id).attr_map
        for attr, term in rule.right.node(right_id).attrs:
            if term != left_terms[attr]:
                by_left.add((left_id, attr))
                by_right.add((right_id, attr))
    return by_left, by_right


def _read_slots(rule: Rule) -> set[tuple[int, str]]:
    """Left-side attribute slots whose value influences the application.

    A literal constrains the match.  A variable is a read when it is
    used anywhere else — another left slot, or a right-side term other
    than the plain copy at its own slot.  An unused variable is a
    wildcard: the slot's value never matters.
    """
    occurrences: dict[str, int] = {}
    for graph in (rule.left, rule.right):
        for n in graph.nodes:
            for _, term in n.attrs:
                for name in term_vars(term):
                    occurrences[name] = occurrences.get(name, 0) + 1

    copies = {
        rule.l.map_node(k_id): rule.r.map_node(k_id)
        for k_id in rule.interface.node_ids
    }
    reads: set[tuple[int, str]] = set()
    for n in rule.left.nodes:
        right_terms = (
            rule.right.node(copies[n.id]).attr_map if n.id in copies else {}
        )
        for attr, term in n.attrs:
            if isinstance(term, Var):
                uses = occurrences[term.name] - 1
                if right_terms.get(attr) == term:
                    uses -= 1
                if uses > 0:
                    reads.add((n.id, attr))
            else:
                # Literals and composite patterns constrain the value.
                reads.add((n.id, attr))
    return reads


# --- the two analyses --------------------------------------------------------


def _identity_pairing(
    side: TypedGraph, node_pairing: dict[int, int], edge_pairing: dict[int, int]
) -> bool:
    return (
        len(node_pairing) == len(side.nodes)
        and len(edge_pairing) == len(side.edges)
        and all(a == b for a, b in node_pairing.items())
        and all(a == b for a, b in edge_pairing.items())
    )


def _both_glue(
    erased1: tuple[frozenset[int], frozenset[int]],
    rule2: Rule,
    side1: TypedGraph,
    side2: TypedGraph,
    node_pairing: dict[int, int],
    edge_pairing: dict[int, int],
) -> bool:
    """Can both applications exist at this overlap?

    The embeddings are injective, so only dangling can fail: an edge of
    one side that stays private while its endpoint is identified with a
    node the other rule erases.  ``erased1`` holds the elements the
    first rule removes from ``side1`` — its deletions for a conflict
    overlap, its creations (removed when walking the step backwards)
    for a dependency overlap.
    """
    erased_nodes1, _ = erased1
    at_risk2 = {v for k, v in node_pairing.items() if k in erased_nodes1}
    if at_risk2:
        paired2 = set(edge_pairing.values())
        for e2 in side2.edges:
            if e2.id not in paired2 and (e2.src in at_risk2 or e2.tgt in at_risk2):
                return False
    at_risk1 = {k for k, v in node_pairing.items() if v in rule2.deleted_node_ids}
    if at_risk1:
        paired1 = set(edge_pairing.keys())
        for e1 in side1.edges:
            if e1.id not in paired1 and (e1.src in at_risk1 or e1.tgt in at_risk1):
                return False
    return True


def _conflict_verdicts(
    rule1: Rule,
    rule2: Rule,
    node_pairing: dict[int, int],
    edge_pairing: dict[int, int],
) -> tuple[Verdict, ...]:
    verdicts = []
    for id1 in node_pairing:
        if id1 in rule1.deleted_node_ids:
            verdicts.append(Verdict("delete-use", "node", id1))
    for id1 in edge_pairing:
        if id1 in rule1.deleted_edge_ids:
            verdicts.append(Verdict("delete-use", "edge", id1))
    writes1, _ = _written_slots(rule1)
    writes2, _ = _written_slots(rule2)
    reads2 = _read_slots(rule2)
    for id1, id2 in node_pairing.items():
        for attr, _ in rule1.left.node(id1).attrs:
            if (id1, attr) not in writes1:
                continue
            if (id2, attr) in reads2:
                verdicts.append(Verdict("attribute-write-read", "node", id1, attr))
            if (id2, attr) in writes2:
                verdicts.append(Verdict("attribute-write-write", "node", id1, attr))
    return tuple(verdicts)


def _dependency_verdicts(
    rule1: Rule,
    rule2: Rule,
    node_pairing: dict[int, int],
    edge_pairing: dict[int, int],
) -> tuple[Verdict, ...]:
    verdicts = []
    # Anything shared sits in the second rule's left side, so a created
    # shared element is by definition produced for the other's use.
    for id1 in node_pairing:
        if id1 in rule1.created_node_ids:
            verdicts.append(Verdict("produce-use", "node", id1))
    for id1 in edge_pairing:
        if id1 in rule1.created_edge_ids:
            verdicts.append(Verdict("produce-use", "edge", id1))
    _, writes1_right = _written_slots(rule1)
    reads2 = _read_slots(rule2)
    for id1, id2 in node_pairing.items():
        for attr, _ in rule1.right.node(id1).attrs:
            if (id1, attr) in writes1_right and (id2, attr) in reads2:
                verdicts.append(Verdict("attribute-write-read", "node", id1, attr))
    return tuple(verdicts)


def _analyze(
    grammar: Grammar,
    mode: str,
    max_overlaps: Optional[int],
) -> CpaReport:
    limit = _max_overlaps(max_overlaps)
    keys = grammar.rule_keys
    cells: dict[tuple[str, str], tuple[CellAnalysis, ...]] = {}
    truncated: dict[tuple[str, str], int] = {}

    for key1 in keys:
        rule1 = grammar.rule(key1)
        writes1_left, writes1_right = _written_slots(rule1)
        if mode == "conflicts":
            active = rule1.deletes_anything() or bool(writes1_left)
            side1 = rule1.left
            erased1 = (rule1.deleted_node_ids, rule1.deleted_edge_ids)
        else:
            active = rule1.creates_anything() or bool(writes1_right)
            side1 = rule1.right
            erased1 = (rule1.created_node_ids, rule1.created_edge_ids)
        for key2 in keys:
            cell = (key1, key2)
            if not active:
                cells[cell] = ()
                continue
            rule2 = grammar.rule(key2)
            side2 = rule2.left
            found = []
            for count, (node_pairing, edge_pairing) in enumerate(
                _pairings(side1, side2)
            ):
                if count >= limit:
                    truncated[cell] = limit
                    break
                if (
                    mode == "conflicts"
                    and key1 == key2
                    and _identity_pairing(side1, node_pairing, edge_pairing)
                ):
                    continue
                if not _attr_terms_compatible(side1, side2, node_pairing):
                    continue
                if not _both_glue(
                    erased1, rule2, side1, side2, node_pairing, edge_pairing
                ):
                    continue
                if mode == "conflicts":
                    verdicts = _conflict_verdicts(
                        rule1, rule2, node_pairing, edge_pairing
                    )
                else:
                    verdicts = _dependency_verdicts(
                        rule1, rule2, node_pairing, edge_pairing
                    )
                if verdicts:
                    overlap = _build_overlap(
                        side1, side2, node_pairing, edge_pairing
                    )
                    found.append(CellAnalysis(overlap, verdicts))
            cells[cell] = tuple(found)
    return CpaReport(mode, keys, cells, truncated)


def analyze_conflicts(
    grammar: Grammar, *, max_overlaps: Optional[int] = None
) -> CpaReport:
    """Count, for every rule pair, the overlaps where the first rule's
    application can destroy or alter the second's."""
    return _analyze(grammar, "conflicts", max_overlaps)


def analyze_dependencies(
    grammar: Grammar, *, max_overlaps: Optional[int] = None
) -> CpaReport:
    """Count, for every rule pair, the overlaps where the first rule's
    application can enable or feed the second's."""
    return _analyze(grammar, "dependencies", max_overlaps)


def analyze_weaving(
    aspected: AspectedGrammar, *, max_overlaps: Optional[int] = None
) -> CpaReport:
    """Conflict matrix between the advices themselves.

    The advices are encoded as rules over stored rule graphs, so the
    ordinary conflict analysis answers whether two advices can rewrite
    the same rule in incompatible ways.
    """
    return analyze_conflicts(encode_aogg(aspected), max_overlaps=max_overlaps)


def cross_aspect_interference(
    report: CpaReport, aspected: AspectedGrammar
) -> InterferenceReport:
    """Judge weaving-order independence from an advice conflict matrix."""
    owner = {}
    for aspect in aspected.aspects:
        for advice in aspect.advices:
            owner[f"{aspect.name}.{advice.name}"] = aspect.name
    cross = tuple(
        sorted(
            cell
            for cell in report.nonzero()
            if owner.get(cell[0]) != owner.get(cell[1])
        )
    )
    if cross:
        message = (
            f"{len(cross)} cross-aspect conflict cell(s): "
            + ", ".join(f"{a}/{b}" for a, b in cross)
        )
        return InterferenceReport(False, cross, message)
    return InterferenceReport(
        True, (), "order-independent (no cross-aspect conflicts)"
    )
