"""JSON documents for graphs, runs, and analysis results.

Every document is a plain ``json``-ready dict stamped with
``"schema": SCHEMA_VERSION`` and a ``"kind"`` discriminator.  Documents
are deterministic functions of their inputs, and the ``*_from_doc``
inverses reconstruct the original objects, so serialization is lossless.
"""

from __future__ import annotations

from typing import Any, Optional

from .cpa import CpaReport, InterferenceReport
from .engine import DerivationTrace, Grammar, graph_hash
from .graphs import (
    AttrDecl,
    Edge,
    EdgeType,
    GraphError,
    GraphMorphism,
    Node,
    NodeType,
    TypeGraph,
    TypedGraph,
)
from .rules import Rule
from .terms import AttrTerm, Concat, Lit, RuleName, Var

__all__ = [
    "SCHEMA_VERSION",
    "ReportError",
    "term_to_doc",
    "term_from_doc",
    "type_graph_to_doc",
    "type_graph_from_doc",
    "graph_to_doc",
    "graph_from_doc",
    "rule_to_doc",
    "rule_from_doc",
    "grammar_to_doc",
    "grammar_from_doc",
    "trace_to_doc",
    "cpa_to_doc",
    "weave_summary_doc",
]

SCHEMA_VERSION = 1

Doc = dict[str, Any]


class ReportError(ValueError):
    """A document does not say what it claims to say."""


def _stamp(kind: str, body: Doc) -> Doc:
    return {"schema": SCHEMA_VERSION, "kind": kind, **body}


def _check(doc: Doc, kind: str) -> None:
    if doc.get("schema") != SCHEMA_VERSION:
        raise ReportError(
            f"unsupported schema {doc.get('schema')!r} (expected {SCHEMA_VERSION})"
        )
    if doc.get("kind") != kind:
        raise ReportError(f"expected a {kind!r} document, got {doc.get('kind')!r}")


# --- terms -------------------------------------------------------------------


def term_to_doc(term: AttrTerm) -> Doc:
    if isinstance(term, Lit):
        return {"lit": term.value}
    if isinstance(term, Var):
        return {"var": term.name}
    if isinstance(term, RuleName):
        return {"rule-name": True}
    return {"concat": [term_to_doc(part) for part in term.parts]}


def term_from_doc(doc: Doc) -> AttrTerm:
    if "lit" in doc:
        return Lit(doc["lit"])
    if "var" in doc:
        return Var(doc["var"])
    if "rule-name" in doc:
        return RuleName()
    if "concat" in doc:
        return Concat(*(term_from_doc(part) for part in doc["concat"]))
    raise ReportError(f"not a term document: {doc!r}")


# --- type graphs and graphs --------------------------------------------------


def type_graph_to_doc(tg: TypeGraph) -> Doc:
    return {
        "node_types": [
            {
                "name": nt.name,
                "attrs": [{"name": d.name, "sort": d.sort} for d in nt.attrs],
            }
            for nt in tg.node_types
        ],
        "edge_types": [
            {"name": et.name, "src": et.src, "tgt": et.tgt}
            for et in tg.edge_types
        ],
    }


def type_graph_from_doc(doc: Doc) -> TypeGraph:
    return TypeGraph(
        node_types=tuple(
            NodeType(
                nt["name"],
                tuple(AttrDecl(d["name"], d["sort"]) for d in nt["attrs"]),
            )
            for nt in doc["node_types"]
        ),
        edge_types=tuple(
            EdgeType(et["name"], et["src"], et["tgt"])
            for et in doc["edge_types"]
        ),
    )


def graph_to_doc(graph: TypedGraph) -> Doc:
    return {
        "nodes": [
            {
                "id": n.id,
                "type": n.type,
                "attrs": {attr: term_to_doc(term) for attr, term in n.attrs},
            }
            for n in graph.nodes
        ],
        "edges": [
            {"id": e.id, "type": e.type, "src": e.src, "tgt": e.tgt}
            for e in graph.edges
        ],
    }


def graph_from_doc(doc: Doc, tg: TypeGraph) -> TypedGraph:
    decls = {nt.name: nt.attrs for nt in tg.node_types}
    nodes = []
    for n in doc["nodes"]:
        if n["type"] not in decls:
            raise ReportError(f"unknown node type {n['type']!r}")
        attrs = tuple(
            (d.name, term_from_doc(n["attrs"][d.name])) for d in decls[n["type"]]
        )
        nodes.append(Node(n["id"], n["type"], attrs))
    edges = tuple(
        Edge(e["id"], e["type"], e["src"], e["tgt"]) for e in doc["edges"]
    )
    try:
        return TypedGraph(tg, tuple(nodes), edges)
    except GraphError as exc:
        raise ReportError(str(exc)) from exc


# --- rules and grammars ------------------------------------------------------


def _morphism_doc(m: GraphMorphism) -> Doc:
    return {
        "nodes": {str(a): b for a, b in sorted(m.node_map.items())},
        "edges": {str(a): b for a, b in sorted(m.edge_map.items())},
    }


def _morphism_from_doc(doc: Doc, src: TypedGraph, tgt: TypedGraph) -> GraphMorphism:
    return GraphMorphism(
        src,
        tgt,
        tuple((int(a), b) for a, b in doc["nodes"].items()),
        tuple((int(a), b) for a, b in doc["edges"].items()),
    )


def rule_to_doc(rule: Rule) -> Doc:
    return {
        "name": rule.name,
        "left": graph_to_doc(rule.left),
        "interface": graph_to_doc(rule.interface),
        "right": graph_to_doc(rule.right),
        "l": _morphism_doc(rule.l),
        "r": _morphism_doc(rule.r),
    }


def rule_from_doc(doc: Doc, tg: TypeGraph) -> Rule:
    left = graph_from_doc(doc["left"], tg)
    interface = graph_from_doc(doc["interface"], tg)
    right = graph_from_doc(doc["right"], tg)
    return Rule(
        doc["name"],
        left,
        interface,
        right,
        _morphism_from_doc(doc["l"], interface, left),
        _morphism_from_doc(doc["r"], interface, right),
    )


def grammar_to_doc(grammar: Grammar) -> Doc:
    """The whole grammar, rule registry and all, as one document."""
    return _stamp(
        "grammar",
        {
            "types": type_graph_to_doc(grammar.type_graph),
            "initial": graph_to_doc(grammar.initial),
            "rules": [
                {"key": key, **rule_to_doc(rule)} for key, rule in grammar.rules
            ],
        },
    )


def grammar_from_doc(doc: Doc) -> Grammar:
    _check(doc, "grammar")
    tg = type_graph_from_doc(doc["types"])
    rules = tuple(
        (entry["key"], rule_from_doc(entry, tg)) for entry in doc["rules"]
    )
    return Grammar(tg, graph_from_doc(doc["initial"], tg), rules)


# --- runs --------------------------------------------------------------------


def trace_to_doc(trace: DerivationTrace) -> Doc:
    """A run: per-step keys, matches, and hashes, plus the final state."""
    return _stamp(
        "derivation-trace",
        {
            "seed": trace.seed,
            "status": trace.status,
            "initial": graph_to_doc(trace.initial),
            "steps": [
                {
                    "index": step.index,
                    "rule_key": step.rule_key,
                    "rule_name": step.rule_name,
                    "match": {
                        **_morphism_doc(step.match.morphism),
                        "binding": {
                            name: term_to_doc(value)
                            for name, value in sorted(
                                step.match.binding_map.items()
                            )
                        },
                    },
                    "result_hash": graph_hash(step.result),
                }
                for step in trace.steps
            ],
            "final": graph_to_doc(trace.final),
            "final_hash": graph_hash(trace.final),
        },
    )


# --- analyses ----------------------------------------------------------------


def cpa_to_doc(
    report: CpaReport, interference: Optional[InterferenceReport] = None
) -> Doc:
    """The matrix plus, for each nonzero cell, what its overlaps prove."""
    cells = {}
    for (key1, key2), found in sorted(report.cells.items()):
        if not found:
            continue
        cells[f"{key1} / {key2}"] = [
            {
                "shared_nodes": [list(pair) for pair in a.overlap.shared_nodes],
                "shared_edges": [list(pair) for pair in a.overlap.shared_edges],
                "verdicts": [
                    {
                        "kind": v.kind,
                        "subject": v.subject,
                        "element": v.element,
                        **({"attr": v.attr} if v.attr is not None else {}),
                    }
                    for v in a.verdicts
                ],
            }
            for a in found
        ]
    body: Doc = {
        "mode": report.mode,
        "keys": list(report.keys),
        "matrix": {
            key1: {key2: report.count(key1, key2) for key2 in report.keys}
            for key1 in report.keys
        },
        "truncated": {
            f"{key1} / {key2}": limit
            for (key1, key2), limit in sorted(report.truncated.items())
        },
        "cells": cells,
    }
    if interference is not None:
        body["cross_aspect"] = {
            "order_independent": interference.order_independent,
            "cross_cells": [list(cell) for cell in interference.cross_cells],
            "message": interference.message,
        }
    return _stamp("cpa-report", body)


def weave_summary_doc(order: list[str], woven: Grammar) -> Doc:
    return _stamp(
        "weave-summary",
        {
            "order": list(order),
            "rule_count": len(woven.rules),
            "rules": [
                {"key": key, "name": rule.name} for key, rule in woven.rules
            ],
        },
    )
