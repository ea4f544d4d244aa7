"""Deterministic DOT renderings of graphs, rules, and encoded states.

Output is a pure function of the input: elements appear in id order and
nothing date- or environment-dependent is emitted, so equal inputs give
byte-identical text.
"""

from __future__ import annotations

from typing import Callable, Optional, Union

from .encoding import EncodingTrace, Origin
from .graphs import TypedGraph
from .rules import Rule
from .terms import format_term

__all__ = ["export_dot", "graph_dot", "rule_dot", "encoded_dot"]


def _esc(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _label(parts: list[str]) -> str:
    return "\\n".join(_esc(part) for part in parts)


_Note = Optional[Callable[[int], Optional[str]]]


def _graph_body(
    graph: TypedGraph,
    prefix: str,
    indent: str,
    out: list[str],
    node_note: _Note = None,
    edge_note: _Note = None,
) -> None:
    for n in graph.nodes:
        parts = [f"{n.id}: {n.type}"]
        parts += [f"{attr} = {format_term(term)}" for attr, term in n.attrs]
        if node_note and (note := node_note(n.id)):
            parts.append(note)
        out.append(f'{indent}{prefix}{n.id} [label="{_label(parts)}"];')
    for e in graph.edges:
        parts = [f"{e.id}: {e.type}"]
        if edge_note and (note := edge_note(e.id)):
            parts.append(note)
        out.append(
            f'{indent}{prefix}{e.src} -> {prefix}{e.tgt} '
            f'[label="{_label(parts)}"];'
        )


def _header(name: str) -> list[str]:
    return [f'digraph "{_esc(name)}" {{', "  rankdir=LR;", "  node [shape=box];"]


def graph_dot(graph: TypedGraph, *, name: str = "state") -> str:
    out = _header(name)
    _graph_body(graph, "n", "  ", out)
    out.append("}")
    return "\n".join(out) + "\n"


def rule_dot(rule: Rule, *, name: Optional[str] = None) -> str:
    """The three sides as clusters, plus dashed edges tracing the span."""
    out = _header(name or rule.name)
    for title, graph, prefix in (
        ("left", rule.left, "l"),
        ("interface", rule.interface, "k"),
        ("right", rule.right, "r"),
    ):
        out.append(f"  subgraph cluster_{title} {{")
        out.append(f'    label="{title}";')
        _graph_body(graph, prefix, "    ", out)
        out.append("  }")
    for k in rule.interface.nodes:
        left_id = rule.l.map_node(k.id)
        right_id = rule.r.map_node(k.id)
        out.append(
            f"  k{k.id} -> l{left_id} [style=dashed, constraint=false];"
        )
        out.append(
            f"  k{k.id} -> r{right_id} [style=dashed, constraint=false];"
        )
    out.append("}")
    return "\n".join(out) + "\n"


def _origin_note(origin: Origin) -> str:
    if origin.role == "initial":
        return "start state"
    if origin.role == "rule-id":
        return f"identity of {origin.rule_key}"
    place = f"{origin.slot} {origin.kind} {origin.element}"
    if origin.role == "element":
        return f"{origin.rule_key}: {place}"
    if origin.role == "endpoint":
        return f"{origin.rule_key}: {place} {origin.detail}"
    if origin.role == "span":
        return f"{origin.rule_key}: {origin.kind} {origin.element} {origin.detail}-leg"
    return f"{origin.rule_key}: {place} id"


def encoded_dot(
    graph: TypedGraph, trace: EncodingTrace, *, name: str = "encoded"
) -> str:
    """An encoded-grammar graph, each element tagged with its origin."""

    def node_note(nid: int) -> Optional[str]:
        origin = trace.nodes.get(nid)
        return _origin_note(origin) if origin else None

    def edge_note(eid: int) -> Optional[str]:
        origin = trace.edges.get(eid)
        return _origin_note(origin) if origin else None

    out = _header(name)
    _graph_body(graph, "n", "  ", out, node_note, edge_note)
    out.append("}")
    return "\n".join(out) + "\n"


def export_dot(
    subject: Union[TypedGraph, Rule],
    trace: Optional[EncodingTrace] = None,
    *,
    name: Optional[str] = None,
) -> str:
    """Render whatever was handed in; ``trace`` adds provenance labels."""
    if isinstance(subject, Rule):
        return rule_dot(subject, name=name)
    if isinstance(subject, TypedGraph):
        if trace is not None:
            return encoded_dot(subject, trace, name=name or "encoded")
        return graph_dot(subject, name=name or "state")
    raise TypeError(f"cannot render {type(subject).__name__} as DOT")
