"""The grammar text format: parsing, printing, and resolution.

A document has up to five kinds of sections::

    types { node Client { id: string }  edge queued: Client -> Message }
    graph { c1: Client { id = "c1" }  q0: queued c1 -> m1 }
    config { seed = 0 }
    rule Send { left { ... } right { ... } }
    aspect log { types {...} graph {...} advice trace { pointcut {...} effect {...} } }

Rules and advice bodies name their elements; an element appearing on
both sides under the same label is preserved, everything else is
deleted or created.  Parsing produces a :class:`GrammarDoc` syntax
tree; :func:`resolve_doc` turns a tree into executable objects, and
:func:`print_doc` renders a tree back to text.  ``parse_doc`` and
``print_doc`` are mutually inverse at the tree level.

Identifiers are the usual ``[A-Za-z_][A-Za-z0-9_]*`` shape; any name
can also be written as a quoted string, which is how generated
grammars with punctuation in their type names stay printable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .aspects import (
    Advice,
    Aspect,
    AspectedGrammar,
    GraphDelta,
    TypeDelta,
    make_advice,
)
from .engine import Grammar
from .graphs import (
    AttrDecl,
    Edge,
    EdgeType,
    GraphError,
    Node,
    NodeType,
    TypeGraph,
    TypedGraph,
)
from .rules import Rule, make_rule
from .terms import AttrTerm, Concat, Lit, RuleName, Var, format_term, term_vars

KEYWORDS = frozenset(
    "types graph config rule aspect advice pointcut effect left right "
    "node edge named true false rulename".split()
)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class ResolveError(Exception):
    """The document parsed but does not describe a coherent grammar."""


# ---------------------------------------------------------------------------
# document model


@dataclass(frozen=True)
class NodeDecl:
    label: str
    type: str
    attrs: tuple[tuple[str, AttrTerm], ...] = ()


@dataclass(frozen=True)
class EdgeDecl:
    label: str
    type: str
    src: str
    tgt: str


ElementDecl = Union[NodeDecl, EdgeDecl]


@dataclass(frozen=True)
class TypeDecls:
    nodes: tuple[NodeType, ...] = ()
    edges: tuple[EdgeType, ...] = ()


@dataclass(frozen=True)
class RuleDoc:
    key: str
    left: tuple[ElementDecl, ...]
    right: tuple[ElementDecl, ...]
    name: Optional[str] = None  # defaults to the key


@dataclass(frozen=True)
class AdviceDoc:
    name: str
    pointcut_left: tuple[ElementDecl, ...]
    pointcut_right: tuple[ElementDecl, ...]
    effect_left: tuple[ElementDecl, ...]
    effect_right: tuple[ElementDecl, ...]


@dataclass(frozen=True)
class AspectDoc:
    name: str
    types: TypeDecls = field(default_factory=TypeDecls)
    graph: tuple[ElementDecl, ...] = ()
    advices: tuple[AdviceDoc, ...] = ()


@dataclass(frozen=True)
class GrammarDoc:
    types: TypeDecls = field(default_factory=TypeDecls)
    graph: tuple[ElementDecl, ...] = ()
    config: tuple[tuple[str, int], ...] = ()
    rules: tuple[RuleDoc, ...] = ()
    aspects: tuple[AspectDoc, ...] = ()


# ---------------------------------------------------------------------------
# tokenizer


@dataclass(frozen=True)
class _Token:
    kind: str  # ident, string, int, punct, eof
    value: str
    line: int
    col: int


_PUNCT = ("->", "{", "}", ":", ",", "=", "+", "?", "(", ")")


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            j = i + 1
            out = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    out.append(text[j + 1])
                    j += 2
                else:
                    out.append(text[j])
                    j += 1
            if j >= n:
                raise ParseError("unterminated string", line, col)
            tokens.append(_Token("string", "".join(out), line, col))
            col += j - i + 1
            i = j + 1
            continue
        if text.startswith("->", i):
            tokens.append(_Token("punct", "->", line, col))
            i += 2
            col += 2
            continue
        if ch in "{}:,=+?()":
            tokens.append(_Token("punct", ch, line, col))
            i += 1
            col += 1
            continue
        if ch == "-" or ch.isdigit():
            m = re.match(r"-?\d+", text[i:])
            if not m:
                raise ParseError(f"stray {ch!r}", line, col)
            tokens.append(_Token("int", m.group(), line, col))
            i += m.end()
            col += m.end()
            continue
        m = _IDENT.match(text, i)
        if m:
            tokens.append(_Token("ident", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)

    def expect_punct(self, value: str) -> None:
        tok = self.next()
        if tok.kind != "punct" or tok.value != value:
            raise ParseError(
                f"expected {value!r}, found {tok.value!r}", tok.line, tok.col
            )

    def accept_punct(self, value: str) -> bool:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == value:
            self.next()
            return True
        return False

    def expect_keyword(self, word: str) -> None:
        tok = self.next()
        if tok.kind != "ident" or tok.value != word:
            raise ParseError(
                f"expected {word!r}, found {tok.value!r}", tok.line, tok.col
            )

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.value == word

    def name(self, what: str) -> str:
        """A plain identifier (not a keyword) or a quoted string."""
        tok = self.next()
        if tok.kind == "string":
            return tok.value
        if tok.kind == "ident":
            if tok.value in KEYWORDS:
                raise ParseError(
                    f"{tok.value!r} is a keyword; quote it to use it as {what}",
                    tok.line,
                    tok.col,
                )
            return tok.value
        raise ParseError(
            f"expected {what}, found {tok.value or tok.kind!r}", tok.line, tok.col
        )

    def at_name(self, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == "string" or (
            tok.kind == "ident" and tok.value not in KEYWORDS
        )

    # -- terms --------------------------------------------------------------

    def term(self) -> AttrTerm:
        parts = [self.term_atom()]
        while self.accept_punct("+"):
            parts.append(self.term_atom())
        if len(parts) == 1:
            return parts[0]
        return Concat(*parts)

    def term_atom(self) -> AttrTerm:
        tok = self.peek()
        if self.accept_punct("?"):
            return Var(self.name("a variable name"))
        if tok.kind == "string":
            self.next()
            return Lit(tok.value)
        if tok.kind == "int":
            self.next()
            return Lit(int(tok.value))
        if tok.kind == "ident" and tok.value in ("true", "false"):
            self.next()
            return Lit(tok.value == "true")
        if tok.kind == "ident" and tok.value == "rulename":
            self.next()
            self.expect_punct("(")
            self.expect_punct(")")
            return RuleName()
        raise self.fail(f"expected a term, found {tok.value or tok.kind!r}")

    # -- sections -----------------------------------------------------------

    def type_decls(self) -> TypeDecls:
        self.expect_punct("{")
        nodes: list[NodeType] = []
        edges: list[EdgeType] = []
        while not self.accept_punct("}"):
            if self.at_keyword("node"):
                self.next()
                name = self.name("a node type name")
                attrs: list[AttrDecl] = []
                if self.accept_punct("{"):
                    while not self.accept_punct("}"):
                        attr = self.name("an attribute name")
                        self.expect_punct(":")
                        sort_tok = self.next()
                        try:
                            attrs.append(AttrDecl(attr, sort_tok.value))
                        except GraphError as exc:
                            raise ParseError(
                                str(exc), sort_tok.line, sort_tok.col
                            ) from None
                        self.accept_punct(",")
                nodes.append(NodeType(name, tuple(attrs)))
            elif self.at_keyword("edge"):
                self.next()
                name = self.name("an edge type name")
                self.expect_punct(":")
                src = self.name("a node type name")
                self.expect_punct("->")
                tgt = self.name("a node type name")
                edges.append(EdgeType(name, src, tgt))
            else:
                raise self.fail("expected 'node' or 'edge'")
        return TypeDecls(tuple(nodes), tuple(edges))

    def elements(self) -> tuple[ElementDecl, ...]:
        self.expect_punct("{")
        out: list[ElementDecl] = []
        while not self.accept_punct("}"):
            label = self.name("an element label")
            self.expect_punct(":")
            type_name = self.name("a type name")
            # An edge declaration continues with `src -> tgt`; a node with
            # attributes continues with `{`.  A bare node is followed by
            # the next label (name + ':'), by '}', or by nothing.
            if self.at_name() and self.peek(1).kind == "punct" and self.peek(1).value == "->":
                src = self.name("an endpoint label")
                self.expect_punct("->")
                tgt = self.name("an endpoint label")
                out.append(EdgeDecl(label, type_name, src, tgt))
                continue
            attrs: list[tuple[str, AttrTerm]] = []
            if self.accept_punct("{"):
                while not self.accept_punct("}"):
                    attr = self.name("an attribute name")
                    self.expect_punct("=")
                    attrs.append((attr, self.term()))
                    self.accept_punct(",")
            out.append(NodeDecl(label, type_name, tuple(attrs)))
        return tuple(out)

    def rule_body(self) -> tuple[tuple[ElementDecl, ...], tuple[ElementDecl, ...]]:
        self.expect_punct("{")
        self.expect_keyword("left")
        left = self.elements()
        self.expect_keyword("right")
        right = self.elements()
        self.expect_punct("}")
        return left, right

    def config(self) -> tuple[tuple[str, int], ...]:
        self.expect_punct("{")
        entries: list[tuple[str, int]] = []
        while not self.accept_punct("}"):
            key = self.name("a setting name")
            self.expect_punct("=")
            tok = self.next()
            if tok.kind != "int":
                raise ParseError(
                    f"expected an integer, found {tok.value!r}", tok.line, tok.col
                )
            entries.append((key, int(tok.value)))
        return tuple(entries)

    def aspect(self) -> AspectDoc:
        name = self.name("an aspect name")
        self.expect_punct("{")
        types = TypeDecls()
        graph: tuple[ElementDecl, ...] = ()
        advices: list[AdviceDoc] = []
        while not self.accept_punct("}"):
            if self.at_keyword("types"):
                self.next()
                types = self.type_decls()
            elif self.at_keyword("graph"):
                self.next()
                graph = self.elements()
            elif self.at_keyword("advice"):
                self.next()
                advice_name = self.name("an advice name")
                self.expect_punct("{")
                self.expect_keyword("pointcut")
                p_left, p_right = self.rule_body()
                self.expect_keyword("effect")
                e_left, e_right = self.rule_body()
                self.expect_punct("}")
                advices.append(
                    AdviceDoc(advice_name, p_left, p_right, e_left, e_right)
                )
            else:
                raise self.fail("expected 'types', 'graph', or 'advice'")
        return AspectDoc(name, types, graph, tuple(advices))

    def document(self) -> GrammarDoc:
        types = TypeDecls()
        graph: tuple[ElementDecl, ...] = ()
        config: tuple[tuple[str, int], ...] = ()
        rules: list[RuleDoc] = []
        aspects: list[AspectDoc] = []
        while self.peek().kind != "eof":
            if self.at_keyword("types"):
                self.next()
                types = self.type_decls()
            elif self.at_keyword("graph"):
                self.next()
                graph = self.elements()
            elif self.at_keyword("config"):
                self.next()
                config = self.config()
            elif self.at_keyword("rule"):
                self.next()
                key = self.name("a rule name")
                rule_name = None
                if self.at_keyword("named"):
                    self.next()
                    rule_name = self.name("a rule name")
                left, right = self.rule_body()
                rules.append(RuleDoc(key, left, right, rule_name))
            elif self.at_keyword("aspect"):
                self.next()
                aspects.append(self.aspect())
            else:
                raise self.fail(
                    "expected 'types', 'graph', 'config', 'rule', or 'aspect'"
                )
        return GrammarDoc(types, graph, config, tuple(rules), tuple(aspects))


def parse_doc(text: str) -> GrammarDoc:
    return _Parser(text).document()


# ---------------------------------------------------------------------------
# printing


def _fmt_name(name: str) -> str:
    if _IDENT.fullmatch(name) and name not in KEYWORDS:
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _print_type_decls(decls: TypeDecls, indent: str, out: list[str]) -> None:
    for nt in decls.nodes:
        if nt.attrs:
            attrs = ", ".join(f"{_fmt_name(a.name)}: {a.sort}" for a in nt.attrs)
            out.append(f"{indent}node {_fmt_name(nt.name)} {{ {attrs} }}")
        else:
            out.append(f"{indent}node {_fmt_name(nt.name)}")
    for et in decls.edges:
        out.append(
            f"{indent}edge {_fmt_name(et.name)}: "
            f"{_fmt_name(et.src)} -> {_fmt_name(et.tgt)}"
        )


def _print_elements(
    elements: tuple[ElementDecl, ...], indent: str, out: list[str]
) -> None:
    for el in elements:
        if isinstance(el, NodeDecl):
            head = f"{indent}{_fmt_name(el.label)}: {_fmt_name(el.type)}"
            if el.attrs:
                attrs = ", ".join(
                    f"{_fmt_name(a)} = {format_term(t)}" for a, t in el.attrs
                )
                out.append(f"{head} {{ {attrs} }}")
            else:
                out.append(head)
        else:
            out.append(
                f"{indent}{_fmt_name(el.label)}: {_fmt_name(el.type)} "
                f"{_fmt_name(el.src)} -> {_fmt_name(el.tgt)}"
            )


def _print_rule_body(
    left: tuple[ElementDecl, ...],
    right: tuple[ElementDecl, ...],
    indent: str,
    out: list[str],
) -> None:
    out.append(f"{indent}left {{")
    _print_elements(left, indent + "  ", out)
    out.append(f"{indent}}}")
    out.append(f"{indent}right {{")
    _print_elements(right, indent + "  ", out)
    out.append(f"{indent}}}")


def print_doc(doc: GrammarDoc) -> str:
    out: list[str] = []
    if doc.types.nodes or doc.types.edges:
        out.append("types {")
        _print_type_decls(doc.types, "  ", out)
        out.append("}")
    if doc.graph:
        out.append("")
        out.append("graph {")
        _print_elements(doc.graph, "  ", out)
        out.append("}")
    if doc.config:
        out.append("")
        out.append("config {")
        for key, value in doc.config:
            out.append(f"  {_fmt_name(key)} = {value}")
        out.append("}")
    for rule in doc.rules:
        out.append("")
        head = f"rule {_fmt_name(rule.key)}"
        if rule.name is not None and rule.name != rule.key:
            head += f" named {_fmt_name(rule.name)}"
        out.append(head + " {")
        _print_rule_body(rule.left, rule.right, "  ", out)
        out.append("}")
    for aspect in doc.aspects:
        out.append("")
        out.append(f"aspect {_fmt_name(aspect.name)} {{")
        if aspect.types.nodes or aspect.types.edges:
            out.append("  types {")
            _print_type_decls(aspect.types, "    ", out)
            out.append("  }")
        if aspect.graph:
            out.append("  graph {")
            _print_elements(aspect.graph, "    ", out)
            out.append("  }")
        for advice in aspect.advices:
            out.append(f"  advice {_fmt_name(advice.name)} {{")
            out.append("    pointcut {")
            _print_rule_body(
                advice.pointcut_left, advice.pointcut_right, "      ", out
            )
            out.append("    }")
            out.append("    effect {")
            _print_rule_body(advice.effect_left, advice.effect_right, "      ", out)
            out.append("    }")
            out.append("  }")
        out.append("}")
    while out and not out[0]:
        out.pop(0)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# resolution


@dataclass(frozen=True)
class _Built:
    """One resolved element block: its elements plus label→id tables."""

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    node_ids: dict[str, int]
    edge_ids: dict[str, int]


def _build_elements(
    elements: tuple[ElementDecl, ...],
    tg: TypeGraph,
    where: str,
    *,
    base_labels: Optional[dict[str, int]] = None,
    start_node: int = 0,
    start_edge: int = 0,
) -> _Built:
    """Assign ids in order of appearance and type-check each element.

    Missing attributes become reserved ``~u`` placeholder variables for
    the caller to resolve according to its own defaulting policy.
    ``base_labels`` lets aspect deltas attach edges to nodes of an
    underlying graph without re-declaring them.
    """
    node_ids: dict[str, int] = {}
    edge_ids: dict[str, int] = {}
    nodes: list[Node] = []
    edges: list[Edge] = []
    next_node, next_edge = start_node, start_edge
    for el in elements:
        if isinstance(el, NodeDecl):
            if el.label in node_ids or (base_labels and el.label in base_labels):
                raise ResolveError(f"{where}: duplicate label {el.label!r}")
            node_ids[el.label] = next_node
            try:
                nt = tg.node_type(el.type)
            except GraphError as exc:
                raise ResolveError(f"{where}: {exc}") from None
            given = dict(el.attrs)
            unknown = set(given) - {a.name for a in nt.attrs}
            if unknown:
                raise ResolveError(
                    f"{where}: node {el.label!r} sets unknown "
                    f"attribute(s) {sorted(unknown)}"
                )
            attrs = tuple(
                (a.name, given.get(a.name, Var(f"~u{next_node}.{a.name}")))
                for a in nt.attrs
            )
            nodes.append(Node(next_node, el.type, attrs))
            next_node += 1
        else:
            if el.label in edge_ids:
                raise ResolveError(f"{where}: duplicate label {el.label!r}")
            edge_ids[el.label] = next_edge

            def endpoint(label: str) -> int:
                if label in node_ids:
                    return node_ids[label]
                if base_labels and label in base_labels:
                    return base_labels[label]
                raise ResolveError(
                    f"{where}: edge {el.label!r} references unknown node "
                    f"{label!r}"
                )

            edges.append(Edge(next_edge, el.type, endpoint(el.src), endpoint(el.tgt)))
            next_edge += 1
    return _Built(tuple(nodes), tuple(edges), node_ids, edge_ids)


def _checked_graph(
    built: _Built, tg: TypeGraph, where: str, context_nodes: tuple[Node, ...] = ()
) -> TypedGraph:
    try:
        return TypedGraph(tg, context_nodes + built.nodes, built.edges)
    except GraphError as exc:
        raise ResolveError(f"{where}: {exc}") from None


def _is_placeholder(term: AttrTerm) -> bool:
    return isinstance(term, Var) and term.name.startswith("~u")


def _require_ground(built: _Built, where: str) -> None:
    missing = [
        f"{label}.{attr}"
        for label, nid in sorted(built.node_ids.items(), key=lambda kv: kv[1])
        for node in built.nodes
        if node.id == nid
        for attr, term in node.attrs
        if _is_placeholder(term)
    ]
    if missing:
        raise ResolveError(
            f"{where}: missing attribute value(s): {', '.join(missing)}"
        )


def _resolve_rule_pair(
    name: str,
    left_decls: tuple[ElementDecl, ...],
    right_decls: tuple[ElementDecl, ...],
    tg: TypeGraph,
    where: str,
    *,
    pattern: bool,
    wildcard_prefix: str = "w",
    reserved: frozenset[str] = frozenset(),
) -> Rule:
    """Build a rule from its two element blocks.

    An attribute left unspecified becomes a fresh variable on the left.
    On the right, a preserved node's unspecified attribute copies the
    left-hand term when ``pattern`` is false (rules and effects: the
    value is kept) and stays an independent fresh variable when
    ``pattern`` is true (pointcuts: the value does not matter).
    """
    built_l = _build_elements(left_decls, tg, f"{where} left side")
    built_r = _build_elements(right_decls, tg, f"{where} right side")
    shared = [x for x in built_l.node_ids if x in built_r.node_ids]
    lid_of = {built_r.node_ids[x]: built_l.node_ids[x] for x in shared}

    left_nodes = {n.id: n for n in built_l.nodes}
    fixed_r = []
    for node in built_r.nodes:
        attrs = dict(node.attrs)
        for attr, term in node.attrs:
            if not _is_placeholder(term):
                continue
            if pattern:
                continue
            if node.id in lid_of:
                attrs[attr] = left_nodes[lid_of[node.id]].attr(attr)
            else:
                raise ResolveError(
                    f"{where}: created node must specify attribute {attr!r}"
                )
        fixed_r.append(node.with_attrs(attrs))
    built_r = _Built(tuple(fixed_r), built_r.edges, built_r.node_ids, built_r.edge_ids)

    # Give wildcard slots printable, collision-free variable names.
    used = set(reserved) | {
        name
        for built in (built_l, built_r)
        for node in built.nodes
        for _, term in node.attrs
        for name in term_vars(term)
        if not name.startswith("~u")
    }
    renaming: dict[str, str] = {}
    counter = 0

    def rename_in(built: _Built) -> _Built:
        nonlocal counter
        nodes = []
        for node in built.nodes:
            attrs = {}
            for attr, term in node.attrs:
                if _is_placeholder(term):
                    assert isinstance(term, Var)
                    if term.name not in renaming:
                        while f"{wildcard_prefix}{counter}" in used:
                            counter += 1
                        renaming[term.name] = f"{wildcard_prefix}{counter}"
                        counter += 1
                    attrs[attr] = Var(renaming[term.name])
            nodes.append(node.with_attrs(attrs))
        return _Built(tuple(nodes), built.edges, built.node_ids, built.edge_ids)

    built_l = rename_in(built_l)
    built_r = rename_in(built_r)

    left = _checked_graph(built_l, tg, f"{where} left side")
    right = _checked_graph(built_r, tg, f"{where} right side")
    node_pairs = [(built_l.node_ids[x], built_r.node_ids[x]) for x in shared]
    edge_pairs = [
        (built_l.edge_ids[x], built_r.edge_ids[x])
        for x in built_l.edge_ids
        if x in built_r.edge_ids
    ]
    try:
        return make_rule(name, left, right, node_pairs, edge_pairs)
    except GraphError as exc:
        raise ResolveError(f"{where}: {exc}") from None


def _shared_component_pairs(
    p_labels: dict[str, int], e_labels: dict[str, int]
) -> list[tuple[int, int]]:
    return [
        (p_labels[label], e_labels[label]) for label in p_labels if label in e_labels
    ]


def _build_advice(doc: AdviceDoc, tg: TypeGraph, where: str) -> Advice:
    # Wildcards invented for the pointcut must not collide with any
    # variable of the effect (or vice versa): the weaver substitutes
    # pointcut bindings into effect terms, so an accidental shared name
    # would weld unrelated slots together.
    explicit: set[str] = set()
    for decls in (
        doc.pointcut_left,
        doc.pointcut_right,
        doc.effect_left,
        doc.effect_right,
    ):
        for el in decls:
            if isinstance(el, NodeDecl):
                for _, term in el.attrs:
                    explicit.update(term_vars(term))
    pointcut = _resolve_rule_pair(
        doc.name + ".pointcut",
        doc.pointcut_left,
        doc.pointcut_right,
        tg,
        f"{where} pointcut",
        pattern=True,
        wildcard_prefix="w",
        reserved=frozenset(explicit),
    )
    effect = _resolve_rule_pair(
        doc.name + ".effect",
        doc.effect_left,
        doc.effect_right,
        tg,
        f"{where} effect",
        pattern=False,
        wildcard_prefix="v",
        reserved=frozenset(explicit),
    )
    # Label tables for the overlap: rebuilt here because the rule builder
    # normalises ids the same deterministic way each time.
    pl = _build_elements(doc.pointcut_left, tg, where)
    pr = _build_elements(doc.pointcut_right, tg, where)
    el = _build_elements(doc.effect_left, tg, where)
    er = _build_elements(doc.effect_right, tg, where)
    pk_nodes = {x: pl.node_ids[x] for x in pl.node_ids if x in pr.node_ids}
    ek_nodes = {x: el.node_ids[x] for x in el.node_ids if x in er.node_ids}
    pk_edges = {x: pl.edge_ids[x] for x in pl.edge_ids if x in pr.edge_ids}
    ek_edges = {x: el.edge_ids[x] for x in el.edge_ids if x in er.edge_ids}
    shared_nodes = {
        "left": _shared_component_pairs(pl.node_ids, el.node_ids),
        "interface": _shared_component_pairs(pk_nodes, ek_nodes),
        "right": _shared_component_pairs(pr.node_ids, er.node_ids),
    }
    shared_edges = {
        "left": _shared_component_pairs(pl.edge_ids, el.edge_ids),
        "interface": _shared_component_pairs(pk_edges, ek_edges),
        "right": _shared_component_pairs(pr.edge_ids, er.edge_ids),
    }
    try:
        return make_advice(doc.name, pointcut, effect, shared_nodes, shared_edges)
    except GraphError as exc:
        raise ResolveError(f"{where}: {exc}") from None


def resolve_doc(doc: GrammarDoc) -> AspectedGrammar:
    """Turn a parsed document into a base grammar plus aspects."""
    try:
        tg = TypeGraph(doc.types.nodes, doc.types.edges)
    except GraphError as exc:
        raise ResolveError(f"types: {exc}") from None
    built = _build_elements(doc.graph, tg, "graph")
    _require_ground(built, "graph")
    initial = _checked_graph(built, tg, "graph")
    base_node_labels = built.node_ids
    keys = [r.key for r in doc.rules]
    if len(set(keys)) != len(keys):
        raise ResolveError("duplicate rule name")
    rules = tuple(
        (
            r.key,
            _resolve_rule_pair(
                r.name or r.key, r.left, r.right, tg, f"rule {r.key!r}",
                pattern=False,
            ),
        )
        for r in doc.rules
    )
    base = Grammar(tg, initial, rules)

    aspect_names = [a.name for a in doc.aspects]
    if len(set(aspect_names)) != len(aspect_names):
        raise ResolveError("duplicate aspect name")
    aspects = []
    for aspect_doc in doc.aspects:
        where = f"aspect {aspect_doc.name!r}"
        advice_names = [a.name for a in aspect_doc.advices]
        if len(set(advice_names)) != len(advice_names):
            raise ResolveError(f"{where}: duplicate advice name")
        try:
            aspect_tg = tg.extend(aspect_doc.types.nodes, aspect_doc.types.edges)
        except GraphError as exc:
            raise ResolveError(f"{where}: {exc}") from None
        delta = _build_elements(
            aspect_doc.graph,
            aspect_tg,
            f"{where} graph",
            base_labels=base_node_labels,
            start_node=initial.next_node_id(),
            start_edge=initial.next_edge_id(),
        )
        _require_ground(delta, f"{where} graph")
        # validate the delta against the base state it will be glued onto
        _checked_graph(delta, aspect_tg, f"{where} graph", context_nodes=initial.nodes)
        advices = tuple(
            _build_advice(a, aspect_tg, f"{where} advice {a.name!r}")
            for a in aspect_doc.advices
        )
        aspects.append(
            Aspect(
                aspect_doc.name,
                advices,
                TypeDelta(aspect_doc.types.nodes, aspect_doc.types.edges),
                GraphDelta(delta.nodes, delta.edges),
            )
        )
    return AspectedGrammar(base, tuple(aspects), doc.config)


def parse_grammar(text: str) -> AspectedGrammar:
    """Parse and resolve in one go."""
    return resolve_doc(parse_doc(text))


# ---------------------------------------------------------------------------
# rendering executable objects back to documents


def doc_of_grammar(grammar: Grammar) -> GrammarDoc:
    """A document that resolves back to (an id-relabelled copy of) ``grammar``."""
    graph_decls, _ = _graph_to_decls(grammar.initial)
    rules = []
    for key, rule in grammar.rules:
        left, right = _rule_to_decls(rule)
        rules.append(
            RuleDoc(key, left, right, None if rule.name == key else rule.name)
        )
    return GrammarDoc(
        TypeDecls(grammar.type_graph.node_types, grammar.type_graph.edge_types),
        graph_decls,
        (),
        tuple(rules),
        (),
    )


def _graph_to_decls(
    graph: TypedGraph,
) -> tuple[tuple[ElementDecl, ...], dict[str, int]]:
    decls: list[ElementDecl] = []
    labels: dict[str, int] = {}
    for n in graph.nodes:
        label = f"n{n.id}"
        labels[label] = n.id
        decls.append(NodeDecl(label, n.type, n.attrs))
    for e in graph.edges:
        decls.append(EdgeDecl(f"e{e.id}", e.type, f"n{e.src}", f"n{e.tgt}"))
    return tuple(decls), labels


def _rule_to_decls(
    rule: Rule,
) -> tuple[tuple[ElementDecl, ...], tuple[ElementDecl, ...]]:
    preserved_nodes = {rule.r.node_map[k]: rule.l.node_map[k] for k in rule.interface.node_ids}
    preserved_edges = {rule.r.edge_map[k]: rule.l.edge_map[k] for k in rule.interface.edge_ids}

    def left_node_label(lid: int) -> str:
        return f"n{lid}"

    def right_node_label(rid: int) -> str:
        if rid in preserved_nodes:
            return f"n{preserved_nodes[rid]}"
        return f"m{rid}"

    left: list[ElementDecl] = []
    for n in rule.left.nodes:
        left.append(NodeDecl(left_node_label(n.id), n.type, n.attrs))
    for e in rule.left.edges:
        left.append(
            EdgeDecl(
                f"e{e.id}",
                e.type,
                left_node_label(e.src),
                left_node_label(e.tgt),
            )
        )
    right: list[ElementDecl] = []
    for n in rule.right.nodes:
        right.append(NodeDecl(right_node_label(n.id), n.type, n.attrs))
    for e in rule.right.edges:
        label = f"e{preserved_edges[e.id]}" if e.id in preserved_edges else f"f{e.id}"
        right.append(
            EdgeDecl(
                label,
                e.type,
                right_node_label(e.src),
                right_node_label(e.tgt),
            )
        )
    return tuple(left), tuple(right)
