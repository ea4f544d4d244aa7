"""Attribute terms attached to graph nodes.

A term is either a literal value, a variable, a concatenation of string
terms, or the nullary ``RuleName`` builtin that evaluates to the name of
the rule being applied.  Rule graphs carry arbitrary terms; concrete host
graphs carry literals only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

#: Attribute sorts supported by type graphs.
SORTS = ("string", "int", "bool")


@dataclass(frozen=True)
class Lit:
    """A literal of one of the supported sorts."""

    value: Union[str, int, bool]

    @property
    def sort(self) -> str:
        if isinstance(self.value, bool):
            return "bool"
        if isinstance(self.value, int):
            return "int"
        return "string"

    def __repr__(self) -> str:
        return f"Lit({self.value!r})"


@dataclass(frozen=True)
class Var:
    """A named variable, bound during matching."""

    name: str

    def __repr__(self) -> str:
        return f"Var({self.name!r})"


@dataclass(frozen=True)
class Concat:
    """String concatenation of sub-terms (all string-sorted)."""

    parts: tuple["AttrTerm", ...]

    def __init__(self, *parts: "AttrTerm") -> None:
        # Accept both Concat(a, b) and Concat(*[a, b]).
        object.__setattr__(self, "parts", tuple(parts))

    def __repr__(self) -> str:
        return f"Concat({', '.join(repr(p) for p in self.parts)})"


@dataclass(frozen=True)
class RuleName:
    """Nullary builtin: the name of the rule being applied."""

    def __repr__(self) -> str:
        return "RuleName()"


AttrTerm = Union[Lit, Var, Concat, RuleName]


def term_vars(term: AttrTerm) -> Iterator[str]:
    """Yield variable names occurring in ``term`` (with repetition)."""
    if isinstance(term, Var):
        yield term.name
    elif isinstance(term, Concat):
        for part in term.parts:
            yield from term_vars(part)


def is_ground(term: AttrTerm) -> bool:
    """True when the term contains no variables and no RuleName."""
    if isinstance(term, Lit):
        return True
    if isinstance(term, (Var, RuleName)):
        return False
    return all(is_ground(p) for p in term.parts)


def substitute(term: AttrTerm, binding: Mapping[str, AttrTerm]) -> AttrTerm:
    """Replace bound variables in ``term`` by their binding images."""
    if isinstance(term, Var):
        return binding.get(term.name, term)
    if isinstance(term, Concat):
        return Concat(*(substitute(p, binding) for p in term.parts))
    return term


def evaluate(term: AttrTerm, binding: Mapping[str, AttrTerm], rule_name: str) -> Lit:
    """Fully evaluate ``term`` under ``binding`` for a concrete application.

    RuleName resolves to ``rule_name``.  Raises :class:`UnboundVarError`
    when a variable has no binding and :class:`SortError` when a
    concatenation receives a non-string piece.
    """
    resolved = substitute(term, binding)
    return _fold(resolved, rule_name)


def _fold(term: AttrTerm, rule_name: str) -> Lit:
    if isinstance(term, Lit):
        return term
    if isinstance(term, RuleName):
        return Lit(rule_name)
    if isinstance(term, Var):
        raise UnboundVarError(term.name)
    pieces = []
    for part in term.parts:
        lit = _fold(part, rule_name)
        if lit.sort != "string":
            raise SortError(f"concat of non-string literal {lit.value!r}")
        pieces.append(lit.value)
    return Lit("".join(pieces))


def match_term(
    pattern: AttrTerm, subject: AttrTerm, binding: dict[str, AttrTerm]
) -> bool:
    """One-way structural matching of ``pattern`` against ``subject``.

    Variables in the pattern bind to whole sub-terms of the subject;
    ``binding`` is extended in place.  Subject variables are treated as
    opaque constants, which makes the same routine usable both for
    matching rule sides against concrete states and for matching
    patterns against other rules.
    """
    if isinstance(pattern, Var):
        seen = binding.get(pattern.name)
        if seen is None:
            binding[pattern.name] = subject
            return True
        return seen == subject
    if isinstance(pattern, Lit):
        return pattern == subject
    if isinstance(pattern, RuleName):
        return isinstance(subject, RuleName)
    if not isinstance(subject, Concat) or len(subject.parts) != len(pattern.parts):
        return False
    return all(
        match_term(p, s, binding) for p, s in zip(pattern.parts, subject.parts)
    )


def rename_vars(term: AttrTerm, renaming: Mapping[str, str]) -> AttrTerm:
    """Rename variables according to ``renaming`` (missing names kept)."""
    if isinstance(term, Var):
        return Var(renaming.get(term.name, term.name))
    if isinstance(term, Concat):
        return Concat(*(rename_vars(p, renaming) for p in term.parts))
    return term


def format_term(term: AttrTerm) -> str:
    """Render a term in the grammar text format."""
    if isinstance(term, Lit):
        if isinstance(term.value, bool):
            return "true" if term.value else "false"
        if isinstance(term.value, int):
            return str(term.value)
        return '"' + term.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(term, Var):
        return "?" + term.name
    if isinstance(term, RuleName):
        return "rulename()"
    return " + ".join(format_term(p) for p in term.parts)


class TermError(Exception):
    """Base class for attribute term errors."""


class UnboundVarError(TermError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unbound variable ?{name}")
        self.name = name


class SortError(TermError):
    pass


def vars_of_terms(terms: Iterable[AttrTerm]) -> set[str]:
    out: set[str] = set()
    for t in terms:
        out.update(term_vars(t))
    return out
