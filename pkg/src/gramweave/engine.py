"""Grammar execution.

A grammar bundles a type graph, a start state, and a registry of rules.
Running it repeatedly picks one applicable (rule, match) pair with a
seeded RNG and applies it, so runs are reproducible bit for bit from
the seed alone.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Optional

from .graphs import GraphError, TypeGraph, TypedGraph
from .rules import Match, Rule, apply_rule, check_rule_applicable, find_matches, validate_rule
from .terms import format_term

#: Run terminated because nothing was applicable any more.
STOPPED_NO_MATCH = "stopped-no-match"
#: Run terminated because it hit the step budget.
STOPPED_STEP_LIMIT = "stopped-step-limit"


@dataclass(frozen=True)
class Grammar:
    """A type graph, a start state, and named rules.

    ``rules`` maps registry keys to rules.  A key identifies the entry
    in this grammar (weaving derives new keys for rule variants); the
    rule's own ``name`` is what execution reports and what the
    rule-name builtin evaluates to.
    """

    type_graph: TypeGraph
    initial: TypedGraph
    rules: tuple[tuple[str, Rule], ...]

    def __post_init__(self) -> None:
        keys = [k for k, _ in self.rules]
        if len(set(keys)) != len(keys):
            raise GraphError("duplicate rule key in grammar")

    @property
    def rule_map(self) -> dict[str, Rule]:
        return dict(self.rules)

    @property
    def rule_keys(self) -> tuple[str, ...]:
        return tuple(k for k, _ in self.rules)

    def rule(self, key: str) -> Rule:
        return self.rule_map[key]


def validate_grammar(grammar: Grammar, *, symbolic: bool = False) -> None:
    if grammar.initial.type_graph != grammar.type_graph:
        raise GraphError("start state is not typed over the grammar's type graph")
    if not symbolic and not grammar.initial.is_ground():
        raise GraphError("start state must carry literal attributes only")
    for key, rule in grammar.rules:
        if rule.left.type_graph != grammar.type_graph:
            raise GraphError(
                f"rule {key!r} is not typed over the grammar's type graph"
            )
        validate_rule(rule, symbolic=symbolic)


@dataclass(frozen=True)
class TraceStep:
    """One applied rewrite in a run."""

    index: int
    rule_key: str
    rule_name: str
    match: Match
    result: TypedGraph


@dataclass(frozen=True)
class DerivationTrace:
    seed: int
    initial: TypedGraph
    steps: tuple[TraceStep, ...]
    status: str

    @property
    def final(self) -> TypedGraph:
        return self.steps[-1].result if self.steps else self.initial

    @property
    def rule_names(self) -> tuple[str, ...]:
        return tuple(s.rule_name for s in self.steps)


def applicable_pairs(
    grammar: Grammar, state: TypedGraph
) -> list[tuple[str, Rule, Match]]:
    """Every (key, rule, match) that passes the gluing check, in order.

    The order is fixed — rules by registry position, matches by the
    enumeration order of the search — which is what makes seeded runs
    reproducible.
    """
    out = []
    for key, rule in grammar.rules:
        for match in find_matches(rule, state):
            if check_rule_applicable(rule, match) is None:
                out.append((key, rule, match))
    return out


def run_grammar(
    grammar: Grammar,
    *,
    seed: int = 0,
    max_steps: int = 100,
    initial: Optional[TypedGraph] = None,
) -> DerivationTrace:
    """Run the grammar until nothing applies or the step budget is spent."""
    state = grammar.initial if initial is None else initial
    rng = random.Random(seed)
    steps: list[TraceStep] = []
    status = STOPPED_STEP_LIMIT
    for index in range(max_steps):
        candidates = applicable_pairs(grammar, state)
        if not candidates:
            status = STOPPED_NO_MATCH
            break
        key, rule, match = rng.choice(candidates)
        step = apply_rule(rule, match)
        state = step.result
        steps.append(TraceStep(index, key, rule.name, match, state))
    return DerivationTrace(seed, grammar.initial if initial is None else initial,
                           tuple(steps), status)


def canonical_text(graph: TypedGraph) -> str:
    """A canonical line-based rendering of a graph, for hashing and diffs."""
    lines = []
    for n in graph.nodes:
        attrs = ", ".join(f"{a}={format_term(t)}" for a, t in n.attrs)
        lines.append(f"node {n.id}:{n.type}{{{attrs}}}")
    for e in graph.edges:
        lines.append(f"edge {e.id}:{e.type} {e.src}->{e.tgt}")
    return "\n".join(lines) + "\n"


def graph_hash(graph: TypedGraph) -> str:
    """SHA-256 of the canonical rendering (id-sensitive, not up to iso)."""
    return hashlib.sha256(canonical_text(graph).encode()).hexdigest()
