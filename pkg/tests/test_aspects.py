import pytest

from gramweave.aspects import (
    Advice,
    Aspect,
    AspectedGrammar,
    GraphDelta,
    IllFormedResult,
    RuleMorphism,
    TypeDelta,
    WeaveError,
    advice_binding,
    apply_advice,
    find_advice_matches,
    grammar_isomorphic,
    make_advice,
    retype_rule,
    rule_isomorphic,
    weave_all,
    weave_aspect,
    woven_semantics,
)
from gramweave.engine import Grammar, run_grammar
from gramweave.graphs import (
    AttrDecl,
    Edge,
    EdgeType,
    Node,
    NodeType,
    TypedGraph,
)
from gramweave.rules import apply_rule, find_matches, make_rule
from gramweave.terms import Concat, Lit, RuleName, Var

from conftest import node


@pytest.fixture
def base_grammar(tiny_types):
    """Two rules: relabel an A in place, or consume an A through its edge."""
    relabel = make_rule(
        "relabel",
        TypedGraph(tiny_types, (node(0, "A", tag="?t"),)),
        TypedGraph(tiny_types, (node(0, "A", tag=Concat(Var("t"), Lit("!"))),)),
        [(0, 0)],
    )
    consume = make_rule(
        "consume",
        TypedGraph(
            tiny_types,
            (node(0, "A", tag="?t"), Node(1, "B")),
            (Edge(0, "ab", 0, 1),),
        ),
        TypedGraph(tiny_types, (Node(1, "B"),)),
        [(1, 1)],
    )
    initial = TypedGraph(
        tiny_types,
        (node(0, "A", tag="go"), Node(1, "B")),
        (Edge(0, "ab", 0, 1),),
    )
    return Grammar(
        tiny_types, initial, (("relabel", relabel), ("consume", consume))
    )


@pytest.fixture
def journal_aspect(tiny_types):
    """Empty pointcut; the effect threads a journal node through every rule."""
    log_tg = tiny_types.extend(
        (NodeType("Journal", (AttrDecl("story", "string"),)),)
    )
    empty = TypedGraph(log_tg)
    pointcut = make_rule("pc", empty, empty, [])
    effect = make_rule(
        "eff",
        TypedGraph(log_tg, (node(0, "Journal", story="?s"),)),
        TypedGraph(
            log_tg,
            (node(0, "Journal", story=Concat(Var("s"), RuleName())),),
        ),
        [(0, 0)],
    )
    advice = make_advice("trace", pointcut, effect, {})
    delta = TypeDelta(
        node_types=(NodeType("Journal", (AttrDecl("story", "string"),)),)
    )
    seed = GraphDelta(nodes=(node(50, "Journal", story=""),))
    return Aspect("journal", (advice,), delta, seed)


@pytest.fixture
def sprout_aspect(tiny_types):
    """Whenever a rule preserves an A, it now also sprouts a B off it.

    The pointcut binds the two sides of the tag to different variables,
    so it does not care whether the matched rule rewrites the tag.
    """
    pointcut = make_rule(
        "pc",
        TypedGraph(tiny_types, (node(0, "A", tag="?x"),)),
        TypedGraph(tiny_types, (node(0, "A", tag="?y"),)),
        [(0, 0)],
    )
    effect = make_rule(
        "eff",
        TypedGraph(tiny_types, (node(0, "A", tag="?x"),)),
        TypedGraph(
            tiny_types,
            (node(0, "A", tag="?y"), Node(1, "B")),
            (Edge(0, "ab", 0, 1),),
        ),
        [(0, 0)],
    )
    advice = make_advice(
        "sprout",
        pointcut,
        effect,
        {"left": [(0, 0)], "interface": [(0, 0)], "right": [(0, 0)]},
    )
    return Aspect("sprout", (advice,))


def test_advice_matching_requires_preservation(base_grammar, sprout_aspect):
    advice = sprout_aspect.advices[0]
    relabel = base_grammar.rule("relabel")
    consume = base_grammar.rule("consume")
    assert len(find_advice_matches(advice, relabel)) == 1
    # consume deletes its A, so the pointcut's preserved A cannot land
    assert find_advice_matches(advice, consume) == []


def test_advice_binding_recovers_terms(base_grammar, sprout_aspect):
    advice = sprout_aspect.advices[0]
    rm = find_advice_matches(advice, base_grammar.rule("relabel"))[0]
    assert advice_binding(rm) == {
        "x": Var("t"),
        "y": Concat(Var("t"), Lit("!")),
    }


def test_empty_pointcut_matches_every_rule_once(base_grammar, journal_aspect):
    advice = journal_aspect.advices[0]
    for key in ("relabel", "consume"):
        rule = retype_rule(
            base_grammar.rule(key), advice.pointcut.left.type_graph
        )
        assert len(find_advice_matches(advice, rule)) == 1


def test_weave_journal_threads_state(base_grammar, journal_aspect):
    woven = weave_aspect(base_grammar, journal_aspect)
    assert woven.rule_keys == ("relabel@trace#0", "consume@trace#0")
    rule = woven.rule("relabel@trace#0")
    # execution name survives weaving
    assert rule.name == "relabel"
    journal_nodes = [n for n in rule.left.nodes if n.type == "Journal"]
    assert len(journal_nodes) == 1
    # the journal node is preserved and rewritten
    jid = journal_nodes[0].id
    assert jid in rule.l.node_map.values()
    right_journal = [n for n in rule.right.nodes if n.type == "Journal"][0]
    assert right_journal.attr("story") == Concat(Var("s"), RuleName())
    # the seeded start state carries the journal
    assert any(n.type == "Journal" for n in woven.initial.nodes)


def test_woven_journal_runs_and_records(base_grammar, journal_aspect):
    woven = weave_aspect(base_grammar, journal_aspect)
    trace = run_grammar(woven, seed=3, max_steps=4)
    story = next(
        n.attr("story") for n in trace.final.nodes if n.type == "Journal"
    )
    assert story == Lit("".join(trace.rule_names))
    assert len(trace.rule_names) > 0


def test_weave_sprout_touches_only_preserving_rules(base_grammar, sprout_aspect):
    woven = weave_aspect(base_grammar, sprout_aspect)
    assert woven.rule_keys == ("relabel@sprout#0", "consume")
    sprouted = woven.rule("relabel@sprout#0")
    assert len(sprouted.created_node_ids) == 1
    host = TypedGraph(
        base_grammar.type_graph, (node(0, "A", tag="hey"),)
    )
    step = apply_rule(sprouted, find_matches(sprouted, host)[0])
    assert step.result.node(0).attr("tag") == Lit("hey!")
    assert [n.type for n in step.result.nodes] == ["A", "B"]
    assert len(step.result.edges) == 1


def test_weave_freshens_colliding_effect_variables(base_grammar, tiny_types):
    # effect's private variable is named like the rule's own
    log_tg = tiny_types.extend(
        (NodeType("Journal", (AttrDecl("story", "string"),)),)
    )
    empty = TypedGraph(log_tg)
    pointcut = make_rule("pc", empty, empty, [])
    effect = make_rule(
        "eff",
        TypedGraph(log_tg, (node(0, "Journal", story="?t"),)),
        TypedGraph(log_tg, (node(0, "Journal", story=Concat(Var("t"), Lit("."))),)),
        [(0, 0)],
    )
    aspect = Aspect(
        "j",
        (make_advice("mark", pointcut, effect, {}),),
        TypeDelta(node_types=(NodeType("Journal", (AttrDecl("story", "string"),)),)),
    )
    woven = weave_aspect(base_grammar, aspect)
    rule = woven.rule("relabel@mark#0")
    story = next(
        n.attr("story") for n in rule.left.nodes if n.type == "Journal"
    )
    assert story == Var("t_1")
    # the rule's own variable is untouched
    a_node = next(n for n in rule.left.nodes if n.type == "A")
    assert a_node.attr("tag") == Var("t")


def test_apply_advice_reports_ill_formed_weave(tiny_types):
    # the advice deletes a B that the target rule still hangs an edge on
    pc_left = TypedGraph(
        tiny_types,
        (node(0, "A", tag="?x"), Node(1, "B")),
        (Edge(0, "ab", 0, 1),),
    )
    pc_keep = TypedGraph(tiny_types, (node(0, "A", tag="?x"),))
    pointcut = make_rule("pc", pc_left, pc_keep, [(0, 0)])
    effect = make_rule("eff", pc_keep, pc_keep, [(0, 0)])
    advice = make_advice(
        "strip",
        pointcut,
        effect,
        {"left": [(0, 0)], "interface": [(0, 0)], "right": [(0, 0)]},
    )
    # target rule: left also has a second edge at the same B
    rule_left = TypedGraph(
        tiny_types,
        (node(0, "A", tag="?t"), Node(1, "B")),
        (Edge(0, "ab", 0, 1), Edge(1, "loop", 1, 1)),
    )
    rule_right = TypedGraph(tiny_types, (node(0, "A", tag="?t"),))
    rule = make_rule("target", rule_left, rule_right, [(0, 0)])
    matches = find_advice_matches(advice, rule)
    assert len(matches) == 1
    outcome = apply_advice(advice, matches[0])
    assert isinstance(outcome, IllFormedResult)
    with pytest.raises(WeaveError):
        weave_aspect(
            Grammar(tiny_types, TypedGraph(tiny_types), (("target", rule),)),
            Aspect("broken", (advice,)),
        )


def test_weave_all_order_independence(base_grammar, journal_aspect, sprout_aspect):
    one = weave_all(base_grammar, [journal_aspect, sprout_aspect])
    other = weave_all(
        base_grammar,
        [journal_aspect, sprout_aspect],
        order=["sprout", "journal"],
    )
    assert grammar_isomorphic(one, other)
    assert not grammar_isomorphic(one, base_grammar)
    semantics = woven_semantics(
        AspectedGrammar(base_grammar, (journal_aspect, sprout_aspect))
    )
    assert grammar_isomorphic(one, semantics)


def test_weave_all_rejects_bad_order(base_grammar, journal_aspect):
    with pytest.raises(WeaveError):
        weave_all(base_grammar, [journal_aspect], order=["journal", "ghost"])


class TestRuleIsomorphic:
    def test_var_and_id_renaming(self, tiny_types):
        r1 = make_rule(
            "a",
            TypedGraph(tiny_types, (node(0, "A", tag="?t"),)),
            TypedGraph(tiny_types, (node(0, "A", tag=Concat(Var("t"), Lit("!"))),)),
            [(0, 0)],
        )
        r2 = make_rule(
            "b",
            TypedGraph(tiny_types, (node(7, "A", tag="?u"),)),
            TypedGraph(tiny_types, (node(3, "A", tag=Concat(Var("u"), Lit("!"))),)),
            [(7, 3)],
        )
        assert rule_isomorphic(r1, r2)

    def test_literal_mismatch(self, tiny_types):
        r1 = make_rule(
            "a",
            TypedGraph(tiny_types, (node(0, "A", tag="x"),)),
            TypedGraph(tiny_types, (node(0, "A", tag="x"),)),
            [(0, 0)],
        )
        r2 = make_rule(
            "a",
            TypedGraph(tiny_types, (node(0, "A", tag="y"),)),
            TypedGraph(tiny_types, (node(0, "A", tag="y"),)),
            [(0, 0)],
        )
        assert not rule_isomorphic(r1, r2)

    def test_variable_bijection_is_consistent(self, tiny_types):
        # ?a/?b collapsing onto one variable is not a renaming
        two_vars = make_rule(
            "a",
            TypedGraph(
                tiny_types, (node(0, "A", tag="?a"), node(1, "A", tag="?b"))
            ),
            TypedGraph(
                tiny_types, (node(0, "A", tag="?a"), node(1, "A", tag="?b"))
            ),
            [(0, 0), (1, 1)],
        )
        one_var = make_rule(
            "a",
            TypedGraph(
                tiny_types, (node(0, "A", tag="?c"), node(1, "A", tag="?c"))
            ),
            TypedGraph(
                tiny_types, (node(0, "A", tag="?c"), node(1, "A", tag="?c"))
            ),
            [(0, 0), (1, 1)],
        )
        assert not rule_isomorphic(two_vars, one_var)
        assert not rule_isomorphic(one_var, two_vars)

    def test_preservation_structure_matters(self, tiny_types):
        keep = make_rule(
            "a",
            TypedGraph(tiny_types, (Node(0, "B"),)),
            TypedGraph(tiny_types, (Node(0, "B"),)),
            [(0, 0)],
        )
        swap = make_rule(
            "a",
            TypedGraph(tiny_types, (Node(0, "B"),)),
            TypedGraph(tiny_types, (Node(0, "B"),)),
            [],
        )
        assert not rule_isomorphic(keep, swap)


def test_grammar_isomorphic_ignores_rule_order(base_grammar, tiny_types):
    flipped = Grammar(
        tiny_types, base_grammar.initial, tuple(reversed(base_grammar.rules))
    )
    assert grammar_isomorphic(base_grammar, flipped)
    smaller = Grammar(tiny_types, base_grammar.initial, base_grammar.rules[:1])
    assert not grammar_isomorphic(base_grammar, smaller)
