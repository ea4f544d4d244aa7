"""JSON report documents and their inverses."""

import json

import pytest

from gramweave.aspects import woven_semantics
from gramweave.cpa import analyze_conflicts, analyze_weaving, cross_aspect_interference
from gramweave.encoding import encode_aogg
from gramweave.engine import graph_hash, run_grammar
from gramweave.fixtures import client_server
from gramweave.reports import (
    SCHEMA_VERSION,
    ReportError,
    cpa_to_doc,
    graph_from_doc,
    graph_to_doc,
    grammar_from_doc,
    grammar_to_doc,
    rule_from_doc,
    rule_to_doc,
    term_from_doc,
    term_to_doc,
    trace_to_doc,
    type_graph_from_doc,
    type_graph_to_doc,
    weave_summary_doc,
)
from gramweave.terms import Concat, Lit, RuleName, Var


@pytest.fixture(scope="module")
def aogg():
    return client_server()


@pytest.mark.parametrize(
    "term",
    [
        Lit("text"),
        Lit(7),
        Lit(True),
        Var("story"),
        RuleName(),
        Concat(Var("s"), RuleName(), Lit("!")),
        Concat(Concat(Lit("a"), Lit("b")), Lit("c")),  # nesting survives
    ],
)
def test_terms_roundtrip(term):
    doc = term_to_doc(term)
    assert json.loads(json.dumps(doc)) == doc
    assert term_from_doc(doc) == term


def test_bad_term_doc_rejected():
    with pytest.raises(ReportError):
        term_from_doc({"mystery": 1})


def test_type_graph_roundtrips(aogg):
    tg = aogg.base.type_graph
    assert type_graph_from_doc(type_graph_to_doc(tg)) == tg


def test_graph_roundtrips_through_json(aogg):
    initial = aogg.base.initial
    doc = json.loads(json.dumps(graph_to_doc(initial)))
    assert graph_from_doc(doc, aogg.base.type_graph) == initial


def test_graph_doc_attr_order_is_immaterial(aogg):
    doc = graph_to_doc(aogg.base.initial)
    for n in doc["nodes"]:
        n["attrs"] = dict(reversed(list(n["attrs"].items())))
    assert graph_from_doc(doc, aogg.base.type_graph) == aogg.base.initial


def test_rules_roundtrip(aogg):
    for _, rule in aogg.base.rules:
        doc = json.loads(json.dumps(rule_to_doc(rule)))
        assert rule_from_doc(doc, aogg.base.type_graph) == rule


def test_grammar_roundtrips(aogg):
    doc = json.loads(json.dumps(grammar_to_doc(aogg.base)))
    assert grammar_from_doc(doc) == aogg.base


def test_woven_and_encoded_grammars_roundtrip(aogg):
    # Mangled rule keys and reserved-character type names are plain data
    # to the document format.
    for grammar in (woven_semantics(aogg), encode_aogg(aogg)):
        doc = json.loads(json.dumps(grammar_to_doc(grammar)))
        assert grammar_from_doc(doc) == grammar


def test_schema_and_kind_are_enforced(aogg):
    doc = grammar_to_doc(aogg.base)
    with pytest.raises(ReportError, match="schema"):
        grammar_from_doc({**doc, "schema": SCHEMA_VERSION + 1})
    with pytest.raises(ReportError, match="kind"):
        grammar_from_doc({**doc, "kind": "poem"})


def test_trace_doc(aogg):
    grammar = woven_semantics(aogg)
    trace = run_grammar(grammar, seed=3, max_steps=5)
    doc = trace_to_doc(trace)
    assert json.loads(json.dumps(doc)) == doc
    assert doc["kind"] == "derivation-trace"
    assert doc["seed"] == 3
    assert len(doc["steps"]) == 5
    assert doc["final_hash"] == graph_hash(trace.final)
    assert doc["steps"][-1]["result_hash"] == doc["final_hash"]
    first = doc["steps"][0]
    assert first["rule_key"] == trace.steps[0].rule_key
    assert first["match"]["nodes"]  # the morphism came along
    assert all(isinstance(k, str) for k in first["match"]["nodes"])


def test_cpa_doc(aogg):
    report = analyze_conflicts(aogg.base)
    doc = cpa_to_doc(report)
    assert json.loads(json.dumps(doc)) == doc
    assert doc["kind"] == "cpa-report"
    assert doc["mode"] == "conflicts"
    assert doc["matrix"]["ExecuteSET"]["ExecuteGET"] == 2
    assert doc["matrix"]["SendGET"]["SendSET"] == 0
    # Only nonzero cells carry detail.
    assert set(doc["cells"]) == {
        "ExecuteSET / ExecuteGET",
        "ExecuteSET / ExecuteSET",
    }
    verdicts = doc["cells"]["ExecuteSET / ExecuteSET"][0]["verdicts"]
    assert verdicts[0]["kind"] == "attribute-write-write"
    assert verdicts[0]["attr"] == "value"
    assert "cross_aspect" not in doc


def test_cpa_doc_with_interference(aogg):
    report = analyze_weaving(aogg)
    verdict = cross_aspect_interference(report, aogg)
    doc = cpa_to_doc(report, verdict)
    assert doc["cross_aspect"]["order_independent"] is True
    assert doc["cross_aspect"]["cross_cells"] == []
    assert doc["cross_aspect"]["message"].startswith("order-independent")


def test_weave_summary(aogg):
    woven = woven_semantics(aogg)
    doc = weave_summary_doc(["log", "security"], woven)
    assert json.loads(json.dumps(doc)) == doc
    assert doc["kind"] == "weave-summary"
    assert doc["rule_count"] == 8
    assert len(doc["rules"]) == 8
    assert doc["order"] == ["log", "security"]
