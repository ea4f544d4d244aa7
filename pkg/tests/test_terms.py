import pytest
from hypothesis import given, strategies as st

from gramweave.terms import (
    Concat,
    Lit,
    RuleName,
    SortError,
    UnboundVarError,
    Var,
    evaluate,
    format_term,
    is_ground,
    match_term,
    rename_vars,
    substitute,
    term_vars,
)


def test_lit_sorts():
    assert Lit("hi").sort == "string"
    assert Lit(3).sort == "int"
    assert Lit(True).sort == "bool"
    # bool is an int subclass in Python; make sure we do not confuse them
    assert Lit(False).sort == "bool"


def test_term_vars_collects_nested():
    t = Concat(Var("a"), Concat(Lit("-"), Var("b")), Var("a"))
    assert sorted(term_vars(t)) == ["a", "a", "b"]


def test_is_ground():
    assert is_ground(Lit("x"))
    assert is_ground(Concat(Lit("a"), Lit("b")))
    assert not is_ground(Var("v"))
    assert not is_ground(RuleName())
    assert not is_ground(Concat(Lit("a"), Var("v")))


def test_substitute_leaves_unbound():
    t = Concat(Var("a"), Var("b"))
    out = substitute(t, {"a": Lit("A")})
    assert out == Concat(Lit("A"), Var("b"))


def test_evaluate_concat_and_rulename():
    t = Concat(Var("s"), RuleName())
    got = evaluate(t, {"s": Lit("log:")}, "Step")
    assert got == Lit("log:Step")


def test_evaluate_unbound_raises():
    with pytest.raises(UnboundVarError):
        evaluate(Var("missing"), {}, "r")


def test_evaluate_concat_rejects_int_piece():
    with pytest.raises(SortError):
        evaluate(Concat(Lit("n="), Var("n")), {"n": Lit(4)}, "r")


class TestMatchTerm:
    def test_var_binds_whole_subject(self):
        binding = {}
        assert match_term(Var("x"), Concat(Lit("a"), Var("q")), binding)
        assert binding["x"] == Concat(Lit("a"), Var("q"))

    def test_var_rebind_must_agree(self):
        binding = {"x": Lit("a")}
        assert match_term(Var("x"), Lit("a"), binding)
        assert not match_term(Var("x"), Lit("b"), binding)

    def test_lit_needs_equal_lit(self):
        assert match_term(Lit(1), Lit(1), {})
        assert not match_term(Lit(1), Lit(2), {})
        assert not match_term(Lit(1), Var("v"), {})

    def test_rulename_matches_rulename_only(self):
        assert match_term(RuleName(), RuleName(), {})
        assert not match_term(RuleName(), Lit("r"), {})

    def test_concat_is_structural(self):
        binding = {}
        pat = Concat(Var("a"), Lit("!"))
        assert match_term(pat, Concat(Lit("hey"), Lit("!")), binding)
        assert binding == {"a": Lit("hey")}
        assert not match_term(pat, Lit("hey!"), {})


def test_rename_vars():
    t = Concat(Var("a"), Var("b"))
    assert rename_vars(t, {"a": "z"}) == Concat(Var("z"), Var("b"))


@given(st.text(alphabet=st.characters(codec="ascii"), max_size=20))
def test_format_string_lit_is_quoted(s):
    rendered = format_term(Lit(s))
    assert rendered.startswith('"') and rendered.endswith('"')


def test_format_examples():
    assert format_term(Lit(7)) == "7"
    assert format_term(Lit(True)) == "true"
    assert format_term(Var("v")) == "?v"
    assert format_term(Concat(Var("s"), RuleName())) == "?s + rulename()"
    assert format_term(Lit('say "hi"')) == '"say \\"hi\\""'
