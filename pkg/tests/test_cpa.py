"""Interference matrices, and the overlap search underneath them."""

import pytest

from gramweave.cpa import (
    MAX_OVERLAPS_ENV,
    analyze_conflicts,
    analyze_dependencies,
    analyze_weaving,
    cross_aspect_interference,
    enumerate_overlaps,
    _read_slots,
    _written_slots,
)
from gramweave.engine import Grammar
from gramweave.fixtures import client_server, client_server_text
from gramweave.graphs import Edge, Node, TypedGraph, empty_graph
from gramweave.parser import parse_grammar
from gramweave.rules import make_rule
from gramweave.terms import Concat, Lit, Var

from conftest import node


def grammar_of(tg, *rules):
    return Grammar(tg, empty_graph(tg), tuple((r.name, r) for r in rules))


class TestOverlapEnumeration:
    def test_two_loose_nodes_give_six_overlaps(self, tiny_types):
        """Partial injections between {b0,b1} and {b0,b1}: 4 singles, 2 doubles."""
        pair = TypedGraph(tiny_types, (Node(0, "B"), Node(1, "B")))
        assert len(enumerate_overlaps(pair, pair)) == 6

    def test_single_edge_path_gives_seven(self, tiny_types):
        path = TypedGraph(
            tiny_types, (Node(0, "B"), Node(1, "B")), (Edge(0, "loop", 0, 1),)
        )
        # 4 single-node overlaps, 2 double-node ones, and only the
        # direction-preserving double can additionally share the edge.
        assert len(enumerate_overlaps(path, path)) == 7

    def test_mixed_types_prune_the_search(self, tiny_types):
        ab = TypedGraph(
            tiny_types,
            (node(0, "A", tag="?t"), Node(1, "B")),
            (Edge(0, "ab", 0, 1),),
        )
        # a~a, b~b, both, both plus the edge.
        assert len(enumerate_overlaps(ab, ab)) == 4

    def test_disjoint_types_share_nothing(self, tiny_types):
        just_a = TypedGraph(tiny_types, (node(0, "A", tag="?t"),))
        just_b = TypedGraph(tiny_types, (Node(0, "B"),))
        assert enumerate_overlaps(just_a, just_b) == []

    def test_overlap_structure(self, tiny_types):
        path = TypedGraph(
            tiny_types, (Node(0, "B"), Node(1, "B")), (Edge(0, "loop", 0, 1),)
        )
        overlaps = enumerate_overlaps(path, path)
        for o in overlaps:
            assert o.shared_nodes or o.shared_edges
            # Side 1 embeds by identity, side 2 totally.
            assert all(o.m1.map_node(n.id) == n.id for n in path.nodes)
            assert sorted(o.m2.node_map) == [0, 1]
        full = [o for o in overlaps if len(o.shared_edges) == 1]
        assert len(full) == 1
        assert len(full[0].glue.nodes) == 2
        assert len(full[0].glue.edges) == 1
        half = [o for o in overlaps if len(o.shared_nodes) == 1]
        assert all(len(o.glue.nodes) == 3 and len(o.glue.edges) == 2 for o in half)

    def test_enumeration_cap(self, tiny_types):
        pair = TypedGraph(tiny_types, (Node(0, "B"), Node(1, "B")))
        with pytest.raises(OverflowError, match=MAX_OVERLAPS_ENV):
            enumerate_overlaps(pair, pair, max_overlaps=3)


class TestFootprints:
    def test_rewritten_slot_is_a_write(self, tiny_types):
        left = TypedGraph(tiny_types, (node(0, "A", tag="?t"),))
        right = TypedGraph(
            tiny_types, (node(0, "A", tag=Concat(Var("t"), Lit("!"))),)
        )
        shout = make_rule("shout", left, right, [(0, 0)])
        by_left, by_right = _written_slots(shout)
        assert by_left == {(0, "tag")}
        assert by_right == {(0, "tag")}
        # The old value feeds the new one, so the slot is also read.
        assert _read_slots(shout) == {(0, "tag")}

    def test_wildcard_slot_is_neither(self, tiny_types):
        side = TypedGraph(tiny_types, (node(0, "A", tag="?t"),))
        probe = make_rule("probe", side, side, [(0, 0)])
        by_left, by_right = _written_slots(probe)
        assert by_left == set() and by_right == set()
        assert _read_slots(probe) == set()

    def test_literal_slot_is_a_read(self, tiny_types):
        side = TypedGraph(tiny_types, (node(0, "A", tag="x"),))
        check = make_rule("check", side, side, [(0, 0)])
        assert _read_slots(check) == {(0, "tag")}


@pytest.fixture
def eat(tiny_types):
    left = TypedGraph(tiny_types, (Node(0, "B"),))
    return make_rule("eat", left, empty_graph(tiny_types), [])


class TestSmallConflictMatrices:
    def test_identity_overlap_does_not_make_a_rule_race_itself(
        self, tiny_types, eat
    ):
        report = analyze_conflicts(grammar_of(tiny_types, eat))
        assert report.mode == "conflicts"
        assert report.count("eat", "eat") == 0

    def test_same_rule_under_two_keys_does_race(self, tiny_types, eat):
        grammar = Grammar(
            tiny_types, empty_graph(tiny_types), (("one", eat), ("two", eat))
        )
        report = analyze_conflicts(grammar)
        # The only overlap is the full one, which is no longer "the same
        # application" once the registry names it twice.
        assert report.count("one", "two") == 1
        assert report.count("two", "one") == 1
        assert report.count("one", "one") == 0
        (analysis,) = report.cells[("one", "two")]
        assert [v.kind for v in analysis.verdicts] == ["delete-use"]

    def test_deletion_blocked_by_dangling_context_is_not_counted(
        self, tiny_types, eat
    ):
        looped = TypedGraph(
            tiny_types, (Node(0, "B"),), (Edge(0, "loop", 0, 0),)
        )
        spin = make_rule("spin", looped, looped, [(0, 0)], [(0, 0)])
        bare = TypedGraph(tiny_types, (Node(0, "B"),))
        keep = make_rule("keep", bare, bare, [(0, 0)])
        report = analyze_conflicts(grammar_of(tiny_types, eat, spin, keep))
        # eat cannot fire on spin's node at all: removing it would leave
        # the loop dangling, so there is no pair of applications to race.
        assert report.count("eat", "spin") == 0
        assert report.count("eat", "keep") == 1

    def test_unmatchable_literals_prune_attribute_conflicts(self, tiny_types):
        def painter(name, left_term):
            left = TypedGraph(tiny_types, (node(0, "A", tag=left_term),))
            right = TypedGraph(tiny_types, (node(0, "A", tag="z"),))
            return make_rule(name, left, right, [(0, 0)])

        want_y = TypedGraph(tiny_types, (node(0, "A", tag="y"),))
        reader = make_rule("want_y", want_y, want_y, [(0, 0)])
        grammar = grammar_of(
            tiny_types, painter("paint_x", Lit("x")), painter("paint", Var("t")), reader
        )
        report = analyze_conflicts(grammar)
        # "x" and "y" can never be the same stored value.
        assert report.count("paint_x", "want_y") == 0
        assert report.count("paint", "want_y") == 1
        (analysis,) = report.cells[("paint", "want_y")]
        assert analysis.verdicts == (
            analysis.verdicts[0].__class__("attribute-write-read", "node", 0, "tag"),
        )
        assert report.count("paint_x", "paint") == 1  # write/write race

    def test_unobserved_slot_is_not_a_read(self, tiny_types):
        side = TypedGraph(tiny_types, (node(0, "A", tag="?t"),))
        probe = make_rule("probe", side, side, [(0, 0)])
        left = TypedGraph(tiny_types, (node(0, "A", tag="?t"),))
        right = TypedGraph(tiny_types, (node(0, "A", tag="z"),))
        paint = make_rule("paint", left, right, [(0, 0)])
        copier_right = TypedGraph(
            tiny_types, (node(0, "A", tag="?t"), node(1, "A", tag="?t"))
        )
        copier = make_rule("copier", left, copier_right, [(0, 0)])
        report = analyze_conflicts(grammar_of(tiny_types, probe, paint, copier))
        # probe binds ?t but never uses it; copier propagates it.
        assert report.count("paint", "probe") == 0
        assert report.count("paint", "copier") == 1

    def test_truncation_is_reported(self, tiny_types, monkeypatch):
        two = TypedGraph(tiny_types, (Node(0, "B"), Node(1, "B")))
        gobble = make_rule("gobble", two, empty_graph(tiny_types), [])
        grammar = grammar_of(tiny_types, gobble)

        report = analyze_conflicts(grammar, max_overlaps=2)
        assert report.truncated == {("gobble", "gobble"): 2}
        assert report.count("gobble", "gobble") <= 2

        monkeypatch.setenv(MAX_OVERLAPS_ENV, "2")
        assert analyze_conflicts(grammar).truncated == {("gobble", "gobble"): 2}

        monkeypatch.delenv(MAX_OVERLAPS_ENV)
        full = analyze_conflicts(grammar)
        assert full.truncated == {}
        # Six overlaps minus the identity one.
        assert full.count("gobble", "gobble") == 5


class TestSmallDependencyMatrices:
    def test_producing_feeds_consuming_one_way(self, tiny_types, eat):
        made = TypedGraph(tiny_types, (Node(0, "B"),))
        spawn = make_rule("spawn", empty_graph(tiny_types), made, [])
        report = analyze_dependencies(grammar_of(tiny_types, spawn, eat))
        assert report.mode == "dependencies"
        assert report.count("spawn", "eat") == 1
        assert report.count("eat", "spawn") == 0
        (analysis,) = report.cells[("spawn", "eat")]
        assert [v.kind for v in analysis.verdicts] == ["produce-use"]

    def test_written_value_feeds_a_reader(self, tiny_types):
        left = TypedGraph(tiny_types, (node(0, "A", tag="?t"),))
        right = TypedGraph(tiny_types, (node(0, "A", tag="z"),))
        paint = make_rule("paint", left, right, [(0, 0)])
        want_z = TypedGraph(tiny_types, (node(0, "A", tag="z"),))
        reader = make_rule("want_z", want_z, want_z, [(0, 0)])
        report = analyze_dependencies(grammar_of(tiny_types, paint, reader))
        assert report.count("paint", "want_z") == 1
        (analysis,) = report.cells[("paint", "want_z")]
        assert [v.kind for v in analysis.verdicts] == ["attribute-write-read"]


@pytest.fixture(scope="module")
def fixture_conflicts():
    return analyze_conflicts(client_server().base)


@pytest.fixture(scope="module")
def fixture_dependencies():
    return analyze_dependencies(client_server().base)


class TestFixtureConflicts:
    def test_only_the_store_writer_conflicts(self, fixture_conflicts):
        assert fixture_conflicts.nonzero() == {
            ("ExecuteSET", "ExecuteGET"),
            ("ExecuteSET", "ExecuteSET"),
        }
        assert fixture_conflicts.truncated == {}

    def test_set_disturbs_get_through_the_stored_value(self, fixture_conflicts):
        cell = fixture_conflicts.cells[("ExecuteSET", "ExecuteGET")]
        # Sharing just the record, or the record plus the client.
        assert len(cell) == 2
        for analysis in cell:
            assert {(v.kind, v.attr) for v in analysis.verdicts} == {
                ("attribute-write-read", "value")
            }

    def test_two_sets_race_on_the_record(self, fixture_conflicts):
        cell = fixture_conflicts.cells[("ExecuteSET", "ExecuteSET")]
        assert len(cell) == 2
        for analysis in cell:
            assert {(v.kind, v.attr) for v in analysis.verdicts} == {
                ("attribute-write-write", "value")
            }

    def test_message_consumers_do_not_conflict(self, fixture_conflicts):
        # Every message-deleting overlap leaves the other application's
        # reply or queue edge dangling, so no consuming pair survives;
        # the full self-overlaps are one application, not a race.
        for cell in [
            ("ExecuteGET", "ExecuteGET"),
            ("ExecuteGET", "SendGET"),
            ("SendGET", "SendGET"),
            ("SendGET", "SendSET"),
            ("ReceiveGET", "ReceiveGET"),
            ("ReceiveSET", "ReceiveSET"),
        ]:
            assert fixture_conflicts.count(*cell) == 0


class TestFixtureDependencies:
    def test_request_reply_chains(self, fixture_dependencies):
        assert fixture_dependencies.nonzero() == {
            ("SendGET", "ExecuteGET"),
            ("ExecuteGET", "ReceiveGET"),
            ("SendSET", "ExecuteSET"),
            ("ExecuteSET", "ReceiveSET"),
            ("ExecuteSET", "ExecuteGET"),
        }

    def test_send_provides_the_reply_edge(self, fixture_dependencies):
        (analysis,) = fixture_dependencies.cells[("SendGET", "ExecuteGET")]
        assert [(v.kind, v.subject) for v in analysis.verdicts] == [
            ("produce-use", "edge")
        ]

    def test_execute_provides_the_answer_message(self, fixture_dependencies):
        (analysis,) = fixture_dependencies.cells[("ExecuteGET", "ReceiveGET")]
        kinds = {(v.kind, v.subject) for v in analysis.verdicts}
        assert ("produce-use", "node") in kinds

    def test_set_feeds_get_via_the_stored_value(self, fixture_dependencies):
        cell = fixture_dependencies.cells[("ExecuteSET", "ExecuteGET")]
        assert len(cell) == 2
        for analysis in cell:
            assert {(v.kind, v.attr) for v in analysis.verdicts} == {
                ("attribute-write-read", "value")
            }

    def test_chains_do_not_cross(self, fixture_dependencies):
        # A GET send can never enable a SET execution or vice versa: the
        # message types disagree on both sides of the hand-off.
        assert fixture_dependencies.count("SendGET", "ExecuteSET") == 0
        assert fixture_dependencies.count("SendSET", "ExecuteGET") == 0


DELETING_ASPECT = """
aspect drop {
  advice kill {
    pointcut {
      left {
        c: Client { id = ?cid }
        m: Message { type = ?t, name = ?n, value = ?v }
        q: queued c -> m
      }
      right {
        c: Client { id = ?cid }
        m: Message { type = ?t, name = ?n, value = ?v }
      }
    }
    effect {
      left {
        c: Client { id = ?cid }
      }
      right {
        c: Client { id = ?cid }
      }
    }
  }
}
"""


class TestWeavingAnalysis:
    def test_fixture_advices_never_collide(self):
        aspected = client_server()
        report = analyze_weaving(aspected)
        assert report.keys == ("log.trace", "security.read", "security.write")
        assert set(report.matrix.values()) == {0}
        verdict = cross_aspect_interference(report, aspected)
        assert verdict.order_independent
        assert verdict.cross_cells == ()
        assert verdict.message == "order-independent (no cross-aspect conflicts)"

    def test_deleting_advice_collides_across_aspects(self):
        aspected = parse_grammar(client_server_text() + DELETING_ASPECT)
        report = analyze_weaving(aspected)
        verdict = cross_aspect_interference(report, aspected)
        assert not verdict.order_independent
        assert verdict.cross_cells == (
            ("drop.kill", "security.read"),
            ("drop.kill", "security.write"),
        )
        assert verdict.message == (
            "2 cross-aspect conflict cell(s): "
            "drop.kill/security.read, drop.kill/security.write"
        )
        # The kill advice erases the stored pattern elements the security
        # advices must find, in either order of weaving.
        kinds = {
            v.kind
            for analysis in report.cells[("drop.kill", "security.read")]
            for v in analysis.verdicts
        }
        assert kinds == {"delete-use"}
        # The log pointcut stores only the rule-identity node, which
        # nothing deletes.
        assert report.count("drop.kill", "log.trace") == 0
        # A mutation is visible inside its own aspect too, just not as a
        # cross-aspect problem.
        assert report.count("drop.kill", "drop.kill") > 0
