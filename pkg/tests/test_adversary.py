from __future__ import annotations

import random

import pytest

from xheal.adversary import (
    AdversaryView,
    ChurnMix,
    Delete,
    Insert,
    MaxDegreeDelete,
    RandomDelete,
    StarAttack,
    TraceReplay,
    format_trace,
    parse_trace,
)
from xheal.errors import DuplicateInsert, EmptyGraph, ExhaustedTrace, TraceSyntaxError, UnknownNodeReference
from xheal.graph import CloudId, CloudKind, HealedGraph


def star(leaves):
    return HealedGraph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def test_parse_insert_then_delete():
    assert parse_trace("I 5 0,1\nD 5\n") == [Insert(5, frozenset({0, 1})), Delete(5)]


def test_parse_skips_comments_and_blanks():
    text = "# header\n\n  I 3 0\n# mid\nD 0\n"
    assert parse_trace(text) == [Insert(3, frozenset({0})), Delete(0)]


def test_format_roundtrip():
    events = [Insert(4, frozenset({2, 0, 1})), Delete(1), Insert(5, frozenset({4}))]
    text = format_trace(events)
    assert text == "I 4 0,1,2\nD 1\nI 5 4\n"
    assert parse_trace(text) == events


@pytest.mark.parametrize("text, exc, line, col", [
    ("D 99\n", UnknownNodeReference, 1, 3),
    ("I 5 0,1\nX 3\n", TraceSyntaxError, 2, 1),
    ("I 5 0,x\n", TraceSyntaxError, 1, 7),
    ("I 5 0,7\n", UnknownNodeReference, 1, 7),
    ("I 5 0\nI 5 1\n", DuplicateInsert, 2, 3),
    ("I 6 0\nI 5 1\n", DuplicateInsert, 2, 3),
    ("I 5\n", TraceSyntaxError, 1, 1),
    ("I 5 0\nD 5 6\n", TraceSyntaxError, 2, 1),
    ("I 5 0\nD 5\nD 5\n", UnknownNodeReference, 3, 3),
    ("I 5 99999999999999999999999\n", TraceSyntaxError, 1, 5),
    ("I 5 5\n", UnknownNodeReference, 1, 5),
])
def test_parse_errors_carry_position(text, exc, line, col):
    with pytest.raises(exc) as info:
        parse_trace(text)
    assert (info.value.line, info.value.column) == (line, col)
    assert f"line {line}" in str(info.value)


def test_parse_explicit_initial_nodes():
    assert parse_trace("D 7\n", initial_nodes=range(8)) == [Delete(7)]
    with pytest.raises(UnknownNodeReference):
        parse_trace("D 7\n", initial_nodes=range(3))


def test_view_hides_labels_and_clouds():
    g = star(3)
    g.add_label(1, 2, CloudId(1, CloudKind.PRIMARY))
    view = AdversaryView.of(g)
    assert view.adjacency[1] == frozenset({0, 2})
    assert view.alive == frozenset(range(4)) and view.next_id == 4
    d = view.to_dict()
    assert set(d) == {"alive", "adjacency", "next_id"}
    assert "P1" not in repr(d) and "black" not in repr(d)


def test_max_degree_targets_hub_then_lowest_id():
    g = star(6)
    s = MaxDegreeDelete()
    assert s.next_event(AdversaryView.of(g), random.Random(0)) == Delete(0)
    g.remove_node(0)
    assert s.next_event(AdversaryView.of(g), random.Random(0)) == Delete(1)


def test_star_attack_alternates():
    g = HealedGraph.from_edges(12, [(i, i + 1) for i in range(11)])
    s = StarAttack(k=5)
    rng = random.Random(1)
    ins = s.next_event(AdversaryView.of(g), rng)
    assert isinstance(ins, Insert) and ins.id == 12 and len(ins.neighbors) == 5
    g.add_node(ins.id, ins.neighbors)
    assert s.next_event(AdversaryView.of(g), rng) == Delete(12)
    g.remove_node(12)
    assert isinstance(s.next_event(AdversaryView.of(g), rng), Insert)


def test_churn_respects_alive_bounds():
    g = star(3)
    s = ChurnMix(p_insert=0.0, min_alive=4)
    assert isinstance(s.next_event(AdversaryView.of(g), random.Random(0)), Insert)
    s = ChurnMix(p_insert=1.0, min_alive=1, max_alive=4)
    assert isinstance(s.next_event(AdversaryView.of(g), random.Random(0)), Delete)
    s = ChurnMix(p_insert=1.0, min_alive=1, max_insert_degree=2)
    for seed in range(20):
        ev = s.next_event(AdversaryView.of(g), random.Random(seed))
        assert 1 <= len(ev.neighbors) <= 2 and ev.neighbors <= set(g.nodes)


def test_strategies_are_deterministic():
    g = HealedGraph.from_edges(10, [(i, (i + 1) % 10) for i in range(10)])
    for make in (RandomDelete, lambda: ChurnMix(0.5), lambda: StarAttack(3)):
        a = [make().next_event(AdversaryView.of(g), random.Random(7)) for _ in range(2)]
        assert a[0] == a[1]


def test_empty_graph_and_exhausted_trace():
    g = HealedGraph.from_edges(1, [])
    g.remove_node(0)
    with pytest.raises(EmptyGraph):
        RandomDelete().next_event(AdversaryView.of(g), random.Random(0))
    replay = TraceReplay([Delete(0)])
    view = AdversaryView.of(star(1))
    assert replay.next_event(view, random.Random(0)) == Delete(0)
    with pytest.raises(ExhaustedTrace):
        replay.next_event(view, random.Random(0))
