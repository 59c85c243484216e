from __future__ import annotations

from fractions import Fraction

import pytest

from castar.core import INFINITY, Incumbent, SearchNode, TerminationReason, validate_path
from castar.puzzle import PuzzleDomain, goal_board, scramble
from castar.wastar import (
    NO_ENVELOPE,
    ClosedMap,
    OpenSet,
    OuterSearch,
    ThresholdParams,
    solve_astar,
    threshold_t,
)

from .conftest import GraphDomain, dijkstra, random_8puzzles, random_graph


def _node(g: int, h: int, seq: int = 0) -> SearchNode:
    return SearchNode(None, g, h, None, seq)


@pytest.mark.parametrize(
    "g, h, inc, p, expected",
    [
        (0, 29, INFINITY, ThresholdParams(), True),
        (0, 30, INFINITY, ThresholdParams(), False),
        (100, 14, INFINITY, ThresholdParams(10, 40, 15), False),  # no incumbent: depth clause never fires
        (50, 14, 80, ThresholdParams(10, 40, 15), True),  # 80 - 50 = 30 < 40 and 14 < 15
        (40, 14, 80, ThresholdParams(10, 40, 15), False),  # 80 - 40 = 40 is not < 40
        (50, 15, 80, ThresholdParams(10, 40, 15), False),
        (79, 31, 80, ThresholdParams(), False),
    ],
)
def test_threshold_cases(g, h, inc, p, expected):
    assert threshold_t(_node(g, h), inc, p) is expected


def test_threshold_params():
    assert ThresholdParams.parse("1, 2,3") == ThresholdParams(1, 2, 3)
    assert str(ThresholdParams()) == "30,40,15"
    for bad in ("1,2", "a,b,c", "-1,2,3"):
        with pytest.raises(ValueError):
            ThresholdParams.parse(bad)
    assert not threshold_t(_node(0, 0), INFINITY, NO_ENVELOPE)


def test_open_set_order():
    o = OpenSet(Fraction(3, 2))
    nodes = [_node(10, 5, 1), _node(12, 4, 2), _node(9, 6, 3), _node(12, 4, 4), _node(0, 12, 5)]
    for n in nodes:
        o.push(n)
    # f*2: 35, 36, 36, 36, 36 ; ties broken by smaller h, then insertion order
    assert o.key(nodes[0]) == (35, 5, 1)
    order = [(n.g, n.h, n.seq) for n in (o.pop() for _ in range(len(nodes)))]
    assert order == [(10, 5, 1), (12, 4, 2), (12, 4, 4), (9, 6, 3), (0, 12, 5)]


def test_closed_map():
    c = ClosedMap()
    assert c.improves("a", 5)
    c.record("a", 5)
    assert not c.improves("a", 5) and c.improves("a", 4)
    with pytest.raises(ValueError):
        c.record("a", 6)
    c.record("a", 3)
    assert c.get("a") == 3 and "a" in c and len(c) == 1


def test_astar_optimal_on_8puzzles(table):
    for b in random_8puzzles(25, seed=17):
        d = PuzzleDomain(b)
        res = solve_astar(d)
        assert res.best_cost == table[b]
        assert validate_path(d, res.best_path) == res.best_cost
        assert res.stats.reason is TerminationReason.EXHAUSTED


def test_weighted_astar_bound_and_anytime(table):
    for b in random_8puzzles(25, seed=18):
        d = PuzzleDomain(b)
        first = solve_astar(d, Fraction(2), first_solution=True)
        assert table[b] <= first.best_cost <= 2 * table[b]
        full = solve_astar(d, Fraction(2))
        assert full.best_cost == table[b]
        costs = [e.cost for e in full.anytime_log]
        assert costs == sorted(costs, reverse=True) and costs[-1] == table[b]


@pytest.mark.parametrize("seed", range(30))
def test_astar_on_weighted_graphs(seed):
    d = random_graph(seed)
    best = dijkstra(d)
    for w in (1, Fraction(3, 2), 3):
        res = solve_astar(d, w)
        assert res.best_cost == (INFINITY if best is None else best)
        if best is not None:
            assert validate_path(d, res.best_path) == best


def test_reopening_finds_cheaper_path():
    # with C=5 the search reaches 2 via the expensive edge first, then must reopen it
    edges = {0: [(1, 1), (2, 10)], 1: [(3, 1)], 3: [(2, 1)], 2: [(4, 1)]}
    h = {0: 3, 1: 3, 3: 2, 2: 1, 4: 0}
    d = GraphDomain(edges, 0, {4}, h)
    inc = Incumbent()
    outer = OuterSearch(d, 5, NO_ENVELOPE, inc)
    outer.run()
    assert inc.read() == 4
    assert [imp.cost for imp in inc.history][-1] == 4


def test_sink_receives_envelope_nodes():
    d = PuzzleDomain(scramble(goal_board(3), 30, 2))
    got = []
    inc = Incumbent()
    outer = OuterSearch(d, Fraction(3, 2), ThresholdParams(5, 0, 0), inc, sink=got.append)
    outer.run()
    assert got and all(n.h < 5 for n in got)
    assert outer.stats.subtasks_emitted == len(got)


def test_outer_pruning_reduces_work():
    d = PuzzleDomain(scramble(goal_board(3), 60, 3))
    inc_a, inc_b = Incumbent(), Incumbent()
    pruned = OuterSearch(d, 2, NO_ENVELOPE, inc_a, prune=True).run()
    plain = OuterSearch(d, 2, NO_ENVELOPE, inc_b, prune=False).run()
    assert inc_a.read() == inc_b.read()
    assert pruned.pruned > 0
    assert pruned.expansions < plain.expansions


def test_node_budget_and_cutoff():
    d = PuzzleDomain(scramble(goal_board(4), 200, 5))
    res = solve_astar(d, node_limit=500)
    assert res.stats.reason is TerminationReason.BUDGET
    assert res.stats.outer_expansions <= 500
    easy = PuzzleDomain(scramble(goal_board(3), 30, 5))
    first = solve_astar(easy, 3, first_solution=True).best_cost
    res = solve_astar(easy, 3, cutoff=first)
    assert res.stats.reason is TerminationReason.CUTOFF
    assert res.best_cost <= first
