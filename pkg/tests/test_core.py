from __future__ import annotations

import threading
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from castar.core import (
    INFINITY,
    Incumbent,
    InvalidPath,
    InvalidStep,
    MismatchedJoint,
    Path,
    SearchNode,
    WrongEndpoints,
    as_weight,
    cost_add,
    cost_sub,
    f_weighted,
    scaled_priority,
    stitch,
    validate_path,
)
from castar.oracle import bfs_optimal
from castar.puzzle import Board, PuzzleDomain, goal_board, scramble, successors

from .conftest import random_8puzzles


def test_infinity_sentinel():
    assert INFINITY > 10**15
    assert cost_add(INFINITY, 5) == INFINITY
    assert cost_add(5, INFINITY) == INFINITY
    assert cost_add(3, 4) == 7
    assert cost_sub(INFINITY, 10) == INFINITY
    assert cost_sub(80, 50) == 30


@pytest.mark.parametrize(
    "g, h, weight, expected",
    [
        (10, 5, 1, 15),
        (0, 0, Fraction(17, 10), 0),
        (10, 5, Fraction(3, 2), Fraction(35, 2)),
    ],
)
def test_f_weighted(g, h, weight, expected):
    assert f_weighted(g, h, weight) == expected


def test_scaled_priority_grid():
    assert scaled_priority(10, 5, Fraction(3, 2), scale=10) == 175
    assert scaled_priority(10, 5, Fraction(3, 2)) == 35
    assert scaled_priority(10, 5, 1) == 15
    with pytest.raises(ValueError):
        scaled_priority(1, 1, Fraction(3, 2), scale=3)


@given(st.integers(0, 500), st.integers(0, 500), st.integers(0, 500), st.integers(0, 500))
def test_scaled_priority_preserves_order(g1, h1, g2, h2):
    w = Fraction(8, 5)
    exact = (f_weighted(g1, h1, w) > f_weighted(g2, h2, w)) - (f_weighted(g1, h1, w) < f_weighted(g2, h2, w))
    a, b = scaled_priority(g1, h1, w), scaled_priority(g2, h2, w)
    assert exact == (a > b) - (a < b)


def test_as_weight():
    assert as_weight(1.6) == Fraction(8, 5)
    assert as_weight("1.5") == Fraction(3, 2)
    assert as_weight(1) == 1
    with pytest.raises(ValueError):
        as_weight(0.5)


# -- paths -------------------------------------------------------------------


def test_validate_single_state_goal():
    d = PuzzleDomain(goal_board(3))
    assert validate_path(d, Path((goal_board(3),), 0)) == 0


def test_validate_one_move():
    start = Board.from_tiles([1, 2, 3, 4, 5, 6, 7, 0, 8])
    d = PuzzleDomain(start)
    assert validate_path(d, Path((start, goal_board(3)), 1)) == 1


def test_validate_bfs_paths():
    for board in random_8puzzles(10, seed=5):
        d = PuzzleDomain(board)
        cost, path = bfs_optimal(d)
        assert validate_path(d, path) == cost == path.cost


def test_validate_rejects_mutations():
    board = scramble(goal_board(3), 30, 11)
    d = PuzzleDomain(board)
    _, path = bfs_optimal(d)
    other = scramble(goal_board(3), 25, 3)
    for i in range(1, len(path) - 1):
        states = list(path.states)
        states[i] = other
        with pytest.raises(InvalidStep) as info:
            validate_path(d, Path(tuple(states), path.cost))
        assert info.value.index in (i - 1, i)


def test_validate_endpoints_and_cost():
    board = scramble(goal_board(3), 10, 1)
    d = PuzzleDomain(board)
    _, path = bfs_optimal(d)
    with pytest.raises(WrongEndpoints):
        validate_path(d, Path(path.states[1:], path.cost - 1))
    with pytest.raises(WrongEndpoints):
        validate_path(d, Path(path.states[:-1], path.cost - 1))
    with pytest.raises(InvalidPath):
        validate_path(d, Path(path.states, path.cost + 1))
    with pytest.raises(InvalidPath):
        validate_path(d, Path((), 0))


def test_node_path():
    b0 = scramble(goal_board(3), 2, 0)
    b1 = successors(b0)[0][0]
    root = SearchNode(b0, 0, 0)
    child = SearchNode(b1, 1, 0, root, 1)
    assert child.path() == Path((b0, b1), 1)


def test_stitch():
    b = scramble(goal_board(3), 7, 2)
    d = PuzzleDomain(b)
    _, full = bfs_optimal(d)
    prefix = Path(full.states[:4], 3)
    inner = Path(full.states[3:], full.cost - 3)
    assert stitch(prefix, inner) == full
    assert stitch(None, full) == full
    assert stitch(Path((), 0), full) == full
    four = Path(full.states[3:8], 4)
    assert stitch(prefix, four).cost == 7
    with pytest.raises(MismatchedJoint):
        stitch(prefix, Path(full.states[4:], full.cost - 4))


# -- incumbent ---------------------------------------------------------------


def _dummy(cost: int) -> Path:
    return Path((cost,), cost)


def test_incumbent_offer_and_read():
    inc = Incumbent()
    assert inc.read() == INFINITY
    assert inc.best_path is None
    assert inc.offer(52, _dummy(52))
    assert inc.read() == 52
    assert not inc.offer(60, _dummy(60))
    assert not inc.offer(52, _dummy(52))
    assert inc.read() == 52
    inc.offer(40, _dummy(40))
    inc.offer(35, _dummy(35))
    assert inc.read() == 35
    assert inc.best_path.cost == 35
    assert [imp.cost for imp in inc.history] == [52, 40, 35]


@given(st.lists(st.integers(0, 1000), max_size=40))
def test_incumbent_is_running_minimum(offers):
    inc = Incumbent()
    seen = []
    for c in offers:
        accepted = inc.offer(c, _dummy(c))
        assert accepted == (c < min(seen, default=INFINITY))
        seen.append(c)
        assert inc.read() == min(seen)
        assert inc.best_path.cost == inc.read()


def test_incumbent_concurrent_offers():
    for _ in range(20):
        inc = Incumbent()
        barrier = threading.Barrier(2)

        def offer(c):
            barrier.wait()
            inc.offer(c, _dummy(c))

        threads = [threading.Thread(target=offer, args=(c,)) for c in (55, 52)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert inc.read() == 52 and inc.best_path.cost == 52


def test_incumbent_reads_monotone_under_contention():
    inc = Incumbent()
    costs = list(range(2000, 0, -1))
    violations = []

    def writer(values):
        for c in values:
            inc.offer(c, _dummy(c))

    def reader():
        last = INFINITY
        for _ in range(20000):
            v = inc.read()
            if v > last:
                violations.append((last, v))
            last = v
            path = inc.best_path
            if path is not None and path.cost < v:
                violations.append(("path ahead of read", v))

    threads = [threading.Thread(target=writer, args=(costs[i::4],)) for i in range(4)]
    threads += [threading.Thread(target=reader) for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not violations
    assert inc.read() == 1
    assert inc.best_path.cost == 1
    history = [imp.cost for imp in inc.history]
    assert history == sorted(history, reverse=True)
