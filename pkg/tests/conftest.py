from __future__ import annotations

import heapq
import random

import pytest

from castar.core import INFINITY, SearchDomain
from castar.oracle import DistanceTable, load_or_build
from castar.puzzle import Board, goal_board, scramble


@pytest.fixture(scope="session")
def table(request) -> DistanceTable:
    """The 3x3 distance table, cached across sessions in pytest's cache dir."""
    cache = request.config.cache.mkdir("castar") / "distance3.bin"
    return load_or_build(cache)


def random_8puzzles(count: int, seed: int = 1234, moves: int = 60) -> list[Board]:
    rng = random.Random(seed)
    return [scramble(goal_board(3), moves, rng.getrandbits(32)) for _ in range(count)]


@pytest.fixture(scope="session")
def suite100() -> list[Board]:
    return random_8puzzles(100)


@pytest.fixture(scope="session")
def suite50() -> list[Board]:
    return random_8puzzles(50, seed=99)


class GraphDomain(SearchDomain[int]):
    """Explicit weighted digraph; ``h`` defaults to zero everywhere."""

    def __init__(self, edges: dict[int, list[tuple[int, int]]], start: int, goals: set[int], h=None) -> None:
        self.edges = edges
        self.initial_state = start
        self.goals = goals
        self.h = h or {}

    def is_goal(self, state: int) -> bool:
        return state in self.goals

    def successors(self, state: int) -> list[tuple[int, int]]:
        return list(self.edges.get(state, []))

    def heuristic(self, state: int) -> int:
        return self.h.get(state, 0)

    def state_key(self, state: int) -> int:
        return state


def dijkstra(domain: SearchDomain) -> int | None:
    """Reference optimal cost for arbitrary positive edge weights."""
    start = domain.initial_state
    dist = {domain.state_key(start): 0}
    heap = [(0, 0, start)]
    tie = 0
    while heap:
        d, _, s = heapq.heappop(heap)
        if d > dist[domain.state_key(s)]:
            continue
        if domain.is_goal(s):
            return d
        for c, w in domain.successors(s):
            k = domain.state_key(c)
            if d + w < dist.get(k, INFINITY):
                dist[k] = d + w
                tie += 1
                heapq.heappush(heap, (d + w, tie, c))
    return None


def random_graph(seed: int, nodes: int = 40, degree: int = 3, max_cost: int = 9) -> GraphDomain:
    """Random digraph with a consistent heuristic (true distance scaled down)."""
    rng = random.Random(seed)
    edges = {
        v: [(rng.randrange(nodes), rng.randint(1, max_cost)) for _ in range(rng.randint(1, degree))]
        for v in range(nodes)
    }
    goal = nodes - 1
    # exact distance-to-goal via reverse Dijkstra, then halve it: still consistent
    rev: dict[int, list[tuple[int, int]]] = {}
    for u, out in edges.items():
        for v, w in out:
            rev.setdefault(v, []).append((u, w))
    to_goal = {goal: 0}
    heap = [(0, goal)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > to_goal[v]:
            continue
        for u, w in rev.get(v, []):
            if d + w < to_goal.get(u, INFINITY):
                to_goal[u] = d + w
                heapq.heappush(heap, (d + w, u))
    h = {v: d // 2 for v, d in to_goal.items()}
    return GraphDomain(edges, 0, {goal}, h)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance verdict line; all lines are printed after the run."""

    def record(criterion: int, passed: bool | None, detail: str) -> None:
        verdict = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        ACCEPTANCE_LINES.append(f"criterion {criterion}: {verdict} - {detail}")
        print(ACCEPTANCE_LINES[-1])

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
