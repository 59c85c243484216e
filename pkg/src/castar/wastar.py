"""Outer best-first phase: weighted A* with reopening and the envelope-ball test."""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Generic, Hashable

from .core import (
    INFINITY,
    Budget,
    Incumbent,
    SearchDomain,
    SearchNode,
    SearchResult,
    SearchStats,
    State,
    TerminationReason,
    anytime_log,
    as_weight,
    cost_sub,
    scaled_priority,
)


@dataclass(frozen=True)
class ThresholdParams:
    theta1: int = 30
    theta2: int = 40
    theta3: int = 15

    def __post_init__(self) -> None:
        for name in ("theta1", "theta2", "theta3"):
            value = getattr(self, name)
            if not 0 <= value < INFINITY:
                raise ValueError(f"{name} must be finite and non-negative, got {value}")

    @classmethod
    def parse(cls, text: str) -> ThresholdParams:
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated thresholds, got {text!r}")
        return cls(*(int(p) for p in parts))

    def __str__(self) -> str:
        return f"{self.theta1},{self.theta2},{self.theta3}"


#: Thresholds that never fire: the outer phase alone is then (weighted) A*.
NO_ENVELOPE = ThresholdParams(0, 0, 0)


def threshold_t(node: SearchNode, incumbent_cost: int, p: ThresholdParams) -> bool:
    """Is ``node`` inside the envelope ball?

    ``h < theta1``, or the node is deep relative to the incumbent
    (``incumbent - g < theta2``) and ``h < theta3``. With no incumbent the second
    clause is always false.
    """
    h = node.h
    if h < p.theta1:
        return True
    return cost_sub(incumbent_cost, node.g) < p.theta2 and h < p.theta3


class OpenSet(Generic[State]):
    """Min-heap keyed by ``(scaled g + C*h, h, insertion order)``."""

    def __init__(self, weight: Fraction) -> None:
        self.weight = weight
        self._scale = weight.denominator
        self._weighted_h = weight.numerator
        self._heap: list[tuple[int, int, int, SearchNode[State]]] = []

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)

    def key(self, node: SearchNode[State]) -> tuple[int, int, int]:
        return (node.g * self._scale + node.h * self._weighted_h, node.h, node.seq)

    def push(self, node: SearchNode[State]) -> None:
        heapq.heappush(self._heap, (*self.key(node), node))

    def pop(self) -> SearchNode[State]:
        return heapq.heappop(self._heap)[-1]

    def peek_key(self) -> tuple[int, int, int]:
        return self._heap[0][:3]


class ClosedMap:
    """Best ``g`` seen per state key; entries only ever decrease."""

    def __init__(self) -> None:
        self._best: dict[Hashable, int] = {}

    def __len__(self) -> int:
        return len(self._best)

    def __contains__(self, key: Hashable) -> bool:
        return key in self._best

    def get(self, key: Hashable) -> int | None:
        return self._best.get(key)

    def improves(self, key: Hashable, g: int) -> bool:
        """True if ``g`` beats the recorded value (or there is none)."""
        old = self._best.get(key)
        return old is None or g < old

    def record(self, key: Hashable, g: int) -> None:
        old = self._best.get(key)
        if old is not None and g >= old:
            raise ValueError("closed-map entries may only decrease")
        self._best[key] = g


@dataclass
class OuterStats:
    expansions: int = 0
    generated: int = 0
    subtasks_emitted: int = 0
    reopened: int = 0
    pruned: int = 0
    max_open: int = 0
    goals_found: int = 0
    budget_exhausted: bool = False
    stop_reason: TerminationReason | None = None


class OuterSearch(Generic[State]):
    """Stepwise weighted A* that hands envelope-ball nodes to ``sink``.

    Goals offer their cost to the incumbent and the search carries on, so the
    phase is anytime. Successors are dropped when a cheaper path to them is
    already known, and (with ``prune``) when ``g + h`` cannot beat the incumbent;
    the admissible ``h`` is used for that bound, never ``C*h``.
    """

    def __init__(
        self,
        domain: SearchDomain[State],
        weight: Fraction | float | int,
        thetas: ThresholdParams,
        incumbent: Incumbent,
        sink: Callable[[SearchNode[State]], None] | None = None,
        budget: Budget | None = None,
        prune: bool = True,
        stop_on_goal: bool = False,
    ) -> None:
        self.domain = domain
        self.weight = as_weight(weight)
        self.thetas = thetas
        self.incumbent = incumbent
        self.sink = sink
        self.budget = budget or Budget()
        self.prune = prune
        self.stop_on_goal = stop_on_goal
        self.open: OpenSet[State] = OpenSet(self.weight)
        self.closed = ClosedMap()
        self.stats = OuterStats()
        self._seq = 0

        root_state = domain.initial_state
        root = SearchNode(root_state, 0, domain.heuristic(root_state), None, 0)
        self.closed.record(domain.state_key(root_state), 0)
        self.open.push(root)
        self.stats.max_open = 1

    @property
    def done(self) -> bool:
        return not self.open or self.stats.stop_reason is not None

    def step(self) -> bool:
        """Pop and process one node. Returns False once the search is over."""
        inc = self.incumbent
        stats = self.stats
        while self.open:
            reason = self.budget.poll(inc.read())
            if reason is not None:
                stats.stop_reason = reason
                stats.budget_exhausted = reason is TerminationReason.BUDGET
                return False
            node = self.open.pop()
            key = self.domain.state_key(node.state)
            if self.closed.get(key) != node.g:
                continue  # superseded by a cheaper copy
            if self.prune and node.g + node.h >= inc.read():
                stats.pruned += 1
                continue
            if node.h == 0 and self.domain.is_goal(node.state):
                stats.goals_found += 1
                inc.offer(node.g, node.path())
                if self.stop_on_goal:
                    stats.stop_reason = TerminationReason.EXHAUSTED
                    return False
                continue
            self._expand(node)
            return True
        return False

    def _expand(self, node: SearchNode[State]) -> None:
        domain = self.domain
        inc = self.incumbent
        stats = self.stats
        closed = self.closed
        stats.expansions += 1
        self.budget.charge(1)
        for child, cost, h in domain.expand(node.state, node.h):
            g = node.g + cost
            key = domain.state_key(child)
            old = closed.get(key)
            if old is not None and old <= g:
                continue
            if self.prune and g + h >= inc.read():
                stats.pruned += 1
                continue
            if old is not None:
                stats.reopened += 1
            closed.record(key, g)
            stats.generated += 1
            self._seq += 1
            succ = SearchNode(child, g, h, node, self._seq)
            if self.sink is not None and threshold_t(succ, inc.read(), self.thetas):
                stats.subtasks_emitted += 1
                self.sink(succ)
            else:
                self.open.push(succ)
        if len(self.open) > stats.max_open:
            stats.max_open = len(self.open)

    def run(self) -> OuterStats:
        while self.step():
            pass
        return self.stats


def run_outer(
    domain: SearchDomain[State],
    weight: Fraction | float | int,
    thetas: ThresholdParams,
    incumbent: Incumbent,
    sink: Callable[[SearchNode[State]], None] | None = None,
    budget: Budget | None = None,
    prune: bool = True,
) -> OuterStats:
    return OuterSearch(domain, weight, thetas, incumbent, sink, budget, prune).run()


def solve_astar(
    domain: SearchDomain[State],
    weight: Fraction | float | int = 1,
    *,
    first_solution: bool = False,
    time_limit: float | None = None,
    node_limit: int | None = None,
    cutoff: int | None = None,
    prune: bool = True,
) -> SearchResult:
    """Plain (weighted) A*: the outer phase with an envelope that never fires.

    With ``first_solution`` the search stops at the first goal, which is the
    classic bounded-suboptimal weighted A*; otherwise it keeps improving until the
    open set is exhausted, which is optimal for any weight.
    """
    start = time.perf_counter()
    inc = Incumbent()
    budget = Budget(time_limit, node_limit, cutoff, start=start)
    outer = OuterSearch(domain, weight, NO_ENVELOPE, inc, None, budget, prune, stop_on_goal=first_solution)
    stats = outer.run()
    return SearchResult(
        inc.best_cost,
        inc.best_path,
        anytime_log(inc.history, start),
        SearchStats(
            outer_expansions=stats.expansions,
            max_open=stats.max_open,
            reason=stats.stop_reason or TerminationReason.EXHAUSTED,
            elapsed=time.perf_counter() - start,
        ),
    )
