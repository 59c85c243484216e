"""Cost-bounded iterative deepening, pruned against the shared incumbent."""

from __future__ import annotations

import enum
import sys
import time
from dataclasses import dataclass, field
from typing import Generic

from .core import (
    INFINITY,
    POLL_INTERVAL,
    Budget,
    Incumbent,
    Path,
    SearchDomain,
    SearchResult,
    SearchStats,
    State,
    TerminationReason,
    anytime_log,
    stitch,
)


class ContourOutcome(enum.Enum):
    FOUND = "found"
    NEXT_BOUND = "next_bound"
    EXHAUSTED = "exhausted"
    ABORTED = "aborted"


@dataclass
class ContourResult(Generic[State]):
    outcome: ContourOutcome
    path: Path[State] | None = None
    next_bound: int = INFINITY
    expansions: int = 0
    reason: TerminationReason | None = None


class _Abort(Exception):
    pass


def dfs_contour(
    domain: SearchDomain[State],
    state: State,
    bound: int,
    incumbent: Incumbent,
    *,
    g_offset: int = 0,
    h: int | None = None,
    parent: State | None = None,
    budget: Budget | None = None,
    prune: bool = True,
    path_check: bool = False,
) -> ContourResult[State]:
    """One depth-first pass over nodes with ``g_offset + g + h <= bound``.

    Nodes whose ``f`` reaches the incumbent are cut off exactly like nodes over the
    bound, so they feed the next-bound minimum. The first goal found is offered
    to the incumbent as a path relative to ``state`` (the caller stitches it).
    With ``path_check`` children already on the current path are skipped, not
    just the immediate parent.
    """
    if h is None:
        h = domain.heuristic(state)
    budget = budget or Budget()
    kernel = domain.contour_kernel
    if kernel is not None and parent is None and not path_check:
        return kernel(domain, state, bound, incumbent, g_offset=g_offset, h=h, budget=budget, prune=prune)
    expand = domain.expand
    is_goal = domain.is_goal
    read = incumbent.read
    key = domain.state_key
    node_cap = budget.remaining_nodes()
    expansions = 0
    next_poll = POLL_INTERVAL
    stack = [state]
    on_path = {key(state)} if path_check else None
    found: list[int] = []

    def visit(s: State, g: int, h: int, parent: State | None) -> int:
        # Returns the smallest f that was cut off, or -1 when a goal was found.
        nonlocal expansions, next_poll
        f = g_offset + g + h
        if f > bound:
            return f
        if prune and f >= read():
            return f
        if h == 0 and is_goal(s):
            found.append(g)
            return -1
        if expansions >= node_cap:
            budget.request_stop(TerminationReason.BUDGET)
            raise _Abort
        expansions += 1
        if expansions >= next_poll:
            next_poll += POLL_INTERVAL
            budget.charge(POLL_INTERVAL)
            if budget.poll(read()) is not None:
                raise _Abort
        smallest = INFINITY
        for child, cost, ch in expand(s, h):
            if child == parent:
                continue
            if on_path is not None:
                k = key(child)
                if k in on_path:
                    continue
                on_path.add(k)
            stack.append(child)
            r = visit(child, g + cost, ch, s)
            if r < 0:
                return r
            stack.pop()
            if on_path is not None:
                on_path.discard(k)
            if r < smallest:
                smallest = r
        return smallest

    limit = sys.getrecursionlimit()
    if limit < 10_000:
        sys.setrecursionlimit(10_000)
    try:
        r = visit(state, 0, h, parent)
    except _Abort:
        budget.charge(expansions % POLL_INTERVAL)
        return ContourResult(ContourOutcome.ABORTED, expansions=expansions, reason=budget.stop_reason)
    budget.charge(expansions % POLL_INTERVAL)
    if r < 0:
        path = Path(tuple(stack), found[0])
        return ContourResult(ContourOutcome.FOUND, path=path, expansions=expansions)
    if r >= INFINITY:
        return ContourResult(ContourOutcome.EXHAUSTED, expansions=expansions)
    return ContourResult(ContourOutcome.NEXT_BOUND, next_bound=r, expansions=expansions)


@dataclass
class IdaStarResult(Generic[State]):
    path: Path[State] | None
    expansions: int = 0
    bounds: list[int] = field(default_factory=list)
    budget_exhausted: bool = False
    stop_reason: TerminationReason | None = None


def ida_star(
    domain: SearchDomain[State],
    start: State,
    incumbent: Incumbent,
    *,
    g_offset: int = 0,
    h: int | None = None,
    prefix: Path[State] | None = None,
    budget: Budget | None = None,
    prune: bool = True,
    path_check: bool = False,
) -> IdaStarResult[State]:
    """Iterative deepening from ``start``, whose path cost from the root is ``g_offset``.

    Every goal found is offered to ``incumbent`` as ``prefix`` + the local path.
    Stops when a contour finds a goal or is exhausted, when the next bound can no
    longer beat the incumbent, or when the budget fires. The returned path runs
    from ``start`` and its cost is local (excludes ``g_offset``).
    """
    budget = budget or Budget()
    if h is None:
        h = domain.heuristic(start)
    result: IdaStarResult[State] = IdaStarResult(None)
    bound = g_offset + h
    while True:
        if prune and bound >= incumbent.read():
            break
        result.bounds.append(bound)
        contour = dfs_contour(
            domain, start, bound, incumbent,
            g_offset=g_offset, h=h, budget=budget, prune=prune, path_check=path_check,
        )
        result.expansions += contour.expansions
        if contour.outcome is ContourOutcome.FOUND:
            result.path = contour.path
            incumbent.offer(g_offset + contour.path.cost, stitch(prefix, contour.path))
            budget.poll(incumbent.read())
            break
        if contour.outcome is ContourOutcome.ABORTED:
            result.budget_exhausted = contour.reason is TerminationReason.BUDGET
            result.stop_reason = contour.reason
            break
        if contour.outcome is ContourOutcome.EXHAUSTED:
            break
        bound = contour.next_bound
    return result


def solve_idastar(
    domain: SearchDomain[State],
    *,
    time_limit: float | None = None,
    node_limit: int | None = None,
    cutoff: int | None = None,
    prune: bool = True,
) -> SearchResult:
    """Standalone IDA* from the domain's initial state."""
    start = time.perf_counter()
    inc = Incumbent()
    budget = Budget(time_limit, node_limit, cutoff, start=start)
    res = ida_star(domain, domain.initial_state, inc, budget=budget, prune=prune)
    reason = res.stop_reason or budget.stop_reason or TerminationReason.EXHAUSTED
    return SearchResult(
        inc.best_cost,
        inc.best_path,
        anytime_log(inc.history, start),
        SearchStats(inner_expansions=res.expansions, reason=reason, elapsed=time.perf_counter() - start),
    )
