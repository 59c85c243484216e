"""Compiled depth-first contour search for the sliding puzzle.

A drop-in for :func:`castar.idastar.dfs_contour` on :class:`PuzzleDomain`. The
search runs in numba with an explicit stack so it can stop after a node quota
and resume, which is how the Python side keeps polling the budget and feeding
in fresh incumbent values. Node counting, child order, parent skipping and the
prune rules match the generic engine exactly.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import INFINITY, POLL_INTERVAL, Budget, Path, TerminationReason
from .idastar import ContourOutcome, ContourResult

DONE = 0
FOUND = 1
QUOTA = 2

# layout of the int64 scalar-state vector shared with the kernel
_DEPTH, _NODES, _MINF = 0, 1, 2


@njit(cache=True, nogil=True)
def _contour(tiles, blanks, hs, next_child, st, nb, nbc, md, g_offset, bound, inc, quota):  # pragma: no cover
    depth = st[_DEPTH]
    nodes = st[_NODES]
    minf = st[_MINF]
    while True:
        d = depth
        b = blanks[d]
        k = next_child[d]
        if k >= nbc[b]:
            if d == 0:
                st[_DEPTH] = depth
                st[_NODES] = nodes
                st[_MINF] = minf
                return DONE
            pb = blanks[d - 1]
            tiles[b] = tiles[pb]
            tiles[pb] = 0
            depth = d - 1
            continue
        t = nb[b, k]
        next_child[d] = k + 1
        if d > 0 and t == blanks[d - 1]:
            continue
        tile = tiles[t]
        ch = hs[d] + md[tile, b] - md[tile, t]
        f = g_offset + d + 1 + ch
        if f > bound or f >= inc:
            if f < minf:
                minf = f
            continue
        if ch != 0 and nodes >= quota:
            next_child[d] = k
            st[_DEPTH] = depth
            st[_NODES] = nodes
            st[_MINF] = minf
            return QUOTA
        tiles[b] = tile
        tiles[t] = 0
        depth = d + 1
        blanks[depth] = t
        hs[depth] = ch
        next_child[depth] = 0
        if ch == 0:
            st[_DEPTH] = depth
            st[_NODES] = nodes
            st[_MINF] = minf
            return FOUND
        nodes += 1


class PuzzleKernel:
    """Per-domain tables for the compiled contour search."""

    def __init__(self, n: int, neighbours, distance_table) -> None:
        self.n = n
        cells = n * n
        self.nb = np.zeros((cells, 4), dtype=np.int32)
        self.nbc = np.zeros(cells, dtype=np.int32)
        for pos, targets in enumerate(neighbours):
            self.nbc[pos] = len(targets)
            self.nb[pos, : len(targets)] = targets
        self.md = np.array(distance_table, dtype=np.int64)

    def __call__(self, domain, state, bound: int, incumbent, *, g_offset: int, h: int, budget: Budget, prune: bool):
        read = incumbent.read

        def inc_value() -> int:
            return read() if prune else INFINITY

        f = g_offset + h
        if f > bound or f >= inc_value():
            return ContourResult(ContourOutcome.NEXT_BOUND, next_bound=f)
        if h == 0 and domain.is_goal(state):
            return ContourResult(ContourOutcome.FOUND, path=Path((state,), 0))

        node_cap = budget.remaining_nodes()
        if node_cap <= 0:
            budget.request_stop(TerminationReason.BUDGET)
            return ContourResult(ContourOutcome.ABORTED, reason=budget.stop_reason)

        max_depth = bound - g_offset + 2
        tiles = np.array(state.tiles, dtype=np.int64)
        blanks = np.zeros(max_depth, dtype=np.int64)
        hs = np.zeros(max_depth, dtype=np.int64)
        next_child = np.zeros(max_depth, dtype=np.int64)
        blanks[0] = state.blank
        hs[0] = h
        st = np.array([0, 1, INFINITY], dtype=np.int64)  # the root counts as expanded
        next_poll = POLL_INTERVAL
        charged = 0

        def settle(expansions: int) -> None:
            nonlocal charged
            budget.charge(expansions - charged)
            charged = expansions

        while True:
            if st[_NODES] >= next_poll:
                next_poll += POLL_INTERVAL
                settle(next_poll - POLL_INTERVAL)
                if budget.poll(read()) is not None:
                    settle(int(st[_NODES]))
                    return ContourResult(ContourOutcome.ABORTED, expansions=int(st[_NODES]), reason=budget.stop_reason)
            quota = min(next_poll, node_cap)
            status = _contour(
                tiles, blanks, hs, next_child, st, self.nb, self.nbc, self.md,
                g_offset, bound, inc_value(), quota,
            )
            expansions = int(st[_NODES])
            if status == QUOTA and expansions >= node_cap:
                budget.request_stop(TerminationReason.BUDGET)
                settle(expansions)
                return ContourResult(ContourOutcome.ABORTED, expansions=expansions, reason=budget.stop_reason)
            if status == QUOTA:
                continue
            settle(expansions)
            if status == FOUND:
                return ContourResult(
                    ContourOutcome.FOUND, path=self._replay(state, blanks, int(st[_DEPTH])), expansions=expansions
                )
            minf = int(st[_MINF])
            if minf >= INFINITY:
                return ContourResult(ContourOutcome.EXHAUSTED, expansions=expansions)
            return ContourResult(ContourOutcome.NEXT_BOUND, next_bound=minf, expansions=expansions)

    @staticmethod
    def _replay(state, blanks, depth: int) -> Path:
        from .puzzle import Board

        states = [state]
        board = state
        for i in range(1, depth + 1):
            target = int(blanks[i])
            tiles = list(board.tiles)
            tiles[board.blank] = tiles[target]
            tiles[target] = 0
            board = Board(board.n, tuple(tiles), target)
            states.append(board)
        return Path(tuple(states), depth)
