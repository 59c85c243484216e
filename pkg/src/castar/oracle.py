"""Exact reference solvers: breadth-first search and the full 3x3 distance table.

These share no code with the heuristic engines beyond the board primitives, so
they can be used to check them.
"""

from __future__ import annotations

import logging
import os
import struct
import sys
from array import array
from collections import deque
from pathlib import Path as FsPath
from typing import Iterator

from .core import Path, SearchDomain, SearchError, State
from .puzzle import Board, goal_board, pack_key, successors, unpack_key

log = logging.getLogger(__name__)

CACHE_MAGIC = b"CADT"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sHBI")  # magic, version, n, entry count


class LimitExceeded(SearchError):
    pass


def bfs_optimal(
    domain: SearchDomain[State], start: State | None = None, limit: int = 10_000_000
) -> tuple[int, Path[State]] | None:
    """Optimal cost and one witness path from ``start`` (default: the initial state).

    Unit edge costs only. Returns ``None`` if no goal is reachable; raises
    :class:`LimitExceeded` once more than ``limit`` states have been discovered.
    """
    if limit <= 0:
        raise ValueError("limit must be positive")
    if start is None:
        start = domain.initial_state
    key = domain.state_key
    parent: dict = {key(start): None}
    frontier = deque([start])
    while frontier:
        state = frontier.popleft()
        if domain.is_goal(state):
            states = [state]
            k = parent[key(state)]
            while k is not None:
                prev, k = k
                states.append(prev)
            states.reverse()
            return len(states) - 1, Path(tuple(states), len(states) - 1)
        for child, cost in domain.successors(state):
            if cost != 1:
                raise ValueError("bfs_optimal requires unit edge costs")
            ck = key(child)
            if ck in parent:
                continue
            parent[ck] = (state, parent[key(state)])
            if len(parent) > limit:
                raise LimitExceeded(f"more than {limit} states discovered")
            frontier.append(child)
    return None


class DistanceTable:
    """Optimal distance to the goal for every solvable 3x3 board."""

    def __init__(self, n: int, distances: dict[int, int]) -> None:
        self.n = n
        self._dist = distances

    def __len__(self) -> int:
        return len(self._dist)

    def __contains__(self, board: Board) -> bool:
        return pack_key(board) in self._dist

    def __getitem__(self, board: Board) -> int:
        return self._dist[pack_key(board)]

    def get(self, board: Board) -> int | None:
        return self._dist.get(pack_key(board))

    def boards(self) -> Iterator[tuple[Board, int]]:
        for key, d in self._dist.items():
            yield unpack_key(key, self.n), d

    @property
    def diameter(self) -> int:
        return max(self._dist.values())

    def optimal_path(self, board: Board) -> Path[Board]:
        """Walk downhill through the table to the goal."""
        d = self[board]
        states = [board]
        while d > 0:
            for child, _ in successors(states[-1]):
                if self._dist.get(pack_key(child)) == d - 1:
                    states.append(child)
                    d -= 1
                    break
        return Path(tuple(states), len(states) - 1)

    # -- cache file -------------------------------------------------------
    #
    # layout (little endian): magic "CADT", u16 version, u8 n, u32 count,
    # then count u64 packed keys (4 bits per cell), then count u8 distances.

    def save(self, path: str | os.PathLike) -> None:
        keys = array("Q", self._dist.keys())
        dists = bytes(self._dist.values())
        if sys.byteorder != "little":
            keys.byteswap()
        tmp = FsPath(f"{path}.tmp")
        with open(tmp, "wb") as fh:
            fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, self.n, len(keys)))
            fh.write(keys.tobytes())
            fh.write(dists)
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str | os.PathLike) -> DistanceTable:
        data = FsPath(path).read_bytes()
        if len(data) < _HEADER.size:
            raise ValueError("truncated distance-table cache")
        magic, version, n, count = _HEADER.unpack_from(data)
        if magic != CACHE_MAGIC or version != CACHE_VERSION:
            raise ValueError("distance-table cache has the wrong magic or version")
        body = data[_HEADER.size :]
        if len(body) != count * 9:
            raise ValueError("distance-table cache has the wrong length")
        keys = array("Q")
        keys.frombytes(body[: count * 8])
        if sys.byteorder != "little":
            keys.byteswap()
        return cls(n, dict(zip(keys, body[count * 8 :])))


def build_distance_table(n: int = 3) -> DistanceTable:
    """Breadth-first search backwards from the goal over every reachable board."""
    if n != 3:
        raise ValueError("the exhaustive table is only built for 3x3 boards")
    goal = goal_board(n)
    width = n
    cells = n * n
    moves = []
    for pos in range(cells):
        r, c = divmod(pos, width)
        moves.append(
            [t for t, ok in ((pos - n, r > 0), (pos + n, r < n - 1), (pos - 1, c > 0), (pos + 1, c < n - 1)) if ok]
        )
    shifts = [4 * i for i in range(cells)]

    start = pack_key(goal)
    dist = {start: 0}
    frontier = [(start, goal.blank)]
    depth = 0
    while frontier:
        depth += 1
        nxt = []
        for key, blank in frontier:
            for target in moves[blank]:
                tile = (key >> shifts[target]) & 15
                child = key - (tile << shifts[target]) + (tile << shifts[blank])
                if child not in dist:
                    dist[child] = depth
                    nxt.append((child, target))
        frontier = nxt
    return DistanceTable(n, dist)


def load_or_build(cache: str | os.PathLike | None = None) -> DistanceTable:
    """Load the cached 3x3 table, rebuilding it when missing, stale or corrupt."""
    if cache is not None and FsPath(cache).exists():
        try:
            return DistanceTable.load(cache)
        except ValueError as exc:
            log.info("rebuilding distance table: %s", exc)
    table = build_distance_table(3)
    if cache is not None:
        FsPath(cache).parent.mkdir(parents=True, exist_ok=True)
        table.save(cache)
    return table
