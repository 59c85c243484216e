"""The N^2-1 sliding-tile puzzle as a search domain."""

from __future__ import annotations

import enum
import random
from functools import lru_cache
from typing import NamedTuple, Sequence

from .core import SearchDomain

MIN_SIZE = 3
MAX_SIZE = 5


class PuzzleError(ValueError):
    pass


class UnsupportedSize(PuzzleError):
    pass


class BadToken(PuzzleError):
    pass


class NotAPermutation(PuzzleError):
    pass


class SizeMismatch(PuzzleError):
    pass


class Board(NamedTuple):
    """Row-major tile layout; ``0`` is the blank and ``blank`` caches its index."""

    n: int
    tiles: tuple[int, ...]
    blank: int

    @classmethod
    def from_tiles(cls, tiles: Sequence[int], n: int | None = None) -> Board:
        tiles = tuple(int(t) for t in tiles)
        if n is None:
            n = round(len(tiles) ** 0.5)
        _check_size(n)
        if len(tiles) != n * n:
            raise SizeMismatch(f"expected {n * n} tiles for n={n}, got {len(tiles)}")
        if sorted(tiles) != list(range(n * n)):
            raise NotAPermutation(f"tiles are not a permutation of 0..{n * n - 1}")
        return cls(n, tiles, tiles.index(0))

    def __str__(self) -> str:
        return format_board(self).split("\n", 1)[1].rstrip("\n")


class Move(enum.Enum):
    """Direction the blank travels."""

    UP = "U"
    DOWN = "D"
    LEFT = "L"
    RIGHT = "R"

    @property
    def inverse(self) -> Move:
        return _INVERSE[self]


_INVERSE = {Move.UP: Move.DOWN, Move.DOWN: Move.UP, Move.LEFT: Move.RIGHT, Move.RIGHT: Move.LEFT}
MOVE_ORDER = (Move.UP, Move.DOWN, Move.LEFT, Move.RIGHT)


def _check_size(n: int) -> None:
    if not MIN_SIZE <= n <= MAX_SIZE:
        raise UnsupportedSize(f"side length must be in [{MIN_SIZE}, {MAX_SIZE}], got {n}")


@lru_cache(maxsize=None)
def _neighbours(n: int) -> tuple[tuple[tuple[Move, int], ...], ...]:
    """For each blank index, the legal ``(move, target index)`` pairs in fixed order."""
    table = []
    for pos in range(n * n):
        r, c = divmod(pos, n)
        legal = []
        if r > 0:
            legal.append((Move.UP, pos - n))
        if r < n - 1:
            legal.append((Move.DOWN, pos + n))
        if c > 0:
            legal.append((Move.LEFT, pos - 1))
        if c < n - 1:
            legal.append((Move.RIGHT, pos + 1))
        table.append(tuple(legal))
    return tuple(table)


@lru_cache(maxsize=None)
def _distance_table(n: int, goal: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    """``table[tile][pos]`` is the Manhattan distance from ``pos`` to the tile's goal cell."""
    where = {tile: divmod(i, n) for i, tile in enumerate(goal)}
    table = []
    for tile in range(n * n):
        gr, gc = where[tile]
        if tile == 0:
            table.append((0,) * (n * n))
            continue
        table.append(tuple(abs(p // n - gr) + abs(p % n - gc) for p in range(n * n)))
    return tuple(table)


def goal_board(n: int) -> Board:
    _check_size(n)
    return Board(n, tuple(range(1, n * n)) + (0,), n * n - 1)


def apply_move(b: Board, move: Move) -> Board:
    for m, target in _neighbours(b.n)[b.blank]:
        if m is move:
            return _slide(b, target)
    raise PuzzleError(f"move {move.name} is illegal with the blank at {b.blank}")


def _slide(b: Board, target: int) -> Board:
    tiles = list(b.tiles)
    tiles[b.blank] = tiles[target]
    tiles[target] = 0
    return Board(b.n, tuple(tiles), target)


def legal_moves(b: Board) -> list[Move]:
    return [m for m, _ in _neighbours(b.n)[b.blank]]


def successors(b: Board) -> list[tuple[Board, int]]:
    return [(_slide(b, target), 1) for _, target in _neighbours(b.n)[b.blank]]


def manhattan(b: Board, goal: Board | None = None) -> int:
    table = _distance_table(b.n, (goal or goal_board(b.n)).tiles)
    return sum(table[tile][pos] for pos, tile in enumerate(b.tiles))


def _permutation_parity(perm: Sequence[int]) -> int:
    """Parity of a permutation of ``0..len-1`` via its cycle decomposition."""
    seen = [False] * len(perm)
    transpositions = 0
    for i in range(len(perm)):
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length:
            transpositions += length - 1
    return transpositions & 1


def inversions(b: Board) -> int:
    tiles = [t for t in b.tiles if t]
    return sum(1 for i in range(len(tiles)) for j in range(i + 1, len(tiles)) if tiles[i] > tiles[j])


def is_solvable(b: Board, goal: Board | None = None) -> bool:
    """True iff ``goal`` (default: blank last) is reachable from ``b``.

    Every slide is a transposition involving the blank and moves the blank by one
    cell, so the parity of the full board permutation (blank included) must match
    the parity of the blank's taxicab distance to its goal cell. For the default
    goal and odd ``n`` this is the familiar "even number of inversions"; for even
    ``n`` it is "inversions + blank row from the bottom is odd".
    """
    goal = goal or goal_board(b.n)
    if goal.n != b.n:
        raise SizeMismatch("board and goal differ in size")
    where = {tile: i for i, tile in enumerate(goal.tiles)}
    perm = [where[tile] for tile in b.tiles]
    n = b.n
    blank_dist = abs(b.blank // n - goal.blank // n) + abs(b.blank % n - goal.blank % n)
    return _permutation_parity(perm) == blank_dist & 1


def scramble(b: Board, k: int, seed: int | str | None) -> Board:
    """Apply ``k`` random legal moves, never undoing the previous one."""
    if k < 0:
        raise ValueError("move count must be non-negative")
    rng = random.Random(seed)
    table = _neighbours(b.n)
    previous: Move | None = None
    for _ in range(k):
        options = [(m, t) for m, t in table[b.blank] if previous is None or m is not previous.inverse]
        move, target = rng.choice(options)
        b = _slide(b, target)
        previous = move
    return b


def moves_between(a: Board, b: Board) -> Move:
    """The single blank move turning ``a`` into ``b``."""
    for m, target in _neighbours(a.n)[a.blank]:
        if target == b.blank:
            return m
    raise PuzzleError("boards are not one slide apart")


def path_moves(states: Sequence[Board]) -> list[Move]:
    return [moves_between(a, b) for a, b in zip(states, states[1:])]


def state_key(b: Board) -> bytes:
    """One byte per cell; fixed length n*n and injective for any n <= 5."""
    return bytes(b.tiles)


def pack_key(b: Board) -> int:
    """Compact integer encoding, 4 bits per cell (n <= 4 only)."""
    if b.n > 4:
        raise UnsupportedSize("4-bit packing only covers boards up to 4x4")
    key = 0
    for tile in reversed(b.tiles):
        key = (key << 4) | tile
    return key


def unpack_key(key: int, n: int) -> Board:
    tiles = []
    for _ in range(n * n):
        tiles.append(key & 15)
        key >>= 4
    return Board.from_tiles(tiles, n)


# ---------------------------------------------------------------------------
# text format


def parse_board(text: str) -> Board:
    """Parse ``n`` followed by ``n`` rows of ``n`` integers; ``#`` lines are comments."""
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([int(tok) for tok in line.split()])
        except ValueError as exc:
            raise BadToken(f"not an integer in line {raw!r}") from exc
    if not rows:
        raise SizeMismatch("empty instance")
    header = rows[0]
    if len(header) != 1:
        raise SizeMismatch("first line must hold only the side length")
    n = header[0]
    _check_size(n)
    body = rows[1:]
    values = [v for row in body for v in row]
    if len(body) != n or any(len(row) != n for row in body):
        raise SizeMismatch(f"expected {n} rows of {n} values, got {len(values)} values")
    return Board.from_tiles(values, n)


def format_board(b: Board) -> str:
    n = b.n
    lines = [str(n)]
    for r in range(n):
        lines.append(" ".join(str(t) for t in b.tiles[r * n : (r + 1) * n]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# the search domain


@lru_cache(maxsize=None)
def _native_kernel(n: int, goal: tuple[int, ...]):
    try:
        from ._kernel import PuzzleKernel
    except ImportError:  # pragma: no cover - numba missing
        return None
    neighbours = tuple(tuple(t for _, t in legal) for legal in _neighbours(n))
    return PuzzleKernel(n, neighbours, _distance_table(n, goal))


class PuzzleDomain(SearchDomain[Board]):
    """Unit-cost sliding puzzle with the Manhattan-distance heuristic.

    ``goal`` defaults to the blank-last layout returned by :func:`goal_board`.
    With ``native`` (and numba importable) IDA* contours run in compiled code.
    """

    def __init__(self, initial: Board, goal: Board | None = None, native: bool = True) -> None:
        self.n = initial.n
        self.initial_state = initial
        self.goal = goal or goal_board(initial.n)
        if self.goal.n != self.n:
            raise SizeMismatch("initial and goal boards differ in size")
        self._goal_tiles = self.goal.tiles
        self._table = _distance_table(self.n, self.goal.tiles)
        self._neighbours = tuple(tuple(t for _, t in legal) for legal in _neighbours(self.n))
        self.native = native
        if native:
            self.contour_kernel = _native_kernel(self.n, self.goal.tiles)

    def __reduce__(self):
        return (PuzzleDomain, (self.initial_state, self.goal, self.native))

    def is_goal(self, state: Board) -> bool:
        return state.tiles == self._goal_tiles

    def successors(self, state: Board) -> list[tuple[Board, int]]:
        return successors(state)

    def heuristic(self, state: Board) -> int:
        table = self._table
        return sum(table[tile][pos] for pos, tile in enumerate(state.tiles))

    def state_key(self, state: Board) -> bytes:
        return bytes(state.tiles)

    def expand(self, state: Board, h: int) -> list[tuple[Board, int, int]]:
        table = self._table
        n = self.n
        blank = state.blank
        tiles = state.tiles
        out = []
        for target in self._neighbours[blank]:
            tile = tiles[target]
            row = table[tile]
            child = list(tiles)
            child[blank] = tile
            child[target] = 0
            out.append((Board(n, tuple(child), target), 1, h + row[blank] - row[target]))
        return out

    def is_solvable(self) -> bool:
        return is_solvable(self.initial_state, self.goal)
