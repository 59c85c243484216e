"""Domain-agnostic search vocabulary: costs, domains, nodes, paths, the incumbent."""

from __future__ import annotations

import enum
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Generic, Hashable, Iterable, Sequence, TypeVar

State = TypeVar("State")

#: Sentinel for "no solution yet". Fits in a signed 64-bit cell so it can live in shared memory.
INFINITY: int = (1 << 62) - 1


class SearchError(Exception):
    """Base class for errors raised by the search engines."""


class InvalidPath(SearchError):
    pass


class InvalidStep(InvalidPath):
    def __init__(self, index: int):
        super().__init__(f"states {index} and {index + 1} are not adjacent")
        self.index = index


class WrongEndpoints(InvalidPath):
    pass


class MismatchedJoint(SearchError):
    pass


class UnsolvableInstance(SearchError):
    pass


class TerminationReason(str, enum.Enum):
    EXHAUSTED = "Exhausted"
    CUTOFF = "Cutoff"
    BUDGET = "Budget"


# ---------------------------------------------------------------------------
# cost arithmetic


def is_finite(cost: int) -> bool:
    return cost < INFINITY


def cost_add(a: int, b: int) -> int:
    """Saturating addition: anything involving INFINITY stays INFINITY."""
    if a >= INFINITY or b >= INFINITY:
        return INFINITY
    return min(a + b, INFINITY)


def cost_sub(a: int, b: int) -> int:
    """``a - b`` where ``a`` may be INFINITY and ``b`` is finite."""
    if a >= INFINITY:
        return INFINITY
    return a - b


def as_weight(value: Any) -> Fraction:
    """Convert a user-supplied weight (``1.6``, ``"8/5"``, ``Fraction``) to an exact ratio.

    Floats go through their shortest repr so ``1.6`` becomes ``8/5`` rather than the
    binary expansion.
    """
    if isinstance(value, float):
        value = repr(value)
    weight = Fraction(value).limit_denominator(10**6)
    if weight < 1:
        raise ValueError(f"weight must be >= 1, got {value}")
    return weight


def f_weighted(g: int, h: int, weight: Fraction | int) -> Fraction:
    """Exact ``g + C*h`` as a rational number."""
    return g + Fraction(weight) * h


def scaled_priority(g: int, h: int, weight: Fraction | int, scale: int | None = None) -> int:
    """``g + C*h`` on an integer grid: the value multiplied by ``scale``.

    ``scale`` defaults to the denominator of ``weight``; any multiple of it works.
    """
    weight = Fraction(weight)
    if scale is None:
        scale = weight.denominator
    if scale % weight.denominator:
        raise ValueError(f"scale {scale} is not a multiple of the weight denominator")
    return g * scale + h * (weight.numerator * (scale // weight.denominator))


# ---------------------------------------------------------------------------
# domains, nodes and paths


class SearchDomain(ABC, Generic[State]):
    """A state space with unit-or-larger integer edge costs and an admissible heuristic.

    Implementations must be safe for concurrent read-only use, and picklable if they
    are to be searched with more than one worker process.
    """

    initial_state: State

    #: Optional compiled replacement for the generic contour search, called with
    #: the same arguments as :func:`castar.idastar.dfs_contour`.
    contour_kernel: Any = None

    @abstractmethod
    def is_goal(self, state: State) -> bool: ...

    @abstractmethod
    def successors(self, state: State) -> list[tuple[State, int]]:
        """Each neighbour exactly once, with a strictly positive edge cost."""

    @abstractmethod
    def heuristic(self, state: State) -> int: ...

    @abstractmethod
    def state_key(self, state: State) -> Hashable: ...

    def expand(self, state: State, h: int) -> Iterable[tuple[State, int, int]]:
        """Yield ``(child, edge_cost, child_h)``.

        ``h`` is the heuristic of ``state``, so domains with an incrementally
        computable heuristic can override this as the hot path of every engine.
        """
        heuristic = self.heuristic
        return [(child, cost, heuristic(child)) for child, cost in self.successors(state)]

    def is_solvable(self) -> bool:
        """Cheap pre-search reachability test; ``True`` when the domain can't tell."""
        return True


@dataclass(frozen=True, slots=True)
class Path(Generic[State]):
    states: tuple[State, ...]
    cost: int

    def __len__(self) -> int:
        return len(self.states)

    @property
    def start(self) -> State:
        return self.states[0]

    @property
    def end(self) -> State:
        return self.states[-1]


@dataclass(frozen=True, slots=True)
class SearchNode(Generic[State]):
    state: State
    g: int
    h: int
    parent: SearchNode[State] | None = None
    seq: int = 0

    def path(self) -> Path[State]:
        states = []
        node: SearchNode[State] | None = self
        while node is not None:
            states.append(node.state)
            node = node.parent
        states.reverse()
        return Path(tuple(states), self.g)


def validate_path(domain: SearchDomain[State], path: Path[State]) -> int:
    """Return the cost of ``path`` after checking it is a legal solution of ``domain``."""
    if not path.states:
        raise InvalidPath("empty path")
    key = domain.state_key
    if key(path.start) != key(domain.initial_state):
        raise WrongEndpoints("path does not start at the initial state")
    total = 0
    for i in range(len(path.states) - 1):
        target = key(path.states[i + 1])
        # with parallel edges a state sequence is charged its cheapest step
        step = min((cost for child, cost in domain.successors(path.states[i]) if key(child) == target), default=None)
        if step is None:
            raise InvalidStep(i)
        total += step
    if not domain.is_goal(path.end):
        raise WrongEndpoints("path does not end at a goal")
    if total != path.cost:
        raise InvalidPath(f"path claims cost {path.cost} but its steps sum to {total}")
    return total


def stitch(prefix: Path[State] | None, inner: Path[State]) -> Path[State]:
    """Join two paths that share their joint state."""
    if prefix is None or len(prefix) == 0:
        return inner
    if len(inner) == 0:
        return prefix
    if prefix.end != inner.start:
        raise MismatchedJoint("prefix does not end where the inner path starts")
    return Path(prefix.states + inner.states[1:], prefix.cost + inner.cost)


# ---------------------------------------------------------------------------
# incumbent


@dataclass(frozen=True, slots=True)
class Improvement:
    """One entry of the anytime log: when (``perf_counter`` seconds) a better path appeared."""

    timestamp: float
    cost: int
    path: Path


class Incumbent:
    """Best-known solution shared by all engines of one in-process search.

    ``read`` is lock-free (a single attribute load); ``offer`` updates cost and
    path together under a lock, so the two never disagree.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._cost = INFINITY
        self._path: Path | None = None
        self.history: list[Improvement] = []

    def read(self) -> int:
        return self._cost

    @property
    def best_cost(self) -> int:
        return self._cost

    @property
    def best_path(self) -> Path | None:
        with self._lock:
            return self._path

    def offer(self, cost: int, path: Path) -> bool:
        if cost >= self._cost:
            return False
        with self._lock:
            if cost >= self._cost:
                return False
            self._path = path
            self._cost = cost
            self.history.append(Improvement(time.perf_counter(), cost, path))
            return True


# ---------------------------------------------------------------------------
# budgets


#: Expansions between polls of the clock, the cutoff and the shared stop flag.
POLL_INTERVAL = 4096


class Budget:
    """Stopping rules shared by the engines of one search run.

    The run stops when the wall-clock limit passes, when the total expansion count
    reaches ``node_limit``, or when the incumbent reaches ``cutoff``. The first
    reason observed is latched in ``stop_reason`` so every engine agrees.
    """

    def __init__(
        self,
        time_limit: float | None = None,
        node_limit: int | None = None,
        cutoff: int | None = None,
        start: float | None = None,
    ) -> None:
        self.start = time.perf_counter() if start is None else start
        self.deadline = None if time_limit is None else self.start + time_limit
        self.node_limit = node_limit
        self.cutoff = cutoff
        self._nodes = 0
        self._reason: TerminationReason | None = None

    # storage hooks, overridden by the process-shared variant
    @property
    def nodes(self) -> int:
        return self._nodes

    def charge(self, n: int) -> None:
        self._nodes += n

    @property
    def stop_reason(self) -> TerminationReason | None:
        return self._reason

    def request_stop(self, reason: TerminationReason) -> None:
        if self._reason is None:
            self._reason = reason

    def remaining_nodes(self) -> int:
        if self.node_limit is None:
            return INFINITY
        return max(0, self.node_limit - self.nodes)

    def poll(self, incumbent_cost: int) -> TerminationReason | None:
        """Check every stopping rule; latch and return the reason if one fires."""
        if self.stop_reason is not None:
            return self.stop_reason
        if self.cutoff is not None and incumbent_cost <= self.cutoff:
            self.request_stop(TerminationReason.CUTOFF)
        elif self.node_limit is not None and self.nodes >= self.node_limit:
            self.request_stop(TerminationReason.BUDGET)
        elif self.deadline is not None and time.perf_counter() >= self.deadline:
            self.request_stop(TerminationReason.BUDGET)
        return self.stop_reason


# ---------------------------------------------------------------------------
# results


@dataclass
class SearchStats:
    outer_expansions: int = 0
    inner_expansions: int = 0
    subtasks_spawned: int = 0
    subtasks_completed: int = 0
    subtasks_pruned: int = 0
    subtasks_remaining: int = 0
    max_open: int = 0
    reason: TerminationReason = TerminationReason.EXHAUSTED
    elapsed: float = 0.0

    @property
    def expansions(self) -> int:
        return self.outer_expansions + self.inner_expansions

    def counters(self) -> dict[str, int | str]:
        """Everything except wall time, for determinism checks."""
        return {
            "outer_expansions": self.outer_expansions,
            "inner_expansions": self.inner_expansions,
            "subtasks_spawned": self.subtasks_spawned,
            "subtasks_completed": self.subtasks_completed,
            "subtasks_pruned": self.subtasks_pruned,
            "subtasks_remaining": self.subtasks_remaining,
            "max_open": self.max_open,
            "reason": self.reason.value,
        }


@dataclass(frozen=True, slots=True)
class LogEntry:
    elapsed: float
    cost: int
    path: Path


@dataclass
class SearchResult:
    best_cost: int
    best_path: Path | None
    anytime_log: list[LogEntry] = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def solved(self) -> bool:
        return self.best_path is not None


def anytime_log(history: Sequence[Improvement], start: float) -> list[LogEntry]:
    """Order improvements by cost (their linearization order) and rebase their clock."""
    entries = sorted(history, key=lambda imp: -imp.cost)
    return [LogEntry(max(0.0, imp.timestamp - start), imp.cost, imp.path) for imp in entries]
