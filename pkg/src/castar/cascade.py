"""Cascading A*: a weighted-A* feeder that forks incumbent-pruned IDA* subtasks.

With ``workers == 1`` everything runs on the calling thread: after each outer
expansion the pending subtasks are solved in emission order, which makes the
run (minus wall times) fully deterministic. With more workers the feeder runs
in this process and subtasks go through a bounded queue to worker processes;
the incumbent lives in shared memory so every worker prunes against the
current best.
"""

from __future__ import annotations

import collections
import multiprocessing as mp
import os
import pickle
import queue as queue_mod
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Generic

from .core import (
    INFINITY,
    Budget,
    Improvement,
    Incumbent,
    Path,
    SearchDomain,
    SearchNode,
    SearchResult,
    SearchStats,
    State,
    TerminationReason,
    UnsolvableInstance,
    anytime_log,
    as_weight,
    stitch,
)
from .idastar import ida_star
from .wastar import OuterSearch, ThresholdParams

__all__ = [
    "CascadeConfig",
    "SharedBudget",
    "SharedIncumbent",
    "Subtask",
    "cascading_astar",
    "stitch",
]

#: Queue slots per worker. Bounds how far the feeder runs ahead of the pool.
QUEUE_SLOTS_PER_WORKER = 2
#: Capacity of the shared buffer holding the pickled best path.
PATH_BUFFER_BYTES = 1 << 20


@dataclass
class CascadeConfig:
    weight: Fraction = Fraction(3, 2)
    thetas: ThresholdParams = field(default_factory=ThresholdParams)
    workers: int = 1
    cutoff: int | None = None
    time_budget: float | None = None
    node_budget: int | None = None
    prune_outer: bool = True

    def __post_init__(self) -> None:
        self.weight = as_weight(self.weight)
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.cutoff is not None and self.cutoff < 0:
            raise ValueError("cutoff must be >= 0")
        if self.time_budget is not None and self.time_budget <= 0:
            raise ValueError("time budget must be positive")
        if self.node_budget is not None and self.node_budget < 0:
            raise ValueError("node budget must be >= 0")


@dataclass(frozen=True)
class Subtask(Generic[State]):
    start: State
    g_offset: int
    h: int
    prefix: Path[State]

    @classmethod
    def from_node(cls, node: SearchNode[State]) -> Subtask[State]:
        return cls(node.state, node.g, node.h, node.path())


# ---------------------------------------------------------------------------
# process-shared incumbent and budget


class SharedIncumbent:
    """Incumbent whose cost and best path live in shared memory.

    Reads are a single unlocked 64-bit load. Offers take the lock, compare,
    store the pickled path and the cost, and record the improvement: directly in
    ``history`` when offered by the creating process, otherwise as an event on
    ``events`` for the creator to collect.
    """

    def __init__(self, ctx: Any, events: Any = None) -> None:
        self._owner = os.getpid()
        self.history: list[Improvement] = []
        self._cost = ctx.RawValue("q", INFINITY)
        self._lock = ctx.Lock()
        self._buf = ctx.RawArray("B", PATH_BUFFER_BYTES)
        self._len = ctx.RawValue("q", 0)
        self._events = events

    def read(self) -> int:
        return self._cost.value

    @property
    def best_cost(self) -> int:
        return self._cost.value

    @property
    def best_path(self) -> Path | None:
        with self._lock:
            n = self._len.value
            if n == 0:
                return None
            return pickle.loads(bytes(self._buf[:n]))

    def offer(self, cost: int, path: Path) -> bool:
        if cost >= self._cost.value:
            return False
        data = pickle.dumps(path, protocol=pickle.HIGHEST_PROTOCOL)
        if len(data) > PATH_BUFFER_BYTES:
            raise ValueError("solution path too large for the shared buffer")
        with self._lock:
            if cost >= self._cost.value:
                return False
            self._buf[: len(data)] = data
            self._len.value = len(data)
            self._cost.value = cost
            stamp = time.perf_counter()
        improvement = Improvement(stamp, cost, path)
        if os.getpid() == self._owner:
            self.history.append(improvement)
        elif self._events is not None:
            self._events.put(("improved", improvement))
        return True


_REASONS = [None, TerminationReason.CUTOFF, TerminationReason.BUDGET, TerminationReason.EXHAUSTED]


class SharedBudget(Budget):
    """Budget whose node counter and stop flag are shared between processes."""

    def __init__(self, ctx: Any, time_limit=None, node_limit=None, cutoff=None, start=None) -> None:
        super().__init__(time_limit, node_limit, cutoff, start)
        self._shared_nodes = ctx.Value("q", 0)
        self._flag = ctx.RawValue("i", 0)

    @property
    def nodes(self) -> int:
        return self._shared_nodes.value

    def charge(self, n: int) -> None:
        if n:
            with self._shared_nodes.get_lock():
                self._shared_nodes.value += n

    @property
    def stop_reason(self) -> TerminationReason | None:
        return _REASONS[self._flag.value]

    def request_stop(self, reason: TerminationReason) -> None:
        if self._flag.value == 0:
            self._flag.value = _REASONS.index(reason)


# ---------------------------------------------------------------------------
# workers


@dataclass
class _WorkerTally:
    expansions: int = 0
    completed: int = 0
    pruned: int = 0
    dropped: int = 0


def _run_subtask(domain, task: Subtask, inc, budget: Budget, tally: _WorkerTally) -> None:
    if budget.stop_reason is not None:
        tally.dropped += 1
        return
    if task.g_offset + task.h >= inc.read():
        tally.pruned += 1
        return
    res = ida_star(
        domain, task.start, inc, g_offset=task.g_offset, h=task.h, prefix=task.prefix, budget=budget
    )
    tally.completed += 1
    tally.expansions += res.expansions


def _worker_main(domain, tasks, inc: SharedIncumbent, budget: SharedBudget, events) -> None:
    tally = _WorkerTally()
    try:
        while True:
            task = tasks.get()
            if task is None:
                break
            _run_subtask(domain, task, inc, budget, tally)
    finally:
        events.put(("done", tally))


# ---------------------------------------------------------------------------
# orchestration


def cascading_astar(domain: SearchDomain[State], cfg: CascadeConfig | None = None) -> SearchResult:
    """Run Cascading A* on ``domain`` and return the best solution found."""
    cfg = cfg or CascadeConfig()
    if not domain.is_solvable():
        raise UnsolvableInstance("the initial state cannot reach the goal")
    if cfg.workers == 1:
        return _run_sequential(domain, cfg)
    return _run_parallel(domain, cfg)


def _finish(inc, history, start: float, outer: OuterSearch, tally: _WorkerTally, spawned: int, budget) -> SearchResult:
    reason = budget.stop_reason or outer.stats.stop_reason or TerminationReason.EXHAUSTED
    stats = SearchStats(
        outer_expansions=outer.stats.expansions,
        inner_expansions=tally.expansions,
        subtasks_spawned=spawned,
        subtasks_completed=tally.completed,
        subtasks_pruned=tally.pruned,
        subtasks_remaining=tally.dropped,
        max_open=outer.stats.max_open,
        reason=reason,
        elapsed=time.perf_counter() - start,
    )
    return SearchResult(inc.best_cost, inc.best_path, anytime_log(history, start), stats)


def _run_sequential(domain: SearchDomain[State], cfg: CascadeConfig) -> SearchResult:
    start = time.perf_counter()
    inc = Incumbent()
    budget = Budget(cfg.time_budget, cfg.node_budget, cfg.cutoff, start=start)
    pending: collections.deque[Subtask[State]] = collections.deque()
    outer = OuterSearch(
        domain, cfg.weight, cfg.thetas, inc,
        sink=lambda node: pending.append(Subtask.from_node(node)),
        budget=budget, prune=cfg.prune_outer,
    )
    tally = _WorkerTally()
    spawned = 0
    while True:
        progressed = outer.step()
        spawned += len(pending)
        while pending:
            _run_subtask(domain, pending.popleft(), inc, budget, tally)
        if not progressed:
            break
    return _finish(inc, inc.history, start, outer, tally, spawned, budget)


def _context():
    methods = mp.get_all_start_methods()
    return mp.get_context("fork" if "fork" in methods else "spawn")


def _run_parallel(domain: SearchDomain[State], cfg: CascadeConfig) -> SearchResult:
    ctx = _context()
    start = time.perf_counter()
    events = ctx.Queue()
    tasks = ctx.Queue(maxsize=QUEUE_SLOTS_PER_WORKER * cfg.workers)
    inc = SharedIncumbent(ctx, events)
    budget = SharedBudget(ctx, cfg.time_budget, cfg.node_budget, cfg.cutoff, start=start)

    history = inc.history
    tally = _WorkerTally()
    done = threading.Event()

    def collect() -> None:
        remaining = cfg.workers
        while remaining:
            kind, payload = events.get()
            if kind == "improved":
                history.append(payload)
            elif kind == "done":
                remaining -= 1
                tally.expansions += payload.expansions
                tally.completed += payload.completed
                tally.pruned += payload.pruned
                tally.dropped += payload.dropped
        done.set()

    procs = [
        ctx.Process(target=_worker_main, args=(domain, tasks, inc, budget, events), daemon=True)
        for _ in range(cfg.workers)
    ]
    for p in procs:
        p.start()
    collector = threading.Thread(target=collect, daemon=True)
    collector.start()

    spawned = 0

    def put(item) -> None:
        # Blocks while the queue is full, but keeps an eye on the stop flag and
        # on dead workers so the feeder can never hang.
        while True:
            try:
                tasks.put(item, timeout=0.05)
                return
            except queue_mod.Full:
                budget.poll(inc.read())
                if not any(p.is_alive() for p in procs):
                    raise RuntimeError("all search workers exited unexpectedly")

    def sink(node: SearchNode[State]) -> None:
        nonlocal spawned
        spawned += 1
        put(Subtask.from_node(node))

    outer = OuterSearch(domain, cfg.weight, cfg.thetas, inc, sink=sink, budget=budget, prune=cfg.prune_outer)
    try:
        outer.run()
        for _ in procs:
            put(None)
        while not done.wait(0.1):
            if not any(p.is_alive() for p in procs) and not done.is_set():
                # give the collector a moment to read the last "done" messages
                collector.join(1.0)
                if not done.is_set():
                    raise RuntimeError("search workers exited without reporting")
        for p in procs:
            p.join()
    finally:
        for p in procs:
            if p.is_alive():
                p.terminate()
                p.join()
    return _finish(inc, history, start, outer, tally, spawned, budget)
