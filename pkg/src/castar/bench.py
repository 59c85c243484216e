"""Benchmark sweeps over instance suites, reported as CSV like the usual speedup tables."""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path as FsPath
from typing import Iterable, Sequence, TextIO

from .cascade import CascadeConfig, cascading_astar
from .core import LogEntry, SearchDomain, SearchResult, TerminationReason
from .idastar import solve_idastar
from .puzzle import Board, parse_board
from .wastar import ThresholdParams, solve_astar

ALGORITHMS = ("astar", "wastar", "idastar", "castar")
BENCH_HEADER = ("case", "workers", "seconds", "answer", "relative")
ANYTIME_HEADER = ("elapsed_seconds", "cost")


def run_algorithm(
    domain: SearchDomain,
    algo: str,
    *,
    weight: Fraction | float = Fraction(3, 2),
    thetas: ThresholdParams | None = None,
    workers: int = 1,
    cutoff: int | None = None,
    time_limit: float | None = None,
    node_limit: int | None = None,
) -> SearchResult:
    """Dispatch to one engine. ``astar`` runs to exhaustion (optimal), ``wastar``
    stops at its first solution, ``idastar`` ignores weight and thresholds."""
    if algo == "astar":
        return solve_astar(domain, weight, time_limit=time_limit, node_limit=node_limit, cutoff=cutoff)
    if algo == "wastar":
        return solve_astar(
            domain, weight, first_solution=True, time_limit=time_limit, node_limit=node_limit, cutoff=cutoff
        )
    if algo == "idastar":
        return solve_idastar(domain, time_limit=time_limit, node_limit=node_limit, cutoff=cutoff)
    if algo == "castar":
        cfg = CascadeConfig(
            weight=weight,
            thetas=thetas or ThresholdParams(),
            workers=workers,
            cutoff=cutoff,
            time_budget=time_limit,
            node_budget=node_limit,
        )
        return cascading_astar(domain, cfg)
    raise ValueError(f"unknown algorithm {algo!r}; expected one of {', '.join(ALGORITHMS)}")


def write_anytime_csv(entries: Iterable[LogEntry], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(ANYTIME_HEADER)
    for e in entries:
        writer.writerow([f"{e.elapsed:.6f}", e.cost])


# ---------------------------------------------------------------------------
# suites


def load_suite(directory: str | FsPath) -> list[tuple[str, Board]]:
    """Instances listed in ``manifest.json`` if there is one, else every ``*.txt``."""
    directory = FsPath(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"suite directory not found: {directory}")
    manifest = directory / "manifest.json"
    if manifest.exists():
        names = json.loads(manifest.read_text())["files"]
    else:
        names = sorted(p.name for p in directory.glob("*.txt"))
    return [(FsPath(name).stem, parse_board((directory / name).read_text())) for name in names]


def load_cutoffs(path: str | FsPath) -> dict[str, int]:
    """``case cost`` or ``case,cost`` per line; ``#`` starts a comment."""
    cutoffs = {}
    for line in FsPath(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise ValueError(f"bad cutoff line: {line!r}")
        cutoffs[FsPath(parts[0]).stem] = int(parts[1])
    return cutoffs


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class BenchRow:
    case: str
    workers: int
    seconds: float
    answer: int | None
    relative: float | None = None
    timeout: bool = False

    def cells(self) -> list[str]:
        answer = "" if self.answer is None else str(self.answer)
        if self.timeout:
            relative = "timeout"
        elif self.relative is None:
            relative = ""
        else:
            relative = f"{self.relative:.2f}"
        return [self.case, str(self.workers), f"{self.seconds:.3f}", answer, relative]


def geometric_mean(values: Sequence[float]) -> float:
    return math.exp(statistics.fmean(math.log(v) for v in values))


def _timed(fn) -> tuple[float, SearchResult]:
    t0 = time.perf_counter()
    result = fn()
    return time.perf_counter() - t0, result


def _median_run(runs: list[tuple[float, SearchResult]]) -> tuple[float, SearchResult]:
    """Median wall time, and the run it came from (the lower middle for even counts)."""
    ordered = sorted(runs, key=lambda r: r[0])
    seconds = statistics.median(r[0] for r in ordered)
    return seconds, ordered[(len(ordered) - 1) // 2][1]


def _timed_out(result: SearchResult) -> bool:
    return result.stats.reason is TerminationReason.BUDGET


def measure(
    domain: SearchDomain,
    algo: str,
    repeats: int,
    **kwargs,
) -> tuple[float, SearchResult, bool]:
    runs = [_timed(lambda: run_algorithm(domain, algo, **kwargs)) for _ in range(repeats)]
    seconds, result = _median_run(runs)
    return seconds, result, any(_timed_out(r) for _, r in runs)


@dataclass
class BenchReport:
    rows: list[BenchRow]
    workers: list[int]
    idastar: list[tuple[str, float, int | None, float | None]] | None = None

    def summary(self) -> list[tuple[int, float, float, int]]:
        """Per worker count: geometric and arithmetic mean relative time, and case count."""
        out = []
        for w in self.workers:
            rel = [r.relative for r in self.rows if r.workers == w and r.relative is not None and not r.timeout]
            if rel:
                out.append((w, geometric_mean(rel), statistics.fmean(rel), len(rel)))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(BENCH_HEADER)
        for row in self.rows:
            writer.writerow(row.cells())
        buf.write("# summary: workers,geomean_relative,mean_relative,cases\n")
        for w, geo, mean, count in self.summary():
            buf.write(f"# {w},{geo:.3f},{mean:.3f},{count}\n")
        if self.idastar is not None:
            buf.write("# idastar: case,seconds,answer,castar_1worker_relative\n")
            ratios = []
            for case, seconds, answer, ratio in self.idastar:
                answer_text = "" if answer is None else str(answer)
                ratio_text = "" if ratio is None else f"{ratio:.3f}"
                buf.write(f"# {case},{seconds:.3f},{answer_text},{ratio_text}\n")
                if ratio is not None:
                    ratios.append(ratio)
            if ratios:
                buf.write(f"# castar_vs_idastar_geomean,{geometric_mean(ratios):.3f}\n")
        return buf.getvalue()


def _warm_up(domain_factory, n: int, algo: str, compare_idastar: bool) -> None:
    """Load compiled kernels before the clock starts."""
    from .puzzle import goal_board, scramble

    domain = domain_factory(scramble(goal_board(n), 12, 0))
    run_algorithm(domain, algo)
    if compare_idastar:
        run_algorithm(domain, "idastar")


def run_bench(
    suite: Sequence[tuple[str, Board]],
    workers_list: Sequence[int],
    *,
    algo: str = "castar",
    repeats: int = 3,
    cutoffs: dict[str, int] | None = None,
    time_limit: float | None = None,
    weight: Fraction | float = Fraction(3, 2),
    thetas: ThresholdParams | None = None,
    compare_idastar: bool = False,
    domain_factory=None,
) -> BenchReport:
    """Time every case at every worker count, one run at a time.

    Relative times are per case, against that case's run at the first worker
    count in ``workers_list`` (normally 1).
    """
    from .puzzle import PuzzleDomain

    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    if not workers_list:
        raise ValueError("need at least one worker count")
    domain_factory = domain_factory or PuzzleDomain
    cutoffs = cutoffs or {}
    if suite:
        _warm_up(domain_factory, suite[0][1].n, algo, compare_idastar)
    rows: list[BenchRow] = []
    idastar_rows = [] if compare_idastar else None
    for case, board in suite:
        domain = domain_factory(board)
        case_rows = []
        for w in workers_list:
            seconds, result, timed_out = measure(
                domain, algo, repeats,
                weight=weight, thetas=thetas, workers=w, cutoff=cutoffs.get(case), time_limit=time_limit,
            )
            answer = result.best_cost if result.solved else None
            case_rows.append(BenchRow(case, w, seconds, answer, timeout=timed_out))
        base = case_rows[0]
        for row in case_rows:
            if not base.timeout and not row.timeout and base.seconds > 0:
                row.relative = row.seconds / base.seconds
        rows.extend(case_rows)
        if idastar_rows is not None:
            seconds, result, timed_out = measure(
                domain, "idastar", repeats, cutoff=cutoffs.get(case), time_limit=time_limit
            )
            answer = result.best_cost if result.solved else None
            ratio = None if timed_out or base.timeout or seconds <= 0 else base.seconds / seconds
            idastar_rows.append((case, seconds, answer, ratio))
    return BenchReport(rows, list(workers_list), idastar_rows)
