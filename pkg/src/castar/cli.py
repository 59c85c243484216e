"""Command-line entry point: ``castar solve | gen | bench``."""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from fractions import Fraction
from pathlib import Path as FsPath
from typing import Sequence

from . import __version__
from .bench import ALGORITHMS, load_cutoffs, load_suite, run_algorithm, run_bench, write_anytime_csv
from .core import as_weight
from .puzzle import PuzzleDomain, PuzzleError, format_board, goal_board, is_solvable, parse_board, path_moves, scramble
from .wastar import ThresholdParams

EXIT_OK = 0
EXIT_UNSOLVABLE = 2
EXIT_NO_SOLUTION = 3
EXIT_USAGE = 64
EXIT_NOINPUT = 66

log = logging.getLogger("castar")


class UsageError(Exception):
    pass


class InputError(Exception):
    """An input file exists but cannot be used."""


def _read_instance(path: str):
    text = sys.stdin.read() if path == "-" else FsPath(path).read_text()
    try:
        return parse_board(text)
    except PuzzleError as exc:
        raise InputError(f"{path}: {exc}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _weight(text: str) -> Fraction:
    try:
        return as_weight(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _thetas(text: str) -> ThresholdParams:
    try:
        return ThresholdParams.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("worker counts must be positive")
    return values


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _add_engine_flags(p: argparse.ArgumentParser, default_algo: str) -> None:
    p.add_argument("--algo", choices=ALGORITHMS, default=default_algo)
    p.add_argument("--weight", type=_weight, default=Fraction(3, 2), help="weight C in g + C*h (default 1.5)")
    p.add_argument("--theta", type=_thetas, default=ThresholdParams(), help="envelope thresholds t1,t2,t3 (default 30,40,15)")
    p.add_argument("--cutoff", type=_nonneg_int, help="stop as soon as a solution this cheap is found")
    p.add_argument("--time-limit", type=_positive_float, help="wall-clock limit in seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="castar", description="Cascading A* for the N^2-1 sliding puzzle.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="solve one instance")
    solve.add_argument("--config", help="key=value file of defaults for any flag")
    solve.add_argument("--instance", required=True, help="instance file ('-' for stdin)")
    _add_engine_flags(solve, "castar")
    solve.add_argument("--workers", type=_positive_int, default=1)
    solve.add_argument("--node-limit", type=_nonneg_int)
    solve.add_argument("--anytime-log", help="write elapsed_seconds,cost rows here")
    solve.add_argument("--json", action="store_true", help="print a JSON report")

    gen = sub.add_parser("gen", help="write a reproducible suite of scrambled instances")
    gen.add_argument("--config", help="key=value file of defaults for any flag")
    gen.add_argument("--n", type=int, default=4)
    gen.add_argument("--moves", type=_nonneg_int, default=80)
    gen.add_argument("--count", type=_nonneg_int, default=5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    bench = sub.add_parser("bench", help="time a suite across worker counts")
    bench.add_argument("--config", help="key=value file of defaults for any flag")
    bench.add_argument("--suite", required=True)
    _add_engine_flags(bench, "castar")
    bench.add_argument("--workers-list", type=_int_list, default=[1, 2, 4, 8])
    bench.add_argument("--cutoff-file")
    bench.add_argument("--repeats", type=_positive_int, default=3)
    bench.add_argument("--compare-idastar", action="store_true", help="also time standalone IDA* per case")
    bench.add_argument("--out", help="CSV destination (default stdout)")
    parser.set_defaults(subcommands={"solve": solve, "gen": gen, "bench": bench})
    return parser


def read_config(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; keys are long flag names with or without dashes."""
    values = {}
    for lineno, raw in enumerate(FsPath(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    """Turn config-file entries into defaults on the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config or not known.command:
        return
    try:
        values = read_config(known.config)
    except OSError as exc:
        raise FileNotFoundError(f"cannot read config {known.config}: {exc}") from exc
    subparser = parser.get_default("subcommands").get(known.command)
    if subparser is None:
        return
    actions = {a.dest: a for a in subparser._actions}
    for key, value in values.items():
        action = actions.get(key)
        if action is None:
            raise UsageError(f"unknown config key {key!r} for '{known.command}'")
        if isinstance(action, argparse._StoreTrueAction):
            action.default = value.lower() in ("1", "true", "yes", "on")
        else:
            action.default = value
            action.required = False


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args: argparse.Namespace) -> int:
    board = _read_instance(args.instance)
    if not is_solvable(board):
        report = {"instance": args.instance, "algo": args.algo, "solved": False, "reason": "Unsolvable"}
        if args.json:
            print(json.dumps(report))
        else:
            print("instance is unsolvable (parity check)")
        return EXIT_UNSOLVABLE

    result = run_algorithm(
        PuzzleDomain(board),
        args.algo,
        weight=args.weight,
        thetas=args.theta,
        workers=args.workers,
        cutoff=args.cutoff,
        time_limit=args.time_limit,
        node_limit=args.node_limit,
    )
    stats = result.stats
    moves = "".join(m.value for m in path_moves(result.best_path.states)) if result.solved else None
    if args.anytime_log:
        with open(args.anytime_log, "w", newline="") as fh:
            write_anytime_csv(result.anytime_log, fh)

    report = {
        "instance": args.instance,
        "algo": args.algo,
        "n": board.n,
        "solved": result.solved,
        "cost": result.best_cost if result.solved else None,
        "moves": moves,
        "expansions": stats.expansions,
        "outer_expansions": stats.outer_expansions,
        "inner_expansions": stats.inner_expansions,
        "subtasks": stats.subtasks_spawned,
        "elapsed": round(stats.elapsed, 6),
        "reason": stats.reason.value,
        "anytime": [{"elapsed": round(e.elapsed, 6), "cost": e.cost} for e in result.anytime_log],
    }
    if args.json:
        print(json.dumps(report))
    else:
        print(f"algorithm:  {args.algo}")
        print(f"cost:       {report['cost'] if result.solved else 'none'}")
        print(f"moves:      {moves if moves is not None else '-'}")
        print(f"expansions: {stats.expansions} (outer {stats.outer_expansions}, inner {stats.inner_expansions})")
        print(f"elapsed:    {stats.elapsed:.3f}s")
        print(f"reason:     {stats.reason.value}")
    return EXIT_OK if result.solved else EXIT_NO_SOLUTION


def generate_suite(n: int, moves: int, count: int, seed: int) -> list[tuple[str, str]]:
    """File names and contents of a suite; a pure function of its arguments."""
    rng = random.Random(seed)
    goal = goal_board(n)
    files = []
    for i in range(count):
        instance_seed = rng.getrandbits(32)
        board = scramble(goal, moves, instance_seed)
        header = f"# castar gen n={n} moves={moves} seed={seed} index={i} instance_seed={instance_seed}\n"
        files.append((f"case_{i:03d}.txt", header + format_board(board)))
    return files


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        goal_board(args.n)
    except PuzzleError as exc:
        raise UsageError(str(exc)) from exc
    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = generate_suite(args.n, args.moves, args.count, args.seed)
    for name, content in files:
        (out / name).write_text(content)
    manifest = {"n": args.n, "moves": args.moves, "count": args.count, "seed": args.seed, "files": [f for f, _ in files]}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(files)} instances to {out}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        suite = load_suite(args.suite)
    except PuzzleError as exc:
        raise InputError(str(exc)) from exc
    cutoffs = load_cutoffs(args.cutoff_file) if args.cutoff_file else None
    report = run_bench(
        suite,
        args.workers_list,
        algo=args.algo,
        repeats=args.repeats,
        cutoffs=cutoffs,
        time_limit=args.time_limit,
        weight=args.weight,
        thetas=args.theta,
        compare_idastar=args.compare_idastar,
    )
    text = report.to_csv()
    if args.out:
        FsPath(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "gen": cmd_gen, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"castar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PuzzleError, ValueError) as exc:
        print(f"castar: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, InputError) as exc:
        print(f"castar: error: {exc}", file=sys.stderr)
        return EXIT_NOINPUT


if __name__ == "__main__":
    sys.exit(main())
