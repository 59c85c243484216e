"""Cascading A*: parallel anytime heuristic search, with the sliding puzzle as its benchmark domain."""

from .cascade import CascadeConfig, SharedIncumbent, Subtask, cascading_astar
from .core import (
    INFINITY,
    Budget,
    Incumbent,
    InvalidPath,
    InvalidStep,
    MismatchedJoint,
    Path,
    SearchDomain,
    SearchNode,
    SearchResult,
    SearchStats,
    TerminationReason,
    UnsolvableInstance,
    WrongEndpoints,
    f_weighted,
    scaled_priority,
    stitch,
    validate_path,
)
from .idastar import dfs_contour, ida_star, solve_idastar
from .puzzle import Board, Move, PuzzleDomain, goal_board, is_solvable, manhattan, parse_board, format_board, scramble
from .wastar import ThresholdParams, run_outer, solve_astar, threshold_t

__version__ = "0.1.0"
