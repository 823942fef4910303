"""Restricted value function: bounding functions, construction, frontier."""

from .algorithm import GapReport, construct, minimize_description, solve_subproblem, subproblem_milp
from .core import (
    BoundingFunction,
    InvariantError,
    LogEntry,
    RvfDescription,
    RvfModel,
    UpperBoundOnly,
)
from .frontier import (
    NDP,
    NOT_ON_BOUNDARY,
    OUTSIDE_DOMAIN,
    WEAK,
    FrontierCell,
    classify_criterion_point,
    domain_box,
    extract_frontier,
)
from .io import (
    frontier_csv,
    load_description,
    parse_subproblem,
    plot_csv,
    save_description,
    subproblem_text,
)

__all__ = [
    "NDP",
    "NOT_ON_BOUNDARY",
    "OUTSIDE_DOMAIN",
    "WEAK",
    "BoundingFunction",
    "FrontierCell",
    "GapReport",
    "InvariantError",
    "LogEntry",
    "RvfDescription",
    "RvfModel",
    "UpperBoundOnly",
    "classify_criterion_point",
    "construct",
    "domain_box",
    "extract_frontier",
    "frontier_csv",
    "load_description",
    "minimize_description",
    "parse_subproblem",
    "plot_csv",
    "save_description",
    "solve_subproblem",
    "subproblem_milp",
    "subproblem_text",
]
