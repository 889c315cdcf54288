"""Solver library and benchmark tools for green vehicle routing with
capacity-limited private refueling stations."""

from greenvrp.model import (
    DEPOT,
    EvalReport,
    Instance,
    MalformedSolutionError,
    PenaltyWeights,
    Solution,
    evaluate,
    route_distance,
    simulate_solution,
    total_quality,
)

__all__ = [
    "DEPOT",
    "EvalReport",
    "Instance",
    "MalformedSolutionError",
    "PenaltyWeights",
    "Solution",
    "evaluate",
    "route_distance",
    "simulate_solution",
    "total_quality",
]
