"""The main memetic loop.

Each iteration selects two parents by binary tournament over both
subpopulations, recombines their giant tours with order crossover, splits
the child against one randomly chosen constraint, refines it with the local
search (plus the occasional repair pass), inserts the results into the
feasibility-matched subpopulations, and adapts the penalty weights to the
recent constraint-satisfaction history.  The incumbent tracks the best
schedule-feasible solution by plain travel distance.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from time import perf_counter
from typing import Callable

from greenvrp.model import (
    DEPOT,
    Instance,
    PenaltyWeights,
    Solution,
    evaluate,
)
from greenvrp.localsearch import build_neighbor_lists, els
from greenvrp.population import (
    Individual,
    Subpopulation,
    adapt_penalties,
    binary_tournament,
    insert_offspring,
    order_crossover,
)
from greenvrp.split import scts


class InfeasibleInstanceError(Exception):
    """Some customer cannot be served alone within the duration limit and
    driving range, so no feasible solution exists."""


class NoFeasibleSolutionError(Exception):
    """The search never produced a schedule-feasible solution; the least
    violating one found is attached."""

    def __init__(self, message: str, best_attempt: Solution | None):
        super().__init__(message)
        self.best_attempt = best_attempt


@dataclass
class SolverConfig:
    """All tunables: penalty weights, subpopulation bounds and fractions,
    termination, repair probability, adaptation period, and the rng seed."""

    overtime_weight: float = 527.0
    mileage_weight: float = 430.0
    capacity_weight: float = 195.0
    pop_min: int = 154
    pop_max: int = 222
    elite_frac: float = 0.5
    close_frac: float = 0.2
    max_iters: int = 2000
    max_no_improve: int = 300
    max_time: float | None = None
    repair_prob: float = 0.5
    adapt_period: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if self.pop_min < 1 or self.pop_max <= self.pop_min:
            raise ValueError("need 1 <= pop_min < pop_max")
        if self.max_iters < 1 or self.max_no_improve < 1:
            raise ValueError("iteration limits must be positive")
        if not 0.0 <= self.repair_prob <= 1.0:
            raise ValueError("repair_prob must be a probability")


@dataclass
class TraceRecord:
    """Deterministic per-iteration snapshot (no wall-clock fields)."""

    iteration: int
    best_distance: float
    feasible_size: int
    infeasible_size: int
    weights: tuple[float, float, float]
    satisfaction_rates: tuple[float, float, float]


@dataclass
class RunResult:
    best: Solution
    best_distance: float
    time_to_best: float
    total_time: float
    iterations: int


def should_terminate(
    iteration: int, no_improve: int, elapsed: float, cfg: SolverConfig
) -> bool:
    """True once any of the three limits is reached: total iterations,
    consecutive iterations without improvement, or wall-clock seconds."""
    if iteration >= cfg.max_iters:
        return True
    if no_improve >= cfg.max_no_improve:
        return True
    if cfg.max_time is not None and elapsed >= cfg.max_time:
        return True
    return False


def check_instance_servable(inst: Instance) -> None:
    """Every customer must fit alone in some route (direct, or through one
    or two station visits); otherwise no solution can exist."""
    stations = list(inst.stations())
    for c in inst.customers():
        candidates = [[DEPOT, c, DEPOT]]
        candidates += [[DEPOT, st, c, DEPOT] for st in stations]
        candidates += [[DEPOT, c, st, DEPOT] for st in stations]
        candidates += [
            [DEPOT, s1, c, s2, DEPOT] for s1 in stations for s2 in stations
        ]
        ok = False
        for route in candidates:
            rep = evaluate(
                Solution([route]), inst, PenaltyWeights(1, 1, 1), scheduled=True
            )
            if rep.overtime_total <= 1e-9 and rep.mileage_total <= 1e-9:
                ok = True
                break
        if not ok:
            raise InfeasibleInstanceError(
                f"customer {c} cannot be served alone within the limits"
            )


def _rates(history) -> tuple[float, float, float]:
    if not history:
        return (0.0, 0.0, 0.0)
    cols = [0, 0, 0]
    for f in history:
        for k in range(3):
            cols[k] += 1 if f[k] else 0
    return tuple(c / len(history) for c in cols)


def run(
    inst: Instance,
    cfg: SolverConfig | None = None,
    trace: Callable[[TraceRecord], None] | None = None,
) -> RunResult:
    """Run the solver to termination and return the best schedule-feasible
    solution found.  Fully deterministic for a fixed seed when no wall-clock
    limit is set."""
    cfg = cfg or SolverConfig()
    t_start = perf_counter()
    check_instance_servable(inst)

    rng = random.Random(cfg.seed)
    weights = PenaltyWeights(
        cfg.overtime_weight, cfg.mileage_weight, cfg.capacity_weight
    )
    neighbors = build_neighbor_lists(inst)
    feas = Subpopulation(inst.n, cfg.pop_min, cfg.pop_max, cfg.elite_frac, cfg.close_frac)
    infeas = Subpopulation(inst.n, cfg.pop_min, cfg.pop_max, cfg.elite_frac, cfg.close_frac)
    history: deque = deque(maxlen=cfg.adapt_period)

    best: Solution | None = None
    best_distance = math.inf
    time_to_best = 0.0
    least_violation = math.inf
    least_violating: Solution | None = None

    def offer(ind: Individual, sol: Solution) -> bool:
        """Candidate for the incumbent; returns True on strict improvement."""
        nonlocal best, best_distance, time_to_best, least_violation, least_violating
        if ind.scheduled_feasible:
            if ind.distance < best_distance:
                best = sol.copy()
                best_distance = ind.distance
                time_to_best = perf_counter() - t_start
                return True
        else:
            badness = ind.overtime + ind.over_mileage + ind.overcapacity
            if not ind.fleet_ok:
                badness += 1.0 + len(sol.routes) - inst.fleet_limit
            if badness < least_violation:
                least_violation = badness
                least_violating = sol.copy()
        return False

    def produce(tour: list[int]) -> bool:
        """Split, refine, insert; returns True if the incumbent improved."""
        child = scts(tour, inst, rng)
        phi_a, phi_b = els(
            child, inst, weights, rng, neighbors, repair_prob=cfg.repair_prob
        )
        ind_a = Individual.from_solution(phi_a, inst, weights)
        history.append(ind_a.constraint_flags())
        insert_offspring(ind_a, feas, infeas)
        if phi_b is phi_a or phi_b == phi_a:
            return offer(ind_a, phi_a)
        ind_b = Individual.from_solution(phi_b, inst, weights)
        insert_offspring(ind_b, feas, infeas)
        offer(ind_a, phi_a)
        return offer(ind_b, phi_b)

    base_tour = list(inst.customers())
    for _ in range(2 * cfg.pop_min):
        tour = list(base_tour)
        rng.shuffle(tour)
        produce(tour)

    iteration = 0
    no_improve = 0
    while not should_terminate(iteration, no_improve, perf_counter() - t_start, cfg):
        iteration += 1
        p1 = binary_tournament(feas, infeas, rng)
        p2 = binary_tournament(feas, infeas, rng)
        tour = order_crossover(p1.giant, p2.giant, rng)
        improved = produce(tour)
        if improved:
            no_improve = 0
        else:
            no_improve += 1
        if iteration % cfg.adapt_period == 0:
            weights = adapt_penalties(history, weights)
            for m in infeas.members:
                m.requality(weights)
            infeas.update_biased_fitness()
        if trace is not None:
            trace(
                TraceRecord(
                    iteration=iteration,
                    best_distance=best_distance,
                    feasible_size=len(feas),
                    infeasible_size=len(infeas),
                    weights=(weights.overtime, weights.mileage, weights.capacity),
                    satisfaction_rates=_rates(history),
                )
            )

    if best is None:
        raise NoFeasibleSolutionError(
            "no schedule-feasible solution was found", least_violating
        )
    return RunResult(
        best=best,
        best_distance=best_distance,
        time_to_best=time_to_best,
        total_time=perf_counter() - t_start,
        iterations=iteration,
    )
