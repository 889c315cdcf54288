"""Exhaustive oracle for desk-size instances.

Enumerates every ordered partition of the customers into at most M routes
(all permutations, all cut points), and for each route every placement of
zero, one, or two station visits at any position by any station.  Candidates
are costed by travel distance; route variants that already break the range
or duration limit with zero waiting are discarded (waiting only makes them
worse), and partial candidates whose distance lower bound cannot beat the
incumbent are pruned, which keeps the search exhaustive over feasible
candidates.  Surviving candidates are checked under the full waiting
schedule.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from greenvrp.model import (
    DEPOT,
    FEAS_EPS,
    Instance,
    PenaltyWeights,
    Solution,
    evaluate,
    route_profile,
)
from greenvrp.solver import NoFeasibleSolutionError

MAX_CUSTOMERS = 6
MAX_STATIONS = 2
MAX_VEHICLES = 4

_W = PenaltyWeights(1.0, 1.0, 1.0)


class InstanceTooLargeError(Exception):
    """The instance exceeds the oracle's exhaustive-search caps."""


@dataclass
class OracleResult:
    distance: float
    solution: Solution


def _route_variants(custs: tuple[int, ...], inst: Instance):
    """All station placements for one customer sequence, filtered to
    zero-wait-legal routes and sorted by distance."""
    stations = list(inst.stations())
    k = len(custs)
    base = list(custs)
    variants = []
    seqs = [[DEPOT] + base + [DEPOT]]
    for slot in range(k + 1):
        for st in stations:
            seqs.append([DEPOT] + base[:slot] + [st] + base[slot:] + [DEPOT])
    for s1 in range(k + 1):
        for s2 in range(s1, k + 1):
            for st1 in stations:
                for st2 in stations:
                    seq = list(base)
                    seq.insert(s2, st2)
                    seq.insert(s1, st1)
                    seqs.append([DEPOT] + seq + [DEPOT])
    for seq in seqs:
        prof = route_profile(seq, inst)
        if prof.over_mileage > FEAS_EPS:
            continue
        if prof.duration > inst.duration_limit + FEAS_EPS:
            continue
        variants.append((prof.distance, seq))
    variants.sort(key=lambda v: v[0])
    return variants


def oracle_solve(inst: Instance) -> OracleResult:
    """Minimum-distance schedule-feasible solution by exhaustive search."""
    if inst.n > MAX_CUSTOMERS:
        raise InstanceTooLargeError(f"oracle handles at most {MAX_CUSTOMERS} customers")
    if inst.s > MAX_STATIONS:
        raise InstanceTooLargeError(f"oracle handles at most {MAX_STATIONS} stations")
    if inst.fleet_limit > MAX_VEHICLES:
        raise InstanceTooLargeError(f"oracle handles at most {MAX_VEHICLES} vehicles")

    customers = list(inst.customers())
    n = len(customers)
    variant_cache: dict[tuple[int, ...], list] = {}

    def variants_of(custs: tuple[int, ...]):
        got = variant_cache.get(custs)
        if got is None:
            got = _route_variants(custs, inst)
            variant_cache[custs] = got
        return got

    best_td = math.inf
    best_sol: Solution | None = None

    for perm in itertools.permutations(customers):
        for cuts in _compositions(n, min(inst.fleet_limit, n)):
            routes = []
            start = 0
            for size in cuts:
                routes.append(tuple(perm[start : start + size]))
                start += size
            per_route = [variants_of(r) for r in routes]
            if any(not v for v in per_route):
                continue
            suffix_min = [0.0] * (len(routes) + 1)
            for i in range(len(routes) - 1, -1, -1):
                suffix_min[i] = suffix_min[i + 1] + per_route[i][0][0]
            if suffix_min[0] >= best_td:
                continue

            chosen: list[list[int]] = [None] * len(routes)  # type: ignore[list-item]

            def descend(i: int, td: float):
                nonlocal best_td, best_sol
                if td + suffix_min[i] >= best_td:
                    return
                if i == len(routes):
                    sol = Solution([list(seq) for seq in chosen])
                    rep = evaluate(sol, inst, _W, scheduled=True)
                    if rep.feasible and rep.total_distance < best_td:
                        best_td = rep.total_distance
                        best_sol = sol
                    return
                for var_td, seq in per_route[i]:
                    if td + var_td + suffix_min[i + 1] >= best_td:
                        break
                    chosen[i] = seq
                    descend(i + 1, td + var_td)

            descend(0, 0.0)

    if best_sol is None:
        raise NoFeasibleSolutionError("no feasible solution exists", None)
    return OracleResult(distance=best_td, solution=best_sol)


def _compositions(total: int, max_parts: int):
    """Ordered splits of ``total`` items into at most ``max_parts`` nonempty
    consecutive parts."""
    for parts in range(1, max_parts + 1):
        for cuts in itertools.combinations(range(1, total), parts - 1):
            sizes = []
            prev = 0
            for c in cuts:
                sizes.append(c - prev)
                prev = c
            sizes.append(total - prev)
            yield sizes
