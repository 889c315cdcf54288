"""Shared builders for hand-crafted and randomized test instances."""

import random

import numpy as np
import pytest

from greenvrp.model import Instance, PenaltyWeights, Solution


def make_instance(
    customers,
    stations,
    depot=(0.0, 0.0),
    speed=1.0,
    service=0.0,
    refuel_time=0.5,
    fleet_limit=10,
    energy_full=1000.0,
    consumption=1.0,
    duration_limit=1000.0,
    afs_capacity=4,
    name="test",
):
    """Instance from explicit coordinates; scalar ``service`` applies to all
    customers."""
    n = len(customers)
    s = len(stations)
    coords = np.array([depot] + list(customers) + list(stations), dtype=float)
    if np.isscalar(service):
        service = [service] * n
    return Instance.from_coords(
        coords,
        n=n,
        s=s,
        speed=speed,
        service=service,
        refuel_time=refuel_time,
        fleet_limit=fleet_limit,
        energy_full=energy_full,
        consumption=consumption,
        duration_limit=duration_limit,
        afs_capacity=afs_capacity,
        name=name,
    )


def random_instance(rng: random.Random, n=8, s=2, box=60.0, **overrides):
    """Random planar instance with parameters loose enough that most random
    solutions are structurally fine but congestion and range can still bind."""
    customers = [(rng.uniform(0, box), rng.uniform(0, box)) for _ in range(n)]
    stations = [(rng.uniform(0, box), rng.uniform(0, box)) for _ in range(s)]
    params = dict(
        depot=(box / 2, box / 2),
        speed=40.0,
        service=0.5,
        refuel_time=0.5,
        fleet_limit=max(2, n // 2),
        energy_full=2.2 * box,
        consumption=1.0,
        duration_limit=6.0,
        afs_capacity=1,
        name=f"rand-{n}-{s}",
    )
    params.update(overrides)
    return make_instance(customers, stations, **params)


def random_solution(rng: random.Random, inst, station_prob=0.5, max_routes=None):
    """Random structurally-valid solution: random permutation cut into random
    routes, with optional station visits spliced in."""
    perm = list(inst.customers())
    rng.shuffle(perm)
    max_routes = max_routes or inst.fleet_limit
    n_routes = rng.randint(1, min(max_routes, len(perm)))
    cuts = sorted(rng.sample(range(1, len(perm)), n_routes - 1)) if n_routes > 1 else []
    chunks = []
    prev = 0
    for c in cuts + [len(perm)]:
        chunks.append(perm[prev:c])
        prev = c
    routes = []
    for chunk in chunks:
        route = [0] + chunk + [0]
        if rng.random() < station_prob:
            st = rng.choice(list(inst.stations()))
            pos = rng.randint(1, len(route) - 1)
            route.insert(pos, st)
            if rng.random() < 0.25:
                st2 = rng.choice(list(inst.stations()))
                pos2 = rng.randint(1, len(route) - 1)
                route.insert(pos2, st2)
        routes.append(route)
    return Solution(routes)


@pytest.fixture
def weights():
    return PenaltyWeights(overtime=527.0, mileage=430.0, capacity=195.0)
