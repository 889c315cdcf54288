"""Evaluation-model tests: distances, energy, schedules, penalties."""

import math
import random

import pytest

from greenvrp.model import (
    FEAS_EPS,
    Instance,
    MalformedSolutionError,
    PenaltyWeights,
    Solution,
    afs_overcapacity,
    afs_timelines,
    check_feasibility,
    evaluate,
    route_distance,
    route_penalty,
    route_profile,
    simulate_solution,
    solution_penalty,
    total_quality,
    validate_solution,
)

from conftest import make_instance, random_instance, random_solution


# ---------------------------------------------------------------------------
# Independent schedule oracle: naive quadratic FCFS re-simulation.  Vehicles
# are advanced by repeatedly selecting the globally earliest unresolved
# station arrival (recomputed from scratch each time) and assigning it the
# earliest slot consistent with all previously assigned refuel intervals.
# ---------------------------------------------------------------------------


def reference_schedule(sol, inst):
    routes = sol.routes
    resolved = [dict() for _ in routes]  # pos -> refuel start time
    assigned = {}  # station -> list of (start, end)

    def walk(ri):
        """(arrival times per position, first unresolved station pos or None)."""
        r = routes[ri]
        arr = [0.0] * len(r)
        tm = 0.0
        for j in range(1, len(r)):
            v = r[j]
            tm += inst.t[r[j - 1]][v]
            arr[j] = tm
            if inst.is_station(v):
                if j in resolved[ri]:
                    tm = resolved[ri][j] + inst.refuel_time
                else:
                    return arr, j
            elif j < len(r) - 1:
                tm += inst.service[v]
        return arr, None

    while True:
        pending = []
        for ri in range(len(routes)):
            arr, pos = walk(ri)
            if pos is not None:
                pending.append((arr[pos], ri, pos))
        if not pending:
            break
        at, ri, pos = min(pending)
        st = routes[ri][pos]
        lst = assigned.setdefault(st, [])

        def active(t):
            return sum(1 for s, e in lst if s <= t < e)

        candidates = [at] + [e for _, e in lst if e > at]
        start = min(t for t in candidates if active(t) < inst.afs_capacity)
        lst.append((start, start + inst.refuel_time))
        resolved[ri][pos] = start

    out = []
    for ri in range(len(routes)):
        arr, pos = walk(ri)
        assert pos is None
        wait = [0.0] * len(routes[ri])
        for j, start in resolved[ri].items():
            wait[j] = start - arr[j]
        out.append((arr, wait))
    return out


# ---------------------------------------------------------------------------
# route_distance
# ---------------------------------------------------------------------------


def test_route_distance_empty_route():
    inst = make_instance([(3.0, 4.0)], [(1.0, 0.0)])
    assert route_distance([0, 0], inst) == 0.0


def test_route_distance_right_triangle():
    inst = make_instance([(3.0, 4.0)], [(1.0, 0.0)])
    assert route_distance([0, 1, 0], inst) == pytest.approx(10.0, abs=1e-12)


def test_route_distance_matches_naive_sum():
    rng = random.Random(7)
    inst = random_instance(rng, n=8, s=2)
    sol = random_solution(rng, inst, max_routes=1)
    route = sol.routes[0]
    naive = 0.0
    for i in range(len(route) - 1):
        ax, ay = inst.coords[route[i]]
        bx, by = inst.coords[route[i + 1]]
        naive += math.hypot(bx - ax, by - ay)
    assert route_distance(route, inst) == pytest.approx(naive, abs=1e-9)


# ---------------------------------------------------------------------------
# simulate_solution
# ---------------------------------------------------------------------------


def test_duration_without_stations_is_travel_plus_service():
    inst = make_instance([(10.0, 0.0), (10.0, 10.0)], [(50.0, 50.0)], speed=1.0, service=0.25)
    sol = Solution([[0, 1, 2, 0]])
    reports = simulate_solution(sol, inst)
    expected = (10.0 + 10.0 + math.hypot(10, 10)) / 1.0 + 0.25 + 0.25
    assert reports[0].duration == pytest.approx(expected, abs=1e-12)
    assert all(w == 0.0 for w in reports[0].wait)


def test_no_waiting_when_capacity_exceeds_route_count():
    rng = random.Random(3)
    inst = random_instance(rng, n=6, s=1, afs_capacity=6)
    sol = random_solution(rng, inst, station_prob=1.0)
    reports = simulate_solution(sol, inst)
    for rep in reports:
        assert all(w == 0.0 for w in rep.wait)


def test_tie_at_single_pump_second_vehicle_waits():
    # Two routes reach the station (40, 0) at t = 1.0 exactly; route order
    # breaks the tie, so route 1 refuels [1.0, 1.5) and route 2 waits 0.5.
    inst = make_instance(
        [(40.0, 1.0), (40.0, -1.0)],
        [(40.0, 0.0)],
        speed=40.0,
        service=0.1,
        refuel_time=0.5,
        afs_capacity=1,
    )
    st = 3
    sol = Solution([[0, st, 1, 0], [0, st, 2, 0]])
    reports = simulate_solution(sol, inst)
    assert reports[0].wait[1] == pytest.approx(0.0, abs=1e-12)
    assert reports[0].departure[1] == pytest.approx(1.5, abs=1e-12)
    assert reports[1].wait[1] == pytest.approx(0.5, abs=1e-12)
    assert reports[1].departure[1] == pytest.approx(2.0, abs=1e-12)
    # Waiting cascades into the downstream arrival.
    assert reports[1].arrival[2] == pytest.approx(2.0 + inst.t[st][2], abs=1e-12)


@pytest.mark.parametrize("seed", range(12))
def test_schedule_matches_reference_simulation(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, n=rng.randint(4, 10), s=rng.randint(1, 3), afs_capacity=1)
    sol = random_solution(rng, inst, station_prob=0.9)
    reports = simulate_solution(sol, inst)
    ref = reference_schedule(sol, inst)
    for rep, (arr, wait) in zip(reports, ref):
        assert rep.arrival == pytest.approx(arr, abs=1e-9)
        assert rep.wait == pytest.approx(wait, abs=1e-9)


def test_simulation_is_deterministic():
    rng = random.Random(11)
    inst = random_instance(rng, n=9, s=2)
    sol = random_solution(rng, inst, station_prob=1.0)
    a = simulate_solution(sol, inst)
    b = simulate_solution(sol, inst)
    for ra, rb in zip(a, b):
        assert ra.arrival == rb.arrival
        assert ra.departure == rb.departure
        assert ra.wait == rb.wait


def test_schedule_never_exceeds_capacity():
    rng = random.Random(23)
    for _ in range(30):
        inst = random_instance(rng, n=rng.randint(4, 10), s=1, afs_capacity=rng.randint(1, 2))
        sol = random_solution(rng, inst, station_prob=1.0)
        reports = simulate_solution(sol, inst)
        events = []
        for rep in reports:
            for j, v in enumerate(rep.seq):
                if j > 0 and inst.is_station(v):
                    start = rep.arrival[j] + rep.wait[j]
                    events.append((start, 1))
                    events.append((start + inst.refuel_time, -1))
        events.sort()
        level = 0
        for _, delta in events:
            level += delta
            assert level <= inst.afs_capacity


def test_unlimited_capacity_matches_zero_wait():
    rng = random.Random(29)
    inst = random_instance(rng, n=8, s=2, afs_capacity=8, fleet_limit=8)
    sol = random_solution(rng, inst, station_prob=1.0)
    sched = simulate_solution(sol, inst)
    for rep, route in zip(sched, sol.routes):
        zw = route_profile(route, inst)
        assert all(w == 0.0 for w in rep.wait)
        assert rep.duration == pytest.approx(zw.duration, abs=1e-9)


def test_energy_recursion_and_path_partition():
    rng = random.Random(31)
    for _ in range(20):
        inst = random_instance(rng, n=6, s=2)
        sol = random_solution(rng, inst, station_prob=0.8)
        for route in sol.routes:
            rep = route_profile(route, inst)
            full = inst.energy_full
            e = full
            for j in range(1, len(route)):
                leg = inst.d[route[j - 1]][route[j]]
                e_in = e - inst.consumption * leg
                assert rep.energy_in[j] == pytest.approx(e_in, abs=1e-9)
                e = full if inst.is_station(route[j]) else e_in
                assert rep.energy_out[j] == pytest.approx(e, abs=1e-9)
            assert sum(rep.path_dists) == pytest.approx(rep.distance, abs=1e-9)


# ---------------------------------------------------------------------------
# penalties
# ---------------------------------------------------------------------------


def test_route_penalty_zero_when_within_limits(weights):
    inst = make_instance([(1.0, 0.0)], [(0.5, 0.5)])
    rep = route_profile([0, 1, 0], inst)
    assert route_penalty(rep, weights, inst) == 0.0


def test_route_penalty_overtime_direct_substitution():
    inst = make_instance([(4.0, 0.0)], [(0.5, 0.5)], duration_limit=5.0)
    w = PenaltyWeights(overtime=2.0, mileage=5.0, capacity=1.0)
    rep = route_profile([0, 1, 0], inst)
    rep.duration = 8.0  # TM - T_max = 3
    assert route_penalty(rep, w, inst) == pytest.approx(6.0, abs=1e-12)


def test_route_penalty_sums_over_paths():
    # Two paths of length 11 with D_max = 10: each exceeds by 1.
    inst = make_instance(
        [(5.0, 0.0)],
        [(11.0, 0.0)],
        energy_full=10.0,
        consumption=1.0,
        duration_limit=1000.0,
    )
    st = 2
    rep = route_profile([0, 1, st, 1, 0], inst)  # structurally odd but evaluable
    rep.path_dists = [11.0, 11.0]
    w = PenaltyWeights(overtime=1.0, mileage=5.0, capacity=1.0)
    assert route_penalty(rep, w, inst) == pytest.approx(10.0, abs=1e-12)


def test_overcapacity_disjoint_windows_zero():
    inst = make_instance(
        [(10.0, 0.0), (80.0, 0.0)],
        [(40.0, 0.0)],
        speed=40.0,
        service=0.5,
        refuel_time=0.5,
        afs_capacity=1,
    )
    st = 3
    # Route 1 refuels [1.5, 2.0), route 2 refuels [1.0, 1.5): back to back.
    sol = Solution([[0, 1, st, 0], [0, st, 2, 0]])
    cs = afs_overcapacity(sol, inst)
    tl = afs_timelines(sol, inst)[st]
    assert max(tl.counts) <= 1
    assert cs[st] == pytest.approx(0.0, abs=1e-12)


def test_overcapacity_half_hour_overlap():
    # Both vehicles refuel [1.0, 1.5) at a single-pump station: the zero-wait
    # timeline holds 2 concurrent refuels for 0.5 h, one above capacity.
    inst = make_instance(
        [(40.0, 1.0), (40.0, -1.0)],
        [(40.0, 0.0)],
        speed=40.0,
        refuel_time=0.5,
        afs_capacity=1,
    )
    st = 3
    sol = Solution([[0, st, 1, 0], [0, st, 2, 0]])
    cs = afs_overcapacity(sol, inst)
    assert cs[st] == pytest.approx(0.5, abs=1e-12)


def test_overcapacity_zero_when_capacity_covers_fleet():
    rng = random.Random(37)
    inst = random_instance(rng, n=8, s=2, afs_capacity=8)
    sol = random_solution(rng, inst, station_prob=1.0)
    assert all(v == pytest.approx(0.0, abs=1e-12) for v in afs_overcapacity(sol, inst).values())


def test_solution_penalty_zero_for_feasible(weights):
    inst = make_instance([(1.0, 0.0), (0.0, 1.0)], [(0.5, 0.5)])
    sol = Solution([[0, 1, 2, 0]])
    assert solution_penalty(sol, inst, weights) == 0.0


def test_solution_penalty_linear_combination():
    # One route 6h over a 3h limit (w_T=2 -> 6) plus a 0.5h capacity overlap
    # (w_C=4 -> 2): P = 8.
    inst = make_instance(
        [(40.0, 1.0), (40.0, -1.0), (120.0, 0.0)],
        [(40.0, 0.0)],
        speed=40.0,
        service=0.0,
        refuel_time=0.5,
        duration_limit=3.0,
        afs_capacity=1,
    )
    st = 4
    sol = Solution([[0, st, 1, 0], [0, st, 2, 0], [0, 3, 0]])
    w = PenaltyWeights(overtime=2.0, mileage=1.0, capacity=4.0)
    rep3 = route_profile([0, 3, 0], inst)
    assert rep3.duration == pytest.approx(6.0, abs=1e-12)
    assert solution_penalty(sol, inst, w) == pytest.approx(2.0 * 3.0 + 4.0 * 0.5, abs=1e-9)


def test_solution_penalty_matches_independent_parts(weights):
    rng = random.Random(41)
    for _ in range(10):
        inst = random_instance(rng, n=7, s=2, duration_limit=2.5, energy_full=90.0)
        sol = random_solution(rng, inst, station_prob=0.7)
        expected = sum(
            route_penalty(route_profile(r, inst), weights, inst) for r in sol.routes
        ) + weights.capacity * sum(afs_overcapacity(sol, inst).values())
        assert solution_penalty(sol, inst, weights) == pytest.approx(expected, abs=1e-9)


# ---------------------------------------------------------------------------
# total quality and feasibility
# ---------------------------------------------------------------------------


def test_quality_equals_distance_for_feasible(weights):
    # Route of exactly 714.55 distance units out-and-back.
    inst = make_instance(
        [(357.275, 0.0)],
        [(100.0, 0.0)],
        speed=400.0,
        energy_full=1000.0,
        duration_limit=10.0,
    )
    sol = Solution([[0, 1, 0]])
    assert total_quality(sol, inst, weights) == pytest.approx(714.55, abs=1e-9)


def test_quality_zero_for_empty_routes(weights):
    inst = make_instance([(1.0, 1.0)], [(2.0, 0.0)])
    sol = Solution([[0, 0]])
    assert total_quality(sol, inst, weights) == 0.0


def test_quality_decomposition_infeasible(weights):
    rng = random.Random(43)
    for _ in range(10):
        inst = random_instance(rng, n=6, s=1, duration_limit=1.5, energy_full=70.0)
        sol = random_solution(rng, inst)
        rep = evaluate(sol, inst, weights)
        assert rep.quality == pytest.approx(rep.total_distance + rep.penalty, abs=1e-9)
        assert rep.penalty >= 0.0
        if rep.feasible:
            assert rep.penalty <= 1e-9


def test_feasibility_flags(weights):
    inst = make_instance(
        [(10.0, 0.0), (0.0, 10.0)],
        [(5.0, 5.0)],
        speed=40.0,
        duration_limit=2.0,
        fleet_limit=2,
    )
    sol = Solution([[0, 1, 2, 0]])
    verdict = check_feasibility(evaluate(sol, inst, weights, scheduled=True), inst)
    assert verdict.feasible and verdict.duration_ok and verdict.energy_ok and verdict.fleet_ok


def test_energy_flag_set_when_path_exceeds_range(weights):
    inst = make_instance(
        [(60.0, 0.0), (0.0, 1.0)],
        [(30.0, 30.0)],
        energy_full=100.0,
        consumption=1.0,
        fleet_limit=2,
    )
    sol = Solution([[0, 1, 0], [0, 2, 0]])  # 120 > D_max = 100
    verdict = check_feasibility(evaluate(sol, inst, weights, scheduled=True), inst)
    assert not verdict.energy_ok
    assert not verdict.feasible


def test_fleet_flag_set_when_too_many_routes(weights):
    inst = make_instance(
        [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
        [(1.0, 1.0)],
        fleet_limit=2,
    )
    sol = Solution([[0, 1, 0], [0, 2, 0], [0, 3, 0]])
    verdict = check_feasibility(evaluate(sol, inst, weights, scheduled=True), inst)
    assert not verdict.fleet_ok
    assert verdict.duration_ok and verdict.energy_ok
    assert not verdict.feasible


def test_structural_violations_raise(weights):
    inst = make_instance([(1.0, 0.0), (2.0, 0.0)], [(1.0, 1.0)])
    with pytest.raises(MalformedSolutionError):
        validate_solution(Solution([[0, 1, 2]]), inst)  # missing final depot
    with pytest.raises(MalformedSolutionError):
        validate_solution(Solution([[0, 1, 0], [0, 1, 2, 0]]), inst)  # duplicate
    with pytest.raises(MalformedSolutionError):
        check_feasibility(evaluate(Solution([[0, 1, 0]]), inst, weights), inst)  # missing 2


def test_scheduled_mode_capacity_violation_is_zero(weights):
    inst = make_instance(
        [(40.0, 1.0), (40.0, -1.0)],
        [(40.0, 0.0)],
        speed=40.0,
        refuel_time=0.5,
        afs_capacity=1,
        duration_limit=100.0,
    )
    st = 3
    sol = Solution([[0, st, 1, 0], [0, st, 2, 0]])
    zw = evaluate(sol, inst, weights)
    sched = evaluate(sol, inst, weights, scheduled=True)
    assert zw.capacity_total == pytest.approx(0.5, abs=1e-12)
    assert not zw.feasible
    assert sched.capacity_total == 0.0
    assert sched.feasible  # waiting fits comfortably within the limit
    assert sched.quality == sched.total_distance
