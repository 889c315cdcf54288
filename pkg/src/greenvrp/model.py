"""Problem data model and solution evaluation.

The problem: a homogeneous fleet of range-limited vehicles serves every
customer exactly once, starting and ending at a single depot.  Vehicles may
refuel at private stations; each station serves at most ``afs_capacity``
vehicles at a time, so extra arrivals must queue.  Waiting counts against the
route duration limit.  The objective is total travel distance.

Two evaluation modes are provided:

* *zero-wait* -- waiting times are assumed zero and station congestion is
  expressed as an over-capacity penalty (the integral of excess concurrent
  refuels over time).  This is the mode used inside the local search, where
  move deltas must stay local to the routes they touch.
* *scheduled* -- a global first-come-first-served discrete-event simulation
  inserts actual waiting times so that no station ever serves more than its
  capacity.  This is the mode used for feasibility classification and final
  reporting.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DEPOT = 0

#: Violation magnitudes at or below this are treated as zero when deciding
#: feasibility (penalties themselves always use the exact magnitudes).
FEAS_EPS = 1e-9


class ModelError(Exception):
    """Base class for model-level errors."""


class MalformedSolutionError(ModelError):
    """A solution violates a structural constraint (depot endpoints,
    duplicated or missing customers).  These are programming errors, not
    penalizable violations."""


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable problem data.

    Nodes are indexed ``0`` (depot), ``1..n`` (customers) and
    ``n+1..n+s`` (refueling stations).  ``d`` and ``t`` are full
    ``(n+s+1)``-square distance and travel-time matrices; ``service`` holds a
    per-node service duration (zero for the depot and stations).
    """

    n: int
    s: int
    d: np.ndarray
    t: np.ndarray
    service: np.ndarray
    refuel_time: float
    fleet_limit: int
    energy_full: float
    consumption: float
    duration_limit: float
    afs_capacity: int
    speed: float = 1.0
    coords: np.ndarray | None = None
    name: str = ""

    def __post_init__(self) -> None:
        nn = self.n + self.s + 1
        if self.n < 1 or self.s < 1:
            raise ValueError("need at least one customer and one station")
        if self.fleet_limit < 1:
            raise ValueError("fleet_limit must be >= 1")
        if self.afs_capacity < 1:
            raise ValueError("afs_capacity must be >= 1")
        if min(self.energy_full, self.consumption, self.duration_limit) <= 0:
            raise ValueError("energy_full, consumption and duration_limit must be positive")
        for mat, what in ((self.d, "distance"), (self.t, "time")):
            if mat.shape != (nn, nn):
                raise ValueError(f"{what} matrix must be {nn}x{nn}, got {mat.shape}")
            if (mat < 0).any():
                raise ValueError(f"{what} matrix has negative entries")
            if np.diagonal(mat).any():
                raise ValueError(f"{what} matrix has a nonzero diagonal")

    @classmethod
    def from_coords(
        cls,
        coords,
        *,
        n: int,
        s: int,
        speed: float,
        service,
        refuel_time: float,
        fleet_limit: int,
        energy_full: float,
        consumption: float,
        duration_limit: float,
        afs_capacity: int,
        name: str = "",
    ) -> "Instance":
        """Build an instance from planar coordinates: ``d`` is Euclidean and
        ``t = d / speed``."""
        coords = np.asarray(coords, dtype=float)
        if speed <= 0:
            raise ValueError("speed must be positive")
        delta = coords[:, None, :] - coords[None, :, :]
        d = np.hypot(delta[..., 0], delta[..., 1])
        service_arr = np.zeros(n + s + 1)
        service_arr[1 : n + 1] = np.asarray(service, dtype=float)
        return cls(
            n=n,
            s=s,
            d=d,
            t=d / speed,
            service=service_arr,
            refuel_time=refuel_time,
            fleet_limit=fleet_limit,
            energy_full=energy_full,
            consumption=consumption,
            duration_limit=duration_limit,
            afs_capacity=afs_capacity,
            speed=speed,
            coords=coords,
            name=name,
        )

    @property
    def max_range(self) -> float:
        return self.energy_full / self.consumption

    @property
    def node_count(self) -> int:
        return self.n + self.s + 1

    def customers(self) -> range:
        return range(1, self.n + 1)

    def stations(self) -> range:
        return range(self.n + 1, self.n + self.s + 1)

    def is_customer(self, node: int) -> bool:
        return 1 <= node <= self.n

    def is_station(self, node: int) -> bool:
        return node > self.n

    @cached_property
    def node_dur(self) -> list[float]:
        """Per-node stop duration: service time at customers, refuel time at
        stations, zero at the depot."""
        dur = [0.0] * self.node_count
        for c in self.customers():
            dur[c] = float(self.service[c])
        for st in self.stations():
            dur[st] = self.refuel_time
        return dur

    @cached_property
    def dist_rows(self) -> list[list[float]]:
        """Distance matrix as nested lists (fast scalar indexing)."""
        return [list(map(float, row)) for row in self.d]

    @cached_property
    def time_rows(self) -> list[list[float]]:
        return [list(map(float, row)) for row in self.t]

    @cached_property
    def nearest_station(self) -> list[int]:
        """For every node, the station nearest to it (ties: lower id)."""
        out = [0] * self.node_count
        sts = list(self.stations())
        for v in range(self.node_count):
            row = self.d[v]
            out[v] = min(sts, key=lambda st: (row[st], st))
        return out


@dataclass
class PenaltyWeights:
    """Multipliers for the three violation magnitudes: route overtime
    (per hour), path over-mileage (per distance unit) and station
    over-capacity (per vehicle-hour)."""

    overtime: float
    mileage: float
    capacity: float

    def __post_init__(self) -> None:
        if min(self.overtime, self.mileage, self.capacity) <= 0:
            raise ValueError("penalty weights must be strictly positive")

    def scaled(self, factor: float) -> "PenaltyWeights":
        return PenaltyWeights(self.overtime * factor, self.mileage * factor, self.capacity * factor)


@dataclass
class Solution:
    """A set of routes; each route is a node sequence starting and ending at
    the depot."""

    routes: list[list[int]]

    def copy(self) -> "Solution":
        return Solution([list(r) for r in self.routes])

    @property
    def route_count(self) -> int:
        return len(self.routes)

    def customer_ids(self, inst: Instance) -> list[int]:
        return [v for r in self.routes for v in r if inst.is_customer(v)]

    def giant_tour(self, inst: Instance) -> list[int]:
        """Customers in visiting order, stations and depots dropped."""
        return self.customer_ids(inst)

    def canonical_key(self):
        """Route-order-insensitive, orientation-sensitive identity (used for
        clone detection)."""
        return tuple(sorted(tuple(r) for r in self.routes))


def validate_solution(sol: Solution, inst: Instance, *, full_coverage: bool = True) -> None:
    """Check structural constraints; raise :class:`MalformedSolutionError`.

    Structure means: every route starts/ends at the depot with no interior
    depot visit, and no customer appears twice.  With ``full_coverage`` every
    customer must appear exactly once.
    """
    seen: set[int] = set()
    for idx, r in enumerate(sol.routes):
        if len(r) < 2 or r[0] != DEPOT or r[-1] != DEPOT:
            raise MalformedSolutionError(f"route {idx} must start and end at the depot: {r}")
        for v in r[1:-1]:
            if v == DEPOT:
                raise MalformedSolutionError(f"route {idx} visits the depot mid-route")
            if v >= inst.node_count or v < 0:
                raise MalformedSolutionError(f"route {idx} visits unknown node {v}")
            if inst.is_customer(v):
                if v in seen:
                    raise MalformedSolutionError(f"customer {v} served more than once")
                seen.add(v)
    if full_coverage and len(seen) != inst.n:
        missing = sorted(set(inst.customers()) - seen)
        raise MalformedSolutionError(f"customers not served: {missing[:10]}")


@dataclass
class RouteReport:
    """All per-route derived quantities for one evaluation mode."""

    seq: list[int]
    distance: float
    duration: float
    arrival: list[float]
    departure: list[float]
    wait: list[float]
    energy_in: list[float]
    energy_out: list[float]
    path_dists: list[float]
    overtime: float
    over_mileage: float


@dataclass
class StationTimeline:
    """Sorted refuel start/end moments at one station under zero waiting,
    with the concurrent-refuel count over each inter-moment interval."""

    station: int
    moments: list[float]
    counts: list[int]
    intervals: list[float]

    def overcapacity(self, capacity: int) -> float:
        """Integrated vehicle-hours of concurrency above ``capacity``."""
        return sum(
            (c - capacity) * dt for c, dt in zip(self.counts, self.intervals) if c > capacity
        )


@dataclass
class FeasibilityVerdict:
    duration_ok: bool
    energy_ok: bool
    fleet_ok: bool
    feasible: bool


@dataclass
class EvalReport:
    """Everything derived from one evaluation of a solution."""

    scheduled: bool
    routes: list[RouteReport]
    total_distance: float
    overcap: dict[int, float]
    overtime_total: float
    mileage_total: float
    capacity_total: float
    penalty: float
    quality: float
    fleet_ok: bool
    feasible: bool


def route_distance(route: list[int], inst: Instance) -> float:
    """Total travel distance of a route (sum over consecutive pairs)."""
    d = inst.dist_rows
    return sum(d[a][b] for a, b in zip(route, route[1:]))


def route_profile(route: list[int], inst: Instance) -> RouteReport:
    """Zero-wait evaluation of a single route.

    Energy resets to full at the depot start and every station; arrival and
    departure times accumulate travel plus stop durations with no waiting.
    Paths are the maximal segments between consecutive full-energy points.
    """
    d = inst.dist_rows
    t = inst.time_rows
    dur = inst.node_dur
    full = inst.energy_full
    cr = inst.consumption
    k = len(route)

    arrival = [0.0] * k
    departure = [0.0] * k
    wait = [0.0] * k
    energy_in = [full] * k
    energy_out = [full] * k
    path_dists: list[float] = []
    dist = 0.0
    acc = 0.0

    prev = route[0]
    for j in range(1, k):
        v = route[j]
        leg = d[prev][v]
        dist += leg
        acc += leg
        arrival[j] = departure[j - 1] + t[prev][v]
        energy_in[j] = energy_out[j - 1] - cr * leg
        if inst.is_station(v):
            energy_out[j] = full
            path_dists.append(acc)
            acc = 0.0
        else:
            energy_out[j] = energy_in[j]
        departure[j] = arrival[j] + dur[v]
        prev = v
    path_dists.append(acc)

    duration = arrival[-1]
    d_max = inst.max_range
    return RouteReport(
        seq=list(route),
        distance=dist,
        duration=duration,
        arrival=arrival,
        departure=departure,
        wait=wait,
        energy_in=energy_in,
        energy_out=energy_out,
        path_dists=path_dists,
        overtime=max(0.0, duration - inst.duration_limit),
        over_mileage=sum(max(0.0, pd - d_max) for pd in path_dists),
    )


def simulate_solution(sol: Solution, inst: Instance) -> list[RouteReport]:
    """Scheduled evaluation: joint first-come-first-served simulation.

    All routes run simultaneously.  A vehicle reaching a station with every
    refuel slot busy waits for the earliest slot to free; ties on arrival time
    break by lower route index, then lower position index.  Waiting shifts all
    downstream times of that route.
    """
    validate_solution(sol, inst, full_coverage=False)
    d = inst.dist_rows
    t = inst.time_rows
    dur = inst.node_dur
    full = inst.energy_full
    cr = inst.consumption

    routes = sol.routes
    arrival = [[0.0] * len(r) for r in routes]
    departure = [[0.0] * len(r) for r in routes]
    wait = [[0.0] * len(r) for r in routes]

    events: list[tuple[float, int, int]] = []

    def advance(ri: int, pos: int) -> None:
        """Walk route ``ri`` forward from ``pos`` (whose departure time is
        final) until the next station visit, pushing its arrival event."""
        r = routes[ri]
        j = pos
        while j + 1 < len(r):
            v = r[j + 1]
            arrival[ri][j + 1] = departure[ri][j] + t[r[j]][v]
            if inst.is_station(v):
                heapq.heappush(events, (arrival[ri][j + 1], ri, j + 1))
                return
            departure[ri][j + 1] = arrival[ri][j + 1] + dur[v]
            j += 1

    for ri in range(len(routes)):
        advance(ri, 0)

    slots: dict[int, list[float]] = {}
    while events:
        at, ri, pos = heapq.heappop(events)
        st = routes[ri][pos]
        slot_heap = slots.setdefault(st, [0.0] * inst.afs_capacity)
        free_at = heapq.heappop(slot_heap)
        start = at if at >= free_at else free_at
        wait[ri][pos] = start - at
        departure[ri][pos] = start + inst.refuel_time
        heapq.heappush(slot_heap, departure[ri][pos])
        advance(ri, pos)

    reports = []
    d_max = inst.max_range
    for ri, r in enumerate(routes):
        # Energies and paths do not depend on waiting; recompute directly.
        zw = route_profile(r, inst)
        duration = arrival[ri][-1] if len(r) > 1 else 0.0
        reports.append(
            RouteReport(
                seq=list(r),
                distance=zw.distance,
                duration=duration,
                arrival=arrival[ri],
                departure=departure[ri],
                wait=wait[ri],
                energy_in=zw.energy_in,
                energy_out=zw.energy_out,
                path_dists=zw.path_dists,
                overtime=max(0.0, duration - inst.duration_limit),
                over_mileage=zw.over_mileage,
            )
        )
    return reports


def afs_timelines(sol: Solution, inst: Instance) -> dict[int, StationTimeline]:
    """Zero-wait refuel timelines per station (only stations that are
    visited appear)."""
    starts: dict[int, list[float]] = {}
    for r in sol.routes:
        profile = route_profile(r, inst)
        for j, v in enumerate(r):
            if j > 0 and inst.is_station(v):
                starts.setdefault(v, []).append(profile.arrival[j])
    out = {}
    for st, arrs in starts.items():
        out[st] = _timeline(st, arrs, inst.refuel_time)
    return out


def _timeline(station: int, starts: list[float], refuel_time: float) -> StationTimeline:
    events = sorted([(a, 1) for a in starts] + [(a + refuel_time, -1) for a in starts])
    moments = []
    counts = []
    intervals = []
    level = 0
    for i, (q, delta) in enumerate(events):
        level += delta
        if i + 1 < len(events):
            nxt = events[i + 1][0]
            moments.append(q)
            counts.append(level)
            intervals.append(nxt - q)
    # Final moment closes the timeline with a zero-length interval.
    if events:
        moments.append(events[-1][0])
        counts.append(level)
        intervals.append(0.0)
    return StationTimeline(station=station, moments=moments, counts=counts, intervals=intervals)


def afs_overcapacity(sol: Solution, inst: Instance) -> dict[int, float]:
    """Per-station integrated vehicle-hours of excess concurrency under the
    zero-wait timelines."""
    return {
        st: tl.overcapacity(inst.afs_capacity) for st, tl in afs_timelines(sol, inst).items()
    }


def route_penalty(report: RouteReport, weights: PenaltyWeights, inst: Instance) -> float:
    """Overtime plus over-mileage penalty of one route."""
    ot = max(0.0, report.duration - inst.duration_limit)
    d_max = inst.max_range
    om = sum(max(0.0, pd - d_max) for pd in report.path_dists)
    return weights.overtime * ot + weights.mileage * om


def evaluate(
    sol: Solution, inst: Instance, weights: PenaltyWeights, *, scheduled: bool = False
) -> EvalReport:
    """Full evaluation of a solution in the requested mode.

    In zero-wait mode the capacity violation is the summed station
    over-capacity integral; in scheduled mode waiting makes the schedule
    legal by construction, so the capacity violation is zero and congestion
    shows up as (possibly overtime-inducing) waiting instead.
    """
    validate_solution(sol, inst, full_coverage=False)
    if scheduled:
        reports = simulate_solution(sol, inst)
        overcap: dict[int, float] = {}
        cap_total = 0.0
    else:
        reports = [route_profile(r, inst) for r in sol.routes]
        overcap = afs_overcapacity(sol, inst)
        cap_total = sum(overcap.values())

    td = sum(rep.distance for rep in reports)
    ot_total = sum(rep.overtime for rep in reports)
    om_total = sum(rep.over_mileage for rep in reports)
    penalty = (
        weights.overtime * ot_total + weights.mileage * om_total + weights.capacity * cap_total
    )
    fleet_ok = sol.route_count <= inst.fleet_limit
    feasible = (
        fleet_ok
        and ot_total <= FEAS_EPS
        and om_total <= FEAS_EPS
        and cap_total <= FEAS_EPS
    )
    return EvalReport(
        scheduled=scheduled,
        routes=reports,
        total_distance=td,
        overcap=overcap,
        overtime_total=ot_total,
        mileage_total=om_total,
        capacity_total=cap_total,
        penalty=penalty,
        quality=td + penalty,
        fleet_ok=fleet_ok,
        feasible=feasible,
    )


def solution_penalty(sol: Solution, inst: Instance, weights: PenaltyWeights) -> float:
    """Total penalty: per-route overtime/over-mileage plus weighted station
    over-capacity (zero-wait mode)."""
    return evaluate(sol, inst, weights).penalty


def total_quality(sol: Solution, inst: Instance, weights: PenaltyWeights) -> float:
    """Distance plus penalty (zero-wait mode); equals plain distance for
    solutions without violations."""
    return evaluate(sol, inst, weights).quality


def check_feasibility(report: EvalReport, inst: Instance) -> FeasibilityVerdict:
    """Per-constraint feasibility flags for an evaluated solution.

    Structural constraints must already hold (they raise at evaluation
    time); capacity feasibility holds by construction under the waiting
    schedule, and in zero-wait mode the over-capacity magnitude must vanish.
    """
    sol = Solution([rep.seq for rep in report.routes])
    validate_solution(sol, inst)
    duration_ok = report.overtime_total <= FEAS_EPS
    energy_ok = report.mileage_total <= FEAS_EPS
    fleet_ok = report.fleet_ok
    capacity_ok = report.capacity_total <= FEAS_EPS
    return FeasibilityVerdict(
        duration_ok=duration_ok,
        energy_ok=energy_ok,
        fleet_ok=fleet_ok,
        feasible=duration_ok and energy_ok and fleet_ok and capacity_ok,
    )
