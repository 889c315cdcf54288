"""Local search: nine move operators with incremental move evaluation.

Moves are described as recompositions of oriented route fragments plus
inserted nodes.  Per-route prefix aggregates (distance, travel time, stop
time, customer counts) let a candidate recomposition be costed from O(1)
lookups per fragment: total distance, zero-wait duration, and the distances
of only those energy paths that the move actually changes.  Station
over-capacity deltas re-sweep only the timelines of stations touched by the
move.  Nothing is mutated until a move is applied, at which point the
affected routes' aggregates are rebuilt.

Four operators follow a conditional station-insert rule: when a move grows a
route that contains no station, the station nearest to the node preceding
the insertion point is spliced in behind it, so relocations into
station-free routes stay range-legal in one move.  After an accepted move
any station whose removal keeps every path within range is pruned.

Reversal-based recompositions assume symmetric distance and travel-time
matrices (all coordinate-built instances are Euclidean).
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass

from greenvrp.model import (
    DEPOT,
    FEAS_EPS,
    Instance,
    PenaltyWeights,
    Solution,
    validate_solution,
)

#: A move must beat the incumbent by more than this to count as improving
#: (guards against float-noise cycling; descent then provably terminates).
EPS_IMPROVE = 1e-9

CAI_OPS = (1, 2, 3, 4)


class InvalidMoveError(Exception):
    """Move preconditions do not hold in the current search state."""


@dataclass(frozen=True)
class Move:
    """One candidate move: operator id, the customer pair that defines it,
    the conditional station insertion (if any) and the evaluated change in
    quality."""

    op: int
    x: int
    y: int
    station: int | None
    delta: float


@dataclass
class NeighborLists:
    """Per-customer nearest-customer lists used to restrict move pairs."""

    alpha: int
    of: list[list[int]]


def build_neighbor_lists(inst: Instance, alpha: int | None = None) -> NeighborLists:
    """The ``alpha`` nearest customers of every customer, distance-sorted
    with ties broken by lower id; ``alpha = max(5, ceil(5% n))``."""
    n = inst.n
    if alpha is None:
        alpha = max(5, math.ceil(0.05 * n))
    take = min(alpha, n - 1)
    lists: list[list[int]] = [[] for _ in range(n + 1)]
    d = inst.dist_rows
    for x in range(1, n + 1):
        row = d[x]
        order = sorted((y for y in range(1, n + 1) if y != x), key=lambda y: (row[y], y))
        lists[x] = order[:take]
    return NeighborLists(alpha=alpha, of=lists)


class RouteState:
    """One route with prefix aggregates.

    ``dpre[k]``/``tv[k]`` are cumulative distance/travel time up to position
    ``k``; ``sv[k]`` sums the stop durations of nodes before ``k``;
    ``cpre[k]`` counts customers before ``k``.  Zero-wait arrival at ``k`` is
    ``tv[k] + sv[k]``.
    """

    __slots__ = (
        "seq",
        "dpre",
        "tv",
        "sv",
        "cpre",
        "stations_pos",
        "dist",
        "duration",
        "overtime",
        "over_mileage",
        "path_dists",
        "ncust",
        "version",
    )

    def __init__(self) -> None:
        self.version = 0

    def __len__(self) -> int:
        return len(self.seq)


class SearchState:
    """Mutable search position over one instance: routes, node lookups, the
    customer-relative-station array, station timelines and cached totals."""

    def __init__(self, sol: Solution, inst: Instance, weights: PenaltyWeights):
        validate_solution(sol, inst, full_coverage=False)
        self.inst = inst
        self.weights = weights
        self.routes: list[RouteState] = []
        self.route_of: list[RouteState | None] = [None] * (inst.n + 1)
        self.pos_of: list[int] = [0] * (inst.n + 1)
        #: -1 while the customer precedes its route's first station (or the
        #: route has none), +1 once a station precedes it.
        self.cra: list[int] = [-1] * (inst.n + 1)
        #: station node -> {route -> [zero-wait arrival times]}
        self.visits: dict[int, dict[RouteState, list[float]]] = {}
        self.cs: dict[int, float] = {}
        for seq in sol.routes:
            route = RouteState()
            self._set_sequence(route, list(seq))
            self.routes.append(route)
        for st in list(self.visits):
            self._refresh_station(st)
        self._refresh_totals()

    # -- bookkeeping ------------------------------------------------------

    def _set_sequence(self, route: RouteState, seq: list[int]) -> None:
        inst = self.inst
        d = inst.dist_rows
        t = inst.time_rows
        dur = inst.node_dur
        m = len(seq)
        dpre = [0.0] * m
        tv = [0.0] * m
        sv = [0.0] * (m + 1)
        cpre = [0] * (m + 1)
        stations_pos: list[int] = []
        path_dists: list[float] = []
        ncust = 0
        acc = 0.0
        seen_station = False
        prev = seq[0]
        for k in range(m):
            v = seq[k]
            if k:
                leg = d[prev][v]
                dpre[k] = dpre[k - 1] + leg
                tv[k] = tv[k - 1] + t[prev][v]
                acc += leg
            sv[k + 1] = sv[k] + dur[v]
            cpre[k + 1] = cpre[k]
            if inst.is_customer(v):
                ncust += 1
                cpre[k + 1] += 1
                self.route_of[v] = route
                self.pos_of[v] = k
                self.cra[v] = 1 if seen_station else -1
            elif inst.is_station(v):
                stations_pos.append(k)
                seen_station = True
                path_dists.append(acc)
                acc = 0.0
            prev = v
        path_dists.append(acc)

        # Retire old station visits, record new ones.
        if route.version:
            for p in route.stations_pos:
                old_st = route.seq[p]
                by_route = self.visits.get(old_st)
                if by_route is not None:
                    by_route.pop(route, None)
        for p in stations_pos:
            st = seq[p]
            self.visits.setdefault(st, {}).setdefault(route, []).append(tv[p] + sv[p])

        route.seq = seq
        route.dpre = dpre
        route.tv = tv
        route.sv = sv
        route.cpre = cpre
        route.stations_pos = stations_pos
        route.dist = dpre[-1]
        route.duration = tv[m - 1] + sv[m - 1]  # zero-wait arrival at the final depot
        route.path_dists = path_dists
        d_max = inst.max_range
        route.overtime = max(0.0, route.duration - inst.duration_limit)
        route.over_mileage = sum(max(0.0, pd - d_max) for pd in path_dists)
        route.ncust = ncust
        route.version += 1

    def _drop_route(self, route: RouteState) -> None:
        for p in route.stations_pos:
            st = route.seq[p]
            by_route = self.visits.get(st)
            if by_route is not None:
                by_route.pop(route, None)
        self.routes.remove(route)

    def _refresh_station(self, st: int) -> None:
        by_route = self.visits.get(st)
        starts = [a for arrs in by_route.values() for a in arrs] if by_route else []
        self.cs[st] = _overcap_integral(starts, self.inst.refuel_time, self.inst.afs_capacity)

    def _refresh_totals(self) -> None:
        self.dist_total = sum(r.dist for r in self.routes)
        self.ot_total = sum(r.overtime for r in self.routes)
        self.om_total = sum(r.over_mileage for r in self.routes)
        self.cs_total = sum(self.cs.values())

    # -- queries ----------------------------------------------------------

    def quality(self) -> float:
        w = self.weights
        return (
            self.dist_total
            + w.overtime * self.ot_total
            + w.mileage * self.om_total
            + w.capacity * self.cs_total
        )

    def has_violations(self) -> bool:
        return (
            self.ot_total > FEAS_EPS
            or self.om_total > FEAS_EPS
            or self.cs_total > FEAS_EPS
            or len(self.routes) > self.inst.fleet_limit
        )

    def extract_solution(self) -> Solution:
        return Solution([list(r.seq) for r in self.routes])


def _overcap_integral(starts: list[float], refuel_time: float, capacity: int) -> float:
    """Integral of (concurrent refuels - capacity)+ over time for equal-length
    refuel intervals beginning at ``starts``."""
    if len(starts) <= capacity:
        return 0.0
    starts = sorted(starts)
    v = len(starts)
    total = 0.0
    level = 0
    i = j = 0
    prev = starts[0]
    while j < v:
        t_start = starts[i] if i < v else math.inf
        t_end = starts[j] + refuel_time
        t = t_start if t_start <= t_end else t_end
        if level > capacity:
            total += (t - prev) * (level - capacity)
        if t_start <= t_end:
            level += 1
            i += 1
        else:
            level -= 1
            j += 1
        prev = t
    return total


# ---------------------------------------------------------------------------
# Move construction: each operator yields per-route recompositions made of
# ('f', route, i, j) forward fragments, ('r', route, i, j) reversed
# fragments, and ('n', node) single-node insertions.
# ---------------------------------------------------------------------------


def _frag(route, i, j):
    return ("f", route, i, j) if i <= j else None


def _pieces(*parts):
    return [p for p in parts if p is not None]


def _move_plans(state: SearchState, op: int, x: int, y: int):
    """Return (plans, cai_station) or None when preconditions fail.

    ``plans`` maps each affected route to the piece list describing its new
    sequence (an entry of ``None`` pieces is impossible; routes whose new
    sequence has no customers are deleted at apply time).
    """
    inst = state.inst
    n = inst.n
    if x == y or not 0 < x <= n or not 0 < y <= n:
        return None
    ra = state.route_of[x]
    rb = state.route_of[y]
    if ra is None or rb is None:
        return None
    px = state.pos_of[x]
    py = state.pos_of[y]
    same = ra is rb
    seq_a = ra.seq
    seq_b = rb.seq
    ma = len(seq_a)
    mb = len(seq_b)
    station = None
    frag = _frag
    pieces = _pieces

    if op == 1:
        if same and py + 1 == px:
            return None
        if not rb.stations_pos:
            station = inst.nearest_station[x]
        ins = [("n", x)] + ([("n", station)] if station is not None else [])
        if same:
            if px < py:
                plan = pieces(frag(ra, 0, px - 1), frag(ra, px + 1, py), *ins, frag(ra, py + 1, ma - 1))
            else:
                plan = pieces(frag(ra, 0, py), *ins, frag(ra, py + 1, px - 1), frag(ra, px + 1, ma - 1))
            return [(ra, plan)], station
        return [
            (ra, pieces(frag(ra, 0, px - 1), frag(ra, px + 1, ma - 1))),
            (rb, pieces(frag(rb, 0, py), *ins, frag(rb, py + 1, mb - 1))),
        ], station

    if op in (2, 3):
        x2 = seq_a[px + 1] if px + 1 < ma - 1 else 0
        if not 0 < x2 <= n or y == x2:
            return None
        if op == 2 and same and py + 1 == px:
            return None  # reinserting (x, x2) right after its predecessor
        if op == 2:
            moved = [("n", x), ("n", x2)]
            tail_node = x2
        else:
            moved = [("n", x2), ("n", x)]
            tail_node = x
        if not same and not rb.stations_pos:
            station = inst.nearest_station[tail_node]
            moved.append(("n", station))
        if same:
            if px < py:
                plan = pieces(frag(ra, 0, px - 1), frag(ra, px + 2, py), *moved, frag(ra, py + 1, ma - 1))
            else:
                plan = pieces(frag(ra, 0, py), *moved, frag(ra, py + 1, px - 1), frag(ra, px + 2, ma - 1))
            return [(ra, plan)], station
        return [
            (ra, pieces(frag(ra, 0, px - 1), frag(ra, px + 2, ma - 1))),
            (rb, pieces(frag(rb, 0, py), *moved, frag(rb, py + 1, mb - 1))),
        ], station

    if op == 4:
        x2 = seq_a[px + 1] if px + 1 < ma - 1 else 0
        if not 0 < x2 <= n or y == x2:
            return None
        moved = [("n", x), ("n", x2)]
        if not same and not rb.stations_pos:
            station = inst.nearest_station[x2]
            moved.append(("n", station))
        if same:
            if px < py:
                plan = pieces(
                    frag(ra, 0, px - 1), ("n", y), frag(ra, px + 2, py - 1), *moved, frag(ra, py + 1, ma - 1)
                )
            else:
                plan = pieces(
                    frag(ra, 0, py - 1), *moved, frag(ra, py + 1, px - 1), ("n", y), frag(ra, px + 2, ma - 1)
                )
            return [(ra, plan)], station
        return [
            (ra, pieces(frag(ra, 0, px - 1), ("n", y), frag(ra, px + 2, ma - 1))),
            (rb, pieces(frag(rb, 0, py - 1), *moved, frag(rb, py + 1, mb - 1))),
        ], station

    if op == 5:
        if same:
            i, j = (px, py) if px < py else (py, px)
            plan = pieces(
                frag(ra, 0, i - 1), ("n", seq_a[j]), frag(ra, i + 1, j - 1), ("n", seq_a[i]), frag(ra, j + 1, ma - 1)
            )
            return [(ra, plan)], None
        return [
            (ra, pieces(frag(ra, 0, px - 1), ("n", y), frag(ra, px + 1, ma - 1))),
            (rb, pieces(frag(rb, 0, py - 1), ("n", x), frag(rb, py + 1, mb - 1))),
        ], None

    if op == 6:
        x2 = seq_a[px + 1] if px + 1 < ma - 1 else 0
        y2 = seq_b[py + 1] if py + 1 < mb - 1 else 0
        if not 0 < x2 <= n or not 0 < y2 <= n:
            return None
        if same:
            if abs(px - py) < 2:
                return None
            i, j = (px, py) if px < py else (py, px)
            ai, ai1 = seq_a[i], seq_a[i + 1]
            bj, bj1 = seq_a[j], seq_a[j + 1]
            plan = pieces(
                frag(ra, 0, i - 1),
                ("n", bj),
                ("n", bj1),
                frag(ra, i + 2, j - 1),
                ("n", ai),
                ("n", ai1),
                frag(ra, j + 2, ma - 1),
            )
            return [(ra, plan)], None
        return [
            (ra, pieces(frag(ra, 0, px - 1), ("n", y), ("n", y2), frag(ra, px + 2, ma - 1))),
            (rb, pieces(frag(rb, 0, py - 1), ("n", x), ("n", x2), frag(rb, py + 2, mb - 1))),
        ], None

    if op == 7:
        if not same:
            return None
        i, j = (px, py) if px < py else (py, px)
        if j < i + 2:
            return None
        plan = pieces(frag(ra, 0, i), ("r", ra, i + 1, j), frag(ra, j + 1, ma - 1))
        return [(ra, plan)], None

    if op == 8:
        if same:
            return None
        rev_tail = ("r", ra, px + 1, ma - 2) if px + 1 <= ma - 2 else None
        return [
            (ra, pieces(frag(ra, 0, px), ("r", rb, 1, py), ("n", DEPOT))),
            (rb, pieces(("n", DEPOT), rev_tail, frag(rb, py + 1, mb - 1))),
        ], None

    if op == 9:
        if same:
            return None
        if px == ma - 2 and py == mb - 2:
            return None  # both tails empty
        return [
            (ra, pieces(frag(ra, 0, px), frag(rb, py + 1, mb - 1))),
            (rb, pieces(frag(rb, 0, py), frag(ra, px + 1, ma - 1))),
        ], None

    raise InvalidMoveError(f"unknown operator N{op}")


def _compose(state: SearchState, plan) -> tuple[float, float, float, int, list[tuple[int, float]]]:
    """Cost a recomposition from prefix aggregates.

    Returns (distance, duration, over_mileage, customer count, station
    visits as (node, zero-wait arrival)).  Work is proportional to the piece
    count plus the number of station visits in the touched fragments.
    """
    inst = state.inst
    d = inst.dist_rows
    t = inst.time_rows
    dur = inst.node_dur
    d_max = inst.max_range
    n = inst.n

    dist = 0.0
    time = 0.0
    om = 0.0
    acc = 0.0
    ncust = 0
    visits: list[tuple[int, float]] = []
    last = -1

    for piece in plan:
        kind = piece[0]
        if kind == "n":
            v = piece[1]
            if last >= 0:
                leg = d[last][v]
                dist += leg
                acc += leg
                time += dur[last] + t[last][v]
            if v > n:
                if acc > d_max:
                    om += acc - d_max
                acc = 0.0
                visits.append((v, time))
            elif v:
                ncust += 1
            last = v
            continue

        _, route, i, j = piece
        seq = route.seq
        dpre = route.dpre
        tv = route.tv
        sv = route.sv
        if kind == "f":
            v0 = seq[i]
            if last >= 0:
                leg = d[last][v0]
                dist += leg
                acc += leg
                time += dur[last] + t[last][v0]
            if v0 > n:
                if acc > d_max:
                    om += acc - d_max
                acc = 0.0
                visits.append((v0, time))
            dist += dpre[j] - dpre[i]
            ncust += route.cpre[j + 1] - route.cpre[i]
            sts = route.stations_pos
            if sts:
                lo = bisect_right(sts, i)
                hi = bisect_right(sts, j)
                base = i
                for idx in range(lo, hi):
                    p = sts[idx]
                    pd = acc + dpre[p] - dpre[base]
                    if pd > d_max:
                        om += pd - d_max
                    acc = 0.0
                    visits.append((seq[p], time + (tv[p] - tv[i]) + (sv[p] - sv[i])))
                    base = p
                acc += dpre[j] - dpre[base]
            else:
                acc += dpre[j] - dpre[i]
            time += (tv[j] - tv[i]) + (sv[j] - sv[i])
            last = seq[j]
        else:  # reversed fragment, symmetric matrices assumed
            v0 = seq[j]
            if last >= 0:
                leg = d[last][v0]
                dist += leg
                acc += leg
                time += dur[last] + t[last][v0]
            if v0 > n:
                if acc > d_max:
                    om += acc - d_max
                acc = 0.0
                visits.append((v0, time))
            dist += dpre[j] - dpre[i]
            ncust += route.cpre[j + 1] - route.cpre[i]
            sts = route.stations_pos
            if sts:
                lo = bisect_left(sts, i)
                hi = bisect_left(sts, j)
                base = j
                for idx in range(hi - 1, lo - 1, -1):
                    p = sts[idx]
                    pd = acc + dpre[base] - dpre[p]
                    if pd > d_max:
                        om += pd - d_max
                    acc = 0.0
                    visits.append((seq[p], time + (tv[j] - tv[p]) + (sv[j + 1] - sv[p + 1])))
                    base = p
                acc += dpre[base] - dpre[i]
            else:
                acc += dpre[j] - dpre[i]
            time += (tv[j] - tv[i]) + (sv[j + 1] - sv[i + 1])
            last = seq[i]

    if acc > d_max:
        om += acc - d_max
    return dist, time, om, ncust, visits


def _plan_delta(state: SearchState, plans) -> float:
    """Exact zero-wait quality change realized by applying the plans."""
    inst = state.inst
    w = state.weights
    t_max = inst.duration_limit

    d_dist = 0.0
    d_ot = 0.0
    d_om = 0.0
    affected: set[int] | None = None
    new_visits: dict[int, list[float]] = {}
    old_visits: dict[int, list[float]] = {}

    for route, plan in plans:
        dist, duration, om, ncust, visits = _compose(state, plan)
        if ncust == 0:
            dist = 0.0
            om = 0.0
            ot = 0.0
            visits = ()
        else:
            ot = duration - t_max
            if ot < 0.0:
                ot = 0.0
        d_dist += dist - route.dist
        d_ot += ot - route.overtime
        d_om += om - route.over_mileage
        if visits or route.stations_pos:
            if affected is None:
                affected = set()
            seq = route.seq
            tv = route.tv
            sv = route.sv
            for p in route.stations_pos:
                st = seq[p]
                affected.add(st)
                old_visits.setdefault(st, []).append(tv[p] + sv[p])
            for st, at in visits:
                affected.add(st)
                new_visits.setdefault(st, []).append(at)

    delta = d_dist + w.overtime * d_ot + w.mileage * d_om
    if affected is None:
        return delta

    route_a = plans[0][0]
    route_b = plans[1][0] if len(plans) > 1 else None
    d_cs = 0.0
    for st in affected:
        new_l = new_visits.get(st)
        old_l = old_visits.get(st)
        if new_l == old_l or (new_l is not None and old_l is not None and sorted(new_l) == sorted(old_l)):
            continue  # same visit multiset: the congestion integral cannot change
        starts = list(new_l) if new_l else []
        by_route = state.visits.get(st)
        if by_route:
            for route, arrs in by_route.items():
                if route is not route_a and route is not route_b:
                    starts.extend(arrs)
        cs_new = _overcap_integral(starts, inst.refuel_time, inst.afs_capacity)
        d_cs += cs_new - state.cs.get(st, 0.0)
    return delta + w.capacity * d_cs


def _materialize(plan) -> list[int]:
    seq: list[int] = []
    for piece in plan:
        kind = piece[0]
        if kind == "n":
            seq.append(piece[1])
        elif kind == "f":
            seq.extend(piece[1].seq[piece[2] : piece[3] + 1])
        else:
            seq.extend(reversed(piece[1].seq[piece[2] : piece[3] + 1]))
    return seq


def evaluate_move(state: SearchState, move: Move) -> float:
    """Exact zero-wait quality change the move would realize, computed from
    prefix aggregates and affected-station timeline sweeps only."""
    res = _move_plans(state, move.op, move.x, move.y)
    if res is None:
        raise InvalidMoveError(f"N{move.op} preconditions fail for x={move.x}, y={move.y}")
    plans, _ = res
    return _plan_delta(state, plans)


def apply_move(state: SearchState, move: Move) -> list[RouteState]:
    """Apply the move, rebuilding the affected routes' aggregates, lookup
    maps, station timelines and cached totals; returns the surviving
    modified routes."""
    res = _move_plans(state, move.op, move.x, move.y)
    if res is None:
        raise InvalidMoveError(f"N{move.op} preconditions fail for x={move.x}, y={move.y}")
    plans, _ = res

    new_seqs = [(route, _materialize(plan)) for route, plan in plans]
    inst = state.inst
    touched_stations: set[int] = set()
    survivors: list[RouteState] = []
    for route, seq in new_seqs:
        for p in route.stations_pos:
            touched_stations.add(route.seq[p])
        for v in seq:
            if inst.is_station(v):
                touched_stations.add(v)
    for route, seq in new_seqs:
        if not any(inst.is_customer(v) for v in seq):
            state._drop_route(route)
        else:
            state._set_sequence(route, seq)
            survivors.append(route)
    for st in touched_stations:
        state._refresh_station(st)
    state._refresh_totals()
    return survivors


def explore_neighborhood(
    state: SearchState, op: int, neighbors: NeighborLists, stats: dict | None = None
) -> Move | None:
    """Best strictly-improving move of one operator, scanning the candidate
    pairs (x, y in x's neighbor list) in deterministic order; ties keep the
    first-found move."""
    best_delta = -EPS_IMPROVE
    best: Move | None = None
    lists = neighbors.of
    for x in range(1, state.inst.n + 1):
        for y in lists[x]:
            if stats is not None:
                stats["pairs"] = stats.get("pairs", 0) + 1
            res = _move_plans(state, op, x, y)
            if res is None:
                continue
            plans, station = res
            delta = _plan_delta(state, plans)
            if delta < best_delta:
                best_delta = delta
                best = Move(op=op, x=x, y=y, station=station, delta=delta)
    return best


def prune_afs(route: list[int], inst: Instance) -> list[int]:
    """Drop every station visit whose removal keeps the merged energy path
    within range, re-checking until no more can go."""
    seq = list(route)
    d = inst.dist_rows
    d_max = inst.max_range
    changed = True
    while changed:
        changed = False
        boundaries = [0] + [k for k, v in enumerate(seq) if inst.is_station(v)] + [len(seq) - 1]
        for b in range(1, len(boundaries) - 1):
            lo, mid, hi = boundaries[b - 1], boundaries[b], boundaries[b + 1]
            merged = (
                sum(d[seq[k]][seq[k + 1]] for k in range(lo, mid - 1))
                + d[seq[mid - 1]][seq[mid + 1]]
                + sum(d[seq[k]][seq[k + 1]] for k in range(mid + 1, hi))
            )
            if merged <= d_max:
                del seq[mid]
                changed = True
                break
    return seq


def _prune_state_route(state: SearchState, route: RouteState) -> None:
    pruned = prune_afs(route.seq, state.inst)
    if pruned != route.seq:
        removed = {route.seq[p] for p in route.stations_pos}
        state._set_sequence(route, pruned)
        for st in removed:
            state._refresh_station(st)
        state._refresh_totals()


def _descend(state: SearchState, neighbors: NeighborLists) -> None:
    """Best-improvement descent: scan operators in order, apply the first
    operator's best improving move, prune touched routes, restart from the
    first operator; stop when no operator improves."""
    while True:
        improved = False
        for op in range(1, 10):
            move = explore_neighborhood(state, op, neighbors)
            if move is not None:
                survivors = apply_move(state, move)
                for route in survivors:
                    _prune_state_route(state, route)
                improved = True
                break
        if not improved:
            return


def repair(
    sol: Solution,
    inst: Instance,
    weights: PenaltyWeights,
    neighbors: NeighborLists | None = None,
) -> Solution:
    """Rerun the descent with all penalty weights tenfold to push an
    infeasible solution toward feasibility; the caller's weights are
    untouched."""
    if neighbors is None:
        neighbors = build_neighbor_lists(inst)
    state = SearchState(sol, inst, weights.scaled(10.0))
    _descend(state, neighbors)
    return state.extract_solution()


def els(
    sol: Solution,
    inst: Instance,
    weights: PenaltyWeights,
    rng,
    neighbors: NeighborLists | None = None,
    repair_prob: float = 0.5,
) -> tuple[Solution, Solution]:
    """Full local search: descent over the nine operators, then, for a
    zero-wait-infeasible result, a repair pass with probability
    ``repair_prob``.  Returns (descent result, repaired-or-same result)."""
    if neighbors is None:
        neighbors = build_neighbor_lists(inst)
    state = SearchState(sol, inst, weights)
    _descend(state, neighbors)
    phi_a = state.extract_solution()
    if state.has_violations() and rng.random() < repair_prob:
        phi_b = repair(phi_a, inst, weights, neighbors)
    else:
        phi_b = phi_a
    return phi_a, phi_b
