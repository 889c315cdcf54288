"""Population management for the memetic solver.

Individuals live in two subpopulations split by (scheduled-mode) feasibility.
Selection pressure combines solution quality with a diversity contribution:
both are turned into ranks and blended into a single biased fitness where
lower is better.  Survivor selection removes clones first, then the worst
biased fitness.  Penalty weights adapt to the recent feasibility history so
the infeasible subpopulation hovers near the feasibility boundary.
"""

from __future__ import annotations

import heapq
import itertools
import random
from dataclasses import dataclass, field

from greenvrp.model import EvalReport, Instance, PenaltyWeights, Solution, evaluate

_uid_counter = itertools.count()


def customer_adjacency(sol: Solution, inst: Instance) -> tuple[list[int], list[int]]:
    """Predecessor/successor node of every customer with station visits
    skipped (a customer next to a station compares against the node beyond
    it); depot endpoints count as neighbors."""
    pre = [0] * (inst.n + 1)
    suc = [0] * (inst.n + 1)
    for r in sol.routes:
        walk = [v for v in r if not inst.is_station(v)]
        for a, b in zip(walk, walk[1:]):
            if inst.is_customer(b):
                pre[b] = a
            if inst.is_customer(a):
                suc[a] = b
    return pre, suc


def _adjacency_mismatch(pre_a, suc_a, pre_b, suc_b, n: int) -> float:
    # Each customer owns two neighbor slots; count how many cannot be
    # matched against the other solution's two slots (multiset matching,
    # direction-insensitive).  Matching multisets of equal size keeps the
    # count symmetric even when a customer's two neighbors coincide.
    diff = 0
    for i in range(1, n + 1):
        pa, sa = pre_a[i], suc_a[i]
        pb, sb = pre_b[i], suc_b[i]
        if pa == pb:
            if sa != sb:
                diff += 1
        elif pa == sb:
            if sa != pb:
                diff += 1
        elif sa == pb:
            diff += 1
        elif sa == sb:
            diff += 1
        else:
            diff += 2
    return diff / (2.0 * n)


def hamming_distance(a: Solution, b: Solution, inst: Instance) -> float:
    """Normalized arc-based distance in [0, 1].

    For each customer the arcs to its neighbors are compared by neighbor
    identity, ignoring direction, so a reversed route is at distance zero
    from its original.
    """
    pre_a, suc_a = customer_adjacency(a, inst)
    pre_b, suc_b = customer_adjacency(b, inst)
    return _adjacency_mismatch(pre_a, suc_a, pre_b, suc_b, inst.n)


@dataclass(eq=False)
class Individual:
    """A solution with its cached evaluations and population bookkeeping."""

    solution: Solution
    distance: float
    quality: float
    overtime: float
    over_mileage: float
    overcapacity: float
    scheduled_feasible: bool
    fleet_ok: bool
    giant: list[int]
    pre: list[int]
    suc: list[int]
    uid: int = field(default_factory=lambda: next(_uid_counter))
    phi: float = 0.0
    fit: int = 0
    dc: int = 0
    biased_fitness: float = 0.0

    def __post_init__(self) -> None:
        self._peer_dists: dict[int, float] = {}

    @classmethod
    def from_solution(
        cls, sol: Solution, inst: Instance, weights: PenaltyWeights
    ) -> "Individual":
        zw = evaluate(sol, inst, weights)
        sched = evaluate(sol, inst, weights, scheduled=True)
        pre, suc = customer_adjacency(sol, inst)
        return cls(
            solution=sol,
            distance=zw.total_distance,
            quality=zw.quality,
            overtime=zw.overtime_total,
            over_mileage=zw.mileage_total,
            overcapacity=zw.capacity_total,
            scheduled_feasible=sched.feasible,
            fleet_ok=zw.fleet_ok,
            giant=sol.giant_tour(inst),
            pre=pre,
            suc=suc,
        )

    def requality(self, weights: PenaltyWeights) -> None:
        """Recompute quality from the stored violation magnitudes after a
        penalty-weight change."""
        self.quality = self.distance + (
            weights.overtime * self.overtime
            + weights.mileage * self.over_mileage
            + weights.capacity * self.overcapacity
        )

    def constraint_flags(self, eps: float = 1e-9) -> tuple[bool, bool, bool]:
        """(duration ok, mileage ok, capacity ok) under zero-wait magnitudes."""
        return (
            self.overtime <= eps,
            self.over_mileage <= eps,
            self.overcapacity <= eps,
        )


class Subpopulation:
    """Members of one feasibility class with cached pairwise distances."""

    def __init__(
        self,
        n_customers: int,
        mu: int,
        lam: int,
        elite_frac: float,
        close_frac: float,
    ):
        self.n_customers = n_customers
        self.mu = mu
        self.lam = lam
        self.elite_frac = elite_frac
        self.close_frac = close_frac
        self.members: list[Individual] = []

    def __len__(self) -> int:
        return len(self.members)

    @property
    def n_close(self) -> int:
        raw = int(round(self.close_frac * self.n_customers))
        return max(1, min(len(self.members) - 1, raw)) if len(self.members) > 1 else 1

    def add(self, ind: Individual) -> None:
        n = self.n_customers
        for m in self.members:
            dist = _adjacency_mismatch(ind.pre, ind.suc, m.pre, m.suc, n)
            m._peer_dists[ind.uid] = dist
            ind._peer_dists[m.uid] = dist
        self.members.append(ind)

    def remove(self, ind: Individual) -> None:
        self.members.remove(ind)
        for m in self.members:
            m._peer_dists.pop(ind.uid, None)
        ind._peer_dists.clear()

    def diversity_contribution(self, ind: Individual) -> float:
        """Mean distance to the closest neighbors (all of them when fewer
        than the configured count exist; zero for a lone member)."""
        return self._phi(ind, self.n_close)

    @staticmethod
    def _phi(ind: Individual, n_close: int) -> float:
        dists = ind._peer_dists
        if not dists:
            return 0.0
        if n_close == 1:
            return min(dists.values())
        if n_close >= len(dists):
            return sum(dists.values()) / len(dists)
        nearest = heapq.nsmallest(n_close, dists.values())
        return sum(nearest) / n_close

    def update_biased_fitness(self) -> None:
        members = self.members
        nbp = len(members)
        if nbp == 0:
            return
        n_close = self.n_close
        for m in members:
            m.phi = self._phi(m, n_close)
        by_quality = sorted(range(nbp), key=lambda i: members[i].quality)
        for rank, i in enumerate(by_quality, start=1):
            members[i].fit = rank
        by_div = sorted(range(nbp), key=lambda i: -members[i].phi)
        for rank, i in enumerate(by_div, start=1):
            members[i].dc = rank
        nbe = min(self.elite_frac * self.n_customers, float(nbp))
        coef = 1.0 - nbe / nbp
        for m in members:
            m.biased_fitness = m.fit + coef * m.dc


def diversity_contribution(ind: Individual, subpop: Subpopulation) -> float:
    return subpop.diversity_contribution(ind)


def binary_tournament(
    feas: Subpopulation, infeas: Subpopulation, rng: random.Random
) -> Individual:
    """Pick two uniform members from the union of both subpopulations and
    return the better (lower biased fitness; ties by quality, then a coin)."""
    pool = feas.members + infeas.members
    if not pool:
        raise ValueError("cannot run a tournament on an empty population")
    a = pool[rng.randrange(len(pool))]
    b = pool[rng.randrange(len(pool))]
    if a is b:
        return a
    if a.biased_fitness != b.biased_fitness:
        return a if a.biased_fitness < b.biased_fitness else b
    if a.quality != b.quality:
        return a if a.quality < b.quality else b
    return a if rng.random() < 0.5 else b


def order_crossover(p1: list[int], p2: list[int], rng: random.Random) -> list[int]:
    """Classic order crossover: copy a random slice of the first parent in
    place, then fill the remaining positions after the slice (wrapping) with
    the second parent's genes in their order starting after the slice end."""
    n = len(p1)
    i = rng.randrange(n)
    j = rng.randrange(n)
    if i > j:
        i, j = j, i
    child: list[int] = [0] * n
    child[i : j + 1] = p1[i : j + 1]
    used = set(p1[i : j + 1])
    fill = [g for k in range(n) if (g := p2[(j + 1 + k) % n]) not in used]
    for k, val in enumerate(fill):
        child[(j + 1 + k) % n] = val
    return child


def select_survivors(subpop: Subpopulation) -> None:
    """Shrink the subpopulation to its lower bound.

    First batch: duplicates of cloned solutions (route sets equal up to
    route order), keeping each clone group's best biased fitness.  Second
    batch: members with the worst biased fitness, never the quality leader.
    Biased fitness is refreshed between batches.
    """
    target = subpop.mu
    if len(subpop) <= target:
        return

    groups: dict[tuple, list[Individual]] = {}
    for m in subpop.members:
        groups.setdefault(m.solution.canonical_key(), []).append(m)
    victims: list[Individual] = []
    for grp in groups.values():
        if len(grp) > 1:
            keeper = min(grp, key=lambda m: m.biased_fitness)
            victims.extend(m for m in grp if m is not keeper)
    victims.sort(key=lambda m: -m.biased_fitness)
    for v in victims:
        if len(subpop) <= target:
            break
        subpop.remove(v)
    subpop.update_biased_fitness()

    excess = len(subpop) - target
    if excess > 0:
        best = min(subpop.members, key=lambda m: m.quality)
        by_worst = sorted(
            (m for m in subpop.members if m is not best),
            key=lambda m: -m.biased_fitness,
        )
        for v in by_worst[:excess]:
            subpop.remove(v)
        subpop.update_biased_fitness()


def insert_offspring(
    ind: Individual, feas: Subpopulation, infeas: Subpopulation
) -> None:
    """Route the individual to the subpopulation matching its feasibility
    class, refresh both, and trigger survivor selection at the upper bound."""
    target = feas if ind.scheduled_feasible else infeas
    target.add(ind)
    # The other subpopulation's membership is untouched, so refreshing it
    # would be an exact no-op; refreshing the target covers both.
    target.update_biased_fitness()
    if len(target) >= target.lam:
        select_survivors(target)


def adapt_penalties(
    history, weights: PenaltyWeights, *, low: float = 0.15, high: float = 0.25
) -> PenaltyWeights:
    """Update the three weights from recent per-constraint satisfaction
    flags: a rate at or below ``low`` raises the weight by 20%, at or above
    ``high`` lowers it by 15%."""
    flags = list(history)
    if not flags:
        return weights
    values = [weights.overtime, weights.mileage, weights.capacity]
    out = []
    for idx, w in enumerate(values):
        rate = sum(1 for f in flags if f[idx]) / len(flags)
        if rate <= low:
            w = w * 1.2
        elif rate >= high:
            w = w * 0.85
        out.append(w)
    return PenaltyWeights(overtime=out[0], mileage=out[1], capacity=out[2])
