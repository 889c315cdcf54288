"""Splitting a giant tour (permutation of all customers) into routes.

Each split call enforces exactly one constraint, picked at random: either the
route duration limit or the maximum driving range.  Splitting against a
single constraint keeps the procedure greedy and cheap while producing
structurally diverse solutions from the same tour.
"""

from __future__ import annotations

import random

from greenvrp.model import DEPOT, Instance, Solution


class UnsplittableCustomerError(Exception):
    """A customer cannot be placed even alone in a fresh route, so the
    greedy split would loop forever."""

    def __init__(self, customer: int, reason: str):
        super().__init__(f"customer {customer} cannot be placed in an empty route: {reason}")
        self.customer = customer


def validate_tour(tour: list[int], inst: Instance) -> None:
    if sorted(tour) != list(inst.customers()):
        raise ValueError("tour must be a permutation of all customers")


def scts(tour: list[int], inst: Instance, rng: random.Random) -> Solution:
    """Split by duration or by range, each with probability one half."""
    if rng.random() < 0.5:
        return split_tmax(tour, inst)
    return split_dmax(tour, inst)


def split_tmax(tour: list[int], inst: Instance) -> Solution:
    """Greedy duration-limited split.

    Customers are appended in tour order before the closing depot; a customer
    stays only while the route's zero-wait duration remains strictly below
    the limit, otherwise it is removed, the route closes and a new route
    starts with it.  No station visits are inserted.
    """
    t = inst.time_rows
    dur = inst.node_dur
    t_max = inst.duration_limit

    routes: list[list[int]] = []
    i = 0
    while i < len(tour):
        interior: list[int] = []
        tm = 0.0
        last = DEPOT
        while i < len(tour):
            cust = tour[i]
            candidate = tm - t[last][DEPOT] + t[last][cust] + dur[cust] + t[cust][DEPOT]
            if candidate < t_max:
                interior.append(cust)
                tm = candidate
                last = cust
                i += 1
            else:
                if not interior:
                    raise UnsplittableCustomerError(
                        cust, f"duration {candidate:.6g} >= limit {t_max:.6g}"
                    )
                break
        routes.append([DEPOT] + interior + [DEPOT])
    return Solution(routes)


def split_dmax(tour: list[int], inst: Instance) -> Solution:
    """Greedy range-limited split.

    Every route starts as (depot, station, depot) using the station nearest
    to the depot.  Each customer is first tried at the end of the pre-station
    segment and kept if that segment's distance stays strictly below the
    range; otherwise it is tried at the end of the post-station segment; if
    both fail the route closes and a new one starts.
    """
    d = inst.dist_rows
    d_max = inst.max_range
    afs = inst.nearest_station[DEPOT]

    routes: list[list[int]] = []
    i = 0
    while i < len(tour):
        pre: list[int] = []
        post: list[int] = []
        pre_d = d[DEPOT][afs]
        post_d = d[afs][DEPOT]
        last_pre = DEPOT
        last_post = afs
        while i < len(tour):
            cust = tour[i]
            cand_pre = pre_d - d[last_pre][afs] + d[last_pre][cust] + d[cust][afs]
            if cand_pre < d_max:
                pre.append(cust)
                pre_d = cand_pre
                last_pre = cust
                i += 1
                continue
            cand_post = post_d - d[last_post][DEPOT] + d[last_post][cust] + d[cust][DEPOT]
            if cand_post < d_max:
                post.append(cust)
                post_d = cand_post
                last_post = cust
                i += 1
                continue
            if not pre and not post:
                raise UnsplittableCustomerError(
                    cust,
                    f"segments {cand_pre:.6g} and {cand_post:.6g} both >= range {d_max:.6g}",
                )
            break
        routes.append([DEPOT] + pre + [afs] + post + [DEPOT])
    return Solution(routes)
