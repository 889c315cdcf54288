"""Instance file parsing/writing, solution files, and benchmark generators.

The canonical instance format is plain text: header ``KEY: value`` lines,
then a ``NODES:`` section with one line per node.  ``#`` starts a comment.

    N: 2
    S: 1
    M: 2
    SPEED: 40
    TMAX: 7
    EF: 160
    CR: 1
    TAU_S: 0.5
    ETA: 1
    TAU_C: 0.5          # optional default customer service time
    NODES:
    0 DEPOT 0 -80
    1 CUST -3.5 12.25 0.5
    2 CUST 8 1
    3 AFS 0 0

Node ids are dense: 0 is the depot, 1..N customers, N+1..N+S stations.
Values are written with 12 significant digits, so writing and re-parsing an
instance whose values carry at most that precision is lossless.
"""

from __future__ import annotations

import math
import random

from greenvrp.model import DEPOT, Instance, Solution

_HEADER_KEYS = ("N", "S", "M", "SPEED", "TMAX", "EF", "CR", "TAU_S", "ETA")
_INT_KEYS = {"N", "S", "M", "ETA"}


class ParseError(Exception):
    """Malformed or semantically invalid instance/solution text."""

    def __init__(self, line: int, col: int, msg: str):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line = line
        self.col = col


def _fmt(v: float) -> str:
    return format(float(v), ".12g")


def parse_instance(text: str, name: str = "") -> Instance:
    """Parse canonical instance text; raise :class:`ParseError` with line
    and column on any defect."""
    header: dict[str, float] = {}
    nodes: dict[int, tuple[str, float, float, float | None]] = {}
    in_nodes = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if not in_nodes:
            if line.strip() == "NODES:":
                in_nodes = True
                continue
            if ":" not in line:
                raise ParseError(lineno, 1, "expected 'KEY: value' or 'NODES:'")
            key, _, value = line.partition(":")
            key = key.strip().upper()
            value = value.strip()
            col = raw.find(":") + 2
            if key not in _HEADER_KEYS and key != "TAU_C":
                raise ParseError(lineno, 1, f"unknown header key {key!r}")
            if key in header:
                raise ParseError(lineno, 1, f"duplicate header key {key!r}")
            try:
                header[key] = int(value) if key in _INT_KEYS else float(value)
            except ValueError:
                raise ParseError(lineno, col, f"bad numeric value {value!r} for {key}")
            continue

        tokens = line.split()
        if len(tokens) not in (4, 5):
            raise ParseError(lineno, 1, "node line needs: id KIND x y [service]")

        def tok_col(idx: int) -> int:
            return raw.find(tokens[idx]) + 1

        try:
            node_id = int(tokens[0])
        except ValueError:
            raise ParseError(lineno, tok_col(0), f"bad node id {tokens[0]!r}")
        kind = tokens[1].upper()
        if kind not in ("DEPOT", "CUST", "AFS"):
            raise ParseError(lineno, tok_col(1), f"unknown node kind {tokens[1]!r}")
        try:
            x = float(tokens[2])
            y = float(tokens[3])
        except ValueError:
            raise ParseError(lineno, tok_col(2), "bad coordinate")
        service = None
        if len(tokens) == 5:
            if kind != "CUST":
                raise ParseError(lineno, tok_col(4), "service time only valid for CUST")
            try:
                service = float(tokens[4])
            except ValueError:
                raise ParseError(lineno, tok_col(4), f"bad service time {tokens[4]!r}")
        if node_id in nodes:
            raise ParseError(lineno, tok_col(0), f"duplicate node id {node_id}")
        nodes[node_id] = (kind, x, y, service)

    if not in_nodes:
        raise ParseError(1, 1, "missing NODES: section")
    for key in _HEADER_KEYS:
        if key not in header:
            raise ParseError(1, 1, f"missing header key {key}")

    n = int(header["N"])
    s = int(header["S"])
    if n < 1 or s < 1:
        raise ParseError(1, 1, "N and S must be at least 1")
    expected = n + s + 1
    if len(nodes) != expected:
        raise ParseError(1, 1, f"expected {expected} node lines, found {len(nodes)}")
    for node_id in range(expected):
        if node_id not in nodes:
            raise ParseError(1, 1, f"missing node id {node_id}")
    if nodes[0][0] != "DEPOT":
        raise ParseError(1, 1, "node 0 must be the DEPOT")

    coords = []
    service_times = []
    tau_c = header.get("TAU_C")
    for node_id in range(expected):
        kind, x, y, service = nodes[node_id]
        want = "DEPOT" if node_id == 0 else ("CUST" if node_id <= n else "AFS")
        if kind != want:
            raise ParseError(1, 1, f"node {node_id} must be {want}, found {kind}")
        coords.append((x, y))
        if kind == "CUST":
            if service is None:
                if tau_c is None:
                    raise ParseError(
                        1, 1, f"customer {node_id} has no service time and no TAU_C default"
                    )
                service = tau_c
            service_times.append(service)

    for key in ("SPEED", "TMAX", "EF", "CR", "TAU_S", "ETA", "M"):
        if header[key] <= 0 and not (key == "TAU_S" and header[key] == 0):
            raise ParseError(1, 1, f"{key} must be positive")

    try:
        return Instance.from_coords(
            coords,
            n=n,
            s=s,
            speed=header["SPEED"],
            service=service_times,
            refuel_time=header["TAU_S"],
            fleet_limit=int(header["M"]),
            energy_full=header["EF"],
            consumption=header["CR"],
            duration_limit=header["TMAX"],
            afs_capacity=int(header["ETA"]),
            name=name,
        )
    except ValueError as err:
        raise ParseError(1, 1, str(err))


def write_instance(inst: Instance) -> str:
    """Canonical text for a coordinate-built instance."""
    if inst.coords is None:
        raise ValueError("only coordinate-built instances can be written")
    lines = [
        f"N: {inst.n}",
        f"S: {inst.s}",
        f"M: {inst.fleet_limit}",
        f"SPEED: {_fmt(inst.speed)}",
        f"TMAX: {_fmt(inst.duration_limit)}",
        f"EF: {_fmt(inst.energy_full)}",
        f"CR: {_fmt(inst.consumption)}",
        f"TAU_S: {_fmt(inst.refuel_time)}",
        f"ETA: {inst.afs_capacity}",
        "NODES:",
    ]
    for node_id in range(inst.node_count):
        x, y = inst.coords[node_id]
        if node_id == 0:
            lines.append(f"0 DEPOT {_fmt(x)} {_fmt(y)}")
        elif inst.is_customer(node_id):
            lines.append(
                f"{node_id} CUST {_fmt(x)} {_fmt(y)} {_fmt(inst.service[node_id])}"
            )
        else:
            lines.append(f"{node_id} AFS {_fmt(x)} {_fmt(y)}")
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> Solution:
    """Solution file: one route per line, space-separated node ids including
    the depot endpoints."""
    routes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            route = [int(tok) for tok in line.split()]
        except ValueError:
            raise ParseError(lineno, 1, "route lines must contain integer node ids")
        routes.append(route)
    if not routes:
        raise ParseError(1, 1, "no routes found")
    return Solution(routes)


def write_solution(sol: Solution) -> str:
    return "\n".join(" ".join(str(v) for v in route) for route in sol.routes) + "\n"


# ---------------------------------------------------------------------------
# Benchmark-shaped generators.  The two central profiles place one refueling
# station in the middle of the customer area with the depot a two-hour drive
# away; the large profile scatters stations across a city-scale box.
# ---------------------------------------------------------------------------

_M_CENTRAL = {25: (2, 7), 50: (3, 13), 100: (8, 25)}
_BEIJING_N = (200, 400, 600, 800, 1000)


def _uniform_points(rng: random.Random, count: int, lo: float, hi: float):
    return [
        (round(rng.uniform(lo, hi), 6), round(rng.uniform(lo, hi), 6))
        for _ in range(count)
    ]


def generate_instance(
    profile: str,
    seed: int,
    n: int | None = None,
    box: float | None = None,
    name: str | None = None,
) -> Instance:
    """Deterministic synthetic instance for a named profile.

    Profiles: ``s_central`` (15 customers, 1 single-slot central station),
    ``m_central`` (25/50/100 customers, capacity 2/3/8, fleet 7/13/25),
    ``beijing`` (200..1000 customers, capacity n/10, unconstrained fleet),
    and ``tiny`` (up to 6 customers, oracle-sized).
    """
    rng = random.Random(seed)
    profile = profile.lower()

    if profile == "s_central":
        n = 15 if n is None else n
        if n != 15:
            raise ValueError("s_central instances have exactly 15 customers")
        customers = _uniform_points(rng, n, -25.0, 25.0)
        coords = [(0.0, -80.0)] + customers + [(0.0, 0.0)]
        return Instance.from_coords(
            coords,
            n=n,
            s=1,
            speed=40.0,
            service=[0.5] * n,
            refuel_time=0.5,
            fleet_limit=15,
            energy_full=160.0,
            consumption=1.0,
            duration_limit=7.0,
            afs_capacity=1,
            name=name or f"s_central-s{seed}",
        )

    if profile == "m_central":
        if n not in _M_CENTRAL:
            raise ValueError(f"m_central size must be one of {sorted(_M_CENTRAL)}")
        capacity, fleet = _M_CENTRAL[n]
        customers = _uniform_points(rng, n, -25.0, 25.0)
        coords = [(0.0, -80.0)] + customers + [(0.0, 0.0)]
        return Instance.from_coords(
            coords,
            n=n,
            s=1,
            speed=40.0,
            service=[0.5] * n,
            refuel_time=0.5,
            fleet_limit=fleet,
            energy_full=160.0,
            consumption=1.0,
            duration_limit=7.5,
            afs_capacity=capacity,
            name=name or f"m_central{n}-s{seed}",
        )

    if profile == "beijing":
        if n not in _BEIJING_N:
            raise ValueError(f"beijing size must be one of {_BEIJING_N}")
        half = (box or 60.0) / 2.0
        s = max(2, n // 100)
        customers = _uniform_points(rng, n, -half, half)
        stations = _uniform_points(rng, s, -half * 0.8, half * 0.8)
        coords = [(0.0, 0.0)] + customers + stations
        return Instance.from_coords(
            coords,
            n=n,
            s=s,
            speed=40.0,
            service=[0.5] * n,
            refuel_time=0.5,
            fleet_limit=n,
            energy_full=160.0,
            consumption=1.0,
            duration_limit=8.0,
            afs_capacity=n // 10,
            name=name or f"beijing{n}-s{seed}",
        )

    if profile == "tiny":
        n = 5 if n is None else n
        if not 1 <= n <= 6:
            raise ValueError("tiny instances have at most 6 customers")
        customers = _uniform_points(rng, n, 5.0, 35.0)
        coords = [(0.0, 0.0)] + customers + [(20.0, 20.0)]
        return Instance.from_coords(
            coords,
            n=n,
            s=1,
            speed=40.0,
            service=[0.5] * n,
            refuel_time=0.5,
            fleet_limit=3,
            energy_full=80.0,
            consumption=1.0,
            duration_limit=4.0,
            afs_capacity=1,
            name=name or f"tiny{n}-s{seed}",
        )

    raise ValueError(f"unknown profile {profile!r}")
