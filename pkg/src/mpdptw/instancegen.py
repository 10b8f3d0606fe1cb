"""Seeded instance generator and the text formats for instances and solutions.

Instance file (one record per line, reals with 9 fractional digits)::

    mpdptw-instance 1
    name demo
    counts <vertices incl. depot> <pairs> <vehicles>
    vehicle <id> <capacity> <cost_rate> <speed>
    vertex <id> <x> <y> <open> <close> <service> <quantity>
    pair <supplier> <customer>
    forbid <i> <j>          (optional, arc i->j unusable)

Lines starting with ``#`` and blank lines are ignored.
"""

from __future__ import annotations

import math
import os
import random
from contextlib import contextmanager
from dataclasses import dataclass
from typing import IO, Iterator, Union

from .model import (
    CONSTRAINTS,
    DEPOT,
    SAME_VEHICLE,
    Instance,
    RequestPair,
    Solution,
    Vehicle,
    Vertex,
    euclidean_distance,
    make_solution,
)

INSTANCE_HEADER = "mpdptw-instance 1"
SOLUTION_HEADER = "mpdptw-solution 1"
DIGITS = 9

PathOrFile = Union[str, os.PathLike, IO[str]]


class FormatError(ValueError):
    """Malformed instance or solution file."""

    def __init__(self, lineno: int, field: str, message: str):
        super().__init__(f"line {lineno}: {field}: {message}")
        self.lineno = lineno
        self.field = field


@dataclass(frozen=True)
class GenParams:
    pair_count: int = 5
    vehicle_count: int = 2
    area: float = 100.0
    q_min: int = 5
    q_max: int = 30
    capacity: float = 60.0
    cost_rate_min: float = 50.0
    cost_rate_max: float = 70.0
    window_width_min: float = 150.0
    window_width_max: float = 400.0
    horizon: float = 1000.0
    service_min: float = 0.0
    service_max: float = 10.0
    speed: float = 1.0
    seed: int = 0
    name: str | None = None

    def __post_init__(self):
        if self.pair_count < 1:
            raise ValueError("pair_count must be >= 1")
        if not 1 <= self.vehicle_count <= self.pair_count:
            raise ValueError(f"vehicle_count must be in 1..{self.pair_count} (K <= N'/2)")
        if self.area <= 0 or self.horizon <= 0 or self.speed <= 0:
            raise ValueError("area, horizon and speed must be positive")
        if not 1 <= self.q_min <= self.q_max:
            raise ValueError("need 1 <= q_min <= q_max")
        if self.capacity < self.q_max:
            raise ValueError("capacity must admit the largest single request")
        if not 0 <= self.cost_rate_min <= self.cost_rate_max:
            raise ValueError("bad cost rate range")
        if not 0 <= self.window_width_min <= self.window_width_max <= self.horizon:
            raise ValueError("bad window width range")
        if not 0 <= self.service_min <= self.service_max:
            raise ValueError("bad service time range")


def _r(x: float) -> float:
    return round(x, DIGITS)


def _seed_routes(vertices: list[Vertex], pairs: list[RequestPair], k: int) -> list[tuple[int, ...]]:
    """Greedy nearest-supplier tour of the pairs, cut into k contiguous chunks."""
    left = list(pairs)
    here = vertices[DEPOT].position
    order = []
    while left:
        nxt = min(left, key=lambda p: (euclidean_distance(here, vertices[p.supplier_id].position), p.supplier_id))
        left.remove(nxt)
        order.append(nxt)
        here = vertices[nxt.customer_id].position
    size = math.ceil(len(order) / k)
    routes = []
    for i in range(k):
        chunk = order[i * size:(i + 1) * size]
        routes.append((DEPOT, *[v for p in chunk for v in (p.supplier_id, p.customer_id)], DEPOT))
    return routes


def generate_instance(params: GenParams) -> Instance:
    rng = random.Random(params.seed)
    n = 2 * params.pair_count
    half = params.area / 2
    verts = [Vertex(DEPOT, _r(half), _r(half), 0.0, _r(params.horizon), 0.0, 0.0)]
    ids = list(range(1, n + 1))
    rng.shuffle(ids)
    pairs = [RequestPair(ids[2 * i], ids[2 * i + 1]) for i in range(params.pair_count)]
    qty = {}
    for p in pairs:
        q = float(rng.randint(params.q_min, params.q_max))
        qty[p.supplier_id], qty[p.customer_id] = q, -q
    for vid in range(1, n + 1):
        x = _r(rng.uniform(0, params.area))
        y = _r(rng.uniform(0, params.area))
        width = rng.uniform(params.window_width_min, params.window_width_max)
        open_ = _r(rng.uniform(0, params.horizon - width))
        close = _r(open_ + width)
        service = _r(rng.uniform(params.service_min, params.service_max))
        verts.append(Vertex(vid, x, y, open_, close, service, qty[vid]))
    fleet = [
        Vehicle(k + 1, float(params.capacity), _r(rng.uniform(params.cost_rate_min, params.cost_rate_max)),
                float(params.speed))
        for k in range(params.vehicle_count)
    ]
    name = params.name or f"gen-p{params.pair_count}-k{params.vehicle_count}-s{params.seed}"

    # Widen windows along the seed routes until they are on time.
    routes = _seed_routes(verts, pairs, params.vehicle_count)
    draft = Instance(tuple(verts), tuple(pairs), tuple(fleet), name)
    plan = make_solution(routes, draft, SAME_VEHICLE)
    for sched in plan.schedules:
        for v, arrive, late in zip(sched.route[1:], sched.arrivals[1:], sched.lateness[1:]):
            if late > 0:
                vx = verts[v]
                close = _r(max(vx.window_close, arrive + 1e-6))
                verts[v] = Vertex(vx.id, vx.x, vx.y, vx.window_open, close, vx.service_time, vx.quantity)
    instance = Instance(tuple(verts), tuple(pairs), tuple(fleet), name)
    if not make_solution(routes, instance, SAME_VEHICLE).feasible:
        raise AssertionError("window widening failed to certify the seed routes")
    return instance


# ---------------------------------------------------------------------------
# I/O helpers


@contextmanager
def _open(target: PathOrFile, mode: str) -> Iterator[IO[str]]:
    if hasattr(target, "read") or hasattr(target, "write"):
        yield target  # type: ignore[misc]
    else:
        with open(target, mode, encoding="utf-8", newline="\n") as fh:
            yield fh


def _f(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.{DIGITS}f}"
    return "0.000000000" if s == "-0.000000000" else s


def format_instance(instance: Instance) -> str:
    out = [INSTANCE_HEADER, f"name {instance.name}",
           f"counts {len(instance.vertices)} {len(instance.pairs)} {len(instance.fleet)}"]
    for v in instance.fleet:
        out.append(f"vehicle {v.id} {_f(v.capacity)} {_f(v.cost_rate)} {_f(v.speed)}")
    for v in instance.vertices:
        out.append(f"vertex {v.id} {_f(v.x)} {_f(v.y)} {_f(v.window_open)} {_f(v.window_close)} "
                   f"{_f(v.service_time)} {_f(v.quantity)}")
    for p in instance.pairs:
        out.append(f"pair {p.supplier_id} {p.customer_id}")
    for i, j in sorted(instance.forbidden_arcs):
        out.append(f"forbid {i} {j}")
    return "\n".join(out) + "\n"


def write_instance(instance: Instance, destination: PathOrFile) -> None:
    with _open(destination, "w") as fh:
        fh.write(format_instance(instance))


_FIELDS = {
    "vehicle": ("id", "capacity", "cost_rate", "speed"),
    "vertex": ("id", "x", "y", "window_open", "window_close", "service_time", "quantity"),
    "pair": ("supplier_id", "customer_id"),
    "forbid": ("from", "to"),
    "counts": ("vertices", "pairs", "vehicles"),
}


def _parse_fields(lineno: int, kind: str, parts: list[str]) -> list:
    names = _FIELDS[kind]
    if len(parts) != len(names):
        raise FormatError(lineno, kind, f"expected {len(names)} fields, got {len(parts)}")
    out = []
    for name, raw in zip(names, parts):
        integral = name in ("id", "supplier_id", "customer_id", "from", "to") or kind == "counts"
        try:
            out.append(int(raw) if integral else float(raw))
        except ValueError:
            raise FormatError(lineno, name, f"cannot parse {raw!r}") from None
    return out


def parse_instance(text: str) -> Instance:
    lines = text.splitlines()
    if not lines or lines[0].strip() != INSTANCE_HEADER:
        raise FormatError(1, "header", f"expected {INSTANCE_HEADER!r}")
    name = "instance"
    counts = None
    vehicles, vertices, pairs, forbidden = [], [], [], set()
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        kind, *rest = line.split()
        if kind == "name":
            name = " ".join(rest)
        elif kind == "counts":
            counts = _parse_fields(lineno, kind, rest)
        elif kind == "vehicle":
            vehicles.append(Vehicle(*_parse_fields(lineno, kind, rest)))
        elif kind == "vertex":
            vertices.append(Vertex(*_parse_fields(lineno, kind, rest)))
        elif kind == "pair":
            pairs.append(RequestPair(*_parse_fields(lineno, kind, rest)))
        elif kind == "forbid":
            forbidden.add(tuple(_parse_fields(lineno, kind, rest)))
        else:
            raise FormatError(lineno, "record", f"unknown record type {kind!r}")
    if counts is not None and counts != [len(vertices), len(pairs), len(vehicles)]:
        raise FormatError(0, "counts", f"header says {counts}, file has "
                          f"{[len(vertices), len(pairs), len(vehicles)]}")
    vertices.sort(key=lambda v: v.id)
    return Instance(tuple(vertices), tuple(pairs), tuple(vehicles), name, frozenset(forbidden))


def read_instance(source: PathOrFile) -> Instance:
    with _open(source, "r") as fh:
        return parse_instance(fh.read())


# ---------------------------------------------------------------------------
# Solutions


def format_solution(solution: Solution, instance: Instance) -> str:
    out = [SOLUTION_HEADER, f"instance {instance.name}", f"pairing {solution.pairing}"]
    for k, route in enumerate(solution.routes, start=1):
        out.append(f"V{k}: " + " ".join(str(v) for v in route))
    for k, sched in enumerate(solution.schedules, start=1):
        out.append(f"schedule V{k} distance {_f(sched.distance)} tardiness {_f(sched.tardiness)}")
        for v, a, d, y in zip(sched.route, sched.arrivals, sched.departures, sched.loads):
            out.append(f"  at {v} arrival {_f(a)} departure {_f(d)} load {_f(y)}")
    out.append(f"total_distance {_f(solution.total_distance)}")
    out.append(f"total_cost {_f(solution.total_cost)}")
    out.append(f"total_tardiness {_f(solution.total_tardiness)}")
    out.append(f"vehicles_used {solution.vehicles_used}")
    out.append(f"feasible {'yes' if solution.feasible else 'no'}")
    counts = solution.report.counts
    out.append("violations " + " ".join(f"{c} {counts[c]}" for c in CONSTRAINTS))
    for v in solution.report.violations:
        out.append(f"violation {v.constraint} V{v.vehicle} {v.vertex} {v.detail}")
    return "\n".join(out) + "\n"


def write_solution(solution: Solution, instance: Instance, destination: PathOrFile) -> None:
    with _open(destination, "w") as fh:
        fh.write(format_solution(solution, instance))


def parse_solution_routes(text: str) -> tuple[list[tuple[int, ...]], str]:
    """Route lines and pairing mode from a solution file; the report is not trusted."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != SOLUTION_HEADER:
        raise FormatError(1, "header", f"expected {SOLUTION_HEADER!r}")
    routes = []
    pairing = SAME_VEHICLE
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if line.startswith("pairing "):
            pairing = line.split(None, 1)[1].strip()
        elif line.startswith("V") and ":" in line:
            label, body = line.split(":", 1)
            if not label[1:].isdigit() or int(label[1:]) != len(routes) + 1:
                raise FormatError(lineno, "route", f"unexpected route label {label!r}")
            try:
                routes.append(tuple(int(x) for x in body.split()))
            except ValueError:
                raise FormatError(lineno, "route", f"non-integer vertex in {body.strip()!r}") from None
    return routes, pairing


def read_solution(source: PathOrFile, instance: Instance, pairing: str | None = None) -> Solution:
    with _open(source, "r") as fh:
        routes, file_pairing = parse_solution_routes(fh.read())
    return make_solution(routes, instance, pairing or file_pairing)

