"""Domain types, distances, route scheduling and constraint validators for the m-PDPTW.

Vertex 0 is the single depot. Suppliers carry a positive quantity, customers
the negated quantity of their paired supplier. Routes are plain tuples of
vertex ids that start and end at the depot, e.g. ``(0, 5, 8, 0)``; an unused
vehicle has the route ``(0, 0)``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

DEPOT = 0

SAME_VEHICLE = "same_vehicle"
CROSS_VEHICLE = "cross_vehicle"
PAIRING_MODES = (SAME_VEHICLE, CROSS_VEHICLE)

STRUCTURAL = "structural"
CAPACITY = "capacity"
PRECEDENCE = "precedence"
TIME_WINDOW = "time_window"
CONSTRAINTS = (STRUCTURAL, CAPACITY, PRECEDENCE, TIME_WINDOW)


class RouteError(ValueError):
    """A route or route list is structurally malformed."""


class InstanceError(ValueError):
    """An instance breaks one of its invariants."""


@dataclass(frozen=True)
class Vertex:
    id: int
    x: float
    y: float
    window_open: float
    window_close: float
    service_time: float = 0.0
    quantity: float = 0.0

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def is_supplier(self) -> bool:
        return self.quantity > 0

    @property
    def is_customer(self) -> bool:
        return self.quantity < 0


@dataclass(frozen=True)
class RequestPair:
    supplier_id: int
    customer_id: int


@dataclass(frozen=True)
class Vehicle:
    id: int
    capacity: float
    cost_rate: float = 1.0
    speed: float = 1.0


@dataclass(frozen=True)
class Instance:
    vertices: tuple[Vertex, ...]
    pairs: tuple[RequestPair, ...]
    fleet: tuple[Vehicle, ...]
    name: str = "instance"
    forbidden_arcs: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "pairs", tuple(self.pairs))
        object.__setattr__(self, "fleet", tuple(self.fleet))
        object.__setattr__(self, "forbidden_arcs", frozenset(self.forbidden_arcs))
        self.validate()

    @property
    def n_prime(self) -> int:
        return len(self.vertices) - 1

    @property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(range(1, len(self.vertices)))

    def validate(self) -> None:
        """Raise InstanceError if any structural invariant is broken."""
        if not self.vertices:
            raise InstanceError("instance has no depot")
        for i, v in enumerate(self.vertices):
            if v.id != i:
                raise InstanceError(f"vertex at position {i} has id {v.id}")
            if v.window_open > v.window_close:
                raise InstanceError(f"vertex {i}: window_open > window_close")
            if v.service_time < 0:
                raise InstanceError(f"vertex {i}: negative service time")
        if self.vertices[DEPOT].quantity != 0:
            raise InstanceError("depot quantity must be 0")
        n = self.n_prime
        seen: Counter[int] = Counter()
        for p in self.pairs:
            for vid in (p.supplier_id, p.customer_id):
                if not 1 <= vid <= n:
                    raise InstanceError(f"pair {p} references unknown vertex {vid}")
                seen[vid] += 1
            s, c = self.vertices[p.supplier_id], self.vertices[p.customer_id]
            if s.quantity <= 0:
                raise InstanceError(f"supplier {s.id} must have positive quantity")
            if c.quantity >= 0:
                raise InstanceError(f"customer {c.id} must have negative quantity")
            if s.quantity + c.quantity != 0:
                raise InstanceError(f"pair {s.id}/{c.id}: quantities do not cancel")
        repeated = sorted(v for v, k in seen.items() if k > 1)
        if repeated:
            raise InstanceError(f"vertices in more than one pair: {repeated}")
        unpaired = sorted(set(range(1, n + 1)) - set(seen))
        if unpaired:
            raise InstanceError(f"unpaired vertices: {unpaired}")
        if n != 2 * len(self.pairs):
            raise InstanceError("n_prime must equal twice the number of pairs")
        if not self.fleet:
            raise InstanceError("fleet is empty")
        if n and len(self.fleet) > n // 2:
            raise InstanceError(f"fleet size {len(self.fleet)} exceeds N'/2 = {n // 2}")
        for k, veh in enumerate(self.fleet):
            if veh.capacity <= 0 or veh.cost_rate < 0 or veh.speed <= 0:
                raise InstanceError(f"vehicle {veh.id}: bad capacity/cost_rate/speed")
            if veh.id != k + 1:
                raise InstanceError(f"vehicle at position {k} has id {veh.id}")

    @cached_property
    def distances(self) -> list[list[float]]:
        return distance_matrix(self)

    @cached_property
    def supplier_of(self) -> dict[int, int]:
        return {p.customer_id: p.supplier_id for p in self.pairs}

    @cached_property
    def customer_of(self) -> dict[int, int]:
        return {p.supplier_id: p.customer_id for p in self.pairs}

    @cached_property
    def quantities(self) -> list[float]:
        return [v.quantity for v in self.vertices]


@dataclass(frozen=True)
class Violation:
    constraint: str
    vehicle: int  # 1-based, 0 when not tied to one vehicle
    vertex: int
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def feasible(self) -> bool:
        return not self.violations

    @property
    def counts(self) -> dict[str, int]:
        tally = Counter(v.constraint for v in self.violations)
        return {name: tally.get(name, 0) for name in CONSTRAINTS}

    def __add__(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self.violations + other.violations)


@dataclass(frozen=True)
class RouteSchedule:
    """Forward schedule of one route.

    All per-vertex tuples are aligned with ``route``, both depot ends
    included. Entry 0 is the depot start (arrival = departure = 0, load 0).
    """

    route: tuple[int, ...]
    arrivals: tuple[float, ...]
    departures: tuple[float, ...]
    loads: tuple[float, ...]
    lateness: tuple[float, ...]
    distance: float
    vehicle_id: int

    @property
    def tardiness(self) -> float:
        return sum(self.lateness)

    @property
    def max_load(self) -> float:
        return max(self.loads)

    @property
    def is_empty(self) -> bool:
        return len(self.route) <= 2


@dataclass(frozen=True)
class Solution:
    routes: tuple[tuple[int, ...], ...]
    schedules: tuple[RouteSchedule, ...]
    total_distance: float
    total_cost: float
    report: ValidationReport
    pairing: str = SAME_VEHICLE

    @property
    def feasible(self) -> bool:
        return self.report.feasible

    @property
    def total_tardiness(self) -> float:
        return sum(s.tardiness for s in self.schedules)

    @property
    def vehicles_used(self) -> int:
        return sum(1 for r in self.routes if len(r) > 2)


def euclidean_distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def distance_matrix(instance: Instance) -> list[list[float]]:
    """Full (N+1)x(N+1) Euclidean matrix; forbidden arcs are set to infinity."""
    pts = [v.position for v in instance.vertices]
    n = len(pts)
    d = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d[i][j] = d[j][i] = euclidean_distance(pts[i], pts[j])
    for i, j in instance.forbidden_arcs:
        d[i][j] = math.inf
    return d


def check_route_structure(route: Sequence[int], instance: Instance) -> None:
    if len(route) < 2 or route[0] != DEPOT or route[-1] != DEPOT:
        raise RouteError(f"route {list(route)} must start and end at the depot")
    inner = route[1:-1]
    if DEPOT in inner:
        raise RouteError(f"route {list(route)} revisits the depot")
    if len(set(inner)) != len(inner):
        raise RouteError(f"route {list(route)} repeats a vertex")
    n = instance.n_prime
    bad = [v for v in inner if not 1 <= v <= n]
    if bad:
        raise RouteError(f"route {list(route)} has unknown vertices {bad}")


def schedule_route(route: Sequence[int], vehicle: Vehicle, instance: Instance) -> RouteSchedule:
    check_route_structure(route, instance)
    return _schedule(tuple(route), vehicle, instance)


def _schedule(route: tuple[int, ...], vehicle: Vehicle, instance: Instance) -> RouteSchedule:
    # No structural checks: validate_solution schedules malformed routes too.
    d = instance.distances
    verts = instance.vertices
    speed = vehicle.speed
    arrivals = [0.0]
    departures = [0.0]
    loads = [0.0]
    lateness = [0.0]
    dist = 0.0
    prev = route[0]
    t = 0.0
    load = 0.0
    for v in route[1:]:
        leg = d[prev][v]
        dist += leg
        arrive = t + leg / speed
        vx = verts[v]
        t = max(arrive, vx.window_open) + vx.service_time
        load += vx.quantity
        arrivals.append(arrive)
        departures.append(t)
        loads.append(load)
        lateness.append(max(0.0, arrive - vx.window_close))
        prev = v
    if len(route) >= 2 and route[-1] == DEPOT:
        # The vehicle ends its tour on return; no service at the depot.
        departures[-1] = arrivals[-1]
    return RouteSchedule(
        route=route,
        arrivals=tuple(arrivals),
        departures=tuple(departures),
        loads=tuple(loads),
        lateness=tuple(lateness),
        distance=dist,
        vehicle_id=vehicle.id,
    )


def check_capacity(schedule: RouteSchedule, vehicle: Vehicle) -> ValidationReport:
    out = []
    for v, y in zip(schedule.route, schedule.loads):
        if y < 0:
            out.append(Violation(CAPACITY, vehicle.id, v, f"negative load {y:g}"))
        elif y > vehicle.capacity:
            out.append(Violation(CAPACITY, vehicle.id, v, f"load {y:g} > capacity {vehicle.capacity:g}"))
    return ValidationReport(tuple(out))


def check_time_windows(schedule: RouteSchedule, instance: Instance | None = None) -> ValidationReport:
    out = []
    for pos, (v, late) in enumerate(zip(schedule.route, schedule.lateness)):
        if pos == 0:
            continue
        if late > 0:
            out.append(
                Violation(TIME_WINDOW, schedule.vehicle_id, v,
                          f"arrival {schedule.arrivals[pos]:g} after window close (late by {late:g})")
            )
    return ValidationReport(tuple(out))


def check_precedence(solution: Solution, instance: Instance, pairing: str | None = None) -> ValidationReport:
    pairing = pairing or solution.pairing
    _check_pairing(pairing)
    where: dict[int, tuple[int, int]] = {}
    for k, sched in enumerate(solution.schedules):
        for pos, v in enumerate(sched.route):
            if v != DEPOT:
                where.setdefault(v, (k, pos))
    out = []
    for p in instance.pairs:
        s, c = p.supplier_id, p.customer_id
        if s not in where or c not in where:
            continue  # reported as structural
        ks, ps = where[s]
        kc, pc = where[c]
        d_s = solution.schedules[ks].departures[ps]
        d_c = solution.schedules[kc].departures[pc]
        if pairing == SAME_VEHICLE and ks != kc:
            out.append(Violation(PRECEDENCE, kc + 1, c,
                                 f"supplier {s} on vehicle {ks + 1}, customer {c} on vehicle {kc + 1}"))
        elif pairing == SAME_VEHICLE and ps > pc:
            out.append(Violation(PRECEDENCE, kc + 1, c, f"customer {c} visited before supplier {s}"))
        elif d_s > d_c:
            out.append(Violation(PRECEDENCE, kc + 1, c,
                                 f"supplier {s} departs at {d_s:g} after customer {c} at {d_c:g}"))
    return ValidationReport(tuple(out))


def _check_pairing(pairing: str) -> None:
    if pairing not in PAIRING_MODES:
        raise ValueError(f"unknown pairing mode {pairing!r}; expected one of {PAIRING_MODES}")


def check_structure(routes: Sequence[Sequence[int]], instance: Instance) -> ValidationReport:
    out = []
    if len(routes) != len(instance.fleet):
        out.append(Violation(STRUCTURAL, 0, DEPOT,
                             f"{len(routes)} routes for a fleet of {len(instance.fleet)}"))
    visits: Counter[int] = Counter()
    for k, route in enumerate(routes, start=1):
        if len(route) < 2 or route[0] != DEPOT or route[-1] != DEPOT:
            out.append(Violation(STRUCTURAL, k, DEPOT, "route does not start and end at the depot"))
        inner = list(route[1:-1]) if len(route) >= 2 else list(route)
        for v in inner:
            if v == DEPOT:
                out.append(Violation(STRUCTURAL, k, DEPOT, "depot visited mid-route"))
            elif not 1 <= v <= instance.n_prime:
                out.append(Violation(STRUCTURAL, k, v, "unknown vertex"))
            else:
                visits[v] += 1
    for v in instance.node_ids:
        if visits[v] == 0:
            out.append(Violation(STRUCTURAL, 0, v, "vertex never visited"))
        elif visits[v] > 1:
            out.append(Violation(STRUCTURAL, 0, v, f"vertex visited {visits[v]} times"))
    return ValidationReport(tuple(out))


def solution_cost(solution: Solution, instance: Instance) -> float:
    return sum(
        veh.cost_rate * s.distance
        for veh, s in zip(instance.fleet, solution.schedules)
        if not s.is_empty
    )


def _schedulable(route: Sequence[int], instance: Instance) -> tuple[int, ...]:
    # Drop ids that cannot be looked up so a broken route still gets a schedule.
    n = instance.n_prime
    inner = [v for v in route if 1 <= v <= n]
    return (DEPOT, *inner, DEPOT)


def validate_solution(solution: Solution, instance: Instance, pairing: str | None = None) -> ValidationReport:
    pairing = pairing or solution.pairing
    _check_pairing(pairing)
    report = check_structure(solution.routes, instance)
    for veh, sched in zip(instance.fleet, solution.schedules):
        report = report + check_capacity(sched, veh) + check_time_windows(sched)
    return report + check_precedence(solution, instance, pairing)


def make_solution(
    routes: Sequence[Sequence[int]], instance: Instance, pairing: str = SAME_VEHICLE
) -> Solution:
    """Schedule ``routes`` (one per vehicle, in fleet order) and validate the result."""
    _check_pairing(pairing)
    routes = tuple(tuple(r) for r in routes)
    schedules = tuple(
        _schedule(_schedulable(r, instance), veh, instance)
        for veh, r in zip(instance.fleet, routes)
    )
    partial = Solution(
        routes=routes,
        schedules=schedules,
        total_distance=sum(s.distance for s in schedules),
        total_cost=0.0,
        report=ValidationReport(),
        pairing=pairing,
    )
    return Solution(
        routes=routes,
        schedules=schedules,
        total_distance=partial.total_distance,
        total_cost=solution_cost(partial, instance),
        report=validate_solution(partial, instance, pairing),
        pairing=pairing,
    )
