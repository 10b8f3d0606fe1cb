"""Exhaustive exact solver for small instances (ground truth for the GA)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .model import (
    CROSS_VEHICLE,
    DEPOT,
    SAME_VEHICLE,
    Instance,
    Solution,
    _check_pairing,
    _schedule,
    make_solution,
)

DEFAULT_LIMIT = 8


class OracleLimitError(ValueError):
    """Instance too large for exhaustive enumeration."""


@dataclass
class OracleResult:
    optimal_cost: float | None
    optimal_solution: Solution | None
    explored: int
    feasible_count: int

    @property
    def feasible(self) -> bool:
        return self.optimal_solution is not None


def _precedence_ok(order: Sequence[int], instance: Instance) -> bool:
    pos = {v: i for i, v in enumerate(order)}
    supplier_of = instance.supplier_of
    return all(pos[supplier_of[c]] < pos[c] for c in order if c in supplier_of)


def _route_ok(route: tuple[int, ...], k: int, instance: Instance):
    """Schedule one route; return its distance if capacity- and window-feasible, else None."""
    veh = instance.fleet[k]
    sched = _schedule(route, veh, instance)
    if any(y < 0 or y > veh.capacity for y in sched.loads):
        return None
    if any(late > 0 for late in sched.lateness):
        return None
    return sched


def exact_solve(instance: Instance, limit: int = DEFAULT_LIMIT, pairing: str = SAME_VEHICLE) -> OracleResult:
    _check_pairing(pairing)
    if instance.n_prime > limit:
        raise OracleLimitError(f"N' = {instance.n_prime} exceeds the oracle limit {limit}")
    if pairing == CROSS_VEHICLE:
        return _solve_cross(instance)
    return _solve_same(instance)


def _solve_same(instance: Instance) -> OracleResult:
    k_count = len(instance.fleet)
    pairs = instance.pairs
    # per (vehicle, pair subset): list of (cost, route) for feasible orderings, and ordering count
    memo: dict[tuple[int, tuple[int, ...]], tuple[list, int]] = {}

    def route_options(k: int, subset: tuple[int, ...]):
        key = (k, subset)
        if key not in memo:
            verts = [v for i in subset for v in (pairs[i].supplier_id, pairs[i].customer_id)]
            feasible = []
            n_orders = 0
            for order in itertools.permutations(sorted(verts)):
                if not _precedence_ok(order, instance):
                    continue
                n_orders += 1
                route = (DEPOT, *order, DEPOT)
                sched = _route_ok(route, k, instance)
                if sched is not None:
                    cost = instance.fleet[k].cost_rate * sched.distance if order else 0.0
                    feasible.append((cost, route))
            memo[key] = (feasible, n_orders)
        return memo[key]

    explored = 0
    feasible_count = 0
    best = None
    for assign in itertools.product(range(k_count), repeat=len(pairs)):
        options = []
        n_orders = 1
        n_feasible = 1
        for k in range(k_count):
            subset = tuple(i for i, a in enumerate(assign) if a == k)
            feas, total = route_options(k, subset)
            options.append(feas)
            n_orders *= total
            n_feasible *= len(feas)
        explored += n_orders
        feasible_count += n_feasible
        if n_feasible == 0:
            continue
        # routes are independent: the best combination takes each route's best
        picks = [min(feas) for feas in options]
        cost = 0.0
        for c, _ in picks:
            cost += c
        key = (cost, tuple(r for _, r in picks))
        if best is None or key < best:
            best = key
    return _result(instance, best, explored, feasible_count, SAME_VEHICLE)


def _placements(vertices: Sequence[int], k_count: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Every way to lay ``vertices`` out as ``k_count`` ordered (possibly empty) routes."""
    n = len(vertices)
    for perm in itertools.permutations(vertices):
        for cuts in itertools.combinations_with_replacement(range(n + 1), k_count - 1):
            bounds = (0, *cuts, n)
            yield tuple(perm[bounds[i]:bounds[i + 1]] for i in range(k_count))


def _solve_cross(instance: Instance) -> OracleResult:
    k_count = len(instance.fleet)
    explored = 0
    feasible_count = 0
    best = None
    cache: dict = {}
    for layout in _placements(instance.node_ids, k_count):
        explored += 1
        scheds = []
        ok = True
        for k, inner in enumerate(layout):
            key = (k, inner)
            if key not in cache:
                cache[key] = _route_ok((DEPOT, *inner, DEPOT), k, instance)
            sched = cache[key]
            if sched is None:
                ok = False
                break
            scheds.append(sched)
        if not ok:
            continue
        dep = {}
        for sched in scheds:
            dep.update(zip(sched.route[1:-1], sched.departures[1:-1]))
        if any(dep[p.supplier_id] > dep[p.customer_id] for p in instance.pairs):
            continue
        feasible_count += 1
        cost = 0.0
        for veh, sched in zip(instance.fleet, scheds):
            if not sched.is_empty:
                cost += veh.cost_rate * sched.distance
        key = (cost, tuple(s.route for s in scheds))
        if best is None or key < best:
            best = key
    return _result(instance, best, explored, feasible_count, CROSS_VEHICLE)


def _result(instance, best, explored, feasible_count, pairing) -> OracleResult:
    if best is None:
        return OracleResult(None, None, explored, feasible_count)
    solution = make_solution(best[1], instance, pairing)
    return OracleResult(solution.total_cost, solution, explored, feasible_count)
