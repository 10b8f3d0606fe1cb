"""Seed-driven invariant checks shared by the hypothesis suite and the acceptance sweep.

Each ``check_*`` builds one random case from an integer seed and asserts the invariant.
"""

import random
from dataclasses import replace

from reference import random_instance
from mpdptw.ga import (
    correct_capacity,
    correct_precedence,
    one_point_crossover,
    random_split,
    split_chromosome,
    split_crossover,
    split_mutation,
    swap_mutation,
)
from mpdptw.instancegen import format_instance, format_solution, parse_instance, parse_solution_routes
from mpdptw.model import Instance, make_solution


def _case(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    c = list(inst.node_ids)
    rng.shuffle(c)
    return rng, inst, tuple(c)


def precedence_ok(c, inst):
    pos = {g: i for i, g in enumerate(c)}
    return all(pos[p.supplier_id] < pos[p.customer_id] for p in inst.pairs)


def check_permutation_validity(seed):
    rng, inst, a = _case(seed)
    b = list(a)
    rng.shuffle(b)
    ids = sorted(inst.node_ids)
    split = random_split(len(a), len(inst.fleet), rng)
    i, j = rng.randrange(len(a)), rng.randrange(len(a))
    outputs = [
        one_point_crossover(a, b, rng=rng),
        swap_mutation(a, i, j),
        correct_precedence(a, inst),
        correct_capacity(a, split, inst),
        correct_capacity(correct_precedence(a, inst), split, inst),
    ]
    for out in outputs:
        assert sorted(out) == ids, (seed, out)
    assert precedence_ok(outputs[-1], inst)  # capacity repair keeps repaired precedence
    for s in (split_crossover(split, random_split(len(a), len(split), rng), rng), split_mutation(split, rng)):
        assert len(s) == len(split) and sum(s) == len(a) and min(s) >= 0


def check_precedence_idempotence(seed):
    _, inst, c = _case(seed)
    once = correct_precedence(c, inst)
    assert precedence_ok(once, inst)
    assert correct_precedence(once, inst) == once


def check_split_concat_identity(seed):
    rng, inst, c = _case(seed)
    split = random_split(len(c), len(inst.fleet), rng)
    routes = split_chromosome(c, split)
    assert len(routes) == len(split)
    assert all(r[0] == 0 and r[-1] == 0 and len(r) == n + 2 for r, n in zip(routes, split))
    assert tuple(g for r in routes for g in r[1:-1]) == c


def _solution(seed):
    rng, inst, c = _case(seed)
    split = random_split(len(c), len(inst.fleet), rng)
    return rng, inst, make_solution(split_chromosome(c, split), inst)


def check_schedule_recurrence(seed):
    _, inst, sol = _solution(seed)
    d = inst.distances
    for veh, s in zip(inst.fleet, sol.schedules):
        assert s.arrivals[0] == s.departures[0] == 0.0
        for pos in range(1, len(s.route)):
            v, u = s.route[pos], s.route[pos - 1]
            vx = inst.vertices[v]
            assert s.arrivals[pos] == s.departures[pos - 1] + d[u][v] / veh.speed
            if pos < len(s.route) - 1:
                assert s.departures[pos] == max(s.arrivals[pos], vx.window_open) + vx.service_time
            assert s.lateness[pos] == max(0.0, s.arrivals[pos] - vx.window_close)


def check_load_telescoping(seed):
    _, inst, sol = _solution(seed)
    for s in sol.schedules:
        assert s.loads[0] == 0.0
        for pos in range(1, len(s.route)):
            assert s.loads[pos] == s.loads[pos - 1] + inst.vertices[s.route[pos]].quantity
        # same-vehicle completeness is not guaranteed here, so telescope to the sum of quantities
        assert s.loads[-1] == sum(inst.vertices[v].quantity for v in s.route)


def check_unit_rate_cost(seed):
    _, inst, sol = _solution(seed)
    unit = Instance(inst.vertices, inst.pairs, tuple(replace(v, cost_rate=1.0) for v in inst.fleet), inst.name)
    unit_sol = make_solution(sol.routes, unit)
    assert abs(unit_sol.total_cost - unit_sol.total_distance) <= 1e-9 * max(1.0, unit_sol.total_distance)


def check_serialization_round_trip(seed):
    _, inst, sol = _solution(seed)
    back = parse_instance(format_instance(inst))
    assert back == inst
    routes, pairing = parse_solution_routes(format_solution(sol, inst))
    assert make_solution(routes, back, pairing) == sol


CHECKS = {
    "permutation validity": check_permutation_validity,
    "precedence repair idempotence": check_precedence_idempotence,
    "split/concatenate identity": check_split_concat_identity,
    "schedule recurrence": check_schedule_recurrence,
    "load telescoping": check_load_telescoping,
    "unit-rate cost equals distance": check_unit_rate_cost,
    "serialization round-trip": check_serialization_round_trip,
}
