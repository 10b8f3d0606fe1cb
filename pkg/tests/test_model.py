import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import example_instance, two_vertex_instance
from reference import random_instance, simulate
from mpdptw.model import (
    CROSS_VEHICLE,
    SAME_VEHICLE,
    Instance,
    InstanceError,
    RequestPair,
    RouteError,
    Vehicle,
    Vertex,
    check_capacity,
    check_precedence,
    check_time_windows,
    distance_matrix,
    euclidean_distance,
    make_solution,
    schedule_route,
    solution_cost,
    validate_solution,
)


def test_euclidean_distance_examples():
    assert euclidean_distance((0, 0), (3, 4)) == 5
    assert euclidean_distance((1, 1), (1, 1)) == 0
    assert euclidean_distance((0, 0), (1, 1)) == pytest.approx(1.41421356, abs=1e-8)
    assert abs(euclidean_distance((0, 0), (1, 1)) - math.sqrt(2)) < 1e-9


def test_distance_matrix_three_points():
    verts = (
        Vertex(0, 0.0, 0.0, 0, 10),
        Vertex(1, 3.0, 4.0, 0, 10, 0, 1.0),
        Vertex(2, 3.0, 0.0, 0, 10, 0, -1.0),
    )
    inst = Instance(verts, (RequestPair(1, 2),), (Vehicle(1, 5.0),))
    d = distance_matrix(inst)
    assert [d[i][i] for i in range(3)] == [0, 0, 0]
    assert sorted([d[0][1], d[0][2], d[1][2]]) == [3, 4, 5]
    assert d[0][1] == d[1][0] == 5


def test_forbidden_arc_is_infinite():
    base = two_vertex_instance()
    inst = Instance(base.vertices, base.pairs, base.fleet, forbidden_arcs={(1, 2)})
    d = distance_matrix(inst)
    assert d[1][2] == math.inf and d[2][1] == 4


@given(st.integers(0, 10**6))
def test_distance_matrix_metric(seed):
    inst = random_instance(random.Random(seed))
    d = distance_matrix(inst)
    n = len(d)
    for i in range(n):
        assert d[i][i] == 0
        for j in range(n):
            assert d[i][j] == d[j][i]
            for k in range(n):
                assert d[i][j] <= d[i][k] + d[k][j] + 1e-9


def test_schedule_empty_route(hand_instance):
    s = schedule_route([0, 0], hand_instance.fleet[0], hand_instance)
    assert s.distance == 0 and s.tardiness == 0 and s.is_empty


def test_schedule_worked_example(hand_instance):
    s = schedule_route([0, 1, 2, 0], hand_instance.fleet[0], hand_instance)
    # hand evaluation: A_s=5, waits to 10, D_s=12; A_c=16, D_c=17; back at 20
    assert s.arrivals == (0.0, 5.0, 16.0, 20.0)
    assert s.departures == (0.0, 12.0, 17.0, 20.0)
    assert s.loads == (0.0, 5.0, 0.0, 0.0)
    assert s.distance == 12.0
    assert s.tardiness == 0.0


def test_schedule_tardy_supplier():
    # window opening moved to 0 so the instance stays valid; arrival is still 5
    inst = two_vertex_instance(s_close=4.0, s_open=0.0)
    s = schedule_route([0, 1, 2, 0], inst.fleet[0], inst)
    assert s.lateness[1] == 1.0
    assert s.tardiness == 1.0
    report = check_time_windows(s)
    assert report.counts["time_window"] == 1
    assert report.violations[0].vertex == 1


def test_arrival_exactly_at_close_is_on_time():
    inst = two_vertex_instance(s_close=5.0, s_open=0.0)
    s = schedule_route([0, 1, 2, 0], inst.fleet[0], inst)
    assert s.arrivals[1] == 5.0
    assert check_time_windows(s).feasible


@pytest.mark.parametrize("route", [[1, 2, 0], [0, 1, 2], [0, 1, 1, 0], [0, 1, 0, 2, 0], [0, 7, 0]])
def test_schedule_rejects_malformed_route(hand_instance, route):
    with pytest.raises(RouteError):
        schedule_route(route, hand_instance.fleet[0], hand_instance)


def test_capacity_reports():
    inst = example_instance(capacity=60.0, vehicles=1)
    veh = inst.fleet[0]
    ok = schedule_route([0, 5, 1, 0], veh, inst)
    assert check_capacity(ok, veh).feasible
    # 5, 8, 7 load 15, 30, 55; adding 3 brings 65 > 60
    over = schedule_route([0, 5, 8, 7, 3, 1, 2, 9, 10, 6, 4, 0], veh, inst)
    report = check_capacity(over, veh)
    assert [v.vertex for v in report.violations] == [3]
    # customer first: load goes to -15
    rev = schedule_route([0, 1, 5, 0], veh, inst)
    report = check_capacity(rev, veh)
    assert [v.vertex for v in report.violations] == [1]
    assert "negative" in report.violations[0].detail


def test_precedence_single_route(hand_instance):
    good = make_solution([[0, 1, 2, 0]], hand_instance)
    bad = make_solution([[0, 2, 1, 0]], hand_instance)
    assert check_precedence(good, hand_instance).feasible
    assert check_precedence(bad, hand_instance).counts["precedence"] == 1


def test_precedence_split_pair_depends_on_mode(ex_instance):
    # supplier 5 on vehicle 1 departs long before customer 1 on vehicle 2
    routes = [[0, 5, 8, 2, 6, 4, 3, 10, 7, 9, 0], [0, 1, 0]]
    same = make_solution(routes, ex_instance, SAME_VEHICLE)
    cross = make_solution(routes, ex_instance, CROSS_VEHICLE)
    d5 = same.schedules[0].departures[1]
    d1 = same.schedules[1].departures[1]
    assert d5 <= d1
    assert check_precedence(same, ex_instance).counts["precedence"] == 1
    assert check_precedence(cross, ex_instance).counts["precedence"] == 0


def test_split_pairs_infeasible_same_vehicle(ex_instance):
    sol = make_solution([[0, 5, 8, 2, 6, 4, 3, 0], [0, 10, 7, 9, 1, 0]], ex_instance)
    report = validate_solution(sol, ex_instance)
    assert not report.feasible
    split_pairs = {v.vertex for v in report.violations if v.constraint == "precedence"}
    assert 1 in split_pairs  # pair (1,5) is split across vehicles
    assert 10 in split_pairs  # so is (10,3)


def test_empty_instance_feasible_zero_cost():
    inst = Instance((Vertex(0, 0.0, 0.0, 0.0, 10.0),), (), (Vehicle(1, 10.0),))
    sol = make_solution([[0, 0]], inst)
    assert sol.feasible and sol.total_cost == 0


def test_duplicate_vertex_structural(ex_instance):
    sol = make_solution([[0, 5, 1, 5, 8, 2, 0], [0, 7, 9, 3, 10, 6, 4, 0]], ex_instance)
    counts = sol.report.counts
    assert counts["structural"] >= 1
    assert not sol.feasible


def test_missing_vertex_structural(ex_instance):
    sol = make_solution([[0, 5, 1, 8, 2, 0], [0, 7, 9, 3, 10, 0]], ex_instance)
    missing = {v.vertex for v in sol.report.violations if v.constraint == "structural"}
    assert missing == {6, 4}


def test_cost_examples():
    inst = example_instance(vehicles=2)
    routes = [[0, 5, 1, 8, 2, 7, 9, 0], [0, 3, 10, 6, 4, 0]]
    sol = make_solution(routes, inst)
    assert solution_cost(sol, inst) == pytest.approx(sol.total_distance, abs=1e-9)

    empty = Instance(inst.vertices, inst.pairs, inst.fleet)
    assert solution_cost(make_solution([[0, 0], [0, 0]], empty), empty) == 0

    # rates 2 and 3 over route distances 10 and 20
    verts = (
        Vertex(0, 0.0, 0.0, 0, 1000),
        Vertex(1, 5.0, 0.0, 0, 1000, 0, 1.0), Vertex(2, 5.0, 0.0, 0, 1000, 0, -1.0),
        Vertex(3, 0.0, 10.0, 0, 1000, 0, 1.0), Vertex(4, 0.0, 10.0, 0, 1000, 0, -1.0),
    )
    inst2 = Instance(verts, (RequestPair(1, 2), RequestPair(3, 4)),
                     (Vehicle(1, 5.0, 2.0), Vehicle(2, 5.0, 3.0)))
    sol2 = make_solution([[0, 1, 2, 0], [0, 3, 4, 0]], inst2)
    assert [s.distance for s in sol2.schedules] == [10.0, 20.0]
    assert sol2.total_cost == 80.0


def test_validate_is_pure(ex_instance):
    sol = make_solution([[0, 5, 8, 2, 6, 4, 3, 0], [0, 10, 7, 9, 1, 0]], ex_instance)
    assert validate_solution(sol, ex_instance) == validate_solution(sol, ex_instance)


@given(st.integers(0, 10**6))
def test_schedule_matches_reference(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    nodes = list(inst.node_ids)
    rng.shuffle(nodes)
    route = [0, *nodes, 0]
    veh = inst.fleet[0]
    s = schedule_route(route, veh, inst)
    dist, tard, loads, arrivals, departures = simulate(route, veh, inst)
    assert s.distance == pytest.approx(dist, rel=1e-12, abs=1e-9)
    assert s.tardiness == pytest.approx(tard, rel=1e-9, abs=1e-9)
    assert list(s.loads) == loads
    assert list(s.arrivals) == pytest.approx(arrivals, rel=1e-12, abs=1e-9)
    assert list(s.departures) == pytest.approx(departures, rel=1e-12, abs=1e-9)
    for pos, v in enumerate(route[1:-1], start=1):
        vx = inst.vertices[v]
        assert s.departures[pos] == max(s.arrivals[pos], vx.window_open) + vx.service_time
    assert s.loads[-1] == 0.0


@given(st.integers(0, 10**6))
def test_time_window_check_never_flags_on_time(seed):
    rng = random.Random(seed)
    inst = random_instance(rng)
    nodes = list(inst.node_ids)
    rng.shuffle(nodes)
    s = schedule_route([0, *nodes, 0], inst.fleet[0], inst)
    flagged = [v.vertex for v in check_time_windows(s).violations]
    late = [v for pos, v in enumerate(s.route) if pos > 0 and s.arrivals[pos] > inst.vertices[v].window_close]
    assert flagged == late


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda v: v.__setitem__(1, Vertex(1, 0, 0, 5, 4, 0, 5.0)), "window_open"),
        (lambda v: v.__setitem__(1, Vertex(1, 0, 0, 0, 4, -1, 5.0)), "negative service"),
        (lambda v: v.__setitem__(0, Vertex(0, 0, 0, 0, 4, 0, 1.0)), "depot quantity"),
        (lambda v: v.__setitem__(2, Vertex(2, 0, 0, 0, 40, 0, -4.0)), "cancel"),
    ],
)
def test_instance_invariants(mutate, message):
    base = two_vertex_instance()
    verts = list(base.vertices)
    mutate(verts)
    with pytest.raises(InstanceError, match=message):
        Instance(tuple(verts), base.pairs, base.fleet)


def test_fleet_larger_than_half_n_rejected(hand_instance):
    with pytest.raises(InstanceError, match="exceeds"):
        Instance(hand_instance.vertices, hand_instance.pairs,
                 (Vehicle(1, 10.0), Vehicle(2, 10.0)))


def test_vertex_in_two_pairs_rejected(ex_instance):
    pairs = list(ex_instance.pairs)
    pairs[1] = type(pairs[1])(pairs[0].supplier_id, pairs[1].customer_id)
    with pytest.raises(InstanceError):
        Instance(ex_instance.vertices, tuple(pairs), ex_instance.fleet)
