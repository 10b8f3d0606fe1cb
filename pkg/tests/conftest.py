import hypothesis
import pytest

from mpdptw.model import Instance, RequestPair, Vehicle, Vertex

hypothesis.settings.register_profile("default", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.load_profile("default")

# (customer, supplier) couples used by the worked examples: (1,5),(2,8),(9,7),(10,3),(4,6)
EXAMPLE_COUPLES = [(1, 5), (2, 8), (9, 7), (10, 3), (4, 6)]
# Supplier quantities chosen so vertex 3 overloads a 60-unit vehicle after 5, 8, 7
# and customer 9 offers the largest discharge.
EXAMPLE_SUPPLY = {5: 15.0, 8: 15.0, 7: 25.0, 3: 10.0, 6: 5.0}


def example_instance(capacity=60.0, vehicles=2):
    qty = {0: 0.0}
    for customer, supplier in EXAMPLE_COUPLES:
        qty[supplier] = EXAMPLE_SUPPLY[supplier]
        qty[customer] = -EXAMPLE_SUPPLY[supplier]
    vertices = [Vertex(0, 50.0, 50.0, 0.0, 1.0e6, 0.0, 0.0)]
    for vid in range(1, 11):
        vertices.append(Vertex(vid, 10.0 * vid, 100.0 - 7.0 * vid, 0.0, 1.0e6, 1.0, qty[vid]))
    pairs = [RequestPair(s, c) for c, s in EXAMPLE_COUPLES]
    fleet = [Vehicle(k + 1, capacity, 1.0, 1.0) for k in range(vehicles)]
    return Instance(tuple(vertices), tuple(pairs), tuple(fleet), "example")


@pytest.fixture
def ex_instance():
    return example_instance()


def two_vertex_instance(s_close=20.0, cost_rate=1.0, s_open=10.0):
    """Depot (0,0); supplier 1 at (3,4) window [s_open, s_close]; customer 2 at (3,0)."""
    vertices = (
        Vertex(0, 0.0, 0.0, 0.0, 100.0, 0.0, 0.0),
        Vertex(1, 3.0, 4.0, s_open, s_close, 2.0, 5.0),
        Vertex(2, 3.0, 0.0, 0.0, 40.0, 1.0, -5.0),
    )
    return Instance(vertices, (RequestPair(1, 2),), (Vehicle(1, 60.0, cost_rate, 1.0),), "hand")


@pytest.fixture
def hand_instance():
    return two_vertex_instance()


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
