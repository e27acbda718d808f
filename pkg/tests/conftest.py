import math

import pytest

from trussmcts.bench import load_benchmark
from trussmcts.problem import Catalog, LoadCase, Member, Node3D, TrussProblem, member_length


def make_problem(nodes, members, loads, catalog, groups=None, E=200e9, density=7850.0,
                 stress=150e6, disp=1e-3, name="test"):
    """Build a problem from compact tuples.

    nodes: [(x, y, z, fixed_x, fixed_y, fixed_z)], members: [(a, b)],
    loads: [{node: (Fx, Fy, Fz) N}], catalog: mm².
    """
    node_objs = tuple(Node3D(k + 1, tuple(map(float, n[:3])), tuple(bool(s) for s in n[3:]))
                      for k, n in enumerate(nodes))
    groups = groups or list(range(1, len(members) + 1))
    member_objs = tuple(
        Member(k + 1, groups[k], a, b, member_length(node_objs[a - 1], node_objs[b - 1]))
        for k, (a, b) in enumerate(members)
    )
    cases = tuple(LoadCase(tuple(sorted(c.items()))) for c in loads)
    return TrussProblem(node_objs, member_objs, cases, density, E, (-stress, stress),
                        (-disp, disp), Catalog(tuple(catalog)), name)


@pytest.fixture(scope="session")
def two_bar():
    return load_benchmark("two_bar")


@pytest.fixture(scope="session")
def ten_bar1():
    return load_benchmark("ten_bar_case1")


@pytest.fixture(scope="session")
def ten_bar2():
    return load_benchmark("ten_bar_case2")


@pytest.fixture(scope="session")
def seventy_two1():
    return load_benchmark("seventy_two_bar_case1")


@pytest.fixture
def single_bar():
    # E = 1 GPa, L = 1 m, axial load 1 kN along x at the free end
    return make_problem(
        [(0, 0, 0, 1, 1, 1), (1, 0, 0, 0, 1, 1)], [(1, 2)], [{2: (1e3, 0.0, 0.0)}],
        [100.0, 200.0], E=1e9, density=1.0, stress=1e9, disp=1.0,
    )


SQRT2 = math.sqrt(2.0)


# one pass/fail line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
