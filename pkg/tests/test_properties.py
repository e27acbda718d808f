"""Property-based checks; these need no shipped benchmark data."""

import io
import math
import random

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from trussmcts import fem
from trussmcts.bench import random_tiny_problem
from trussmcts.driver import TECHNIQUES, DriverConfig, brute_force, optimize, width_schedule
from trussmcts.mcts import SearchNode, run_iterations
from trussmcts.mdp import CandidateLists, SizingEnv, initial_state, reward_value

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])

problems = st.integers(0, 10_000).map(random_tiny_problem)


@st.composite
def problem_and_areas(draw):
    p = draw(problems)
    idx = draw(st.lists(st.integers(0, p.b - 1), min_size=p.g, max_size=p.g))
    return p, tuple(p.catalog[k] for k in idx)


@SETTINGS
@given(problem_and_areas())
def test_stiffness_symmetric_psd(case):
    p, areas = case
    an = fem.analyzer(p)
    k = an.stiffness(areas)
    np.testing.assert_allclose(k, k.T, rtol=0, atol=1e-9 * abs(k).max())
    assert np.linalg.eigvalsh(k).min() > 0  # supports remove rigid modes
    full = np.tensordot(np.asarray(areas) * 1e-6, an.k_groups, axes=1)
    assert np.linalg.eigvalsh(full).min() >= -1e-9 * abs(full).max()


@SETTINGS
@given(problem_and_areas())
def test_equilibrium_and_force_balance(case):
    p, areas = case
    an = fem.analyzer(p)
    k = an.stiffness(areas)
    u = np.linalg.solve(k, an.loads_free)
    residual = np.abs(k @ u - an.loads_free).max() / max(abs(an.loads_free).max(), 1.0)
    assert residual <= 1e-8
    r = an.solve(areas)
    for n, case_ in enumerate(p.load_cases):
        applied = np.sum([v for _, v in case_.forces], axis=0) / 1e3
        assert np.abs(r.reactions[n].sum(axis=0) + applied).max() <= 1e-6


@SETTINGS
@given(problem_and_areas())
def test_reward_bounds(case):
    p, areas = case
    env = SizingEnv(p)
    ev = env.evaluate(areas)
    r = reward_value(ev, env.alpha)
    assert 0.0 <= r <= 1.0
    if not ev.feasible:
        assert r == 0.0
    assert fem.alpha_weight(p) <= ev.weight * (1 + 1e-12) <= fem.max_weight(p) * (1 + 1e-12)


def _check_visits(node, root):
    if node.children is None:
        return
    total = sum(c.visits for c in node.children)
    # the root is expanded on its first visit, other nodes after one simulation
    assert node.visits == total + (0 if node is root else 1)
    for c in node.children:
        _check_visits(c, root)


@SETTINGS
@given(problems, st.integers(1, 200), st.integers(0, 2**31), st.sampled_from(["best", "average"]))
def test_visit_conservation_and_monotone_value(p, budget, seed, mode):
    env = SizingEnv(p)
    x0 = (p.catalog[-1],) * p.g
    env.set_lists(CandidateLists.build(p, x0, 5))
    root = SearchNode(initial_state(1, x0))
    values = []
    run_iterations(root, budget, env, random.Random(seed), mode=mode,
                   trace=lambda node, r: values.append(root.value))
    assert root.visits == budget
    _check_visits(root, root)
    if mode == "best":
        assert values == sorted(values)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(TECHNIQUES), st.integers(2, 300))
def test_width_schedules(technique, b):
    widths = [width_schedule(technique, b, p) for p in range(1, 500)]
    assert all(w % 2 == 1 for w in widths)
    assert all(x >= y for x, y in zip(widths, widths[1:]))
    assert all(w >= 3 for w in widths[1:])
    assert widths[-1] == (3 if technique != "none" else widths[0])


@settings(max_examples=15, deadline=None)
@given(problems, st.integers(0, 1000))
def test_min_s_nonincreasing_and_never_below_oracle(p, seed):
    r = optimize(p, DriverConfig(seed=seed))
    best = [x.best_weight for x in r.rounds if not math.isnan(x.best_weight)]
    assert all(a >= b for a, b in zip(best, best[1:]))
    _, oracle = brute_force(p)
    assert r.weight >= oracle * (1 - 1e-12)


@settings(max_examples=10, deadline=None)
@given(problems, st.integers(0, 1000))
def test_byte_identical_reruns(p, seed):
    import tempfile, pathlib
    with tempfile.TemporaryDirectory() as d:
        a = optimize(p, DriverConfig(seed=seed), trace_path=pathlib.Path(d) / "a.csv")
        b = optimize(p, DriverConfig(seed=seed), trace_path=pathlib.Path(d) / "b.csv")
        assert a.comparable() == b.comparable()
        assert (pathlib.Path(d) / "a.csv").read_bytes() == (pathlib.Path(d) / "b.csv").read_bytes()
