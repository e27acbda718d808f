import math
import random

import pytest

from trussmcts import fem
from trussmcts.mdp import (
    TERMINAL_ACTION,
    Action,
    CandidateLists,
    DesignState,
    SizingEnv,
    action_space,
    apply_action,
    candidate_window,
    features,
    initial_state,
    reward,
    reward_value,
)

from conftest import make_problem


def test_initial_state_round_one():
    s = initial_state(1, (3.0, 3.0))
    assert s.areas == (3.0, 3.0) and s.flags == (1, 1) and s.layer == 0
    assert not s.terminal


def test_apply_action_sets_next_group():
    s = apply_action(initial_state(1, (3.0, 3.0)), Action(1, 1.5))
    assert s.areas == (1.5, 3.0) and s.flags == (0, 1) and s.layer == 1
    assert apply_action(initial_state(1, (3.0, 3.0)), Action(1, 1.5)) == s


def test_g_actions_reach_terminal():
    s = initial_state(1, (1.0, 2.0, 3.0))
    for k in range(3):
        s = apply_action(s, Action(k + 1, 1.0))
    assert s.terminal and s.flags == (0, 0, 0)
    assert action_space(s, None) == [TERMINAL_ACTION]
    assert apply_action(s, TERMINAL_ACTION) is s


def test_apply_action_rejects_wrong_group_and_area():
    s = initial_state(1, (3.0, 3.0))
    with pytest.raises(ValueError, match="expected group 1"):
        apply_action(s, Action(2, 1.0))
    lists = CandidateLists(((1.0, 2.0), (1.0, 2.0)))
    with pytest.raises(ValueError, match="not a candidate"):
        apply_action(s, Action(1, 3.0), lists)


def test_full_window_for_even_catalog(ten_bar1):
    # width 43 covers all 42 sections
    lists = CandidateLists.build(ten_bar1, [ten_bar1.catalog[-1]] * 10, 43)
    assert all(len(l) == 42 for l in lists.lists)
    assert len(action_space(initial_state(1, [ten_bar1.catalog[-1]] * 10), lists)) == 42


@pytest.mark.parametrize("center, width, b, expected", [
    (5, 3, 10, range(4, 7)),
    (0, 3, 10, range(0, 3)),
    (9, 5, 10, range(5, 10)),
    (3, 11, 10, range(0, 10)),
])
def test_candidate_window(center, width, b, expected):
    assert candidate_window(center, width, b) == expected


def test_reward_values():
    assert reward_value(fem.Evaluation(True, 100.0, -0.5), 100.0) == 1.0
    assert reward_value(fem.Evaluation(True, 200.0, -0.5), 100.0) == 0.25
    assert reward_value(fem.Evaluation(False, 50.0, 0.5), 100.0) == 0.0


def test_reward_nonterminal_zero(two_bar):
    assert reward(two_bar, initial_state(1, (500.0, 500.0))) == 0.0
    done = DesignState(1, (200.0, 400.0), 2)
    alpha = fem.alpha_weight(two_bar)
    assert reward(two_bar, done) == pytest.approx((alpha / fem.total_weight(two_bar, (200, 400))) ** 2)


def test_reward_unstable_is_zero(caplog):
    p = make_problem([(0, 0, 0, 1, 1, 1), (1, 0, 0, 0, 0, 1), (2, 0, 0, 1, 1, 1)],
                     [(1, 2), (2, 3)], [{2: (0, -1e3, 0)}], [1.0, 2.0])
    assert reward(p, DesignState(1, (1.0, 1.0), 2)) == 0.0
    assert "unstable" in caplog.text


def test_env_counts_and_caches(two_bar):
    env = SizingEnv(two_bar)
    env.set_lists(CandidateLists.build(two_bar, (500.0, 500.0), 5))
    r1 = env.terminal_reward((200.0, 400.0))
    r2 = env.terminal_reward((200.0, 400.0))
    assert r1 == r2 > 0
    assert env.evaluations == 2 and env.fem_solves == 1
    rng = random.Random(0)
    r = env.rollout(initial_state(1, (500.0, 500.0)), rng)
    assert 0.0 <= r <= 1.0 and env.evaluations == 3


def test_env_rejects_bad_alpha(two_bar):
    with pytest.raises(ValueError):
        SizingEnv(two_bar, "median")


def test_features_shapes(ten_bar1):
    s = apply_action(initial_state(1, [ten_bar1.catalog[-1]] * 10), Action(1, ten_bar1.catalog[0]))
    f = features(ten_bar1, s)
    assert f.nodes.shape == (6, 9) and f.members.shape == (10, 6)
    assert f.nodes[1, 4] == pytest.approx(-444.82)
    assert list(f.members[:, 4]) == [0.0] + [1.0] * 9
    assert s.trace().startswith("1,0111111111,")
