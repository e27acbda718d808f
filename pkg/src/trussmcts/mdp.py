"""Sequential sizing as a decision process.

A state assigns areas to groups 1..l in fixed order; groups l+1..g still
hold the round's initial areas. An action fixes the next group's area to
one entry of that group's candidate window. Only terminal states are
rewarded: ``(alpha / W)**2`` when feasible, 0 otherwise.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import fem
from .problem import TrussProblem

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DesignState:
    round: int
    areas: tuple[float, ...]  # mm²
    layer: int = 0

    @property
    def g(self) -> int:
        return len(self.areas)

    @property
    def flags(self) -> tuple[int, ...]:
        """1 for groups not yet determined, 0 for assigned ones."""
        return (0,) * self.layer + (1,) * (self.g - self.layer)

    @property
    def terminal(self) -> bool:
        return self.layer == self.g

    def trace(self) -> str:
        flags = "".join(map(str, self.flags))
        areas = ";".join(f"{a:.2f}" for a in self.areas)
        return f"{self.round},{flags},{areas}"


class Action(NamedTuple):
    group: int  # 1-based group this action sizes; 0 for the terminal action
    area: float


TERMINAL_ACTION = Action(0, math.nan)


def candidate_window(center: int, width: int, b: int) -> range:
    """Catalog indices of a width-``width`` window around ``center``.

    The window is shifted inward when it would run past either end of the
    catalog, so it always holds ``min(width, b)`` entries.
    """
    if width >= b:
        return range(b)
    lo = center - (width - 1) // 2
    lo = max(0, min(lo, b - width))
    return range(lo, lo + width)


@dataclass(frozen=True)
class CandidateLists:
    lists: tuple[tuple[float, ...], ...]  # per group, ascending areas in mm²

    def __getitem__(self, group_index: int) -> tuple[float, ...]:
        return self.lists[group_index]

    def __len__(self) -> int:
        return len(self.lists)

    @classmethod
    def build(cls, problem: TrussProblem, x0: Sequence[float], width: int) -> CandidateLists:
        cat = problem.catalog
        out = []
        for area in x0:
            window = candidate_window(cat.index_of(area), width, cat.b)
            out.append(tuple(cat[h] for h in window))
        return cls(tuple(out))


def initial_state(round: int, x0: Sequence[float]) -> DesignState:
    return DesignState(round, tuple(x0), 0)


def action_space(state: DesignState, lists: CandidateLists) -> list[Action]:
    if state.terminal:
        return [TERMINAL_ACTION]
    group = state.layer + 1
    return [Action(group, a) for a in lists[state.layer]]


def apply_action(state: DesignState, action: Action, lists: CandidateLists | None = None) -> DesignState:
    if state.terminal:
        if action.group != 0:
            raise ValueError("only the terminal action applies to a terminal state")
        return state
    if action.group != state.layer + 1:
        raise ValueError(f"action sizes group {action.group}, expected group {state.layer + 1}")
    if lists is not None and action.area not in lists[state.layer]:
        raise ValueError(f"area {action.area} is not a candidate for group {action.group}")
    areas = list(state.areas)
    areas[state.layer] = action.area
    return DesignState(state.round, tuple(areas), state.layer + 1)


def reward_value(evaluation: fem.Evaluation, alpha: float) -> float:
    if not evaluation.feasible:
        return 0.0
    return (alpha / evaluation.weight) ** 2


def reward(problem: TrussProblem, state: DesignState, alpha_mode: str = "min") -> float:
    if not state.terminal:
        return 0.0
    alpha = fem.alpha_weight(problem) if alpha_mode == "min" else fem.max_weight(problem)
    try:
        evaluation = fem.analyzer(problem).evaluate(state.areas)
    except fem.UnstableStructureError as exc:
        log.warning("reward 0 for unstable design: %s", exc)
        return 0.0
    return reward_value(evaluation, alpha)


class SizingEnv:
    """Terminal evaluation with memoisation and evaluation counters.

    ``evaluations`` counts every reward request (one per simulation);
    ``fem_solves`` counts the analyses actually run after the cache.
    """

    def __init__(self, problem: TrussProblem, alpha_mode: str = "min"):
        if alpha_mode not in ("min", "max"):
            raise ValueError(f"alpha_mode must be 'min' or 'max', got {alpha_mode!r}")
        self.problem = problem
        self.analyzer = fem.analyzer(problem)
        self.alpha = fem.alpha_weight(problem) if alpha_mode == "min" else fem.max_weight(problem)
        self.g = problem.g
        self.lists: CandidateLists | None = None
        self.evaluations = 0
        self.fem_solves = 0
        self._cache: dict[tuple[float, ...], fem.Evaluation] = {}

    def set_lists(self, lists: CandidateLists) -> None:
        self.lists = lists

    def evaluate(self, areas: tuple[float, ...]) -> fem.Evaluation:
        hit = self._cache.get(areas)
        if hit is None:
            self.fem_solves += 1
            hit = self.analyzer.evaluate(areas)
            self._cache[areas] = hit
        return hit

    def terminal_reward(self, areas: tuple[float, ...]) -> float:
        self.evaluations += 1
        return reward_value(self.evaluate(areas), self.alpha)

    def rollout(self, state: DesignState, rng) -> float:
        """Complete ``state`` uniformly at random and return the reward."""
        if state.terminal:
            return self.terminal_reward(state.areas)
        lists = self.lists.lists
        tail = tuple(rng.choice(lists[i]) for i in range(state.layer, self.g))
        return self.terminal_reward(state.areas[: state.layer] + tail)


@dataclass(frozen=True)
class FeatureVectors:
    nodes: np.ndarray  # (c, 9): x, y, z, Fx, Fy, Fz, Rx, Ry, Rz
    members: np.ndarray  # (n_members, 6): H1, H2, L, E, M, X


def features(problem: TrussProblem, state: DesignState, load_case: int = 0) -> FeatureVectors:
    """Node and member descriptors of a state, for inspection and logging.

    Coordinates in m, forces and reactions in kN, E in GPa, areas in mm².
    """
    result = fem.analyzer(problem).solve(state.areas)
    loads = np.zeros((problem.c, 3))
    for node_id, vec in problem.load_cases[load_case].forces:
        loads[node_id - 1] += np.array(vec) / 1e3
    coords = np.array([n.coords for n in problem.nodes])
    nodes = np.hstack([coords, loads, result.reactions[load_case]])
    flags = state.flags
    members = np.array([
        (m.start, m.end, m.length, problem.elastic_modulus / 1e9, flags[m.group - 1],
         state.areas[m.group - 1])
        for m in problem.members
    ])
    return FeatureVectors(nodes, members)
