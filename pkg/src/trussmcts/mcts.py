"""Tree search over a SizingEnv.

Each iteration selects by UCB down to a leaf. A leaf that has not been
simulated yet is simulated as it is; otherwise all its children are added
and one of them, picked uniformly at random, is simulated. The reward is
backed up to the current root. In ``best`` mode a node keeps the largest
reward seen through it; in ``average`` mode the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, TextIO

from .mdp import Action, DesignState, SizingEnv, apply_action

DEFAULT_C = math.sqrt(2.0)


def ceil_log10(n: int) -> int:
    """Exact ceil(log10(n)) for a positive integer."""
    if n < 1:
        raise ValueError("n must be positive")
    return len(str(n - 1)) if n > 1 else 0


def iteration_budget(layer: int, b: int, beta: int, g: int) -> int:
    """Iterations to run before committing the decision at ``layer``."""
    if beta < 2 or g < 1 or not 0 <= layer <= g - 1:
        raise ValueError(f"invalid budget arguments layer={layer} beta={beta} g={g}")
    if layer == 0:
        return 2 * b * ceil_log10(beta**g)
    return b * ceil_log10(beta ** (g - layer))


@dataclass(frozen=True)
class SearchBudget:
    caps: tuple[int, ...]  # per layer 0..g-1
    C: float = DEFAULT_C

    def __post_init__(self) -> None:
        if any(c < 1 for c in self.caps):
            raise ValueError("iteration caps must be at least 1")
        if self.C < 0:
            raise ValueError("exploration constant must be nonnegative")

    @classmethod
    def for_round(cls, b: int, beta: int, g: int, C: float = DEFAULT_C, scale: float = 1.0) -> SearchBudget:
        caps = tuple(max(1, math.ceil(scale * iteration_budget(l, b, beta, g))) for l in range(g))
        return cls(caps, C)


class SearchNode:
    __slots__ = ("state", "action", "parent", "children", "value", "visits", "sum_g")

    def __init__(self, state: DesignState, parent: SearchNode | None = None, action: Action | None = None):
        self.state = state
        self.action = action
        self.parent = parent
        self.children: list[SearchNode] | None = None
        self.value = 0.0
        self.visits = 0
        self.sum_g = 0.0

    @property
    def terminal(self) -> bool:
        return self.state.terminal

    def estimate(self, mode: str = "best") -> float:
        if mode == "best":
            return self.value
        return self.sum_g / self.visits if self.visits else 0.0

    def expand(self, env: SizingEnv) -> list[SearchNode]:
        state = self.state
        group = state.layer + 1
        self.children = [
            SearchNode(apply_action(state, Action(group, a)), self, Action(group, a))
            for a in env.lists[state.layer]
        ]
        return self.children

    def path(self) -> list[Action]:
        """Actions from the current root down to this node."""
        out = []
        node = self
        while node.parent is not None:
            out.append(node.action)
            node = node.parent
        return out[::-1]

    def __repr__(self) -> str:
        return f"SearchNode(layer={self.state.layer}, V={self.value:.4f}, n={self.visits})"


def ucb(node: SearchNode, parent_visits: int, C: float = DEFAULT_C, mode: str = "best") -> float:
    if node.visits == 0:
        return math.inf
    if parent_visits < 1:
        raise ValueError("parent visit count must be at least 1")
    return node.estimate(mode) + C * math.sqrt(math.log(parent_visits) / node.visits)


def select_child(node: SearchNode, C: float, mode: str) -> SearchNode:
    """Child with the largest UCB; the first (lowest index) wins ties."""
    children = node.children
    for child in children:
        if child.visits == 0:
            return child
    log_n = math.log(node.visits)
    best = None
    best_score = -math.inf
    if mode == "best":
        for child in children:
            score = child.value + C * math.sqrt(log_n / child.visits)
            if score > best_score:
                best, best_score = child, score
    else:
        for child in children:
            score = child.sum_g / child.visits + C * math.sqrt(log_n / child.visits)
            if score > best_score:
                best, best_score = child, score
    return best


def backpropagate(node: SearchNode, reward: float, root: SearchNode, mode: str) -> None:
    while True:
        node.visits += 1
        if mode == "best":
            if reward > node.value:
                node.value = reward
        else:
            node.sum_g += reward
            node.value = node.sum_g / node.visits
        if node is root:
            return
        node = node.parent


def run_iterations(
    root: SearchNode,
    budget: int,
    env: SizingEnv,
    rng,
    C: float = DEFAULT_C,
    mode: str = "best",
    trace: Callable[[SearchNode, float], None] | None = None,
) -> SearchNode:
    if root.terminal:
        raise ValueError("cannot search from a terminal root")
    if budget < 1:
        raise ValueError("budget must be at least 1")
    for _ in range(budget):
        node = root
        while node.children is not None:
            node = select_child(node, C, mode)
        if not node.terminal and (node.visits > 0 or node is root):
            node = rng.choice(node.expand(env))
        reward = env.rollout(node.state, rng)
        backpropagate(node, reward, root, mode)
        if trace is not None:
            trace(node, reward)
    return root


def best_child(node: SearchNode, mode: str = "best") -> SearchNode:
    """Child with the largest value estimate.

    Ties go to the child that keeps the group at the round's initial area,
    then to the lowest index.
    """
    values = [child.estimate(mode) for child in node.children]
    top = max(values)
    tied = [child for child, v in zip(node.children, values) if v == top]
    if len(tied) > 1:
        keep = node.state.areas[node.state.layer]
        for child in tied:
            if child.action.area == keep:
                return child
    return tied[0]


class TraceWriter:
    """CSV trace: one row per iteration."""

    def __init__(self, fh: TextIO):
        self.fh = fh
        self.iteration = 0
        self.root: SearchNode | None = None
        fh.write("iteration,round,layer,path,reward,root_value\n")

    def __call__(self, node: SearchNode, reward: float) -> None:
        self.iteration += 1
        root = self.root
        path = " ".join(f"{a.area:.2f}" for a in node.path())
        self.fh.write(
            f"{self.iteration},{node.state.round},{root.state.layer},{path},{reward!r},{root.value!r}\n"
        )


def policy_improvement(
    env: SizingEnv,
    root_state: DesignState,
    budget: SearchBudget,
    rng,
    mode: str = "best",
    trace: TraceWriter | None = None,
) -> DesignState:
    """Search, commit to the best child, re-root there, repeat to a terminal."""
    root = SearchNode(root_state)
    while not root.terminal:
        if trace is not None:
            trace.root = root
        run_iterations(root, budget.caps[root.state.layer], env, rng, budget.C, mode, trace)
        root = best_child(root, mode)
        root.parent = None
    return root.state
