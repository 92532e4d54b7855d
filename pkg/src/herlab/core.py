"""Multi-goal MDP vocabulary: states, goals, transitions, and the binary reward.

States and goals are opaque hashable values owned by the environments; every
table and buffer in the package keys on them directly, so exactness of
lookups reduces to value equality.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, NamedTuple

State = Hashable
Goal = Hashable
Action = int


def binary_reward(d: float, eps_r: float) -> float:
    """Sparse reward: 0 if the goal distance is within threshold, else -1.

    The success test is non-strict (d <= eps_r counts as success).
    """
    if d < 0:
        raise ValueError(f"distance must be non-negative, got {d}")
    if eps_r <= 0:
        raise ValueError(f"eps_r must be positive, got {eps_r}")
    return 0.0 if d <= eps_r else -1.0


def is_success(d: float, eps_r: float) -> bool:
    """True iff binary_reward(d, eps_r) == 0."""
    return binary_reward(d, eps_r) == 0.0


class Transition(NamedTuple):
    """One environment step annotated with its goal and reward labels.

    ``done`` means terminal-for-bootstrapping; it equals ``success`` because
    horizon truncation deliberately does not terminate value propagation.
    """

    state: State
    action: Action
    next_state: State
    goal: Goal
    reward: float
    success: bool
    done: bool
    episode_id: int
    step_index: int


@dataclass
class Episode:
    """Ordered transitions collected under one original goal."""

    transitions: list[Transition]
    original_goal: Goal
    horizon: int

    def __len__(self) -> int:
        return len(self.transitions)


@dataclass(frozen=True)
class RewardParams:
    """Success threshold and discount factor shared by a training run."""

    eps_r: float
    gamma: float

    def __post_init__(self) -> None:
        if self.eps_r <= 0:
            raise ValueError(f"eps_r must be positive, got {self.eps_r}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")


def validate_transition(tr: Transition) -> None:
    """Reject transitions that violate the reward/flag invariants."""
    if tr.reward not in (0.0, -1.0):
        raise ValueError(f"reward must be 0 or -1, got {tr.reward}")
    if tr.success != (tr.reward == 0.0):
        raise ValueError("success flag must mirror reward == 0")
    if tr.done and not tr.success:
        raise ValueError("done implies success (truncation must not set done)")
    if tr.step_index < 0:
        raise ValueError(f"step_index must be non-negative, got {tr.step_index}")


def validate_episode(ep: Episode) -> None:
    """Check shared goal, chaining, step ordering, and horizon bound."""
    if len(ep.transitions) > ep.horizon:
        raise ValueError(f"episode length {len(ep.transitions)} exceeds horizon {ep.horizon}")
    for i, tr in enumerate(ep.transitions):
        validate_transition(tr)
        if tr.goal != ep.original_goal:
            raise ValueError(f"transition {i} carries a different goal than the episode")
        if tr.step_index != i:
            raise ValueError(f"transition {i} has step_index {tr.step_index}")
        if i > 0 and ep.transitions[i - 1].next_state != tr.state:
            raise ValueError(f"transitions {i - 1} and {i} do not chain")
        if i > 0 and ep.transitions[i - 1].episode_id != tr.episode_id:
            raise ValueError(f"transition {i} belongs to a different episode")
