"""Replay buffer and hindsight goal-selection strategies.

Relabeling happens at store time: when an episode finishes, each transition
is stored once with its original goal plus ``k`` copies rewritten toward
virtual goals chosen by the strategy. The ``next_future`` strategy spends
its first copy on the next achieved state, which is within threshold of
itself by construction, so that copy always carries reward 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import Episode, Goal, Transition, binary_reward
from .envs import GoalEnv


class StrategyKind(Enum):
    NO_RELABEL = "none"
    FINAL = "final"
    FUTURE = "future"
    EPISODE = "episode"
    RANDOM = "random"
    NEXT_FUTURE = "next_future"


@dataclass(frozen=True)
class ReplayStrategy:
    """Goal-selection rule plus the relabeled-copies-per-transition ratio k."""

    kind: StrategyKind
    k: int = 4

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    @classmethod
    def from_name(cls, name: str, k: int = 4) -> "ReplayStrategy":
        try:
            kind = StrategyKind(name)
        except ValueError:
            raise ValueError(
                f"unknown strategy {name!r}; choose from {[s.value for s in StrategyKind]}"
            ) from None
        return cls(kind, k)

    def label(self) -> str:
        if self.kind in (StrategyKind.NO_RELABEL, StrategyKind.FINAL):
            return self.kind.value
        return f"{self.kind.value}-k{self.k}"


class ReplayBuffer:
    """FIFO transition store with uniform with-replacement sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._storage: list[Transition] = []
        self._head = 0  # next slot to overwrite once full
        self.insertion_count = 0

    def __len__(self) -> int:
        return len(self._storage)

    def add(self, tr: Transition) -> None:
        if len(self._storage) < self.capacity:
            self._storage.append(tr)
        else:
            self._storage[self._head] = tr
            self._head = (self._head + 1) % self.capacity
        self.insertion_count += 1

    def __contains__(self, tr: Transition) -> bool:
        return tr in self._storage

    def transitions(self) -> list[Transition]:
        """Snapshot of the stored transitions (insertion order not guaranteed)."""
        return list(self._storage)


def select_virtual_goals(
    strategy: ReplayStrategy,
    episode: Episode,
    t: int,
    rng: np.random.Generator,
    env: GoalEnv,
    buffer: ReplayBuffer | None = None,
    _achieved: list[Goal] | None = None,
) -> list[Goal]:
    """Pick the virtual goals used to relabel transition ``t`` of ``episode``.

    Future draws are uniform over the achieved goals of states strictly after
    step t (with replacement); next_future spends its first pick on the very
    next achieved state and the remaining k-1 on Future draws. ``_achieved``
    lets a caller reuse precomputed achieved goals of the next states.
    """
    trs = episode.transitions
    T = len(trs)
    if not 0 <= t < T:
        raise ValueError(f"step index {t} out of range for episode of length {T}")
    kind, k = strategy.kind, strategy.k
    achieved = _achieved if _achieved is not None else [env.achieved_goal(tr.next_state) for tr in trs]

    if kind is StrategyKind.NO_RELABEL:
        return []
    if kind is StrategyKind.FINAL:
        return [achieved[T - 1]]
    if kind is StrategyKind.FUTURE:
        return [achieved[i] for i in rng.integers(t, T, size=k)]
    if kind is StrategyKind.NEXT_FUTURE:
        goals = [achieved[t]]
        if k > 1:
            goals.extend(achieved[i] for i in rng.integers(t, T, size=k - 1))
        return goals
    if kind is StrategyKind.EPISODE:
        return [achieved[i] for i in rng.integers(0, T, size=k)]
    if kind is StrategyKind.RANDOM:
        if buffer is None or len(buffer) == 0:
            raise RuntimeError("random strategy needs a non-empty replay buffer")
        storage = buffer._storage
        return [env.achieved_goal(storage[i].next_state) for i in rng.integers(0, len(storage), size=k)]
    raise AssertionError(f"unhandled strategy kind {kind}")


def relabel_transition(tr: Transition, g_virtual: Goal, env: GoalEnv, eps_r: float) -> Transition:
    """Rewrite the goal of a stored transition and recompute its labels."""
    d = env.distance(env.achieved_goal(tr.next_state), g_virtual)
    reward = binary_reward(d, eps_r)
    success = reward == 0.0
    return Transition(
        tr.state, tr.action, tr.next_state, g_virtual,
        reward, success, success, tr.episode_id, tr.step_index,
    )


def store_episode(
    buffer: ReplayBuffer,
    episode: Episode,
    strategy: ReplayStrategy,
    env: GoalEnv,
    eps_r: float,
    rng: np.random.Generator,
) -> int:
    """Store a finished episode: originals plus relabeled copies per strategy.

    Returns the number of transitions inserted. Originals are stored first
    for each step, so the buffer is never empty by the time the random
    strategy draws from it.
    """
    stored = 0
    trs = episode.transitions
    achieved = [env.achieved_goal(tr.next_state) for tr in trs]
    add = buffer.add
    distance = env.distance
    for t, tr in enumerate(trs):
        add(tr)
        stored += 1
        for g in select_virtual_goals(strategy, episode, t, rng, env, buffer, achieved):
            # inline relabel_transition with the precomputed achieved goal
            reward = binary_reward(distance(achieved[t], g), eps_r)
            success = reward == 0.0
            add(
                Transition(
                    tr.state, tr.action, tr.next_state, g,
                    reward, success, success, tr.episode_id, tr.step_index,
                )
            )
            stored += 1
    return stored


def sample_minibatch(
    buffer: ReplayBuffer, batch_size: int, rng: np.random.Generator
) -> list[Transition]:
    """Uniform sample with replacement from the buffer."""
    n = len(buffer)
    if n == 0:
        raise RuntimeError("cannot sample from an empty replay buffer")
    storage = buffer._storage
    return [storage[i] for i in rng.integers(0, n, size=batch_size)]


def sample_minibatches(
    buffer: ReplayBuffer, batch_size: int, count: int, rng: np.random.Generator
):
    """Yield ``count`` uniform minibatches drawn with one generator call.

    Distributionally identical to repeated sample_minibatch; the bulk draw
    just amortizes the generator overhead across a whole update burst.
    """
    n = len(buffer)
    if n == 0:
        raise RuntimeError("cannot sample from an empty replay buffer")
    storage = buffer._storage
    flat = rng.integers(0, n, size=count * batch_size)
    for c in range(count):
        yield [storage[i] for i in flat[c * batch_size : (c + 1) * batch_size]]
