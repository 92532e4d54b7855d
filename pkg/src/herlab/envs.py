"""Three deterministic discrete multi-goal environments under one contract.

Each environment is a stateless rule set: ``step`` is a pure function of
(state, action), and all randomness lives in ``reset`` (initial state and
goal draws). States and goals are plain hashable tuples/ints with an
injective integer encoding for serialization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Action, Goal, State


@dataclass(frozen=True)
class EnvSpec:
    name: str
    action_count: int
    horizon: int
    default_eps_r: float
    goal_dims: int

    def __post_init__(self) -> None:
        if self.action_count < 2:
            raise ValueError(f"action_count must be >= 2, got {self.action_count}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")


class GoalEnv:
    """Common surface: reset/step/achieved_goal/distance plus encodings."""

    spec: EnvSpec

    def label(self) -> str:
        raise NotImplementedError

    def reset(self, rng: np.random.Generator) -> tuple[State, Goal]:
        raise NotImplementedError

    def step(self, state: State, action: Action) -> State:
        raise NotImplementedError

    def achieved_goal(self, state: State) -> Goal:
        raise NotImplementedError

    def distance(self, g1: Goal, g2: Goal) -> float:
        raise NotImplementedError

    def encode_state(self, state: State) -> int:
        raise NotImplementedError

    def encode_goal(self, goal: Goal) -> int:
        raise NotImplementedError

    def validate_state(self, state: State) -> None:
        raise NotImplementedError

    def state_xy(self, state: State) -> tuple[int, int] | None:
        """Planar projection used by probe CSVs; None for non-planar envs."""
        return None

    def state_from_json(self, obj) -> State:
        raise NotImplementedError

    def goal_from_json(self, obj) -> Goal:
        raise NotImplementedError

    def _check_action(self, action: Action) -> None:
        if not 0 <= action < self.spec.action_count:
            raise ValueError(
                f"action {action} out of range [0, {self.spec.action_count}) for {self.label()}"
            )


class BitFlipEnv(GoalEnv):
    """Flip one bit per step; the goal is a target bit vector.

    Distance is the Hamming count, so with eps_r < 1 success means an exact
    match. The horizon equals the bit count: any state can reach any goal in
    at most n flips.
    """

    def __init__(self, n: int = 10):
        if n < 1:
            raise ValueError(f"bit count must be >= 1, got {n}")
        if n > 30:
            raise ValueError(f"bit count must be <= 30, got {n}")
        self.n = n
        # max(n, 2): n == 1 pads a second no-effect action so the action
        # space never degenerates to a single choice.
        self.spec = EnvSpec(
            name="bitflip",
            action_count=max(n, 2),
            horizon=n,
            default_eps_r=0.5,
            goal_dims=n,
        )

    def label(self) -> str:
        return f"bitflip(n={self.n})"

    def reset(self, rng: np.random.Generator) -> tuple[State, Goal]:
        state = tuple(int(b) for b in rng.integers(0, 2, size=self.n))
        goal = tuple(int(b) for b in rng.integers(0, 2, size=self.n))
        return state, goal

    def step(self, state: State, action: Action) -> State:
        self._check_action(action)
        if action >= self.n:
            return state
        bits = list(state)
        bits[action] ^= 1
        return tuple(bits)

    def achieved_goal(self, state: State) -> Goal:
        return state

    def distance(self, g1: Goal, g2: Goal) -> float:
        if len(g1) != len(g2):
            raise ValueError(f"goal length mismatch: {len(g1)} vs {len(g2)}")
        return float(sum(a != b for a, b in zip(g1, g2)))

    def encode_state(self, state: State) -> int:
        key = 0
        for b in state:
            key = (key << 1) | b
        return key

    def encode_goal(self, goal: Goal) -> int:
        return self.encode_state(goal)

    def validate_state(self, state: State) -> None:
        if not (isinstance(state, tuple) and len(state) == self.n):
            raise ValueError(f"invalid bitflip state {state!r}: expected {self.n}-tuple")
        if any(b not in (0, 1) for b in state):
            raise ValueError(f"invalid bitflip state {state!r}: bits must be 0/1")

    def state_from_json(self, obj) -> State:
        state = tuple(int(b) for b in obj)
        self.validate_state(state)
        return state

    def goal_from_json(self, obj) -> Goal:
        return self.state_from_json(obj)


UP, DOWN, LEFT, RIGHT = 0, 1, 2, 3
_DIRS = ((0, 1), (0, -1), (-1, 0), (1, 0))


class GridPushEnv(GoalEnv):
    """Agent pushes a box on a rectangular grid toward a target box cell.

    Walking into the box pushes it one cell along the movement direction if
    the destination is in bounds; pushes into walls (and moves into walls)
    leave everything in place, so agent and box always occupy distinct
    in-bounds cells.
    """

    def __init__(self, width: int = 5, height: int = 5):
        if width < 4 or height < 4:
            raise ValueError(f"grid must be at least 4x4, got {width}x{height}")
        self.width = width
        self.height = height
        self.spec = EnvSpec(
            name="gridpush",
            action_count=4,
            horizon=50,
            default_eps_r=1.0,
            goal_dims=2,
        )

    def label(self) -> str:
        return f"gridpush({self.width}x{self.height})"

    def _in_bounds(self, cell: tuple[int, int]) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def _random_cell(self, rng: np.random.Generator) -> tuple[int, int]:
        return int(rng.integers(0, self.width)), int(rng.integers(0, self.height))

    def reset(self, rng: np.random.Generator) -> tuple[State, Goal]:
        # The box starts on an interior cell: a box flush against a wall can
        # never be pushed off it, so wall starts would make most goals
        # unreachable. Interior starts keep every goal cell achievable.
        box = (int(rng.integers(1, self.width - 1)), int(rng.integers(1, self.height - 1)))
        agent = self._random_cell(rng)
        while agent == box:
            agent = self._random_cell(rng)
        goal = self._random_cell(rng)
        while goal == box:
            goal = self._random_cell(rng)
        return (agent, box), goal

    def step(self, state: State, action: Action) -> State:
        self._check_action(action)
        agent, box = state
        dx, dy = _DIRS[action]
        target = (agent[0] + dx, agent[1] + dy)
        if not self._in_bounds(target):
            return state
        if target == box:
            box_target = (box[0] + dx, box[1] + dy)
            if not self._in_bounds(box_target):
                return state
            return (target, box_target)
        return (target, box)

    def achieved_goal(self, state: State) -> Goal:
        return state[1]

    def distance(self, g1: Goal, g2: Goal) -> float:
        if len(g1) != 2 or len(g2) != 2:
            raise ValueError(f"gridpush goals must be (x, y) cells, got {g1!r}, {g2!r}")
        return float(abs(g1[0] - g2[0]) + abs(g1[1] - g2[1]))

    def encode_state(self, state: State) -> int:
        agent, box = state
        cells = self.width * self.height
        return (agent[0] * self.height + agent[1]) * cells + box[0] * self.height + box[1]

    def encode_goal(self, goal: Goal) -> int:
        return goal[0] * self.height + goal[1]

    def validate_state(self, state: State) -> None:
        try:
            agent, box = state
        except (TypeError, ValueError):
            raise ValueError(f"invalid gridpush state {state!r}: expected (agent, box)")
        for cell in (agent, box):
            if not (isinstance(cell, tuple) and len(cell) == 2 and self._in_bounds(cell)):
                raise ValueError(f"invalid gridpush state {state!r}: cell {cell!r} off-grid")
        if agent == box:
            raise ValueError(f"invalid gridpush state {state!r}: agent and box overlap")

    def state_xy(self, state: State) -> tuple[int, int]:
        return state[1]

    def state_from_json(self, obj) -> State:
        agent = tuple(int(v) for v in obj[0])
        box = tuple(int(v) for v in obj[1])
        state = (agent, box)
        self.validate_state(state)
        return state

    def goal_from_json(self, obj) -> Goal:
        goal = tuple(int(v) for v in obj)
        if len(goal) != 2 or not self._in_bounds(goal):
            raise ValueError(f"invalid gridpush goal {obj!r}")
        return goal


class LineReachEnv(GoalEnv):
    """Planar walker whose goal space is the y-coordinate only.

    The achieved goal of a state (x, y) is y, making the goal space 1-D
    while the state space stays 2-D; moves clamp at the borders.
    """

    def __init__(self, width: int = 8, height: int = 8):
        if width < 2 or height < 2:
            raise ValueError(f"grid must be at least 2x2, got {width}x{height}")
        self.width = width
        self.height = height
        self.spec = EnvSpec(
            name="linereach",
            action_count=4,
            horizon=2 * height,
            default_eps_r=0.5,
            goal_dims=1,
        )

    def label(self) -> str:
        return f"linereach({self.width}x{self.height})"

    def reset(self, rng: np.random.Generator) -> tuple[State, Goal]:
        state = (int(rng.integers(0, self.width)), int(rng.integers(0, self.height)))
        goal = int(rng.integers(0, self.height))
        return state, goal

    def step(self, state: State, action: Action) -> State:
        self._check_action(action)
        dx, dy = _DIRS[action]
        x = min(max(state[0] + dx, 0), self.width - 1)
        y = min(max(state[1] + dy, 0), self.height - 1)
        return (x, y)

    def achieved_goal(self, state: State) -> Goal:
        return state[1]

    def distance(self, g1: Goal, g2: Goal) -> float:
        return float(abs(g1 - g2))

    def encode_state(self, state: State) -> int:
        return state[0] * self.height + state[1]

    def encode_goal(self, goal: Goal) -> int:
        return int(goal)

    def validate_state(self, state: State) -> None:
        if not (
            isinstance(state, tuple)
            and len(state) == 2
            and 0 <= state[0] < self.width
            and 0 <= state[1] < self.height
        ):
            raise ValueError(f"invalid linereach state {state!r}")

    def state_xy(self, state: State) -> tuple[int, int]:
        return state

    def state_from_json(self, obj) -> State:
        state = tuple(int(v) for v in obj)
        self.validate_state(state)
        return state

    def goal_from_json(self, obj) -> Goal:
        goal = int(obj)
        if not 0 <= goal < self.height:
            raise ValueError(f"invalid linereach goal {obj!r}")
        return goal


_ENV_FACTORIES = {
    "bitflip": (BitFlipEnv, {"n"}),
    "gridpush": (GridPushEnv, {"width", "height"}),
    "linereach": (LineReachEnv, {"width", "height"}),
}


def make_env(name: str, **params) -> GoalEnv:
    """Build an environment from its config name and integer size params."""
    if name not in _ENV_FACTORIES:
        raise ValueError(f"unknown environment {name!r}; choose from {sorted(_ENV_FACTORIES)}")
    cls, allowed = _ENV_FACTORIES[name]
    unknown = set(params) - allowed
    if unknown:
        raise ValueError(f"unknown {name} parameter(s): {sorted(unknown)}")
    return cls(**params)
