"""Goal-conditioned tabular learners keyed on exact (state, goal) pairs.

Two agents share one surface (value / greedy_action / update):

* ``TabularQAgent`` keeps one scalar per (state, goal, action) and applies
  the standard one-step max backup.
* ``TruncatedQuantileAgent`` keeps an ensemble of quantile atom rows per
  (state, goal, action). Its target pools the next-state atoms across
  critics, sorts them, drops the largest ``tau_trunc`` fraction, and
  regresses every atom onto the discounted remainder with the asymmetric
  Huber quantile loss. Dropping the top of the pooled distribution biases
  the bootstrap target low, which counteracts the max-operator's upward
  bias.

Both tables start at zero. With rewards in {-1, 0} that initialization is
optimistic (0 is the best attainable return), and with step sizes <= 1 every
stored value provably stays inside [-1/(1-gamma), 0].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import Goal, State, Transition


def quantile_midpoints(m: int) -> np.ndarray:
    """Quantile fractions (2j - 1) / (2M) for j = 1..M."""
    if m < 1:
        raise ValueError(f"atom count must be >= 1, got {m}")
    return (2.0 * np.arange(1, m + 1) - 1.0) / (2.0 * m)


def round_half_away(x: float) -> int:
    """Round with halves going away from zero (only used for x >= 0 here)."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def drop_count(tau_trunc: float, pooled_count: int) -> int:
    return round_half_away(tau_trunc * pooled_count)


def truncated_atoms(all_atoms, tau_trunc: float) -> np.ndarray:
    """Sort the pooled atoms ascending and discard the top tau fraction."""
    atoms = np.asarray(all_atoms, dtype=float)
    if atoms.size == 0:
        raise ValueError("cannot truncate an empty atom list")
    dropped = drop_count(tau_trunc, atoms.size)
    if dropped >= atoms.size:
        raise ValueError(
            f"truncation fraction {tau_trunc} drops all {atoms.size} atoms"
        )
    kept = np.sort(atoms)
    return kept[: atoms.size - dropped]


def td_target_atoms(r: float, done: bool, gamma: float, next_atoms) -> np.ndarray:
    """Per-atom bootstrap targets r + gamma * (1 - done) * z."""
    next_atoms = np.asarray(next_atoms, dtype=float)
    if done:
        return np.full(next_atoms.size, float(r))
    return r + gamma * next_atoms


def quantile_huber_loss(
    z: float, y_atoms, tau_hat: float, kappa: float
) -> tuple[float, float]:
    """Asymmetric Huber quantile loss of one atom against target samples.

    Returns (loss, d loss / dz), averaged over the target atoms. The weight
    |tau_hat - 1[y < z]| makes overshooting a tau_hat-quantile estimate cost
    differently from undershooting, which is what pins the minimizer to the
    tau_hat-quantile of the target distribution (for small kappa).
    """
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if not 0.0 < tau_hat < 1.0:
        raise ValueError(f"tau_hat must lie in (0, 1), got {tau_hat}")
    loss = 0.0
    grad = 0.0
    for y in y_atoms:
        u = y - z
        w = abs(tau_hat - (1.0 if u < 0.0 else 0.0))
        if abs(u) <= kappa:
            loss += w * 0.5 * u * u
            grad += w * -u
        else:
            loss += w * kappa * (abs(u) - 0.5 * kappa)
            grad += w * (-kappa if u > 0.0 else kappa)
    m = len(y_atoms)
    return loss / m, grad / m


def quantile_regression_step(
    atoms: np.ndarray,
    y_atoms: np.ndarray,
    midpoints: np.ndarray,
    kappa: float,
    alpha: float,
) -> np.ndarray:
    """One subgradient step of every atom row toward the target samples.

    ``atoms`` has shape (n_critics, m_atoms); column j regresses at fraction
    midpoints[j]. Returns the updated rows, re-sorted ascending per critic.
    """
    n, m = atoms.shape
    z = atoms.reshape(-1, 1)
    u = y_atoms.reshape(1, -1) - z
    tau = np.tile(midpoints, n).reshape(-1, 1)
    weight = np.abs(tau - (u < 0.0))
    grad = -(weight * np.clip(u, -kappa, kappa)).mean(axis=1)
    out = (z.ravel() - alpha * grad).reshape(n, m)
    out.sort(axis=1)
    return out


@dataclass(frozen=True)
class TqcParams:
    n_critics: int = 2
    m_atoms: int = 8
    tau_trunc: float = 0.2
    kappa: float = 1.0
    alpha: float = 0.1

    def __post_init__(self) -> None:
        if self.n_critics < 1:
            raise ValueError(f"n_critics must be >= 1, got {self.n_critics}")
        if self.m_atoms < 1:
            raise ValueError(f"m_atoms must be >= 1, got {self.m_atoms}")
        if not 0.0 <= self.tau_trunc < 1.0:
            raise ValueError(f"tau_trunc must lie in [0, 1), got {self.tau_trunc}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        pooled = self.n_critics * self.m_atoms
        if drop_count(self.tau_trunc, pooled) >= pooled:
            raise ValueError(
                f"tau_trunc {self.tau_trunc} would drop all {pooled} pooled atoms"
            )


@dataclass(frozen=True)
class ExplorationSchedule:
    """Linear epsilon decay clamped at eps_end."""

    eps_start: float = 1.0
    eps_end: float = 0.05
    decay_steps: int = 10_000

    def __post_init__(self) -> None:
        for name in ("eps_start", "eps_end"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.decay_steps < 1:
            raise ValueError(f"decay_steps must be >= 1, got {self.decay_steps}")

    def eps(self, t: int) -> float:
        if t < 0:
            raise ValueError(f"step must be non-negative, got {t}")
        frac = min(t / self.decay_steps, 1.0)
        return self.eps_start + (self.eps_end - self.eps_start) * frac


class TabularQAgent:
    """Plain goal-conditioned Q-learning over exact table keys."""

    kind = "q"

    def __init__(self, action_count: int, alpha: float = 0.1):
        if action_count < 1:
            raise ValueError(f"action_count must be >= 1, got {action_count}")
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        self.action_count = action_count
        self.alpha = alpha
        # one row of action values per (state, goal); absent row means all 0
        self.table: dict[tuple[State, Goal], list[float]] = {}

    def value(self, s: State, g: Goal, a: int) -> float:
        row = self.table.get((s, g))
        return row[a] if row is not None else 0.0

    def greedy_value(self, s: State, g: Goal) -> float:
        row = self.table.get((s, g))
        return max(row) if row is not None else 0.0

    def greedy_action(self, s: State, g: Goal) -> int:
        row = self.table.get((s, g))
        if row is None:
            return 0
        return max(range(self.action_count), key=row.__getitem__)

    def update(self, tr: Transition, gamma: float) -> float:
        """One-step backup q += alpha * (r + gamma*(1-done)*max_a' q' - q)."""
        table = self.table
        if tr.done:
            target = tr.reward
        else:
            nrow = table.get((tr.next_state, tr.goal))
            target = tr.reward + gamma * (max(nrow) if nrow is not None else 0.0)
        key = (tr.state, tr.goal)
        row = table.get(key)
        if row is None:
            row = [0.0] * self.action_count
            table[key] = row
        a = tr.action
        row[a] += self.alpha * (target - row[a])
        return row[a]

    def stored_values(self) -> Iterator[float]:
        for row in self.table.values():
            yield from row


class TruncatedQuantileAgent:
    """Tabular quantile-critic ensemble with truncated bootstrap targets."""

    kind = "tqc"

    def __init__(self, action_count: int, params: TqcParams = TqcParams()):
        if action_count < 1:
            raise ValueError(f"action_count must be >= 1, got {action_count}")
        self.action_count = action_count
        self.params = params
        self.midpoints = quantile_midpoints(params.m_atoms)
        # atoms per (state, goal): array (action, critic, atom), rows sorted
        self.table: dict[tuple[State, Goal], np.ndarray] = {}

    def _atoms(self, s: State, g: Goal) -> np.ndarray | None:
        return self.table.get((s, g))

    def _ensure_atoms(self, s: State, g: Goal) -> np.ndarray:
        key = (s, g)
        arr = self.table.get(key)
        if arr is None:
            arr = np.zeros((self.action_count, self.params.n_critics, self.params.m_atoms))
            self.table[key] = arr
        return arr

    def tq_value(self, s: State, g: Goal, a: int, tau_trunc: float | None = None) -> float:
        """Mean of the truncated pooled atoms at (s, g, a); 0 when unvisited."""
        tau = self.params.tau_trunc if tau_trunc is None else tau_trunc
        arr = self._atoms(s, g)
        if arr is None:
            return 0.0
        return float(truncated_atoms(arr[a].ravel(), tau).mean())

    def value(self, s: State, g: Goal, a: int) -> float:
        return self.tq_value(s, g, a)

    def greedy_action(self, s: State, g: Goal) -> int:
        arr = self._atoms(s, g)
        if arr is None:
            return 0
        values = self._action_values(arr)
        return int(np.argmax(values))  # argmax takes the first max: lowest index

    def greedy_value(self, s: State, g: Goal) -> float:
        arr = self._atoms(s, g)
        if arr is None:
            return 0.0
        return float(self._action_values(arr).max())

    def _action_values(self, arr: np.ndarray) -> np.ndarray:
        pooled = np.sort(arr.reshape(self.action_count, -1), axis=1)
        keep = pooled.shape[1] - drop_count(self.params.tau_trunc, pooled.shape[1])
        return pooled[:, :keep].mean(axis=1)

    def update(self, tr: Transition, gamma: float) -> None:
        """Truncate the greedy next-state pool, then regress all atoms on it."""
        p = self.params
        if tr.done:
            kept = p.n_critics * p.m_atoms - drop_count(p.tau_trunc, p.n_critics * p.m_atoms)
            y = np.full(kept, tr.reward)
        else:
            a_next = self.greedy_action(tr.next_state, tr.goal)
            arr_next = self._atoms(tr.next_state, tr.goal)
            pooled = (
                arr_next[a_next].ravel()
                if arr_next is not None
                else np.zeros(p.n_critics * p.m_atoms)
            )
            y = td_target_atoms(tr.reward, False, gamma, truncated_atoms(pooled, p.tau_trunc))
        arr = self._ensure_atoms(tr.state, tr.goal)
        arr[tr.action] = quantile_regression_step(
            arr[tr.action], y, self.midpoints, p.kappa, p.alpha
        )

    def stored_values(self) -> Iterator[float]:
        for arr in self.table.values():
            yield from arr.ravel()


def epsilon_greedy(
    agent,
    s: State,
    g: Goal,
    schedule: ExplorationSchedule,
    t: int,
    rng: np.random.Generator,
) -> int:
    """Uniform random action with probability eps(t), else the greedy one."""
    if rng.random() < schedule.eps(t):
        return int(rng.integers(0, agent.action_count))
    return agent.greedy_action(s, g)


def make_agent(name: str, action_count: int, **params):
    if name == "q":
        return TabularQAgent(action_count, **params)
    if name == "tqc":
        return TruncatedQuantileAgent(action_count, TqcParams(**params))
    raise ValueError(f"unknown agent {name!r}; choose 'q' or 'tqc'")
