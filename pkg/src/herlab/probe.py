"""Read-only inspection of the learned value surface over fixed probe states."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .config import ProbeConfig
from .core import State
from .envs import GoalEnv


@dataclass(frozen=True)
class ProbeSnapshot:
    """Greedy values of every probe state at one moment in training."""

    env_step: int
    values: tuple[tuple[State, float], ...]


def probe_q(agent, env: GoalEnv, spec: ProbeConfig, env_step: int) -> ProbeSnapshot:
    """Record max_a value(s, goal, a) for every probe state; never mutates."""
    values = []
    for state in spec.probe_states:
        env.validate_state(state)
        values.append((state, agent.greedy_value(state, spec.goal)))
    return ProbeSnapshot(env_step=env_step, values=tuple(values))


def emit_probe_csv(env: GoalEnv, snapshots: list[ProbeSnapshot], path: str | Path) -> None:
    """Write one row per (snapshot, probe state).

    Planar environments get ``env_step,state_x,state_y,value`` columns;
    others fall back to the integer state key.
    """
    planar = type(env).state_xy is not GoalEnv.state_xy
    lines = []
    if planar:
        lines.append("env_step,state_x,state_y,value")
        for snap in snapshots:
            for state, value in snap.values:
                x, y = env.state_xy(state)
                lines.append(f"{snap.env_step},{x},{y},{value:.9f}")
    else:
        lines.append("env_step,state_key,value")
        for snap in snapshots:
            for state, value in snap.values:
                lines.append(f"{snap.env_step},{env.encode_state(state)},{value:.9f}")
    Path(path).write_text("\n".join(lines) + "\n")
