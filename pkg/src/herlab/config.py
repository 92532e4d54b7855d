"""Experiment configuration: JSON schema, validation, and hashing.

Configs are flat JSON documents; unknown keys anywhere in the document are
rejected so typos fail loudly instead of silently running defaults.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .agents import ExplorationSchedule, TqcParams
from .core import Goal, State
from .envs import GoalEnv, make_env
from .relabel import ReplayStrategy


class ConfigError(ValueError):
    """Invalid configuration; carries the offending field name."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


@dataclass(frozen=True)
class ProbeConfig:
    goal: Goal
    probe_states: tuple[State, ...]
    snapshot_every: int


@dataclass(frozen=True)
class ExperimentConfig:
    env_name: str
    env_params: dict[str, int]
    agent_name: str
    agent_params: dict[str, Any]
    strategies: tuple[ReplayStrategy, ...]
    eps_r: float | None
    gamma: float
    total_env_steps: int
    eval_every: int
    eval_episodes: int
    updates_per_step: int
    batch_size: int
    exploration: ExplorationSchedule
    buffer_capacity: int
    seeds: tuple[int, ...]
    summary_threshold: float
    probe: ProbeConfig | None = None

    def make_env(self) -> GoalEnv:
        return make_env(self.env_name, **self.env_params)

    def resolve_eps_r(self, env: GoalEnv) -> float:
        return env.spec.default_eps_r if self.eps_r is None else self.eps_r


_TOP_KEYS = {
    "env",
    "agent",
    "strategy",
    "eps_r",
    "gamma",
    "total_env_steps",
    "eval_every",
    "eval_episodes",
    "updates_per_step",
    "batch_size",
    "exploration",
    "buffer_capacity",
    "seeds",
    "summary_threshold",
    "probe",
}

_AGENT_KEYS = {
    "q": {"name", "alpha"},
    "tqc": {"name", "n_critics", "m_atoms", "tau_trunc", "kappa", "alpha"},
}


def _require(doc: dict, key: str):
    if key not in doc:
        raise ConfigError(key, "missing required field")
    return doc[key]


def _as_int(value, key: str, minimum: int | None = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(key, f"must be >= {minimum}, got {value}")
    return value


def _as_number(value, key: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def _check_keys(doc: dict, allowed: set[str], where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(where, f"unknown key(s): {sorted(unknown)}")


def _parse_strategy(doc, key: str) -> ReplayStrategy:
    if not isinstance(doc, dict):
        raise ConfigError(key, f"expected an object with 'name', got {doc!r}")
    _check_keys(doc, {"name", "k"}, key)
    if "name" not in doc:
        raise ConfigError(f"{key}.name", "missing required field")
    name = doc["name"]
    k = _as_int(doc.get("k", 4), f"{key}.k", minimum=1)
    try:
        return ReplayStrategy.from_name(name, k)
    except ValueError as exc:
        raise ConfigError(f"{key}.name", str(exc)) from None


def parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    _check_keys(doc, _TOP_KEYS, "<root>")

    env_doc = _require(doc, "env")
    if not isinstance(env_doc, dict) or "name" not in env_doc:
        raise ConfigError("env", "expected an object with a 'name' field")
    env_name = env_doc["name"]
    env_params = {k: _as_int(v, f"env.{k}", minimum=1) for k, v in env_doc.items() if k != "name"}
    try:
        env = make_env(env_name, **env_params)
    except (ValueError, TypeError) as exc:
        raise ConfigError("env", str(exc)) from None

    agent_doc = doc.get("agent", {"name": "q"})
    if not isinstance(agent_doc, dict) or "name" not in agent_doc:
        raise ConfigError("agent", "expected an object with a 'name' field")
    agent_name = agent_doc["name"]
    if agent_name not in _AGENT_KEYS:
        raise ConfigError("agent.name", f"unknown agent {agent_name!r}; choose 'q' or 'tqc'")
    _check_keys(agent_doc, _AGENT_KEYS[agent_name], "agent")
    agent_params = {k: v for k, v in agent_doc.items() if k != "name"}
    try:
        if agent_name == "tqc":
            TqcParams(**agent_params)
    except ValueError as exc:
        raise ConfigError("agent", str(exc)) from None

    strat_doc = doc.get("strategy", {"name": "future", "k": 4})
    if isinstance(strat_doc, list):
        if not strat_doc:
            raise ConfigError("strategy", "strategy list must not be empty")
        strategies = tuple(
            _parse_strategy(s, f"strategy[{i}]") for i, s in enumerate(strat_doc)
        )
        if len(set(strategies)) != len(strategies):
            raise ConfigError("strategy", "duplicate strategies in sweep list")
    else:
        strategies = (_parse_strategy(strat_doc, "strategy"),)

    eps_r = None
    if "eps_r" in doc:
        eps_r = _as_number(doc["eps_r"], "eps_r")
        if eps_r <= 0:
            raise ConfigError("eps_r", f"must be positive, got {eps_r}")

    gamma = _as_number(doc.get("gamma", 0.99), "gamma")
    if not 0.0 < gamma < 1.0:
        raise ConfigError("gamma", f"must lie in (0, 1), got {gamma}")

    total = _as_int(_require(doc, "total_env_steps"), "total_env_steps", minimum=0)
    eval_every = _as_int(doc.get("eval_every", 1000), "eval_every", minimum=1)
    if total > 0 and eval_every > total:
        raise ConfigError("eval_every", f"must be <= total_env_steps ({total}), got {eval_every}")
    eval_episodes = _as_int(doc.get("eval_episodes", 50), "eval_episodes", minimum=1)
    updates_per_step = _as_int(doc.get("updates_per_step", 1), "updates_per_step", minimum=1)
    batch_size = _as_int(doc.get("batch_size", 64), "batch_size", minimum=1)
    buffer_capacity = _as_int(doc.get("buffer_capacity", 1_000_000), "buffer_capacity", minimum=1)

    explore_doc = doc.get("exploration", {})
    if not isinstance(explore_doc, dict):
        raise ConfigError("exploration", f"expected an object, got {explore_doc!r}")
    _check_keys(explore_doc, {"eps_start", "eps_end", "decay_steps"}, "exploration")
    try:
        exploration = ExplorationSchedule(
            eps_start=_as_number(explore_doc.get("eps_start", 1.0), "exploration.eps_start"),
            eps_end=_as_number(explore_doc.get("eps_end", 0.05), "exploration.eps_end"),
            decay_steps=_as_int(
                explore_doc.get("decay_steps", max(total // 2, 1)),
                "exploration.decay_steps",
                minimum=1,
            ),
        )
    except ValueError as exc:
        raise ConfigError("exploration", str(exc)) from None

    seeds_doc = doc.get("seeds", [0])
    if not isinstance(seeds_doc, list) or not seeds_doc:
        raise ConfigError("seeds", "expected a non-empty list of integers")
    seeds = tuple(_as_int(s, f"seeds[{i}]", minimum=0) for i, s in enumerate(seeds_doc))

    summary_threshold = _as_number(doc.get("summary_threshold", 0.8), "summary_threshold")
    if not 0.0 < summary_threshold <= 1.0:
        raise ConfigError("summary_threshold", f"must lie in (0, 1], got {summary_threshold}")

    probe = None
    if "probe" in doc:
        probe = _parse_probe(doc["probe"], env, total)

    return ExperimentConfig(
        env_name=env_name,
        env_params=env_params,
        agent_name=agent_name,
        agent_params=agent_params,
        strategies=strategies,
        eps_r=eps_r,
        gamma=gamma,
        total_env_steps=total,
        eval_every=eval_every,
        eval_episodes=eval_episodes,
        updates_per_step=updates_per_step,
        batch_size=batch_size,
        exploration=exploration,
        buffer_capacity=buffer_capacity,
        seeds=seeds,
        summary_threshold=summary_threshold,
        probe=probe,
    )


def _parse_probe(doc, env: GoalEnv, total: int) -> ProbeConfig:
    if not isinstance(doc, dict):
        raise ConfigError("probe", f"expected an object, got {doc!r}")
    _check_keys(doc, {"goal", "probe_states", "snapshot_every"}, "probe")
    try:
        goal = env.goal_from_json(_require(doc, "goal"))
    except (ValueError, TypeError, IndexError) as exc:
        raise ConfigError("probe.goal", str(exc)) from None
    states_doc = _require(doc, "probe_states")
    if not isinstance(states_doc, list) or not states_doc:
        raise ConfigError("probe.probe_states", "expected a non-empty list of states")
    states = []
    for i, s in enumerate(states_doc):
        try:
            states.append(env.state_from_json(s))
        except (ValueError, TypeError, IndexError) as exc:
            raise ConfigError(f"probe.probe_states[{i}]", str(exc)) from None
    snapshot_every = _as_int(
        doc.get("snapshot_every", max(total // 10, 1)), "probe.snapshot_every", minimum=1
    )
    return ProbeConfig(goal=goal, probe_states=tuple(states), snapshot_every=snapshot_every)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError("<config>", f"file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<config>", f"invalid JSON in {path}: {exc}") from None
    return parse_config(doc)


def run_config_digest(cfg: ExperimentConfig, strategy: ReplayStrategy) -> str:
    """Stable short hash of everything that shapes a single run except the seed."""
    payload = {
        "env": {"name": cfg.env_name, **cfg.env_params},
        "agent": {"name": cfg.agent_name, **cfg.agent_params},
        "strategy": {"name": strategy.kind.value, "k": strategy.k},
        "eps_r": cfg.eps_r,
        "gamma": cfg.gamma,
        "total_env_steps": cfg.total_env_steps,
        "eval_every": cfg.eval_every,
        "eval_episodes": cfg.eval_episodes,
        "updates_per_step": cfg.updates_per_step,
        "batch_size": cfg.batch_size,
        "exploration": {
            "eps_start": cfg.exploration.eps_start,
            "eps_end": cfg.exploration.eps_end,
            "decay_steps": cfg.exploration.decay_steps,
        },
        "buffer_capacity": cfg.buffer_capacity,
    }
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:12]
