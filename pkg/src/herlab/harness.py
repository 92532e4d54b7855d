"""Seeded end-to-end experiment driver and metric aggregation.

A run is a pure function of (config, seed): the master seed is split into
labeled child generators (env resets, exploration, relabel draws, minibatch
sampling, evaluation resets) so that, e.g., changing the number of
evaluation episodes cannot perturb the training trajectory.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path
from statistics import mean

import numpy as np

from .agents import epsilon_greedy, make_agent
from .config import ExperimentConfig, run_config_digest
from .core import Episode, Transition, binary_reward, is_success
from .envs import GoalEnv
from .probe import ProbeSnapshot, probe_q
from .relabel import ReplayBuffer, ReplayStrategy, sample_minibatches, store_episode

_RNG_LABELS = {"env": 0, "explore": 1, "relabel": 2, "batch": 3, "eval": 4}


def child_rng(seed: int, label: str) -> np.random.Generator:
    """Independent, reproducible sub-stream for one source of randomness."""
    return np.random.default_rng([_RNG_LABELS[label], int(seed)])


@dataclass
class RunRecord:
    """Evaluation curve of one (config, seed) run.

    Everything except ``wall_time`` is a deterministic function of the
    config and seed.
    """

    config_hash: str
    seed: int
    curve: list[tuple[int, float, float]]  # (env_step, success_rate, mean_return)
    wall_time: float


@dataclass(frozen=True)
class SummaryRow:
    strategy: str
    max_sr_mean: float
    max_sr_std: float
    steps_to_threshold_median: int | None
    threshold: float
    n_seeds: int


def success_rate(eval_outcomes: list[bool]) -> float:
    """Fraction of evaluation episodes that achieved their goal."""
    if not eval_outcomes:
        raise ValueError("success_rate needs at least one evaluation outcome")
    return sum(eval_outcomes) / len(eval_outcomes)


def _greedy_episode(env: GoalEnv, agent, eps_r: float, rng: np.random.Generator) -> tuple[bool, float]:
    """Run one greedy evaluation episode; success means the goal is achieved
    at least once, counting the initial state."""
    state, goal = env.reset(rng)
    if is_success(env.distance(env.achieved_goal(state), goal), eps_r):
        return True, 0.0
    ret = 0.0
    for _ in range(env.spec.horizon):
        action = agent.greedy_action(state, goal)
        state = env.step(state, action)
        d = env.distance(env.achieved_goal(state), goal)
        r = binary_reward(d, eps_r)
        ret += r
        if r == 0.0:
            return True, ret
    return False, ret


def evaluate(env: GoalEnv, agent, eps_r: float, episodes: int, rng: np.random.Generator) -> tuple[float, float]:
    outcomes = []
    returns = []
    for _ in range(episodes):
        ok, ret = _greedy_episode(env, agent, eps_r, rng)
        outcomes.append(ok)
        returns.append(ret)
    return success_rate(outcomes), mean(returns)


def run_experiment(
    cfg: ExperimentConfig,
    seed: int,
    strategy: ReplayStrategy | None = None,
    with_probe: bool = False,
    capture: dict | None = None,
) -> tuple[RunRecord, list[ProbeSnapshot]]:
    """Train one agent under one strategy and record the evaluation curve.

    Episodes run to success or the horizon; each finished episode is stored
    (with relabeled copies) and followed by updates_per_step optimizer steps
    per collected env step. Evaluation points land exactly on the
    eval_every grid so curves from different seeds align.
    """
    if strategy is None:
        if len(cfg.strategies) != 1:
            raise ValueError("config lists several strategies; pass one explicitly")
        strategy = cfg.strategies[0]
    if with_probe and cfg.probe is None:
        raise ValueError("config has no probe section")

    started = time.perf_counter()
    env = cfg.make_env()
    eps_r = cfg.resolve_eps_r(env)
    agent = make_agent(cfg.agent_name, env.spec.action_count, **cfg.agent_params)
    buffer = ReplayBuffer(cfg.buffer_capacity)
    if capture is not None:
        # expose internals to callers that inspect tables after training
        capture.update(env=env, agent=agent, buffer=buffer)
    rng_env = child_rng(seed, "env")
    rng_explore = child_rng(seed, "explore")
    rng_relabel = child_rng(seed, "relabel")
    rng_batch = child_rng(seed, "batch")
    rng_eval = child_rng(seed, "eval")

    curve: list[tuple[int, float, float]] = []
    snapshots: list[ProbeSnapshot] = []

    def eval_point(step: int) -> None:
        sr, ret = evaluate(env, agent, eps_r, cfg.eval_episodes, rng_eval)
        curve.append((step, sr, ret))

    eval_point(0)
    next_eval = cfg.eval_every
    if with_probe:
        snapshots.append(probe_q(agent, env, cfg.probe, 0))
        next_probe = cfg.probe.snapshot_every

    env_step = 0
    episode_id = 0
    horizon = env.spec.horizon
    gamma = cfg.gamma
    total = cfg.total_env_steps
    while env_step < total:
        state, goal = env.reset(rng_env)
        transitions: list[Transition] = []
        for t in range(horizon):
            action = epsilon_greedy(agent, state, goal, cfg.exploration, env_step, rng_explore)
            next_state = env.step(state, action)
            d = env.distance(env.achieved_goal(next_state), goal)
            reward = binary_reward(d, eps_r)
            success = reward == 0.0
            transitions.append(
                Transition(state, action, next_state, goal, reward, success, success, episode_id, t)
            )
            env_step += 1
            state = next_state
            if success:
                break
        episode = Episode(transitions, goal, horizon)
        store_episode(buffer, episode, strategy, env, eps_r, rng_relabel)
        n_updates = cfg.updates_per_step * len(transitions)
        update = agent.update
        for batch in sample_minibatches(buffer, cfg.batch_size, n_updates, rng_batch):
            for tr in batch:
                update(tr, gamma)
        while next_eval <= env_step and next_eval <= total:
            eval_point(next_eval)
            next_eval += cfg.eval_every
        if with_probe:
            while next_probe <= env_step and next_probe <= total:
                snapshots.append(probe_q(agent, env, cfg.probe, next_probe))
                next_probe += cfg.probe.snapshot_every
        episode_id += 1

    record = RunRecord(
        config_hash=run_config_digest(cfg, strategy),
        seed=seed,
        curve=curve,
        wall_time=time.perf_counter() - started,
    )
    return record, snapshots


def steps_to_threshold(curve: list[tuple[int, float, float]], threshold: float) -> int | None:
    """First env step whose evaluated success rate reaches the threshold."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    for step, sr, _ in curve:
        if sr >= threshold:
            return step
    return None


def summarize(runs: list[RunRecord], threshold: float, strategy_label: str = "") -> SummaryRow:
    """Aggregate max success rate and sample efficiency across seeds.

    Runs that never reach the threshold count as +inf; the reported median
    is the lower median, so it is absent exactly when more than half of the
    seeds never got there.
    """
    if not runs:
        raise ValueError("summarize needs at least one run")
    hashes = {r.config_hash for r in runs}
    if len(hashes) != 1:
        raise ValueError(f"runs mix different configs: {sorted(hashes)}")
    max_srs = [max(sr for _, sr, _ in r.curve) for r in runs]
    n = len(runs)
    sr_mean = mean(max_srs)
    sr_std = float(np.std(max_srs, ddof=1)) if n > 1 else 0.0
    steps = sorted(
        float("inf") if (s := steps_to_threshold(r.curve, threshold)) is None else s
        for r in runs
    )
    lower_median = steps[(n - 1) // 2]
    median = None if lower_median == float("inf") else int(lower_median)
    return SummaryRow(
        strategy=strategy_label,
        max_sr_mean=sr_mean,
        max_sr_std=sr_std,
        steps_to_threshold_median=median,
        threshold=threshold,
        n_seeds=n,
    )


RUN_CSV_HEADER = "env_step,success_rate,mean_return"
SUMMARY_CSV_HEADER = "strategy,env,agent,max_sr_mean,max_sr_std,steps_to_thr_median,threshold,n_seeds"


def write_run_csv(record: RunRecord, path: str | Path) -> None:
    lines = [RUN_CSV_HEADER]
    for step, sr, ret in record.curve:
        lines.append(f"{step},{sr:.6f},{ret:.6f}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_run_csv(path: str | Path) -> list[tuple[int, float, float]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != RUN_CSV_HEADER:
            raise ValueError(f"unexpected run CSV header in {path}: {header}")
        return [(int(row[0]), float(row[1]), float(row[2])) for row in reader]


def write_summary_csv(rows: list[dict], path: str | Path) -> None:
    """Rows carry strategy/env/agent labels plus a SummaryRow."""
    lines = [SUMMARY_CSV_HEADER]
    for row in rows:
        s: SummaryRow = row["summary"]
        median = "" if s.steps_to_threshold_median is None else str(s.steps_to_threshold_median)
        lines.append(
            f"{row['strategy']},{row['env']},{row['agent']},"
            f"{s.max_sr_mean:.6f},{s.max_sr_std:.6f},{median},{s.threshold:.6f},{s.n_seeds}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
