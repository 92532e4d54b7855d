"""Goal-conditioned RL lab: hindsight relabeling strategies and tabular
truncated-quantile critics benchmarked on small deterministic multi-goal
environments."""

from .core import (
    Episode,
    RewardParams,
    Transition,
    binary_reward,
    is_success,
    validate_episode,
    validate_transition,
)
from .envs import BitFlipEnv, EnvSpec, GoalEnv, GridPushEnv, LineReachEnv, make_env
from .relabel import (
    ReplayBuffer,
    ReplayStrategy,
    StrategyKind,
    relabel_transition,
    sample_minibatch,
    select_virtual_goals,
    store_episode,
)
from .agents import (
    ExplorationSchedule,
    TabularQAgent,
    TqcParams,
    TruncatedQuantileAgent,
    epsilon_greedy,
    make_agent,
    quantile_huber_loss,
    quantile_midpoints,
    td_target_atoms,
    truncated_atoms,
)
from .config import ConfigError, ExperimentConfig, ProbeConfig, load_config, parse_config
from .harness import (
    RunRecord,
    SummaryRow,
    run_experiment,
    steps_to_threshold,
    success_rate,
    summarize,
)
from .probe import ProbeSnapshot, emit_probe_csv, probe_q

__version__ = "0.1.0"
