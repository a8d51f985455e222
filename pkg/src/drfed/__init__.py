"""Decentralised federated multi-armed bandits over random communication graphs."""

from .agent import Agent, BonusConfig, Message, ucb_bonus
from .graphs import Graph, generate_er, is_connected, sample_uniform_connected
from .rewards import MeanMatrix, RewardModel, build_heterogeneous_means, global_stats
from .simulator import (
    EventAReport,
    ExperimentConfig,
    RoundRecord,
    Trajectory,
    communication_cost,
    event_a_diagnostics,
    local_ucb_baseline,
    pseudo_regret,
    run_experiment,
)
from .theory import burn_in_length_bound

__version__ = "0.1.0"
