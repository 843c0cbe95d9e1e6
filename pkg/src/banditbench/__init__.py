"""Bandit algorithms for structured action spaces.

Subpackages cover adversarial graph bandits with side observations,
spectral bandits on graph Laplacians, kernelized UCB, polymatroid
semi-bandits, hierarchical black-box optimization, infinitely-many-armed
bandits, and local-influence revelation bandits, together with a seeded
experiment harness (`banditbench.cli`).
"""

from banditbench.core import (
    ConfigurationError,
    InvariantViolation,
    ProtocolViolation,
    RegretTrace,
    RunConfig,
    hindsight_regret,
    pseudo_regret,
    run_episode,
)
from banditbench.rng import RngStream

__all__ = [
    "ConfigurationError",
    "InvariantViolation",
    "ProtocolViolation",
    "RegretTrace",
    "RngStream",
    "RunConfig",
    "hindsight_regret",
    "pseudo_regret",
    "run_episode",
]

__version__ = "0.1.0"
