"""Infinitely-many-armed bandits: regular reservoirs and the SiRI scheme.

The reservoir hands out fresh arms whose means obey a beta-regular upper
tail; the algorithm draws a budget-dependent number of arms, then doubles
pulls on the UCB leader and finally recommends the most pulled arm.
"""

import math
from dataclasses import dataclass

import numpy as np

from banditbench.core import ConfigurationError


class Reservoir:
    """Sampler of (true mean, bounded sample distribution) pairs."""

    def __init__(self, sample_mean, sample_value, mu_star, sample_bound):
        self._sample_mean = sample_mean
        self._sample_value = sample_value
        self.mu_star = float(mu_star)
        self.sample_bound = float(sample_bound)  # |X| <= this

    def new_arm(self, rng):
        return self._sample_mean(rng)

    def pull(self, mean, rng):
        return self._sample_value(mean, rng)


def canonical_reservoir(beta, mu_star=0.0, noise_halfwidth=0.1):
    """Means mu_star - U^(1/beta) with U uniform(0, 1): the tail law
    P(mu > mu_star - eps) = eps^beta holds exactly for eps <= 1.

    Arm samples are the mean plus uniform noise on [-noise_halfwidth,
    noise_halfwidth].
    """
    if beta <= 0:
        raise ConfigurationError("beta must be positive")

    def sample_mean(rng):
        return mu_star - rng.random() ** (1.0 / beta)

    def sample_value(mean, rng):
        if noise_halfwidth == 0.0:
            return mean
        return mean + rng.uniform(-noise_halfwidth, noise_halfwidth)

    bound = abs(mu_star) + 1.0 + noise_halfwidth
    return Reservoir(sample_mean, sample_value, mu_star, bound)


def point_mass_reservoir(mu, noise_halfwidth=0.0):
    """Every arm has the same mean (degenerate test instance)."""
    def sample_value(mean, rng):
        if noise_halfwidth == 0.0:
            return mean
        return mean + rng.uniform(-noise_halfwidth, noise_halfwidth)

    return Reservoir(lambda rng: mu, sample_value, mu, abs(mu) + noise_halfwidth)


def two_arm_reservoir(means=(1.0, 0.0)):
    """Alternates deterministically between two noiseless means."""
    state = {"next": 0}

    def sample_mean(rng):
        mean = means[state["next"] % len(means)]
        state["next"] += 1
        return mean

    return Reservoir(sample_mean, lambda mean, rng: mean, max(means), max(abs(m) for m in means))


@dataclass(frozen=True)
class SiriConfig:
    beta: float
    sample_bound: float = 1.0   # the C constant bounding |samples|
    delta: float = 0.1
    init_constant: float = 0.25  # the small constant A
    horizon: int = 1000

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ConfigurationError("delta must lie in (0, 1)")
        if self.beta <= 0 or self.init_constant <= 0:
            raise ConfigurationError("beta and the init constant must be positive")


def siri_bar_t(horizon, beta, init_constant):
    """Number of arms drawn from the reservoir: ceil(A(T) T^(b/2)),
    b = min(beta, 2), A(T) = A, A/log^2 T, or A/log T by regime."""
    if horizon < 2:
        raise ConfigurationError("horizon must be >= 2")
    b = min(beta, 2.0)
    if beta < 2.0:
        a_t = init_constant
    elif beta == 2.0:
        a_t = init_constant / math.log(horizon) ** 2
    else:
        a_t = init_constant / math.log(horizon)
    return max(1, math.ceil(a_t * horizon ** (b / 2.0)))


def siri_b_value(mean, pulls, sample_bound, delta, bar_t_exponent, b):
    """B = mean + 2 sqrt((C/n) log(2^(2 tbar/b)/(n delta))) + (2C/n) log(...).

    The log argument can drop below 1 for heavily pulled arms; the log is
    clamped at 0, leaving B = mean (exhausted confidence).
    """
    if pulls < 1:
        raise ConfigurationError("b-value needs at least one pull")
    log_arg = 2.0 ** (2.0 * bar_t_exponent / b) / (pulls * delta)
    log_term = max(math.log(log_arg), 0.0)
    c = sample_bound
    return mean + 2.0 * math.sqrt(c / pulls * log_term) + 2.0 * c / pulls * log_term


@dataclass
class SiriResult:
    recommended: int
    recommended_mean: float
    simple_regret: float
    pulls: np.ndarray
    arm_means: np.ndarray
    total_pulls: int
    batches: list  # (arm, pulls) in execution order; starts with the init pass


def siri_run(reservoir, config, rng):
    """Draw bar_T arms, pull each once, then repeatedly double the pulls of
    the arm with the best B-value; recommend the most pulled arm.

    The final doubling batch is truncated at the budget.  Simple regret is
    measured against the reservoir's right end point.
    """
    horizon = int(config.horizon)
    bar_t = siri_bar_t(horizon, config.beta, config.init_constant)
    if horizon < bar_t:
        raise ConfigurationError(f"budget {horizon} cannot initialize {bar_t} arms")
    b = min(config.beta, 2.0)
    bar_t_exponent = math.floor(math.log2(bar_t))
    means = np.array([reservoir.new_arm(rng) for _ in range(bar_t)])
    sums = np.zeros(bar_t)
    pulls = np.zeros(bar_t, dtype=int)
    batches = []
    for k in range(bar_t):
        sums[k] += reservoir.pull(means[k], rng)
        pulls[k] += 1
        batches.append((k, 1))
    t = bar_t
    while t < horizon:
        b_values = np.array(
            [
                siri_b_value(sums[k] / pulls[k], int(pulls[k]), config.sample_bound,
                             config.delta, bar_t_exponent, b)
                for k in range(bar_t)
            ]
        )
        k_best = int(np.argmax(b_values))
        batch = min(int(pulls[k_best]), horizon - t)
        for _ in range(batch):
            sums[k_best] += reservoir.pull(means[k_best], rng)
        pulls[k_best] += batch
        t += batch
        batches.append((k_best, batch))
    recommended = int(np.argmax(pulls))
    return SiriResult(
        recommended=recommended,
        recommended_mean=float(means[recommended]),
        simple_regret=float(reservoir.mu_star - means[recommended]),
        pulls=pulls,
        arm_means=means,
        total_pulls=int(pulls.sum()),
        batches=batches,
    )
