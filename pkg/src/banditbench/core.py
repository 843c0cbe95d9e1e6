"""Policy/environment contracts, regret accounting, and the episode loop.

Conventions used throughout the package:

* internal loss convention: losses live in [0, 1]; reward-formulated
  algorithms run on reward environments and their traces carry
  pseudo-regret computed from the environment's true means,
* argmax/argmin ties are always broken toward the lowest index,
* a policy that emits sampling probabilities has them validated
  (nonnegative, sum within 1e-9 of one) before any action is drawn.
"""

from dataclasses import dataclass, field

import numpy as np

PROB_TOL = 1e-9


class ConfigurationError(ValueError):
    """Incompatible or invalid run configuration."""


class InvariantViolation(RuntimeError):
    """A declared invariant failed at runtime (bug or corrupted state)."""


class ProtocolViolation(RuntimeError):
    """The environment/policy interaction broke the feedback protocol."""


def validate_probability_vector(p, n_actions=None):
    """Check nonnegativity and normalization; return the validated array."""
    p = np.asarray(p, dtype=float)
    if n_actions is not None and p.shape != (n_actions,):
        raise InvariantViolation(f"probability vector has shape {p.shape}, expected ({n_actions},)")
    if not np.all(np.isfinite(p)):
        raise InvariantViolation("probability vector has non-finite entries")
    if np.any(p < 0):
        raise InvariantViolation("probability vector has negative entries")
    s = float(p.sum())
    if abs(s - 1.0) > PROB_TOL:
        raise InvariantViolation(f"probability vector sums to {s!r}, not 1")
    return p


def validate_loss_vector(losses, n_actions=None):
    """Check that all per-action losses lie in [0, 1]."""
    losses = np.asarray(losses, dtype=float)
    if n_actions is not None and losses.shape != (n_actions,):
        raise InvariantViolation(f"loss vector has shape {losses.shape}, expected ({n_actions},)")
    if np.any(losses < 0) or np.any(losses > 1) or not np.all(np.isfinite(losses)):
        raise InvariantViolation("losses must lie in [0, 1]")
    return losses


def sample_from_probs(p, rng):
    """Draw an index from `p` by inverse CDF on a single uniform draw.

    One uniform per round keeps traces reproducible and hand-checkable.
    """
    u = rng.random()
    return int(np.searchsorted(np.cumsum(p), u, side="right").clip(0, len(p) - 1))


@dataclass(frozen=True)
class Selection:
    """A policy's per-round choice; `probs` is None for deterministic picks."""

    action: object
    probs: object = None


@dataclass
class Feedback:
    """What the environment returns after a pull.

    `value` is the incurred loss (loss environments) or the received
    reward (reward environments).  `extras` carries protocol-specific
    payloads (revealed graph, observed losses, noisy c-vector, item
    weights, ...).
    """

    value: float
    extras: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["extras"][name]
        except KeyError:
            raise AttributeError(name) from None


@dataclass(frozen=True)
class RegretTrace:
    """Per-round record of one seeded run.

    `rounds` holds (round index, chosen action, incurred loss or reward,
    cumulative regret) tuples; round indices increase strictly from 1 and
    the cumulative column is the running regret against `comparator`.
    """

    comparator: str
    rounds: tuple

    def __post_init__(self):
        for i, row in enumerate(self.rounds):
            if row[0] != i + 1:
                raise InvariantViolation("round indices must increase strictly from 1")

    @property
    def horizon(self):
        return len(self.rounds)

    @property
    def actions(self):
        return [row[1] for row in self.rounds]

    @property
    def values(self):
        return np.array([row[2] for row in self.rounds])

    @property
    def cum_regret(self):
        return np.array([row[3] for row in self.rounds])

    @property
    def final_regret(self):
        return float(self.rounds[-1][3]) if self.rounds else 0.0


@dataclass(frozen=True)
class RunConfig:
    """One experiment cell: environment, policy, horizon, seed, repetitions."""

    environment: dict
    policy: dict
    horizon: int
    seed: int
    repetitions: int = 1

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        if self.repetitions < 1:
            raise ConfigurationError("repetition count must be >= 1")


class Policy:
    """Base class for per-round policies driven by :func:`run_episode`."""

    action_space = None

    def start(self, horizon):
        """Called once before round 1; default is a no-op."""

    def select(self, t, rng):
        raise NotImplementedError

    def update(self, t, action, feedback, rng):
        raise NotImplementedError


class Environment:
    """Base class for environments driven by :func:`run_episode`."""

    action_space = None
    comparator = "best fixed action"

    def start(self, horizon, rng):
        """Called once before round 1; default is a no-op."""

    def step(self, t, action, rng):
        raise NotImplementedError

    def regret_curve(self, actions, values):
        """Cumulative regret per round, computed with the omniscient view."""
        raise NotImplementedError


class AdversarialLossEnvironment(Environment):
    """Loss environments with a full realized loss matrix.

    Subclasses append the round's loss vector to `self._loss_rows` inside
    `step`.  The trace comparator is the best single action in hindsight,
    evaluated on the running prefix, so the cumulative column is
    nonnegative in every round.
    """

    comparator = "best fixed action in hindsight"

    def __init__(self):
        self._loss_rows = []

    def start(self, horizon, rng):
        self._loss_rows = []

    @property
    def realized_losses(self):
        return np.array(self._loss_rows)

    def regret_curve(self, actions, values):
        losses = self.realized_losses
        cum = np.cumsum(losses, axis=0)
        best = cum.min(axis=1)
        return np.cumsum(values) - best


class StochasticRewardEnvironment(Environment):
    """Reward environments with declared per-action means.

    The cumulative column is running pseudo-regret against the best mean.
    """

    comparator = "best mean action (pseudo-regret)"

    @property
    def means(self):
        raise NotImplementedError

    def regret_increment(self, action):
        means = np.asarray(self.means, dtype=float)
        return float(means.max() - means[action])

    def regret_curve(self, actions, values):
        return np.cumsum([self.regret_increment(a) for a in actions])


def run_episode(policy, env, horizon, rng):
    """Run select -> feedback -> update for exactly `horizon` rounds.

    `rng` is an :class:`RngStream`; the environment and the policy draw
    from separate sub-streams so paired comparisons across policies share
    the environment's randomness.
    """
    if horizon < 1:
        raise ConfigurationError("horizon must be >= 1")
    if policy.action_space != env.action_space:
        raise ConfigurationError(
            f"action-space mismatch: policy={policy.action_space!r} env={env.action_space!r}"
        )
    rng_env = rng.stream("env")
    rng_pol = rng.stream("policy")
    env.start(horizon, rng_env)
    policy.start(horizon)
    if hasattr(policy, "initialize"):
        policy.initialize(env, rng_env)
    actions, values = [], []
    for t in range(1, horizon + 1):
        sel = policy.select(t, rng_pol)
        if sel.probs is not None:
            validate_probability_vector(sel.probs)
        fb = env.step(t, sel.action, rng_env)
        policy.update(t, sel.action, fb, rng_pol)
        actions.append(sel.action)
        values.append(float(fb.value))
    cum = env.regret_curve(actions, np.asarray(values))
    rows = tuple(
        (t + 1, actions[t], float(values[t]), float(cum[t])) for t in range(horizon)
    )
    return RegretTrace(comparator=env.comparator, rounds=rows)


def hindsight_regret(losses, picks):
    """Realized regret against the best fixed action in hindsight.

    `losses` is the full T x N loss matrix (the simulator's omniscient
    view), `picks` the chosen action indices.
    """
    losses = np.asarray(losses, dtype=float)
    picks = np.asarray(picks, dtype=int)
    incurred = losses[np.arange(len(picks)), picks].sum()
    return float(incurred - losses.sum(axis=0).min())


def pseudo_regret(means, picks):
    """Pseudo-regret of `picks` in a stochastic environment with `means`."""
    means = np.asarray(means, dtype=float)
    picks = np.asarray(picks, dtype=int)
    return float(len(picks) * means.max() - means[picks].sum())
