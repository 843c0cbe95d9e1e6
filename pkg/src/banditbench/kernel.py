"""Kernelized UCB via dual ridge regression.

Prediction mu = k_x^T (K + gamma I)^-1 y and width
sigma = gamma^{-1/2} sqrt(k(x,x) - k_x^T (K + gamma I)^-1 k_x); the linear
kernel reproduces primal ridge UCB exactly.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from banditbench.core import (
    ConfigurationError,
    Feedback,
    Policy,
    Selection,
    StochasticRewardEnvironment,
)

REFACTOR_EVERY = 256
WIDTH_CLAMP = -1e-10


@dataclass(frozen=True)
class KernelFn:
    """One of the supported kernels: linear, RBF(sigma), polynomial(p)."""

    kind: str = "linear"
    sigma: float = 1.0
    degree: int = 2

    def __post_init__(self):
        if self.kind not in ("linear", "rbf", "polynomial"):
            raise ConfigurationError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and self.sigma <= 0:
            raise ConfigurationError("rbf kernel needs sigma > 0")

    def __call__(self, X, Y):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if self.kind == "linear":
            return X @ Y.T
        if self.kind == "polynomial":
            return (X @ Y.T + 1.0) ** self.degree
        sq = ((X[:, None, :] - Y[None, :, :]) ** 2).sum(axis=2)
        return np.exp(-sq / (2.0 * self.sigma**2))


class KernelState:
    """Observed contexts, rewards, and a cached Cholesky of (K + gamma I).

    The factorization grows by a bordered update each round and is rebuilt
    from scratch every REFACTOR_EVERY rounds to keep residuals bounded.
    When a bound L on the reward function's norm is known, setting gamma
    on the order of 1/L improves the regret scaling; the default is 1.0.
    """

    def __init__(self, kernel, gamma=1.0):
        if gamma <= 0:
            raise ConfigurationError("regularizer gamma must be positive")
        self.kernel = kernel
        self.gamma = float(gamma)
        self.contexts = []
        self.rewards = []
        self._chol = np.zeros((0, 0))

    @property
    def t(self):
        return len(self.contexts)

    @property
    def K(self):
        if not self.contexts:
            return np.zeros((0, 0))
        X = np.array(self.contexts)
        return self.kernel(X, X)

    def add(self, x, reward):
        x = np.asarray(x, dtype=float)
        if self.contexts:
            k_new = self.kernel(np.array(self.contexts), x[None, :])[:, 0]
        else:
            k_new = np.zeros(0)
        diag = float(self.kernel(x[None, :], x[None, :])[0, 0]) + self.gamma
        self.contexts.append(x)
        self.rewards.append(float(reward))
        if self.t % REFACTOR_EVERY == 0:
            self._refactor()
            return
        n = self._chol.shape[0]
        new = np.zeros((n + 1, n + 1))
        new[:n, :n] = self._chol
        if n:
            l = solve_triangular(self._chol, k_new, lower=True)
            new[n, :n] = l
            rad = diag - l @ l
        else:
            rad = diag
        if rad <= 0:  # numerical breakdown; rebuild from scratch
            self._refactor()
            return
        new[n, n] = math.sqrt(rad)
        self._chol = new

    def _refactor(self):
        A = self.K + self.gamma * np.eye(self.t)
        self._chol = np.linalg.cholesky(A)

    def solve(self, rhs):
        """(K + gamma I)^-1 rhs via the cached factorization."""
        y = solve_triangular(self._chol, np.asarray(rhs, dtype=float), lower=True)
        return solve_triangular(self._chol.T, y, lower=False)


def kernel_predict(state, x):
    """Dual ridge prediction; 0 on an empty state."""
    if state.t == 0:
        return 0.0
    X = np.array(state.contexts)
    k_x = state.kernel(X, np.asarray(x, dtype=float)[None, :])[:, 0]
    return float(k_x @ state.solve(np.array(state.rewards)))


def kernel_width(state, x):
    """Kernelized confidence width (nonnegative; tiny negatives clamped)."""
    x = np.asarray(x, dtype=float)
    kxx = float(state.kernel(x[None, :], x[None, :])[0, 0])
    if state.t == 0:
        rad = kxx
    else:
        X = np.array(state.contexts)
        k_x = state.kernel(X, x[None, :])[:, 0]
        rad = kxx - float(k_x @ state.solve(k_x))
    if rad < WIDTH_CLAMP:
        raise ArithmeticError(f"width radicand {rad} below clamp tolerance")
    return math.sqrt(max(rad, 0.0)) / math.sqrt(state.gamma)


def kernel_ucb_select(state, arms, eta):
    """argmax of prediction + eta * width over arm contexts; ties -> lowest."""
    if eta < 0:
        raise ConfigurationError("exploration parameter eta must be >= 0")
    scores = [kernel_predict(state, x) + eta * kernel_width(state, x) for x in arms]
    return int(np.argmax(scores))


def effective_dim_tilde(eigenvalues_desc, gamma, horizon):
    """Smallest j with j * gamma * ln T >= sum_{i>j}(lambda_i - gamma).

    `eigenvalues_desc` are the eigenvalues of the regularized covariance in
    decreasing order; the per-term -gamma removes the regularizer's shift,
    so the tail sum vanishes once the data's span is exhausted.  A negative
    tail (numerical noise past the rank) counts as satisfying.
    """
    lam = np.asarray(eigenvalues_desc, dtype=float)
    if np.any(np.diff(lam) > 1e-12):
        raise ConfigurationError("eigenvalues must be in decreasing order")
    log_t = math.log(max(horizon, 2))
    tail = np.concatenate([np.cumsum((lam - gamma)[::-1])[::-1], [0.0]])
    for j in range(len(lam) + 1):
        if j * gamma * log_t >= tail[j]:
            return j
    return len(lam)


def elimination_eta_preset(horizon, n_arms, delta):
    """eta = sqrt(2 ln(2 T N / delta)): the elimination-style preset."""
    return math.sqrt(2.0 * math.log(2.0 * horizon * n_arms / delta))


class KernelUCBPolicy(Policy):
    """Dual ridge UCB over a fixed finite set of arm contexts."""

    def __init__(self, arm_contexts, kernel=None, gamma=1.0, eta=1.0):
        self.arms = np.asarray(arm_contexts, dtype=float)
        self.kernel = kernel or KernelFn("linear")
        self.state = KernelState(self.kernel, gamma=gamma)
        self.eta = float(eta)
        self.action_space = f"arms:{len(self.arms)}"

    def select(self, t, rng):
        return Selection(action=kernel_ucb_select(self.state, self.arms, self.eta))

    def update(self, t, action, feedback, rng):
        self.state.add(self.arms[action], feedback.value)


class LinearRewardEnv(StochasticRewardEnvironment):
    """Rewards x_a . theta + noise over fixed arm contexts.

    One noise draw per round, independent of the action, so paired
    policies under a shared seed see identical noise.
    """

    def __init__(self, arm_contexts, theta, noise_scale=0.1):
        self.arms = np.asarray(arm_contexts, dtype=float)
        self.theta = np.asarray(theta, dtype=float)
        self.noise_scale = float(noise_scale)
        self.action_space = f"arms:{len(self.arms)}"

    @property
    def means(self):
        return self.arms @ self.theta

    def step(self, t, action, rng):
        eps = self.noise_scale * rng.standard_normal()
        return Feedback(value=float(self.means[action] + eps))


def read_context_csv(path):
    """Arm contexts as a CSV matrix: rows = arms, columns = features."""
    return np.loadtxt(path, delimiter=",", ndmin=2)
