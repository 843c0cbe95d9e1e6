"""Spectral bandits: smooth graph rewards, effective dimensions, policies.

Arms are graph nodes; features are rows of the Laplacian eigenbasis Q and
the unknown weight vector is penalized by the shifted spectrum
``Lambda = Lambda_L + lam * I`` (default lam = 0.01).
"""

import heapq
import math

import numpy as np

from banditbench.core import (
    ConfigurationError,
    InvariantViolation,
    Policy,
    RegretTrace,
    Selection,
    StochasticRewardEnvironment,
    Feedback,
)
from banditbench.graph import WeightedDigraph, eigendecompose, laplacian

REFACTOR_EVERY = 512


def smoothness(f, L):
    """Quadratic form f^T L f; equals sum_i lambda_i alpha_i^2 for alpha = Q^T f."""
    f = np.asarray(f, dtype=float)
    L = np.asarray(L, dtype=float)
    if f.shape[0] != L.shape[0]:
        raise ConfigurationError("dimension mismatch between f and L")
    return float(f @ L @ f)


def effective_dimension(eigenvalues, horizon, lam):
    """Largest d with (d - 1) * lambda_d <= T / log(1 + T/lam).

    `eigenvalues` are the regularized (shifted) eigenvalues, ascending.
    d = 1 always qualifies, so the result lies in [1, N].
    """
    lam_reg = np.asarray(eigenvalues, dtype=float)
    if np.any(np.diff(lam_reg) < 0):
        raise ConfigurationError("eigenvalues must be ascending")
    bound = horizon / math.log1p(horizon / lam)
    lhs = np.arange(len(lam_reg)) * lam_reg  # (d-1) * lambda_d at index d-1
    ok = np.nonzero(lhs <= bound)[0]
    return int(ok[-1] + 1) if ok.size else 1


def effective_dimension_new(eigenvalues, horizon, lam):
    """max over integer budgets t_i (sum = T) of log prod(1 + t_i/lam_i),
    divided by log(1 + T/lam).

    Computed by greedy incremental allocation: one unit at a time to the
    index with the largest marginal gain log(1 + (t+1)/lam) - log(1 + t/lam)
    = log((lam + t + 1)/(lam + t)), i.e. always the smallest lam_i + t_i.
    Each term is concave in t_i, so the greedy allocation is exact.
    """
    lam_reg = np.asarray(eigenvalues, dtype=float)
    if np.any(lam_reg <= 0):
        raise ConfigurationError("regularized eigenvalues must be positive")
    heap = [(lam_i, i) for i, lam_i in enumerate(lam_reg)]
    heapq.heapify(heap)
    counts = np.zeros(len(lam_reg), dtype=int)
    for _ in range(int(horizon)):
        level, i = heapq.heappop(heap)
        counts[i] += 1
        heapq.heappush(heap, (level + 1.0, i))
    numerator = float(np.sum(np.log1p(counts / lam_reg)))
    return numerator / math.log1p(horizon / lam)


def lower_bound_graph(blocks, block_size, eps):
    """`blocks` complete unit-weight blocks of `block_size` nodes, weight
    eps between blocks."""
    if blocks < 1 or block_size < 1:
        raise ConfigurationError("blocks and block_size must be >= 1")
    if not 0.0 < eps < 1.0:
        raise ConfigurationError("inter-block weight must lie in (0, 1)")
    n = blocks * block_size
    arcs = []
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            w = 1.0 if u // block_size == v // block_size else eps
            arcs.append((u, v, w))
    return WeightedDigraph(n, arcs, directed=False)


class SpectralModel:
    """Shared geometry for the spectral policies.

    Holds the spectrum, the regularizer lam, the smoothness bound C on
    ||alpha||_Lambda, and the sub-Gaussian noise scale R.  Features are
    rows of Q (unit norm since Q is orthonormal).
    """

    def __init__(self, spectrum, lam=0.01, C=1.0, R=0.5):
        if lam <= 0:
            raise ConfigurationError("regularizer lam must be positive")
        self.spectrum = spectrum
        self.lam = float(lam)
        self.C = float(C)
        self.R = float(R)
        self.lam_reg = spectrum.eigenvalues + lam
        self.features = np.array(spectrum.Q)  # row v = x_v

    @classmethod
    def from_graph(cls, g, lam=0.01, C=1.0, R=0.5):
        return cls(eigendecompose(laplacian(g)), lam=lam, C=C, R=R)

    @property
    def n_arms(self):
        return self.features.shape[0]


class _RidgeState:
    """Design matrix V (= diag(lam_reg) at start), rewards b, estimate alpha.

    The inverse is maintained by Sherman-Morrison rank-one updates with a
    full refactorization every REFACTOR_EVERY rounds to cap drift.
    """

    def __init__(self, lam_reg):
        self.V = np.diag(lam_reg)
        self.V_inv = np.diag(1.0 / lam_reg)
        self.b = np.zeros(len(lam_reg))
        self.alpha = np.zeros(len(lam_reg))
        self._updates = 0

    def update(self, x, reward):
        self.V += np.outer(x, x)
        Vx = self.V_inv @ x
        self.V_inv -= np.outer(Vx, Vx) / (1.0 + x @ Vx)
        self.b += reward * x
        self._updates += 1
        if self._updates % REFACTOR_EVERY == 0:
            self.V_inv = np.linalg.inv(self.V)
        self.alpha = self.V_inv @ self.b

    def widths(self, X):
        return np.sqrt(np.einsum("ij,jk,ik->i", X, self.V_inv, X))


class SpectralUCBPolicy(Policy):
    """Penalized-least-squares UCB on the spectral basis.

    The exploration coefficient is
    ``beta_t = R sqrt(d log(1 + t/lam) + 2 log(1/delta)) + C_t`` with d the
    effective dimension at the run's horizon; ``c_schedule='log'`` swaps
    the constant C for the time-dependent log(T) variant.
    """

    def __init__(self, model, horizon, delta=0.05, c_schedule="constant"):
        if c_schedule not in ("constant", "log"):
            raise ConfigurationError("c_schedule must be 'constant' or 'log'")
        self.model = model
        self.delta = float(delta)
        self.c_schedule = c_schedule
        self.action_space = f"nodes:{model.n_arms}"
        self.horizon = int(horizon)
        self.d = effective_dimension(model.lam_reg, self.horizon, model.lam)
        self.state = _RidgeState(model.lam_reg)

    def _c_t(self, t):
        if self.c_schedule == "constant":
            return self.model.C
        return math.log(max(t, 2))

    def beta(self, t):
        m = self.model
        return m.R * math.sqrt(self.d * math.log1p(t / m.lam) + 2 * math.log(1 / self.delta)) + self._c_t(t)

    def select(self, t, rng):
        X = self.model.features
        scores = X @ self.state.alpha + self.beta(t) * self.state.widths(X)
        return Selection(action=int(np.argmax(scores)))

    def update(self, t, action, feedback, rng):
        self.state.update(self.model.features[action], feedback.value)


class SpectralTSPolicy(Policy):
    """Thompson sampling analogue: draws alpha ~ N(alpha_hat, v^2 V^-1).

    The default scale v plugs R, C, delta into the analysis constant of
    the spectral Thompson sampling regret bound; in practice that value is
    very conservative, so v is exposed in the config.
    """

    def __init__(self, model, horizon, delta=0.05, v=None):
        self.model = model
        self.horizon = int(horizon)
        self.delta = float(delta)
        self.action_space = f"nodes:{model.n_arms}"
        self.d = effective_dimension(model.lam_reg, self.horizon, model.lam)
        self.v = float(v) if v is not None else self.default_scale()
        self.state = _RidgeState(model.lam_reg)

    def default_scale(self):
        m, T, N, d = self.model, self.horizon, self.model.n_arms, self.d
        lam, delta = m.lam, self.delta
        g = math.sqrt(4 * math.log(T * N)) * (
            m.R * math.sqrt(6 * d * math.log((lam + T) / (delta * lam))) + m.C
        ) + m.R * math.sqrt(2 * d * math.log((lam + T) * T**2 / (delta * lam))) + m.C
        return g

    def select(self, t, rng):
        if self.v == 0.0:
            alpha = self.state.alpha
        else:
            root = np.linalg.cholesky(self.state.V_inv)
            alpha = self.state.alpha + self.v * root @ rng.standard_normal(len(self.state.alpha))
        return Selection(action=int(np.argmax(self.model.features @ alpha)))

    def update(self, t, action, feedback, rng):
        self.state.update(self.model.features[action], feedback.value)


class SpectralEliminatorPolicy(Policy):
    """Phased elimination with per-phase least squares.

    Phases start at t_j = 2^(j-1).  Within a phase the surviving arms are
    pulled round-robin; at a phase boundary the phase's own samples give a
    fresh penalized estimate and every arm whose upper estimate
    (x.alpha + beta ||x||_{V^-1}) falls below the best lower estimate is
    dropped.  The per-phase confidence construction is a reconstructed
    elimination rule (the source text leaves it to the cited analysis).
    """

    def __init__(self, model, horizon, beta=None, delta=0.05):
        self.model = model
        self.horizon = int(horizon)
        self.delta = float(delta)
        self.action_space = f"nodes:{model.n_arms}"
        self.beta = float(beta) if beta is not None else self.default_beta()
        self.survivors = list(range(model.n_arms))
        self._rotation = 0
        self._phase_end = 2  # phase 1 = round 1, phase j = [2^(j-1), 2^j)
        self._phase_x = []
        self._phase_r = []

    def default_beta(self):
        m, K, T = self.model, self.model.n_arms, self.horizon
        return 2 * m.R * math.sqrt(14 * math.log(2 * K * (1 + math.log2(max(T, 2))) / self.delta)) + m.C

    def select(self, t, rng):
        arm = self.survivors[self._rotation % len(self.survivors)]
        self._rotation += 1
        return Selection(action=int(arm))

    def update(self, t, action, feedback, rng):
        self._phase_x.append(self.model.features[action])
        self._phase_r.append(feedback.value)
        if t + 1 == self._phase_end:
            self._eliminate()
            self._phase_end *= 2
            self._phase_x, self._phase_r = [], []
            self._rotation = 0

    def _eliminate(self):
        X = np.array(self._phase_x)
        r = np.array(self._phase_r)
        V = np.diag(self.model.lam_reg) + X.T @ X
        alpha = np.linalg.solve(V, X.T @ r)
        V_inv = np.linalg.inv(V)
        feats = self.model.features[self.survivors]
        mu = feats @ alpha
        w = self.beta * np.sqrt(np.einsum("ij,jk,ik->i", feats, V_inv, feats))
        keep = mu + w >= np.max(mu - w)
        survivors = [s for s, k in zip(self.survivors, keep) if k]
        if not survivors:
            raise InvariantViolation("eliminator dropped every arm")
        self.survivors = survivors


class SmoothGraphRewardEnv(StochasticRewardEnvironment):
    """Node rewards f(v) + noise, with f smooth on the supplied graph.

    Noise is drawn once per round (independent of the chosen node) so that
    paired policies under a shared seed see identical noise sequences.
    """

    def __init__(self, means, noise_scale=0.5, noise="gaussian"):
        self._means = np.asarray(means, dtype=float)
        self.noise_scale = float(noise_scale)
        if noise not in ("gaussian", "uniform"):
            raise ConfigurationError("noise must be 'gaussian' or 'uniform'")
        self.noise = noise
        self.action_space = f"nodes:{len(self._means)}"

    @property
    def means(self):
        return self._means

    def step(self, t, action, rng):
        if self.noise == "gaussian":
            eps = self.noise_scale * rng.standard_normal()
        else:
            eps = rng.uniform(-self.noise_scale, self.noise_scale)
        return Feedback(value=float(self._means[action] + eps))


def block_reward_means(blocks, block_size, block_values):
    """Piecewise-constant node rewards on a lower_bound_graph layout."""
    if len(block_values) != blocks:
        raise ConfigurationError("need one value per block")
    return np.repeat(np.asarray(block_values, dtype=float), block_size)


class UCB1Policy(Policy):
    """Graph-blind UCB1 baseline; rewards assumed in a [lo, hi] range."""

    def __init__(self, n_arms, lo=0.0, hi=1.0):
        self.n_arms = int(n_arms)
        self.lo, self.hi = float(lo), float(hi)
        self.action_space = f"nodes:{n_arms}"
        self.counts = np.zeros(self.n_arms, dtype=int)
        self.sums = np.zeros(self.n_arms)

    def select(self, t, rng):
        unpulled = np.nonzero(self.counts == 0)[0]
        if unpulled.size:
            return Selection(action=int(unpulled[0]))
        scale = self.hi - self.lo
        means = (self.sums / self.counts - self.lo) / scale
        ucb = means + np.sqrt(2 * np.log(self.counts.sum()) / self.counts)
        return Selection(action=int(np.argmax(ucb)))

    def update(self, t, action, feedback, rng):
        self.counts[action] += 1
        self.sums[action] += feedback.value
