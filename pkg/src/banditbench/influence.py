"""Local-influence revelation bandits.

A chosen node reveals the random set of nodes it influenced this round.
Influence (row sums) drives the reward; dual influence (column sums) is
what uniform probing estimates quickly, and the two-phase scheme cuts the
candidate set down to the detectable dimension before running a bandit.
"""

import math
from dataclasses import dataclass

import numpy as np

from banditbench.core import ConfigurationError


class InfluenceMatrix:
    """N x N matrix of influence probabilities p_(i,j) in [0, 1]."""

    def __init__(self, probs):
        P = np.asarray(probs, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ConfigurationError("influence matrix must be square")
        if np.any(P < 0) or np.any(P > 1):
            raise ConfigurationError("influence probabilities must lie in [0, 1]")
        self.P = P

    @property
    def n(self):
        return self.P.shape[0]

    @property
    def influence(self):
        """r_k = sum_j p_(k,j): expected size of the revealed set."""
        return self.P.sum(axis=1)

    @property
    def dual_influence(self):
        """r_k° = sum_j p_(j,k): expected number of influencers of k."""
        return self.P.sum(axis=0)

    @property
    def influential_influenced_gap(self):
        """eps* = r* - max influence among the most influenced nodes."""
        r = self.influence
        dual = self.dual_influence
        most_influenced = np.nonzero(dual >= dual.max() - 1e-12)[0]
        return float(r.max() - r[most_influenced].max())

    @classmethod
    def from_csv(cls, path):
        return cls(np.loadtxt(path, delimiter=",", ndmin=2))

    @classmethod
    def from_edge_list(cls, path, n=None):
        """Graph edge-list file with arc weights read as probabilities."""
        from banditbench.graph import read_edge_list

        return cls(np.array(read_edge_list(path, n=n).weights))

    @classmethod
    def symmetric_star(cls, n, p=0.9, hub=0):
        """Hub influences every leaf and vice versa with probability p."""
        P = np.zeros((n, n))
        P[hub, :] = p
        P[:, hub] = p
        P[hub, hub] = 0.0
        return cls(P)


def sample_influence(M, node, rng):
    """Set of nodes influenced by `node`: j included w.p. p_(node,j)."""
    P = M.P if isinstance(M, InfluenceMatrix) else np.asarray(M)
    row = P[node]
    return set(np.nonzero(rng.random(len(row)) < row)[0].tolist())


def dual_gap_count(M, gap):
    """D(Delta) = number of nodes within `gap` of the top dual influence."""
    if gap < 0:
        raise ConfigurationError("gap must be nonnegative")
    dual = M.dual_influence
    return int(np.count_nonzero(dual.max() - dual <= gap + 1e-12))


def detectable_gap(r_star_dual, n, horizon, t_star):
    """Delta* = 16 sqrt(r*° N log(TN) / T*) + 144 N log(TN) / T*."""
    log_tn = math.log(horizon * n)
    return 16.0 * math.sqrt(r_star_dual * n * log_tn / t_star) + 144.0 * n * log_tn / t_star


def detectable_quantities(M, horizon):
    """(T*, D*, Delta*): the first T* whose gap-count supports the horizon
    inequality T* r*° >= sqrt(D* T r*°); falls back to (T, N, Delta*(T)).
    """
    if horizon < 1:
        raise ConfigurationError("horizon must be >= 1")
    r_star_dual = float(M.dual_influence.max())
    n = M.n
    if r_star_dual <= 0.0:
        return horizon, n, float("inf")
    for t_star in range(1, horizon + 1):
        delta_star = detectable_gap(r_star_dual, n, horizon, t_star)
        d_star = dual_gap_count(M, delta_star)
        if t_star * r_star_dual >= math.sqrt(d_star * horizon * r_star_dual):
            return t_star, d_star, delta_star
    return horizon, n, detectable_gap(r_star_dual, n, horizon, horizon)


@dataclass
class InfluenceRun:
    nodes: list
    rewards: np.ndarray
    cum_regret: np.ndarray
    recommended: int
    phase1_rounds: int = 0
    survivors: tuple = ()

    @property
    def final_regret(self):
        return float(self.cum_regret[-1])


def _pseudo_regret_curve(M, nodes):
    r = M.influence
    return np.cumsum([r.max() - r[k] for k in nodes])


def uniform_run(M, horizon, rng):
    """Uniform node sampling baseline."""
    nodes, rewards = [], []
    for _ in range(horizon):
        k = int(rng.integers(M.n))
        s = sample_influence(M, k, rng)
        nodes.append(k)
        rewards.append(float(len(s)))
    counts = np.zeros(M.n)
    hits = np.zeros(M.n)
    for k, rew in zip(nodes, rewards):
        counts[k] += 1
        hits[k] += rew
    means = np.where(counts > 0, hits / np.maximum(counts, 1), -np.inf)
    return InfluenceRun(
        nodes=nodes,
        rewards=np.array(rewards),
        cum_regret=_pseudo_regret_curve(M, nodes),
        recommended=int(np.argmax(means)),
    )


def bare_run(M, horizon, rng):
    """Two-phase revelation bandit.

    Phase 1 samples uniformly random nodes and tracks how often each node
    appears in the revealed sets; it stops at the first round t where the
    empirical analog of the detectable-horizon inequality holds (dual
    influences estimated as N * count / t, the printed 16/144 constants
    kept).  The top-D nodes by empirical dual influence survive; phase 2
    runs UCB1 over the survivors on |S|/N rewards.  The recommendation is
    the survivor with the highest empirical influence.
    """
    if horizon < 2:
        raise ConfigurationError("horizon must be >= 2")
    n = M.n
    log_tn = math.log(horizon * n)
    influenced_counts = np.zeros(n)
    nodes, rewards = [], []
    d_hat = n
    t = 0
    while t < horizon:
        t += 1
        k = int(rng.integers(n))
        s = sample_influence(M, k, rng)
        for j in s:
            influenced_counts[j] += 1
        nodes.append(k)
        rewards.append(float(len(s)))
        dual_hat = n * influenced_counts / t
        r_star_hat = float(dual_hat.max())
        if r_star_hat <= 0.0:
            continue
        delta_hat = 16.0 * math.sqrt(r_star_hat * n * log_tn / t) + 144.0 * n * log_tn / t
        d_hat = int(np.count_nonzero(r_star_hat - dual_hat <= delta_hat))
        if t * r_star_hat >= math.sqrt(d_hat * horizon * r_star_hat):
            break
    phase1 = t
    dual_hat = n * influenced_counts / max(t, 1)
    survivors = np.argsort(-dual_hat, kind="stable")[:d_hat]
    # phase 2: UCB1 over the survivors, rewards rescaled to [0, 1] by N
    counts = np.zeros(len(survivors), dtype=int)
    sums = np.zeros(len(survivors))
    tau = 0
    while t < horizon:
        t += 1
        tau += 1
        unpulled = np.nonzero(counts == 0)[0]
        if unpulled.size:
            idx = int(unpulled[0])
        else:
            ucb = sums / counts + np.sqrt(2.0 * np.log(tau) / counts)
            idx = int(np.argmax(ucb))
        k = int(survivors[idx])
        s = sample_influence(M, k, rng)
        counts[idx] += 1
        sums[idx] += len(s) / n
        nodes.append(k)
        rewards.append(float(len(s)))
    means = np.where(counts > 0, sums / np.maximum(counts, 1), -np.inf)
    recommended = int(survivors[int(np.argmax(means))])
    return InfluenceRun(
        nodes=nodes,
        rewards=np.array(rewards),
        cum_regret=_pseudo_regret_curve(M, nodes),
        recommended=recommended,
        phase1_rounds=phase1,
        survivors=tuple(int(v) for v in survivors),
    )
