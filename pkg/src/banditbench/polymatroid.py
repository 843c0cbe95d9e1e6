"""Polymatroids, the greedy maximum-weight basis, and the OPM semi-bandit.

A polymatroid is a ground set of L items plus a monotone submodular rank
oracle f with f(empty) = 0 and per-item increments at most 1.  Bases are
the vertices of the base polyhedron reachable by sorting items by weight
and taking rank increments.
"""

import itertools
import json
import math

import numpy as np

from banditbench.core import (
    ConfigurationError,
    Feedback,
    Policy,
    Selection,
    StochasticRewardEnvironment,
)

BASIS_TOL = 1e-9


class Polymatroid:
    """Ground set + rank oracle; `verify=True` exhaustively checks the axioms
    (monotone, submodular, normalized) for L <= 12."""

    def __init__(self, size, rank_fn, verify=False, name="custom"):
        self.size = int(size)
        self._rank = rank_fn
        self.name = name
        if verify:
            self.verify_axioms()
        self.rank = self.f(frozenset(range(self.size)))

    def f(self, subset):
        value = float(self._rank(frozenset(subset)))
        if value < 0:
            raise ConfigurationError("rank oracle returned a negative value")
        return value

    def verify_axioms(self):
        if self.size > 12:
            raise ConfigurationError("exhaustive axiom check is limited to L <= 12")
        ground = list(range(self.size))
        if self.f(frozenset()) != 0.0:
            raise ConfigurationError("rank oracle must satisfy f(empty set) = 0")
        for e in ground:
            if self.f({e}) > 1.0 + BASIS_TOL:
                raise ConfigurationError("per-item rank must be at most 1")
        for bits in range(1 << self.size):
            X = frozenset(i for i in ground if bits >> i & 1)
            fX = self.f(X)
            for e in ground:
                if e in X:
                    continue
                fXe = self.f(X | {e})
                if fXe < fX - BASIS_TOL:
                    raise ConfigurationError("rank oracle is not monotone")
                for e2 in ground:
                    if e2 in X or e2 <= e:
                        continue
                    gain_late = self.f(X | {e, e2}) - self.f(X | {e2})
                    if gain_late > fXe - fX + BASIS_TOL:
                        raise ConfigurationError("rank oracle is not submodular")

    def check_basis(self, x):
        """Exhaustive base-polyhedron membership test (L <= 12 only)."""
        x = np.asarray(x, dtype=float)
        if np.any(x < -BASIS_TOL):
            return False
        if abs(x.sum() - self.rank) > BASIS_TOL:
            return False
        if self.size > 12:
            raise ConfigurationError("exhaustive membership test is limited to L <= 12")
        for bits in range(1 << self.size):
            X = [i for i in range(self.size) if bits >> i & 1]
            if x[X].sum() > self.f(X) + BASIS_TOL:
                return False
        return True


def greedy(M, weights):
    """Maximum-weight basis by sorted rank increments (ties: lower index)."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (M.size,):
        raise ConfigurationError(f"need {M.size} weights")
    if np.any(w < 0):
        raise ConfigurationError("weights must be nonnegative")
    order = np.argsort(-w, kind="stable")
    x = np.zeros(M.size)
    prefix = set()
    prev = 0.0
    for e in order:
        prefix.add(int(e))
        value = M.f(prefix)
        x[e] = value - prev
        prev = value
    return x


def minimum_basis(M, weights):
    """Minimum-weight basis: greedy on the transformed weights max(w) - w."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise ConfigurationError("weights must be nonnegative")
    return greedy(M, w.max() - w)


def enumerate_vertex_bases(M):
    """All greedy outputs over the L! item orderings (brute-force oracle)."""
    if M.size > 8:
        raise ConfigurationError("vertex enumeration is factorial; L <= 8 only")
    seen = {}
    for order in itertools.permutations(range(M.size)):
        x = np.zeros(M.size)
        prefix = set()
        prev = 0.0
        for e in order:
            prefix.add(e)
            value = M.f(prefix)
            x[e] = value - prev
            prev = value
        seen[tuple(np.round(x, 12))] = x
    return list(seen.values())


# ---------------------------------------------------------------------------
# worked instances
# ---------------------------------------------------------------------------

def flow_rank(X, size, max_flow):
    """Two-level flow network rank: per-source cap 1, per-pair cap 3/2,
    total cap `max_flow`."""
    X = frozenset(X)
    total = 0.0
    for i in range(1, size // 2 + 1):
        total += min((1 if (2 * i - 1 - 1) in X else 0) + (1 if (2 * i - 1) in X else 0), 1.5)
    return min(total, max_flow)


def flow_polymatroid(size, max_flow):
    """Polymatroid of the two-level flow example (0-based items)."""
    if size % 2 != 0:
        raise ConfigurationError("flow instance needs an even number of sources")
    if abs(max_flow / 1.5 - round(max_flow / 1.5)) > 1e-12:
        raise ConfigurationError("max flow must be an integer multiple of 3/2")
    if max_flow > 0.75 * size:
        raise ConfigurationError("max flow exceeds the network capacity 3L/4")
    return Polymatroid(size, lambda X: flow_rank(X, size, max_flow), name="flow")


def flow_weights(size, max_flow, gap):
    """Bernoulli cost means: 0.5 - gap/2 for the first floor(4K/3) sources,
    0.5 + gap/2 for the rest (cost semantics; pair with minimum_basis)."""
    if not 0.0 < gap < 1.0:
        raise ConfigurationError("gap must lie in (0, 1)")
    cheap = math.floor(4.0 * max_flow / 3.0)
    means = np.full(size, 0.5 + gap / 2.0)
    means[:cheap] = 0.5 - gap / 2.0
    return means


def coverage_polymatroid(topic_sets):
    """f(X) = number of topics covered by the items in X.

    Multi-topic items have per-item rank above 1, so coverage instances
    skip the normalized-increment check (the worked example does too).
    """
    topic_sets = [frozenset(s) for s in topic_sets]

    def rank(X):
        covered = set()
        for e in X:
            covered |= topic_sets[e]
        return float(len(covered))

    return Polymatroid(len(topic_sets), rank, name="coverage")


def movie_coverage_fixture():
    """The three-movie coverage instance with popularity weights.

    Items: Inception {action}, Grown Ups 2 {comedy},
    Kindergarten Cop {action, comedy}; weights (0.8, 0.5, 0.6).
    Maximum-weight basis is (1, 0, 1).
    """
    M = coverage_polymatroid([{"action"}, {"comedy"}, {"action", "comedy"}])
    return M, np.array([0.8, 0.5, 0.6])


def partition_polymatroid(blocks, capacities):
    """f(X) = sum_b min(|X intersect block_b|, capacity_b)."""
    blocks = [frozenset(b) for b in blocks]
    caps = list(capacities)
    if len(blocks) != len(caps):
        raise ConfigurationError("need one capacity per block")

    def rank(X):
        return float(sum(min(len(X & b), c) for b, c in zip(blocks, caps)))

    size = max((max(b) for b in blocks if b), default=-1) + 1
    return Polymatroid(size, rank, name="partition")


def cardinality_polymatroid(size, k):
    """Uniform matroid f(X) = min(|X|, k)."""
    return Polymatroid(size, lambda X: float(min(len(X), k)), name="cardinality")


def load_instance(spec):
    """Build an instance from the JSON description ({'kind': ..., ...})."""
    if isinstance(spec, str):
        with open(spec) as fh:
            spec = json.load(fh)
    kind = spec.get("kind")
    if kind == "flow":
        return flow_polymatroid(spec["size"], spec["max_flow"])
    if kind == "coverage":
        topic_sets = [frozenset(s) for s in spec["topics"]]

        def rank(X, ts=topic_sets):
            covered = set()
            for e in X:
                covered |= ts[e]
            return float(len(covered))

        return Polymatroid(len(topic_sets), rank, name="coverage")
    if kind == "partition":
        return partition_polymatroid(spec["blocks"], spec["capacities"])
    if kind == "cardinality":
        return cardinality_polymatroid(spec["size"], spec["k"])
    raise ConfigurationError(f"unknown polymatroid kind {kind!r}")


# ---------------------------------------------------------------------------
# OPM: optimistic polymatroid maximization
# ---------------------------------------------------------------------------

def confidence_radius(t, pulls):
    """c_{t,s} = sqrt(2 log t / s); log is clamped at 0 for t < 1."""
    if pulls < 1:
        raise ConfigurationError("confidence radius needs at least one pull")
    return math.sqrt(2.0 * max(math.log(t), 0.0) / pulls) if t >= 1 else 0.0


class OpmState:
    """Per-item empirical means and pull counts."""

    def __init__(self, size):
        self.means = np.zeros(size)
        self.counts = np.zeros(size, dtype=int)
        self.t = 0

    def record(self, items, weights):
        for e in items:
            self.counts[e] += 1
            self.means[e] += (weights[e] - self.means[e]) / self.counts[e]


class OPMPolicy(Policy):
    """Greedy maximum-weight basis on per-item UCBs.

    `init='idealized'` performs one synthetic round observing every item
    before round 1 (matching the printed initialization); `init='episodes'`
    spends the first L real episodes on forced bases that observe item t
    first and then all other items.
    """

    def __init__(self, M, init="idealized"):
        if init not in ("idealized", "episodes"):
            raise ConfigurationError("init must be 'idealized' or 'episodes'")
        self.M = M
        self.init = init
        self.action_space = f"polymatroid:{M.size}"
        self.state = OpmState(M.size)

    def initialize(self, env, rng):
        if self.init != "idealized":
            return
        w0 = env.sample_weights(rng)
        self.state.record(range(self.M.size), w0)

    def select(self, t, rng):
        if self.init == "episodes" and t <= self.M.size:
            order = [t - 1] + [e for e in range(self.M.size) if e != t - 1]
            x = np.zeros(self.M.size)
            prefix, prev = set(), 0.0
            for e in order:
                prefix.add(e)
                value = self.M.f(prefix)
                x[e] = value - prev
                prev = value
            return Selection(action=x)
        radii = np.array(
            [confidence_radius(t - 1, int(s)) if s > 0 else 1e12 for s in self.state.counts]
        )
        return Selection(action=greedy(self.M, self.state.means + radii))

    def update(self, t, action, feedback, rng):
        items = np.nonzero(np.asarray(action) > BASIS_TOL)[0]
        self.state.record(items, feedback.item_weights)
        self.state.t = t


class PolymatroidSemiBanditEnv(StochasticRewardEnvironment):
    """Stochastic item weights; semi-bandit feedback on the chosen support.

    `means` are per-item Bernoulli means for the reward of each item (use
    1 - cost for minimization problems; bases sum to the constant rank, so
    maximizing 1 - cost is exactly minimizing cost).
    """

    comparator = "best basis under the mean weights (pseudo-regret)"

    def __init__(self, M, means):
        self.M = M
        self._means = np.asarray(means, dtype=float)
        if np.any(self._means < 0) or np.any(self._means > 1):
            raise ConfigurationError("Bernoulli means must lie in [0, 1]")
        self.action_space = f"polymatroid:{M.size}"
        self.best_basis = greedy(M, self._means)
        self.best_value = float(self.best_basis @ self._means)

    @property
    def means(self):
        return self._means

    def sample_weights(self, rng):
        return (rng.random(self.M.size) < self._means).astype(float)

    def step(self, t, action, rng):
        x = np.asarray(action, dtype=float)
        w = self.sample_weights(rng)
        items = {int(e): float(w[e]) for e in np.nonzero(x > BASIS_TOL)[0]}
        return Feedback(value=float(x @ w), extras={"item_weights": w})

    def regret_increment(self, action):
        return self.best_value - float(np.asarray(action) @ self._means)
