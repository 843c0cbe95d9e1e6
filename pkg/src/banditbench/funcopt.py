"""Hierarchical bandit optimization of black-box functions.

Standard axis-aligned partitioning, hierarchical optimistic optimization
(HOO), StoSOO for unknown smoothness, and POO which races a log-spaced
grid of smoothness parameters.  Budgets count noisy function evaluations.
"""

import math
import subprocess
from dataclasses import dataclass

import numpy as np

from banditbench.core import ConfigurationError, InvariantViolation

INF = float("inf")


# ---------------------------------------------------------------------------
# benchmark functions and oracles
# ---------------------------------------------------------------------------

def difficult_function(x):
    """Two-envelope difficult function on [0, 1]; global maximum 0 at 0.5.

    Oscillates between a sqrt and a quadratic envelope depending on the
    fractional part of log2|x - 0.5|; the value at 0.5 is the limit 0.
    """
    u = abs(x - 0.5)
    if u == 0.0:
        return 0.0
    frac = math.log2(u) - math.floor(math.log2(u))
    s = 1.0 if frac <= 0.5 else 0.0
    return s * (math.sqrt(u) - u * u) - math.sqrt(u)


def peak_function(x):
    """Smooth single peak -|x - 0.5| on [0, 1] (maximum 0 at 0.5)."""
    return -abs(x - 0.5)


def quadratic_peak(x):
    """Concave quadratic with maximum 1 at 0.5."""
    return 1.0 - 4.0 * (x - 0.5) ** 2


BUILTIN_FUNCTIONS = {
    "difficult": (difficult_function, 0.0, [(0.0, 1.0)]),
    "peak": (peak_function, 0.0, [(0.0, 1.0)]),
    "quadratic": (quadratic_peak, 1.0, [(0.0, 1.0)]),
}


class FunctionOracle:
    """Budgeted noisy evaluations of a scalar function on a box domain."""

    def __init__(self, fn, budget, noise_halfwidth=0.0, f_star=None):
        self.fn = fn
        self.budget = int(budget)
        self.consumed = 0
        self.noise_halfwidth = float(noise_halfwidth)
        self.f_star = f_star

    @classmethod
    def builtin(cls, name, budget, noise_halfwidth=0.0):
        fn, f_star, _domain = BUILTIN_FUNCTIONS[name]
        return cls(fn, budget, noise_halfwidth, f_star=f_star)

    def __call__(self, x, rng):
        if self.consumed >= self.budget:
            raise InvariantViolation("evaluation budget exhausted")
        self.consumed += 1
        value = self.fn(x[0] if np.ndim(x) else x)
        if self.noise_halfwidth > 0:
            value += rng.uniform(-self.noise_halfwidth, self.noise_halfwidth)
        return float(value)


class ExternalFunction:
    """Line protocol to a child process: write x, read back f(x)."""

    def __init__(self, command):
        self.proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def __call__(self, x):
        point = x if np.ndim(x) else [x]
        self.proc.stdin.write(" ".join(repr(float(c)) for c in np.atleast_1d(point)) + "\n")
        self.proc.stdin.flush()
        line = self.proc.stdout.readline()
        if not line:
            raise ProcessLookupError("external function process closed its pipe")
        return float(line.strip())

    def close(self):
        self.proc.stdin.close()
        self.proc.wait(timeout=10)


# ---------------------------------------------------------------------------
# partition trees
# ---------------------------------------------------------------------------

class PartitionTree:
    """Arity-K axis-aligned partition tree with per-cell pull statistics.

    Nodes live in flat arrays (parents precede children); cell (h, i)
    bookkeeping follows the path-update convention: a node's count/mean
    aggregate every evaluation routed through its subtree.
    """

    def __init__(self, domain, arity):
        if arity < 2:
            raise ConfigurationError("arity must be >= 2")
        self.arity = int(arity)
        domain = [(float(lo), float(hi)) for lo, hi in domain]
        self.dim = len(domain)
        cap = 64
        self.lo = np.zeros((cap, self.dim))
        self.hi = np.zeros((cap, self.dim))
        self.parent = np.full(cap, -1, dtype=np.int64)
        self.child0 = np.full(cap, -1, dtype=np.int64)
        self.depth = np.zeros(cap, dtype=np.int64)
        self.counts = np.zeros(cap, dtype=np.int64)
        self.sums = np.zeros(cap)
        self.n_nodes = 1
        self.lo[0] = [lo for lo, _ in domain]
        self.hi[0] = [hi for _, hi in domain]
        self.levels = [np.array([0], dtype=np.int64)]

    def _grow(self, need):
        cap = len(self.parent)
        if need <= cap:
            return
        new_cap = max(need, 2 * cap)
        for name in ("lo", "hi"):
            arr = getattr(self, name)
            grown = np.zeros((new_cap, self.dim))
            grown[:cap] = arr
            setattr(self, name, grown)
        for name, fill in (("parent", -1), ("child0", -1), ("depth", 0), ("counts", 0)):
            arr = getattr(self, name)
            grown = np.full(new_cap, fill, dtype=np.int64)
            grown[:cap] = arr
            setattr(self, name, grown)
        grown = np.zeros(new_cap)
        grown[:cap] = self.sums
        self.sums = grown

    def representative(self, node):
        return 0.5 * (self.lo[node] + self.hi[node])

    def is_leaf(self, node):
        return self.child0[node] < 0

    def expand(self, node):
        """Split the cell into K equal boxes along its longest side."""
        if not self.is_leaf(node):
            raise InvariantViolation("cannot expand an internal node")
        K = self.arity
        self._grow(self.n_nodes + K)
        widths = self.hi[node] - self.lo[node]
        axis = int(np.argmax(widths))  # ties -> first axis
        edges = np.linspace(self.lo[node][axis], self.hi[node][axis], K + 1)
        first = self.n_nodes
        for k in range(K):
            idx = first + k
            self.lo[idx] = self.lo[node]
            self.hi[idx] = self.hi[node]
            self.lo[idx][axis] = edges[k]
            self.hi[idx][axis] = edges[k + 1]
            self.parent[idx] = node
            self.depth[idx] = self.depth[node] + 1
        self.child0[node] = first
        self.n_nodes += K
        d = int(self.depth[node]) + 1
        ids = np.arange(first, first + K, dtype=np.int64)
        if d == len(self.levels):
            self.levels.append(ids)
        else:
            self.levels[d] = np.concatenate([self.levels[d], ids])
        return ids

    def record(self, node, value):
        """Add one evaluation to the node and every ancestor."""
        while node >= 0:
            self.counts[node] += 1
            self.sums[node] += value
            node = self.parent[node]

    def leaf_boxes(self):
        n = self.n_nodes
        leaves = np.nonzero(self.child0[:n] < 0)[0]
        return self.lo[leaves], self.hi[leaves]


def standard_partition(domain, arity):
    """Factory for arity-K standard partitioning of a box domain."""
    return lambda: PartitionTree(domain, arity)


# ---------------------------------------------------------------------------
# HOO
# ---------------------------------------------------------------------------

def hoo_u_value(mean, count, t, nu, rho, depth):
    """U = mean + sqrt(2 ln t / N) + nu rho^h; +inf for unvisited cells."""
    if count == 0:
        return INF
    return mean + math.sqrt(2.0 * math.log(t) / count) + nu * rho**depth


class HOO:
    """Hierarchical optimistic optimization with known smoothness (nu, rho).

    Each step descends by B-values (B = min(U, max of children B); leaves
    score their U, which is +inf while unvisited), evaluates the reached
    leaf's representative, expands it, and propagates the sample up the
    path.  Ties go to the lower-index child.
    """

    def __init__(self, oracle, nu, rho, domain=((0.0, 1.0),), arity=2):
        if not 0.0 < rho < 1.0:
            raise ConfigurationError("rho must lie in (0, 1)")
        if nu <= 0:
            raise ConfigurationError("nu must be positive")
        self.oracle = oracle
        self.nu = float(nu)
        self.rho = float(rho)
        self.tree = PartitionTree(domain, arity)
        self.t = 0
        self.evaluated = []  # (point, value)

    def _b_values(self):
        tree = self.tree
        n = tree.n_nodes
        counts = tree.counts[:n]
        with np.errstate(divide="ignore", invalid="ignore"):
            means = np.where(counts > 0, tree.sums[:n] / np.maximum(counts, 1), 0.0)
            conf = np.sqrt(2.0 * math.log(max(self.t, 1)) / counts)
        U = np.where(counts > 0, means + conf + self.nu * self.rho ** tree.depth[:n], INF)
        B = U.copy()
        for d in range(len(tree.levels) - 2, -1, -1):
            ids = tree.levels[d]
            internal = ids[tree.child0[ids] >= 0]
            if internal.size == 0:
                continue
            first = tree.child0[internal]
            child_max = B[first]
            for k in range(1, tree.arity):
                child_max = np.maximum(child_max, B[first + k])
            B[internal] = np.minimum(U[internal], child_max)
        return B

    def step(self, rng):
        """One evaluation; returns (point, reward)."""
        self.t += 1
        tree = self.tree
        B = self._b_values()
        node = 0
        while not tree.is_leaf(node):
            kids = tree.child0[node] + np.arange(tree.arity)
            node = int(kids[int(np.argmax(B[kids]))])  # argmax ties -> lower index
        x = tree.representative(node)
        reward = self.oracle(x, rng)
        tree.expand(node)
        tree.record(node, reward)
        self.evaluated.append((x, reward))
        return x, reward

    def run(self, budget, rng):
        for _ in range(int(budget)):
            self.step(rng)
        return self

    def recommend(self, rng):
        """A uniformly random evaluated point (the racing-compatible rule)."""
        if not self.evaluated:
            raise InvariantViolation("nothing evaluated yet")
        idx = int(rng.integers(len(self.evaluated)))
        return self.evaluated[idx][0]

    @property
    def mean_reward(self):
        if not self.evaluated:
            return -INF
        return float(np.mean([r for _, r in self.evaluated]))


# ---------------------------------------------------------------------------
# StoSOO
# ---------------------------------------------------------------------------

def stosoo_b_value(mean, horizon, k, delta, pulls):
    """b = mean + sqrt(log(T k / delta) / (2 pulls)); +inf when unvisited."""
    if pulls == 0:
        return INF
    return mean + math.sqrt(math.log(horizon * k / delta) / (2.0 * pulls))


def stosoo_defaults(horizon):
    """k = T / log^3 T and delta = 1 / sqrt(T)."""
    k = max(1, round(horizon / math.log(horizon) ** 3))
    return k, 1.0 / math.sqrt(horizon)


@dataclass
class StoSOOResult:
    recommended: np.ndarray
    tree: PartitionTree
    evaluated: list


def stosoo_run(oracle, horizon, k=None, delta=None, h_max=None, arity=3,
               domain=((0.0, 1.0),), rng=None):
    """Depth-sweep optimization with at most one action per depth per sweep.

    At depth step h the leaf of depth <= h with the best b-value is either
    evaluated (if it has fewer than k pulls) or expanded (if at depth
    < h_max); leaves at h_max that already hold k pulls are skipped.
    """
    if horizon < arity:
        raise ConfigurationError("budget must cover at least one expansion")
    if k is None or delta is None:
        k_default, delta_default = stosoo_defaults(horizon)
        k = k_default if k is None else k
        delta = delta_default if delta is None else delta
    if h_max is None:
        h_max = max(1, int(math.sqrt(horizon / k)))
    tree = PartitionTree(domain, arity)
    log_term = math.log(horizon * k / delta)
    consumed = 0
    evaluated = []
    while consumed < horizon:
        max_depth = len(tree.levels) - 1
        acted = False
        for h in range(0, max_depth + 1):
            if consumed >= horizon:
                break
            n = tree.n_nodes
            leaves = np.nonzero(tree.child0[:n] < 0)[0]
            leaves = leaves[tree.depth[leaves] <= h]
            if leaves.size == 0:
                continue
            counts = tree.counts[leaves]
            b = np.where(
                counts > 0,
                tree.sums[leaves] / np.maximum(counts, 1)
                + np.sqrt(log_term / (2.0 * np.maximum(counts, 1))),
                INF,
            )
            best = int(leaves[int(np.argmax(b))])
            if tree.counts[best] < k:
                x = tree.representative(best)
                value = oracle(x, rng)
                tree.record(best, value)
                evaluated.append((x, value))
                consumed += 1
                acted = True
            elif tree.depth[best] < h_max:
                tree.expand(best)
                acted = True
        if not acted:
            break  # every eligible leaf saturated at h_max
    return StoSOOResult(_stosoo_recommend(tree), tree, evaluated)


def _stosoo_recommend(tree):
    """Representative of the deepest expanded node's best-mean child."""
    n = tree.n_nodes
    internal = np.nonzero(tree.child0[:n] >= 0)[0]
    if internal.size == 0:
        return tree.representative(0)
    deepest = internal[np.argmax(tree.depth[internal])]  # argmax ties -> lowest id
    kids = tree.child0[deepest] + np.arange(tree.arity)
    means = np.where(
        tree.counts[kids] > 0,
        tree.sums[kids] / np.maximum(tree.counts[kids], 1),
        -INF,
    )
    return tree.representative(int(kids[int(np.argmax(means))]))


# ---------------------------------------------------------------------------
# POO
# ---------------------------------------------------------------------------

def poo_rho_grid(n, rho_max):
    """rho_i = rho_max^(N/i): uniform grid of 1/ln(1/rho) values."""
    return [rho_max ** (n / i) for i in range(1, n + 1)]


def poo_schedule(horizon, rho_max, nu_max, arity):
    """Smoothness grid for the racing scheme.

    N is the smallest power of two with N >= 0.5 * D_max * ln(T / ln T),
    D_max = ln K / ln(1 / rho_max); instances are (nu_max, rho_max^(N/i)).
    """
    if not 0.0 < rho_max < 1.0:
        raise ConfigurationError("rho_max must lie in (0, 1)")
    if horizon < 2:
        raise ConfigurationError("budget must be at least 2")
    d_max = math.log(arity) / math.log(1.0 / rho_max)
    target = 0.5 * d_max * math.log(horizon / math.log(horizon))
    n = 1
    while n < target:
        n *= 2
    return [(nu_max, rho) for rho in poo_rho_grid(n, rho_max)]


@dataclass
class POOResult:
    recommended: np.ndarray
    instances: list
    evaluated: list


def poo_run(oracle, horizon, rho_max=0.9, nu_max=1.0, arity=2,
            domain=((0.0, 1.0),), rng=None):
    """Race the schedule's HOO instances with equalized evaluation counts.

    The best instance is the one with the highest empirical mean of its
    own evaluations; the recommendation is one of its evaluated points,
    chosen uniformly at random.  Consumes exactly `horizon` evaluations.
    """
    params = poo_schedule(horizon, rho_max, nu_max, arity)
    instances = [HOO(oracle, nu, rho, domain=domain, arity=arity) for nu, rho in params]
    evaluated = []
    consumed = 0
    while consumed < horizon:
        for inst in instances:
            if consumed >= horizon:
                break
            evaluated.append(inst.step(rng))
            consumed += 1
    best = int(np.argmax([inst.mean_reward for inst in instances]))
    return POOResult(instances[best].recommend(rng), instances, evaluated)


def simple_regret(f_star, fn, point):
    """Gap between the optimum and the recommended point's true value."""
    x = point[0] if np.ndim(point) else point
    return float(f_star - fn(x))
