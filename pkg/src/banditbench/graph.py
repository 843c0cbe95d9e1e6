"""Weighted digraphs, Laplacian spectra, independence numbers, generators.

The edge-list file format is one ``src dst weight`` triple per line with
0-based node ids; ``#`` starts a comment.  Undirected graphs are stored
with symmetric arc pairs.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from banditbench.core import ConfigurationError

EXACT_INDEPENDENCE_LIMIT = 24


class WeightedDigraph:
    """Node/arc structure with [0, 1] arc weights.

    Backs observation systems (side observations), Laplacians (spectral
    bandits), and influence matrices.
    """

    def __init__(self, n, arcs=(), directed=True):
        if n < 1:
            raise ConfigurationError("graph needs at least one node")
        self.n = int(n)
        self.directed = bool(directed)
        W = np.zeros((n, n))
        seen = set()
        for u, v, w in arcs:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise ConfigurationError(f"arc ({u},{v}) out of range for n={n}")
            if not (0.0 <= w <= 1.0):
                raise ConfigurationError(f"arc weight {w} outside [0, 1]")
            if (u, v) in seen:
                raise ConfigurationError(f"duplicate arc ({u},{v})")
            seen.add((u, v))
            W[u, v] = w
        if not self.directed and not np.array_equal(W, W.T):
            raise ConfigurationError("undirected graph requires symmetric arc pairs")
        self._W = W

    @classmethod
    def from_matrix(cls, W, directed=True):
        W = np.asarray(W, dtype=float)
        n = W.shape[0]
        arcs = [(u, v, W[u, v]) for u in range(n) for v in range(n) if W[u, v] != 0.0]
        return cls(n, arcs, directed=directed)

    @classmethod
    def _from_trusted_matrix(cls, W, directed=True):
        """Internal fast path: W already validated (weights in [0, 1])."""
        g = cls.__new__(cls)
        g.n = W.shape[0]
        g.directed = directed
        g._W = W
        return g

    @classmethod
    def empty(cls, n):
        return cls(n, (), directed=False)

    @classmethod
    def complete(cls, n, weight=1.0, directed=False):
        arcs = [(u, v, weight) for u in range(n) for v in range(n) if u != v]
        return cls(n, arcs, directed=directed)

    @property
    def weights(self):
        """Dense weight matrix (read-only view)."""
        W = self._W.view()
        W.flags.writeable = False
        return W

    @property
    def arcs(self):
        us, vs = np.nonzero(self._W)
        return [(int(u), int(v), float(self._W[u, v])) for u, v in zip(us, vs)]

    def has_arc(self, u, v):
        return self._W[u, v] != 0.0

    def _check_node(self, i):
        if not (0 <= i < self.n):
            raise ConfigurationError(f"node {i} out of range for n={self.n}")

    def out_neighbors(self, i):
        self._check_node(i)
        return np.nonzero(self._W[i] > 0)[0]

    def symmetrized_adjacency(self):
        """Boolean i~j adjacency ignoring orientation and self-loops."""
        A = (self._W > 0) | (self._W.T > 0)
        np.fill_diagonal(A, False)
        return A

    def __repr__(self):
        kind = "digraph" if self.directed else "graph"
        return f"WeightedDigraph({kind}, n={self.n}, arcs={int(np.count_nonzero(self._W))})"


@dataclass(frozen=True)
class LaplacianSpectrum:
    """Eigendecomposition L = Q diag(eigenvalues) Q^T, eigenvalues ascending."""

    eigenvalues: np.ndarray
    Q: np.ndarray

    def validate(self, L=None, ortho_tol=1e-8, eig_tol=1e-6):
        Q, lam = self.Q, self.eigenvalues
        if np.any(np.diff(lam) < -eig_tol):
            raise ValueError("eigenvalues must be nondecreasing")
        if np.max(np.abs(Q.T @ Q - np.eye(Q.shape[1]))) > ortho_tol:
            raise ValueError("eigenvectors are not orthonormal")
        if L is not None:
            resid = np.max(np.abs(L @ Q - Q * lam))
            if resid > eig_tol:
                raise ValueError(f"L q != lambda q (residual {resid})")
        return self


def laplacian(g):
    """Combinatorial Laplacian L = D - W of an undirected weighted graph."""
    if g.directed:
        raise ConfigurationError("laplacian requires an undirected graph")
    W = np.array(g.weights)
    np.fill_diagonal(W, 0.0)  # self-loops cancel in D - W
    return np.diag(W.sum(axis=1)) - W


def eigendecompose(L, sym_tol=1e-10):
    """Spectrum of a symmetric matrix, eigenvalues sorted ascending."""
    L = np.asarray(L, dtype=float)
    if np.max(np.abs(L - L.T)) > max(sym_tol, 1e-12 * np.abs(L).max(initial=1.0)):
        raise ConfigurationError("eigendecompose requires a symmetric matrix")
    lam, Q = np.linalg.eigh(L)
    return LaplacianSpectrum(eigenvalues=lam, Q=Q)


def _neighbor_masks(adj):
    n = adj.shape[0]
    return [int(sum(1 << j for j in np.nonzero(adj[i])[0])) for i in range(n)]


def _mis_size(masks, cand, best=0):
    """Branch and bound max independent set on a bitmask candidate set."""
    if cand == 0:
        return 0
    if cand.bit_count() <= best:
        return 0  # cannot beat the incumbent
    v = (cand & -cand).bit_length() - 1
    # include v
    size = 1 + _mis_size(masks, cand & ~((1 << v) | masks[v]), best - 1)
    # exclude v (only useful if some neighbor in cand replaces it)
    if masks[v] & cand:
        size = max(size, _mis_size(masks, cand & ~(1 << v), max(best, size)))
    return size


def greedy_clique_cover(adj):
    """Greedy clique partition; its size is a certified upper bound on alpha."""
    n = adj.shape[0]
    cliques = []
    for v in range(n):
        for clique in cliques:
            if all(adj[v, u] for u in clique):
                clique.append(v)
                break
        else:
            cliques.append([v])
    return cliques


def independence_number(g):
    """Maximum independent set size (adjacency ignores arc orientation).

    Exact for n <= 24; beyond that returns the greedy clique-cover upper
    bound and emits an `approximate` warning.
    """
    adj = g.symmetrized_adjacency()
    if g.n > EXACT_INDEPENDENCE_LIMIT:
        bound = len(greedy_clique_cover(adj))
        warnings.warn(
            f"independence_number is approximate for n={g.n} > {EXACT_INDEPENDENCE_LIMIT}: "
            "returning a certified clique-cover upper bound",
            RuntimeWarning,
            stacklevel=2,
        )
        return bound
    masks = _neighbor_masks(adj)
    return _mis_size(masks, (1 << g.n) - 1)


def threshold_graph(g, eps):
    """Unweighted graph keeping arcs with weight >= eps."""
    W = np.where(g.weights >= eps, 1.0, 0.0) * (g.weights > 0)
    return WeightedDigraph.from_matrix(W, directed=True)


def effective_independence_number(g):
    """min over thresholds eps of alpha(eps) / eps^2, with the argmin eps.

    alpha(eps) is the independence number of the unweighted graph keeping
    arcs of weight >= eps.  Candidate thresholds are the distinct positive
    arc weights plus 1; alpha(eps) is a step function changing only at
    those values, so the finite scan attains the continuum minimum.
    Ties prefer the largest eps.
    """
    weights = np.asarray(g.weights)
    candidates = sorted(set(weights[weights > 0.0].tolist()) | {1.0})
    best_val, best_eps = None, None
    for eps in candidates:
        alpha_eps = independence_number(threshold_graph(g, eps))
        val = alpha_eps / eps**2
        if best_val is None or val <= best_val:
            best_val, best_eps = val, eps
    return float(best_val), float(best_eps)


def erdos_renyi(n, r, rng):
    """Directed ER graph: every ordered pair (i != j) gets an arc w.p. r."""
    if not 0.0 <= r <= 1.0:
        raise ConfigurationError("edge probability must lie in [0, 1]")
    mask = rng.random((n, n)) < r
    np.fill_diagonal(mask, False)
    return WeightedDigraph._from_trusted_matrix(mask.astype(float), directed=True)


def out_neighborhood(g, i):
    """{j : (i -> j) in g}; contains i only if the self-loop is stored."""
    return set(int(j) for j in g.out_neighbors(i))


def second_neighborhood(g, i):
    """One-step closure: out-neighbors plus their out-neighbors."""
    first = out_neighborhood(g, i)
    second = set(first)
    for j in first:
        second |= out_neighborhood(g, j)
    return second


def read_edge_list(path, n=None, directed=True):
    """Parse the `src dst weight` edge-list format."""
    arcs = []
    max_node = -1
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ConfigurationError(f"{path}:{lineno}: expected 'src dst weight'")
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
            arcs.append((u, v, w))
            max_node = max(max_node, u, v)
    if n is None:
        n = max_node + 1
    return WeightedDigraph(n, arcs, directed=directed)


def write_edge_list(g, path):
    with open(path, "w") as fh:
        fh.write(f"# nodes: {g.n}\n")
        for u, v, w in g.arcs:
            fh.write(f"{u} {v} {w!r}\n")
