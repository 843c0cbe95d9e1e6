"""Adversarial graph bandits with side observations.

Exponential-weights template plus the loss-estimator family (importance
weighting, implicit exploration, thresholded / weighted variants for noisy
observations, geometric resampling, and the restless-copy surrogate for
Erdos-Renyi observation graphs), and follow-the-perturbed-leader with
implicit exploration for combinatorial decision sets.

The chosen node's own loss is always observed, independent of stored
self-loops.
"""

import itertools
import math

import numpy as np

from banditbench.core import (
    AdversarialLossEnvironment,
    ConfigurationError,
    Feedback,
    Policy,
    ProtocolViolation,
    Selection,
    sample_from_probs,
    validate_loss_vector,
)
from banditbench.graph import WeightedDigraph, erdos_renyi, out_neighborhood


# ---------------------------------------------------------------------------
# estimators and rate schedules
# ---------------------------------------------------------------------------

def observed_set(graph, chosen):
    """Out-neighbors of the chosen node plus the node itself."""
    return out_neighborhood(graph, chosen) | {int(chosen)}


def observation_matrix(graph):
    """M[j, i] = 1 iff choosing j reveals i (arc j->i or j == i).

    Cached on the (immutable) graph object.
    """
    cached = getattr(graph, "_obs_matrix", None)
    if cached is not None:
        return cached
    M = (np.asarray(graph.weights) > 0).astype(float)
    np.fill_diagonal(M, 1.0)
    graph._obs_matrix = M
    return M


def set_estimate(loss, o, observed):
    """Importance-weighted estimate loss/o when observed, else 0 (unbiased)."""
    if not observed:
        return 0.0
    if o <= 0.0:
        raise ProtocolViolation("observed an action with observation probability 0")
    return loss / o


def ix_estimate(loss, o, gamma, observed):
    """Implicit-exploration estimate loss/(o + gamma): optimistically biased."""
    if gamma < 0:
        raise ConfigurationError("gamma must be nonnegative")
    if not observed:
        return 0.0
    if gamma == 0.0:
        return set_estimate(loss, o, observed)
    return loss / (o + gamma)


def exp3_ix_rates(t, n_actions, sq_moment_sum):
    """Adaptive schedule: eta_t from accumulated estimate second moments,
    gamma_t = eta_t / 2.

    `sq_moment_sum` is sum over s < t of sum_i p_{s,i} lhat_{s,i}^2.  This
    mirrors the displayed WIX/Res schedules; the source states the regret
    bound for the adaptive variant without printing the schedule itself.
    """
    eta = math.sqrt(math.log(n_actions) / (n_actions + sq_moment_sum))
    return eta, eta / 2.0


def noisy_feedback(weight_row, losses, xi):
    """c_i = s_(I,i) * loss_i + (1 - s_(I,i)) * xi_i for every node i."""
    s = np.asarray(weight_row, dtype=float)
    return s * np.asarray(losses, dtype=float) + (1.0 - s) * np.asarray(xi, dtype=float)


def basic_estimate(c, p, weight_col, gamma):
    """c / (sum_j p_j s_(j,i) + gamma); unbiased at gamma = 0."""
    denom = float(np.dot(p, weight_col)) + gamma
    if denom <= 0.0:
        raise ProtocolViolation("zero observation mass with gamma = 0")
    return c / denom

def ixt_estimate(c, p, weight_col, s_chosen, eps, gamma):
    """Thresholded variant: both numerator and denominator gate on s >= eps."""
    if not 0.0 <= eps <= 1.0:
        raise ConfigurationError("threshold must lie in [0, 1]")
    w = np.asarray(weight_col, dtype=float)
    denom = float(np.dot(p, np.where(w >= eps, w, 0.0))) + gamma
    if s_chosen < eps:
        return 0.0
    if denom <= 0.0:
        raise ProtocolViolation("zero observation mass with gamma = 0")
    return c / denom


def wix_estimate(c, p, weight_col, s_chosen, gamma):
    """Weighted-IX estimate s_(I,i) * c / (sum_j p_j s_(j,i)^2 + gamma)."""
    w = np.asarray(weight_col, dtype=float)
    denom = float(np.dot(p, w * w)) + gamma
    if denom <= 0.0:
        raise ProtocolViolation("zero observation mass with gamma = 0")
    return s_chosen * c / denom


def wix_rates(n_actions, noise_bound, q_sum):
    """eta_t = sqrt(log N / (2 (1 + R + R^2)(N + sum_s Q_s))), gamma_t = R eta_t.

    Q_s is the per-round quadratic term sum_i p_{s,i} lhat_{s,i}^2.
    """
    R = noise_bound
    eta = math.sqrt(math.log(n_actions) / (2.0 * (1.0 + R + R * R) * (n_actions + q_sum)))
    return eta, R * eta


def res_rates(n_actions, sq_moment_sum):
    """eta_t = sqrt(log N / (N^2 + sum_s sum_i p_{s,i} lhat_{s,i}^2))."""
    return math.sqrt(math.log(n_actions) / (n_actions**2 + sq_moment_sum))


def geometric_resampling(o_sampler, gamma, rng, n_actions, delta=0.01):
    """K = min({k : O'(k) = 1} u {U}) with U geometric(gamma).

    `o_sampler` draws one independent copy of the observation indicator per
    call.  The loop hard-stops after ceil(log(N/delta)/gamma) draws; the
    expected number of copies is at most 1/gamma regardless.
    """
    if gamma <= 0.0:
        raise ConfigurationError("geometric resampling needs gamma > 0")
    cap = math.ceil(math.log(n_actions / delta) / gamma)
    u = int(rng.geometric(gamma))
    stop = min(u, cap)
    for k in range(1, stop):
        if o_sampler():
            return k
    return stop


def grix_estimate(k_resample, observed, loss):
    """Resampled estimate K * O * loss (optimistic in expectation)."""
    if k_resample < 1:
        raise ConfigurationError("resampling count K must be >= 1")
    return k_resample * (1.0 if observed else 0.0) * loss


def res_surrogate(p_i, other_obs, rng):
    """Truncated-geometric surrogate G built from the other arms' indicators.

    `other_obs` holds the observation indicators of the arms in
    [N] \\ {I_t, i}, so G is independent of arm i's own indicator.  Copies
    are O'(k) = P(k) + (1 - P(k)) R(k) with P(k) ~ Bernoulli(p_i) and R(k)
    a uniformly permuted indicator; G caps at N - 1.
    """
    other = np.asarray(other_obs)
    n_actions = other.size + 2
    if n_actions < 3:
        raise ConfigurationError("res_surrogate needs at least 3 actions")
    m = n_actions - 2
    perm = rng.permutation(other.size)[:m]
    r = other[perm]
    p_draws = rng.random(m) < p_i
    o_prime = p_draws | (r > 0)
    hits = np.nonzero(o_prime)[0]
    return int(hits[0] + 1) if hits.size else n_actions - 1


# ---------------------------------------------------------------------------
# exponential-weights policies
# ---------------------------------------------------------------------------

class ExpWeightsState:
    """Cumulative loss estimates plus the rate schedule of the moment."""

    def __init__(self, n_actions):
        self.cum_loss_estimates = np.zeros(n_actions)
        self.eta = math.sqrt(math.log(n_actions) / n_actions)
        self.gamma = 0.0

    @property
    def n_actions(self):
        return len(self.cum_loss_estimates)


def exp3_probabilities(state):
    """w_i = (1/N) exp(-eta * Lhat_i), normalized; computed in shifted log-space."""
    z = -state.eta * state.cum_loss_estimates
    z -= z.max()
    w = np.exp(z)
    return w / w.sum()


def exp3_sample(state, rng):
    """Sampling distribution and one action drawn from it."""
    p = exp3_probabilities(state)
    return p, sample_from_probs(p, rng)


class _Exp3Base(Policy):
    """Shared skeleton: adaptive rates, sampling, second-moment bookkeeping."""

    def __init__(self, n_actions):
        self.n_actions = int(n_actions)
        self.action_space = f"nodes:{n_actions}"
        self.state = ExpWeightsState(n_actions)
        self.sq_moment_sum = 0.0
        self._last_probs = None

    def rates(self, t):
        raise NotImplementedError

    def select(self, t, rng):
        self.state.eta, self.state.gamma = self.rates(t)
        p, action = exp3_sample(self.state, rng)
        self._last_probs = p
        return Selection(action=action, probs=p)

    def estimates(self, t, action, feedback):
        raise NotImplementedError

    def update(self, t, action, feedback, rng):
        est = self.estimates(t, action, feedback)
        self.state.cum_loss_estimates += est
        self.sq_moment_sum += float(np.dot(self._last_probs, est * est))


class Exp3SETPolicy(_Exp3Base):
    """Exponential weights with unbiased importance-weighted estimates.

    Uses the same adaptive learning rate as the IX variant (the printed
    schedule needs the graphs' independence numbers in advance) but no
    implicit-exploration bias.
    """

    def rates(self, t):
        eta, _ = exp3_ix_rates(t, self.n_actions, self.sq_moment_sum)
        return eta, 0.0

    def estimates(self, t, action, feedback):
        p = self._last_probs
        M = observation_matrix(feedback.graph)
        o = M.T @ p
        est = np.zeros(self.n_actions)
        for i, loss in feedback.observed.items():
            est[i] = set_estimate(loss, o[i], True)
        return est


class Exp3IXPolicy(_Exp3Base):
    """Exp3 with implicit exploration: loss/(o + gamma) estimates."""

    def rates(self, t):
        return exp3_ix_rates(t, self.n_actions, self.sq_moment_sum)

    def estimates(self, t, action, feedback):
        p = self._last_probs
        M = observation_matrix(feedback.graph)
        o = M.T @ p
        est = np.zeros(self.n_actions)
        for i, loss in feedback.observed.items():
            est[i] = ix_estimate(loss, o[i], self.state.gamma, True)
        return est


class _NoisyExp3Base(_Exp3Base):
    """Template for the noisy-observation estimators (full c-vector feedback)."""

    def __init__(self, n_actions, noise_bound):
        super().__init__(n_actions)
        self.noise_bound = float(noise_bound)

    def rates(self, t):
        return wix_rates(self.n_actions, self.noise_bound, self.sq_moment_sum)


class Exp3WIXPolicy(_NoisyExp3Base):
    """Weighted implicit exploration; needs no threshold tuning."""

    def estimates(self, t, action, feedback):
        p = self._last_probs
        S = effective_weights(feedback.graph)
        c = feedback.c
        denom = p @ (S * S) + self.state.gamma
        return S[action] * c / denom


class Exp3IXtPolicy(_NoisyExp3Base):
    """Thresholded noisy estimates; eps defaults to the alpha*-attaining cut."""

    def __init__(self, n_actions, noise_bound, eps):
        super().__init__(n_actions, noise_bound)
        if not 0.0 <= eps <= 1.0:
            raise ConfigurationError("threshold must lie in [0, 1]")
        self.eps = float(eps)

    def estimates(self, t, action, feedback):
        p = self._last_probs
        S = effective_weights(feedback.graph)
        gated = np.where(S >= self.eps, S, 0.0)
        denom = p @ gated + self.state.gamma
        keep = S[action] >= self.eps
        return np.where(keep, feedback.c, 0.0) / denom


class Exp3BasicPolicy(_NoisyExp3Base):
    """Plain reweighted noisy estimates (high variance; kept for comparison)."""

    def estimates(self, t, action, feedback):
        p = self._last_probs
        S = effective_weights(feedback.graph)
        denom = p @ S + self.state.gamma
        return feedback.c / denom


def effective_weights(graph):
    """Weight matrix with the unit diagonal of the own-loss convention."""
    S = np.array(graph.weights)
    np.fill_diagonal(S, 1.0)
    return S


class Exp3ResPolicy(_Exp3Base):
    """Exp3 for Erdos-Renyi observation graphs with unknown edge probability.

    Loss estimates are G * O * loss with G the truncated-geometric
    surrogate built from the *other* arms' observation indicators; the
    chosen arm itself is always observed (observation probability one) and
    keeps its raw loss.
    """

    def __init__(self, n_actions):
        if n_actions < 3:
            raise ConfigurationError("Exp3-Res needs at least 3 actions")
        super().__init__(n_actions)

    def rates(self, t):
        return res_rates(self.n_actions, self.sq_moment_sum), 0.0

    def estimates(self, t, action, feedback):
        p = self._last_probs
        obs = np.zeros(self.n_actions)
        for i in feedback.observed:
            obs[i] = 1.0
        est = np.zeros(self.n_actions)
        for i, loss in feedback.observed.items():
            if i == action:
                est[i] = loss
                continue
            others = np.delete(obs, [action, i])
            g = res_surrogate(p[i], others, feedback.rng)
            est[i] = g * loss
        return est

    def update(self, t, action, feedback, rng):
        feedback.extras["rng"] = rng  # surrogate draws come from the policy stream
        super().update(t, action, feedback, rng)


# ---------------------------------------------------------------------------
# follow the perturbed leader with implicit exploration
# ---------------------------------------------------------------------------

class FplState:
    """Cumulative loss-estimate vector plus the decision-set oracle."""

    def __init__(self, n_components, oracle, max_support, eta=1.0):
        self.cum_loss_estimates = np.zeros(n_components)
        self.oracle = oracle
        self.max_support = int(max_support)
        self.eta = float(eta)


def fpl_select(state, rng, z=None):
    """argmin over the decision set of v . (eta * Lhat - Z).

    Z has i.i.d. unit-mean exponential components; pass `z` explicitly to
    force a deterministic draw (test hook).
    """
    if z is None:
        z = rng.standard_exponential(len(state.cum_loss_estimates))
    score = state.eta * state.cum_loss_estimates - np.asarray(z, dtype=float)
    v = np.asarray(state.oracle(score), dtype=float)
    if v.shape != state.cum_loss_estimates.shape or not np.all((v == 0) | (v == 1)):
        raise ProtocolViolation("decision oracle must return a binary vector")
    if v.sum() > state.max_support:
        raise ProtocolViolation("decision vector exceeds the support bound m")
    return v


def unit_vector_oracle(n_components):
    """Decision set = single actions (m = 1)."""

    def oracle(score):
        v = np.zeros(n_components)
        v[int(np.argmin(score))] = 1.0
        return v

    return oracle


def top_m_oracle(n_components, m):
    """Decision set = all subsets of exactly m components."""

    def oracle(score):
        v = np.zeros(n_components)
        v[np.argsort(score, kind="stable")[:m]] = 1.0
        return v

    return oracle


def matching_oracle(n_users, n_feeds, allowed=None):
    """Decision set = assignments of users to distinct feeds.

    Components are the user x feed pairs, flattened row-major.  Exhaustive
    search; intended for instances up to about 5 x 5.
    """
    if n_feeds < n_users:
        raise ConfigurationError("need at least as many feeds as users")
    if n_feeds > 6:
        raise ConfigurationError("exhaustive matching oracle capped at 6 feeds")
    pairs = list(itertools.permutations(range(n_feeds), n_users))

    def ok(assignment):
        if allowed is None:
            return True
        return all(allowed[u][f] for u, f in enumerate(assignment))

    assignments = [a for a in pairs if ok(a)]
    if not assignments:
        raise ConfigurationError("no feasible matching")

    def oracle(score):
        best, best_cost = None, None
        for a in assignments:
            cost = sum(score[u * n_feeds + f] for u, f in enumerate(a))
            if best_cost is None or cost < best_cost:
                best, best_cost = a, cost
        v = np.zeros(n_users * n_feeds)
        for u, f in enumerate(best):
            v[u * n_feeds + f] = 1.0
        return v

    return oracle, n_users * n_feeds


class FplIXPolicy(Policy):
    """FPL-IX: perturbed leader plus geometric-resampling loss estimates."""

    def __init__(self, n_components, oracle, max_support, alpha_tilde=None, resample_delta=0.01):
        self.n_components = int(n_components)
        self.action_space = f"components:{n_components}"
        self.state = FplState(n_components, oracle, max_support)
        self.alpha_tilde = alpha_tilde  # per-round independence-number proxy
        self.alpha_sum = 0.0
        self.resample_delta = float(resample_delta)
        self._gamma = 1.0

    def rates(self, t):
        n, m = self.n_components, self.state.max_support
        eta = math.sqrt((math.log(n) + 1.0) / (m * (n + self.alpha_sum)))
        return eta, eta

    def select(self, t, rng):
        self.state.eta, self._gamma = self.rates(t)
        v = fpl_select(self.state, rng)
        return Selection(action=v)

    def update(self, t, action, feedback, rng):
        graph = feedback.graph
        M = observation_matrix(graph)
        observed = feedback.observed
        est = np.zeros(self.n_components)
        first_hit = {i: None for i in observed}
        caps = {
            i: min(int(rng.geometric(self._gamma)),
                   math.ceil(math.log(self.n_components / self.resample_delta) / self._gamma))
            for i in observed
        }
        k = 0
        while any(hit is None and k < caps[i] for i, hit in first_hit.items()):
            k += 1
            copy = fpl_select(self.state, rng)
            o_copy = (M.T @ copy) > 0
            for i, hit in first_hit.items():
                if hit is None and k < caps[i] and o_copy[i]:
                    first_hit[i] = k
        for i, loss in observed.items():
            k_i = first_hit[i] if first_hit[i] is not None else caps[i]
            est[i] = grix_estimate(max(k_i, 1), True, loss)
        self.state.cum_loss_estimates += est
        alpha_t = self.alpha_tilde if self.alpha_tilde is not None else self.n_components
        self.alpha_sum += float(alpha_t)


# ---------------------------------------------------------------------------
# environments
# ---------------------------------------------------------------------------

class _LossSource:
    """Scripted or stochastic per-round loss vectors."""

    def __init__(self, n_actions, script=None, means=None, kind="bernoulli"):
        if (script is None) == (means is None):
            raise ConfigurationError("provide exactly one of script / means")
        self.n_actions = n_actions
        self.script = None if script is None else np.asarray(script, dtype=float)
        self.means = None if means is None else np.asarray(means, dtype=float)
        self.kind = kind
        if self.script is not None and self.script.shape[1] != n_actions:
            raise ConfigurationError("loss script width must equal the action count")

    def row(self, t, rng):
        if self.script is not None:
            if t > len(self.script):
                raise ConfigurationError(f"loss script ends before round {t}")
            losses = self.script[t - 1]
        elif self.kind == "bernoulli":
            losses = (rng.random(self.n_actions) < self.means).astype(float)
        else:  # uniform noise around the means, clipped to [0, 1]
            losses = np.clip(self.means + rng.uniform(-0.2, 0.2, self.n_actions), 0.0, 1.0)
        return validate_loss_vector(losses, self.n_actions)


class _GraphSource:
    """Fixed graph, or a fresh Erdos-Renyi draw every round."""

    def __init__(self, n_actions, graph=None, er_probability=None):
        if (graph is None) == (er_probability is None):
            raise ConfigurationError("provide exactly one of graph / er_probability")
        if graph is not None and graph.n != n_actions:
            raise ConfigurationError("graph size must equal the action count")
        self.n_actions = n_actions
        self.graph = graph
        self.er_probability = er_probability

    def round_graph(self, rng):
        if self.graph is not None:
            return self.graph
        return erdos_renyi(self.n_actions, self.er_probability, rng)


def parse_adversary_script(rounds, n_actions, named_graphs=None):
    """Adversary script: a JSON array of rounds, each holding `losses` plus
    an inline graph (`edges`), a named fixed graph (`graph`), or an ER spec
    (`er`).  Returns (loss matrix, per-round graph resolver list).

    Entries in the resolver are either a WeightedDigraph or the float ER
    probability to draw that round.
    """
    named = {"complete": WeightedDigraph.complete(n_actions),
             "empty": WeightedDigraph.empty(n_actions)}
    named.update(named_graphs or {})
    losses = []
    graphs = []
    inline_cache = {}
    for i, entry in enumerate(rounds):
        if "losses" not in entry:
            raise ConfigurationError(f"script round {i}: missing losses")
        losses.append(entry["losses"])
        if "edges" in entry:
            key = tuple(tuple(a) for a in entry["edges"])
            if key not in inline_cache:
                inline_cache[key] = WeightedDigraph(
                    n_actions, [tuple(a) for a in entry["edges"]],
                    directed=entry.get("directed", True),
                )
            graphs.append(inline_cache[key])
        elif "graph" in entry:
            if entry["graph"] not in named:
                raise ConfigurationError(f"script round {i}: unknown graph {entry['graph']!r}")
            graphs.append(named[entry["graph"]])
        elif "er" in entry:
            graphs.append(float(entry["er"]))
        else:
            raise ConfigurationError(f"script round {i}: needs edges, graph, or er")
    return np.asarray(losses, dtype=float), graphs


class _ScriptGraphSource:
    """Per-round graphs resolved from a parsed adversary script."""

    def __init__(self, n_actions, graph_entries):
        self.n_actions = n_actions
        self.entries = list(graph_entries)
        self._next = 0

    def reset(self):
        self._next = 0

    def round_graph(self, rng):
        if self._next >= len(self.entries):
            raise ConfigurationError("adversary script ended early")
        entry = self.entries[self._next]
        self._next += 1
        if isinstance(entry, float):
            return erdos_renyi(self.n_actions, entry, rng)
        return entry


class SideObservationEnv(AdversarialLossEnvironment):
    """Perfect side observations: reveals {i: loss_i} for the observed set."""

    def __init__(self, n_actions, losses, graphs):
        super().__init__()
        self.n_actions = int(n_actions)
        self.action_space = f"nodes:{n_actions}"
        self.losses = losses
        self.graphs = graphs

    @classmethod
    def from_script(cls, n_actions, rounds, named_graphs=None):
        """Build from the JSON adversary-script format (see
        :func:`parse_adversary_script`)."""
        losses, graphs = parse_adversary_script(rounds, n_actions, named_graphs)
        return cls(n_actions, _LossSource(n_actions, script=losses),
                   _ScriptGraphSource(n_actions, graphs))

    def start(self, horizon, rng):
        super().start(horizon, rng)
        self._rng_losses, self._rng_graphs = rng.spawn(2)
        if hasattr(self.graphs, "reset"):
            self.graphs.reset()

    def step(self, t, action, rng):
        losses = self.losses.row(t, self._rng_losses)
        graph = self.graphs.round_graph(self._rng_graphs)
        self._loss_rows.append(losses)
        obs = {int(i): float(losses[i]) for i in sorted(observed_set(graph, action))}
        return Feedback(value=float(losses[action]), extras={"graph": graph, "observed": obs})


class NoisySideObservationEnv(AdversarialLossEnvironment):
    """Weighted observation system: c_i = s_(I,i) loss_i + (1 - s_(I,i)) xi_i.

    xi is zero-mean uniform on [-R, R], drawn per node per round from the
    environment stream (independent of the action, so paired seeds share
    noise).  The chosen node's own feedback is its exact loss.
    """

    def __init__(self, n_actions, losses, graph, noise_bound):
        super().__init__()
        if graph.n != n_actions:
            raise ConfigurationError("graph size must equal the action count")
        self.n_actions = int(n_actions)
        self.action_space = f"nodes:{n_actions}"
        self.losses = losses
        self.graph = graph
        self.noise_bound = float(noise_bound)
        self._S = effective_weights(graph)

    def start(self, horizon, rng):
        super().start(horizon, rng)
        self._rng_losses, self._rng_noise = rng.spawn(2)

    def step(self, t, action, rng):
        losses = self.losses.row(t, self._rng_losses)
        xi = self._rng_noise.uniform(-self.noise_bound, self.noise_bound, self.n_actions)
        self._loss_rows.append(losses)
        c = noisy_feedback(self._S[action], losses, xi)
        return Feedback(value=float(losses[action]), extras={"graph": self.graph, "c": c})


class CombinatorialSideObsEnv(AdversarialLossEnvironment):
    """Semi-bandit with side observations over components.

    The learner plays a binary vector; it observes the losses of its own
    nonzero components plus every component reachable by one arc from
    them.
    """

    def __init__(self, n_components, losses, graphs, oracle):
        super().__init__()
        self.n_components = int(n_components)
        self.action_space = f"components:{n_components}"
        self.losses = losses
        self.graphs = graphs
        self.oracle = oracle  # used for the hindsight comparator

    def start(self, horizon, rng):
        super().start(horizon, rng)
        self._rng_losses, self._rng_graphs = rng.spawn(2)

    def step(self, t, action, rng):
        v = np.asarray(action, dtype=float)
        losses = self.losses.row(t, self._rng_losses)
        graph = self.graphs.round_graph(self._rng_graphs)
        self._loss_rows.append(losses)
        M = observation_matrix(graph)
        obs_mask = (M.T @ v) > 0
        obs = {int(i): float(losses[i]) for i in np.nonzero(obs_mask)[0]}
        return Feedback(value=float(v @ losses), extras={"graph": graph, "observed": obs})

    def regret_curve(self, actions, values):
        cum = np.cumsum(self.realized_losses, axis=0)
        best = np.empty(len(actions))
        for t in range(len(actions)):
            v = np.asarray(self.oracle(cum[t]), dtype=float)
            best[t] = v @ cum[t]
        return np.cumsum(values) - best
