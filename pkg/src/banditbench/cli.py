"""Config-driven experiment runner.

Verbs: ``run <spec>`` (path or bundled preset name), ``list [filter]``,
``validate <spec>``.  A spec is JSON with a name, an environment, a list
of labeled policies, a horizon T, and a seed list; each policy entry may
carry ``environment_overrides`` merged into the environment spec (the
loss stream is seeded independently of the observation-system stream, so
overriding the graph keeps the loss script identical).

Outputs: one trace CSV per (policy, seed) plus a summary CSV, written
atomically (temp then rename).  ``BANDIT_BENCH_OUT`` overrides the output
directory.
"""

import argparse
import concurrent.futures
import importlib.resources
import json
import math
import os
import sys
import tempfile
import time
import warnings

import numpy as np

from banditbench import funcopt, graph, infarms, influence, kernel, polymatroid, sideobs, spectral
from banditbench.core import ConfigurationError, Policy, Selection, run_episode
from banditbench.rng import RngStream

TRACE_COLUMNS = ("round", "action", "loss_or_reward", "cum_regret")
SUMMARY_COLUMNS = ("label", "T", "mean_final_regret", "stderr", "runtime_s")


# ---------------------------------------------------------------------------
# component registry
# ---------------------------------------------------------------------------

def _build_graph(spec, n):
    if "name" in spec:
        name = spec["name"]
        if name == "complete":
            return graph.WeightedDigraph.complete(n)
        if name == "empty":
            return graph.WeightedDigraph.empty(n)
        raise ConfigurationError(f"unknown graph name {name!r}")
    if "er" in spec:
        return None  # regenerated per round by the environment
    if "edges" in spec:
        return graph.WeightedDigraph(n, [tuple(a) for a in spec["edges"]],
                                     directed=spec.get("directed", True))
    if "file" in spec:
        return graph.read_edge_list(spec["file"], n=n, directed=spec.get("directed", True))
    if "lower_bound" in spec:
        lb = spec["lower_bound"]
        return spectral.lower_bound_graph(lb["blocks"], lb["block_size"], lb["eps"])
    raise ConfigurationError(f"cannot parse graph spec {spec!r}")


def _loss_source(spec, n):
    if "script" in spec:
        return sideobs._LossSource(n, script=spec["script"])
    return sideobs._LossSource(n, means=spec["means"], kind=spec.get("kind", "bernoulli"))


def _env_sideobs(spec):
    n = spec["n"]
    if "script" in spec:
        rounds = spec["script"]
        if isinstance(rounds, str):
            with open(rounds) as fh:
                rounds = json.load(fh)
        return sideobs.SideObservationEnv.from_script(n, rounds)
    losses = _loss_source(spec["losses"], n)
    gspec = spec["graph"]
    if "er" in gspec:
        graphs = sideobs._GraphSource(n, er_probability=gspec["er"])
    else:
        graphs = sideobs._GraphSource(n, graph=_build_graph(gspec, n))
    return sideobs.SideObservationEnv(n, losses, graphs)


def _env_noisy_sideobs(spec):
    n = spec["n"]
    g = _build_graph(spec["graph"], n)
    return sideobs.NoisySideObservationEnv(n, _loss_source(spec["losses"], n), g, spec["noise_bound"])


def _env_smooth_graph(spec):
    g = _build_graph(spec["graph"], spec.get("n"))
    means = spec.get("means")
    if means is None:
        lb = spec["graph"]["lower_bound"]
        means = spectral.block_reward_means(lb["blocks"], lb["block_size"], spec["block_values"])
    env = spectral.SmoothGraphRewardEnv(means, noise_scale=spec.get("noise", 0.25),
                                        noise=spec.get("noise_kind", "gaussian"))
    env.graph = g
    return env


def _env_linear_reward(spec):
    contexts = spec.get("contexts")
    if contexts is None:
        contexts = kernel.read_context_csv(spec["contexts_csv"])
    return kernel.LinearRewardEnv(contexts, spec["theta"], noise_scale=spec.get("noise", 0.1))


def _env_polymatroid(spec):
    if "flow" in spec:
        f = spec["flow"]
        M = polymatroid.flow_polymatroid(f["size"], f["max_flow"])
        costs = polymatroid.flow_weights(f["size"], f["max_flow"], f["gap"])
        means = 1.0 - costs  # bases have constant sum, so max reward = min cost
    else:
        M = polymatroid.load_instance(spec["instance"])
        means = np.asarray(spec["means"], dtype=float)
    return polymatroid.PolymatroidSemiBanditEnv(M, means)


def _env_reservoir(spec):
    return infarms.canonical_reservoir(spec["beta"], mu_star=spec.get("mu_star", 0.0),
                                       noise_halfwidth=spec.get("noise", 0.1))


def _env_influence(spec):
    if "star" in spec:
        return influence.InfluenceMatrix.symmetric_star(spec["star"]["n"], spec["star"].get("p", 0.9))
    if "csv" in spec:
        return influence.InfluenceMatrix.from_csv(spec["csv"])
    if "edges_file" in spec:
        return influence.InfluenceMatrix.from_edge_list(spec["edges_file"], n=spec.get("n"))
    return influence.InfluenceMatrix(spec["matrix"])


def _env_function(spec):
    return dict(spec)  # resolved at job time (oracle is budgeted per run)


ENVIRONMENTS = {
    "sideobs": _env_sideobs,
    "noisy_sideobs": _env_noisy_sideobs,
    "smooth_graph": _env_smooth_graph,
    "linear_reward": _env_linear_reward,
    "polymatroid": _env_polymatroid,
    "reservoir": _env_reservoir,
    "influence": _env_influence,
    "function": _env_function,
}


class UniformRandomPolicy(Policy):
    """Uniform action baseline for node environments."""

    def __init__(self, n_actions):
        self.n_actions = int(n_actions)
        self.action_space = f"nodes:{n_actions}"

    def select(self, t, rng):
        p = np.full(self.n_actions, 1.0 / self.n_actions)
        return Selection(action=int(rng.integers(self.n_actions)), probs=p)

    def update(self, t, action, feedback, rng):
        pass


def _n_actions(env):
    return int(env.action_space.split(":")[1])


def _spectral_model(env, spec):
    g = getattr(env, "graph", None)
    if g is None:
        raise ConfigurationError("spectral policies need a graph-backed environment")
    lam = spec.get("lam", 0.01)
    spectrum = graph.eigendecompose(graph.laplacian(g))
    model = spectral.SpectralModel(spectrum, lam=lam,
                                   C=spec.get("C", 1.0), R=spec.get("R", 0.25))
    if spec.get("C") is None:
        alpha = spectrum.Q.T @ np.asarray(env.means, dtype=float)
        model.C = float(np.sqrt(np.sum(model.lam_reg * alpha**2)))
    return model


def _pol_exp3set(spec, env, T):
    return sideobs.Exp3SETPolicy(_n_actions(env))


def _pol_exp3ix(spec, env, T):
    return sideobs.Exp3IXPolicy(_n_actions(env))


def _pol_exp3ixt(spec, env, T):
    eps = spec.get("eps")
    if eps is None:
        _, eps = graph.effective_independence_number(env.graph)
    return sideobs.Exp3IXtPolicy(_n_actions(env), env.noise_bound, eps)


def _pol_exp3wix(spec, env, T):
    return sideobs.Exp3WIXPolicy(_n_actions(env), env.noise_bound)


def _pol_exp3basic(spec, env, T):
    return sideobs.Exp3BasicPolicy(_n_actions(env), env.noise_bound)


def _pol_exp3res(spec, env, T):
    n = _n_actions(env)
    r = getattr(getattr(env, "graphs", None), "er_probability", None)
    if r is not None and r < math.log(T) / (2 * n - 2):
        warnings.warn(
            f"exp3res: edge probability {r} is below log(T)/(2N-2) = "
            f"{math.log(T) / (2 * n - 2):.4f}; its guarantee does not apply",
            RuntimeWarning,
            stacklevel=2,
        )
    return sideobs.Exp3ResPolicy(n)


def _pol_fplix(spec, env, T):
    n = _n_actions(env)
    oracle_spec = spec.get("oracle", {"kind": "unit"})
    kind = oracle_spec["kind"]
    if kind == "unit":
        oracle, m = sideobs.unit_vector_oracle(n), 1
    elif kind == "topm":
        m = oracle_spec["m"]
        oracle = sideobs.top_m_oracle(n, m)
    elif kind == "matching":
        oracle, n_comp = sideobs.matching_oracle(oracle_spec["users"], oracle_spec["feeds"],
                                                 oracle_spec.get("allowed"))
        m = oracle_spec["users"]
        if n_comp != n:
            raise ConfigurationError("matching oracle size does not match the environment")
    else:
        raise ConfigurationError(f"unknown oracle kind {kind!r}")
    return sideobs.FplIXPolicy(n, oracle, m, alpha_tilde=spec.get("alpha_tilde"))


def _pol_spectralucb(spec, env, T):
    return spectral.SpectralUCBPolicy(_spectral_model(env, spec), T,
                                      delta=spec.get("delta", 0.05),
                                      c_schedule=spec.get("c_schedule", "constant"))


def _pol_spectralts(spec, env, T):
    return spectral.SpectralTSPolicy(_spectral_model(env, spec), T,
                                     delta=spec.get("delta", 0.05), v=spec.get("v"))


def _pol_spectraleliminator(spec, env, T):
    return spectral.SpectralEliminatorPolicy(_spectral_model(env, spec), T,
                                             beta=spec.get("beta"),
                                             delta=spec.get("delta", 0.05))


def _pol_kernelucb(spec, env, T):
    kind = spec.get("kernel", "linear")
    kfn = kernel.KernelFn(kind, sigma=spec.get("sigma", 1.0), degree=spec.get("degree", 2))
    return kernel.KernelUCBPolicy(env.arms, kernel=kfn,
                                  gamma=spec.get("gamma", 1.0), eta=spec.get("eta", 1.0))


def _pol_opm(spec, env, T):
    return polymatroid.OPMPolicy(env.M, init=spec.get("init", "idealized"))


def _pol_ucb1(spec, env, T):
    means = np.asarray(env.means, dtype=float)
    return spectral.UCB1Policy(_n_actions(env), lo=spec.get("lo", float(means.min() - 1)),
                               hi=spec.get("hi", float(means.max() + 1)))


def _pol_uniform(spec, env, T):
    return UniformRandomPolicy(_n_actions(env))


EPISODE_POLICIES = {
    "exp3set": _pol_exp3set,
    "exp3ix": _pol_exp3ix,
    "exp3ixt": _pol_exp3ixt,
    "exp3wix": _pol_exp3wix,
    "exp3basic": _pol_exp3basic,
    "exp3res": _pol_exp3res,
    "fplix": _pol_fplix,
    "spectralucb": _pol_spectralucb,
    "spectralts": _pol_spectralts,
    "spectraleliminator": _pol_spectraleliminator,
    "kernelucb": _pol_kernelucb,
    "opm": _pol_opm,
    "ucb1": _pol_ucb1,
    "uniform": _pol_uniform,
}

RUNNER_POLICIES = ("hoo", "stosoo", "poo", "siri", "bare")


def list_components(name_filter=""):
    """Sorted registry names (policies and environments) matching the filter."""
    names = sorted(set(EPISODE_POLICIES) | set(RUNNER_POLICIES) | set(ENVIRONMENTS))
    return [n for n in names if name_filter in n]


# ---------------------------------------------------------------------------
# jobs
# ---------------------------------------------------------------------------

def _format_action(action):
    if isinstance(action, (int, np.integer)):
        return str(int(action))
    arr = np.atleast_1d(np.asarray(action, dtype=float))
    if np.all((arr == 0) | (arr == 1)):
        return "|".join(str(i) for i in np.nonzero(arr)[0])
    return "|".join(repr(float(v)) for v in arr)


def _rows_from_trace(trace):
    return [(t, _format_action(a), v, c) for t, a, v, c in trace.rounds]


def _run_function_job(policy_spec, env_spec, T, rng):
    oracle = funcopt.FunctionOracle.builtin(env_spec["name"], T,
                                            noise_halfwidth=env_spec.get("noise", 0.0))
    fn, f_star, _ = funcopt.BUILTIN_FUNCTIONS[env_spec["name"]]
    gen = rng.stream("optimizer")
    kind = policy_spec["kind"]
    if kind == "hoo":
        inst = funcopt.HOO(oracle, policy_spec.get("nu", 1.0), policy_spec.get("rho", 0.5))
        inst.run(T, gen)
        rec = inst.recommend(gen)
        evaluated = inst.evaluated
    elif kind == "stosoo":
        res = funcopt.stosoo_run(oracle, T, k=policy_spec.get("k"),
                                 delta=policy_spec.get("delta"),
                                 h_max=policy_spec.get("h_max"), rng=gen)
        rec, evaluated = res.recommended, res.evaluated
    elif kind == "poo":
        res = funcopt.poo_run(oracle, T, rho_max=policy_spec.get("rho_max", 0.9),
                              nu_max=policy_spec.get("nu_max", 1.0), rng=gen)
        rec, evaluated = res.recommended, res.evaluated
    else:
        raise ConfigurationError(f"unknown optimizer {kind!r}")
    cum = 0.0
    rows = []
    for t, (x, value) in enumerate(evaluated, 1):
        cum += f_star - fn(float(np.atleast_1d(x)[0]))
        rows.append((t, _format_action(x), float(value), cum))
    final = funcopt.simple_regret(f_star, fn, rec)
    return rows, final


def _run_siri_job(policy_spec, env_spec, T, rng):
    reservoir = _env_reservoir(env_spec)
    config = infarms.SiriConfig(
        beta=policy_spec.get("beta", env_spec["beta"]),
        sample_bound=policy_spec.get("C", reservoir.sample_bound),
        delta=policy_spec.get("delta", 0.1),
        init_constant=policy_spec.get("A", 0.25),
        horizon=T,
    )
    result = infarms.siri_run(reservoir, config, rng.stream("siri"))
    gaps = reservoir.mu_star - result.arm_means
    rows = []
    cum = 0.0
    t = 0
    for arm, pulls in result.batches:
        for _ in range(pulls):
            t += 1
            cum += float(gaps[arm])
            rows.append((t, str(arm), float(result.arm_means[arm]), cum))
    return rows, result.simple_regret


def _run_influence_job(policy_spec, env_spec, T, rng):
    M = _env_influence(env_spec)
    gen = rng.stream("influence")
    if policy_spec["kind"] == "bare":
        run = influence.bare_run(M, T, gen)
    else:
        run = influence.uniform_run(M, T, gen)
    rows = [
        (t, str(node), float(rew), float(c))
        for t, (node, rew, c) in enumerate(zip(run.nodes, run.rewards, run.cum_regret), 1)
    ]
    return rows, run.final_regret


def run_job(env_spec, policy_spec, T, seed, rep=0):
    """Execute one (policy, seed) cell; returns (rows, final_regret, seconds)."""
    start = time.perf_counter()
    env_spec = dict(env_spec)
    env_spec.update(policy_spec.get("environment_overrides", {}))
    rng = RngStream(seed, run=rep)
    kind = policy_spec["kind"]
    env_kind = env_spec["kind"]
    if kind in ("hoo", "stosoo", "poo"):
        rows, final = _run_function_job(policy_spec, env_spec, T, rng)
    elif kind == "siri":
        rows, final = _run_siri_job(policy_spec, env_spec, T, rng)
    elif env_kind == "influence":
        rows, final = _run_influence_job(policy_spec, env_spec, T, rng)
    else:
        builder = ENVIRONMENTS.get(env_kind)
        if builder is None:
            raise ConfigurationError(
                f"unknown environment {env_kind!r}; valid: {sorted(ENVIRONMENTS)}"
            )
        env = builder({k: v for k, v in env_spec.items() if k != "kind"})
        policy = EPISODE_POLICIES[kind](
            {k: v for k, v in policy_spec.items() if k != "kind"}, env, T
        )
        trace = run_episode(policy, env, T, rng)
        rows, final = _rows_from_trace(trace), trace.final_regret
    return rows, final, time.perf_counter() - start


# ---------------------------------------------------------------------------
# experiment spec handling and outputs
# ---------------------------------------------------------------------------

def validate_spec(spec):
    """Raise ConfigurationError on a malformed experiment spec."""
    for key in ("name", "T", "seeds", "environment", "policies"):
        if key not in spec:
            raise ConfigurationError(f"spec is missing {key!r}")
    if int(spec["T"]) < 1:
        raise ConfigurationError("horizon T must be >= 1")
    if not spec["seeds"]:
        raise ConfigurationError("seed list must be nonempty")
    if not spec["policies"]:
        raise ConfigurationError("need at least one policy")
    labels = [p.get("label") for p in spec["policies"]]
    if None in labels or len(set(labels)) != len(labels):
        raise ConfigurationError("policies need unique labels")
    env_kind = spec["environment"].get("kind")
    if env_kind not in ENVIRONMENTS:
        raise ConfigurationError(
            f"unknown environment {env_kind!r}; valid: {sorted(ENVIRONMENTS)}"
        )
    valid = sorted(set(EPISODE_POLICIES) | set(RUNNER_POLICIES))
    for p in spec["policies"]:
        if p.get("kind") not in valid:
            raise ConfigurationError(f"unknown policy {p.get('kind')!r}; valid: {valid}")
    return spec


def _atomic_write(path, text):
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _trace_csv(rows):
    lines = [",".join(TRACE_COLUMNS)]
    for t, action, value, cum in rows:
        lines.append(f"{t},{action},{float(value)!r},{float(cum)!r}")
    return "\n".join(lines) + "\n"


def load_spec(source):
    """Resolve a spec path, bundled preset name, or dict."""
    if isinstance(source, dict):
        return source
    if os.path.exists(source):
        with open(source) as fh:
            return json.load(fh)
    preset = importlib.resources.files("banditbench").joinpath(f"presets/{source}.json")
    if preset.is_file():
        return json.loads(preset.read_text())
    raise ConfigurationError(f"spec {source!r} is neither a file nor a bundled preset")


def run_experiment(source, out_dir=None, parallel=1, quiet=False):
    """Run every (policy, seed) cell; write trace CSVs plus a summary CSV.

    Returns the experiment output directory.
    """
    spec = validate_spec(load_spec(source))
    out_root = out_dir or os.environ.get("BANDIT_BENCH_OUT", "bandit-bench-out")
    exp_dir = os.path.join(out_root, spec["name"])
    os.makedirs(exp_dir, exist_ok=True)
    T = int(spec["T"])
    jobs = [
        (policy, int(seed))
        for policy in spec["policies"]
        for seed in spec["seeds"]
    ]
    results = {}
    if parallel > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=parallel) as pool:
            futures = {
                pool.submit(run_job, spec["environment"], policy, T, seed): (policy["label"], seed)
                for policy, seed in jobs
            }
            for fut in concurrent.futures.as_completed(futures):
                results[futures[fut]] = fut.result()
    else:
        for policy, seed in jobs:
            results[(policy["label"], seed)] = run_job(spec["environment"], policy, T, seed)
    summary_lines = [",".join(SUMMARY_COLUMNS)]
    for policy in spec["policies"]:
        label = policy["label"]
        finals = []
        runtime = 0.0
        for seed in spec["seeds"]:
            rows, final, elapsed = results[(label, int(seed))]
            finals.append(final)
            runtime += elapsed
            _atomic_write(os.path.join(exp_dir, f"{label}_seed{seed}.csv"), _trace_csv(rows))
        finals = np.asarray(finals, dtype=float)
        stderr = float(finals.std(ddof=1) / np.sqrt(len(finals))) if len(finals) > 1 else 0.0
        summary_lines.append(f"{label},{T},{float(finals.mean())!r},{stderr!r},{runtime:.3f}")
        if not quiet:
            print(f"{spec['name']}/{label}: mean final regret {finals.mean():.4f} "
                  f"+- {stderr:.4f} over {len(finals)} seeds")
    _atomic_write(os.path.join(exp_dir, "summary.csv"), "\n".join(summary_lines) + "\n")
    return exp_dir


def main(argv=None):
    parser = argparse.ArgumentParser(prog="bandit-bench",
                                     description="seeded bandit experiment runner")
    sub = parser.add_subparsers(dest="verb", required=True)
    p_run = sub.add_parser("run", help="run an experiment spec or bundled preset")
    p_run.add_argument("spec")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--parallel", type=int, default=1, metavar="N_WORKERS")
    p_run.add_argument("--quiet", action="store_true")
    p_list = sub.add_parser("list", help="list registered components")
    p_list.add_argument("filter", nargs="?", default="")
    p_val = sub.add_parser("validate", help="validate a spec without running it")
    p_val.add_argument("spec")
    args = parser.parse_args(argv)
    if args.verb == "list":
        for name in list_components(args.filter):
            print(name)
        return 0
    if args.verb == "validate":
        try:
            validate_spec(load_spec(args.spec))
        except (ConfigurationError, OSError, json.JSONDecodeError) as exc:
            print(f"invalid spec: {exc}", file=sys.stderr)
            return 2
        print("spec ok")
        return 0
    try:
        run_experiment(args.spec, out_dir=args.out, parallel=args.parallel, quiet=args.quiet)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
