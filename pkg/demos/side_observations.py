"""Side observations shrink regret from sqrt(N T) toward sqrt(alpha T).

Runs Exp3-IX with the same Bernoulli loss script under three observation
systems: the complete graph (alpha = 1), a fresh Erdos-Renyi draw each
round, and no side observations at all (alpha = N).
"""

import numpy as np

from banditbench.core import run_episode
from banditbench.graph import WeightedDigraph, independence_number, erdos_renyi
from banditbench.rng import RngStream
from banditbench.sideobs import Exp3IXPolicy, SideObservationEnv, _GraphSource, _LossSource

N, T, SEEDS = 10, 4000, 8
MEANS = [0.35] + [0.55] * (N - 1)


def final_regret(seed, graphs):
    env = SideObservationEnv(N, _LossSource(N, means=MEANS), graphs)
    return run_episode(Exp3IXPolicy(N), env, T, RngStream(seed)).final_regret


def main():
    cases = {
        "complete": lambda: _GraphSource(N, graph=WeightedDigraph.complete(N)),
        "erdos-renyi r=0.3": lambda: _GraphSource(N, er_probability=0.3),
        "no side observations": lambda: _GraphSource(N, graph=WeightedDigraph.empty(N)),
    }
    sample_alpha = independence_number(erdos_renyi(N, 0.3, np.random.default_rng(0)))
    print(f"Exp3-IX, N={N}, T={T}, {SEEDS} seeds (one ER draw has alpha={sample_alpha})")
    for name, make in cases.items():
        finals = [final_regret(seed, make()) for seed in range(SEEDS)]
        print(f"  {name:<22} mean final regret {np.mean(finals):8.1f} "
              f"+- {np.std(finals) / np.sqrt(SEEDS):5.1f}")
    print("more observations -> smaller regret, tracking the independence number")


if __name__ == "__main__":
    main()
