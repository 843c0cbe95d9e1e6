"""Black-box optimization with and without known smoothness.

The two-envelope function alternates between sqrt and quadratic envelopes
around its maximizer, so no single (nu, rho) describes it well.  HOO needs
the right rho; StoSOO and the racing wrapper do not.
"""

import numpy as np

from banditbench.funcopt import (
    HOO,
    FunctionOracle,
    difficult_function,
    poo_run,
    simple_regret,
    stosoo_run,
)

T, NOISE, SEEDS = 2000, 0.1, 5


def main():
    print(f"two-envelope function, T={T}, noise +-{NOISE}, {SEEDS} seeds")
    for rho in (0.25, 0.5, 0.9):
        regs = []
        for seed in range(SEEDS):
            hoo = HOO(FunctionOracle(difficult_function, T, NOISE), nu=1.0, rho=rho)
            rng = np.random.default_rng(seed)
            hoo.run(T, rng)
            regs.append(simple_regret(0.0, difficult_function, hoo.recommend(rng)))
        print(f"  HOO rho={rho:<5} median simple regret {np.median(regs):.4f}")

    regs = []
    for seed in range(SEEDS):
        res = stosoo_run(FunctionOracle(difficult_function, T, NOISE), T,
                         rng=np.random.default_rng(seed))
        regs.append(simple_regret(0.0, difficult_function, res.recommended))
    print(f"  StoSOO      median simple regret {np.median(regs):.4f} (no smoothness input)")

    regs = []
    for seed in range(SEEDS):
        res = poo_run(FunctionOracle(difficult_function, T, NOISE), T, rho_max=0.9,
                      rng=np.random.default_rng(seed))
        regs.append(simple_regret(0.0, difficult_function, res.recommended))
    print(f"  POO         median simple regret {np.median(regs):.4f} "
          f"({len(res.instances)} raced instances)")


if __name__ == "__main__":
    main()
