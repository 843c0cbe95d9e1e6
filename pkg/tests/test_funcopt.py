"""Partition trees, HOO, StoSOO, POO, and the benchmark functions."""

import math

import numpy as np
import pytest

from banditbench.funcopt import (
    HOO,
    FunctionOracle,
    ExternalFunction,
    PartitionTree,
    difficult_function,
    hoo_u_value,
    peak_function,
    poo_run,
    poo_schedule,
    quadratic_peak,
    simple_regret,
    standard_partition,
    stosoo_b_value,
    stosoo_defaults,
    stosoo_run,
)


class TestStandardPartition:
    def test_unit_interval_split(self):
        tree = standard_partition([(0.0, 1.0)], 2)()
        kids = tree.expand(0)
        np.testing.assert_allclose(tree.lo[kids], [[0.0], [0.5]])
        np.testing.assert_allclose(tree.hi[kids], [[0.5], [1.0]])

    def test_square_depth_two(self):
        tree = PartitionTree([(0.0, 1.0), (0.0, 1.0)], 2)
        kids = tree.expand(0)
        grandkids = [c for k in kids for c in tree.expand(k)]
        areas = [np.prod(tree.hi[g] - tree.lo[g]) for g in grandkids]
        np.testing.assert_allclose(areas, [0.25] * 4)

    def test_deep_expansion_partitions_domain(self):
        rng = np.random.default_rng(0)
        tree = PartitionTree([(0.0, 1.0)], 2)
        node = 0
        for _ in range(10):
            kids = tree.expand(node)
            node = int(kids[rng.integers(2)])
            # occasionally expand a sibling too
            if rng.random() < 0.5:
                tree.expand(int(kids[0]) if node != kids[0] else int(kids[1]))
        lo, hi = tree.leaf_boxes()
        order = np.argsort(lo[:, 0])
        lo, hi = lo[order], hi[order]
        assert lo[0, 0] == 0.0 and hi[-1, 0] == 1.0
        np.testing.assert_allclose(hi[:-1, 0], lo[1:, 0], atol=1e-12)  # no gaps/overlap

    def test_longest_side_chosen_with_axis_tiebreak(self):
        tree = PartitionTree([(0.0, 2.0), (0.0, 1.0)], 2)
        kids = tree.expand(0)
        widths = tree.hi[kids[0]] - tree.lo[kids[0]]
        np.testing.assert_allclose(widths, [1.0, 1.0])  # split along axis 0


class TestHooUValue:
    def test_unvisited_infinite(self):
        assert hoo_u_value(0.0, 0, 5, 1.0, 0.5, 3) == float("inf")

    def test_arithmetic(self):
        got = hoo_u_value(0.5, 2, math.e, 1.0, 0.5, 1)
        assert got == pytest.approx(0.5 + 1.0 + 0.5)

    def test_depth_term_vanishes(self):
        deep = hoo_u_value(0.2, 4, 10, 1.0, 0.5, 50)
        assert deep == pytest.approx(0.2 + math.sqrt(2 * math.log(10) / 4), abs=1e-10)


class TestHOO:
    def test_first_step_evaluates_root_representative(self):
        oracle = FunctionOracle(peak_function, budget=5)
        hoo = HOO(oracle, nu=1.0, rho=0.5)
        x, _ = hoo.step(np.random.default_rng(0))
        assert x[0] == pytest.approx(0.5)

    def test_concentrates_on_peak(self):
        # the Chernoff width sqrt(2 ln t / N) dominates the 0.5 function
        # range at small t, so concentration is gradual: the late fraction
        # of near-optimal evaluations must clearly exceed the early one
        fractions = []
        for seed in range(3):
            oracle = FunctionOracle(peak_function, budget=500)
            hoo = HOO(oracle, nu=1.0, rho=0.5)
            rng = np.random.default_rng(seed)
            points = [hoo.step(rng)[0][0] for _ in range(500)]
            near = [abs(x - 0.5) <= 0.25 for x in points]
            fractions.append((np.mean(near[:100]), np.mean(near[-100:])))
        early = np.mean([f[0] for f in fractions])
        late = np.mean([f[1] for f in fractions])
        assert late >= 0.75
        assert late > early

    def test_simple_regret_decays(self):
        def median_rec_regret(budget):
            regs = []
            for seed in range(5):
                oracle = FunctionOracle(peak_function, budget=budget)
                hoo = HOO(oracle, nu=1.0, rho=0.5)
                rng = np.random.default_rng(seed)
                hoo.run(budget, rng)
                regs.append(simple_regret(0.0, peak_function, hoo.recommend(rng)))
            return float(np.median(regs))

        small, large = median_rec_regret(200), median_rec_regret(5000)
        assert large < small
        assert large < 0.1

    def test_tree_bookkeeping_invariant(self):
        oracle = FunctionOracle(difficult_function, budget=300, noise_halfwidth=0.05)
        hoo = HOO(oracle, nu=1.0, rho=0.7)
        rng = np.random.default_rng(3)
        hoo.run(300, rng)
        tree = hoo.tree
        n = tree.n_nodes
        for node in range(n):
            kids = tree.child0[node]
            if kids < 0:
                assert tree.counts[node] == 0  # leaves are always unvisited
            else:
                child_total = sum(tree.counts[kids + k] for k in range(tree.arity))
                assert tree.counts[node] == 1 + child_total


class TestStoSOOBValue:
    def test_unvisited_infinite(self):
        assert stosoo_b_value(0.0, 100, 5, 0.1, 0) == float("inf")

    def test_arithmetic(self):
        # engineer log(Tk/delta) = 2
        horizon, k = 10, 2
        delta = horizon * k / math.exp(2.0)
        got = stosoo_b_value(0.3, horizon, k, delta, 4)
        assert got == pytest.approx(0.3 + 0.5)

    def test_width_halves_when_pulls_quadruple(self):
        w1 = stosoo_b_value(0.0, 100, 5, 0.1, 4)
        w2 = stosoo_b_value(0.0, 100, 5, 0.1, 16)
        assert w2 == pytest.approx(w1 / 2)


class TestStoSOORun:
    def test_minimal_run_recommends_best_first_child(self):
        oracle = FunctionOracle(quadratic_peak, budget=3)
        res = stosoo_run(oracle, 3, k=1, delta=0.5, h_max=3, arity=3,
                         rng=np.random.default_rng(0))
        tree = res.tree
        kids = tree.child0[0] + np.arange(3)
        means = np.where(tree.counts[kids] > 0,
                         tree.sums[kids] / np.maximum(tree.counts[kids], 1), -np.inf)
        np.testing.assert_allclose(res.recommended, tree.representative(int(kids[np.argmax(means)])))

    def test_noiseless_quadratic_small_regret(self):
        oracle = FunctionOracle(quadratic_peak, budget=3000)
        res = stosoo_run(oracle, 3000, rng=np.random.default_rng(1))
        assert simple_regret(1.0, quadratic_peak, res.recommended) <= 0.05

    def test_noise_only_degrades_gracefully(self):
        noiseless = stosoo_run(FunctionOracle(quadratic_peak, budget=2000), 2000,
                               rng=np.random.default_rng(2))
        noisy_regrets = []
        for seed in range(10):
            res = stosoo_run(
                FunctionOracle(quadratic_peak, budget=2000, noise_halfwidth=0.5),
                2000, rng=np.random.default_rng(seed),
            )
            noisy_regrets.append(simple_regret(1.0, quadratic_peak, res.recommended))
        base = max(simple_regret(1.0, quadratic_peak, noiseless.recommended), 1e-3)
        assert np.median(noisy_regrets) <= 50 * base

    def test_expansion_depth_capped(self):
        res = stosoo_run(FunctionOracle(quadratic_peak, budget=500), 500,
                         k=2, delta=0.1, h_max=3, rng=np.random.default_rng(3))
        tree = res.tree
        internal = np.nonzero(tree.child0[: tree.n_nodes] >= 0)[0]
        assert np.all(tree.depth[internal] <= 3)

    def test_defaults_formula(self):
        k, delta = stosoo_defaults(10_000)
        assert k == round(10_000 / math.log(10_000) ** 3)
        assert delta == pytest.approx(0.01)


class TestPOOSchedule:
    def test_rho_grid_substitution(self):
        from banditbench.funcopt import poo_rho_grid

        np.testing.assert_allclose(poo_rho_grid(2, 0.9), [0.81, 0.9])

    def test_dmax_for_k2(self):
        assert math.log(2) / math.log(1 / 0.5) == pytest.approx(1.0)

    def test_spreadsheet_recomputation(self):
        horizon, K, rho_max = 10_000, 2, 0.9
        d_max = math.log(K) / math.log(1 / rho_max)
        target = 0.5 * d_max * math.log(horizon / math.log(horizon))
        n = 1
        while n < target:
            n *= 2
        params = poo_schedule(horizon, rho_max, 1.0, K)
        assert len(params) == n
        assert n == 32


class TestPOORun:
    def test_single_instance_reduces_to_hoo(self):
        # tiny budget forces N = 1
        budget = 10
        res = poo_run(FunctionOracle(peak_function, budget=budget), budget,
                      rho_max=0.5, nu_max=1.0, rng=np.random.default_rng(5))
        assert len(res.instances) == 1
        hoo = HOO(FunctionOracle(peak_function, budget=budget), nu=1.0, rho=0.5)
        hoo.run(budget, np.random.default_rng(5))
        np.testing.assert_allclose(
            [x[0] for x, _ in res.evaluated], [x[0] for x, _ in hoo.evaluated]
        )

    def test_budget_exact_and_counts_equalized(self):
        budget = 257
        oracle = FunctionOracle(peak_function, budget=budget, noise_halfwidth=0.1)
        res = poo_run(oracle, budget, rho_max=0.9, rng=np.random.default_rng(6))
        assert oracle.consumed == budget
        counts = [len(inst.evaluated) for inst in res.instances]
        assert max(counts) - min(counts) <= 1


def vectorized_difficult(x):
    """Independent numpy reimplementation of the two-envelope function."""
    u = np.abs(x - 0.5)
    out = np.zeros_like(u)
    mask = u > 0
    log2u = np.log2(u[mask])
    frac = log2u - np.floor(log2u)
    s = (frac <= 0.5).astype(float)
    out[mask] = s * (np.sqrt(u[mask]) - u[mask] ** 2) - np.sqrt(u[mask])
    return out


class TestDifficultFunction:
    def test_value_at_center(self):
        assert difficult_function(0.5) == 0.0

    def test_hand_evaluation(self):
        assert difficult_function(0.75) == pytest.approx(-0.0625)

    def test_symmetry(self):
        rng = np.random.default_rng(8)
        for u in rng.random(50) * 0.5:
            assert difficult_function(0.5 + u) == pytest.approx(difficult_function(0.5 - u))

    def test_grid_scan_nonpositive_with_max_at_center(self):
        xs = np.linspace(0.0, 1.0, 1_000_001)
        vals = vectorized_difficult(xs)
        assert np.all(vals <= 0.0)
        assert vals.max() == 0.0 and xs[np.argmax(vals)] == pytest.approx(0.5)

    def test_scalar_matches_vectorized(self):
        xs = np.linspace(0.01, 0.99, 199)
        np.testing.assert_allclose(
            [difficult_function(x) for x in xs], vectorized_difficult(xs), atol=1e-12
        )


class TestExternalFunction:
    def test_line_protocol_roundtrip(self):
        import sys

        child = ExternalFunction(
            [sys.executable, "-u", "-c",
             "import sys\n"
             "for line in sys.stdin:\n"
             "    x = float(line.split()[0])\n"
             "    print(-abs(x - 0.5))\n"
             "    sys.stdout.flush()"]
        )
        try:
            assert child(0.75) == pytest.approx(-0.25)
            assert child(0.5) == pytest.approx(0.0)
        finally:
            child.close()
