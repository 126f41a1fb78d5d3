"""Acceptance battery: twelve end-to-end checks at fixed seeds.

Each test states its tolerance inline and asserts a wall-clock budget,
so a plain ``pytest tests/test_acceptance.py -v`` prints one pass/fail
line per criterion.
"""
import math
import time

import numpy as np
import pytest
from scipy import stats

from oracle_utils import iter_all_fields, reachable_brute
from bslab.blocks import (
    Block2,
    Block4,
    block2_proposition_check,
    block4_independence_check,
    block4_propagation_check,
    sample_block2_stats,
    sample_block4_stats,
    sample_stick_stats,
)
from bslab.bounds import (
    block2_asymptote,
    block2_nice_lb,
    choose_h,
    hat_L,
    q0,
    q0_d2_closed_form,
    theta_4block,
    theta_asymptote,
    tilde_L,
)
from bslab.cli import main
from bslab.drift import exact_drift, verify_all_bounds
from bslab.dynamics import (
    ModelParams,
    classical_fitness_samples,
    sample_graphical_batch,
)
from bslab.exact import build_kernel, marginals, stationary
from bslab.graphs import closed_neighbourhood, generate, shortest_path
from bslab.montecarlo import (
    marginal_from_batches,
    proportion_tail_from_batches,
    run_batches,
    tail_fit_from_batches,
    zeros_tail_from_batches,
)
from bslab.percolation import (
    LevelSet,
    contour_bounds,
    evolve,
    prob_connect_theta_sweep,
    side_condition_ok,
)


def test_01_extinction_threshold_values(capsys):
    t0 = time.perf_counter()
    v2 = q0(2)
    assert abs(v2 - 0.412) < 5e-4
    assert abs(v2 - q0_d2_closed_form()) < 1e-9
    v4 = q0(4)
    assert abs(v4 - 0.2145549758) < 1e-9
    # same numbers through the command line
    assert main(["q0", "--d", "2"]) == 0
    line = capsys.readouterr().out.strip().splitlines()[0]
    assert abs(float(line.split()[-1]) - v2) < 1e-12
    assert main(["q0", "--d", "4"]) == 0
    line = capsys.readouterr().out.strip().splitlines()[0]
    assert abs(float(line.split()[-1]) - v4) < 1e-12
    assert time.perf_counter() - t0 < 1.0


def test_02_four_block_bound_value():
    t0 = time.perf_counter()
    v = theta_4block(14.0, 0.0015, 2)
    assert 0.726 < v < 0.74
    assert time.perf_counter() - t0 < 1.0


def test_03_small_p_expansions_stay_bounded():
    t0 = time.perf_counter()
    worst2 = worst4 = 0.0
    for d in (2, 4):
        for p in (1e-3, 1e-4, 1e-5, 1e-6):
            q = 1.0 - p
            r2 = abs(block2_nice_lb(hat_L(p, d), p, d) - block2_asymptote(p, d)) / p
            r4 = abs(theta_4block(tilde_L(p, d), p, d) - theta_asymptote(p, d)) / p
            worst2 = max(worst2, r2)
            worst4 = max(worst4, r4)
    assert worst2 <= 10.0
    assert worst4 <= 150.0
    assert time.perf_counter() - t0 < 1.0


def test_04_monte_carlo_matches_exact_solves():
    t0 = time.perf_counter()
    for g in (generate("cycle", 6), generate("torus2d", 3, 3)):
        for p in (0.1, 0.3, 0.7):
            params = ModelParams(p=p)
            mg = marginals(stationary(build_kernel(g, params), flavor="continuous"), g)
            # tail index where the event is informative
            k = int(np.argmin(np.abs(mg.zeros_tail - 0.5)))
            bd = run_batches(g, params, 60_000, 101, n_replicas=4, n_batches=16)
            checks = (
                (marginal_from_batches(bd, 0), mg.vertex_one[0]),
                (proportion_tail_from_batches(bd, 0.5), mg.prob_mean_at_least(0.5)),
                (zeros_tail_from_batches(bd, k + 1), mg.zeros_tail[k]),
            )
            for est, exact in checks:
                assert est.stderr > 0
                assert abs(est.mean - exact) <= 3 * est.stderr
    assert time.perf_counter() - t0 < 300.0


def test_05_zero_propagation_counterexample_hunt():
    t0 = time.perf_counter()
    params = ModelParams(p=0.01)

    g12 = generate("cycle", 12)
    L2 = hat_L(params.p, 2)
    blk2 = Block2(1, 2, 1, L2)
    bottom2 = np.ones(12, dtype=np.uint8)
    bottom2[1] = 0
    applicable = failures = 0
    for gc in sample_graphical_batch(g12, params, L2, 15_000, 115):
        res = block2_proposition_check(g12, gc, blk2, bottom2)
        if res.applicable:
            applicable += 1
            failures += not res.passed
    assert applicable >= 10_000
    assert failures == 0

    g16 = generate("cycle", 16)
    chain = tuple(range(12))
    L4 = tilde_L(params.p, 2)
    blk4 = Block4(chain, 0, 0.0, L4)
    bottom4 = np.ones(16, dtype=np.uint8)
    bottom4[0] = 0
    applicable = failures = 0
    for gc in sample_graphical_batch(g16, params, L4, 35_000, 117):
        res = block4_propagation_check(g16, gc, blk4, bottom4)
        if res.applicable:
            applicable += 1
            failures += not res.passed
    assert applicable >= 10_000
    assert failures == 0
    assert time.perf_counter() - t0 < 600.0


def test_06_rates_dominate_analytic_bounds():
    t0 = time.perf_counter()
    graphs = {2: generate("cycle", 12), 4: generate("torus2d", 5, 5)}
    chains = {2: tuple(range(8)), 4: tuple(shortest_path(graphs[4], 0, 12).vertices)}
    n = 40_000
    for d, g in graphs.items():
        ch = chains[d]
        for p in (0.02, 0.01, 0.005, 0.0015):
            params = ModelParams(p=p)
            Lh, Lt = hat_L(params.p, d), tilde_L(p, d)
            A = closed_neighbourhood(g, ch[0])
            for st in (
                sample_stick_stats(g, params, ch[0], A, Lh, n, 121),
                sample_block2_stats(g, params, ch[0], ch[1], Lh, n, 123),
                sample_block4_stats(g, params, ch, 0, Lt, n, 125),
            ):
                assert st.nice_rate >= st.analytic_lb - 3 * st.stderr
    assert time.perf_counter() - t0 < 1200.0


def test_07_disjoint_blocks_uncorrelated():
    t0 = time.perf_counter()
    g = generate("cycle", 16)
    chain = tuple(range(12))
    params = ModelParams(p=0.01)
    L = tilde_L(params.p, 2)
    rep = block4_independence_check(g, chain, params, L, 100_000, 127, pair="same_level")
    assert abs(rep.corr) <= rep.threshold
    assert rep.within
    rep2 = block4_independence_check(
        g, chain[:8], params, L, 100_000, 127, pair="adjacent_level"
    )
    assert abs(rep2.corr) <= rep2.threshold
    assert rep2.within
    assert time.perf_counter() - t0 < 600.0


def test_08_percolation_oracle_monotone_and_flags():
    t0 = time.perf_counter()
    # exhaustive equivalence against coordinate-space reachability
    for N in (1, 2):
        for levels in (1, 2, 3, 4):
            B = LevelSet.from_sites(N, 0, list(range(0, 2 * N + 1, 2)))
            start = sorted(B.sites)
            for field in iter_all_fields(N, levels):
                for upto in range(levels + 1):
                    got = set(evolve(field, B, upto).sites)
                    assert got == reachable_brute(field, start, upto)
    # per-sample monotonicity in theta under shared uniforms
    res = prob_connect_theta_sweep(4, [0.7, 0.8, 0.9, 0.97], 3, 0, 0, 2000, seed=131)
    means = [res[t].mean for t in sorted(res)]
    assert means == sorted(means)
    # the contour argument refuses theta at or below 8/9
    for theta in (0.5, 8.0 / 9.0):
        with pytest.raises(ValueError):
            contour_bounds(10, theta, 0.75, 3)
    rep = contour_bounds(10, 0.95, 0.75, 3)
    assert rep.series_ratio < 1.0
    assert side_condition_ok(0.95, 0.75)
    assert not side_condition_ok(0.5, 0.25)
    assert time.perf_counter() - t0 < 120.0


def test_09_drift_certificates_and_simulation():
    t0 = time.perf_counter()
    for g, q in ((generate("cycle", 8), 0.30), (generate("torus2d", 3, 3), 0.15)):
        d = g.max_degree
        h = choose_h(q, d)
        rep = verify_all_bounds(g, ModelParams.from_q(q), h, keep_rows=False)
        assert rep.all_hold
        assert rep.all_negative

    # spot configuration: exact enumeration vs one-step simulation
    g = generate("cycle", 8)
    q = 0.30
    p = 1.0 - q
    h = choose_h(q, 2)
    c = np.array([0, 1, 0, 0, 1, 1, 0, 1], dtype=np.int8)
    rep = exact_drift(g, c, ModelParams(p=p), h)
    n = g.num_vertices
    adj = np.zeros((n, n), dtype=np.int8)
    for v in range(n):
        for u in g.adjacency[v]:
            adj[v, u] = 1
    zero0 = c == 0
    f0 = float(zero0.sum() - h * (zero0 & ((zero0 @ adj) > 0)).sum())
    rng = np.random.default_rng(133)
    nsamp = 1_000_000
    sites = rng.choice(np.flatnonzero(zero0), size=nsamp)
    deltas = np.empty(nsamp)
    for v in np.unique(sites):
        idx = np.flatnonzero(sites == v)
        nbhd = [v, *g.adjacency[v]]
        bits = (rng.random((idx.size, len(nbhd))) < p).astype(np.int8)
        confs = np.broadcast_to(c, (idx.size, n)).copy()
        confs[:, nbhd] = bits
        zero = confs == 0
        n2 = (zero & ((zero @ adj) > 0)).sum(axis=1)
        deltas[idx] = (zero.sum(axis=1) - h * n2) - f0
    mean = float(deltas.mean())
    se = float(deltas.std(ddof=1) / math.sqrt(nsamp))
    assert abs(mean - rep.exact_drift) <= 4 * se
    assert time.perf_counter() - t0 < 600.0


def test_10_phase_picture():
    t0 = time.perf_counter()
    # (a) geometric tail of the zero count in the extinction regime
    bd = run_batches(generate("cycle", 50), ModelParams.from_q(0.3), 250_000, 107,
                     n_replicas=4, n_batches=16)
    fit = tail_fit_from_batches(bd)
    assert fit is not None
    assert fit.c2 > 0
    assert fit.c2_ci95[0] > 0
    # (b) tiny p: ones stay rare
    bd = run_batches(generate("cycle", 200), ModelParams(p=0.001), 250_000, 103,
                     n_replicas=4, n_batches=16)
    assert marginal_from_batches(bd, 0).mean < 0.9
    # (c) large p: one-density grows with the ring size
    means = []
    for n in (50, 100, 200):
        bd = run_batches(generate("cycle", n), ModelParams(p=0.7), 80_000, 105,
                         n_replicas=4, n_batches=16)
        means.append(marginal_from_batches(bd, 0).mean)
    assert means[0] < means[1] < means[2]
    assert means[2] > 0.95
    assert time.perf_counter() - t0 < 1800.0


def test_11_classical_fitness_profile():
    t0 = time.perf_counter()
    vals = classical_fitness_samples(generate("cycle", 1000), 1_200_000, 200_000, 2000, 135)
    assert float((vals < 0.55).mean()) < 0.05
    window = vals[vals >= 0.7]
    assert window.size > 10_000
    ks = stats.kstest(window, stats.uniform(loc=0.7, scale=0.3).cdf)
    assert ks.statistic < 0.05
    assert time.perf_counter() - t0 < 600.0


def test_12_preset_reruns_byte_identical(tmp_path):
    for name, csvname in (("thm2_proportion", "proportion.csv"),
                          ("percolation_sweep", "percolation.csv")):
        outs = []
        for threads in ("1", "3"):
            out = tmp_path / f"{name}-{threads}"
            rc = main(["preset", "--name", name, "--seed", "42",
                       "--threads", threads, "--out", str(out)])
            assert rc == 0
            outs.append((out / csvname).read_bytes())
        assert outs[0] == outs[1]
