"""Acceptance suite: one PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -v``; the criterion lines are
printed even when pytest captures output.
"""
from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from smoothdisc import exact
from smoothdisc.experiments import (
    ExperimentConfig,
    generate_matrix,
    run_trial,
    second_moment_diag,
    sweep,
    sweep_csv,
    trial_seed,
)
from smoothdisc.errors import AttemptsExhausted
from smoothdisc.relevance import RelevanceConfig, find_relevant_set
from smoothdisc.walk import _walk_batch, subgaussian_tail_report

from conftest import random_sign, unit_columns

# tolerances and budgets pinned from the acceptance list
SPOT_N, SPOT_T = 100, 10
SPOT_STATED_RATIO = 0.60700
SPOT_LOG_GAP_TOL = 1e-3
VAR_LIMIT = 4.0
TAIL_T = (2.0, 3.0)
WALK_SAMPLES = 20_000
RELEVANT_MIN_SUCCESS = 19
FINAL_PASS_RATE = 0.90
TRIALS = 50
K = 200


@pytest.fixture
def report(capsys):
    def emit(k: int, ok: bool, title: str, detail: str, seconds: float, budget: float):
        ok = ok and seconds <= budget
        with capsys.disabled():
            print(f"\ncriterion {k:>2} [{'PASS' if ok else 'FAIL'}] {title}: {detail} "
                  f"({seconds:.1f}s of {budget:.0f}s)")
        assert ok, detail
    return emit


def _even_ts(n, x):
    info = exact.support_even_inner(n, x)
    return [t for t in range(-n // 2, n // 2 + 1) if info.contains(2 * t)]


def test_single_row_probability_exact(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    cases = bad = 0
    for n in range(2, 13, 2):
        for _ in range(50):
            x = random_sign(rng, n)
            xs = x.entries.astype(np.int64)
            for t in _even_ts(n, x):
                oracle = exact.enumerate_even_oracle(n, lambda R: R.astype(np.int64) @ xs == 2 * t)
                cases += 1
                bad += exact.prob_single_even(n, x, t) != oracle
    report(1, bad == 0, "single-row even-class probability vs enumeration",
           f"{cases} cases, {bad} mismatches", time.perf_counter() - t0, 60)


def test_joint_probability_exact(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    cases = bad = 0
    for n in range(4, 13, 2):
        ts = range(-n // 2, n // 2 + 1)
        for _ in range(50):
            x = random_sign(rng, n)
            y = random_sign(rng, n)
            while y.parity != x.parity:
                y = random_sign(rng, n)
            law = exact.joint_inner_product_law(n, x, y)
            for a in ts:
                marginal = Fraction(0)
                for b in ts:
                    p = exact.prob_joint_even(n, x, y, a, b)
                    marginal += p
                    cases += 1
                    bad += p != law.get((2 * a, 2 * b), 0)
                cases += 1
                bad += marginal != exact.prob_single_even(n, x, a)
    report(2, bad == 0, "joint probability and marginals vs enumeration",
           f"{cases} cases, {bad} mismatches", time.perf_counter() - t0, 300)


def test_sum_count_exact(report):
    t0 = time.perf_counter()
    cases = bad = 0
    for n in range(2, 15, 2):
        sums = exact.all_sign_vectors(n).astype(np.int64).sum(axis=1)
        for t in range(-n // 2 - 1, n // 2 + 2):
            cases += 1
            bad += exact.count_S_t(n, t) != int(np.count_nonzero(sums == 2 * t))
    report(3, bad == 0, "count of vectors with sum 2t vs enumeration (n <= 14)",
           f"{cases} cases, {bad} mismatches", time.perf_counter() - t0, 60)


def test_near_centre_envelope(report):
    t0 = time.perf_counter()
    worst, cases, outside = 0.0, 0, []
    for n in (1000, 10_000):
        t = 0
        while t ** 3 <= n ** 2:
            e = exact.spencer_estimate(n, t)
            cases += 1
            worst = max(worst, e.gap / e.error_budget)
            if not e.within_budget:
                outside.append((n, t))
            t += 2
    spot = exact.spencer_estimate(SPOT_N, SPOT_T, check_regime=False)
    ratio = math.exp(spot.exact_log_ratio)
    # independent big-integer check of the spot ratio
    assert ratio == pytest.approx(math.comb(100, 55) / math.comb(100, 50), rel=1e-12)
    spot_gap = abs(spot.exact_log_ratio + SPOT_T ** 2 / (2 * SPOT_N))
    ok = not outside and spot_gap <= SPOT_LOG_GAP_TOL
    report(4, ok, "log-ratio envelope on n in {1e3, 1e4}, plus spot value n=100 t=10",
           f"{cases} grid points, {len(outside)} outside budget, worst gap/budget {worst:.3f}; "
           f"spot ratio {ratio:.5f} (stated {SPOT_STATED_RATIO:.5f}), |log gap| {spot_gap:.2e} "
           f"(tolerance {SPOT_LOG_GAP_TOL:.0e})", time.perf_counter() - t0, 120)


def test_parity_implications_exhaustive(report):
    t0 = time.perf_counter()
    counts = exact.parity_checks_exhaustive(8)
    # spot-check the vectorised count against the per-pair predicate
    rng = np.random.default_rng(5)
    for _ in range(500):
        assert exact.parity_checks(random_sign(rng, 8), random_sign(rng, 8)).all_hold
    violations = {k: v for k, v in counts.items() if k != "pairs"}
    report(5, counts["pairs"] == 2 ** 16 and not any(violations.values()),
           "three parity implications over all pairs at n = 8",
           f"{counts['pairs']} pairs, violations {violations}", time.perf_counter() - t0, 60)


def test_walk_properties(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    M = unit_columns(rng, 10, 50)
    # _walk_batch asserts +-1 outputs and at most n freezing steps per sample
    X, steps = _walk_batch(M.values, rng, WALK_SAMPLES)
    dirs = rng.standard_normal((20, 10))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    proj = (X.astype(np.float64) @ M.values.T) @ dirs.T
    var = proj.var(axis=0)
    rows = subgaussian_tail_report(X, M, dirs, TAIL_T)
    failed = [r for r in rows if not r.passed]
    ok = bool(np.all(np.abs(X) == 1)) and int(steps.max()) <= 50 and var.max() <= VAR_LIMIT and not failed
    report(6, ok, "walk outputs, step count, variance and tails (10x50, 2e4 samples)",
           f"max steps {int(steps.max())}, max Var {var.max():.3f} (limit {VAR_LIMIT}), "
           f"{len(failed)} of {len(rows)} tail rows over bound+3sigma, "
           f"{sum(r.flagged for r in rows)} flagged", time.perf_counter() - t0, 300)


def test_relevance_pipeline(report):
    t0 = time.perf_counter()
    ok_count = 0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        M = unit_columns(rng, 16, 256)
        try:
            rs = find_relevant_set(M, RelevanceConfig(c_const=4.0, max_attempts=500), rng, target_size=2)
            ok_count += rs.reverify(M)
        except AttemptsExhausted:
            pass
    report(7, ok_count >= RELEVANT_MIN_SUCCESS, "relevant pairs on 20 gaussian 16x256 matrices",
           f"{ok_count}/20 succeeded (need {RELEVANT_MIN_SUCCESS})", time.perf_counter() - t0, 600)


def test_second_moment_enumeration(report):
    slowest = 0.0
    instances = setup_failed = cs_ok = pz_ok = positive = reachable = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        M = generate_matrix(ExperimentConfig(d=2, n=4), rng)
        try:
            rs = find_relevant_set(M, RelevanceConfig(), rng, parity=0)
        except AttemptsExhausted:
            setup_failed += 1
            continue
        t1 = time.perf_counter()
        rep = second_moment_diag(M, rs, mode="enumerate")
        slowest = max(slowest, time.perf_counter() - t1)
        assert rep.samples == 64
        instances += 1
        cs_ok += rep.mean_S2 >= rep.mean_S ** 2
        pz_ok += rep.pr_positive >= rep.paley_zygmund_bound
        positive += rep.mean_S > 0
        reachable += any(rep.reachable)
    ok = instances > 0 and cs_ok == pz_ok == positive == instances
    report(8, ok, "exact second moments over all 64 even-row matrices (d=2, n=4)",
           f"{instances} instances ({setup_failed} setup failures): E[S^2]>=E[S]^2 on {cs_ok}, "
           f"PZ on {pz_ok}, E[S]>0 on {positive}, targets reachable on {reachable}; "
           "time is the slowest single enumeration", slowest, 1)


def test_final_bound_monte_carlo(report):
    t0 = time.perf_counter()
    parts, ok = [], True
    for cell, (d, n) in enumerate(((9, 128), (16, 256))):
        cfg = ExperimentConfig(d=d, n=n, samples_per_trial=K)
        recs = [run_trial(cfg, trial_seed(0, cell, t), t, timing=False) for t in range(TRIALS)]
        live = [r for r in recs if not r.setup_failed]
        rate = sum(r.passed for r in live) / len(live) if live else 0.0
        padded = sum(r.padded_passed for r in live) / len(live) if live else 0.0
        books = all(r.bookkeeping_ok for r in recs if not r.setup_failed)
        ok &= rate >= FINAL_PASS_RATE and books
        parts.append(f"({d},{n}) pass {rate:.2f} padded {padded:.2f} median best "
                     f"{np.median([r.best_disc for r in live]):.3f} vs {cfg.threshold:.3f}, "
                     f"setup failures {len(recs) - len(live)}, bookkeeping {'ok' if books else 'BROKEN'}")
    report(9, ok, f"final bound in >= {FINAL_PASS_RATE:.0%} of trials, K = {K}",
           "; ".join(parts), time.perf_counter() - t0, 1800)


def test_sweep_replay_identical(report):
    t0 = time.perf_counter()
    cfg = ExperimentConfig(d=1, n=1, trials=3, samples_per_trial=20, master_seed=12345)
    grid = [(4, 16), (6, 25)]
    a = sweep_csv(sweep(grid, cfg))
    b = sweep_csv(sweep(grid, cfg, workers=2))
    c = sweep_csv(sweep(grid, cfg))
    report(10, a == b == c, "sweep replay with the same master seed",
           f"{len(a.encode())} bytes, serial/parallel/serial identical: {a == b == c}",
           time.perf_counter() - t0, 300)
