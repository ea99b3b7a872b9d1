"""Acceptance criteria 1-10, each printing one PASS/FAIL line."""

import math
import time

import numpy as np

from conftest import ACCEPTANCE_LINES
from npverify import experiments as E
from npverify import protocol as P
from npverify.adversary import AdversaryStrategy, soundness_run
from npverify.photonics import OpticalParams, click_probabilities
from npverify.satgen import gen_balanced_planted, gen_no_instance

SUITE_START = time.perf_counter()


def report(num, title, ok, detail, elapsed=None, limit=None):
    if limit is not None:
        ok = ok and elapsed < limit
        detail += f"; {elapsed:.2f}s (limit {limit}s)"
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_table_satisfied():
    t0 = time.perf_counter()
    diffs = {}
    for n, nu, mu, single, correct, double, missing, thr, sat in E.TABLE1:
        diffs[n] = E.satisfied_from_counts(n, single, correct, double) - sat
    el = time.perf_counter() - t0
    worst = max(abs(d) for d in diffs.values())
    ok = worst <= 3
    report(1, "satisfied clauses from measured rates", ok, f"max |diff| {worst:.2f} <= 3", el, 1)


def test_criterion_02_missing_bits():
    bad = [n for n, *_r in E.TABLE1 if n - _r[2] != _r[5]]
    report(2, "missing = N - single clicks", not bad, f"{len(E.TABLE1) - len(bad)}/10 rows exact")


def test_criterion_03_click_rates():
    t0 = time.perf_counter()
    errs = []
    for n, nu, mu, single, *_ in E.TABLE1:
        cp = click_probabilities(OpticalParams(mu=mu, nu=nu))
        errs.append(abs(n * (cp.p_c + cp.p_w) - single) / single)
    el = time.perf_counter() - t0
    within1 = sum(e <= 0.01 for e in errs)
    ok = max(errs) <= 0.10 and within1 >= 3
    report(3, "analytic single clicks vs table", ok,
           f"worst {max(errs):.2%} <= 10%, {within1} rows within 1%", el, 1)


def test_criterion_04_window():
    t0 = time.perf_counter()
    w = P.mu_window(10000, 0.91, 0.15, m=10000)
    ok = w is not None and w[0] < w[1]
    if ok:
        for mu in np.linspace(w[0], w[1], 200):
            b = P.analytic_bounds(P.ProtocolParams.build(10000, float(mu), 0.91, m=10000, delta=0.15))
            ok &= b.completeness_lb > 0.9 and b.soundness_ub < 0.6
    grid = np.round(np.arange(0.1, 6.001, 0.1), 3)
    spec = E.SweepSpec("mu", grid, P.ProtocolParams.build(10000, 1.0, 0.91, m=10000, delta=0.15), trials=2)
    mu_x = E.crossing_mu(E.sweep(spec))
    ok &= mu_x is not None and mu_x > w[1]
    el = time.perf_counter() - t0
    report(4, "advantage window and YES/NO crossing", ok,
           f"window {w[0]:.4f}..{w[1]:.4f}, crossing at mu={mu_x}", el, 5)


def test_criterion_05_gap_vs_n():
    t0 = time.perf_counter()
    ns = list(range(5000, 14001, 1000))
    bs = [P.analytic_bounds(P.ProtocolParams.build(n, E.NOMINAL_MU, E.NOMINAL_NU, delta=0.15)) for n in ns]
    gaps = [b.gap for b in bs]
    mono = all(b >= a for a, b in zip(gaps, gaps[1:]))
    targets = all(b.completeness_lb > 0.9 and b.soundness_ub < 0.6 for n, b in zip(ns, bs) if n >= 6000)
    row5000 = P.ProtocolParams.build(5000, 1.29, 0.87, delta=0.15)
    fails = not P.meets_targets(row5000)
    el = time.perf_counter() - t0
    report(5, "gap vs N at nominal settings", mono and targets and fails,
           f"gap {gaps[0]:.3f}->{gaps[-1]:.4f} nondecreasing={mono}, "
           f"C>0.9,S<0.6 for N>=6000: {targets}, row N=5000 fails: {fails}", el, 5)


def test_criterion_06_monte_carlo():
    t0 = time.perf_counter()
    n, trials = 12000, 1000
    opt = OpticalParams(mu=1.30, nu=0.93)
    cp = click_probabilities(opt)
    s, d = E.simulate_counts(n, opt, trials, seed=2024)
    ok = True
    parts = []
    for name, x, p in (("single", s, cp.p_c + cp.p_w), ("double", d, cp.p_dc)):
        sig = math.sqrt(n * p * (1 - p))
        z = abs(x.mean() - n * p) / (sig / math.sqrt(trials))
        frac = float(np.mean(np.abs(x - n * p) <= 3 * sig))
        ok &= z <= 3 and frac >= 0.99
        parts.append(f"{name} z={z:.2f}, {frac:.1%} of trials within 3 sigma")
    rows = E.sweep(E.SweepSpec("n", [5000, 8000, 11000, 14000],
                               P.ProtocolParams.build(5000, E.NOMINAL_MU, E.NOMINAL_NU), trials=20, seed=7))
    bars = all(r.err_single_clicks == 2 * math.sqrt(r.mean_single_clicks)
               and r.err_total_clicks == 2 * math.sqrt(r.mean_total_clicks) for r in rows)
    el = time.perf_counter() - t0
    report(6, "simulated clicks vs analytic law", ok and bars,
           "; ".join(parts) + f"; error bars 2*sqrt(clicks): {bars}", el, 30)


def test_criterion_07_small_oracle():
    t0 = time.perf_counter()
    trials = 200
    worst_c = worst_s = math.inf
    for seed in range(20):
        n = 16 if seed % 2 == 0 else 20
        no = gen_no_instance(n, 8, seed=seed)  # delta certified by exhaustive scan
        yes = gen_balanced_planted(n, 8, seed=seed, delta=no.delta)
        p = P.ProtocolParams.build(n, E.NOMINAL_MU, E.NOMINAL_NU, m=yes.m, delta=no.delta)
        reps = [E.run_trial(p, E.INSTANCE, E.derive_seed(seed, n, t), yes) for t in range(trials)]
        c_freq = np.mean([r.verdict for r in reps])
        c_lb = reps[0].completeness_lb
        sig_c = math.sqrt(c_lb * (1 - c_lb) / trials)
        worst_c = min(worst_c, c_freq - (c_lb - 3 * sig_c))
        r = soundness_run(no, AdversaryStrategy("best-assignment-exhaustive"), p, trials,
                          np.random.default_rng(seed))
        worst_s = min(worst_s, r.soundness_ub + 3 * r.sigma - r.frequency)
    el = time.perf_counter() - t0
    ok = worst_c >= 0 and worst_s >= 0
    report(7, "small certified instances vs analytic bounds", ok,
           f"min completeness margin {worst_c:.3f}, min soundness margin {worst_s:.3f} over 20 seeds",
           el, 60)


def test_criterion_08_classical_cost():
    _, log2 = P.classical_cost(150, 0, 1.0)
    ops = 2.0**log2
    ok = abs(ops / 1.4e45 - 1) < 0.05 and len(str(int(ops))) == 46
    ok &= all(P.classical_cost(m, 0)[1] == 0.4 * m for m in (1, 150, 1955))
    big = [row for row in E.TABLE1 if row[0] >= 6000]
    ok &= all(row[0] - row[3] > P.ADVANTAGE_MARGIN for row in big)
    report(8, "classical cost of missing bits", ok, f"2^150 = {ops:.4g}; all N>=6000 rows exceed 1000 bits")


def test_criterion_09_scaling():
    t0 = time.perf_counter()
    ok = True
    worst_click = worst_c = 0.0
    worst_s = literal_s = 0.0
    delta = 0.15
    for n in np.unique(np.round(np.logspace(4, 6, 41)).astype(int)):
        n = int(n)
        mu = n ** -0.25
        clicks = P.expected_clicks(P.ProtocolParams.build(n, mu, 1.0))
        c = P.ideal_completeness_bound(mu, n)
        # soundness at the prescribed (delta N)^(-1/4) scaling
        s = P.ideal_soundness_bound((delta * n) ** -0.25, delta, n)
        s_lit = P.ideal_soundness_bound(mu, delta, n)
        ok &= clicks <= 2.2 * n**0.75 and c > 0.9 and s < 0.6 and s_lit < c
        worst_click = max(worst_click, clicks / n**0.75)
        worst_c = min(worst_c or 1.0, c)
        worst_s = max(worst_s, s)
        literal_s = max(literal_s, s_lit)
    el = time.perf_counter() - t0
    report(9, "ideal bounds under N^-1/4 scaling", ok,
           f"max clicks/N^0.75 {worst_click:.3f} <= 2.2, min C {worst_c:.5f}, max S {worst_s:.3f}; "
           f"S at mu=N^-1/4 itself {literal_s:.3f} (below C)", el, 1)


def test_criterion_10_performance():
    f = gen_balanced_planted(14000, 4, seed=0)
    p = P.ProtocolParams.build(14000, E.NOMINAL_MU, E.NOMINAL_NU)
    E.run_trial(P.ProtocolParams.build(16, 1.0, 0.9), E.INSTANCE, 0, gen_balanced_planted(16, 4, seed=0))
    t0 = time.perf_counter()
    r = E.run_trial(p, E.INSTANCE, 1, f)
    run_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    E.run_trial(p, E.INSTANCE, 2, gen_balanced_planted(14000, 4, seed=2))
    with_gen = time.perf_counter() - t0
    suite = time.perf_counter() - SUITE_START
    ok = run_s < 1 and with_gen < 1 and suite < 180 and r.satisfied_clauses > r.threshold
    report(10, "end-to-end runtime", ok,
           f"instance run {run_s * 1e3:.1f} ms, with generation {with_gen * 1e3:.1f} ms, "
           f"acceptance suite so far {suite:.1f}s (limit 180s)")
