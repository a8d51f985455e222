"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Simulations shared between criteria are cached at module level, so the
same-page check (criterion 6) inspects every run the other criteria made.
"""

import math
import time
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from drfed.analysis import aggregate, fit_log_regret, sweep_summary
from drfed.cli import main
from drfed.engine import run_many, simulate_batch
from drfed.graphs import (
    edge_presence_probability,
    enumerate_connected,
    chain_tv_trace,
    generate_er,
    pair_count,
    transition_matrix,
)
from drfed.rewards import global_stats
from drfed.simulator import ExperimentConfig, advisory_burn_in, local_ucb_baseline, run_experiment
from drfed.streams import make_rng, reward_stream

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]

RUNS = 20
SEEDS = list(range(1000, 1000 + RUNS))
SHAPE_T = 50_000
SWEEP_T = 10_000
Z99 = 2.5758293035489004

_ALL_RUNS = []


def _keep(trajs):
    # only what criterion 6 needs, so memory stays small
    _ALL_RUNS.extend((t.config, int(t.max_gap.max()), float(t.weight_residual.max())) for t in trajs)
    return trajs


def shape_config(**kw):
    return ExperimentConfig.from_mapping(dict(M=5, K=2, T=SHAPE_T, h=0.1, graph="er", c=0.9, **kw))


@lru_cache(maxsize=None)
def shape_runs(regime="sub_gaussian", layout="aligned", h=0.1, baseline="drfed"):
    cfg = shape_config(regime=regime, layout=layout, baseline=baseline).replace(h=h)
    trajs = run_many(cfg, SEEDS)
    if baseline == "drfed":
        _keep(trajs)
    return cfg, aggregate(trajs), [t.regret[-1] for t in trajs]


@lru_cache(maxsize=None)
def sweep_runs(param, value):
    cfg = ExperimentConfig.from_mapping({**dict(M=5, K=2, T=SWEEP_T, h=0.1, c=0.9), param: value})
    trajs = _keep(run_many(cfg, SEEDS))
    return aggregate(trajs)


# -- 1 -----------------------------------------------------------------------


def test_c01_connected_graph_oracle(report):
    start = time.perf_counter()
    counts = [len(enumerate_connected(M)) for M in (2, 3, 4)]
    probs = [edge_presence_probability(M, "enumeration") for M in (2, 3, 4)]
    elapsed = time.perf_counter() - start
    ok = counts == [1, 4, 38] and probs == [Fraction(1), Fraction(3, 4), Fraction(12, 19)] and elapsed < 1.0
    report(1, "connected-graph oracle", ok, f"counts {counts}, probs {[str(p) for p in probs]}, {elapsed:.2f}s")
    assert ok


# -- 2 -----------------------------------------------------------------------


def test_c02_mixing(report):
    start = time.perf_counter()
    details, ok = [], True
    for M in (3, 4):
        trace = chain_tv_trace(M, 1000, 100_000, make_rng(20 + M, 3), [100_000])
        tv = trace[-1][1]
        P, _ = transition_matrix(M)
        u = np.full(len(P), 1 / len(P))
        resid = float(np.abs(u @ P - u).max())
        sym = bool(np.array_equal(P, P.T))
        ok &= tv < 0.05 and resid < 1e-10 and sym
        details.append(f"M={M}: tv {tv:.4f}, residual {resid:.1e}, symmetric {sym}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    report(2, "graph walk mixing", ok, "; ".join(details) + f"; {elapsed:.1f}s")
    assert ok


# -- 3 -----------------------------------------------------------------------


def test_c03_er_statistics(report):
    start = time.perf_counter()
    M, n = 5, 10_000
    npairs = pair_count(M)
    ok, details = True, []
    for c in (0.2, 0.9):
        rng = make_rng(31, int(c * 10))
        bits = np.array([[g.mask >> k & 1 for k in range(npairs)] for g in (generate_er(M, c, rng) for _ in range(n))])
        freq = bits.mean(axis=0)
        edges = bits.sum(axis=1)
        mu = npairs * c
        sd = math.sqrt(npairs * c * (1 - c) / n)
        worst = float(np.abs(freq - c).max())
        ok &= worst <= 0.01 and abs(edges.mean() - mu) <= 3 * sd
        details.append(f"c={c}: max |freq-c| {worst:.4f}, mean edges {edges.mean():.3f} vs {mu:.1f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 10
    report(3, "E-R statistics", ok, "; ".join(details) + f"; {elapsed:.1f}s")
    assert ok


# -- 4 -----------------------------------------------------------------------


def reference_ucb(mu, L, T, C1, seed):
    """Textbook single-agent UCB with a round-robin warm start."""
    K = len(mu)
    rng = reward_stream(seed, 0)
    n = np.zeros(K, dtype=np.int64)
    mean = np.zeros(K)
    acts = []
    for t in range(1, T + 1):
        u = rng.random()
        if t <= L:
            a = t % K
        else:
            a = int(np.argmax(mean + np.sqrt(C1 * math.log(t) / n)))
        r = 1.0 if u < mu[a] else 0.0
        n_old = n[a]
        n[a] += 1
        mean[a] = (mean[a] * n_old + r) / n[a]
        acts.append(a)
    return np.array(acts)


def test_c04_single_agent_reduction(report):
    cfg = ExperimentConfig.from_mapping(dict(M=1, K=3, T=10_000, L=30, h=0.3, seed=4242))
    tr = run_experiment(cfg)
    ref = reference_ucb(cfg.mean_matrix().means[0], 30, 10_000, cfg.resolved().C1, 4242)
    same_actions = bool(np.array_equal(tr.actions[:, 0], ref))
    ref_regret = np.cumsum(global_stats(cfg.mean_matrix()).gaps[ref])
    same_regret = bool(np.array_equal(tr.regret, ref_regret))
    base = local_ucb_baseline(cfg)
    same_baseline = bool(np.array_equal(base.actions, tr.actions))
    ok = same_actions and same_regret and same_baseline
    report(4, "M=1 reduces to single-agent UCB", ok,
           f"actions identical {same_actions}, regret identical {same_regret}, baseline identical {same_baseline}")
    assert ok


# -- 5 -----------------------------------------------------------------------


def test_c05_estimator_unbiased(report):
    start = time.perf_counter()
    # deterministic rewards on complete graphs: exact fixed point
    worst = 0.0
    for M, K in ((3, 2), (5, 3)):
        cfg = ExperimentConfig.from_mapping(dict(M=M, K=K, T=600, L=60, c=1.0, h=0.3, family="deterministic"))
        mu = global_stats(cfg.mean_matrix()).global_means
        for tr in simulate_batch(cfg, [1, 2], snapshots=range(60, 601)):
            for snap in tr.snapshots.values():
                worst = max(worst, float(np.abs(snap["tilde_mu"] - mu).max()))
    fixed_ok = worst < 1e-10

    # Monte-Carlo: across-run mean inside the 99% normal interval
    cfg = ExperimentConfig.from_mapping(dict(M=3, K=2, T=700, L=200, c=0.9))
    mu = global_stats(cfg.mean_matrix()).global_means
    cps = (400, 700)
    trajs = _keep(simulate_batch(cfg, list(range(2000)), snapshots=cps))
    zs = []
    for t in cps:
        X = np.array([tr.snapshots[t]["tilde_mu"] for tr in trajs])
        se = X.std(axis=0, ddof=1) / math.sqrt(len(X))
        zs.append(float(np.abs((X.mean(axis=0) - mu) / se).max()))
    mc_ok = max(zs) < Z99
    elapsed = time.perf_counter() - start
    ok = fixed_ok and mc_ok and elapsed < 120
    report(5, "estimator unbiasedness", ok,
           f"fixed-point error {worst:.1e}; worst |z| at t={cps}: {zs[0]:.2f}, {zs[1]:.2f} (< {Z99:.3f}); {elapsed:.0f}s")
    assert ok


# -- 7, 8 --------------------------------------------------------------------


def test_c07_regret_shape_and_baseline(report):
    start = time.perf_counter()
    cfg, series, _ = shape_runs()
    L = cfg.resolved().L
    fit = fit_log_regret(series, t_min=2 * L)
    # instance where some clients' local best arm is not the global best
    alt_cfg, _, drfed_final = shape_runs(layout="alternating", h=0.3)
    _, _, local_final = shape_runs(layout="alternating", h=0.3, baseline="local_ucb")
    means = alt_cfg.mean_matrix().means
    disagree = int((means.argmax(axis=1) != global_stats(means).optimal_arm).sum())
    ratio = float(np.mean(drfed_final) / np.mean(local_final))
    elapsed = time.perf_counter() - start
    ok = fit.r_squared >= 0.9 and ratio <= 0.25 and disagree > 0 and elapsed < 600
    report(7, "log-shaped regret, beats local UCB", ok,
           f"R^2 {fit.r_squared:.3f} on t>={2 * L}; final {np.mean(drfed_final):.1f} vs local {np.mean(local_final):.1f} "
           f"= {ratio:.1%} ({disagree} of {len(means)} clients disagree); {elapsed:.0f}s")
    assert ok


def test_c08_sub_exponential_shape(report):
    start = time.perf_counter()
    cfg, series, _ = shape_runs(regime="sub_exponential")
    r = cfg.resolved()
    fit = fit_log_regret(series, t_min=2 * r.L)
    elapsed = time.perf_counter() - start
    ok = fit.r_squared >= 0.9 and r.C2 == 1.5 * r.C1 and elapsed < 600
    report(8, "sub-exponential regret shape", ok, f"R^2 {fit.r_squared:.3f}, C2/C1 = {r.C2 / r.C1:.2f}; {elapsed:.0f}s")
    assert ok


# -- 9 -----------------------------------------------------------------------


def test_c09_sweep_directions(report):
    start = time.perf_counter()
    sweeps = {"h": [0.1, 0.2, 0.3], "K": [2, 3, 4], "c": [0.2, 0.5, 0.9, 1.0]}
    verdicts, details = {}, []
    for param, values in sweeps.items():
        table = sweep_summary({v: sweep_runs(param, v) for v in values}, param)
        verdicts[param] = table.verdict
        finals = ", ".join(f"{r.mean:.1f}" for r in table.rows)
        details.append(f"{param} {table.direction}: [{finals}] {'ok' if table.verdict else 'violated'}")
    elapsed = time.perf_counter() - start
    ok = all(verdicts.values()) and elapsed < 1800
    report(9, "sweep directions", ok, "; ".join(details) + f"; {elapsed:.0f}s")
    assert ok


# -- 10 ----------------------------------------------------------------------


def test_c10_event_a_frequency(report):
    start = time.perf_counter()
    base = ExperimentConfig.from_mapping(dict(M=5, K=2, T=1000, c=0.9, delta=0.15, epsilon=0.1))
    L = math.ceil(advisory_burn_in(base))
    cfg = base.replace(L=L)
    trajs = _keep(run_many(cfg, range(500)))
    rate = float(np.mean([t.event_a.a1_and_a3 for t in trajs]))
    a1 = float(np.mean([t.event_a.a1_holds for t in trajs]))
    elapsed = time.perf_counter() - start
    ok = rate >= 1 - 7 * 0.1 and elapsed < 600
    report(10, "event A1 and A3 frequency", ok,
           f"L={L}, T={cfg.T}: rate {rate:.3f} >= 0.30 (A1 alone {a1:.3f}); {elapsed:.0f}s")
    assert ok


# -- 6 (after the runs above) --------------------------------------------------


def test_c11_determinism_across_jobs(report, tmp_path, monkeypatch):
    monkeypatch.delenv("DRFED_SEED", raising=False)
    conf = tmp_path / "c.toml"
    # the criterion 10 run, replayed through the command line
    L = math.ceil(advisory_burn_in(ExperimentConfig(M=5, K=2, T=1000, delta=0.15)))
    conf.write_text(f"M = 5\nK = 2\nT = 1000\nL = {L}\nc = 0.9\ndelta = 0.15\nruns = 500\nseed = 0\n")
    a, b = tmp_path / "j1", tmp_path / "j8"
    assert main(["run", str(conf), "--jobs", "1", "--out", str(a)]) == 0
    assert main(["run", str(conf), "--jobs", "8", "--out", str(b)]) == 0
    (da,), (db,) = list(a.iterdir()), list(b.iterdir())
    files = sorted(p.name for p in da.glob("*.csv"))
    identical = all((da / f).read_bytes() == (db / f).read_bytes() for f in files)
    ok = identical and len(files) == 501 and da.name == db.name
    report(11, "determinism across --jobs", ok, f"{len(files)} CSV files byte-identical: {identical}")
    assert ok


def test_c06_same_page_invariants(report):
    # make sure the shared runs exist even when this test is selected alone
    shape_runs()
    assert _ALL_RUNS
    band_ok, weight_ok = True, True
    worst_gap, worst_ratio, worst_resid = 0, 0.0, 0.0
    for cfg, gap, resid in _ALL_RUNS:
        bound = cfg.K * (cfg.K + 2 * cfg.M)
        band_ok &= 0 <= gap <= bound
        weight_ok &= resid <= 1e-12
        worst_gap = max(worst_gap, gap)
        worst_ratio = max(worst_ratio, gap / bound)
        worst_resid = max(worst_resid, resid)
    ok = band_ok and weight_ok
    report(6, "same-page band and weight identity", ok,
           f"{len(_ALL_RUNS)} runs; max N-n {worst_gap} (at most {worst_ratio:.0%} of the band); "
           f"max weight residual {worst_resid:.1e}")
    assert ok
