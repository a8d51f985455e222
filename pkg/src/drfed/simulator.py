"""Experiment configuration, round orchestration and per-run measurements.

Two interchangeable engines produce a :class:`Trajectory`:

* ``engine="agents"`` drives one :class:`~drfed.agent.Agent` object per
  client; it is the readable reference.
* ``engine="batch"`` (default) advances many runs at once on stacked arrays;
  see :mod:`drfed.engine`.

Both consume the same per-run streams in the same order and evaluate the same
arithmetic in the same order, so they agree bit for bit.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import streams
from .agent import FALLBACKS, NEIGHBOR_TERMS, Agent, BonusConfig
from .errors import ConfigError
from .graphs import (
    ENUMERATION_LIMIT,
    Graph,
    chain_graphs,
    edge_presence_probability,
    generate_er,
    is_connected,
    sample_uniform_connected,
)
from .rewards import (
    BERNOULLI,
    FAMILIES,
    REGIMES,
    SUB_EXPONENTIAL,
    SUB_GAUSSIAN,
    TRUNCATED_EXPONENTIAL,
    GlobalStats,
    MeanMatrix,
    RewardModel,
    build_heterogeneous_means,
    global_stats,
)
from .theory import burn_in_length_bound, c1_constant

GRAPH_MODELS = ("er", "uniform")
BASELINES = ("drfed", "local_ucb")
DEFAULT_L = 200

CSV_COLUMNS = (
    "run_id",
    "t",
    "cum_regret",
    "cum_comm_edges",
    "a1_dev_sup",
    "connected",
    "min_n",
    "max_gap_nN",
    "cum_regret_post_L",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Every knob of one experiment.  ``None`` entries are derived in :meth:`resolved`.

    Derived defaults: ``L = min(200, T)``; ``thin = M**2``; ``family`` is
    Bernoulli for sub-Gaussian and the truncated shifted exponential for
    sub-exponential rewards; ``C1`` is the theory constant for ``sigma`` and
    ``M``; ``C2 = 1.5 * C1``.
    """

    M: int
    K: int
    T: int
    L: int | None = None
    tau1: int = 0
    graph: str = "er"
    c: float = 0.9
    thin: int | None = None
    regime: str = SUB_GAUSSIAN
    family: str | None = None
    h: float = 0.1
    base: float = 0.1
    layout: str = "aligned"
    means: tuple[tuple[float, ...], ...] | None = None
    reward_sigma: float = 0.1
    alpha: float = 0.1
    sigma: float = 0.5
    C1: float | None = None
    C2: float | None = None
    delta: float = 0.1
    epsilon: float = 0.1
    c0: float = 0.5
    comm_cost: float = 1.0
    seed: int = 0
    baseline: str = "drfed"
    fallback: str = "lagging"
    neighbor_term: str = "bar"

    # -- construction ------------------------------------------------------

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        """Build and validate from plain values; unknown keys are errors."""
        known = set(cls.keys())
        for k in data:
            if k not in known:
                raise ConfigError(f"unknown configuration key {k!r}", key=k)
        for k in ("M", "K", "T"):
            if data.get(k) is None:
                raise ConfigError(f"missing required key {k!r}", key=k)
        kwargs = {}
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        for k, v in data.items():
            kwargs[k] = _coerce(k, types[k], v)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["means"] is not None:
            d["means"] = [list(r) for r in d["means"]]
        return d

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def resolved(self) -> "ExperimentConfig":
        """Copy with every derived default materialised."""
        L = self.L if self.L is not None else min(DEFAULT_L, self.T)
        thin = self.thin if self.thin is not None else self.M * self.M
        family = self.family or (TRUNCATED_EXPONENTIAL if self.regime == SUB_EXPONENTIAL else BERNOULLI)
        C1 = self.C1 if self.C1 is not None else c1_constant(self.sigma, self.M)
        C2 = self.C2 if self.C2 is not None else 1.5 * C1
        return dataclasses.replace(self, L=L, thin=thin, family=family, C1=C1, C2=C2)

    def validate(self) -> None:
        def bad(key, msg):
            raise ConfigError(f"{key}: {msg}", key=key)

        if self.M < 1:
            bad("M", "must be >= 1")
        if self.K < 1:
            bad("K", "must be >= 1")
        r = self.resolved()
        if not r.T >= r.L >= self.tau1 >= 0:
            bad("L", f"need T >= L >= tau1 >= 0 (T={r.T}, L={r.L}, tau1={self.tau1})")
        if r.L < self.K:
            bad("L", f"burn-in must pull every arm at least once (L={r.L} < K={self.K})")
        if self.graph not in GRAPH_MODELS:
            bad("graph", f"unknown graph model {self.graph!r}")
        if not 0.0 <= self.c <= 1.0:
            bad("c", "edge probability must lie in [0, 1]")
        if r.thin < 1:
            bad("thin", "must be >= 1")
        if self.regime not in REGIMES:
            bad("regime", f"unknown regime {self.regime!r}")
        if r.family not in FAMILIES:
            bad("family", f"unknown family {r.family!r}")
        if self.layout not in ("aligned", "alternating"):
            bad("layout", f"unknown layout {self.layout!r}")
        for key in ("delta", "epsilon", "c0"):
            if not 0.0 < getattr(self, key) < 1.0:
                bad(key, "must lie strictly between 0 and 1")
        if self.comm_cost < 0:
            bad("comm_cost", "must be non-negative")
        if not 0 <= self.seed < 2**64:
            bad("seed", "must be a 64-bit unsigned integer")
        if self.baseline not in BASELINES:
            bad("baseline", f"unknown baseline {self.baseline!r}")
        if self.fallback not in FALLBACKS:
            bad("fallback", f"unknown fallback {self.fallback!r}")
        if self.neighbor_term not in NEIGHBOR_TERMS:
            bad("neighbor_term", f"unknown neighbor term {self.neighbor_term!r}")
        if r.C1 <= 0:
            bad("C1", "must be positive")
        if self.regime == SUB_EXPONENTIAL and r.C2 < 1.5 * r.C1:
            bad("C2", "sub-exponential bonus needs C2 >= 1.5 * C1")
        if self.regime == SUB_EXPONENTIAL and r.T < 2:
            bad("T", "sub-exponential bonus needs T >= 2")
        if self.means is not None:
            a = np.asarray(self.means, dtype=float)
            if a.shape != (self.M, self.K):
                bad("means", f"expected a {self.M} x {self.K} matrix, got shape {a.shape}")
            if np.any(a < 0) or np.any(a > 1):
                bad("means", "entries must lie in [0, 1]")
        else:
            try:
                build_heterogeneous_means(self.M, self.K, self.h, self.base, self.layout)
            except ValueError as exc:
                bad("h", str(exc))

    # -- derived objects ---------------------------------------------------

    def mean_matrix(self) -> MeanMatrix:
        if self.means is not None:
            return MeanMatrix(np.asarray(self.means, dtype=float))
        return build_heterogeneous_means(self.M, self.K, self.h, self.base, self.layout)

    def reward_model(self) -> RewardModel:
        r = self.resolved()
        return RewardModel(self.mean_matrix(), r.family, self.regime, self.reward_sigma, self.alpha)

    def bonus(self) -> BonusConfig:
        r = self.resolved()
        if self.regime == SUB_EXPONENTIAL:
            return BonusConfig(SUB_EXPONENTIAL, r.C1, r.C2, self.T)
        return BonusConfig(SUB_GAUSSIAN, r.C1)

    def edge_probability(self) -> float:
        """Reference edge frequency for the graph-convergence event."""
        if self.graph == "er":
            return float(self.c)
        if self.M < 2:
            return 1.0
        if self.M <= ENUMERATION_LIMIT:
            return float(edge_presence_probability(self.M, "enumeration"))
        return float(edge_presence_probability(self.M, "formula"))


def _coerce(key: str, annotation: str, value):
    try:
        if key == "means":
            if value is None:
                return None
            return tuple(tuple(float(x) for x in row) for row in value)
        if value is None:
            return None
        if "int" in annotation and "float" not in annotation:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(f"expected an integer, got {value}")
            if isinstance(value, bool):
                raise ValueError("expected an integer")
            return int(value)
        if "float" in annotation:
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}", key=key) from None


# -- records ------------------------------------------------------------------


@dataclass
class RoundRecord:
    t: int
    graph: Graph | None
    actions: np.ndarray
    rewards: np.ndarray
    per_agent: dict


@dataclass
class EventAReport:
    a1_holds: bool
    a1_first_violation: int | None
    a1_sup_dev: float
    a2_holds: bool
    a2_worst_ratio: float
    a3_holds: bool
    a3_first_violation: int | None

    @property
    def a1_and_a3(self) -> bool:
        return self.a1_holds and self.a3_holds

    @property
    def holds(self) -> bool:
        return self.a1_holds and self.a2_holds and self.a3_holds


@dataclass
class DiagnosticHistory:
    """Per-round quantities needed to evaluate the good event.

    ``a1_dev[t-1]`` is ``max_{m, j != m} |P_t(m, j) - c|`` (NaN before any
    graph statistic exists), ``a2_ratio[t-1]`` the worst staleness ratio
    (NaN for ``t < L``), ``connected[t-1]`` whether ``G_t`` is connected.
    """

    a1_dev: np.ndarray
    a2_ratio: np.ndarray
    connected: np.ndarray


@dataclass
class Trajectory:
    config: ExperimentConfig
    run_id: int
    actions: np.ndarray
    rewards: np.ndarray
    edge_counts: np.ndarray
    regret: np.ndarray
    comm: np.ndarray
    history: DiagnosticHistory
    min_n: np.ndarray
    max_gap: np.ndarray
    weight_residual: np.ndarray
    stale_reads: np.ndarray
    lemma2_violations: np.ndarray
    event_a: EventAReport
    snapshots: dict = field(default_factory=dict)
    graphs: list | None = None
    p_history: np.ndarray | None = None
    per_agent: dict | None = None

    @property
    def T(self) -> int:
        return len(self.regret)

    @property
    def regret_post_burn_in(self) -> np.ndarray:
        """Cumulative regret counted from round ``L + 1`` (zero before)."""
        L = self.config.resolved().L
        out = self.regret.copy()
        base = self.regret[L - 1] if L > 0 else 0.0
        out[:L] = 0.0
        out[L:] -= base
        return out

    def round(self, t: int) -> RoundRecord:
        i = t - 1
        per_agent = {"max_gap_nN": int(self.max_gap[i]), "weight_residual": float(self.weight_residual[i]),
                     "stale_reads": int(self.stale_reads[i])}
        if self.per_agent is not None:
            per_agent = {k: v[i] for k, v in self.per_agent.items()}
        graph = self.graphs[i] if self.graphs is not None else None
        return RoundRecord(t, graph, self.actions[i], self.rewards[i], per_agent)

    @property
    def rounds(self) -> list[RoundRecord]:
        return [self.round(t) for t in range(1, self.T + 1)]

    def csv_rows(self) -> Iterable[list[str]]:
        post = self.regret_post_burn_in
        g = lambda x: format(float(x), ".17g")
        for i in range(self.T):
            dev = self.history.a1_dev[i]
            yield [
                str(self.run_id),
                str(i + 1),
                g(self.regret[i]),
                g(self.comm[i]),
                "" if math.isnan(dev) else g(dev),
                "1" if self.history.connected[i] else "0",
                str(int(self.min_n[i])),
                str(int(self.max_gap[i])),
                g(post[i]),
            ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(self.csv_rows())
        return buf.getvalue()


# -- measurements -------------------------------------------------------------


def pseudo_regret(actions, stats: GlobalStats, means: MeanMatrix | np.ndarray, form: str = "global") -> np.ndarray:
    """Cumulative pseudo-regret of a ``(T, M)`` action array.

    ``form="global"`` charges each pull the global gap of the pulled arm,
    ``R_t = sum_s (1/M) sum_m gap[a_m^s]``, which is non-decreasing.
    ``form="local"`` subtracts the pulling client's own mean instead,
    ``R_t = t mu* - (1/M) sum_s sum_m mu^m[a_m^s]``; heterogeneous clients
    can then push it below zero.
    """
    acts = np.asarray(actions, dtype=np.int64)
    if acts.ndim == 1:
        acts = acts[:, None]
    T, M = acts.shape
    inst = np.zeros(T)
    if form == "global":
        for m in range(M):
            inst = inst + stats.gaps[acts[:, m]]
        inst = inst / M
    elif form == "local":
        mu = means.means if isinstance(means, MeanMatrix) else np.asarray(means, dtype=float)
        best = stats.global_means[stats.optimal_arm]
        acc = np.zeros(T)
        for m in range(M):
            acc = acc + mu[m, acts[:, m]]
        inst = best - acc / M
    else:
        raise ValueError(f"unknown regret form {form!r}")
    return np.cumsum(inst)


def communication_cost(graphs, c1: float = 1.0) -> np.ndarray:
    """Cumulative ``c1 * sum_s |E_s|``; accepts graphs or per-round edge counts."""
    if c1 < 0:
        raise ValueError("link cost must be non-negative")
    counts = np.array([g.edge_count if isinstance(g, Graph) else g for g in graphs], dtype=float)
    return np.cumsum(c1 * counts)


def event_a_diagnostics(history: DiagnosticHistory | None, cfg: ExperimentConfig) -> EventAReport:
    """Evaluate frequency convergence, bounded staleness and connectivity from ``L`` on."""
    if history is None:
        raise ValueError("event diagnostics need the run's diagnostic history")
    r = cfg.resolved()
    L, delta = r.L, cfg.delta
    start = max(L, 1) - 1
    dev = history.a1_dev[start:]
    ts = np.arange(start + 1, start + 1 + len(dev))
    valid = ~np.isnan(dev)
    bad1 = valid & (dev > delta)
    # missing statistics (no exchange yet) count as a violation
    if cfg.M > 1:
        bad1 |= ~valid
    a1_first = int(ts[np.argmax(bad1)]) if bad1.any() else None
    sup = float(np.nanmax(dev)) if valid.any() else (0.0 if cfg.M < 2 else float("nan"))
    ratio = history.a2_ratio[start:]
    worst = float(np.nanmax(ratio)) if np.any(~np.isnan(ratio)) else 0.0
    conn = history.connected[start:]
    a3_first = int(ts[np.argmax(~conn)]) if (~conn).any() else None
    return EventAReport(
        a1_holds=a1_first is None,
        a1_first_violation=a1_first,
        a1_sup_dev=sup,
        a2_holds=worst <= 1.0,
        a2_worst_ratio=worst,
        a3_holds=a3_first is None,
        a3_first_violation=a3_first,
    )


def advisory_burn_in(cfg: ExperimentConfig, lam: float | None = None, p_star: float | None = None) -> float:
    """Burn-in length suggested by the theory for ``cfg``'s setting."""
    if cfg.graph == "er":
        setting = "s1"
    else:
        setting = "s2" if cfg.M < 11 else "s3"
    return burn_in_length_bound(setting, cfg.T, cfg.K, cfg.delta, cfg.epsilon, cfg.c0, lam, p_star, cfg.M)


# -- shared per-round diagnostics ----------------------------------------------


def round_diagnostics(t, L, tau1, c, c0, n, N, p, last, adjacency, connected, learning):
    """Per-run diagnostics of one round from stacked state.

    Shapes: ``n, N`` ``(R, M, K)``; ``p`` ``(R, M, M)``; ``last`` ``(R, M, M)``;
    ``adjacency`` ``(R, M, M)``; ``connected`` ``(R,)``.
    Returns ``(a1_dev, a2_ratio, min_n, max_gap, lemma2_violations)``, each ``(R,)``.
    """
    R, M, K = n.shape
    off = ~np.eye(M, dtype=bool)
    if t > tau1 and M > 1:
        a1 = np.abs(p - c)[:, off].max(axis=1)
    else:
        a1 = np.full(R, np.nan)
    if t >= L:
        if M > 1:
            oldest = np.where(off, last, np.iinfo(np.int64).max).min(axis=2)
            lhs = (t + 1 - oldest).astype(float)
        else:
            lhs = np.zeros((R, M))
        min_l = n.min(axis=1).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = lhs[:, :, None] / (c0 * min_l[:, None, :])
        ratio = np.where(np.isnan(ratio), 0.0, ratio)
        a2 = ratio.reshape(R, -1).max(axis=1)
    else:
        a2 = np.full(R, np.nan)
    min_n = n.reshape(R, -1).min(axis=1)
    max_gap = (N - n).reshape(R, -1).max(axis=1) if learning else np.zeros(R, dtype=np.int64)
    thr = 2 * (K * K + K * M + M)
    floor = n.min(axis=1, keepdims=True)
    viol = (n >= thr) & (n > 2 * floor) & connected[:, None, None]
    lemma2 = viol.reshape(R, -1).sum(axis=1)
    return a1, a2, min_n, max_gap, lemma2


def _finish(cfg, run_id, actions, rewards, edges, hist, min_n, max_gap, resid, stale, lemma2, snaps,
            graphs=None, p_hist=None, per_agent=None) -> Trajectory:
    model_means = cfg.mean_matrix()
    stats = global_stats(model_means)
    regret = pseudo_regret(actions, stats, model_means)
    comm = communication_cost(edges, cfg.comm_cost)
    return Trajectory(
        config=cfg,
        run_id=run_id,
        actions=actions,
        rewards=rewards,
        edge_counts=np.asarray(edges),
        regret=regret,
        comm=comm,
        history=hist,
        min_n=min_n,
        max_gap=max_gap,
        weight_residual=resid,
        stale_reads=stale,
        lemma2_violations=lemma2,
        event_a=event_a_diagnostics(hist, cfg),
        snapshots=snaps,
        graphs=graphs,
        p_history=p_hist,
        per_agent=per_agent,
    )


# -- graph sources ------------------------------------------------------------


class GraphSource:
    """Round-by-round environment graphs of one run."""

    def __init__(self, cfg: ExperimentConfig, seed: int):
        r = cfg.resolved()
        self.rng = streams.graph_stream(seed)
        self.M = cfg.M
        self.model = cfg.graph
        self.c = cfg.c
        if cfg.graph == "uniform":
            self.chain = sample_uniform_connected(cfg.M, cfg.tau1, self.rng)
            self._stream = chain_graphs(self.chain, r.thin)

    def next(self) -> Graph:
        if self.model == "er":
            return generate_er(self.M, self.c, self.rng)
        return next(self._stream)


# -- reference engine ---------------------------------------------------------


def _run_agents(cfg: ExperimentConfig, run_id: int, diagnostics: str, snapshots: Sequence[int]) -> Trajectory:
    r = cfg.resolved()
    M, K, T, L, tau1 = cfg.M, cfg.K, cfg.T, r.L, cfg.tau1
    seed = cfg.seed
    model = cfg.reward_model()
    local = cfg.baseline == "local_ucb"
    bonus = cfg.bonus()
    local_bonus = BonusConfig(SUB_GAUSSIAN, r.C1)
    agents = [Agent(m, M, K, bonus, tau1, cfg.fallback, cfg.neighbor_term) for m in range(M)]
    rewards_in = streams.reward_feed(seed, M)
    decisions = streams.decision_feed(seed, M)
    source = GraphSource(cfg, seed)
    c = cfg.edge_probability()
    full = diagnostics == "full"

    actions = np.zeros((T, M), dtype=np.int64)
    rewards = np.zeros((T, M))
    edges = np.zeros(T, dtype=np.int64)
    a1 = np.full(T, np.nan)
    a2 = np.full(T, np.nan)
    conn = np.zeros(T, dtype=bool)
    min_n = np.zeros(T, dtype=np.int64)
    max_gap = np.zeros(T, dtype=np.int64)
    resid = np.zeros(T)
    stale = np.zeros(T, dtype=np.int64)
    lemma2 = np.zeros(T, dtype=np.int64)
    graphs = [] if full else None
    p_hist = np.zeros((T, M, M)) if full else None
    per_agent = {"max_gap_nN": np.zeros((T, M), dtype=np.int64), "weight_residual": np.zeros((T, M)),
                 "stale_reads": np.zeros((T, M), dtype=np.int64)} if full else None
    snaps = {}
    ms = np.arange(M)

    for t in range(1, T + 1):
        learning = t > L
        if not learning:
            arms = np.array([a.burn_in_act(t) for a in agents])
        else:
            u = decisions.next()
            if local:
                arms = np.array([
                    int(np.argmax(a.bar_mu + _bonus(local_bonus, a.n, t))) for a in agents
                ])
            else:
                arms = np.array([a.select_arm(t, u[m]) for m, a in enumerate(agents)])
        rew = model.from_uniform(ms, arms, rewards_in.next())
        g = source.next()
        nbrs = [g.neighbors(m) for m in range(M)]
        if not learning:
            for m, a in enumerate(agents):
                a.observe(int(arms[m]), float(rew[m]))
            if t > tau1:
                msgs = [a.make_message() for a in agents]
                for m, a in enumerate(agents):
                    a.record_neighbors(nbrs[m], t, {j: msgs[j] for j in nbrs[m]})
            if t == L:
                for a in agents:
                    a.finalize_burn_in(L)
        elif local:
            for m, a in enumerate(agents):
                a.observe(int(arms[m]), float(rew[m]))
                a.N = a.n.copy()
        else:
            msgs = [a.make_message() for a in agents]
            for m, a in enumerate(agents):
                a.update_round(t, int(arms[m]), float(rew[m]), nbrs[m], {j: msgs[j] for j in nbrs[m]})

        actions[t - 1] = arms
        rewards[t - 1] = rew
        edges[t - 1] = g.edge_count
        conn[t - 1] = is_connected(g)
        n = np.stack([a.n for a in agents])[None]
        N = np.stack([a.N for a in agents])[None]
        p = np.stack([a.p_row for a in agents])[None]
        last = np.stack([a.last_contact for a in agents])[None]
        d = round_diagnostics(t, L, tau1, c, cfg.c0, n, N, p, last, g.adjacency()[None], conn[t - 1:t], learning)
        a1[t - 1], a2[t - 1], min_n[t - 1], max_gap[t - 1], lemma2[t - 1] = (x[0] for x in d)
        if learning and not local:
            resid[t - 1] = max(a.weight_residual for a in agents)
            stale[t - 1] = sum(a.stale_reads for a in agents)
        if full:
            graphs.append(g)
            p_hist[t - 1] = p[0]
            per_agent["max_gap_nN"][t - 1] = (N - n)[0].max(axis=1) if learning else 0
            if learning and not local:
                per_agent["weight_residual"][t - 1] = [a.weight_residual for a in agents]
                per_agent["stale_reads"][t - 1] = [a.stale_reads for a in agents]
        if t in snapshots:
            snaps[t] = {"tilde_mu": np.stack([a.tilde_mu for a in agents]), "n": n[0].copy(),
                        "bar_mu": np.stack([a.bar_mu for a in agents])}

    hist = DiagnosticHistory(a1, a2, conn)
    return _finish(cfg, run_id, actions, rewards, edges, hist, min_n, max_gap, resid, stale, lemma2, snaps,
                   graphs, p_hist, per_agent)


def _bonus(cfg: BonusConfig, n, t):
    from .agent import ucb_bonus

    return ucb_bonus(cfg, n, t)


def run_experiment(
    cfg: ExperimentConfig,
    engine: str = "batch",
    diagnostics: str = "light",
    snapshots: Sequence[int] = (),
    run_id: int = 0,
) -> Trajectory:
    """Simulate one seeded run of ``cfg``."""
    cfg.validate()
    if engine == "agents":
        return _run_agents(cfg, run_id, diagnostics, tuple(snapshots))
    if engine == "batch":
        from .engine import simulate_batch

        return simulate_batch(cfg, [cfg.seed], diagnostics=diagnostics, snapshots=snapshots, run_ids=[run_id])[0]
    raise ValueError(f"unknown engine {engine!r}")


def local_ucb_baseline(cfg: ExperimentConfig, **kwargs) -> Trajectory:
    """Same harness with communication ignored: each client runs UCB on its own means."""
    return run_experiment(cfg.replace(baseline="local_ucb"), **kwargs)
