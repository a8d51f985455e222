"""Vectorised engine: many independent runs advanced in lockstep.

State arrays carry a leading run axis ``R``: counts and estimates are
``(R, M, K)``, frequency/contact tables ``(R, M, M)``, peer caches
``(R, M, M, K)`` indexed ``[run, receiver, sender, arm]``.  Every reduction
that feeds back into the state walks the peer axis sequentially in the same
order as :class:`~drfed.agent.Agent`, which keeps the two engines bitwise
identical.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import streams
from .agent import BonusConfig, ucb_bonus
from .graphs import Graph, mask_from_bits, pair_count, pair_list
from .rewards import SUB_GAUSSIAN
from .simulator import DiagnosticHistory, ExperimentConfig, GraphSource, Trajectory, _finish, round_diagnostics


class _ERBatch:
    """E-R graphs for ``R`` runs, each from its own graph stream."""

    def __init__(self, M: int, c: float, seeds: Sequence[int], block: int = streams.BLOCK):
        self.M, self.c = M, c
        self.npairs = pair_count(M)
        self.rngs = [streams.graph_stream(s) for s in seeds]
        self.block = block
        self.buf = np.empty((len(seeds), 0, self.npairs))
        self.pos = 0

    def next(self) -> np.ndarray:
        """Edge indicator bits, ``(R, npairs)``."""
        if self.npairs == 0:
            return np.zeros((len(self.rngs), 0), dtype=bool)
        if self.pos >= self.buf.shape[1]:
            self.buf = np.stack([r.random((self.block, self.npairs)) for r in self.rngs])
            self.pos = 0
        u = self.buf[:, self.pos]
        self.pos += 1
        return u < self.c


class _ChainBatch:
    def __init__(self, cfg: ExperimentConfig, seeds: Sequence[int]):
        self.sources = [GraphSource(cfg, s) for s in seeds]
        self.M = cfg.M
        self.npairs = pair_count(cfg.M)

    def next(self) -> np.ndarray:
        out = np.zeros((len(self.sources), self.npairs), dtype=bool)
        for r, src in enumerate(self.sources):
            mask = src.next().mask
            for k in range(self.npairs):
                out[r, k] = mask >> k & 1
        return out


def _adjacency(bits: np.ndarray, M: int) -> np.ndarray:
    R = bits.shape[0]
    A = np.zeros((R, M, M), dtype=bool)
    if M > 1:
        pairs = pair_list(M)
        iu = np.fromiter((p[0] for p in pairs), dtype=np.intp)
        ju = np.fromiter((p[1] for p in pairs), dtype=np.intp)
        A[:, iu, ju] = bits
        A[:, ju, iu] = bits
    return A


def _connected(A: np.ndarray) -> np.ndarray:
    R, M, _ = A.shape
    reach = (A | np.eye(M, dtype=bool)).astype(np.float32)
    for _ in range(max(1, math.ceil(math.log2(max(M, 2))))):
        reach = np.minimum(reach @ reach, 1.0)
    return reach[:, 0, :].min(axis=1) > 0


def simulate_batch(
    cfg: ExperimentConfig,
    seeds: Sequence[int],
    diagnostics: str = "light",
    snapshots: Sequence[int] = (),
    run_ids: Sequence[int] | None = None,
) -> list[Trajectory]:
    """Run ``cfg`` once per seed; returns one :class:`Trajectory` per seed."""
    cfg.validate()
    r = cfg.resolved()
    M, K, T, L, tau1 = cfg.M, cfg.K, cfg.T, r.L, cfg.tau1
    R = len(seeds)
    if R == 0:
        return []
    run_ids = list(range(R)) if run_ids is None else list(run_ids)
    snapshots = set(snapshots)
    full = diagnostics == "full"
    local = cfg.baseline == "local_ucb"
    bonus = cfg.bonus()
    local_bonus = BonusConfig(SUB_GAUSSIAN, r.C1)
    model = cfg.reward_model()
    c = cfg.edge_probability()
    c0 = cfg.c0

    reward_in = streams.BatchUniformFeed([[streams.reward_stream(s, m) for m in range(M)] for s in seeds])
    decision_in = streams.BatchUniformFeed([[streams.decision_stream(s, m) for m in range(M)] for s in seeds])
    graphs_in = _ERBatch(M, cfg.c, seeds) if cfg.graph == "er" else _ChainBatch(cfg, seeds)

    eye = np.eye(M, dtype=bool)
    ms = np.broadcast_to(np.arange(M), (R, M))

    n = np.zeros((R, M, K), dtype=np.int64)
    N = np.zeros((R, M, K), dtype=np.int64)
    bar = np.zeros((R, M, K))
    tilde = np.zeros((R, M, K))
    p = np.broadcast_to(eye.astype(float), (R, M, M)).copy()
    last = np.zeros((R, M, M), dtype=np.int64)
    hat_bar = np.zeros((R, M, M, K))
    hat_tilde = np.zeros((R, M, M, K))
    stale_now = np.zeros((R, M), dtype=np.int64)
    resid_m = np.zeros((R, M))

    actions = np.zeros((T, R, M), dtype=np.int64)
    rewards = np.zeros((T, R, M))
    edges = np.zeros((T, R), dtype=np.int64)
    conn = np.zeros((T, R), dtype=bool)
    a1 = np.full((T, R), np.nan)
    a2 = np.full((T, R), np.nan)
    min_n = np.zeros((T, R), dtype=np.int64)
    max_gap = np.zeros((T, R), dtype=np.int64)
    resid = np.zeros((T, R))
    stale = np.zeros((T, R), dtype=np.int64)
    lemma2 = np.zeros((T, R), dtype=np.int64)
    masks = [] if full else None
    p_hist = np.zeros((T, R, M, M)) if full else None
    pa_gap = np.zeros((T, R, M), dtype=np.int64) if full else None
    pa_res = np.zeros((T, R, M)) if full else None
    pa_stale = np.zeros((T, R, M), dtype=np.int64) if full else None
    snaps = [dict() for _ in range(R)]

    def observe(arms, rew):
        n_old = np.take_along_axis(n, arms[..., None], axis=2)[..., 0]
        n_new = n_old + 1
        b_old = np.take_along_axis(bar, arms[..., None], axis=2)[..., 0]
        b_new = (b_old * n_old + rew) / n_new
        np.put_along_axis(n, arms[..., None], n_new[..., None], axis=2)
        np.put_along_axis(bar, arms[..., None], b_new[..., None], axis=2)

    def record(A, t):
        nonlocal p, last
        k = t - tau1
        x = np.where(A | eye, 1.0, 0.0)
        p = ((k - 1) * p + x) / k
        last = np.where(A, t, last)

    pw = (M - 1) / (M * M)

    for t in range(1, T + 1):
        learning = t > L
        if not learning:
            arms = np.full((R, M), t % K, dtype=np.int64)
        else:
            u = decision_in.next()
            if local:
                arms = np.argmax(bar + ucb_bonus(local_bonus, n, t), axis=2)
            else:
                lag = n <= N - K
                any_lag = lag.any(axis=2)
                greedy = np.argmax(tilde + ucb_bonus(bonus, n, t), axis=2) if not any_lag.all() else 0
                pool = lag if cfg.fallback == "lagging" else np.ones_like(lag)
                size = pool.sum(axis=2)
                idx = (u * size).astype(np.int64)
                pick = np.argmax(np.cumsum(pool, axis=2) > idx[..., None], axis=2)
                arms = np.where(any_lag, pick, greedy).astype(np.int64)
        rew = model.from_uniform(ms, arms, reward_in.next())
        bits = graphs_in.next()
        A = _adjacency(bits, M)

        if not learning:
            observe(arms, rew)
            if t > tau1:
                record(A, t)
                hat_bar = np.where(A[..., None], bar[:, None, :, :], hat_bar)
            if t == L:
                w = 1.0 / M
                acc = np.zeros((R, M, K))
                for j in range(M):
                    v = hat_bar[:, :, j, :].copy()
                    v[:, j, :] = bar[:, j, :]
                    wj = np.where(p[:, :, j] > 0, w, 0.0)
                    acc = acc + wj[..., None] * v
                tilde = acc
                contacted = (p > 0) & ~eye
                hat_tilde = np.where(contacted[..., None], acc[:, :, None, :], hat_tilde)
                N = n.copy()
        elif local:
            observe(arms, rew)
            N = n.copy()
        else:
            msg_N, msg_bar, msg_tilde = N.copy(), bar.copy(), tilde.copy()
            tilde_prev = tilde
            observe(arms, rew)
            record(A, t)
            hat_bar = np.where(A[..., None], msg_bar[:, None, :, :], hat_bar)
            hat_tilde = np.where(A[..., None], msg_tilde[:, None, :, :], hat_tilde)
            newN = n.copy()
            for j in range(M):
                newN = np.where(A[:, :, j, None], np.maximum(newN, msg_N[:, None, j, :]), newN)
            N = newN

            pp = np.where(p > 0, pw, 0.0)
            sp = np.zeros((R, M))
            for j in range(M):
                sp = sp + pp[:, :, j]
            d = (1.0 - sp) / M
            resid_m = np.abs(sp + d * M - 1.0)
            s1 = np.zeros((R, M, K))
            s2 = np.zeros((R, M, K))
            s3 = np.zeros((R, M, K))
            stale_now = np.zeros((R, M), dtype=np.int64)
            own_vals = bar if cfg.neighbor_term == "bar" else tilde_prev
            peer_vals = hat_bar if cfg.neighbor_term == "bar" else hat_tilde
            for j in range(M):
                t1 = hat_tilde[:, :, j, :].copy()
                t1[:, j, :] = tilde_prev[:, j, :]
                s1 = s1 + pp[:, :, j, None] * t1
                v2 = peer_vals[:, :, j, :].copy()
                v2[:, j, :] = own_vals[:, j, :]
                nb = A[:, :, j] | eye[j]
                s2 = np.where(nb[..., None], s2 + v2, s2)
                s3 = np.where(nb[..., None], s3, s3 + hat_bar[:, :, j, :])
                stale_now += ~nb & (last[:, :, j] == 0)
            tilde = s1 + d[..., None] * s2 + d[..., None] * s3

        i = t - 1
        actions[i] = arms
        rewards[i] = rew
        edges[i] = bits.sum(axis=1)
        conn[i] = _connected(A)
        d1, d2, d3, d4, d5 = round_diagnostics(t, L, tau1, c, c0, n, N, p, last, A, conn[i], learning)
        a1[i], a2[i], min_n[i], max_gap[i], lemma2[i] = d1, d2, d3, d4, d5
        if learning and not local:
            resid[i] = resid_m.max(axis=1)
            stale[i] = stale_now.sum(axis=1)
        if full:
            masks.append([mask_from_bits(b) for b in bits])
            p_hist[i] = p
            if learning:
                pa_gap[i] = (N - n).max(axis=2)
                if not local:
                    pa_res[i] = resid_m
                    pa_stale[i] = stale_now
        if t in snapshots:
            for k in range(R):
                snaps[k][t] = {"tilde_mu": tilde[k].copy(), "n": n[k].copy(), "bar_mu": bar[k].copy()}

    out = []
    for k in range(R):
        cfg_k = cfg.replace(seed=int(seeds[k]))
        hist = DiagnosticHistory(a1[:, k].copy(), a2[:, k].copy(), conn[:, k].copy())
        extra = {}
        if full:
            extra = dict(
                graphs=[Graph(M, masks[i][k]) for i in range(T)],
                p_hist=p_hist[:, k].copy(),
                per_agent={"max_gap_nN": pa_gap[:, k].copy(), "weight_residual": pa_res[:, k].copy(),
                           "stale_reads": pa_stale[:, k].copy()},
            )
        out.append(
            _finish(cfg_k, run_ids[k], actions[:, k].copy(), rewards[:, k].copy(), edges[:, k].copy(), hist,
                    min_n[:, k].copy(), max_gap[:, k].copy(), resid[:, k].copy(), stale[:, k].copy(),
                    lemma2[:, k].copy(), snaps[k], **extra)
        )
    return out


MEMORY_BUDGET = 200_000_000  # bytes of per-round history per batch


def batch_size(cfg: ExperimentConfig, diagnostics: str = "light") -> int:
    """Runs per batch so stored per-round histories stay within :data:`MEMORY_BUDGET`."""
    per_run = cfg.T * (16 * cfg.M + 100)
    if diagnostics == "full":
        per_run += cfg.T * 8 * cfg.M * cfg.M
    return max(1, MEMORY_BUDGET // per_run)


def _work(args):
    cfg, seeds, ids, diagnostics, snapshots = args
    return simulate_batch(cfg, seeds, diagnostics=diagnostics, snapshots=snapshots, run_ids=ids)


def run_many(
    cfg: ExperimentConfig,
    seeds: Sequence[int],
    jobs: int = 1,
    diagnostics: str = "light",
    snapshots: Sequence[int] = (),
) -> list[Trajectory]:
    """Simulate one run per seed, optionally across ``jobs`` worker processes.

    Each run owns its random streams, so results do not depend on how runs
    are grouped into batches or workers; they come back in seed order with
    ``run_id`` equal to the position in ``seeds``.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    seeds = [int(s) for s in seeds]
    size = batch_size(cfg, diagnostics)
    if jobs > 1:
        size = max(1, min(size, math.ceil(len(seeds) / jobs)))
    chunks = [
        (cfg, seeds[i:i + size], list(range(i, min(i + size, len(seeds)))), diagnostics, tuple(snapshots))
        for i in range(0, len(seeds), size)
    ]
    if jobs == 1 or len(chunks) == 1:
        parts = [_work(c) for c in chunks]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_work, chunks))
    return [tr for part in parts for tr in part]
