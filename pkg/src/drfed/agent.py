"""Per-client DrFed-UCB state machine.

An :class:`Agent` only sees its own pulls and the messages of its current
neighbours.  A round is driven from outside in barrier order:

burn-in (``t <= L``)
    ``burn_in_act`` -> ``observe`` -> (after ``tau1``) ``make_message`` /
    ``record_neighbors``; ``finalize_burn_in`` at ``t = L``.
learning (``t > L``)
    ``select_arm`` -> pull -> every agent ``make_message`` -> every agent
    ``update_round``.

Messages are snapshots taken before any agent incorporates the round's
messages, so exchange is simultaneous.

Summation order in the estimator updates is fixed (peer index ascending, the
agent's own term in its slot) so the batched engine can reproduce it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ClockError, PhaseError
from .rewards import REGIMES, SUB_EXPONENTIAL, SUB_GAUSSIAN

BURN_IN = "burn_in"
LEARNING = "learning"

FALLBACKS = ("lagging", "all")
NEIGHBOR_TERMS = ("bar", "tilde")


@dataclass(frozen=True)
class BonusConfig:
    """UCB exploration bonus.

    ``sub_gaussian``: ``sqrt(C1 ln t / n)``.
    ``sub_exponential``: ``sqrt(C1 ln T / n) + C2 ln T / n`` with ``C2 >= 1.5 C1``.
    """

    regime: str = SUB_GAUSSIAN
    C1: float = 1.0
    C2: float | None = None
    T: int | None = None

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if not self.C1 > 0:
            raise ValueError("C1 must be positive")
        if self.regime == SUB_EXPONENTIAL:
            if self.C2 is None or self.T is None:
                raise ValueError("the sub-exponential bonus needs C2 and T")
            if self.C2 < 1.5 * self.C1:
                raise ValueError(f"C2 / C1 must be at least 3/2, got {self.C2 / self.C1}")
            if self.T < 2:
                raise ValueError("T must be at least 2")


def ucb_bonus(cfg: BonusConfig, n, t: int):
    """Exploration bonus for pull count(s) ``n`` at round ``t``."""
    n_arr = np.asarray(n)
    if np.any(n_arr < 1):
        raise ZeroDivisionError("UCB bonus needs every count n >= 1")
    if cfg.regime == SUB_GAUSSIAN:
        if t < 2:
            raise ValueError("the sub-Gaussian bonus needs t >= 2")
        lt = math.log(t)
        return np.sqrt(cfg.C1 * lt / n_arr)
    lt = math.log(cfg.T)
    return np.sqrt(cfg.C1 * lt / n_arr) + cfg.C2 * lt / n_arr


@dataclass(frozen=True)
class Message:
    """What one client transmits in a round.

    Burn-in messages carry only ``n`` and ``bar_mu``; ``N`` and ``tilde_mu``
    are ``None``.
    """

    sender: int
    t: int
    n: np.ndarray
    bar_mu: np.ndarray
    N: np.ndarray | None = None
    tilde_mu: np.ndarray | None = None


class Agent:
    """One client's full DrFed-UCB memory."""

    def __init__(
        self,
        m: int,
        M: int,
        K: int,
        bonus: BonusConfig,
        tau1: int = 0,
        fallback: str = "lagging",
        neighbor_term: str = "bar",
    ):
        if not 0 <= m < M:
            raise ValueError(f"agent id {m} outside 0..{M - 1}")
        if fallback not in FALLBACKS:
            raise ValueError(f"unknown fallback {fallback!r}")
        if neighbor_term not in NEIGHBOR_TERMS:
            raise ValueError(f"unknown neighbor_term {neighbor_term!r}")
        self.m, self.M, self.K = m, M, K
        self.bonus = bonus
        self.tau1 = tau1
        self.fallback = fallback
        self.neighbor_term = neighbor_term

        self.n = np.zeros(K, dtype=np.int64)
        self.N = np.zeros(K, dtype=np.int64)
        self.bar_mu = np.zeros(K)
        self.tilde_mu = np.zeros(K)
        self.p_row = np.zeros(M)
        self.p_row[m] = 1.0
        self.last_contact = np.zeros(M, dtype=np.int64)
        # peer caches, indexed [peer, arm]; zero until first contact
        self.hat_n = np.zeros((M, K), dtype=np.int64)
        self.hat_N = np.zeros((M, K), dtype=np.int64)
        self.hat_bar = np.zeros((M, K))
        self.hat_tilde = np.zeros((M, K))
        self.hat_time = np.zeros(M, dtype=np.int64)

        self.phase = BURN_IN
        self.t = 0
        self._last_record = tau1
        self.weight_residual = 0.0
        self.stale_reads = 0

    # -- burn-in -----------------------------------------------------------

    def burn_in_act(self, t: int) -> int:
        if self.phase != BURN_IN:
            raise PhaseError("burn_in_act called outside the burn-in period")
        self.t = t
        return t % self.K

    def observe(self, arm: int, reward: float) -> None:
        if not 0.0 <= reward <= 1.0:
            raise ValueError(f"reward {reward} outside [0, 1]")
        n_old = self.n[arm]
        self.n[arm] = n_old + 1
        self.bar_mu[arm] = (self.bar_mu[arm] * n_old + reward) / self.n[arm]

    def record_neighbors(self, neighbor_ids: Sequence[int], t: int, messages: Mapping[int, Message]) -> None:
        """Fold round ``t``'s neighbourhood into ``p_row``, stopping times and caches.

        The running frequency restarts its clock after ``tau1``: round ``t``
        is the ``(t - tau1)``-th observation.
        """
        nbrs = set(neighbor_ids)
        if self.m in nbrs:
            nbrs.discard(self.m)
        extra = set(messages) - nbrs
        if extra:
            raise ValueError(f"messages from non-neighbours {sorted(extra)}")
        if t <= self._last_record:
            raise ClockError(f"round {t} recorded after round {self._last_record}")
        self._last_record = t
        k = t - self.tau1
        for j in range(self.M):
            if j == self.m:
                continue
            x = 1.0 if j in nbrs else 0.0
            self.p_row[j] = ((k - 1) * self.p_row[j] + x) / k
        for j in sorted(nbrs):
            self.last_contact[j] = t
            msg = messages.get(j)
            if msg is None:
                continue
            self.hat_n[j] = msg.n
            self.hat_bar[j] = msg.bar_mu
            if msg.N is not None:
                self.hat_N[j] = msg.N
            if msg.tilde_mu is not None:
                self.hat_tilde[j] = msg.tilde_mu
            self.hat_time[j] = t

    def finalize_burn_in(self, L: int) -> None:
        """Form the first network-wide estimate and switch to learning.

        Peers seen since ``tau1`` get weight ``1/M`` on their latest local
        estimate (the agent itself always counts).  Their cached network-wide
        estimate is seeded with the agent's own result, standing in for the
        value each peer computes at the same moment.
        """
        if self.phase != BURN_IN:
            raise PhaseError("burn-in already finalised")
        w = 1.0 / self.M
        acc = np.zeros(self.K)
        for j in range(self.M):
            v = self.bar_mu if j == self.m else self.hat_bar[j]
            wj = w if self.p_row[j] > 0 else 0.0
            acc = acc + wj * v
        self.tilde_mu = acc
        for j in range(self.M):
            if j != self.m and self.p_row[j] > 0:
                self.hat_tilde[j] = acc
        self.N = self.n.copy()
        self.phase = LEARNING
        self.t = L

    # -- learning ----------------------------------------------------------

    def lagging_arms(self) -> np.ndarray:
        return np.flatnonzero(self.n <= self.N - self.K)

    def select_arm(self, t: int, u: float) -> int:
        """Arm for round ``t``; ``u`` is this round's uniform from the decision stream."""
        if self.phase != LEARNING:
            raise PhaseError("select_arm called before burn-in finished")
        lag = self.lagging_arms()
        if lag.size:
            pool = lag if self.fallback == "lagging" else np.arange(self.K)
            return int(pool[int(u * pool.size)])
        return int(np.argmax(self.tilde_mu + ucb_bonus(self.bonus, self.n, t)))

    def make_message(self) -> Message:
        if self.phase == BURN_IN:
            return Message(self.m, self.t, self.n.copy(), self.bar_mu.copy())
        return Message(self.m, self.t, self.n.copy(), self.bar_mu.copy(), self.N.copy(), self.tilde_mu.copy())

    def update_round(
        self, t: int, my_arm: int, my_reward: float, neighbor_ids: Sequence[int], messages: Mapping[int, Message]
    ) -> None:
        if self.phase != LEARNING:
            raise PhaseError("update_round called before burn-in finished")
        if t != self.t + 1:
            raise ClockError(f"expected round {self.t + 1}, got {t}")
        nbrs = set(neighbor_ids) - {self.m}
        if set(messages) != nbrs:
            raise ValueError("messages must come from exactly the round's neighbours")
        tilde_prev = self.tilde_mu
        self.observe(my_arm, my_reward)
        self.record_neighbors(sorted(nbrs), t, messages)

        N = self.n.copy()
        for j in sorted(nbrs):
            N = np.maximum(N, messages[j].N)
        self.N = N

        pw = (self.M - 1) / (self.M * self.M)
        pp = np.where(self.p_row > 0, pw, 0.0)
        sp = 0.0
        for j in range(self.M):
            sp = sp + pp[j]
        d = (1.0 - sp) / self.M
        self.weight_residual = abs(sp + d * self.M - 1.0)

        s1 = np.zeros(self.K)
        s2 = np.zeros(self.K)
        s3 = np.zeros(self.K)
        stale = 0
        for j in range(self.M):
            own = j == self.m
            s1 = s1 + pp[j] * (tilde_prev if own else self.hat_tilde[j])
            if own:
                s2 = s2 + (self.bar_mu if self.neighbor_term == "bar" else tilde_prev)
            elif j in nbrs:
                s2 = s2 + (self.hat_bar[j] if self.neighbor_term == "bar" else self.hat_tilde[j])
            else:
                s3 = s3 + self.hat_bar[j]
                stale += self.last_contact[j] == 0
        self.tilde_mu = s1 + d * s2 + d * s3
        self.stale_reads = int(stale)
        self.t = t

    # -- serialisation -----------------------------------------------------

    def snapshot(self) -> dict:
        """JSON-ready record with a fixed field order; floats as 17-digit strings."""
        f = lambda a: [format(float(x), ".17g") for x in np.ravel(a)]
        i = lambda a: [int(x) for x in np.ravel(a)]
        return {
            "m": self.m,
            "t": self.t,
            "phase": self.phase,
            "n": i(self.n),
            "N": i(self.N),
            "bar_mu": f(self.bar_mu),
            "tilde_mu": f(self.tilde_mu),
            "p_row": f(self.p_row),
            "last_contact": i(self.last_contact),
        }
