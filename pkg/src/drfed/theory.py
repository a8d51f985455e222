"""Closed-form constants and bounds from the regret analysis.

These are advisory numbers: most depend on quantities that cannot be observed
in a run (the walk's spectral gap ``lam``, its contraction constant
``p_star``, the staleness constant ``c0``).  Simulations take ``L`` and the
UCB constants from their configuration.
"""

from __future__ import annotations

import math

SETTINGS = ("s1", "s2", "s3")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _frequency_term(T: float, delta: float, epsilon: float) -> float:
    _require(T > 0 and 0 < epsilon and delta > 0, "need T > 0, epsilon > 0, delta > 0")
    _require(T / (2 * epsilon) > 0, "log domain")
    return math.log(T / (2 * epsilon)) / (2 * delta**2)


def _mixing_term(T, delta, epsilon, lam, p_star) -> float:
    _require(lam is not None and p_star is not None, "settings s2/s3 need lam and p_star")
    _require(0 < lam < 1 and 0 < p_star < 1, "need 0 < lam, p_star < 1")
    _require(0 < delta < 10, "log(delta / 10) needs 0 < delta < 10")
    return math.log(delta / 10) / math.log(p_star) + 25 * (1 + lam) / (1 - lam) * _frequency_term(T, delta, epsilon)


def burn_in_length_bound(
    setting: str,
    T: float,
    K: int,
    delta: float,
    epsilon: float,
    c0: float,
    lam: float | None = None,
    p_star: float | None = None,
    M: int | None = None,
) -> float:
    """Advisory burn-in length for setting ``s1`` (E-R), ``s2`` or ``s3`` (uniform)."""
    _require(setting in SETTINGS, f"unknown setting {setting!r}")
    _require(c0 > 0 and T > 1 and K >= 1, "need c0 > 0, T > 1, K >= 1")
    pulls = 4 * K * math.log2(T) / c0
    if setting == "s1":
        return max(_frequency_term(T, delta, epsilon), pulls)
    first = _mixing_term(T, delta, epsilon, lam, p_star)
    if setting == "s2":
        return max(first, pulls)
    _require(M is not None and M >= 2, "setting s3 needs M >= 2")
    q = 2 * math.log(M) / (M - 1)
    _require(q < 1, f"2 ln M / (M - 1) = {q:.4f} >= 1, the s3 term is undefined")
    _require(M * T / epsilon > 1, "log domain")
    return max(first, K * math.log(M * T / epsilon) / (c0 * math.log(1 / (1 - q))))


def c1_constant(sigma: float, M: int) -> float:
    """Theory value of the sub-Gaussian UCB constant, ``8 sigma^2 * 12 M (M+2) / M^4``."""
    _require(sigma > 0 and M >= 1, "need sigma > 0 and M >= 1")
    return 8 * sigma**2 * 12 * M * (M + 2) / M**4


def event_probability_lower_bound(epsilon: float) -> float:
    """Lower bound ``1 - 7 epsilon`` on the probability of the good event."""
    return 1 - 7 * epsilon


def er_density_threshold(epsilon: float, M: int, T: float) -> float:
    """Smallest E-R edge probability covered by the E-R regret guarantee."""
    _require(M >= 2 and T > 0 and epsilon > 0, "need M >= 2, T > 0, epsilon > 0")
    return 0.5 + 0.5 * math.sqrt(1 - (epsilon / (M * T)) ** (2 / (M - 1)))


def delta_ceiling(setting: str, epsilon: float, M: int, T: float) -> float:
    """Upper limit on ``delta`` for which the regret guarantees are stated."""
    if setting == "s1":
        return 0.5 + 0.25 * math.sqrt(1 - (epsilon / (M * T)) ** (2 / (M - 1)))
    if setting == "s2":
        return 0.5
    if setting == "s3":
        return 0.5 * 2 * math.log(M) / (M - 1)
    raise ValueError(f"unknown setting {setting!r}")


def spectral_gap_lower_bound(p_star: float) -> float:
    """Lower bound on ``1 - lam`` in terms of the walk constant ``p_star`` (> 1/2)."""
    _require(0.5 < p_star < 1, "need 1/2 < p_star < 1")
    return 1 / (2 * math.log(2) / math.log(2 * p_star) * math.log(4) + 1)


def regret_bound_sub_gaussian(L: float, gaps, C1: float, T: float, K: int, M: int, prob_A: float) -> float:
    """Instance-dependent bound on ``E[R_T | A]`` with the ``sqrt(C1 ln t / n)`` bonus."""
    total = L
    for g in gaps:
        if g <= 0:
            continue
        total += max(math.ceil(4 * C1 * math.log(T) / g**2), 2 * (K**2 + M * K))
        total += 2 * math.pi**2 / (3 * prob_A) + K**2 + (2 * M - 1) * K
    return total


def regret_bound_sub_exponential(
    L: float, gaps, C1: float, C2: float, T: float, K: int, M: int, prob_A: float
) -> float:
    """Instance-dependent bound on ``E[R_T | A]`` with the sub-exponential bonus."""
    _require(C2 >= 1.5 * C1, "need C2 / C1 >= 3/2")
    total = L
    lt = math.log(T)
    for g in gaps:
        if g <= 0:
            continue
        n = max(math.ceil(16 * C1 * lt / g**2), math.ceil(4 * C2 * lt / g), 2 * (K**2 + M * K))
        total += (g + 1) * (n + 4 / (prob_A * T**3) + K**2 + (2 * M - 1) * K)
    return total


def gap_free_regret_bound(L: float, C1: float, C2: float, T: float, K: int, M: int, prob_A: float) -> float:
    """Mean-gap independent bound on ``E[R_T | A]``, of order ``sqrt(T) ln T``."""
    lt = math.log(T)
    L1 = max(L, K * 2 * (K**2 + M * K))
    return (
        L1
        + 4 / (prob_A * T**3)
        + (math.sqrt(max(C1, C2) * lt) + 1) * 4 * M / (prob_A * T**3)
        + K * (C2 * lt**2 + C2 * lt + math.sqrt(C1 * lt) * math.sqrt(T * (lt + 1)))
    )
