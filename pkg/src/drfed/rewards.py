"""Heterogeneous per-client reward distributions on [0, 1].

Every family is sampled by inverse-CDF from a single uniform so each draw
consumes exactly one number from the client's reward stream:

* ``bernoulli``: 1 with probability ``mu`` else 0.
* ``truncated_gaussian``: ``N(loc, sigma^2)`` conditioned on [0, 1]; ``loc``
  is calibrated per cell so the conditioned mean equals ``mu``.
* ``truncated_shifted_exponential``: ``s + Exp(scale a)`` conditioned on
  [0, 1]; the shift ``s`` (and, for means below the family's floor, a smaller
  scale ``a <= alpha``) is calibrated so the conditioned mean equals ``mu``.
* ``deterministic``: always ``mu`` (the uniform is still consumed); useful
  for exact fixed-point checks.

Conditioning a draw on [0, 1] via the inverse CDF yields the same law as
resampling until the draw lands in [0, 1].
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special, stats

from .errors import CalibrationError

SUB_GAUSSIAN = "sub_gaussian"
SUB_EXPONENTIAL = "sub_exponential"
REGIMES = (SUB_GAUSSIAN, SUB_EXPONENTIAL)

BERNOULLI = "bernoulli"
TRUNCATED_GAUSSIAN = "truncated_gaussian"
TRUNCATED_EXPONENTIAL = "truncated_shifted_exponential"
DETERMINISTIC = "deterministic"
FAMILIES = (BERNOULLI, TRUNCATED_GAUSSIAN, TRUNCATED_EXPONENTIAL, DETERMINISTIC)

CALIBRATION_TOL = 1e-6


@dataclass(frozen=True)
class MeanMatrix:
    """``M x K`` grid of client/arm means; ``h`` records the generator input."""

    means: np.ndarray
    h: float | None = None

    def __post_init__(self):
        a = np.array(self.means, dtype=float)
        if a.ndim != 2 or a.size == 0:
            raise ValueError("means must be a non-empty M x K matrix")
        if np.any(a < 0.0) or np.any(a > 1.0) or not np.all(np.isfinite(a)):
            raise ValueError("every mean must lie in [0, 1]")
        a.setflags(write=False)
        object.__setattr__(self, "means", a)

    @property
    def M(self) -> int:
        return self.means.shape[0]

    @property
    def K(self) -> int:
        return self.means.shape[1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in self.means:
            w.writerow([format(float(x), ".17g") for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, h: float | None = None) -> "MeanMatrix":
        rows = [list(map(float, r)) for r in csv.reader(io.StringIO(text)) if r]
        return cls(np.array(rows), h)


def build_heterogeneous_means(M: int, K: int, h: float, base: float = 0.1, layout: str = "aligned") -> MeanMatrix:
    """Appendix-style heterogeneous means.

    Arm ``k`` (0-based) spans ``[base, base + (k+1) h / K]``; that range is cut
    into ``M`` equal intervals and client ``m`` receives the midpoint of the
    ``m``-th one.  With ``layout="alternating"`` odd arms hand the intervals
    out in reverse client order, so some clients' local best arm differs from
    the global best.
    """
    if M < 1 or K < 1:
        raise ValueError("M and K must be positive")
    if h < 0:
        raise ValueError("heterogeneity h must be non-negative")
    if base < 0 or base + h > 1.0 + 1e-15:
        raise ValueError(f"range overflow: base + h = {base + h} exceeds 1")
    if layout not in ("aligned", "alternating"):
        raise ValueError(f"unknown layout {layout!r}")
    means = np.empty((M, K))
    for k in range(K):
        width = (k + 1) * h / K / M
        col = base + (np.arange(M) + 0.5) * width
        if layout == "alternating" and k % 2 == 1:
            col = col[::-1]
        means[:, k] = col
    return MeanMatrix(means, h)


@dataclass(frozen=True)
class GlobalStats:
    global_means: np.ndarray
    optimal_arm: int
    gaps: np.ndarray


def global_stats(means: MeanMatrix | np.ndarray) -> GlobalStats:
    """Client-averaged means, best arm (lowest index on ties) and gaps."""
    a = means.means if isinstance(means, MeanMatrix) else np.asarray(means, dtype=float)
    mu = a.mean(axis=0)
    best = int(np.argmax(mu))
    return GlobalStats(mu, best, mu[best] - mu)


# -- truncated Gaussian ------------------------------------------------------


def _truncnorm_mean(loc: float, sigma: float) -> float:
    a, b = (0.0 - loc) / sigma, (1.0 - loc) / sigma
    return float(stats.truncnorm.mean(a, b, loc=loc, scale=sigma))


def calibrate_truncated_gaussian(mu: float, sigma: float) -> float:
    """Location whose [0, 1]-conditioned Gaussian has mean ``mu``."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if not 0.0 < mu < 1.0:
        raise CalibrationError(f"a truncated Gaussian cannot have mean {mu} on [0, 1]")
    if abs(mu - 0.5) < 1e-15:
        return 0.5
    f = lambda loc: _truncnorm_mean(loc, sigma) - mu
    lo, hi = -1.0, 2.0
    while f(lo) > 0:
        lo = 2 * lo - 1
        if lo < -1e6:
            raise CalibrationError(f"cannot bracket location for mean {mu}")
    while f(hi) < 0:
        hi = 2 * hi
        if hi > 1e6:
            raise CalibrationError(f"cannot bracket location for mean {mu}")
    loc = optimize.brentq(f, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=500)
    if abs(f(loc)) > CALIBRATION_TOL:
        raise CalibrationError(f"truncated Gaussian calibration missed mean {mu}")
    return loc


def truncated_gaussian_ppf(u, loc, sigma):
    """Inverse CDF of ``N(loc, sigma^2)`` conditioned on [0, 1]."""
    u, loc, sigma = np.broadcast_arrays(*map(np.asarray, (u, loc, sigma)))
    shape = u.shape
    u, loc, sigma = (np.atleast_1d(v).ravel() for v in (u, loc, sigma))
    a = (0.0 - loc) / sigma
    b = (1.0 - loc) / sigma
    out = np.empty(u.shape)
    upper = a > 0.0
    # upper tail: work with survival probabilities to avoid cancellation
    sa, sb = special.ndtr(-a[upper]), special.ndtr(-b[upper])
    out[upper] = loc[upper] - sigma[upper] * special.ndtri(sa - u[upper] * (sa - sb))
    low = ~upper
    pa, pb = special.ndtr(a[low]), special.ndtr(b[low])
    out[low] = loc[low] + sigma[low] * special.ndtri(pa + u[low] * (pb - pa))
    return np.clip(out, 0.0, 1.0).reshape(shape)


# -- truncated shifted exponential -------------------------------------------


def _texp_mean(shift: float, scale: float) -> float:
    """Mean of ``shift + Exp(scale)`` conditioned on [0, 1], for shift in [0, 1)."""
    w = (1.0 - shift) / scale
    # mean of Exp(scale) truncated to [0, 1 - shift]
    return shift + scale - (1.0 - shift) / math.expm1(w) if w < 700 else shift + scale


def exponential_mean_floor(alpha: float) -> float:
    """Smallest mean reachable with scale ``alpha`` (shift <= 0)."""
    return _texp_mean(0.0, alpha)


def calibrate_truncated_exponential(mu: float, alpha: float) -> tuple[float, float]:
    """``(shift, scale)`` whose [0, 1]-conditioned law has mean ``mu``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if not 0.0 < mu < 1.0:
        raise CalibrationError(f"a truncated exponential cannot have mean {mu} on [0, 1]")
    floor = exponential_mean_floor(alpha)
    if mu >= floor:
        if mu - floor <= CALIBRATION_TOL / 10:
            return 0.0, alpha
        shift = optimize.brentq(lambda s: _texp_mean(s, alpha) - mu, 0.0, 1.0 - 1e-12, xtol=1e-15, rtol=1e-15, maxiter=500)
        scale = alpha
    else:
        if mu <= _texp_mean(0.0, 1e-6):
            raise CalibrationError(f"mean {mu} is below the smallest reachable truncated exponential mean")
        shift = 0.0
        scale = optimize.brentq(lambda a: _texp_mean(0.0, a) - mu, 1e-6, alpha, xtol=1e-15, rtol=1e-15, maxiter=500)
    if abs(_texp_mean(shift, scale) - mu) > CALIBRATION_TOL:
        raise CalibrationError(f"truncated exponential calibration missed mean {mu}")
    return shift, scale


def truncated_exponential_ppf(u, shift, scale):
    """Inverse CDF of ``shift + Exp(scale)`` conditioned on [shift, 1]."""
    u, shift, scale = np.broadcast_arrays(*map(np.asarray, (u, shift, scale)))
    x = shift - scale * special.log1p(u * special.expm1(-(1.0 - shift) / scale))
    return np.clip(x, 0.0, 1.0)


@dataclass(frozen=True)
class RewardModel:
    """Immutable reward environment; sampling needs a caller-owned stream."""

    means: MeanMatrix
    family: str = BERNOULLI
    regime: str = SUB_GAUSSIAN
    sigma: float = 0.1
    alpha: float = 0.1
    params: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown reward family {self.family!r}")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown reward regime {self.regime!r}")
        mu = self.means.means
        if self.family == TRUNCATED_GAUSSIAN:
            loc = np.vectorize(lambda x: calibrate_truncated_gaussian(x, self.sigma))(mu)
            p = (loc, np.full(mu.shape, float(self.sigma)))
        elif self.family == TRUNCATED_EXPONENTIAL:
            pairs = [[calibrate_truncated_exponential(x, self.alpha) for x in row] for row in mu]
            arr = np.array(pairs, dtype=float).reshape(mu.shape + (2,))
            p = (arr[..., 0], arr[..., 1])
        else:
            p = (mu, mu)
        object.__setattr__(self, "params", p)

    @property
    def M(self) -> int:
        return self.means.M

    @property
    def K(self) -> int:
        return self.means.K

    def from_uniform(self, clients, arms, u) -> np.ndarray:
        """Rewards of ``(clients, arms)`` cells obtained from uniforms ``u``."""
        p0 = self.params[0][clients, arms]
        p1 = self.params[1][clients, arms]
        u = np.asarray(u, dtype=float)
        if self.family == BERNOULLI:
            return np.where(u < p0, 1.0, 0.0)
        if self.family == DETERMINISTIC:
            return np.broadcast_to(p0, u.shape).astype(float)
        if self.family == TRUNCATED_GAUSSIAN:
            return truncated_gaussian_ppf(u, p0, p1)
        return truncated_exponential_ppf(u, p0, p1)

    def sample(self, m: int, i: int, rng: np.random.Generator, size: int | None = None):
        """Reward(s) of client ``m`` pulling arm ``i``."""
        if not (0 <= m < self.M and 0 <= i < self.K):
            raise IndexError(f"no cell ({m}, {i}) in a {self.M} x {self.K} model")
        u = rng.random(size)
        r = self.from_uniform(m, i, u)
        return float(r) if size is None else r
