"""Multi-run aggregation, growth-shape fits and sweep tables."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import integrate, stats

Z95 = 1.96

# claimed direction of final regret as each parameter grows
SWEEP_DIRECTIONS = {"h": "increasing", "K": "increasing", "c": "decreasing", "M": None, "L": None, "T": None}


@dataclass(frozen=True)
class AggregateSeries:
    t: np.ndarray
    mean: np.ndarray
    half_width: np.ndarray
    runs: int

    @property
    def ci_lo(self) -> np.ndarray:
        return self.mean - self.half_width

    @property
    def ci_hi(self) -> np.ndarray:
        return self.mean + self.half_width

    @property
    def final(self) -> tuple[float, float]:
        return float(self.mean[-1]), float(self.half_width[-1])


def _curves(items, field: str) -> np.ndarray:
    rows = []
    for x in items:
        rows.append(np.asarray(getattr(x, field) if hasattr(x, field) else x, dtype=float))
    if not rows:
        raise ValueError("need at least one run")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise ValueError(f"runs have different time grids: lengths {sorted(lengths)}")
    return np.vstack(rows)


def aggregate(trajectories: Sequence, field: str = "regret", t=None) -> AggregateSeries:
    """Pointwise mean and normal-approximation 95% half-width over runs.

    Accepts trajectories (reads ``field``) or plain equal-length arrays.  The
    half-width is ``1.96 * std / sqrt(n)`` with the sample standard deviation;
    it is NaN for a single run.  Runs are sorted per time point first, so the
    result does not depend on their order.
    """
    X = np.sort(_curves(trajectories, field), axis=0)
    n = X.shape[0]
    mean = X.mean(axis=0)
    if n >= 2:
        hw = Z95 * X.std(axis=0, ddof=1) / math.sqrt(n)
    else:
        hw = np.full(X.shape[1], np.nan)
    grid = np.arange(1, X.shape[1] + 1) if t is None else np.asarray(t)
    if len(grid) != X.shape[1]:
        raise ValueError("time grid does not match the series length")
    return AggregateSeries(grid, mean, hw, n)


@dataclass(frozen=True)
class LogFit:
    slope: float
    intercept: float
    r_squared: float

    def __iter__(self):
        return iter((self.slope, self.intercept, self.r_squared))


def fit_log_regret(series, t_min: float = 1, values=None) -> LogFit:
    """Least-squares fit of ``R_t = slope * ln t + intercept`` over ``t >= t_min``.

    ``series`` is an :class:`AggregateSeries`, or a time grid with ``values``.
    """
    if isinstance(series, AggregateSeries):
        t, y = series.t, series.mean
    else:
        t, y = np.asarray(series, dtype=float), np.asarray(values, dtype=float)
    keep = t >= t_min
    t, y = np.asarray(t[keep], dtype=float), y[keep]
    if len(t) < 10:
        raise ValueError(f"need at least 10 points with t >= {t_min}, got {len(t)}")
    if np.ptp(y) == 0:
        raise ValueError("degenerate (constant) series")
    res = stats.linregress(np.log(t), y)
    return LogFit(float(res.slope), float(res.intercept), float(res.rvalue**2))


def tail_exceedance(samples, bound_fn: Callable) -> float:
    """Fraction of ``(deviation, n, t)`` samples whose deviation exceeds ``bound_fn(n, t)``."""
    arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=float)
    if arr.size == 0:
        return 0.0
    arr = arr.reshape(-1, 3)
    dev, n, t = arr[:, 0], arr[:, 1], arr[:, 2]
    bound = np.broadcast_to(np.asarray(bound_fn(n, t), dtype=float), dev.shape)
    return float(np.mean(dev > bound))


def auc(series: AggregateSeries) -> float:
    """Area under the mean regret curve (trapezoid rule on the time grid)."""
    return float(integrate.trapezoid(series.mean, series.t))


@dataclass(frozen=True)
class SweepRow:
    value: float
    mean: float
    half_width: float


@dataclass(frozen=True)
class SweepTable:
    param: str
    rows: tuple[SweepRow, ...]
    direction: str | None
    verdict: bool | None
    worst_excess: float

    def to_text(self) -> str:
        lines = [f"{self.param:>8}  {'final_mean':>12}  {'ci_half':>10}"]
        for r in self.rows:
            lines.append(f"{r.value:>8g}  {r.mean:>12.4f}  {r.half_width:>10.4f}")
        if self.verdict is None:
            lines.append("direction: none asserted" if len(self.rows) > 1 else "single value: no verdict")
        else:
            lines.append(f"direction {self.direction}: {'consistent' if self.verdict else 'VIOLATED'} "
                         f"(worst excess over slack {self.worst_excess:.4f})")
        return "\n".join(lines)


def _final_stats(v) -> tuple[float, float]:
    if isinstance(v, AggregateSeries):
        return v.final
    if isinstance(v, tuple) and len(v) == 2:
        return float(v[0]), float(v[1])
    arr = np.sort(np.asarray([x.regret[-1] if hasattr(x, "regret") else x for x in v], dtype=float))
    hw = Z95 * arr.std(ddof=1) / math.sqrt(len(arr)) if len(arr) > 1 else float("nan")
    return float(arr.mean()), float(hw)


def sweep_summary(results: Mapping, param: str, direction: str | None = "auto") -> SweepTable:
    """Order sweep results by parameter value and check the claimed direction.

    ``results`` maps each value to an :class:`AggregateSeries`, a
    ``(mean, half_width)`` pair, or a list of final regrets / trajectories.
    A step against the direction is tolerated up to the pooled half-width
    ``sqrt((h_a^2 + h_b^2) / 2)`` of the two neighbouring points.
    """
    if direction == "auto":
        direction = SWEEP_DIRECTIONS.get(param)
    if direction not in (None, "increasing", "decreasing"):
        raise ValueError(f"unknown direction {direction!r}")
    rows = tuple(SweepRow(float(k), *_final_stats(results[k])) for k in sorted(results))
    if direction is None or len(rows) < 2:
        return SweepTable(param, rows, direction, None, float("nan"))
    sign = 1.0 if direction == "increasing" else -1.0
    worst = -math.inf
    for a, b in zip(rows, rows[1:]):
        drop = sign * (a.mean - b.mean)
        slack = math.sqrt((a.half_width**2 + b.half_width**2) / 2)
        if math.isnan(slack):
            slack = 0.0
        worst = max(worst, drop - slack)
    return SweepTable(param, rows, direction, worst <= 0.0, worst)


def tidy_csv(series_by_param: Mapping[str, AggregateSeries] | Iterable[tuple[str, AggregateSeries]], stride: int = 1) -> str:
    """Long-format CSV with columns ``param, t, mean, ci_lo, ci_hi``."""
    items = series_by_param.items() if isinstance(series_by_param, Mapping) else series_by_param
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["param", "t", "mean", "ci_lo", "ci_hi"])
    g = lambda x: "" if math.isnan(x) else format(float(x), ".17g")
    for name, s in items:
        idx = list(range(0, len(s.t), stride))
        if idx[-1] != len(s.t) - 1:
            idx.append(len(s.t) - 1)
        for i in idx:
            w.writerow([name, int(s.t[i]), g(s.mean[i]), g(s.ci_lo[i]), g(s.ci_hi[i])])
    return buf.getvalue()


def gnuplot_script(csv_name: str, params: Sequence[str], output: str = "regret.png", title: str = "mean cumulative regret") -> str:
    """Script plotting each parameter's mean curve with its CI band from a tidy CSV."""
    lines = [
        "set datafile separator ','",
        "set key left top",
        f"set title '{title}'",
        "set xlabel 't'",
        "set ylabel 'cumulative regret'",
        "set terminal pngcairo size 900,600",
        f"set output '{output}'",
    ]
    plots = []
    for p in params:
        sel = f"(strcol(1) eq '{p}' ? $2 : NaN)"
        plots.append(f"'{csv_name}' skip 1 using {sel}:4:5 with filledcurves notitle fs transparent solid 0.2")
        plots.append(f"'{csv_name}' skip 1 using {sel}:3 with lines title '{p}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"
