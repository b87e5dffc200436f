"""Diagnostics over simulation output: power-law fits, break-time detection,
saturation statistics and exponential-tail fits.

All operations are pure functions over immutable series; reruns on identical
input are bit-identical. Fits always report the exact data window they used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PROBABILITY_FLOOR = 1e-12


@dataclass
class ObservableSeries:
    """Strobed scalar observables on a strictly increasing tau grid."""

    tau: np.ndarray
    columns: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.tau = np.asarray(self.tau, dtype=float)
        if self.tau.ndim != 1:
            raise ValueError("tau must be one-dimensional")
        if len(self.tau) > 1 and not np.all(np.diff(self.tau) > 0):
            raise ValueError("tau must be strictly increasing")
        for name, col in self.columns.items():
            col = np.asarray(col, dtype=float)
            if col.shape != self.tau.shape:
                raise ValueError(f"column {name!r} length {col.shape} != tau {self.tau.shape}")
            self.columns[name] = col

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __contains__(self, name: str) -> bool:
        return name in self.columns


@dataclass
class DistributionSnapshot:
    """Probability mass on uniform bins (sums to one)."""

    coords: np.ndarray       # bin centers
    prob: np.ndarray         # probability mass per bin
    kind: str = "position"   # "position" or "momentum"
    tau: float | None = None

    def __post_init__(self) -> None:
        self.coords = np.asarray(self.coords, dtype=float)
        self.prob = np.asarray(self.prob, dtype=float)
        if self.coords.shape != self.prob.shape:
            raise ValueError("coords and prob must have identical shape")

    @property
    def bin_width(self) -> float:
        return float(self.coords[1] - self.coords[0]) if len(self.coords) > 1 else 1.0

    def std(self) -> float:
        m = float(np.sum(self.coords * self.prob))
        return float(np.sqrt(max(np.sum(self.coords**2 * self.prob) - m * m, 0.0)))


@dataclass(frozen=True)
class FitResult:
    estimate: float
    stderr: float
    window: tuple[float, float]
    r_squared: float

    def __post_init__(self) -> None:
        if not (np.isnan(self.r_squared) or 0.0 <= self.r_squared <= 1.0 + 1e-12):
            raise ValueError(f"r_squared out of range: {self.r_squared}")


@dataclass(frozen=True)
class SaturationStats:
    mean: float
    relative_sigma: float
    residual_slope: float    # fitted linear slope divided by the mean
    slope: float             # raw fitted linear slope, per unit tau
    window: tuple[float, float]


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    """Least-squares line y = a*x + b; returns (a, b, stderr_a, r_squared)."""
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    if sxx == 0.0:
        raise ValueError("degenerate fit window: all abscissae equal")
    a = float(np.sum((x - xm) * (y - ym)) / sxx)
    b = float(ym - a * xm)
    resid = y - (a * x + b)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    stderr = float(np.sqrt(ss_res / ((n - 2) * sxx))) if n > 2 else 0.0
    return a, b, stderr, r2


def fit_power_law(series: ObservableSeries, column: str,
                  window: tuple[float, float] | None = None) -> FitResult:
    """Fit column ~ tau^alpha by least squares on log-log axes.

    The default window is [10, tau_end], skipping the initial transient.
    tau = 0 is always excluded; nonpositive column values in the window are
    rejected. Scale-equivariant: rescaling the column shifts only the
    intercept.
    """
    vals = series[column]
    tau = series.tau
    if window is None:
        window = (10.0, float(tau[-1]))
    lo, hi = window
    mask = (tau >= lo) & (tau <= hi) & (tau > 0.0)
    if np.any(vals[mask] <= 0.0):
        raise ValueError(f"nonpositive values of {column!r} inside fit window")
    if mask.sum() < 10:
        raise ValueError(f"fit window contains {int(mask.sum())} points, need >= 10")
    lt = np.log(tau[mask])
    lv = np.log(vals[mask])
    alpha, _, stderr, r2 = _linear_fit(lt, lv)
    used = (float(tau[mask][0]), float(tau[mask][-1]))
    return FitResult(estimate=alpha, stderr=stderr, window=used, r_squared=r2)


def detect_break_time(quantum: ObservableSeries, classical: ObservableSeries,
                      threshold: float = 0.10, sustain: int = 20,
                      column: str = "dP") -> float | None:
    """First tau where the classical dispersion exceeds the quantum one by
    `threshold` (relative) and stays above for `sustain` consecutive strobes.

    Returns None when the gap never opens. Monotone in threshold: a larger
    threshold never yields an earlier break time.
    """
    if not np.array_equal(quantum.tau, classical.tau):
        raise ValueError("tau grids are not aligned")
    q = quantum[column]
    c = classical[column]
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = np.where(c != 0.0, (c - q) / c, 0.0)
    above = gap > threshold
    run = 0
    for i, flag in enumerate(above):
        run = run + 1 if flag else 0
        if run >= sustain:
            return float(quantum.tau[i - sustain + 1])
    return None


def saturation_stats(series: ObservableSeries, column: str,
                     tail_fraction: float = 0.5) -> SaturationStats:
    """Mean, relative sigma and normalized residual slope over the tail window.

    The tail window covers the last `tail_fraction` of the tau span and must
    contain at least 20 points. residual_slope ~ 0 indicates saturation.
    """
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    tau = series.tau
    vals = series[column]
    t_lo = tau[-1] - tail_fraction * (tau[-1] - tau[0])
    mask = tau >= t_lo
    if mask.sum() < 20:
        raise ValueError(f"tail window contains {int(mask.sum())} points, need >= 20")
    t = tau[mask]
    v = vals[mask]
    slope, _, _, _ = _linear_fit(t, v)
    mean = float(v.mean())
    rel_sigma = float(v.std() / abs(mean)) if mean != 0.0 else float("inf")
    resid_slope = slope / abs(mean) if mean != 0.0 else float("inf")
    return SaturationStats(mean=mean, relative_sigma=rel_sigma,
                           residual_slope=float(resid_slope), slope=float(slope),
                           window=(float(t[0]), float(t[-1])))


def fit_exponential_tail(dist: DistributionSnapshot,
                         region: tuple[float, float]) -> FitResult:
    """Fit log(probability) linearly against the coordinate over `region`.

    Requires at least 8 bins above the probability floor. The slope sign
    reports the decay direction as-is: an outward-decaying right tail fits
    negative, a left tail positive. R-squared is reported honestly so a
    non-exponential profile shows up as a poor fit.
    """
    lo, hi = region
    if hi <= lo:
        raise ValueError(f"empty region {region}")
    mask = (dist.coords >= lo) & (dist.coords <= hi) & (dist.prob > PROBABILITY_FLOOR)
    if mask.sum() < 8:
        raise ValueError(
            f"insufficient support: {int(mask.sum())} bins above floor in region, need >= 8")
    x = dist.coords[mask]
    y = np.log(dist.prob[mask])
    slope, _, stderr, r2 = _linear_fit(x, y)
    return FitResult(estimate=slope, stderr=stderr,
                     window=(float(x[0]), float(x[-1])), r_squared=r2)


def classical_tail_region(dist: DistributionSnapshot, side: str = "right",
                          quantile: float = 0.95) -> tuple[float, float]:
    """Coordinate interval outside the bulk of a classical distribution.

    The inner edge sits at the requested quantile of |coordinate| mass; the
    outer edge is the last bin. Operationalizes "away from the classical
    resonances" for tail fits.
    """
    cdf = np.cumsum(dist.prob)
    cdf /= cdf[-1]
    if side == "right":
        idx = int(np.searchsorted(cdf, quantile))
        idx = min(idx, len(dist.coords) - 1)
        return (float(dist.coords[idx]), float(dist.coords[-1]))
    if side == "left":
        idx = int(np.searchsorted(cdf, 1.0 - quantile))
        return (float(dist.coords[0]), float(dist.coords[idx]))
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")
