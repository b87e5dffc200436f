"""Classical ensemble dynamics under the effective driven potential.

Trajectories evolve with a drift-kick-drift leapfrog whose kick samples the
time-dependent force at the half-step midpoint, keeping the scheme second
order for driven potentials. Sampling uses the counter-based Philox
generator, so ensembles are reproducible from (kind, n, seed) alone and
independent trajectories can be partitioned across workers without touching
each other's stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .analysis import DistributionSnapshot, ObservableSeries
from .potential import DRIVE_PERIOD, EffectivePotential


class NumericalAbortError(RuntimeError):
    """Propagation hit a non-finite state or a monitor tripped."""

    def __init__(self, message: str, trajectory_index: int | None = None):
        super().__init__(message)
        self.trajectory_index = trajectory_index


@dataclass
class ClassicalEnsemble:
    """Phase-space points (X, P) at a common time tau, with RNG provenance."""

    X: np.ndarray
    P: np.ndarray
    tau: float = 0.0
    seed: int | None = None
    provenance: str = ""

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=float)
        self.P = np.asarray(self.P, dtype=float)
        if self.X.shape != self.P.shape or self.X.ndim != 1:
            raise ValueError("X and P must be equal-length 1-d arrays")
        if len(self.X) < 1:
            raise ValueError("ensemble must contain at least one trajectory")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.P))):
            raise ValueError("ensemble contains non-finite entries")

    def __len__(self) -> int:
        return len(self.X)

    def copy(self) -> "ClassicalEnsemble":
        return ClassicalEnsemble(self.X.copy(), self.P.copy(), self.tau,
                                 self.seed, self.provenance)


def sample_ensemble(kind: str, n: int, seed: int, *,
                    bounds: tuple[float, float] = (-4.0, 4.0),
                    mean: tuple[float, float] = (0.0, 0.0),
                    sigma_x: float | None = None,
                    sigma_p: float | None = None) -> ClassicalEnsemble:
    """Draw an initial ensemble; deterministic in (kind, n, seed).

    kind "uniform-square" fills [lo, hi]^2 in phase space; kind "gaussian"
    draws independent normals (X first, then P) so the ensemble can be
    matched to a minimum-uncertainty wave packet.
    """
    if n < 1:
        raise ValueError(f"ensemble size must be >= 1, got {n}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    if kind == "uniform-square":
        lo, hi = bounds
        if hi <= lo:
            raise ValueError(f"bounds must be ordered, got {bounds}")
        X = rng.uniform(lo, hi, n)
        P = rng.uniform(lo, hi, n)
        prov = f"uniform-square[{lo},{hi}] n={n} seed={seed}"
    elif kind == "gaussian":
        if sigma_x is None or sigma_p is None:
            raise ValueError("gaussian sampling needs sigma_x and sigma_p")
        X = mean[0] + sigma_x * rng.standard_normal(n)
        P = mean[1] + sigma_p * rng.standard_normal(n)
        prov = (f"gaussian mean={mean} sigma=({sigma_x:g},{sigma_p:g}) "
                f"n={n} seed={seed}")
    else:
        raise ValueError(f"unknown sampling kind {kind!r}")
    return ClassicalEnsemble(X, P, 0.0, seed, prov)


def matched_gaussian(n: int, seed: int, kbar: float,
                     mean: tuple[float, float] = (0.0, 0.0)) -> ClassicalEnsemble:
    """Gaussian ensemble with the same dX, dP as the minimum-uncertainty
    packet at this kbar, so classical/quantum runs share initial conditions."""
    sigma = math.sqrt(kbar / 2.0)
    return sample_ensemble("gaussian", n, seed, mean=mean,
                           sigma_x=sigma, sigma_p=sigma)


def step(ens: ClassicalEnsemble, potential: EffectivePotential,
         dtau: float) -> ClassicalEnsemble:
    """One leapfrog step (drift dtau/2, kick at the midpoint time, drift).

    dtau may be negative, which exactly inverts the corresponding forward
    step; this is what the time-reversal checks rely on.
    """
    half = 0.5 * dtau
    ens.X += half * ens.P
    ens.P += dtau * potential.force(ens.X, ens.tau + half)
    ens.X += half * ens.P
    ens.tau += dtau
    bad = ~(np.isfinite(ens.X) & np.isfinite(ens.P))
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise NumericalAbortError(f"non-finite state in trajectory {idx}", idx)
    return ens


def evolve(ens: ClassicalEnsemble, potential: EffectivePotential,
           tau_final: float, dtau: float, record_every: int | None = None,
           observers: tuple = ()) -> ObservableSeries:
    """Propagate in place to tau_final, recording observables at a stride.

    record_every counts steps between recordings (default: record only the
    initial and final states). Observers are called as observer(ens, tau) at
    every recording; they must treat the ensemble as read-only.
    """
    if dtau <= 0.0:
        raise ValueError(f"dtau must be positive, got {dtau}")
    span = tau_final - ens.tau
    n_steps = int(round(span / dtau))
    if n_steps < 0 or abs(n_steps * dtau - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError(f"dtau {dtau} does not divide the span {span}")
    if record_every is None:
        record_every = max(n_steps, 1)

    tau0 = ens.tau
    X, P = ens.X, ens.P
    half = 0.5 * dtau
    taus: list[float] = []
    rows: dict[str, list[float]] = {k: [] for k in
                                    ("X_mean", "P_mean", "dX", "dP", "H_mean", "H0_mean")}

    def record(k: int) -> None:
        tau = tau0 + k * dtau
        bad = ~(np.isfinite(X) & np.isfinite(P))
        if np.any(bad):
            idx = int(np.argmax(bad))
            raise NumericalAbortError(f"non-finite state in trajectory {idx}", idx)
        H = potential.hamiltonian(X, P, tau)
        H0 = H - potential.drive_term(X, tau)
        taus.append(tau)
        rows["X_mean"].append(float(X.mean()))
        rows["P_mean"].append(float(P.mean()))
        rows["dX"].append(float(X.std()))
        rows["dP"].append(float(P.std()))
        rows["H_mean"].append(float(H.mean()))
        rows["H0_mean"].append(float(H0.mean()))
        ens.tau = tau
        for obs in observers:
            obs(ens, tau)

    record(0)
    for k in range(1, n_steps + 1):
        X += half * P
        P += dtau * potential.force(X, tau0 + (k - 1) * dtau + half)
        X += half * P
        if k % record_every == 0 or k == n_steps:
            record(k)
    ens.tau = tau0 + n_steps * dtau
    return ObservableSeries(
        tau=np.array(taus),
        columns={k: np.array(v) for k, v in rows.items()},
        metadata={"dtau": dtau, "n_steps": n_steps, "record_every": record_every,
                  "n_trajectories": len(ens), "seed": ens.seed,
                  "provenance": ens.provenance},
    )


@dataclass
class PoincareSection:
    """Phase-space points strobed once per drive period (stride pi/2)."""

    X: np.ndarray            # shape (n_periods, n_trajectories)
    P: np.ndarray
    n_periods: int
    stride: float = DRIVE_PERIOD
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.X.shape != self.P.shape or self.X.ndim != 2:
            raise ValueError("X and P must be (n_periods, n_trajectories) arrays")
        if self.X.shape[0] != self.n_periods:
            raise ValueError("row count must equal n_periods")

    @property
    def n_trajectories(self) -> int:
        return self.X.shape[1]

    def points(self) -> np.ndarray:
        """All strobe points as a flat (n_periods*n_traj, 2) array."""
        return np.column_stack([self.X.ravel(), self.P.ravel()])


def poincare(ens: ClassicalEnsemble, potential: EffectivePotential,
             n_periods: int, dtau: float) -> PoincareSection:
    """Strobe every trajectory at exact multiples of the drive period.

    dtau must divide pi/2 exactly (up to round-off); strobe times are
    computed as k*pi/2, not accumulated.
    """
    spp = round(DRIVE_PERIOD / dtau)
    if spp < 1 or abs(spp * dtau - DRIVE_PERIOD) > 1e-12 * DRIVE_PERIOD:
        raise ValueError(f"dtau {dtau} does not divide the drive period pi/2")
    n = len(ens)
    Xs = np.empty((n_periods, n))
    Ps = np.empty((n_periods, n))
    X, P = ens.X, ens.P
    half = 0.5 * dtau
    for k_period in range(n_periods):
        t_per = k_period * DRIVE_PERIOD
        for j in range(spp):
            X += half * P
            P += dtau * potential.force(X, t_per + j * dtau + half)
            X += half * P
        bad = ~(np.isfinite(X) & np.isfinite(P))
        if np.any(bad):
            idx = int(np.argmax(bad))
            raise NumericalAbortError(f"non-finite state in trajectory {idx}", idx)
        Xs[k_period] = X
        Ps[k_period] = P
    ens.tau += n_periods * DRIVE_PERIOD
    return PoincareSection(Xs, Ps, n_periods, seed=ens.seed)


def _nn_dimension(points: np.ndarray) -> float:
    """Point-cloud dimension from nearest-neighbor scaling under 2x subsampling.

    Mean NN distance scales as K**(-1/D) for K points filling a D-dimensional
    set, so halving K multiplies it by 2**(1/D): curves give ratio 2, areas
    sqrt(2).
    """
    K = len(points)
    ext = max(points[:, 0].std(), points[:, 1].std())
    if ext < 1e-9:
        return 0.0  # fixed point
    def mean_nn(pts: np.ndarray) -> float:
        d, _ = cKDTree(pts).query(pts, k=2)
        return float(d[:, 1].mean())
    d_full = mean_nn(points)
    d_half = mean_nn(points[::2])
    if d_full <= 0.0:
        return 0.0
    ratio = d_half / d_full
    if ratio <= 1.0:
        return 2.0
    return min(math.log(2.0) / math.log(ratio), 10.0)


def classify_section(section: PoincareSection, dim_threshold: float = 1.5,
                     escape_bound: float = 50.0) -> np.ndarray:
    """Label each trajectory 'regular' or 'chaotic' by strobe-point recurrence.

    Regular trajectories revisit a closed curve, so their strobe points have
    effective dimension near 1; chaotic ones scatter over an area (dimension
    near 2) or escape beyond escape_bound.
    """
    labels = []
    for i in range(section.n_trajectories):
        pts = np.column_stack([section.X[:, i], section.P[:, i]])
        if np.max(np.abs(pts)) > escape_bound:
            labels.append("chaotic")
            continue
        dim = _nn_dimension(pts)
        labels.append("regular" if dim < dim_threshold else "chaotic")
    return np.array(labels)


def dispersion(ens: ClassicalEnsemble) -> tuple[float, float]:
    """Population standard deviations (dX, dP); needs n >= 2."""
    if len(ens) < 2:
        raise ValueError("dispersion needs at least two trajectories")
    return float(ens.X.std()), float(ens.P.std())


def distribution(ens: ClassicalEnsemble, bins,
                 value_range: tuple[float, float] | None = None,
                 kind: str = "position") -> DistributionSnapshot:
    """Normalized histogram (probability mass summing to one) of X or P.

    `bins` is either a count (with `value_range`) or an explicit edge array.
    Trajectories outside the bins raise rather than silently dropping mass,
    since emitted rows are contracted to sum to one.
    """
    if kind == "position":
        data = ens.X
    elif kind == "momentum":
        data = ens.P
    else:
        raise ValueError(f"kind must be 'position' or 'momentum', got {kind!r}")
    counts, edges = np.histogram(data, bins=bins, range=value_range)
    total = int(counts.sum())
    if total != len(data):
        raise NumericalAbortError(
            f"{len(data) - total} trajectories left the {kind} histogram range "
            f"[{edges[0]:g}, {edges[-1]:g}]: widen the binning window")
    centers = 0.5 * (edges[:-1] + edges[1:])
    return DistributionSnapshot(coords=centers, prob=counts / total,
                                kind=kind, tau=ens.tau)


class HistogramRecorder:
    """Observer capturing per-strobe histograms of X or P on fixed bins.

    Feeds the space-time maps and the time-averaged classical distributions.
    """

    def __init__(self, bins, value_range: tuple[float, float] | None = None,
                 kind: str = "position"):
        self.bins = bins
        self.range = value_range
        self.kind = kind
        self.taus: list[float] = []
        self.rows: list[np.ndarray] = []

    def __call__(self, ens: ClassicalEnsemble, tau: float) -> None:
        snap = distribution(ens, self.bins, self.range, self.kind)
        self.taus.append(tau)
        self.rows.append(snap.prob)
        self._coords = snap.coords

    def matrix(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(taus, bin centers, rows-by-bins probability matrix)."""
        return np.array(self.taus), self._coords, np.array(self.rows)

    def time_average(self, last_fraction: float = 1.0) -> DistributionSnapshot:
        """Mean distribution over the trailing fraction of stored strobes."""
        if not self.rows:
            raise ValueError("no strobes recorded")
        k = max(1, int(round(last_fraction * len(self.rows))))
        avg = np.mean(self.rows[-k:], axis=0)
        return DistributionSnapshot(coords=self._coords, prob=avg, kind=self.kind)
