"""Wave-packet dynamics on a periodic spectral grid.

Propagation uses Strang splitting, exp(-i V dtau/2kbar) exp(-i K dtau/kbar)
exp(-i V dtau/2kbar), with the potential sampled at the midpoint time of each
slice; the kinetic phase acts on the momentum grid P_j = kbar * 2*pi*j/(n*dx)
with symmetric wrap. Each step is unitary to round-off. A norm monitor and a
box-edge density monitor abort propagation rather than let aliasing corrupt a
run silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import DistributionSnapshot, ObservableSeries
from .classical import NumericalAbortError
from .potential import EffectivePotential

NORM_STEP_TOLERANCE = 1e-8
EDGE_MASS_TOLERANCE = 1e-6
EDGE_FRACTION = 0.05


@dataclass(frozen=True)
class Grid:
    """Uniform periodic position grid with its paired momentum grid."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self) -> None:
        if self.x_max <= self.x_min:
            raise ValueError(f"x_max must exceed x_min, got [{self.x_min}, {self.x_max})")
        if self.n < 16 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def wavenumbers(self) -> np.ndarray:
        """FFT-ordered wavenumbers k_j = 2*pi*j/(n*dx), symmetric wrap."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def momenta(self, kbar: float) -> np.ndarray:
        """FFT-ordered momentum grid P_j = kbar * k_j."""
        return kbar * self.wavenumbers

    def dp(self, kbar: float) -> float:
        return kbar * 2.0 * np.pi / (self.n * self.dx)


@dataclass
class WavePacket:
    """Complex amplitudes on a Grid; norm sum |psi|^2 dx stays at one."""

    grid: Grid
    psi: np.ndarray
    tau: float = 0.0
    kbar: float = 1.0

    def __post_init__(self) -> None:
        self.psi = np.asarray(self.psi, dtype=complex)
        if self.psi.shape != (self.grid.n,):
            raise ValueError("psi length must match the grid")
        if not np.all(np.isfinite(self.psi.view(float))):
            raise ValueError("psi contains non-finite amplitudes")
        if self.kbar <= 0.0:
            raise ValueError(f"kbar must be positive, got {self.kbar}")
        nrm = self.norm()
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"packet norm {nrm} deviates from 1 beyond 1e-10")

    def norm(self) -> float:
        return float(np.vdot(self.psi, self.psi).real * self.grid.dx)

    def copy(self) -> "WavePacket":
        return WavePacket(self.grid, self.psi.copy(), self.tau, self.kbar)


def gaussian_packet(grid: Grid, x0: float, p0: float, dx_width: float,
                    kbar: float = 1.0) -> WavePacket:
    """Minimum-uncertainty Gaussian: dX*dP = kbar/2, mean (x0, p0).

    Rejects packets whose 5-sigma support leaves the box, which would wrap
    around the periodic boundary and alias.
    """
    if dx_width <= 0.0:
        raise ValueError(f"dx_width must be positive, got {dx_width}")
    if x0 - 5.0 * dx_width < grid.x_min or x0 + 5.0 * dx_width > grid.x_max:
        raise ValueError(
            f"packet support [{x0 - 5*dx_width:g}, {x0 + 5*dx_width:g}] "
            f"exceeds the box [{grid.x_min:g}, {grid.x_max:g})")
    x = grid.x
    psi = np.exp(-((x - x0) ** 2) / (4.0 * dx_width**2)
                 + 1j * p0 * (x - x0) / kbar)
    psi /= math.sqrt(np.vdot(psi, psi).real * grid.dx)
    return WavePacket(grid, psi, 0.0, kbar)


class SplitOperator:
    """Strang-splitting stepper with phases precomputed for a fixed dtau."""

    def __init__(self, potential: EffectivePotential, grid: Grid, kbar: float,
                 dtau: float):
        if dtau <= 0.0:
            raise ValueError(f"dtau must be positive, got {dtau}")
        self.potential = potential
        self.grid = grid
        self.kbar = kbar
        self.dtau = dtau
        x = grid.x
        self._x = x
        p = grid.momenta(kbar)
        self._kinetic = np.exp(-1j * (p**2 / 2.0) * dtau / kbar)
        v_static = potential.harmonic_term(x) + potential.trap_term(x)
        self._half_static = np.exp(-1j * v_static * dtau / (2.0 * kbar))
        self._drive_coeff = potential.params.lambda_eff * dtau / (2.0 * kbar)
        self._n_edge = max(1, int(grid.n * EDGE_FRACTION))

    def step(self, psi: np.ndarray, tau: float) -> np.ndarray:
        """One step from tau to tau + dtau; psi is consumed, a new array returns."""
        c = self._drive_coeff * math.cos(4.0 * (tau + 0.5 * self.dtau))
        half = self._half_static * np.exp(-1j * c * self._x)
        out = half * psi
        out = np.fft.ifft(self._kinetic * np.fft.fft(out))
        out *= half
        return out

    def edge_mass(self, psi: np.ndarray) -> float:
        """Probability mass in the outer 5% of cells at each box edge."""
        ne = self._n_edge
        dens = np.abs(psi[:ne]) ** 2, np.abs(psi[-ne:]) ** 2
        return float((dens[0].sum() + dens[1].sum()) * self.grid.dx)


def split_step(packet: WavePacket, potential: EffectivePotential,
               dtau: float) -> WavePacket:
    """Single Strang step; convenience wrapper around SplitOperator."""
    op = SplitOperator(potential, packet.grid, packet.kbar, dtau)
    psi = op.step(packet.psi, packet.tau)
    return WavePacket(packet.grid, psi, packet.tau + dtau, packet.kbar)


def momentum_representation(packet: WavePacket) -> tuple[np.ndarray, np.ndarray]:
    """Unitary transform to the momentum representation.

    Returns (momenta, amplitudes) sorted by momentum, normalized so that
    sum |psi_tilde|^2 dP = 1 (Parseval holds to round-off).
    """
    grid = packet.grid
    k = grid.wavenumbers
    phases = np.exp(-1j * k * grid.x_min)
    psi_t = grid.dx / math.sqrt(2.0 * math.pi * packet.kbar) * phases * np.fft.fft(packet.psi)
    p = grid.momenta(packet.kbar)
    order = np.argsort(p, kind="stable")
    return p[order], psi_t[order]


def observables(packet: WavePacket, potential: EffectivePotential) -> dict[str, float]:
    """Expectation values {X_mean, P_mean, dX, dP, H_mean, H0_mean, norm}.

    Position moments come from |psi|^2, momentum moments from the momentum
    density, and H_mean adds the kinetic expectation to the potential
    expectation at the packet's current time (drive term included; H0_mean
    reports the autonomous part only).
    """
    grid = packet.grid
    x = grid.x
    rho_x = np.abs(packet.psi) ** 2 * grid.dx
    x_mean = float(np.sum(x * rho_x))
    x2 = float(np.sum(x * x * rho_x))
    rho_p = np.abs(np.fft.fft(packet.psi)) ** 2
    rho_p /= rho_p.sum()
    p = grid.momenta(packet.kbar)
    p_mean = float(np.sum(p * rho_p))
    p2 = float(np.sum(p * p * rho_p))
    kinetic = 0.5 * p2
    v_full = float(np.sum(potential.value(x, packet.tau) * rho_x))
    v_drive = float(np.sum(potential.drive_term(x, packet.tau) * rho_x))
    return {
        "X_mean": x_mean,
        "P_mean": p_mean,
        "dX": float(math.sqrt(max(x2 - x_mean**2, 0.0))),
        "dP": float(math.sqrt(max(p2 - p_mean**2, 0.0))),
        "H_mean": kinetic + v_full,
        "H0_mean": kinetic + v_full - v_drive,
        "norm": float(rho_x.sum()),
    }


def evolve(packet: WavePacket, potential: EffectivePotential, tau_final: float,
           dtau: float, record_every: int | None = None,
           observers: tuple = ()) -> ObservableSeries:
    """Propagate in place to tau_final, recording observables at a stride.

    Aborts when the per-step norm drift exceeds 1e-8, when probability mass
    beyond 1e-6 reaches the outer 5% of the box ("box too small"), or when
    the momentum density similarly reaches the momentum-grid edge (checked at
    recording times).
    """
    if dtau <= 0.0:
        raise ValueError(f"dtau must be positive, got {dtau}")
    span = tau_final - packet.tau
    n_steps = int(round(span / dtau))
    if n_steps < 0 or abs(n_steps * dtau - span) > 1e-9 * max(1.0, abs(span)):
        raise ValueError(f"dtau {dtau} does not divide the span {span}")
    if record_every is None:
        record_every = max(n_steps, 1)

    op = SplitOperator(potential, packet.grid, packet.kbar, dtau)
    tau0 = packet.tau
    psi = packet.psi
    dx = packet.grid.dx
    n_edge = op._n_edge
    taus: list[float] = []
    rows: dict[str, list[float]] = {k: [] for k in
                                    ("X_mean", "P_mean", "dX", "dP",
                                     "H_mean", "H0_mean", "norm")}
    norm_prev = float(np.vdot(psi, psi).real * dx)
    norm0 = norm_prev
    max_step_drift = 0.0

    def record(k: int) -> None:
        packet.psi = psi
        packet.tau = tau0 + k * dtau
        obs = observables(packet, potential)
        rho_p = np.abs(np.fft.fft(psi)) ** 2
        rho_p /= rho_p.sum()
        p_edge = float(rho_p[packet.grid.n // 2 - n_edge:
                             packet.grid.n // 2 + n_edge].sum())
        if p_edge > EDGE_MASS_TOLERANCE:
            raise NumericalAbortError(
                f"momentum density {p_edge:.2e} at the momentum-grid edge: "
                "momentum grid too small")
        taus.append(packet.tau)
        for key in rows:
            rows[key].append(obs[key])
        for ob in observers:
            ob(packet, packet.tau)

    record(0)
    for k in range(1, n_steps + 1):
        psi = op.step(psi, tau0 + (k - 1) * dtau)
        nrm = float(np.vdot(psi, psi).real * dx)
        drift = abs(nrm - norm_prev)
        max_step_drift = max(max_step_drift, drift)
        if drift > NORM_STEP_TOLERANCE:
            raise NumericalAbortError(
                f"norm drifted by {drift:.2e} in one step at step {k}")
        norm_prev = nrm
        if op.edge_mass(psi) > EDGE_MASS_TOLERANCE:
            raise NumericalAbortError(
                f"probability {op.edge_mass(psi):.2e} in the outer "
                f"{EDGE_FRACTION:.0%} of the box at step {k}: box too small")
        if k % record_every == 0 or k == n_steps:
            record(k)
    packet.psi = psi
    packet.tau = tau0 + n_steps * dtau
    return ObservableSeries(
        tau=np.array(taus),
        columns={k: np.array(v) for k, v in rows.items()},
        metadata={"dtau": dtau, "n_steps": n_steps, "record_every": record_every,
                  "kbar": packet.kbar, "grid_n": packet.grid.n,
                  "x_min": packet.grid.x_min, "x_max": packet.grid.x_max,
                  "max_step_norm_drift": max_step_drift,
                  "total_norm_drift": abs(norm_prev - norm0)},
    )


def time_averaged_distribution(snapshots: list[DistributionSnapshot],
                               ) -> DistributionSnapshot:
    """Arithmetic mean of stored distribution snapshots (stays normalized)."""
    if not snapshots:
        raise ValueError("need at least one snapshot")
    coords = snapshots[0].coords
    for s in snapshots[1:]:
        if not np.array_equal(s.coords, coords):
            raise ValueError("snapshots live on different bins")
    prob = np.mean([s.prob for s in snapshots], axis=0)
    return DistributionSnapshot(coords=coords, prob=prob, kind=snapshots[0].kind)


def _coarsen(arr: np.ndarray, factor: int) -> np.ndarray:
    return arr.reshape(-1, factor).mean(axis=1)


def _coarsen_mass(arr: np.ndarray, factor: int) -> np.ndarray:
    return arr.reshape(-1, factor).sum(axis=1)


class DensityRecorder:
    """Observer capturing per-strobe position and momentum densities.

    Cell masses are optionally coarsened by integer rebin factors so
    space-time maps stay CSV-friendly; rebinned rows still sum to one.
    """

    def __init__(self, grid: Grid, kbar: float, rebin_position: int = 1,
                 rebin_momentum: int = 1):
        for factor in (rebin_position, rebin_momentum):
            if factor < 1 or grid.n % factor != 0:
                raise ValueError(f"rebin factor {factor} must divide the grid size {grid.n}")
        self.rebin_position = rebin_position
        self.rebin_momentum = rebin_momentum
        self.taus: list[float] = []
        self.position_rows: list[np.ndarray] = []
        self.momentum_rows: list[np.ndarray] = []
        self.position_coords = _coarsen(grid.x, rebin_position)
        p = grid.momenta(kbar)
        self.momentum_coords = _coarsen(np.sort(p, kind="stable"), rebin_momentum)

    def __call__(self, packet: WavePacket, tau: float) -> None:
        grid = packet.grid
        self.taus.append(tau)
        self.position_rows.append(
            _coarsen_mass(np.abs(packet.psi) ** 2 * grid.dx, self.rebin_position))
        p, psi_t = momentum_representation(packet)
        self.momentum_rows.append(
            _coarsen_mass(np.abs(psi_t) ** 2 * grid.dp(packet.kbar),
                          self.rebin_momentum))

    def snapshots(self, kind: str = "position") -> list[DistributionSnapshot]:
        if kind == "position":
            coords, rows = self.position_coords, self.position_rows
        elif kind == "momentum":
            coords, rows = self.momentum_coords, self.momentum_rows
        else:
            raise ValueError(f"kind must be 'position' or 'momentum', got {kind!r}")
        return [DistributionSnapshot(coords=coords, prob=r, kind=kind, tau=t)
                for t, r in zip(self.taus, rows)]

    def matrix(self, kind: str = "position") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        snaps = self.snapshots(kind)
        return (np.array(self.taus), snaps[0].coords,
                np.array([s.prob for s in snaps]))
