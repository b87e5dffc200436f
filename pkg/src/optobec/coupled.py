"""Deterministic mean-field dynamics of the mirror / cavity / side-mode system.

Two levels are provided, both integrated with an adaptive high-order scheme
(DOP853) rather than a symplectic one, since the damped mean-field set is not
Hamiltonian:

* `evolve_meanfield` - the five coupled first-order equations for the cavity
  amplitude c, the mirror (q, p) and the side mode (Q, P), with all noise
  operators set to zero. The cavity coupling term is implemented as
  -i*xi_sm*Q*c by default (structurally symmetric with +i*xi*q*c); the
  literal constant-shift variant -i*xi_sm*c is available as
  coupling_variant="printed".
* `evolve_adiabatic` - the reduced pair of second-order oscillator equations
  obtained after adiabatic elimination of the cavity, with the Lorentzian
  radiation-pressure force.

`mirror_ansatz_residual` quantifies how far the mirror deviates from the
harmonic reference q0*cos(omega_m t), which is the approximation underlying
the effective time-periodic model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .classical import NumericalAbortError
from .params import PhysicalParams

_COMPONENTS = ("q", "p", "Q", "P", "Re c", "Im c")


@dataclass(frozen=True)
class CoupledState:
    """Mirror (q, p), side mode (Q, P), mean-field cavity amplitude c, at time t."""

    q: float = 0.0
    p: float = 0.0
    Q: float = 0.0
    P: float = 0.0
    c: complex = 0.0 + 0.0j
    t: float = 0.0

    def __post_init__(self) -> None:
        for name in ("q", "p", "Q", "P", "t"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"non-finite {name}")
        if not (math.isfinite(self.c.real) and math.isfinite(self.c.imag)):
            raise ValueError("non-finite c")


@dataclass
class CoupledSeries:
    """Sampled trajectories of the coupled system."""

    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    c: np.ndarray    # complex

    @property
    def photon_number(self) -> np.ndarray:
        return np.abs(self.c) ** 2


def _check_finite(series: CoupledSeries) -> None:
    parts = (series.q, series.p, series.Q, series.P,
             series.c.real, series.c.imag)
    for name, arr in zip(_COMPONENTS, parts):
        if not np.all(np.isfinite(arr)):
            raise NumericalAbortError(f"non-finite value in component {name}")


def evolve_meanfield(state: CoupledState, params: PhysicalParams,
                     t_final: float, dt: float,
                     damping: tuple[float, float] = (0.0, 0.0),
                     delta_tilde: float | None = None,
                     coupling_variant: str = "q-operator",
                     rtol: float = 1e-10, atol: float = 1e-12) -> CoupledSeries:
    """Integrate the noise-free mean-field equations, sampling every dt seconds.

    damping = (gamma_mech, gamma_sm); both default to zero (the short-time
    regime). delta_tilde is the effective cavity detuning entering the c
    equation; it defaults to params.detuning.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if coupling_variant not in ("q-operator", "printed"):
        raise ValueError(f"unknown coupling_variant {coupling_variant!r}")
    dtil = params.detuning if delta_tilde is None else delta_tilde
    gamma_mech, gamma_sm = damping
    omega_m = params.mirror_frequency
    omega_r = params.recoil_frequency
    xi = params.mirror_coupling
    xi_sm = params.condensate_coupling
    kappa = params.cavity_decay
    eta = params.pump_coupling
    q_coupled = coupling_variant == "q-operator"

    def rhs(t, y):
        q, p, Q, P, cr, ci = y
        c = cr + 1j * ci
        shift = xi_sm * Q if q_coupled else xi_sm
        dc = (1j * dtil + 1j * xi * q - 1j * shift - kappa) * c + eta
        n_ph = cr * cr + ci * ci
        return [
            omega_m * p,
            -omega_m * q - xi * n_ph - gamma_mech * p,
            4.0 * omega_r * P - gamma_sm * Q,
            -4.0 * omega_r * Q - xi_sm * n_ph - gamma_sm * P,
            dc.real,
            dc.imag,
        ]

    y0 = [state.q, state.p, state.Q, state.P, state.c.real, state.c.imag]
    t_eval = np.arange(0.0, t_final + 0.5 * dt, dt) + state.t
    t_eval = t_eval[t_eval <= state.t + t_final + 1e-15 * max(1.0, abs(t_final))]
    sol = solve_ivp(rhs, (state.t, state.t + t_final), y0, method="DOP853",
                    rtol=rtol, atol=atol, t_eval=t_eval, dense_output=False)
    if not sol.success:
        raise NumericalAbortError(f"mean-field integration failed: {sol.message}")
    series = CoupledSeries(t=sol.t, q=sol.y[0], p=sol.y[1], Q=sol.y[2],
                           P=sol.y[3], c=sol.y[4] + 1j * sol.y[5])
    _check_finite(series)
    return series


def evolve_adiabatic(state: CoupledState, params: PhysicalParams,
                     t_final: float, dt: float,
                     delta_tilde: float | None = None,
                     rtol: float = 1e-10, atol: float = 1e-12) -> CoupledSeries:
    """Integrate the reduced second-order oscillator pair for (q, Q).

    The initial velocities follow the mean-field kinematics dq/dt = omega_m*p
    and dQ/dt = 4*omega_r*P; the returned series maps them back the same way.
    The cavity column holds the adiabatic steady-state amplitude
    eta / (kappa - i*(delta_tilde + xi*q - xi_sm*Q)).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    dtil = params.detuning if delta_tilde is None else delta_tilde
    omega_m = params.mirror_frequency
    omega_r = params.recoil_frequency
    xi = params.mirror_coupling
    xi_sm = params.condensate_coupling
    kappa2 = params.cavity_decay ** 2
    eta2 = params.pump_coupling ** 2

    def rhs(t, y):
        q, vq, Q, vQ = y
        denom = kappa2 + (dtil + xi * q - xi_sm * Q) ** 2
        return [
            vq,
            -omega_m**2 * q + omega_m * xi * eta2 / denom,
            vQ,
            -4.0 * omega_r**2 * Q - 4.0 * omega_r * xi_sm * eta2 / denom,
        ]

    y0 = [state.q, omega_m * state.p, state.Q, 4.0 * omega_r * state.P]
    t_eval = np.arange(0.0, t_final + 0.5 * dt, dt) + state.t
    t_eval = t_eval[t_eval <= state.t + t_final + 1e-15 * max(1.0, abs(t_final))]
    sol = solve_ivp(rhs, (state.t, state.t + t_final), y0, method="DOP853",
                    rtol=rtol, atol=atol, t_eval=t_eval)
    if not sol.success:
        raise NumericalAbortError(f"adiabatic integration failed: {sol.message}")
    q, vq, Q, vQ = sol.y
    c = params.pump_coupling / (params.cavity_decay
                                - 1j * (dtil + xi * q - xi_sm * Q))
    series = CoupledSeries(t=sol.t, q=q, p=vq / omega_m, Q=Q,
                           P=vQ / (4.0 * omega_r), c=c)
    _check_finite(series)
    return series


@dataclass(frozen=True)
class AnsatzResidual:
    """Deviation of the mirror from the harmonic reference, relative to q0."""

    value: float
    partial: bool    # True when the series spans less than one mirror period


def mirror_ansatz_residual(series: CoupledSeries, q0: float,
                           omega_m: float) -> AnsatzResidual:
    """max_t |q(t) - q0*cos(omega_m t)| / q0 over the series window."""
    if q0 == 0.0:
        raise ValueError("q0 must be nonzero")
    span = series.t[-1] - series.t[0]
    period = 2.0 * math.pi / omega_m
    ref = q0 * np.cos(omega_m * series.t)
    value = float(np.max(np.abs(series.q - ref)) / abs(q0))
    return AnsatzResidual(value=value, partial=bool(span < period))
