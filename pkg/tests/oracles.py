"""Independent reference implementations used only to check the library.

These deliberately avoid the code paths they validate: the dense propagator
builds the full Hamiltonian matrix and exponentiates it per time slice, and
the classical oracle hands the equations of motion to an adaptive high-order
scipy integrator.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm


def dense_kinetic_matrix(n: int, dx: float, kbar: float) -> np.ndarray:
    """Spectral kinetic-energy block: F^H diag(P^2/2) F with unitary DFT F."""
    j = np.arange(n)
    F = np.exp(-2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    p = kbar * k
    return F.conj().T @ np.diag(p**2 / 2.0) @ F


def dense_propagate(psi, x, dx, kbar, potential, tau0, n_steps, dtau):
    """Exact exponential of the midpoint-frozen Hamiltonian per small slice."""
    n = len(x)
    K = dense_kinetic_matrix(n, dx, kbar)
    out = psi.astype(complex).copy()
    for k in range(n_steps):
        tau_mid = tau0 + (k + 0.5) * dtau
        H = K + np.diag(potential.value(x, tau_mid))
        out = expm(-1j * H * dtau / kbar) @ out
    return out


def classical_reference(potential, x0, p0, tau0, tau1, rtol=1e-12, atol=1e-14):
    """Adaptive high-order endpoint for a single trajectory."""

    def rhs(tau, y):
        return [y[1], float(potential.force(y[0], tau))]

    sol = solve_ivp(rhs, (tau0, tau1), [x0, p0], method="DOP853",
                    rtol=rtol, atol=atol)
    assert sol.success
    return float(sol.y[0, -1]), float(sol.y[1, -1])
