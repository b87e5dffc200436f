"""Effective time-periodic potential, force and Hamiltonian in the comoving frame.

The potential in the transformed coordinate X (lab coordinate minus the
mirror-induced sweep) is

    V(X, tau) = X^2/2 + X*lambda_eff*cos(4*tau)
                - (gamma_eff*beta/mu1) * arctan(mu - mu1*X)

with drive period pi/2 in tau. The force follows in closed form, the arctan
differentiating to a Lorentzian. Everything here is pure and vectorized over
X; the additive constant of the trap term is fixed to zero.
"""

from __future__ import annotations

import math

import numpy as np

from .params import EffectiveParams

DRIVE_PERIOD = math.pi / 2.0


class EffectivePotential:
    """Evaluates V, F = -dV/dX and H for an immutable parameter set."""

    def __init__(self, params: EffectiveParams):
        self.params = params
        self._trap_coeff = params.gamma_eff * params.beta / params.mu1

    def harmonic_term(self, X):
        return 0.5 * np.square(X)

    def drive_term(self, X, tau):
        return X * (self.params.lambda_eff * np.cos(4.0 * tau))

    def trap_term(self, X):
        return -self._trap_coeff * np.arctan(self.params.mu - self.params.mu1 * X)

    def value(self, X, tau):
        """Potential energy at (X, tau); sum of the three terms."""
        return self.harmonic_term(X) + self.drive_term(X, tau) + self.trap_term(X)

    def force(self, X, tau):
        """Closed-form F = -dV/dX: the arctan term yields a Lorentzian."""
        p = self.params
        u = p.mu - p.mu1 * X
        return (-X
                - p.lambda_eff * np.cos(4.0 * tau)
                - p.gamma_eff * p.beta / (1.0 + u * u))

    def hamiltonian(self, X, P, tau):
        """H = P^2/2 + V(X, tau)."""
        return 0.5 * np.square(P) + self.value(X, tau)
