import numpy as np
import pytest

from optobec import EffectivePotential, from_lambda_eff, reference_preset


@pytest.fixture(scope="session")
def preset():
    phys, eff = reference_preset()
    return phys, eff


@pytest.fixture(scope="session")
def eff_params(preset):
    return preset[1]


@pytest.fixture(scope="session")
def potential(eff_params):
    return EffectivePotential(eff_params)


@pytest.fixture(scope="session")
def harmonic_params():
    """Undriven pure-harmonic limit: lambda_eff = 0, beta = 0."""
    return from_lambda_eff(0.0, beta=0.0)


@pytest.fixture(scope="session")
def harmonic_potential(harmonic_params):
    return EffectivePotential(harmonic_params)


class FreeParticlePotential:
    """Zeroed potential with the EffectivePotential call surface."""

    def value(self, X, tau):
        return np.zeros_like(np.asarray(X, dtype=float))

    def harmonic_term(self, X):
        return np.zeros_like(np.asarray(X, dtype=float))

    def trap_term(self, X):
        return np.zeros_like(np.asarray(X, dtype=float))

    def drive_term(self, X, tau):
        return np.zeros_like(np.asarray(X, dtype=float))

    def force(self, X, tau):
        return np.zeros_like(np.asarray(X, dtype=float))

    def hamiltonian(self, X, P, tau):
        return 0.5 * np.square(P)

    class params:
        lambda_eff = 0.0


@pytest.fixture(scope="session")
def free_potential():
    return FreeParticlePotential()
