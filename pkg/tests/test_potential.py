import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optobec import EffectivePotential, from_lambda_eff

finite_x = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False)
finite_tau = st.floats(min_value=0.0, max_value=50.0, allow_nan=False)


def test_value_at_origin_is_pure_trap_term(potential, eff_params):
    expected = -(eff_params.gamma_eff * eff_params.beta / eff_params.mu1) \
        * math.atan(eff_params.mu)
    for tau in (0.0, 0.3, 1.7, 12.0):
        assert potential.value(0.0, tau) == pytest.approx(expected, rel=1e-14)


def test_value_at_origin_quoted_params(potential):
    # hand evaluation: -(0.6034*1.8/2)*arctan(-0.4) = +0.20664
    assert potential.value(0.0, 0.0) == pytest.approx(0.2066, abs=2e-4)


def test_pure_harmonic_limit(harmonic_potential):
    for x in (-3.0, 0.5, 2.0):
        for tau in (0.0, 0.9):
            assert harmonic_potential.value(x, tau) == pytest.approx(0.5 * x * x)


def test_harmonic_force(harmonic_potential):
    assert harmonic_potential.force(1.0, 0.37) == pytest.approx(-1.0)


def test_force_matches_finite_difference(potential):
    rng = np.random.Generator(np.random.Philox(key=42))
    h = 1e-6
    checked = 0
    for _ in range(100):
        x = rng.uniform(-5.0, 5.0)
        tau = rng.uniform(0.0, math.pi)
        f = potential.force(x, tau)
        fd = -(potential.value(x + h, tau) - potential.value(x - h, tau)) / (2 * h)
        if abs(f) > 1e-3:
            assert abs(fd - f) / abs(f) < 1e-6
            checked += 1
    assert checked >= 90


def test_force_hand_value(eff_params):
    pot = EffectivePotential(eff_params.replace(lambda_eff=0.5))
    p = eff_params
    expected = -0.5 - p.gamma_eff * p.beta / (1.0 + p.mu**2)
    assert pot.force(0.0, 0.0) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(-1.4363103448, rel=1e-9)


def test_hamiltonian_zero_point(harmonic_potential):
    assert harmonic_potential.hamiltonian(0.0, 0.0, 0.4) == 0.0


def test_hamiltonian_kinetic_additivity(potential):
    v = potential.value(1.3, 0.8)
    assert potential.hamiltonian(1.3, 2.0, 0.8) == pytest.approx(2.0 + v)


def test_hamiltonian_against_symbolic_oracle(potential, eff_params):
    import sympy as sp

    X, P, tau = sp.symbols("X P tau")
    p = eff_params
    H = (P**2 / 2 + X**2 / 2 + X * p.lambda_eff * sp.cos(4 * tau)
         - sp.Rational(1) * (p.gamma_eff * p.beta / p.mu1)
         * sp.atan(p.mu - p.mu1 * X))
    expected = float(H.subs({X: 1, P: 1, tau: 0}).evalf(30))
    assert potential.hamiltonian(1.0, 1.0, 0.0) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=50)
@given(finite_x, finite_tau)
def test_drive_period_pi_over_2(x, tau):
    pot = EffectivePotential(from_lambda_eff(3.75))
    assert pot.value(x, tau) == pytest.approx(pot.value(x, tau + math.pi / 2),
                                              rel=1e-12, abs=1e-12)


@settings(max_examples=50)
@given(finite_x, finite_tau)
def test_drive_parity_quarter_period(x, tau):
    # cos(4(tau + pi/4)) = -cos(4 tau): advancing a quarter period flips the
    # drive sign, so it equals negating the modulation amplitude
    pot = EffectivePotential(from_lambda_eff(3.75))
    shifted = pot.value(x, tau + math.pi / 4)
    negated = pot.value(x, tau) - 2.0 * pot.drive_term(x, tau)
    assert shifted == pytest.approx(negated, rel=1e-10, abs=1e-10)


def test_static_limit_time_independent(harmonic_potential):
    for x, p in ((0.3, -1.2), (2.0, 0.0)):
        h1 = harmonic_potential.hamiltonian(x, p, 0.0)
        h2 = harmonic_potential.hamiltonian(x, p, 7.7)
        assert h1 == h2


def test_vectorized_evaluation(potential):
    xs = np.linspace(-3, 3, 7)
    vals = potential.value(xs, 0.2)
    assert vals.shape == xs.shape
    assert vals[3] == pytest.approx(potential.value(xs[3], 0.2))
    fs = potential.force(xs, 0.2)
    assert fs.shape == xs.shape
