import math

import pytest
from hypothesis import given, strategies as st

from optobec import (EffectiveParams, PhysicalParams, WarningCode, derive_effective,
                     from_lambda_eff, reference_preset, t_of_tau, tau_of_t)

TWO_PI = 2.0 * math.pi


def test_gamma_from_published_frequencies(preset):
    # 4 * 3.8 / 15.2 = 1 by hand
    phys, _ = preset
    eff, _ = derive_effective(phys)
    assert eff.gamma == pytest.approx(1.0, rel=1e-12)


def test_gamma_eff_matches_quoted_value(preset):
    phys, _ = preset
    eff, warnings = derive_effective(phys)
    assert eff.gamma_eff == pytest.approx(0.6034, rel=2e-3)
    assert all(w.code is not WarningCode.GAMMA_EFF_MISMATCH for w in warnings)


def test_lambda_eff_is_33_lambda_at_unit_gamma():
    eff = from_lambda_eff(0.33)
    assert eff.gamma == 1.0
    assert eff.lambda_eff == pytest.approx(33.0 * eff.lam, rel=1e-12)


def test_beta_conflict_warns(preset):
    phys, _ = preset
    eff, warnings = derive_effective(phys)
    assert eff.beta == pytest.approx((18.4 / 1.3) ** 2, rel=1e-12)
    beta_warns = [w for w in warnings if w.code is WarningCode.BETA_MISMATCH]
    assert len(beta_warns) == 1
    assert beta_warns[0].expected == 1.8
    assert beta_warns[0].actual == pytest.approx(200.33, rel=1e-3)


def test_mu_and_mu1_warn(preset):
    phys, _ = preset
    _, warnings = derive_effective(phys)
    codes = {w.code for w in warnings}
    assert WarningCode.MU_MISMATCH in codes
    assert WarningCode.MU1_MISMATCH in codes


def test_warning_threshold_is_one_percent(preset):
    phys, _ = preset
    _, warnings = derive_effective(phys, reference={"gamma_eff": 0.6034})
    assert warnings == []  # 0.60269 vs 0.6034 is within 1%
    _, warnings = derive_effective(phys, reference={"gamma_eff": 0.62})
    assert len(warnings) == 1  # 2.8% off now


def test_reference_skippable(preset):
    phys, _ = preset
    _, warnings = derive_effective(phys, reference=None)
    assert warnings == []


def test_preset_quoted_values(preset):
    phys, eff = preset
    assert eff.mu == -0.4
    assert eff.mu1 == 2.0
    assert eff.beta == 1.8
    assert eff.gamma_eff == 0.6034
    assert eff.kbar == 1.0
    assert phys.cavity_decay == pytest.approx(TWO_PI * 1.3e6, rel=1e-12)
    assert phys.atom_number == 2.8e4
    assert phys.pump_power == pytest.approx(0.0164e-3, rel=1e-12)


def test_preset_q0_reproduces_lambda_eff():
    phys, eff = reference_preset(lambda_eff=2.5)
    derived, _ = derive_effective(phys)
    assert derived.lambda_eff == pytest.approx(2.5, rel=1e-12)
    assert eff.lambda_eff == 2.5


def test_derived_quantities_not_stored(preset):
    phys, _ = preset
    assert phys.wave_number == pytest.approx(TWO_PI / 780e-9, rel=1e-12)
    assert phys.side_mode_frequency == pytest.approx(4 * phys.recoil_frequency)


def test_tau_of_t_published_times(preset):
    phys, _ = preset
    om = phys.mirror_frequency
    # hand arithmetic: omega_m * t / 4
    assert tau_of_t(4.19e-2, om) == pytest.approx(1000.4, abs=0.1)
    assert tau_of_t(2.09e-2, om) == pytest.approx(499.0, abs=0.1)
    assert tau_of_t(0.0, om) == 0.0


@given(st.floats(min_value=1e-9, max_value=1e3, allow_nan=False))
def test_tau_round_trip(t):
    om = TWO_PI * 15.2e3
    assert t_of_tau(tau_of_t(t, om), om) == pytest.approx(t, rel=1e-12)


def test_derive_effective_deterministic(preset):
    phys, _ = preset
    a, wa = derive_effective(phys)
    b, wb = derive_effective(phys)
    assert a == b
    assert wa == wb


def test_nonfinite_rejected_with_field_name(preset):
    phys, _ = preset
    with pytest.raises(ValueError, match="pump_power"):
        PhysicalParams(**{**_as_dict(phys), "pump_power": math.nan})
    with pytest.raises(ValueError, match="kbar"):
        derive_effective(phys, kbar=math.inf)


def test_positivity_validation(preset):
    phys, _ = preset
    with pytest.raises(ValueError, match="cavity_decay"):
        PhysicalParams(**{**_as_dict(phys), "cavity_decay": -1.0})
    # couplings may be zero (decoupled limits)
    PhysicalParams(**{**_as_dict(phys), "mirror_coupling": 0.0,
                      "pump_coupling": 0.0, "pump_power": 0.0})


def test_effective_params_invariants():
    with pytest.raises(ValueError, match="mu1"):
        EffectiveParams(gamma=1.0, beta=1.8, mu=-0.4, mu1=-2.0, lam=0.1,
                        lambda_eff=3.3, gamma_eff=0.6)
    with pytest.raises(ValueError, match="lambda_eff"):
        EffectiveParams(gamma=1.0, beta=1.8, mu=-0.4, mu1=2.0, lam=0.1,
                        lambda_eff=5.0, gamma_eff=0.6)


def test_replace_keeps_modulation_consistent(eff_params):
    changed = eff_params.replace(lambda_eff=1.0)
    assert changed.lam == pytest.approx(1.0 / 33.0, rel=1e-12)
    changed2 = eff_params.replace(lam=0.2)
    assert changed2.lambda_eff == pytest.approx(6.6, rel=1e-12)


def _as_dict(phys):
    from dataclasses import asdict
    return asdict(phys)
