import math

import numpy as np
import pytest

from becbohd import perturbation
from becbohd.model import DerivedRates, InvalidParameterError, optical_bohd
from becbohd.perturbation import (
    PerturbationInputs,
    diagnostic_imag_first,
    homodyne_current_analytic,
    jx_first,
    jx_full,
    jx_zeroth,
    phase_first,
    phase_full,
    phase_trajectory,
    phase_zeroth,
    quadrature_from_phase,
)


def make_inputs(**kwargs):
    defaults = dict(
        rates=DerivedRates(omega_prime=25.0, omega_eff=30.0, epsilon=0.0, gamma_meas=0.0),
        n_atoms=10_000,
        beta_mag=math.sqrt(5000.0),
        jy0=1667.0,
        xi=0.01,
    )
    defaults.update(kwargs)
    return PerturbationInputs(**defaults)


def test_default_quadrature_profile():
    inp = make_inputs()
    assert inp.x0(0.0) == pytest.approx(-1667.0 / math.sqrt(5000.0))
    # cos(omega t) modulation
    t = 0.13
    assert inp.x0(t) == pytest.approx(-(1667.0 / math.sqrt(5000.0)) * math.cos(30.0 * t))
    assert inp.x1(t) == 0.0


def test_jx_zeroth_default_profile():
    inp = make_inputs()
    for t in (0.0, 0.05, 0.21):
        assert jx_zeroth(inp, t) == pytest.approx((25.0 / 30.0) * 1667.0 * math.sin(30.0 * t))


def test_jx_zeroth_reduces_to_rabi_without_light():
    rates = DerivedRates(omega_prime=25.0, omega_eff=25.0, epsilon=math.inf, gamma_meas=0.0)
    inp = make_inputs(rates=rates)
    for t in (0.0, 0.1, 0.3):
        assert jx_zeroth(inp, t) == pytest.approx(1667.0 * math.sin(25.0 * t))


def test_jx_zeroth_custom_profile_uses_retarded_time():
    w = 30.0
    profile = lambda t: math.cos(w * t)
    inp = make_inputs(x_quad_zero=profile)
    t = 0.4
    expected = (25.0 / w) * inp.beta_mag * math.cos(w * (t - math.pi / (2.0 * w)))
    assert jx_zeroth(inp, t) == pytest.approx(expected)


def test_jx_full_equals_zeroth_when_expansion_inapplicable():
    for eps in (0.0, math.inf):
        rates = DerivedRates(omega_prime=25.0, omega_eff=30.0, epsilon=eps, gamma_meas=0.0)
        inp = make_inputs(rates=rates)
        assert jx_full(inp, 0.2) == jx_zeroth(inp, 0.2)


def test_first_order_terms_vanish_without_first_order_profile():
    rates = DerivedRates(omega_prime=25.0, omega_eff=30.0, epsilon=1e-3, gamma_meas=0.0)
    inp = make_inputs(rates=rates)
    assert jx_first(inp, 0.2) == 0.0
    assert jx_full(inp, 0.2) == jx_zeroth(inp, 0.2)
    ijx, iph = diagnostic_imag_first(inp, 0.2)
    assert ijx == 0.0


def test_first_order_imaginary_part_is_reported():
    rates = DerivedRates(omega_prime=25.0, omega_eff=30.0, epsilon=1e-3, gamma_meas=0.0)
    inp = make_inputs(rates=rates, x_quad_one=lambda t: 1.0)
    val = jx_first(inp, 0.2)
    assert val.imag != 0.0
    ijx, iph = diagnostic_imag_first(inp, 0.2)
    assert ijx == pytest.approx(abs(val.imag))
    assert iph == pytest.approx(abs(phase_first(inp, 0.2).imag))
    # the real part enters jx_full scaled by epsilon
    assert jx_full(inp, 0.2) == pytest.approx(jx_zeroth(inp, 0.2) + 1e-3 * val.real)


def test_phase_zeroth_matches_explicit_trajectory():
    inp = make_inputs()
    for t in np.linspace(0.0, 1.0, 37):
        assert phase_zeroth(inp, t) == pytest.approx(
            phase_trajectory(1667.0, inp, t), abs=1e-12
        )


def test_phase_full_equals_zeroth_without_expansion():
    inp = make_inputs()
    assert phase_full(inp, 0.3) == phase_zeroth(inp, 0.3)


def test_quadrature_inversion_round_trip():
    inp = make_inputs()
    for t in (0.0, 0.07, 0.5):
        phase = phase_zeroth(inp, t)
        assert quadrature_from_phase(phase, t, inp) == pytest.approx(inp.x0(t), abs=1e-10)


def test_quadrature_inversion_requires_coupling():
    inp = make_inputs(xi=0.0)
    with pytest.raises(InvalidParameterError):
        quadrature_from_phase(0.1, 0.0, inp)


def test_bohd_identity():
    # the detector identity: -|c||d| sin(phase_trajectory) is exactly the
    # analytic current
    inp = make_inputs(cav_amp=1.3, lo_amp=0.7)
    for t in np.linspace(0.0, 1.0, 101):
        lhs = optical_bohd(phase_trajectory(1667.0, inp, t), 1.3, 0.7)
        rhs = homodyne_current_analytic(1667.0, inp, t)
        assert lhs == pytest.approx(rhs, abs=1e-14)


def test_current_bounded_by_amplitude_product():
    inp = make_inputs()
    vals = [homodyne_current_analytic(1667.0, inp, t) for t in np.linspace(0.0, 2.0, 400)]
    assert max(abs(v) for v in vals) <= 1.0 + 1e-12


def test_negative_epsilon_rejected():
    rates = DerivedRates(omega_prime=25.0, omega_eff=30.0, epsilon=-1.0, gamma_meas=0.0)
    with pytest.raises(InvalidParameterError):
        make_inputs(rates=rates)


def test_degenerate_frequency_rejected():
    rates = DerivedRates(omega_prime=25.0, omega_eff=0.0, epsilon=0.0, gamma_meas=0.0)
    inp = make_inputs(rates=rates)
    with pytest.raises(InvalidParameterError):
        jx_zeroth(inp, 0.1)
    with pytest.raises(InvalidParameterError):
        phase_trajectory(1.0, inp, 0.1)
