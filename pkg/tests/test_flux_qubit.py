import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import phi_star_oracle
from topobus import flux_qubit as fq
from topobus.flux_qubit import ChargeConfiguration, FluxQubitParameters

BASE = FluxQubitParameters(e_j=1.0, e_j2=1.25, e_c=0.1)


def test_parameter_validation():
    with pytest.raises(ValueError, match="e_c"):
        FluxQubitParameters(e_c=0.0)
    with pytest.raises(ValueError, match="n_p"):
        ChargeConfiguration(2)


def test_phi_star_reference_value():
    assert fq.find_minima(BASE).phi_star == pytest.approx(1.159279, abs=1e-6)


def test_minima_are_degenerate_and_stationary():
    m = fq.find_minima(BASE)
    u1 = fq.josephson_potential(*m.first, BASE)
    u2 = fq.josephson_potential(*m.second, BASE)
    assert u1 == pytest.approx(u2, abs=1e-14)
    # closed form: U/E_J at the minimum = -(2 cos p* + r cos(pi - 2 p*))
    p = m.phi_star
    assert u1 == pytest.approx(-(2 * math.cos(p) - 1.25 * math.cos(2 * p)), abs=1e-14)
    assert np.allclose(fq.potential_gradient(*m.first, BASE), 0.0, atol=1e-14)


def test_single_well_rejected_at_boundary():
    with pytest.raises(fq.NoDoubleWellError):
        fq.find_minima(FluxQubitParameters(e_j=1.0, e_j2=0.5))
    assert not FluxQubitParameters(e_j=1.0, e_j2=0.5).has_double_well


def test_off_degeneracy_requires_numerical_route():
    p = replace(BASE, flux=0.45)
    with pytest.raises(ValueError, match="degeneracy"):
        fq.find_minima(p)
    mins = fq.numerical_minima(p)
    energies = sorted(m[2] for m in mins)
    # detuning breaks the degeneracy of the two global wells
    assert energies[1] - energies[0] > 1e-3


@settings(max_examples=15, deadline=None)
@given(st.floats(0.6, 3.0))
def test_numerical_minimum_matches_closed_form(ratio):
    p = FluxQubitParameters(e_j=1.0, e_j2=ratio)
    assert abs(fq.numerical_phi_star(p) - phi_star_oracle(ratio)) < 1e-6


def test_potential_landscape_shape_and_periodicity():
    x, y, u = fq.potential_landscape(BASE, 41)
    assert u.shape == (41, 41)
    assert np.allclose(u[0, :], u[-1, :]) and np.allclose(u[:, 0], u[:, -1])
    assert u[20, 20] == pytest.approx(fq.josephson_potential(0.0, 0.0, BASE))


def test_josephson_potential_array_and_scalar():
    a = np.linspace(-1, 1, 7)
    vec = fq.josephson_potential(a, a[::-1], BASE)
    assert vec.shape == (7,)
    assert vec[2] == fq.josephson_potential(a[2], a[4], BASE)


def test_wkb_amplitude_order_of_magnitude():
    t = fq.wkb_tunneling_amplitude(BASE)
    assert 0.02 / 3 <= t.delta0 <= 0.02 * 3
    assert t.phi_star == pytest.approx(phi_star_oracle(1.25))


def test_wkb_grid_converged():
    a = fq.wkb_tunneling_amplitude(BASE, num=2001).action
    b = fq.wkb_tunneling_amplitude(BASE, num=8001).action
    assert a == pytest.approx(b, rel=1e-8)


def test_wkb_monotone_in_ej_over_ec():
    vals = [fq.wkb_tunneling_amplitude(FluxQubitParameters(e_j=1.0, e_j2=1.25, e_c=1.0 / r)).delta0 for r in np.linspace(2, 40, 20)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_wkb_action_scales_as_sqrt_ej_over_ec():
    s1 = fq.wkb_tunneling_amplitude(replace(BASE, e_c=0.1)).action
    s4 = fq.wkb_tunneling_amplitude(replace(BASE, e_c=0.025)).action
    assert s4 == pytest.approx(2 * s1, rel=1e-12)


def test_attempt_frequency_scales_amplitude():
    a = fq.wkb_tunneling_amplitude(BASE).delta0
    b = fq.wkb_tunneling_amplitude(replace(BASE, attempt_frequency=0.3)).delta0
    assert b == pytest.approx(0.3 * a, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 1), st.floats(-4.0, 4.0))
def test_aharonov_casher_formula(n_p, q):
    t = fq.TunnelingResult(0.037, 1.0, 1.0)
    got = fq.flux_qubit_splitting(t, ChargeConfiguration(n_p, q))
    assert got == pytest.approx(0.037 * math.cos(math.pi * (n_p + q) / 2), abs=1e-16)
    assert got == fq.splitting_for_charge(t, n_p + q)


def test_odd_parity_zero_splitting_at_zero_gate_charge():
    t = fq.wkb_tunneling_amplitude(BASE)
    assert abs(fq.flux_qubit_splitting(t, ChargeConfiguration(1, 0.0))) < 1e-15 * t.delta0 * 10
    assert fq.flux_qubit_splitting(t, ChargeConfiguration(0, 0.0)) == t.delta0


def test_parity_readout_and_degeneracy():
    t = fq.wkb_tunneling_amplitude(BASE)
    assert fq.parity_readout(t.delta0, t, 0.0) == 0
    assert fq.parity_readout(0.0, t, 0.0) == 1
    # at q_ext = 1/2 both parities give |cos(pi/4)|
    assert fq.readout_is_degenerate(t, 0.5)
    with pytest.raises(fq.ReadoutError):
        fq.parity_readout(0.01, t, 0.5)
    with pytest.raises(fq.ReadoutError):
        fq.parity_readout(0.01, t, 0.0, noise_sigma=t.delta0)


def test_noisy_readout_recovers_parity():
    t = fq.wkb_tunneling_amplitude(BASE)
    rng = np.random.default_rng(1)
    sigma = t.delta0 / 20
    for n_p in (0, 1):
        for _ in range(200):
            obs = fq.noisy_splitting(t, ChargeConfiguration(n_p), sigma, rng)
            assert fq.parity_readout(obs, t, 0.0, sigma) == n_p
