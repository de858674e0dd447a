import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from udsim.errors import InvalidScenario, UnderSampled
from udsim.teleport import (FidelitySeries, TeleportScenario, _ab_series, _with_input,
                            collapse_consistency, extract_markers, fidelity_average,
                            fidelity_beta_quadrature, fidelity_monte_carlo, run, run_physical,
                            run_pseudo, slice_times)


def aligned_time(s, n=2):
    """t₁ on the Minkowski slice with Ω(τ_A + τ_B) = 2πn."""
    from scipy.optimize import brentq

    om = s.params.omega
    f = lambda t: om * (t + math.asinh(s.a * t) / s.a) - 2 * math.pi * n
    return brentq(f, 0.0, 2 * math.pi * n / om)


def joint_state(s, t1):
    pair = np.array([slice_times(s, t1)])
    return _with_input(s, _ab_series(s, pair).state(0))


# -- scenario ------------------------------------------------------------------------


def test_scenario_validation():
    with pytest.raises(InvalidScenario):
        TeleportScenario(a=2.0, b=2.0)
    with pytest.raises(InvalidScenario):
        TeleportScenario(mode="physical")
    with pytest.raises(InvalidScenario):
        TeleportScenario(tau2=3.0)
    with pytest.raises(InvalidScenario):
        TeleportScenario(r1=-1.0)
    with pytest.raises(ValueError):
        TeleportScenario(foliation="spherical")


def test_slices():
    s = TeleportScenario(a=1.0, b=2.0)
    assert slice_times(s, 0.7) == pytest.approx((0.7, math.asinh(0.7)))
    q = TeleportScenario(a=1.0, b=2.0, foliation="quasi-rindler")
    assert slice_times(q, 0.7) == pytest.approx((math.tanh(0.7) / 2.0, 0.7))


# -- fidelity values ----------------------------------------------------------------------


def test_classical_bound_without_resource():
    s = TeleportScenario(r1=0.0, r2=8.0, gamma=0.0, times=tuple(np.linspace(0, 6, 13)))
    ser = run_pseudo(s)
    np.testing.assert_allclose(ser.f_av, 0.5, atol=1e-6)
    np.testing.assert_allclose(ser.e_n, 0.0, atol=1e-12)


@pytest.mark.parametrize("r1", [0.5, 1.0, 2.0])
def test_ideal_protocol_at_aligned_phase(r1):
    s = TeleportScenario(r1=r1, r2=8.0, gamma=0.0)
    t1 = aligned_time(s)
    f = fidelity_average(s, joint_state(s, t1))
    assert f == pytest.approx(1 / (1 + math.exp(-2 * r1)), abs=1e-6)


def test_strong_squeezing_approaches_one():
    s = TeleportScenario(r1=4.0, r2=8.0, gamma=0.0)
    assert fidelity_average(s, joint_state(s, 0.0)) > 0.999


def test_closed_form_matches_sampling_oracle():
    s = TeleportScenario(r1=1.0, gamma=0.02)
    state = joint_state(s, 0.8)
    exact = fidelity_average(s, state)
    mean, err = fidelity_monte_carlo(s, state, samples=200_000, seed=7)
    assert abs(mean - exact) < 3 * err


def test_closed_form_matches_beta_plane_quadrature():
    s = TeleportScenario(r1=1.0, gamma=0.02, alpha=0.3 - 0.8j)
    state = joint_state(s, 1.1)
    val, norm = fidelity_beta_quadrature(s, state)
    assert norm == pytest.approx(1.0, abs=1e-8)
    assert val == pytest.approx(fidelity_average(s, state), abs=1e-9)


def test_sampling_oracle_is_seeded():
    s = TeleportScenario(r1=0.5, gamma=0.0)
    state = joint_state(s, 0.3)
    assert fidelity_monte_carlo(s, state, 1000, seed=3) == fidelity_monte_carlo(s, state, 1000, seed=3)


@settings(max_examples=15)
@given(st.floats(0.0, 2.5), st.floats(0.0, 5.0), st.floats(0.2, 1.9),
       st.complex_numbers(max_magnitude=2.0))
def test_fidelity_and_negativity_ranges(r1, t1, a, alpha):
    s = TeleportScenario(a=a, b=2.0, r1=r1, gamma=0.0, alpha=alpha, times=(t1,))
    ser = run_pseudo(s)
    assert 0.0 <= ser.f_av[0] <= 1.0
    assert ser.e_n[0] >= 0.0
    assert ser.e_n[0] == pytest.approx(2 * r1 / math.log(2), abs=1e-9)


def test_entanglement_is_necessary_for_advantage():
    for a in (0.5, 1.5):
        for r1 in (0.5, 1.0):
            s = TeleportScenario(a=a, r1=r1, gamma=0.05, times=tuple(np.linspace(0, 25, 500)))
            ser = run_pseudo(s)
            good = ser.f_av > 0.5 + 1e-3
            assert np.all(ser.e_n[good] > 0)


# -- markers -------------------------------------------------------------------------------


def synthetic(t, f, e_signed, omega=2.3):
    s = TeleportScenario(omega=omega, gamma=0.0, times=tuple(t))
    e = np.maximum(e_signed, 0.0)
    return FidelitySeries(t, t, t, f, e, e_signed, None, s)


def test_markers_on_synthetic_series():
    om = 2.3
    t = np.linspace(0, 40, 4001)
    f = 0.5 + 0.4 * np.exp(-t / 10) * np.cos(2 * om * t) - 0.1
    e = 1.0 - t / 30.0
    m = extract_markers(synthetic(t, f, e, om))
    assert m.late_spacing == pytest.approx(math.pi / om, rel=1e-3)
    assert m.t_de == pytest.approx(30.0, abs=1e-9)
    # envelope 0.4 + 0.4 e^{-t/10} falls to 1/2 at t = 10 ln 4
    assert m.t_half == pytest.approx(10 * math.log(4), abs=math.pi / om)
    assert np.all(np.diff(m.peaks_t) > 0)


def test_markers_reject_undersampling():
    t = np.linspace(0, 40, 50)
    with pytest.raises(UnderSampled):
        extract_markers(synthetic(t, np.cos(t), 1 - t, 2.3))


def test_markers_without_sign_change():
    t = np.linspace(0, 10, 2001)
    m = extract_markers(synthetic(t, 0.6 + 0.2 * np.cos(4.6 * t), np.ones_like(t)))
    assert m.t_de is None and m.t_half is None


# -- physical mode and frames ------------------------------------------------------------------


def test_physical_mode_uses_advanced_time():
    s = TeleportScenario(gamma=0.02, mode="physical", tau2=1.0, times=(0.0, 0.4, 1.5))
    ser = run_physical(s)
    assert np.all(np.diff(ser.tau_adv) > 0)
    np.testing.assert_allclose(ser.tau_b, ser.tau_adv)
    assert np.all((ser.f_av >= 0) & (ser.f_av <= 1))
    with pytest.raises(InvalidScenario):
        run_pseudo(s)


def test_physical_oscillates_faster_than_pseudo():
    times = tuple(np.linspace(0, 6, 600))
    pseudo = run(TeleportScenario(gamma=0.02, times=times))
    phys = run(TeleportScenario(gamma=0.02, mode="physical", tau2=1.0, times=times))
    assert len(phys.markers.peaks_t) > len(pseudo.markers.peaks_t)


@pytest.mark.parametrize("t1", [0.1, 0.3, 0.45])
def test_collapse_is_frame_independent_on_the_light_cone(t1):
    s = TeleportScenario(gamma=0.05, mode="physical", tau2=1.0)
    out = collapse_consistency(s, t1)
    ref = np.abs(out["direct"]).max()
    for frame in ("minkowski", "quasi-rindler"):
        assert np.abs(out[frame] - out["direct"]).max() < 1e-10 * ref


def test_entanglement_depends_on_frame():
    a, b = 1.0, 2.0
    tau1 = np.linspace(0.05, 0.5, 10)
    q = run_pseudo(TeleportScenario(a=a, b=b, gamma=0.05, foliation="quasi-rindler",
                                    times=tuple(tau1)))
    # Minkowski slices through the same Rob proper times
    t_m = np.sinh(a * tau1) / a
    m = run_pseudo(TeleportScenario(a=a, b=b, gamma=0.05, times=tuple(t_m)))
    np.testing.assert_allclose(m.tau_b, q.tau_b, rtol=1e-12)
    assert np.max(np.abs(m.e_n - q.e_n)) > 1e-4
