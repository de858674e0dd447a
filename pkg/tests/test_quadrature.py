import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import sici

from udsim import quadrature as quad
from udsim.errors import NonConvergence, SingularInterior
from udsim.switching import SwitchingFunction


def test_kronrod_rule_is_exact_for_degree_22():
    # 15-point Kronrod integrates polynomials up to degree 3*7+1 exactly
    for k in range(23):
        got = np.sum(quad.KRONROD_WEIGHTS * quad.NODES**k)
        want = 0.0 if k % 2 else 2.0 / (k + 1)
        assert got == pytest.approx(want, abs=1e-14)
    for k in range(14):
        got = np.sum(quad.GAUSS_WEIGHTS * quad.NODES**k)
        assert got == pytest.approx(0.0 if k % 2 else 2.0 / (k + 1), abs=1e-14)


def test_subtracted_cosine_integrand():
    res = quad.integrate_subtracted(lambda s: (1 - np.cos(s)) / s**2, 0.0, 1.0)
    si1 = sici(1.0)[0]
    assert res.value == pytest.approx(si1 - 1 + math.cos(1), rel=1e-10)
    assert res.value == pytest.approx(0.4863854, abs=1e-7)
    assert res.error_estimate >= 0


def test_inverse_sqrt_endpoint():
    res = quad.integrate_subtracted(lambda s: s**-0.5, 0.0, 1.0, rel_tol=1e-10)
    assert res.value == pytest.approx(2.0, rel=1e-9)


def test_oscillatory_sine_integral():
    res = quad.integrate_subtracted(lambda s: np.sinc(10 * s / np.pi) * 10, 0.0, 50.0)
    assert res.value == pytest.approx(sici(500.0)[0], rel=1e-9)
    assert res.value == pytest.approx(1.5725659, abs=1e-7)


def test_reversed_bounds_and_empty_interval():
    f = np.exp
    assert quad.integrate_subtracted(f, 1.0, 0.0).value == pytest.approx(-(math.e - 1))
    assert quad.integrate_subtracted(f, 0.3, 0.3).value == 0.0


def test_complex_and_stacked_integrands():
    res = quad.integrate_subtracted(lambda s: np.exp(1j * s), 0.0, math.pi)
    assert res.value == pytest.approx(2j, abs=1e-12)
    stacked = quad.integrate_subtracted(lambda s: np.stack([s, s**2]), 0.0, 1.0)
    np.testing.assert_allclose(stacked.value, [0.5, 1 / 3], rtol=1e-12)


def test_breakpoints_resolve_kinks():
    res = quad.integrate_subtracted(lambda s: np.abs(s - 0.3), 0.0, 1.0, points=[0.3])
    assert res.value == pytest.approx(0.5 * (0.09 + 0.49), rel=1e-13)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_integrable_singularity_is_reported():
    with pytest.raises((SingularInterior, NonConvergence)):
        quad.integrate_subtracted(lambda s: 1.0 / np.abs(s - 0.5), 0.0, 1.0, points=[0.5])  # noqa


def test_nonfinite_bounds_rejected():
    with pytest.raises(ValueError):
        quad.integrate_subtracted(np.exp, 0.0, math.inf)


def test_fourier_tail():
    # ∫_1^∞ cos(2s)/s ds = −Ci(2)
    res = quad.integrate_fourier_tail(lambda s: 1.0 / s, 1.0, 2.0, kind="cos")
    assert res.value == pytest.approx(-sici(2.0)[1], rel=1e-8)
    neg = quad.integrate_fourier_tail(lambda s: 1.0 / s, 1.0, -2.0, kind="sin")
    assert neg.value == pytest.approx(-(math.pi / 2 - sici(2.0)[0]), rel=1e-8)
    with pytest.raises(ValueError):
        quad.integrate_fourier_tail(lambda s: 1.0 / s, 1.0, 2.0, kind="tan")


def test_gauss_legendre_panels():
    x, w = quad.gauss_legendre_panels(0.0, 3.0, 0.5, order=8)
    assert x.size == 6 * 8
    assert np.sum(w * np.cos(x)) == pytest.approx(math.sin(3.0), rel=1e-14)
    assert quad.gauss_legendre_panels(1.0, 1.0, 0.1)[0].size == 0


def test_2d_switch_triangle_area():
    chi = SwitchingFunction(0.0, 5.0, 1e-3)
    res = quad.integrate_2d_switch(lambda u, s: np.ones_like(s), chi, rel_tol=1e-8)
    assert res.value == pytest.approx(12.5, rel=2e-3)


def test_2d_switch_exponential_kernel():
    T = 4.0
    chi = SwitchingFunction(0.0, T, 1e-4)
    res = quad.integrate_2d_switch(lambda u, s: np.exp(-s), chi, rel_tol=1e-8)
    assert res.value == pytest.approx(T - 1 + math.exp(-T), rel=1e-3)


def test_2d_switch_ignores_integrand_outside_support():
    chi = SwitchingFunction(0.0, 1.0, 0.1)
    # only gaps beyond the support width contribute, and those are cut off
    res = quad.integrate_2d_switch(lambda u, s: np.where(s > 1.3, 1e6, 0.0), chi)
    assert res.value == 0.0


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 4))
def test_linearity(alpha, beta, k):
    f = lambda s: np.cos(3 * s) + s**k
    g = lambda s: np.exp(-s) * s
    a = quad.integrate_subtracted(f, 0.0, 2.0).value
    b = quad.integrate_subtracted(g, 0.0, 2.0).value
    ab = quad.integrate_subtracted(lambda s: alpha * f(s) + beta * g(s), 0.0, 2.0).value
    assert ab == pytest.approx(alpha * a + beta * b, abs=1e-10 * (1 + abs(alpha) + abs(beta)))


@given(st.floats(0.5, 20.0))
def test_tolerance_refinement_is_consistent(omega):
    f = lambda s: (1 - np.cos(omega * s)) / s**2
    coarse = quad.integrate_subtracted(f, 0.0, 3.0, rel_tol=1e-6, abs_tol=1e-10)
    fine = quad.integrate_subtracted(f, 0.0, 3.0, rel_tol=5e-7, abs_tol=5e-11)
    assert abs(fine.value - coarse.value) <= max(coarse.error_estimate, 1e-14)


def test_result_is_deterministic():
    f = lambda s: np.sin(7 * s) / (s + 0.01)
    a = quad.integrate_subtracted(f, 0.0, 5.0)
    b = quad.integrate_subtracted(f, 0.0, 5.0)
    assert a.value == b.value and a.evaluations == b.evaluations
