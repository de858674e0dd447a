"""Transition probabilities and sharp-switching transition rates.

All functions return the response function 𝓕(ω) (or its derivative with
respect to the switch-off time), without the detector-specific factor
λ²|⟨0|Q|ω⟩|²; :func:`transition_probability` applies that factor.

The integrands are written so that the short-distance singularity of the
kernel cancels analytically: for a worldline moving in the (t, x¹) plane the
self interval is (Δz)² = −s²(1 + e) with e computed directly by
:meth:`Worldline.interval_excess`, never by subtracting nearly equal numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import quadrature as quad
from .errors import (DimensionMismatch, NonConstantAcceleration, PoorFit,
                     UnsupportedDimension)
from .field_kernel import WightmanKernel, null_guard
from .switching import SwitchingFunction
from .worldline import Worldline

__all__ = [
    "RateResult",
    "ProbeResult",
    "transition_rate",
    "response_function",
    "divergence_probe",
    "transition_probability",
    "rate_integrand",
]

PI = math.pi


@dataclass(frozen=True)
class RateResult:
    """A transition rate with its boundary-term breakdown.

    ``value == integral + sum(boundary_terms.values())`` up to rounding.
    """

    value: float
    integral: float
    boundary_terms: dict = field(default_factory=dict)
    error_estimate: float = 0.0
    meta: dict = field(default_factory=dict)

    def recombined(self) -> float:
        return self.integral + math.fsum(self.boundary_terms.values())


@dataclass(frozen=True)
class ProbeResult:
    coefficient: float  # of ln(1/δ)
    remainder: float
    residual: float
    linear: float = 0.0  # coefficient of the O(δ) correction, if fitted
    stderr: float = 0.0  # standard error of ``coefficient`` from the fit


# --------------------------------------------------------------------------
# stable elementary pieces


def _sin_minus_x_over_x3(x):
    """(sin x − x)/x³."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    series = -1 / 6 + x2 * (1 / 120 + x2 * (-1 / 5040 + x2 / 362880))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (np.sin(x) - x) / (x2 * x)
    return np.where(np.abs(x) < 0.1, series, direct)


def _cos_taylor2_over_x4(x):
    """(cos x − 1 + x²/2)/x⁴."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    series = 1 / 24 + x2 * (-1 / 720 + x2 * (1 / 40320 - x2 / 3628800))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (np.cos(x) - 1.0 + 0.5 * x2) / (x2 * x2)
    return np.where(np.abs(x) < 0.2, series, direct)


def _one_minus_cos_over_x2(x):
    """(1 − cos x)/x²."""
    return 0.5 * np.sinc(np.asarray(x, dtype=float) / (2 * PI)) ** 2


def _csch4_remainder(y):
    """1/sinh⁴y − 1/y⁴ + 2/(3y²)."""
    y = np.abs(np.asarray(y, dtype=float))
    y2 = y * y
    series = 11 / 45 + y2 * (-62 / 945 + y2 * (41 / 2835 + y2 * (-62 / 22275 + y2 * (
        20662 / 42567525 + y2 * (-13684 / 174139875)))))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = 1.0 / np.sinh(y) ** 4 - 1.0 / y2**2 + 2.0 / (3.0 * y2)
    return np.where(y < 0.25, series, direct)


# --------------------------------------------------------------------------
# integrands


def _check(d: int, w: Worldline, kernel: WightmanKernel | None) -> WightmanKernel:
    if d not in (2, 3, 4, 5, 6):
        raise UnsupportedDimension(f"dimension {d} not supported")
    if w.dimension != d:
        raise DimensionMismatch(f"worldline is {w.dimension}-dimensional, rate asked for d={d}")
    if kernel is None:
        kernel = WightmanKernel(d)
    if kernel.dimension != d:
        raise DimensionMismatch(f"kernel is {kernel.dimension}-dimensional, rate asked for d={d}")
    return kernel


def rate_integrand(d: int, w: Worldline, omega: float, u, s, kernel: WightmanKernel,
                   accel: float | None = None):
    """Integrand of the sharp-switching rate formula at proper time ``u``, gap ``s``.

    d = 2, 3: 2 Re[e^{−iωs} W₀];  d = 4: the same plus 1/(2π²s²);
    d = 5, 6: the bracketed integrands of the massless Minkowski formulas
    including their 1/(4π²) and 1/(2π³) prefactors.  ``accel`` is required
    for d = 6 (the constant proper acceleration).
    """
    s = np.asarray(s, dtype=float)
    x = omega * s
    if d == 6:
        a = float(accel)
        h = (a**4 / 16.0) * _csch4_remainder(0.5 * a * s) if a != 0 else 0.0 * s
        val = (np.cos(x) * h + omega**4 * _cos_taylor2_over_x4(x)
               + (a * a * omega * omega / 6.0) * _one_minus_cos_over_x2(x))
        return val / (2 * PI**3)
    e = np.asarray(w.interval_excess(u, s), dtype=float)
    if kernel.custom is not None:
        dz2 = -s * s * (1.0 + e)
        null_guard(dz2, s * s)
        val = 2.0 * np.real(np.exp(-1j * x) * kernel.from_interval(dz2))
        return val + (1.0 / (2 * PI**2 * s * s) if d == 4 else 0.0)
    if d == 4:
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(e > 1.0, 1.0 / (1.0 + 1.0 / e), e / (1.0 + e))
        return (2.0 * np.sin(0.5 * x) ** 2 + np.cos(x) * frac) / (2 * PI**2 * s * s)
    if d == 3:
        return -np.sin(x) / (2 * PI * s * np.sqrt(1.0 + e))
    if d == 2:
        log = np.log(kernel.mu**2 * s * s) + np.log1p(e)
        return -np.cos(x) * log / (2 * PI) - 0.5 * np.sin(x)
    # d == 5
    corr = np.expm1(-1.5 * np.log1p(e))
    sinc = omega * np.sinc(x / PI)  # sin(ωs)/s
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(s > 0, sinc * corr / (s * s), 0.0)
    return (omega**3 * _sin_minus_x_over_x3(x) + tail) / (4 * PI**2)


def _tail_weight(d: int, w: Worldline, u: float, kernel: WightmanKernel, accel):
    """Slowly varying amplitude f(s) with the far integrand = f(s)·cos/sin(ωs)."""
    if d == 6:
        a = float(accel)

        def f6(s):
            if a == 0:
                return 1.0 / (2 * PI**3 * s**4)
            y = 0.5 * a * s
            if y > 350:
                return 0.0
            return a**4 / (16.0 * math.sinh(y) ** 4) / (2 * PI**3)
        return f6, "cos"

    def dz2(s):
        return float(w.self_interval_sq(u, s))

    if d == 4:
        return (lambda s: 1.0 / (2 * PI**2 * dz2(s))), "cos"
    if d == 3:
        return (lambda s: -1.0 / (2 * PI * math.sqrt(-dz2(s)))), "sin"
    if d == 5:
        return (lambda s: (-dz2(s)) ** -1.5 / (4 * PI**2)), "sin"
    raise ValueError("the infinite-duration limit is not defined for d=2")


def _constant_accel(w: Worldline, lo: float, hi: float) -> float:
    if w.is_stationary_on(lo, hi):
        return float(np.atleast_1d(w.accel_scalar(hi))[0])
    if not math.isfinite(lo):
        raise NonConstantAcceleration("acceleration is not constant over the infinite past")
    grid = np.linspace(lo, hi, 513)
    acc = np.asarray(w.accel_scalar(grid), dtype=float)
    if acc.max() - acc.min() > 1e-10 * max(1.0, float(acc.max())):
        raise NonConstantAcceleration(
            "d=6 rate needs constant scalar proper acceleration on the detection window")
    return float(acc.mean())


def transition_rate(d: int, w: Worldline, omega: float, tau: float, delta_tau: float,
                    kernel: WightmanKernel | None = None, rel_tol: float = 1e-9,
                    abs_tol: float = 1e-13, tail_start: float | None = None) -> RateResult:
    """Sharp-switching transition rate at switch-off time ``tau`` after a window ``delta_tau``.

    ``delta_tau = math.inf`` gives the infinite-duration limit for d = 3…6:
    the integral is taken numerically up to a cut L, the oscillatory far part
    is added by a Fourier-weighted quadrature and the counterterm tails are
    integrated in closed form.
    """
    kernel = _check(d, w, kernel)
    omega = float(omega)
    tau = float(tau)
    if not delta_tau > 0:
        raise ValueError("delta_tau must be positive")
    infinite = not math.isfinite(delta_tau)
    if infinite and d == 2:
        raise ValueError("the d=2 rate has no infinite-duration limit")

    accel = None
    if d == 6:
        accel = _constant_accel(w, tau - delta_tau, tau)

    terms: dict[str, float] = {}
    if d == 3:
        terms["constant"] = 0.25
    elif d == 4:
        terms["constant"] = -omega / (4 * PI)
    elif d == 5:
        a_tau = float(np.atleast_1d(w.accel_scalar(tau))[0])
        terms["constant"] = (4 * omega**2 + a_tau**2) / (64 * PI)
    elif d == 6:
        terms["constant"] = -omega * (omega**2 + accel**2) / (24 * PI**2)

    if infinite:
        if tail_start is None:
            scale = 2 * PI / abs(omega) if omega != 0 else 1.0
            tail_start = min(max(20.0, 20.0 * scale), 2000.0)
        upper = float(tail_start)
    else:
        upper = float(delta_tau)
        if d == 4:
            terms["window"] = 1.0 / (2 * PI**2 * delta_tau)
        elif d == 5:
            terms["window"] = -omega / (4 * PI**2 * delta_tau)
        elif d == 6:
            k = 3 * omega**2 + accel**2
            terms["window"] = k / (12 * PI**3 * delta_tau) - 1.0 / (6 * PI**3 * delta_tau**3)

    pts = [tau - k for k in w.kinks() if 0.0 < tau - k < upper]
    res = quad.integrate_subtracted(
        lambda s: rate_integrand(d, w, omega, tau, s, kernel, accel),
        0.0, upper, rel_tol=rel_tol, abs_tol=abs_tol, points=pts)
    integral = res.value
    err = res.error_estimate

    if infinite:
        amp, kind = _tail_weight(d, w, tau, kernel, accel)
        tail = quad.integrate_fourier_tail(amp, upper, omega, kind=kind)
        terms["tail_oscillatory"] = tail.value
        err += tail.error_estimate
        L = upper
        if d == 4:
            terms["tail_counterterm"] = 1.0 / (2 * PI**2 * L)
        elif d == 5:
            terms["tail_counterterm"] = -omega / (4 * PI**2 * L)
        elif d == 6:
            k = 3 * omega**2 + accel**2
            terms["tail_counterterm"] = (k / (6 * L) - 1.0 / (3 * L**3)) / (2 * PI**3)

    value = integral + math.fsum(terms.values())
    meta = {"d": d, "omega": omega, "tau": tau, "delta_tau": delta_tau,
            "evaluations": res.evaluations}
    if d == 2:
        meta["ir_mass"] = kernel.mu
    if infinite:
        meta["tail_start"] = upper
    return RateResult(value=value, integral=integral, boundary_terms=terms,
                      error_estimate=err, meta=meta)


# --------------------------------------------------------------------------
# smooth switching


def response_function(d: int, chi: SwitchingFunction, w: Worldline, omega: float,
                      kernel: WightmanKernel | None = None, rel_tol: float = 1e-8,
                      abs_tol: float = 1e-12) -> float:
    """Response function 𝓕(ω) for a smooth switching χ in d = 2, 3, 4."""
    if d not in (2, 3, 4):
        raise UnsupportedDimension("response_function is defined for d = 2, 3, 4")
    kernel = _check(d, w, kernel)
    omega = float(omega)
    lo, hi = chi.support
    sq = chi.squared_integral()

    total = 0.0
    if d == 4:
        total += -omega / (4 * PI) * sq
        span = hi - lo
        jres = quad.integrate_subtracted(
            lambda s: chi.jump_integral(s) / (s * s), 0.0, span,
            rel_tol=rel_tol, abs_tol=abs_tol,
            points=[p for p in chi.jump_breakpoints() if 0 < p < span])
        total += (jres.value + sq / span) / (2 * PI**2)
    elif d == 3:
        total += 0.25 * sq

    if w.is_stationary_on(lo, hi):
        span = hi - lo
        res = quad.integrate_subtracted(
            lambda s: chi.autocorrelation(s) * rate_integrand(d, w, omega, hi, s, kernel),
            0.0, span, rel_tol=rel_tol, abs_tol=abs_tol,
            points=[p for p in chi.jump_breakpoints() if 0 < p < span])
    else:
        res = quad.integrate_2d_switch(
            lambda u, s: rate_integrand(d, w, omega, u, s, kernel), chi,
            rel_tol=max(rel_tol, 1e-7), abs_tol=abs_tol)
    return total + res.value


def transition_probability(response: float, coupling: float, matrix_element: complex) -> float:
    """P(ω) = λ² |⟨0|Q|ω⟩|² 𝓕(ω)."""
    return float(coupling**2 * abs(matrix_element) ** 2 * response)


def divergence_probe(w: Worldline, omega: float, tau0: float, tau: float,
                     deltas: Sequence[float], d: int = 4, kernel: WightmanKernel | None = None,
                     linear: bool = True, max_residual: float = 1e-3) -> ProbeResult:
    """Fit 𝓕(δ) = C ln(1/δ) + R (+ B δ) over a grid of ramp durations.

    The optional linear column absorbs the O(δ) change of ∫χ² and similar
    smooth corrections.  Raises :class:`PoorFit` if the rms residual exceeds
    ``max_residual``.
    """
    deltas = np.asarray(sorted(deltas), dtype=float)
    if deltas.size < 3 or deltas[-1] / deltas[0] < 10.0:
        raise ValueError("the δ-grid must have at least three points spanning a decade")
    values = np.array([response_function(d, SwitchingFunction(tau0, tau, dl), w, omega, kernel)
                       for dl in deltas])
    cols = [np.log(1.0 / deltas), np.ones_like(deltas)]
    if linear:
        cols.append(deltas)
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    misfit = A @ coef - values
    resid = float(np.sqrt(np.mean(misfit**2)))
    if resid > max_residual:
        raise PoorFit(f"fit residual {resid:.3g} exceeds {max_residual:.3g}")
    dof = max(1, len(values) - A.shape[1])
    cov = np.linalg.pinv(A.T @ A) * float(misfit @ misfit) / dof
    return ProbeResult(coefficient=float(coef[0]), remainder=float(coef[1]), residual=resid,
                       linear=float(coef[2]) if linear else 0.0,
                       stderr=float(math.sqrt(max(cov[0, 0], 0.0))))
