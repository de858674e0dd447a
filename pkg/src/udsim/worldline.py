"""Prescribed timelike worldlines in d-dimensional Minkowski space.

Every trajectory moves along the x¹ axis and is parameterised by proper time.
Natural units ħ = c = 1; signature (−, +, …, +).  A worldline is described by
its rapidity θ(τ), so the four-velocity is (cosh θ, sinh θ, 0, …) and the
scalar proper acceleration is |dθ/dτ|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from .errors import DimensionMismatch, NoIntersection

__all__ = [
    "Worldline",
    "Inertial",
    "StaticAt",
    "UniformAcceleration",
    "TruncatedUniform",
    "AsymptoticUniform",
    "interval_sq",
    "proper_accel_scalar",
    "advanced_time",
    "retarded_time",
    "position",
]


def _sinhc_sq_minus_one(y):
    """sinh²(y)/y² − 1, accurate for small |y|."""
    y = np.abs(np.asarray(y, dtype=float))
    y2 = y * y
    series = y2 * (1 / 3 + y2 * (2 / 45 + y2 * (1 / 315 + y2 * (2 / 14175 + y2 * 2 / 467775))))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        direct = (np.sinh(y) / y) ** 2 - 1.0
    direct = np.where(np.isnan(direct), np.inf, direct)
    return np.where(y < 0.2, series, direct)


def _check_dimension(d: int) -> None:
    if not (isinstance(d, (int, np.integer)) and 2 <= d <= 6):
        raise ValueError(f"dimension must be an integer in 2..6, got {d!r}")


def _transverse(offset, d: int) -> np.ndarray:
    """Spatial offset vector (x¹ … x^{d-1}) from a scalar or a sequence."""
    off = np.zeros(d - 1)
    if np.ndim(offset) == 0:
        off[0] = float(offset)
    else:
        vals = np.asarray(offset, dtype=float)
        if vals.size > d - 1:
            raise DimensionMismatch(f"offset has {vals.size} components for d={d}")
        off[: vals.size] = vals
    return off


class Worldline:
    """Base class.  Subclasses define the rapidity profile and origin point."""

    dimension: int

    # -- profile, overridden by subclasses ---------------------------------
    def rapidity(self, tau):
        raise NotImplementedError

    def rapidity_rate(self, tau):
        raise NotImplementedError

    def _origin(self) -> np.ndarray:
        """Spacetime point at τ = 0."""
        raise NotImplementedError

    def _exp_integral(self, lo, hi, sign: int):
        """∫_lo^hi exp(sign·θ(τ)) dτ, vectorised over lo/hi."""
        raise NotImplementedError

    # -- asymptotic null data used for horizon detection -------------------
    def future_null_limit(self) -> float | None:
        """lim_{τ→+∞} (t − x¹) if finite (a future horizon exists), else None."""
        return None

    def past_null_limit(self) -> float | None:
        """lim_{τ→−∞} (t + x¹) if finite (a past horizon exists), else None."""
        return None

    # -- kinematics ---------------------------------------------------------
    def position(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        ip = self._exp_integral(np.zeros_like(tau), tau, +1)
        im = self._exp_integral(np.zeros_like(tau), tau, -1)
        out = np.broadcast_to(self._origin(), tau.shape + (self.dimension,)).copy()
        out[..., 0] += 0.5 * (ip + im)
        out[..., 1] += 0.5 * (ip - im)
        return out

    def velocity(self, tau) -> np.ndarray:
        th = np.asarray(self.rapidity(tau), dtype=float)
        out = np.zeros(th.shape + (self.dimension,))
        out[..., 0] = np.cosh(th)
        out[..., 1] = np.sinh(th)
        return out

    def accel_scalar(self, tau):
        return np.abs(self.rapidity_rate(tau))

    def self_interval_sq(self, u, s):
        """(Δz)² between z(u) and z(u − s) on this worldline, cancellation free.

        For motion in the (t, x¹) plane, −(Δz)² = (Δt − Δx)(Δt + Δx), and both
        light-cone differences are positive integrals of exp(∓θ).
        """
        u = np.asarray(u, dtype=float)
        s = np.asarray(s, dtype=float)
        lo = u - np.abs(s)
        return -self._exp_integral(lo, u, +1) * self._exp_integral(lo, u, -1)

    def kinks(self) -> tuple[float, ...]:
        """Proper times where the acceleration is discontinuous."""
        return ()

    def interval_excess(self, u, s):
        """e(u, s) = −(Δz)²/s² − 1 ≥ 0, computed without cancellation.

        With m± the mean of exp(±θ) over [u − s, u] one has −(Δz)²/s² = m₊m₋.
        Writing θ = θ̄ + δ with θ̄ the mean rapidity, m± = e^{±θ̄}(1 + p±) where
        p± = mean(expm1(±δ) ∓ δ) = O(δ²), so e = p₊ + p₋ + p₊p₋.
        """
        u = np.asarray(u, dtype=float)
        s = np.asarray(s, dtype=float)
        u_b, s_b = np.broadcast_arrays(u, s)
        direct = -self.self_interval_sq(u_b, s_b) / s_b**2 - 1.0
        out = np.array(direct, dtype=float, ndmin=1).reshape(u_b.shape) if u_b.shape else np.array(direct, dtype=float)
        small = np.asarray(direct < 0.05)
        if np.any(small):
            x, w = np.polynomial.legendre.leggauss(24)
            w = 0.5 * w
            for idx in zip(*np.nonzero(np.atleast_1d(small))) if u_b.shape else [()]:
                hi = float(u_b[idx])
                lo = hi - abs(float(s_b[idx]))
                cuts = [lo] + [k for k in self.kinks() if lo < k < hi] + [hi]
                nodes, weights = [], []
                for c0, c1 in zip(cuts[:-1], cuts[1:]):
                    nodes.append(0.5 * (c0 + c1) + 0.5 * (c1 - c0) * x)
                    weights.append(w * (c1 - c0) / (hi - lo))
                nodes = np.concatenate(nodes)
                weights = np.concatenate(weights)
                th = np.asarray(self.rapidity(nodes), dtype=float)
                dev = th - np.sum(weights * th)
                p_plus = np.sum(weights * (np.expm1(dev) - dev))
                p_minus = np.sum(weights * (np.expm1(-dev) + dev))
                val = p_plus + p_minus + p_plus * p_minus
                if u_b.shape:
                    out[idx] = val
                else:
                    out = np.array(val)
        return out[()] if out.ndim == 0 else out

    def is_stationary_on(self, lo: float, hi: float) -> bool:
        """True if the proper acceleration is constant and the motion is a
        single hyperbola/line over ``[lo, hi]`` (a timelike Killing orbit)."""
        return False

    def stationary_accel(self) -> float | None:
        """Constant proper acceleration if the entire worldline is stationary."""
        return None


@dataclass(frozen=True)
class Inertial(Worldline):
    """Uniform motion with speed ``velocity`` along x¹ through ``offset`` at τ = 0."""

    velocity_x: float = 0.0
    offset: float | Sequence[float] = 0.0
    dimension: int = 4

    def __post_init__(self):
        _check_dimension(self.dimension)
        if not abs(self.velocity_x) < 1.0:
            raise ValueError("inertial speed must be below the speed of light")

    @property
    def _theta(self) -> float:
        return math.atanh(self.velocity_x)

    def rapidity(self, tau):
        return np.full(np.shape(tau), self._theta)

    def rapidity_rate(self, tau):
        return np.zeros(np.shape(tau))

    def _origin(self):
        return np.concatenate([[0.0], _transverse(self.offset, self.dimension)])

    def _exp_integral(self, lo, hi, sign):
        return (np.asarray(hi) - np.asarray(lo)) * math.exp(sign * self._theta)

    def self_interval_sq(self, u, s):
        s = np.asarray(s, dtype=float)
        return -s * s + 0.0 * np.asarray(u)

    def interval_excess(self, u, s):
        return 0.0 * (np.asarray(s, dtype=float) + np.asarray(u, dtype=float))

    def is_stationary_on(self, lo, hi):
        return True

    def stationary_accel(self):
        return 0.0


class StaticAt(Inertial):
    """At rest at spatial position ``x`` (scalar x¹ or full vector)."""

    def __init__(self, x: float | Sequence[float] = 0.0, dimension: int = 4):
        super().__init__(velocity_x=0.0, offset=x, dimension=dimension)

    @property
    def x(self):
        return self.offset

    def __repr__(self):
        return f"StaticAt(x={self.offset!r}, dimension={self.dimension})"


@dataclass(frozen=True)
class UniformAcceleration(Worldline):
    """Rindler hyperbola ``(sinh aτ / a, cosh aτ / a + offset, 0, …)``."""

    a: float
    offset: float | Sequence[float] = 0.0
    dimension: int = 4

    def __post_init__(self):
        _check_dimension(self.dimension)
        if not self.a > 0:
            raise ValueError("proper acceleration must be positive")

    def rapidity(self, tau):
        return self.a * np.asarray(tau, dtype=float)

    def rapidity_rate(self, tau):
        return np.full(np.shape(tau), float(self.a))

    def _origin(self):
        o = _transverse(self.offset, self.dimension)
        o[0] += 1.0 / self.a
        return np.concatenate([[0.0], o])

    def _exp_integral(self, lo, hi, sign):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        a = self.a
        # exp(±a lo) · expm1(±a (hi − lo)) / (±a)
        return np.exp(sign * a * lo) * np.expm1(sign * a * (hi - lo)) / (sign * a)

    def position(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.broadcast_to(self._origin(), tau.shape + (self.dimension,)).copy()
        out[..., 0] = np.sinh(self.a * tau) / self.a
        out[..., 1] += (np.cosh(self.a * tau) - 1.0) / self.a
        return out

    def self_interval_sq(self, u, s):
        s = np.asarray(s, dtype=float)
        with np.errstate(over="ignore"):
            return -(4.0 / self.a**2) * np.sinh(0.5 * self.a * s) ** 2 + 0.0 * np.asarray(u)

    def interval_excess(self, u, s):
        return _sinhc_sq_minus_one(0.5 * self.a * np.asarray(s, dtype=float)) + 0.0 * np.asarray(u)

    def future_null_limit(self):
        return -float(_transverse(self.offset, self.dimension)[0])

    def past_null_limit(self):
        return float(_transverse(self.offset, self.dimension)[0])

    def is_stationary_on(self, lo, hi):
        return True

    def stationary_accel(self):
        return float(self.a)


class TruncatedUniform(UniformAcceleration):
    """Uniform acceleration up to proper time ``tau2``, inertial afterwards.

    The inertial continuation keeps the instantaneous velocity at ``tau2``, so
    position and velocity are continuous there (C¹ matching).
    """

    def __init__(self, a: float, tau2: float = math.inf,
                 offset: float | Sequence[float] = 0.0, dimension: int = 4):
        object.__setattr__(self, "tau2", float(tau2))
        super().__init__(a=a, offset=offset, dimension=dimension)

    def __repr__(self):
        return (f"TruncatedUniform(a={self.a!r}, tau2={self.tau2!r}, "
                f"offset={self.offset!r}, dimension={self.dimension})")

    def __eq__(self, other):
        return type(other) is TruncatedUniform and (
            (self.a, self.tau2, self.offset, self.dimension)
            == (other.a, other.tau2, other.offset, other.dimension))

    def __hash__(self):
        return hash(("TruncatedUniform", self.a, self.tau2, str(self.offset), self.dimension))

    def __post_init__(self):
        super().__post_init__()
        if not self.tau2 > 0:
            raise ValueError("cutoff proper time tau2 must be positive")

    def rapidity(self, tau):
        return self.a * np.minimum(np.asarray(tau, dtype=float), self.tau2)

    def rapidity_rate(self, tau):
        tau = np.asarray(tau, dtype=float)
        return np.where(tau < self.tau2, float(self.a), 0.0)

    def _exp_integral(self, lo, hi, sign):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        t2 = self.tau2
        lo_c = np.minimum(lo, t2)
        hi_c = np.minimum(hi, t2)
        curved = UniformAcceleration._exp_integral(self, lo_c, hi_c, sign)
        if not math.isfinite(t2):
            return curved
        straight = (np.maximum(hi, t2) - np.maximum(lo, t2)) * math.exp(sign * self.a * t2)
        return curved + straight

    def position(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = UniformAcceleration.position(self, np.minimum(tau, self.tau2))
        if math.isfinite(self.tau2):
            extra = np.maximum(tau - self.tau2, 0.0)
            out[..., 0] += extra * math.cosh(self.a * self.tau2)
            out[..., 1] += extra * math.sinh(self.a * self.tau2)
        return out

    def self_interval_sq(self, u, s):
        return Worldline.self_interval_sq(self, u, s)

    def kinks(self):
        return (self.tau2,) if math.isfinite(self.tau2) else ()

    def interval_excess(self, u, s):
        u = np.asarray(u, dtype=float)
        s = np.abs(np.asarray(s, dtype=float))
        if np.all(u <= self.tau2):
            return UniformAcceleration.interval_excess(self, u, s)
        if np.all(u - s >= self.tau2):
            return 0.0 * (u + s)
        return Worldline.interval_excess(self, u, s)

    def future_null_limit(self):
        if math.isfinite(self.tau2):
            return None
        return super().future_null_limit()

    def is_stationary_on(self, lo, hi):
        return hi <= self.tau2

    def stationary_accel(self):
        return float(self.a) if not math.isfinite(self.tau2) else None


@dataclass(frozen=True)
class AsymptoticUniform(Worldline):
    """Inertial in the far past, uniformly accelerated with ``a`` in the far future.

    The proper acceleration follows the tanh ramp a(τ) = (a/2)(1 + tanh(τ/width)),
    so θ(τ) = (a/2)(τ + width·ln cosh(τ/width)).  At τ = 0 the rapidity
    vanishes and the detector sits at ``(0, offset)``.  Positions come from
    composite Gauss–Legendre quadrature of exp(±θ).
    """

    a: float
    width: float = 1.0
    offset: float | Sequence[float] = 0.0
    dimension: int = 4
    panel_order: int = 16

    def __post_init__(self):
        _check_dimension(self.dimension)
        if not (self.a > 0 and self.width > 0):
            raise ValueError("a and width must be positive")

    def rapidity(self, tau):
        tau = np.asarray(tau, dtype=float)
        x = tau / self.width
        # ln cosh x computed without overflow
        lncosh = np.abs(x) + np.log1p(np.exp(-2 * np.abs(x))) - math.log(2.0)
        return 0.5 * self.a * (tau + self.width * lncosh)

    def rapidity_rate(self, tau):
        return 0.5 * self.a * (1.0 + np.tanh(np.asarray(tau, dtype=float) / self.width))

    def _origin(self):
        return np.concatenate([[0.0], _transverse(self.offset, self.dimension)])

    def _exp_integral(self, lo, hi, sign):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        lo_b, hi_b = np.broadcast_arrays(lo, hi)
        out = np.empty(lo_b.shape)
        h = 0.5 * min(self.width, 1.0 / self.a)
        x, w = np.polynomial.legendre.leggauss(self.panel_order)
        for idx in np.ndindex(lo_b.shape):
            a_, b_ = float(lo_b[idx]), float(hi_b[idx])
            if a_ == b_:
                out[idx] = 0.0
                continue
            n = max(1, int(math.ceil(abs(b_ - a_) / h)))
            edges = np.linspace(a_, b_, n + 1)
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[1:] + edges[:-1])
            nodes = mid[:, None] + half[:, None] * x[None, :]
            out[idx] = np.sum(np.exp(sign * self.rapidity(nodes)) * w[None, :] * half[:, None])
        return out if out.shape else float(out)

    def future_null_limit(self):
        # t − x¹ = −offset + ∫_0^τ e^{−θ}; θ ≥ aτ − const at late times, so it converges
        tail = self._exp_integral(0.0, 60.0 / self.a + 60.0 * self.width, -1)
        return -float(_transverse(self.offset, self.dimension)[0]) + float(tail)


def position(w: Worldline, tau):
    """Spacetime point(s) z(τ) on ``w``."""
    return w.position(tau)


def interval_sq(w1: Worldline, tau1, w2: Worldline, tau2):
    """Lorentzian squared interval between z₁(τ₁) and z₂(τ₂); negative if timelike."""
    if w1.dimension != w2.dimension:
        raise DimensionMismatch(f"dimensions differ: {w1.dimension} vs {w2.dimension}")
    if w1 is w2 or w1 == w2:
        t1 = np.asarray(tau1, dtype=float)
        t2 = np.asarray(tau2, dtype=float)
        return w1.self_interval_sq(np.maximum(t1, t2), np.abs(t1 - t2))
    dz = w1.position(tau1) - w2.position(tau2)
    return -dz[..., 0] ** 2 + np.sum(dz[..., 1:] ** 2, axis=-1)


def proper_accel_scalar(w: Worldline, tau):
    """Scalar proper acceleration sqrt(z̈·z̈) at proper time τ."""
    out = w.accel_scalar(tau)
    return float(out) if np.ndim(out) == 0 else out


def _spatial_distance(points: np.ndarray, event: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((points[..., 1:] - event[1:]) ** 2, axis=-1))


def _bracket(f, start: float, increasing: bool, want_positive: bool, limit: float = 1e7):
    """Walk from ``start`` with doubling steps until f changes to the wanted sign."""
    step = 1.0
    tau = start
    direction = 1.0 if (increasing == want_positive) else -1.0
    while abs(tau - start) < limit:
        val = f(tau)
        if (val >= 0) == want_positive:
            return tau
        tau += direction * step
        step *= 2.0
    return None


def advanced_time(event, w: Worldline, tol: float = 1e-12) -> float:
    """Smallest proper time at which ``w`` enters the closed future lightcone of ``event``.

    Raises :class:`NoIntersection` when the worldline stays outside the
    future lightcone forever (the event lies behind its future horizon).
    """
    event = np.asarray(event, dtype=float)
    if event.shape != (w.dimension,):
        raise DimensionMismatch("event dimension does not match the worldline")
    te, xe = event[0], event[1]
    transverse = float(np.sum(event[2:] ** 2)) > 0 or np.any(w._origin()[2:] != 0)

    def gap(tau):
        p = w.position(tau)
        return p[0] - te - _spatial_distance(p, event)

    lim = w.future_null_limit()
    if lim is not None and lim + xe - te <= 0.0:
        raise NoIntersection("receiver never enters the future lightcone (behind its horizon)")

    # closed forms
    if isinstance(w, Inertial) and w.velocity_x == 0.0:
        return float(te + _spatial_distance(w._origin()[None, :], event)[0])
    if type(w) is UniformAcceleration and not transverse:
        off = float(_transverse(w.offset, w.dimension)[0])
        tau = -math.log(w.a * (xe - te - off)) / w.a
        if w.position(tau)[1] >= xe:
            return tau

    hi = _bracket(gap, max(te, 0.0), increasing=True, want_positive=True)
    if hi is None:
        raise NoIntersection("no future lightcone crossing found")
    lo = _bracket(gap, hi, increasing=True, want_positive=False)
    if lo is None:
        raise NoIntersection("could not bracket the lightcone crossing from below")
    if gap(hi) == 0.0:
        return float(hi)
    return float(optimize.brentq(gap, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))


def retarded_time(event, w: Worldline, tol: float = 1e-12) -> float:
    """Largest proper time at which ``w`` is in the closed past lightcone of ``event``."""
    event = np.asarray(event, dtype=float)
    if event.shape != (w.dimension,):
        raise DimensionMismatch("event dimension does not match the worldline")
    te, xe = event[0], event[1]

    def gap(tau):
        p = w.position(tau)
        return te - p[0] - _spatial_distance(p, event)

    lim = w.past_null_limit()
    if lim is not None and te + xe - lim <= 0.0:
        raise NoIntersection("event is behind the worldline's past horizon")
    if isinstance(w, Inertial) and w.velocity_x == 0.0:
        return float(te - _spatial_distance(w._origin()[None, :], event)[0])

    lo = _bracket(gap, min(te, 0.0), increasing=False, want_positive=True)
    if lo is None:
        raise NoIntersection("no past lightcone crossing found")
    hi = _bracket(gap, lo, increasing=False, want_positive=False)
    if hi is None:
        raise NoIntersection("could not bracket the lightcone crossing from above")
    if gap(lo) == 0.0:
        return float(lo)
    return float(optimize.brentq(gap, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))
