"""Harmonic-oscillator detectors driven by the Minkowski vacuum.

Each detector obeys the renormalised Langevin equation

    Q̈ + 2γ Q̇ + Ω_r² Q = (λ/m₀) Φ(z(τ)),     γ = λ²/(8π m₀),

switched on at τ = 0.  Its solution is linear in the initial data (a-part)
and in the free field along the worldline (v-part):

    Q(T) = K₁(T) Q₀ + K₂(T) P₀/m₀ + (λ/m₀) ∫₀ᵀ K₂(T − t) Φ(z(t)) dt,
    K₂(t) = e^{−γt} sin(Ωt)/Ω,   K₁ = K₂' + 2γ K₂,   Ω = √(Ω_r² − γ²).

Symmetrised v-part correlators are double integrals of the kernels against
Re W₀.  On a single worldline Re W₀ is split into the inertial part
−1/(4π² s²), integrated exactly in terms of the entire exponential integral
Ein with a UV cutoff per corner of the integration square, and a bounded
remainder R that carries the dependence on the motion.  Cross terms between a
static detector and any other worldline reduce to a principal-value integral
with a closed-form inner part.

The UV cutoffs are ε₀ = e^{−Λ₀}/Ω_r at the switch-on corner and
ε₁ = e^{−Λ₁}/Ω_r at the running corner; with this normalisation the first
order in γ reproduces the perturbative offset (Λ₁ + Λ₀ − 2 ln(a/Ω_r)) in the
high-acceleration regime.  Λ₁ is never subtracted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import exp1

from .errors import InvalidState, UncertaintyViolation
from .gaussian_state import GaussianState, excited_population, vacuum
from .worldline import Inertial, UniformAcceleration, Worldline

__all__ = [
    "DetectorParams",
    "CorrelatorSeries",
    "Rho11History",
    "evolve_correlators",
    "rho11_history",
    "perturbative_rho11",
    "effective_temperature",
    "ein",
    "cross_vpart",
]

FOUR_PI_SQ = 4.0 * math.pi**2
EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class DetectorParams:
    """Oscillator detector parameters (units ħ = c = 1 unless ``hbar`` is set)."""

    m0: float = 1.0
    omega_r: float = 2.3
    gamma: float = 0.0
    lambda0: float = 20.0
    lambda1: float = 20.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.m0 > 0:
            raise ValueError("m0 must be positive")
        if not self.gamma >= 0:
            raise ValueError("gamma must be non-negative")
        if not self.omega_r > self.gamma:
            raise ValueError("only the underdamped regime omega_r > gamma is supported")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")

    @classmethod
    def from_bare(cls, omega: float, gamma: float = 0.0, **kw) -> "DetectorParams":
        """Build from Ω (the oscillation frequency of the damped kernel)."""
        return cls(omega_r=math.sqrt(omega * omega + gamma * gamma), gamma=gamma, **kw)

    @property
    def omega(self) -> float:
        return math.sqrt((self.omega_r - self.gamma) * (self.omega_r + self.gamma))

    @property
    def coupling(self) -> float:
        """λ = √(8π m₀ γ)."""
        return math.sqrt(8.0 * math.pi * self.m0 * self.gamma)

    @property
    def eps0(self) -> float:
        return math.exp(-self.lambda0) / self.omega_r

    @property
    def eps1(self) -> float:
        return math.exp(-self.lambda1) / self.omega_r

    @property
    def vpart_prefactor(self) -> float:
        """ħλ²/m₀²."""
        return 8.0 * math.pi * self.hbar * self.gamma / self.m0


# -- kernels as exponential sums -----------------------------------------------


def _exponents(p: DetectorParams) -> np.ndarray:
    return np.array([-p.gamma + 1j * p.omega, -p.gamma - 1j * p.omega])


def _coefficients(p: DetectorParams):
    """Coefficients of g_Q = K₂ and g_P = m₀K₂' on the exponentials e^{c_k u}."""
    c = _exponents(p)
    base = np.array([1.0, -1.0]) / (2j * p.omega)
    return {"Q": base, "P": p.m0 * c * base}


def _kernels(p: DetectorParams, t):
    """K₁, K₂ and their derivatives at times t."""
    t = np.asarray(t, dtype=float)
    om = p.omega
    damp = np.exp(-p.gamma * t)
    s, c = np.sin(om * t), np.cos(om * t)
    k2 = damp * s / om
    k2d = damp * (c - p.gamma / om * s)
    k1 = damp * (c + p.gamma / om * s)
    k1d = -p.omega_r**2 * k2
    return k1, k1d, k2, k2d


def _propagator(p: DetectorParams, times: np.ndarray) -> np.ndarray:
    """Block-diagonal a-part map on (Q…, P…) for per-detector elapsed times."""
    n = len(times)
    k1, k1d, k2, k2d = _kernels(p, times)
    M = np.zeros((2 * n, 2 * n))
    idx = np.arange(n)
    M[idx, idx] = k1
    M[idx, idx + n] = k2 / p.m0
    M[idx + n, idx] = p.m0 * k1d
    M[idx + n, idx + n] = k2d
    return M


def ein(z):
    """Entire exponential integral Ein(z) = ∫₀ᶻ (1 − e^{−t})/t dt (complex)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 2.0
    if np.any(small):
        zs = z[small]
        term = zs.copy()
        acc = zs.copy()
        for k in range(1, 40):
            term = term * (-zs) * k / ((k + 1) * (k + 1))
            acc = acc + term
        out[small] = acc
    big = ~small
    if np.any(big):
        zb = z[big]
        out[big] = exp1(zb) + np.log(zb) + EULER_GAMMA
    return out


def _phi(z: complex, x):
    """(e^{zx} − 1)/z, accurate for small zx."""
    x = np.asarray(x, dtype=float)
    if z == 0:
        return x.astype(complex)
    zx = z * x
    re, im = zx.real, zx.imag
    em1 = np.expm1(re) * np.cos(im) - 2.0 * np.sin(0.5 * im) ** 2 + 1j * np.exp(re) * np.sin(im)
    return em1 / z


# -- self terms: inertial singular part ------------------------------------------


def _singular_pair(p: DetectorParams, c: complex, d: complex, T: np.ndarray) -> np.ndarray:
    """Cutoff-regularised ∫∫_{[0,T]²} e^{c u₁ + d u₂} (u₁ − u₂)^{−2} du₁ du₂.

    The short-distance divergence near the corner u = 0 (running time) is cut at
    ε₁ and the one near u = T (switch-on) at ε₀; the result is exact up to O(ε).
    """
    T = np.asarray(T, dtype=float)
    out = np.zeros(T.shape, dtype=complex)
    pos = T > 0
    Tp = T[pos]
    z = c + d
    E = np.exp(z * Tp)
    log1 = math.log(1.0 / p.eps1)
    log0 = math.log(1.0 / p.eps0)
    ein_part = (E * (d * ein(d * Tp) + c * ein(c * Tp)) + c * ein(-c * Tp) + d * ein(-d * Tp)) / z
    out[pos] = -(1.0 + E) * np.log(Tp) - log1 - E * log0 + ein_part
    return out


def _self_singular(p: DetectorParams, T: np.ndarray) -> dict:
    """Inertial (−1/4π²s²) contribution to QQ, PP, PQ at times T (without prefactor)."""
    c = _exponents(p)
    coef = _coefficients(p)
    J = {(k, l): _singular_pair(p, c[k], c[l], T) for k in range(2) for l in range(k, 2)}
    J[(1, 0)] = J[(0, 1)]
    out = {}
    for name, (X, Y) in {"QQ": ("Q", "Q"), "PP": ("P", "P"), "PQ": ("P", "Q")}.items():
        acc = np.zeros(np.shape(T), dtype=complex)
        for k in range(2):
            for l in range(2):
                acc += coef[X][k] * coef[Y][l] * J[(k, l)]
        out[name] = -acc.real / FOUR_PI_SQ
    return out


# -- self terms: bounded remainder ------------------------------------------------


def _remainder_uniform(s, a: float):
    """R(s) = Re W₀ + 1/(4π²s²) on a hyperbola of proper acceleration a."""
    s = np.asarray(s, dtype=float)
    y = 0.5 * a * np.abs(s)
    y2 = y * y
    series = 1.0 / 3.0 - y2 / 15.0 + 2.0 * y2 * y2 / 189.0 - y2**3 / 675.0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        direct = 1.0 / y2 - 1.0 / np.sinh(y) ** 2
    body = np.where(y < 0.1, series, direct)
    return 0.25 * a * a * body / FOUR_PI_SQ


def _panel_edges(times: np.ndarray, hmax: float) -> tuple[np.ndarray, np.ndarray]:
    """Edges refining the sorted sample ``times`` (which start at 0) to width ≤ hmax,
    and the edge index of each sample."""
    edges = [np.array([times[0]])]
    where = [0]
    count = 0
    for lo, hi in zip(times[:-1], times[1:]):
        n = max(1, int(math.ceil((hi - lo) / hmax)))
        edges.append(np.linspace(lo, hi, n + 1)[1:])
        count += n
        where.append(count)
    return np.concatenate(edges), np.array(where)


_GL16 = np.polynomial.legendre.leggauss(16)
_GL8 = np.polynomial.legendre.leggauss(8)


def _panel_nodes(lo, hi, rule=_GL16):
    x, w = rule
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return mid[:, None] + half[:, None] * x[None, :], half[:, None] * w[None, :]


def _self_remainder_stationary(p: DetectorParams, accel: float, times: np.ndarray) -> dict:
    """∫∫ g_X(T−t₁) g_Y(T−t₂) R(|t₁−t₂|) for a stationary worldline.

    Reduced to one dimension: with ψ the density of pairs at gap s,
    S(T) = ∫₀ᵀ R(s) (e^{c s} + e^{d s}) φ(T − s) ds, φ(x) = (e^{(c+d)x} − 1)/(c + d),
    accumulated panel by panel through φ(x + h) = e^{(c+d)h} φ(x) + φ(h).
    """
    zero = {k: np.zeros(len(times)) for k in ("QQ", "PP", "PQ")}
    if accel == 0 or len(times) < 2:
        return zero
    hmax = min(1.0 / p.omega_r, 1.0 / accel)
    edges, where = _panel_edges(times, hmax)
    lo, hi = edges[:-1], edges[1:]
    nodes, weights = _panel_nodes(lo, hi)
    Rw = _remainder_uniform(nodes, accel) * weights
    c = _exponents(p)
    coef = _coefficients(p)
    S = {}
    for k, l in ((0, 0), (0, 1), (1, 1)):
        z = c[k] + c[l]
        ew = Rw * (np.exp(c[k] * nodes) + np.exp(c[l] * nodes))
        f = ew.sum(axis=1)
        inc = (ew * _phi(z, hi[:, None] - nodes)).sum(axis=1)
        h = hi - lo
        decay = np.exp(z * h)
        ph = _phi(z, h)
        acc = np.zeros(len(edges), dtype=complex)
        F = 0.0 + 0.0j
        cur = 0.0 + 0.0j
        for j in range(len(h)):
            cur = decay[j] * cur + ph[j] * F + inc[j]
            F += f[j]
            acc[j + 1] = cur
        S[(k, l)] = acc[where]
    S[(1, 0)] = S[(0, 1)]
    out = {}
    for name, (X, Y) in {"QQ": ("Q", "Q"), "PP": ("P", "P"), "PQ": ("P", "Q")}.items():
        tot = np.zeros(len(times), dtype=complex)
        for k in range(2):
            for l in range(2):
                tot += coef[X][k] * coef[Y][l] * S[(k, l)]
        out[name] = tot.real
    return out


def _max_accel(w: Worldline, T: float) -> float:
    probe = np.linspace(0.0, T, 257)
    return float(np.max(np.abs(w.rapidity_rate(probe))))


def _self_remainder_generic(p: DetectorParams, w: Worldline, times: np.ndarray) -> dict:
    """Same double integral for a non-stationary worldline, O(M²) in the nodes.

    Nodes are composite Gauss–Legendre points; the sum over the growing square
    is updated node by node with the kernel weights carried forward in time.
    """
    T_max = float(times[-1])
    amax = _max_accel(w, T_max)
    hmax = 0.5 / max(p.omega_r, amax, 1e-12)
    base, where = _panel_edges(times, hmax)
    kinks = [k for k in w.kinks() if 0 < k < T_max]
    edges = np.unique(np.concatenate([base, kinks]))
    where = np.searchsorted(edges, times)
    lo, hi = edges[:-1], edges[1:]
    nodes, weights = _panel_nodes(lo, hi, _GL8)
    per_panel = nodes.shape[1]
    nodes = nodes.ravel()
    weights = weights.ravel()
    diag = np.asarray(w.rapidity_rate(nodes), dtype=float) ** 2 / (12.0 * FOUR_PI_SQ)

    c = _exponents(p)
    pairs = ((0, 0), (0, 1), (1, 1))
    A = np.zeros((2, len(nodes)), dtype=complex)
    F = {pr: 0.0 + 0.0j for pr in pairs}
    S = {pr: np.zeros(len(edges), dtype=complex) for pr in pairs}
    t_prev = 0.0
    node = 0
    for j in range(len(lo)):
        for _ in range(per_panel):
            t = nodes[node]
            dt = t - t_prev
            step = np.exp(c * dt)
            A[:, :node] *= step[:, None]
            for pr in pairs:
                F[pr] *= step[pr[0]] * step[pr[1]]
            A[:, node] = weights[node]
            if node:
                s = t - nodes[:node]
                dz2 = w.self_interval_sq(np.full(node, t), s)
                e = -dz2 / (s * s) - 1.0
                row = e / ((1.0 + e) * FOUR_PI_SQ * s * s)
                rsum = A[:, :node] @ row
            else:
                rsum = np.zeros(2, dtype=complex)
            for k, l in pairs:
                F[(k, l)] += (A[k, node] * rsum[l] + A[l, node] * rsum[k]
                              + A[k, node] * A[l, node] * diag[node])
            t_prev = t
            node += 1
        # close the panel at its right edge
        shift = np.exp(c * (hi[j] - t_prev))
        for pr in pairs:
            S[pr][j + 1] = F[pr] * shift[pr[0]] * shift[pr[1]]
    coef = _coefficients(p)
    out = {}
    for name, (X, Y) in {"QQ": ("Q", "Q"), "PP": ("P", "P"), "PQ": ("P", "Q")}.items():
        tot = np.zeros(len(times), dtype=complex)
        for k in range(2):
            for l in range(2):
                pr = (min(k, l), max(k, l))
                tot += coef[X][k] * coef[Y][l] * S[pr][where]
        out[name] = tot.real
    return out


def _self_vpart(p: DetectorParams, w: Worldline, T) -> np.ndarray:
    """v-part [QQ, PP, PQ] of one detector at each of the proper times T."""
    T = np.asarray(T, dtype=float)
    res = np.zeros((len(T), 3))
    if p.gamma == 0 or len(T) == 0:
        return res
    times = np.unique(np.concatenate([[0.0], T]))
    sing = _self_singular(p, times)
    if w.is_stationary_on(0.0, float(times[-1])):
        accel = float(np.abs(w.rapidity_rate(0.0)))
        rem = _self_remainder_stationary(p, accel, times)
    else:
        rem = _self_remainder_generic(p, w, times)
    idx = np.searchsorted(times, T)
    pref = p.vpart_prefactor
    for col, key in enumerate(("QQ", "PP", "PQ")):
        val = pref * (sing[key] + rem[key])
        val[times == 0] = 0.0
        res[:, col] = val[idx]
    return res


# -- cross terms --------------------------------------------------------------------


def _is_static(w: Worldline) -> bool:
    return isinstance(w, Inertial) and w.velocity_x == 0.0


def _grading(width: float, at: float) -> np.ndarray:
    """Geometric offsets 0.15^k·width, stopping well above the float spacing at ``at``."""
    floor = 1e3 * np.finfo(float).eps * max(1.0, abs(at))
    k = np.arange(1, 15)
    off = width * 0.15**k
    return off[off > floor]


def _graded_edges(lo: float, hi: float, singular: Sequence[float], plain: Sequence[float],
                  hmax: float) -> np.ndarray:
    """Panel edges on [lo, hi] of width ≤ hmax, cut at ``plain`` points and
    geometrically refined towards each ``singular`` point (log singularities)."""
    singular = [x for x in singular if lo <= x <= hi]
    cuts = sorted({lo, hi, *singular, *[x for x in plain if lo < x < hi]})
    edges = [np.array([lo])]
    for a, b in zip(cuts[:-1], cuts[1:]):
        n = max(1, int(math.ceil((b - a) / hmax)))
        seg = np.linspace(a, b, n + 1)
        if a in singular:
            seg = np.concatenate([[a], (a + _grading(seg[1] - a, a))[::-1], seg[1:]])
        if b in singular:
            seg = np.concatenate([seg[:-1], b - _grading(b - seg[-2], b), [b]])
        edges.append(seg[1:])
    return np.concatenate(edges)


def _pv_piece(c: complex, TA: float, pole) -> np.ndarray:
    """e^{c TA} · PV∫₀^{TA} e^{−c t}/(t − pole) dt, via Ein (entire)."""
    y_hi = TA - pole
    y_lo = -pole
    y_hi = np.where(y_hi == 0, 1e-300, y_hi)
    y_lo = np.where(y_lo == 0, 1e-300, y_lo)
    val = (np.log(np.abs(y_hi)) - ein(c * y_hi)) - (np.log(np.abs(y_lo)) - ein(c * y_lo))
    return np.exp(c * y_hi) * val


def _cross_vpart(p: DetectorParams, wA: Worldline, TA: float, wB: Worldline,
                 lo: float, hi: float, TB: float) -> np.ndarray:
    """v-part ⟨X_A(TA), Y_B⟩ restricted to B's field times t₂ ∈ [lo, hi], with
    B's kernel anchored at TB; rows X ∈ (Q, P), columns Y ∈ (Q, P).

    A must be static.  For fixed t₂ the integral over A's time is a principal
    value with poles where B's point is null separated; it is done in closed
    form with Ein.  The outer integral uses graded Gauss–Legendre panels at
    the points where a pole crosses an endpoint (log singularities).
    """
    out = np.zeros((2, 2))
    if p.gamma == 0 or TA <= 0 or hi <= lo:
        return out
    xA = np.asarray(wA.position(0.0), dtype=float)[1:]

    def poles(t2):
        pos = np.asarray(wB.position(t2), dtype=float)
        rho = np.sqrt(np.sum((pos[..., 1:] - xA) ** 2, axis=-1))
        return pos[..., 0] - rho, pos[..., 0] + rho, rho

    amax = _max_accel(wB, hi) if hi > 0 else 0.0
    hmax = min(0.5, 1.0 / p.omega_r, 1.0 / amax if amax > 0 else 0.5)
    # roots just outside [lo, hi] still spoil plain panels: grade towards the
    # nearer endpoint in that case
    ext_lo, ext_hi = lo - hmax, hi + hmax
    singular = []
    for which in (0, 1):
        for target in (0.0, TA):
            f = lambda t, wh=which, tg=target: float(poles(t)[wh]) - tg
            flo, fhi = f(ext_lo), f(ext_hi)
            if flo * fhi > 0:
                continue
            root = ext_lo if flo == 0 else ext_hi if fhi == 0 else brentq(
                f, ext_lo, ext_hi, xtol=1e-14, rtol=1e-15)
            singular.append(min(max(root, lo), hi))
    edges = _graded_edges(lo, hi, singular, wB.kinks(), hmax)
    nodes, weights = _panel_nodes(edges[:-1], edges[1:])
    nodes = nodes.ravel()
    weights = weights.ravel()
    pm, pp, rho = poles(nodes)
    c = _exponents(p)
    coef = _coefficients(p)

    # c₋ = conj(c₊) and every argument is real, so its integral is the conjugate
    first = (_pv_piece(c[0], TA, pm) - _pv_piece(c[0], TA, pp)) / (2.0 * FOUR_PI_SQ * rho)
    inner = [first, np.conj(first)]
    outer = [np.exp(cl * (TB - nodes)) * weights for cl in c]
    M = np.array([[np.sum(inner[k] * outer[l]) for l in range(2)] for k in range(2)])
    for i, X in enumerate(("Q", "P")):
        for j, Y in enumerate(("Q", "P")):
            out[i, j] = np.real(coef[X] @ M @ coef[Y])
    return p.vpart_prefactor * out


def cross_vpart(p: DetectorParams, wA: Worldline, TA: float, wB: Worldline, TB: float,
                lo: float = 0.0, hi: float | None = None) -> np.ndarray:
    """v-part cross correlators [[⟨Q_A,Q_B⟩, ⟨Q_A,P_B⟩], [⟨P_A,Q_B⟩, ⟨P_A,P_B⟩]].

    ``lo``/``hi`` restrict B's field times (default the full history [0, TB]);
    restricted ranges are used to split an evolution at an intermediate time.
    """
    hi = TB if hi is None else hi
    if _is_static(wA):
        return _cross_vpart(p, wA, TA, wB, lo, hi, TB)
    if _is_static(wB) and lo == 0.0 and hi == TB:
        return _cross_vpart(p, wB, TB, wA, 0.0, TA, TA).T
    raise NotImplementedError("cross correlators need at least one static detector")


# -- public API -----------------------------------------------------------------------


@dataclass
class CorrelatorSeries:
    """Detector covariance matrices on a grid of proper-time samples.

    ``times[i, d]`` is detector d's proper time at sample i.  Covariances are
    in (Q…, P…) order and split as ``sigma = sigma_a + sigma_v``.
    """

    modes: tuple
    times: np.ndarray
    mean: np.ndarray
    sigma_a: np.ndarray
    sigma_v: np.ndarray
    hbar: float = 1.0
    meta: dict = field(default_factory=dict)

    @property
    def sigma(self) -> np.ndarray:
        return self.sigma_a + self.sigma_v

    @property
    def n(self) -> int:
        return len(self.modes)

    @property
    def Q(self) -> np.ndarray:
        return self.sigma[:, : self.n, : self.n]

    @property
    def P(self) -> np.ndarray:
        return self.sigma[:, self.n:, self.n:]

    @property
    def R(self) -> np.ndarray:
        """⟨P_i, Q_j⟩."""
        return self.sigma[:, self.n:, : self.n]

    def __len__(self) -> int:
        return self.times.shape[0]

    def state(self, i: int, validate: bool = True) -> GaussianState:
        return GaussianState.from_covariance(self.modes, self.sigma[i], self.mean[i],
                                             hbar=self.hbar, validate=validate)


def _as_time_grid(grid, n: int) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim == 1:
        g = np.repeat(g[:, None], n, axis=1)
    if g.ndim != 2 or g.shape[1] != n:
        raise ValueError(f"grid must be 1-D or have one column per detector ({n})")
    if np.any(g < 0) or not np.all(np.isfinite(g)):
        raise ValueError("grid times must be finite and non-negative")
    return g


def evolve_correlators(params: DetectorParams, worldlines: Sequence[Worldline],
                       initial: GaussianState, grid, check: bool = True) -> CorrelatorSeries:
    """Evolve the detectors' Gaussian state along ``worldlines``.

    ``grid`` is either a 1-D array of proper times shared by every detector or
    an (N, n) array giving each detector's own proper time per sample (used
    for slices of a foliation).  Mutual influences between detectors are
    neglected; the v-part cross correlations from the common vacuum are kept.
    """
    n = initial.n
    if len(worldlines) != n:
        raise ValueError("one worldline per detector mode is required")
    if not math.isclose(initial.hbar, params.hbar):
        raise ValueError("initial state and params disagree on hbar")
    g = _as_time_grid(grid, n)
    N = g.shape[0]
    sigma0 = initial.covariance()
    mu0 = initial.mean()
    sigma_a = np.empty((N, 2 * n, 2 * n))
    mean = np.empty((N, 2 * n))
    for i in range(N):
        M = _propagator(params, g[i])
        sigma_a[i] = M @ sigma0 @ M.T
        mean[i] = M @ mu0
    sigma_v = np.zeros_like(sigma_a)
    if params.gamma > 0:
        for d in range(n):
            v = _self_vpart(params, worldlines[d], g[:, d])
            sigma_v[:, d, d] = v[:, 0]
            sigma_v[:, d + n, d + n] = v[:, 1]
            sigma_v[:, d + n, d] = v[:, 2]
            sigma_v[:, d, d + n] = v[:, 2]
        for a in range(n):
            for b in range(a + 1, n):
                for i in range(N):
                    blk = cross_vpart(params, worldlines[a], g[i, a], worldlines[b], g[i, b])
                    rows = (a, a + n)
                    cols = (b, b + n)
                    for x in range(2):
                        for y in range(2):
                            sigma_v[i, rows[x], cols[y]] = blk[x, y]
                            sigma_v[i, cols[y], rows[x]] = blk[x, y]
    series = CorrelatorSeries(initial.modes, g, mean, sigma_a, sigma_v, hbar=params.hbar,
                              meta={"gamma": params.gamma, "omega_r": params.omega_r,
                                    "lambda0": params.lambda0, "lambda1": params.lambda1})
    if check:
        for i in range(N):
            try:
                series.state(i)
            except InvalidState as exc:
                raise UncertaintyViolation(f"sample {i} (times {g[i]}): {exc}") from exc
    return series


@dataclass
class Rho11History:
    eta: np.ndarray
    rho11: np.ndarray
    series: CorrelatorSeries


def _worldline_for(a: float) -> Worldline:
    if a < 0:
        raise ValueError("acceleration must be non-negative")
    return UniformAcceleration(a) if a > 0 else Inertial()


def rho11_history(params: DetectorParams, a: float, grid, check: bool = True) -> Rho11History:
    """Exact ρ₁₁(η) of a detector starting in its ground state, with proper
    acceleration ``a`` (0 means inertial)."""
    eta = np.asarray(grid, dtype=float)
    if eta.ndim != 1 or np.any(np.diff(eta) < 0):
        raise ValueError("grid must be a 1-D ascending array")
    ground = vacuum(["Q"], m0=params.m0, omega=params.omega_r, hbar=params.hbar)
    series = evolve_correlators(params, [_worldline_for(a)], ground, eta, check=check)
    rho = np.array([
        excited_population(series.Q[i, 0, 0], series.P[i, 0, 0], series.R[i, 0, 0],
                           m0=params.m0, omega_r=params.omega_r, hbar=params.hbar)
        for i in range(len(eta))
    ])
    return Rho11History(eta, rho, series)


def perturbative_rho11(params: DetectorParams, a: float, eta, with_meta: bool = False):
    """First-order ρ₁₁ = (λ²/4πm₀)[η/(e^{2πΩ_r/a} − 1) + (Λ₁ + Λ₀ − 2 ln(a/Ω_r))/(2πΩ_r)].

    For a ≤ 0 the Planck term and the acceleration logarithm are dropped (the
    formula does not apply there); ``with_meta`` returns a flag saying so.
    """
    eta = np.asarray(eta, dtype=float)
    pref = params.coupling**2 / (4.0 * math.pi * params.m0)
    wr = params.omega_r
    meta = {"planck_term": "included"}
    if a > 0:
        x = 2.0 * math.pi * wr / a
        planck = eta / math.expm1(x) if x < 700 else 0.0 * eta
        offset = (params.lambda1 + params.lambda0 - 2.0 * math.log(a / wr)) / (2.0 * math.pi * wr)
    else:
        planck = 0.0 * eta
        offset = (params.lambda1 + params.lambda0) / (2.0 * math.pi * wr)
        meta = {"planck_term": "dropped (a <= 0)", "log_term": "dropped (a <= 0)"}
    val = pref * (planck + offset)
    val = val[()] if val.ndim == 0 else val
    return (val, meta) if with_meta else val


def effective_temperature(corr, params: DetectorParams) -> float:
    """Temperature of the thermal state of the (m₀, Ω_r) oscillator with the
    same symplectic eigenvalue ν as ``corr``.

    ``corr`` is a single-mode GaussianState or a tuple (⟨Q²⟩, ⟨P²⟩, ⟨P,Q⟩).
    """
    if isinstance(corr, GaussianState):
        if corr.n != 1:
            raise InvalidState("effective_temperature needs a single-mode state")
        q2, p2, pq = corr.Qblock[0, 0], corr.Pblock[0, 0], corr.Rblock[0, 0]
    else:
        q2, p2, pq = (float(x) for x in corr)
    hbar = params.hbar
    det = q2 * p2 - pq * pq
    if not (q2 > 0 and p2 > 0 and det >= 0.25 * hbar * hbar * (1 - 1e-10)):
        raise InvalidState("correlators violate the uncertainty relation")
    nu = math.sqrt(det)
    excess = nu - 0.5 * hbar
    if excess <= 1e-14 * hbar:
        return 0.0
    return hbar * params.omega_r / math.log((nu + 0.5 * hbar) / excess)
