"""Continuous-variable teleportation between a static and an accelerated detector.

Alice holds detectors A and C at rest at x = 1/b, Rob carries detector B on a
hyperbola of proper acceleration a (0 < a < b), so both start at rest at
t = 0.  A and B share a two-mode squeezed state (Q_A − Q_B and P_A + P_B
squeezed); C holds the coherent input |α⟩ and is frozen.  At Alice's time t₁
she performs a joint Gaussian measurement of (Q_C − Q_A, P_A + P_C) with
measurement squeezing r₂, and Rob displaces B by the outcome.

Pseudo mode applies the displacement on a chosen time slice (Minkowski or
quasi-Rindler); physical mode applies it when the outcome can reach Rob, at
the advanced time of the measurement event on a worldline that stops
accelerating at τ₂.

Averaging over outcomes is done in closed form: since the displacement is
linear in the outcome, the outcome-averaged output of B is Gaussian with mean
μ_B + Gμ_M and covariance Σ_BB + GΣ_MB + Σ_BMGᵀ + G(Σ_MM + σ_m)Gᵀ, whose
overlap with |α⟩ is F_av.  Two oracles (outcome sampling and an explicit
β-plane quadrature) are provided for checking it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .detector_dynamics import (DetectorParams, _propagator, cross_vpart,
                                evolve_correlators)
from .errors import InvalidScenario, UnderSampled
from .gaussian_state import (GaussianState, _symplectic_spectrum, coherent,
                             condition_on_measurement, fidelity_vs_coherent,
                             log_negativity, quadrature_scales, two_mode_squeezed)
from .worldline import (StaticAt, TruncatedUniform, UniformAcceleration, Worldline,
                        advanced_time)

__all__ = [
    "Foliation",
    "Mode",
    "TeleportScenario",
    "FidelitySeries",
    "Markers",
    "run_pseudo",
    "run_physical",
    "run",
    "extract_markers",
    "fidelity_average",
    "fidelity_monte_carlo",
    "fidelity_beta_quadrature",
    "collapse_consistency",
    "slice_times",
]

# gain from the measured quadratures (q_A, q_C, p_A, p_C) to B's displacement
GAIN = np.array([[-1.0, 1.0, 0.0, 0.0],
                 [0.0, 0.0, 1.0, 1.0]])


class Foliation(str, enum.Enum):
    MINKOWSKI = "minkowski"
    QUASI_RINDLER = "quasi-rindler"


class Mode(str, enum.Enum):
    PSEUDO = "pseudo"
    PHYSICAL = "physical"


@dataclass(frozen=True)
class TeleportScenario:
    """Parameters of one teleportation run.

    ``times`` are Alice's measurement times t₁, except for the quasi-Rindler
    foliation in pseudo mode where they are Rob's slice labels τ₁.
    """

    a: float = 1.0
    b: float = 2.0
    r1: float = 1.0
    r2: float = 5.0
    alpha: complex = 1.0 + 0.5j
    gamma: float = 0.0
    omega: float = 2.3
    m0: float = 1.0
    lambda0: float = 20.0
    lambda1: float = 20.0
    foliation: Foliation = Foliation.MINKOWSKI
    times: tuple = (0.0,)
    tau2: float = math.inf
    mode: Mode = Mode.PSEUDO
    hbar: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "foliation", Foliation(self.foliation))
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "times", tuple(float(t) for t in np.atleast_1d(self.times)))
        object.__setattr__(self, "alpha", complex(self.alpha))
        if not 0 < self.a < self.b:
            raise InvalidScenario("need 0 < a < b")
        if self.r1 < 0 or self.r2 < 0:
            raise InvalidScenario("squeezing parameters must be non-negative")
        if self.gamma < 0 or self.omega <= 0 or self.m0 <= 0:
            raise InvalidScenario("need gamma >= 0, omega > 0, m0 > 0")
        if any(t < 0 for t in self.times):
            raise InvalidScenario("measurement times must be non-negative")
        if self.mode is Mode.PHYSICAL and not (0 < self.tau2 < math.inf):
            raise InvalidScenario("physical mode needs a finite positive tau2")
        if self.mode is Mode.PSEUDO and math.isfinite(self.tau2):
            raise InvalidScenario("pseudo mode uses eternal acceleration (tau2 = inf)")

    @property
    def params(self) -> DetectorParams:
        return DetectorParams.from_bare(self.omega, self.gamma, m0=self.m0,
                                        lambda0=self.lambda0, lambda1=self.lambda1,
                                        hbar=self.hbar)

    @property
    def epsilon(self) -> float:
        """Offset for "just after/before" the light-cone entry."""
        return 1e-6 / self.omega

    def alice(self) -> Worldline:
        return StaticAt(1.0 / self.b)

    def rob(self) -> Worldline:
        if self.mode is Mode.PHYSICAL:
            return TruncatedUniform(self.a, tau2=self.tau2)
        return UniformAcceleration(self.a)


@dataclass
class Markers:
    peaks_t: np.ndarray
    peaks_f: np.ndarray
    t_half: Optional[float]
    t_de: Optional[float]
    late_spacing: Optional[float]


@dataclass
class FidelitySeries:
    t1: np.ndarray
    tau_a: np.ndarray
    tau_b: np.ndarray
    f_av: np.ndarray
    e_n: np.ndarray
    e_n_signed: np.ndarray
    tau_adv: Optional[np.ndarray]
    scenario: TeleportScenario
    meta: dict = field(default_factory=dict)
    markers: Optional[Markers] = None

    def __len__(self):
        return len(self.t1)


# -- slices -----------------------------------------------------------------------


def slice_times(s: TeleportScenario, label):
    """Proper times (τ_A, τ_B) on the pseudo-mode slice with the given label."""
    x = float(label)
    if s.foliation is Foliation.MINKOWSKI:
        return x, math.asinh(s.a * x) / s.a
    # Rindler slice t/x = tanh(aτ₁) through Rob at τ₁ meets Alice at t = tanh(aτ₁)/b
    return math.tanh(s.a * x) / s.b, x


def _initial(s: TeleportScenario) -> GaussianState:
    return two_mode_squeezed(s.r1, ("A", "B"), m0=s.m0, omega=s.params.omega_r, hbar=s.hbar)


def _measurement_cov(s: TeleportScenario) -> np.ndarray:
    """Noise of the joint measurement on (q_A, q_C, p_A, p_C)."""
    return two_mode_squeezed(s.r2, ("A", "C"), m0=s.m0, omega=s.params.omega_r,
                             hbar=s.hbar, validate=False).covariance()


def _with_input(s: TeleportScenario, ab: GaussianState) -> GaussianState:
    """Append the frozen input mode C to an (A, B) state."""
    c = coherent(s.alpha, "C", m0=s.m0, omega=s.params.omega_r, hbar=s.hbar)
    sig = np.zeros((6, 6))
    order = [0, 1, 3, 4]  # A, B rows in (qA, qB, qC, pA, pB, pC)
    sig[np.ix_(order, order)] = ab.covariance()
    sig[np.ix_([2, 5], [2, 5])] = c.covariance()
    mean = np.zeros(6)
    mean[order] = ab.mean()
    mean[[2, 5]] = c.mean()
    return GaussianState.from_covariance(("A", "B", "C"), sig, mean, hbar=s.hbar,
                                         validate=False)


def _blocks(state: GaussianState):
    iM = state.phase_indices(["A", "C"])
    iB = state.phase_indices(["B"])
    sig = state.covariance()
    mu = state.mean()
    return (sig[np.ix_(iB, iB)], sig[np.ix_(iB, iM)], sig[np.ix_(iM, iM)], mu[iB], mu[iM])


def fidelity_average(s: TeleportScenario, state: GaussianState) -> float:
    """Closed-form outcome-averaged fidelity for a joint (A, B, C) state."""
    sbb, sbm, smm, mub, mum = _blocks(state)
    G = GAIN
    cov = sbb + G @ sbm.T + sbm @ G.T + G @ (smm + _measurement_cov(s)) @ G.T
    out = GaussianState.from_covariance(("B",), cov, mub + G @ mum, hbar=s.hbar, validate=False)
    return fidelity_vs_coherent(out, s.alpha, m0=s.m0, omega=s.params.omega_r)


def _conditioned_affine(s: TeleportScenario, state: GaussianState):
    """B's conditioned covariance and mean map outcome ↦ mean (affine)."""
    meas = _measurement_cov(s)
    base = condition_on_measurement(state, ["A", "C"], meas, np.zeros(4))
    cols = []
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1.0
        cols.append(condition_on_measurement(state, ["A", "C"], meas, e).mean() - base.mean())
    return base.covariance(), base.mean(), np.array(cols).T


def _fidelity_gaussian(cov, means, alpha, m0, omega, hbar):
    vq, vp = quadrature_scales(m0, omega, hbar)
    total = cov + np.diag([vq, vp])
    target = np.array([math.sqrt(2 * hbar / (m0 * omega)) * alpha.real,
                       math.sqrt(2 * hbar * m0 * omega) * alpha.imag])
    d = means - target
    inv = np.linalg.inv(total)
    expo = -0.5 * np.einsum("...i,ij,...j->...", d, inv, d)
    return np.exp(expo) / math.sqrt(np.linalg.det(total / hbar))


def fidelity_monte_carlo(s: TeleportScenario, state: GaussianState, samples: int = 1_000_000,
                         seed: int = 0) -> tuple[float, float]:
    """Sample measurement outcomes, condition, displace and average (mean, stderr)."""
    rng = np.random.default_rng(seed)
    _, _, smm, _, mum = _blocks(state)
    cov_c, mean0, lin = _conditioned_affine(s, state)
    outcomes = rng.multivariate_normal(mum, smm + _measurement_cov(s), size=samples)
    means = mean0 + outcomes @ lin.T + outcomes @ GAIN.T
    f = _fidelity_gaussian(cov_c, means, s.alpha, s.m0, s.params.omega_r, s.hbar)
    return float(f.mean()), float(f.std(ddof=1) / math.sqrt(samples))


def fidelity_beta_quadrature(s: TeleportScenario, state: GaussianState, order: int = 64,
                             width: float = 9.0) -> tuple[float, float]:
    """∫d²β P(β) F(β) on a tensor Gauss–Legendre grid over the displacement plane.

    β is the net shift of B's mean caused by the outcome; P(β) is its Gaussian
    density.  Returns (F_av, ∫P) so the normalisation can be checked.
    """
    _, _, smm, _, mum = _blocks(state)
    cov_c, mean0, lin = _conditioned_affine(s, state)
    T = lin + GAIN
    centre = mean0 + T @ mum
    cov_beta = T @ (smm + _measurement_cov(s)) @ T.T
    L = np.linalg.cholesky(cov_beta)
    x, w = np.polynomial.legendre.leggauss(order)
    x = width * x
    w = width * w
    X, Y = np.meshgrid(x, x, indexing="ij")
    Z = np.stack([X.ravel(), Y.ravel()], axis=-1)
    W = np.outer(w, w).ravel()
    density = np.exp(-0.5 * np.sum(Z * Z, axis=1)) / (2 * math.pi)
    means = centre + Z @ L.T
    f = _fidelity_gaussian(cov_c, means, s.alpha, s.m0, s.params.omega_r, s.hbar)
    return float(np.sum(W * density * f)), float(np.sum(W * density))


def _signed_negativity(ab: GaussianState) -> float:
    """−log₂(2ν̃_min/ħ): equals E_N when positive, negative when separable."""
    sig = ab.covariance()
    flip = np.array([1.0, 1.0, 1.0, -1.0])
    nu = _symplectic_spectrum(flip[:, None] * sig * flip[None, :])
    return float(-math.log2(2.0 * nu[0] / ab.hbar))


# -- runs ---------------------------------------------------------------------------


def _ab_series(s: TeleportScenario, grid: np.ndarray):
    return evolve_correlators(s.params, [s.alice(), s.rob()], _initial(s), grid)


def run_pseudo(s: TeleportScenario) -> FidelitySeries:
    """Displacement applied instantaneously on the chosen time slice."""
    if s.mode is not Mode.PSEUDO:
        raise InvalidScenario("run_pseudo needs mode=pseudo")
    pairs = np.array([slice_times(s, x) for x in s.times])
    ser = _ab_series(s, pairs)
    f_av, e_n, e_s = [], [], []
    for i in range(len(ser)):
        ab = ser.state(i)
        f_av.append(fidelity_average(s, _with_input(s, ab)))
        e_n.append(log_negativity(ab, (["A"], ["B"])))
        e_s.append(_signed_negativity(ab))
    meta = {"mode": s.mode.value, "foliation": s.foliation.value}
    if s.foliation is Foliation.QUASI_RINDLER:
        meta["slice"] = "Rindler slice t/x = tanh(a*tau1) in the right wedge; tau_A = tanh(a*tau1)/b"
    return FidelitySeries(pairs[:, 0], pairs[:, 0], pairs[:, 1], np.array(f_av), np.array(e_n),
                          np.array(e_s), None, s, meta)


def run_physical(s: TeleportScenario) -> FidelitySeries:
    """Displacement applied when the outcome reaches Rob (advanced time + ε);
    entanglement evaluated "on the light cone" at the advanced time − ε."""
    if s.mode is not Mode.PHYSICAL:
        raise InvalidScenario("run_physical needs mode=physical")
    rob = s.rob()
    xa = 1.0 / s.b
    t1 = np.array(s.times)
    adv = np.array([advanced_time(np.array([t, xa, 0.0, 0.0]), rob) for t in t1])
    eps = s.epsilon
    after = _ab_series(s, np.stack([t1, adv + eps], axis=1))
    before = _ab_series(s, np.stack([t1, np.maximum(adv - eps, 0.0)], axis=1))
    f_av, e_n, e_s = [], [], []
    for i in range(len(t1)):
        f_av.append(fidelity_average(s, _with_input(s, after.state(i))))
        ab = before.state(i)
        e_n.append(log_negativity(ab, (["A"], ["B"])))
        e_s.append(_signed_negativity(ab))
    return FidelitySeries(t1, t1, adv, np.array(f_av), np.array(e_n), np.array(e_s), adv, s,
                          {"mode": s.mode.value, "epsilon": eps})


def run(s: TeleportScenario) -> FidelitySeries:
    series = run_pseudo(s) if s.mode is Mode.PSEUDO else run_physical(s)
    try:
        series.markers = extract_markers(series)
    except UnderSampled as exc:
        series.meta["markers"] = f"not extracted: {exc}"
    return series


# -- markers -------------------------------------------------------------------------


def _phase(series: FidelitySeries) -> np.ndarray:
    """Ω(τ_A + τ_B): the teleportation fidelity oscillates with this phase."""
    return series.scenario.params.omega * (series.tau_a + series.tau_b)


def extract_markers(series: FidelitySeries, min_per_period: int = 20) -> Markers:
    """Peaks of F_av, the time its peak envelope first falls to 1/2, and the
    first zero of the logarithmic negativity.

    Sampling is checked on the oscillation phase Ω(τ_A + τ_B), which is what
    sets the spacing of the F_av peaks.
    """
    t = np.asarray(series.t1)
    f = np.asarray(series.f_av)
    if len(t) < 3:
        raise UnderSampled("need at least three samples")
    if np.max(np.diff(_phase(series))) > 2 * math.pi / min_per_period * (1 + 1e-9):
        raise UnderSampled(f"fewer than {min_per_period} samples per oscillation period")
    idx = [i for i in range(1, len(f) - 1) if f[i] > f[i - 1] and f[i] >= f[i + 1]]
    pt, pf = [], []
    for i in idx:
        # parabola through the three samples around the maximum
        x0, x1, x2 = t[i - 1], t[i], t[i + 1]
        y0, y1, y2 = f[i - 1], f[i], f[i + 1]
        den = (x0 - x1) * (x0 - x2) * (x1 - x2)
        A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
        B = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / den
        if A < 0:
            xv = -B / (2 * A)
            if x0 <= xv <= x2:
                pt.append(xv)
                pf.append(A * xv * xv + B * xv + (y0 - A * x0 * x0 - B * x0))
                continue
        pt.append(x1)
        pf.append(y1)
    pt, pf = np.array(pt), np.array(pf)

    t_half = None
    if len(pf):
        if pf[0] <= 0.5:
            t_half = float(pt[0])
        else:
            below = np.nonzero(pf <= 0.5)[0]
            if len(below):
                k = below[0]
                t_half = float(np.interp(0.5, [pf[k], pf[k - 1]], [pt[k], pt[k - 1]]))

    t_de = None
    sgn = np.asarray(series.e_n_signed)
    if sgn[0] > 0:
        zero = np.nonzero(sgn <= 0)[0]
        if len(zero):
            k = zero[0]
            t_de = float(np.interp(0.0, [sgn[k], sgn[k - 1]], [t[k], t[k - 1]]))

    late = float(np.mean(np.diff(pt[-4:]))) if len(pt) >= 5 else None
    return Markers(pt, pf, t_half, t_de, late)


# -- frame consistency on the light cone -------------------------------------------


def collapse_consistency(s: TeleportScenario, t1: float) -> dict:
    """B's conditioned covariance just before the outcome reaches Rob, from
    collapses on different slices through Alice's measurement event.

    The cross covariance between B at τ' = τ^adv − ε and Alice's measured modes
    is rebuilt from B at the slice time τ_f (Minkowski: sinh(aτ_f) = a t₁;
    quasi-Rindler: tanh(aτ_f) = b t₁, needs b t₁ < 1) by the damped propagator
    plus the field increment on (τ_f, τ').  Each is compared with the direct
    evaluation.  Returns the conditioned 2×2 covariances keyed by frame.
    """
    p = s.params
    rob = s.rob()
    alice = s.alice()
    xa = 1.0 / s.b
    tau_p = advanced_time(np.array([t1, xa, 0.0, 0.0]), rob) - s.epsilon
    direct = _ab_series(s, np.array([[t1, tau_p]]))
    joint = _with_input(s, direct.state(0))
    sbb, sbm, smm, _, _ = _blocks(joint)
    smm_noisy = smm + _measurement_cov(s)

    def conditioned(cross_bm):
        return sbb - cross_bm @ np.linalg.solve(smm_noisy, cross_bm.T)

    out = {"direct": conditioned(sbm), "tau_prime": tau_p}
    slices = {"minkowski": math.asinh(s.a * t1) / s.a}
    if s.b * t1 < 1:
        slices["quasi-rindler"] = math.atanh(s.b * t1) / s.a
    for name, tau_f in slices.items():
        if tau_f > tau_p:
            continue
        at_f = _ab_series(s, np.array([[t1, tau_f]]))
        sig_f = at_f.sigma[0]
        # Cov(B(τ_f), A(t₁)) in (q, p) × (q, p)
        iB, iA = [1, 3], [0, 2]
        c_f = sig_f[np.ix_(iB, iA)]
        M = _propagator(p, np.array([tau_p - tau_f]))
        incr = cross_vpart(p, alice, t1, rob, tau_p, lo=tau_f, hi=tau_p).T
        c_ba = M @ c_f + incr
        # measured modes ordered (q_A, q_C, p_A, p_C); C is uncorrelated with B
        cross = np.zeros((2, 4))
        cross[:, 0] = c_ba[:, 0]
        cross[:, 2] = c_ba[:, 1]
        out[name] = conditioned(cross)
    return out
