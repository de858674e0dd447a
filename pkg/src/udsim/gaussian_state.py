"""Gaussian states of coupled oscillators in the characteristic-function picture.

A state over modes μ is fixed by its means ⟨Q_μ⟩, ⟨P_μ⟩ and the symmetrised
correlator blocks

    𝒬_{μν} = ⟨δQ_μ, δQ_ν⟩,   𝒫_{μν} = ⟨δP_μ, δP_ν⟩,   ℛ_{μν} = ⟨δP_μ, δQ_ν⟩,

with ⟨A, B⟩ = ⟨AB + BA⟩/2.  ℛ is not symmetric in general.  Internally the
covariance matrix is assembled in the ordering (Q_1 … Q_n, P_1 … P_n):

    σ = [[𝒬, ℛᵀ],
         [ℛ,  𝒫 ]]

and the symplectic form is J = [[0, 1], [−1, 0]], so [x_i, x_j] = iħ J_ij.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateMeasurement, InvalidState, UncertaintyViolation

__all__ = [
    "GaussianState",
    "symplectic_form",
    "reduce",
    "symplectic_eigenvalues",
    "check_uncertainty",
    "log_negativity",
    "condition_on_measurement",
    "displace",
    "fidelity_vs_coherent",
    "excited_population",
    "vacuum",
    "thermal",
    "coherent",
    "two_mode_squeezed",
    "quadrature_scales",
    "UNCERTAINTY_SLACK",
]

# absolute slack on ν ≥ ħ/2.  Rounding in the covariance entries alone moves the
# smallest symplectic eigenvalue by about eps·cond(σ)·ħ, so that is added on top
# (it matters only for strongly squeezed states).
UNCERTAINTY_SLACK = 1e-10


def symplectic_form(n: int) -> np.ndarray:
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def quadrature_scales(m0: float = 1.0, omega: float = 1.0, hbar: float = 1.0):
    """Vacuum variances (⟨Q²⟩, ⟨P²⟩) of an oscillator with mass m0 and frequency omega."""
    return hbar / (2.0 * m0 * omega), hbar * m0 * omega / 2.0


@dataclass(frozen=True)
class GaussianState:
    modes: tuple
    mean_Q: np.ndarray
    mean_P: np.ndarray
    Qblock: np.ndarray
    Pblock: np.ndarray
    Rblock: np.ndarray
    hbar: float = 1.0
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        modes = tuple(self.modes)
        n = len(modes)
        if n == 0 or len(set(modes)) != n:
            raise InvalidState("modes must be a nonempty list of distinct labels")
        object.__setattr__(self, "modes", modes)
        for name in ("mean_Q", "mean_P"):
            arr = np.array(getattr(self, name), dtype=float).reshape(-1)
            if arr.shape != (n,):
                raise InvalidState(f"{name} must have one entry per mode")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("Qblock", "Pblock", "Rblock"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (n, n):
                raise InvalidState(f"{name} must be {n}x{n}")
            if not np.all(np.isfinite(arr)):
                raise InvalidState(f"{name} has non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("Qblock", "Pblock"):
            arr = getattr(self, name)
            if not np.allclose(arr, arr.T, rtol=1e-12, atol=1e-14 * max(1.0, np.abs(arr).max())):
                raise InvalidState(f"{name} must be symmetric")
        if self.validate:
            check_uncertainty(self)

    # -- construction helpers ----------------------------------------------
    @classmethod
    def from_covariance(cls, modes: Sequence, sigma, mean=None, hbar: float = 1.0,
                        validate: bool = True) -> "GaussianState":
        sigma = np.asarray(sigma, dtype=float)
        n = len(modes)
        if sigma.shape != (2 * n, 2 * n):
            raise InvalidState("covariance shape does not match the number of modes")
        sigma = 0.5 * (sigma + sigma.T)
        mean = np.zeros(2 * n) if mean is None else np.asarray(mean, dtype=float)
        return cls(tuple(modes), mean[:n], mean[n:], sigma[:n, :n], sigma[n:, n:],
                   sigma[n:, :n], hbar=hbar, validate=validate)

    # -- views -------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.modes)

    def covariance(self) -> np.ndarray:
        return np.block([[self.Qblock, self.Rblock.T], [self.Rblock, self.Pblock]])

    def mean(self) -> np.ndarray:
        return np.concatenate([self.mean_Q, self.mean_P])

    def index(self, label) -> int:
        try:
            return self.modes.index(label)
        except ValueError:
            raise KeyError(f"unknown mode {label!r}") from None

    def phase_indices(self, labels: Iterable) -> np.ndarray:
        """Rows of the covariance matrix for ``labels`` in (Q…, P…) order."""
        idx = [self.index(lab) for lab in labels]
        return np.array(idx + [i + self.n for i in idx], dtype=int)


def _ensure_positive(sigma: np.ndarray) -> None:
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise InvalidState("covariance matrix is not positive definite") from None


def _symplectic_spectrum(sigma: np.ndarray) -> np.ndarray:
    # with σ = L Lᵀ, the Hermitian matrix i Lᵀ J L has eigenvalues ±ν_k; a
    # Hermitian solver keeps the error at ~eps·‖σ‖ even for strongly squeezed states
    n = sigma.shape[0] // 2
    try:
        L = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise InvalidState("covariance matrix is not positive definite") from None
    ev = np.linalg.eigvalsh(1j * (L.T @ symplectic_form(n) @ L))
    return np.sort(ev[n:])


def symplectic_eigenvalues(state: GaussianState) -> np.ndarray:
    """Williamson spectrum ν₁ ≤ … ≤ ν_n of the covariance matrix."""
    sigma = state.covariance()
    _ensure_positive(sigma)
    return _symplectic_spectrum(sigma)


def check_uncertainty(state: GaussianState) -> None:
    sigma = state.covariance()
    _ensure_positive(sigma)
    nu = _symplectic_spectrum(sigma)
    slack = UNCERTAINTY_SLACK + 16 * np.finfo(float).eps * np.linalg.cond(sigma) * state.hbar
    if nu[0] < 0.5 * state.hbar - slack:
        raise UncertaintyViolation(
            f"smallest symplectic eigenvalue {nu[0]:.12g} is below hbar/2 = {0.5 * state.hbar}")


def reduce(state: GaussianState, keep: Sequence) -> GaussianState:
    """Marginal state of the modes in ``keep`` (in that order)."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one mode")
    idx = [state.index(k) for k in keep]
    ix = np.ix_(idx, idx)
    return GaussianState(tuple(keep), state.mean_Q[idx], state.mean_P[idx],
                         state.Qblock[ix], state.Pblock[ix], state.Rblock[ix],
                         hbar=state.hbar, validate=False)


def log_negativity(state: GaussianState, bipartition: Sequence[Sequence]) -> float:
    """E_N in bits across ``bipartition = (part_a, part_b)``."""
    if len(bipartition) != 2:
        raise ValueError("bipartition must have exactly two parts")
    part_a, part_b = (list(p) for p in bipartition)
    if not part_a or not part_b or set(part_a) & set(part_b):
        raise ValueError("the two parts must be nonempty and disjoint")
    sub = reduce(state, part_a + part_b)
    sigma = sub.covariance()
    _ensure_positive(sigma)
    flip = np.ones(2 * sub.n)
    flip[sub.n + len(part_a):] = -1.0  # P → −P on part b
    nu = _symplectic_spectrum(flip[:, None] * sigma * flip[None, :])
    terms = -np.log2(2.0 * nu / state.hbar)
    return float(np.sum(np.maximum(terms, 0.0)))


def condition_on_measurement(state: GaussianState, measured: Sequence, meas_covariance,
                             outcome) -> GaussianState:
    """State of the unmeasured modes after a Gaussian (general-dyne) measurement.

    The POVM elements are pure Gaussian states of the measured modes with
    covariance ``meas_covariance`` (ordering Q…, P… of ``measured``) and mean
    ``outcome``.  The outcome is distributed as N(μ_M, σ_M + σ_m); conditioning
    replaces the remaining covariance by its Schur complement.
    """
    measured = list(measured)
    rest = [m for m in state.modes if m not in measured]
    if not rest:
        raise ValueError("at least one mode must remain unmeasured")
    sigma = state.covariance()
    mu = state.mean()
    im = state.phase_indices(measured)
    ik = state.phase_indices(rest)
    smm = sigma[np.ix_(im, im)] + np.asarray(meas_covariance, dtype=float)
    skm = sigma[np.ix_(ik, im)]
    if np.linalg.cond(smm) > 1e14:
        raise DegenerateMeasurement("conditioning matrix is singular")
    gain = np.linalg.solve(smm, skm.T).T
    y = np.asarray(outcome, dtype=float).reshape(-1)
    if y.shape != (len(im),):
        raise ValueError("outcome must have one real entry per measured quadrature")
    new_mu = mu[ik] + gain @ (y - mu[im])
    new_sigma = sigma[np.ix_(ik, ik)] - gain @ skm.T
    return GaussianState.from_covariance(rest, new_sigma, new_mu, hbar=state.hbar,
                                         validate=False)


def displace(state: GaussianState, mode, beta: complex, m0: float = 1.0,
             omega: float = 1.0) -> GaussianState:
    """Apply the displacement D(β) to ``mode``; covariances are unchanged."""
    i = state.index(mode)
    q_scale = math.sqrt(2.0 * state.hbar / (m0 * omega))
    p_scale = math.sqrt(2.0 * state.hbar * m0 * omega)
    mq = state.mean_Q.copy()
    mp = state.mean_P.copy()
    mq[i] += q_scale * complex(beta).real
    mp[i] += p_scale * complex(beta).imag
    return GaussianState(state.modes, mq, mp, state.Qblock, state.Pblock, state.Rblock,
                         hbar=state.hbar, validate=False)


def fidelity_vs_coherent(state: GaussianState, alpha: complex, m0: float = 1.0,
                         omega: float = 1.0) -> float:
    """⟨α|ρ|α⟩ for a single-mode Gaussian ρ."""
    if state.n != 1:
        raise InvalidState("fidelity_vs_coherent needs a single-mode state")
    sigma = state.covariance()
    _ensure_positive(sigma)
    vq, vp = quadrature_scales(m0, omega, state.hbar)
    total = sigma + np.diag([vq, vp])
    target = np.array([math.sqrt(2.0 * state.hbar / (m0 * omega)) * complex(alpha).real,
                       math.sqrt(2.0 * state.hbar * m0 * omega) * complex(alpha).imag])
    d = state.mean() - target
    expo = -0.5 * d @ np.linalg.solve(total, d)
    return float(math.exp(expo) / math.sqrt(np.linalg.det(total / state.hbar)))


def excited_population(corrQ2: float, corrP2: float, corrPQ: float, m0: float = 1.0,
                       omega_r: float = 1.0, hbar: float = 1.0) -> float:
    """Population ρ₁₁ of the first excited level of the free oscillator (m0, Ω_r)
    for a zero-mean single-mode Gaussian state with the given correlators."""
    det = corrP2 * corrQ2 - corrPQ**2
    bound = 0.25 * hbar**2
    if not det >= bound * (1.0 - 1e-10):
        raise UncertaintyViolation(
            f"<P^2><Q^2> - <P,Q>^2 = {det!r} is below hbar^2/4 = {bound!r}")
    num = hbar * max(det - bound, 0.0)
    den = ((corrP2 + 0.5 * hbar * m0 * omega_r) * (corrQ2 + 0.5 * hbar / (m0 * omega_r))
           - corrPQ**2) ** 1.5
    return float(num / den)


# -- standard states ---------------------------------------------------------


def vacuum(modes: Sequence, m0: float = 1.0, omega: float = 1.0,
           hbar: float = 1.0) -> GaussianState:
    n = len(modes)
    vq, vp = quadrature_scales(m0, omega, hbar)
    return GaussianState(tuple(modes), np.zeros(n), np.zeros(n), vq * np.eye(n),
                         vp * np.eye(n), np.zeros((n, n)), hbar=hbar)


def thermal(nbar: float, label="0", m0: float = 1.0, omega: float = 1.0,
            hbar: float = 1.0) -> GaussianState:
    vq, vp = quadrature_scales(m0, omega, hbar)
    k = 2.0 * nbar + 1.0
    return GaussianState((label,), [0.0], [0.0], [[k * vq]], [[k * vp]], [[0.0]], hbar=hbar)


def coherent(alpha: complex, label="0", m0: float = 1.0, omega: float = 1.0,
             hbar: float = 1.0) -> GaussianState:
    return displace(vacuum([label], m0, omega, hbar), label, alpha, m0, omega)


def two_mode_squeezed(r: float, labels=("A", "B"), m0: float = 1.0, omega: float = 1.0,
                      hbar: float = 1.0, validate: bool = True) -> GaussianState:
    """Two-mode squeezed vacuum in which Q_a − Q_b and P_a + P_b are squeezed."""
    vq, vp = quadrature_scales(m0, omega, hbar)
    c, s = math.cosh(2 * r), math.sinh(2 * r)
    Q = vq * np.array([[c, s], [s, c]])
    P = vp * np.array([[c, -s], [-s, c]])
    return GaussianState(tuple(labels), np.zeros(2), np.zeros(2), Q, P, np.zeros((2, 2)),
                         hbar=hbar, validate=validate)
