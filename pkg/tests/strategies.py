"""Random valid Gaussian states for property tests (Williamson form)."""

import numpy as np
from hypothesis import strategies as st
from scipy.linalg import expm

from udsim.gaussian_state import GaussianState, symplectic_form


def random_covariance(rng: np.random.Generator, n: int, hbar: float = 1.0,
                      max_squeeze: float = 1.0, max_thermal: float = 2.0) -> np.ndarray:
    """σ = (ħ/2) S diag(ν, ν) Sᵀ with a random symplectic S and ν ≥ 1."""
    J = symplectic_form(n)
    H = rng.normal(size=(2 * n, 2 * n))
    H = 0.5 * (H + H.T)
    H *= max_squeeze / max(1.0, np.abs(np.linalg.eigvalsh(H)).max())
    S = expm(J @ H)
    nu = 1.0 + rng.uniform(0.0, max_thermal, size=n)
    return 0.5 * hbar * S @ np.diag(np.concatenate([nu, nu])) @ S.T


@st.composite
def gaussian_states(draw, n_min=1, n_max=4, hbar=1.0):
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    sigma = random_covariance(rng, n, hbar)
    mean = rng.normal(size=2 * n)
    labels = [f"m{i}" for i in range(n)]
    return GaussianState.from_covariance(labels, sigma, mean, hbar=hbar)
