"""Pointwise-limit Wightman function W₀ of a massless scalar in Minkowski vacuum.

The ε → 0 limit of the regularised two-point function is taken analytically,
so the kernels below are ordinary functions away from coincidence.  For d = 5
and d = 6 only the interval powers consumed by the transition-rate formulas
are exposed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, NullSeparation, UnsupportedDimension
from .worldline import Worldline, interval_sq

__all__ = ["WightmanKernel", "w0_self", "w0_cross", "null_guard"]

FOUR_PI_SQ = 4.0 * math.pi**2

# relative size below which an interval counts as null
NULL_RTOL = 1e-14


@dataclass(frozen=True)
class WightmanKernel:
    """Massless vacuum kernel in ``dimension`` spacetime dimensions.

    ``ir_mass`` (μ) fixes the additive infrared constant of the d = 2 kernel and
    is ignored otherwise.  ``custom`` optionally replaces the d = 2 or d = 4
    closed form by a callable ``f(dz2) -> complex`` of the squared interval,
    evaluated for a timelike pair with the later point first.
    """

    dimension: int = 4
    ir_mass: Optional[float] = None
    custom: Optional[Callable] = None

    def __post_init__(self):
        if self.dimension not in (2, 3, 4, 5, 6):
            raise UnsupportedDimension(f"dimension {self.dimension} not in 2..6")
        if self.dimension == 2:
            if self.ir_mass is None:
                object.__setattr__(self, "ir_mass", 1.0)
            if not self.ir_mass > 0:
                raise ValueError("the d=2 kernel needs a positive IR mass")
        elif self.ir_mass is not None:
            raise ValueError("ir_mass is only meaningful for d=2")
        if self.custom is not None and self.dimension not in (2, 4):
            raise ValueError("custom kernels are supported for d=2 and d=4 only")

    @property
    def mu(self) -> float:
        return float(self.ir_mass) if self.ir_mass is not None else float("nan")

    def from_interval(self, dz2):
        """W₀ (or the interval power for d = 5, 6) as a function of (Δz)².

        Timelike pairs are assumed to be ordered with the first point later,
        which fixes the branch of the square root and logarithm.
        """
        dz2 = np.asarray(dz2, dtype=float)
        if self.custom is not None:
            return self.custom(dz2)
        d = self.dimension
        if d == 4:
            return (1.0 / (FOUR_PI_SQ * dz2)).astype(complex)
        if d == 3:
            timelike = dz2 < 0
            root = np.sqrt(np.abs(dz2))
            return np.where(timelike, -1j / (4 * math.pi * root), 1.0 / (4 * math.pi * root) + 0j)
        if d == 2:
            timelike = dz2 < 0
            log = np.log(self.mu**2 * np.abs(dz2))
            return -log / (4 * math.pi) + np.where(timelike, -0.25j, 0.0)
        if d == 5:
            return np.abs(dz2) ** -1.5
        return dz2**-2.0


def null_guard(dz2, scale2) -> None:
    """Raise :class:`NullSeparation` if any (Δz)² is zero relative to ``scale2``."""
    dz2 = np.asarray(dz2, dtype=float)
    scale2 = np.asarray(scale2, dtype=float)
    if np.any(np.abs(dz2) <= NULL_RTOL * scale2):
        raise NullSeparation("points are null separated; integrate around the singular point")


def _finish(out):
    return out[()] if isinstance(out, np.ndarray) and out.ndim == 0 else out


def w0_self(k: WightmanKernel, w: Worldline, u, s):
    """W₀(z(u), z(u − s)) on a single worldline for gaps s > 0.

    Returns complex values for d = 2, 3, 4; the real powers
    [−(Δz)²]^{−3/2} (d = 5) or [(Δz)²]^{−2} (d = 6) otherwise.
    """
    if w.dimension != k.dimension:
        raise DimensionMismatch(f"kernel d={k.dimension} vs worldline d={w.dimension}")
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("the proper-time gap s must be positive")
    dz2 = w.self_interval_sq(u, s)
    null_guard(dz2, s * s)
    return _finish(k.from_interval(dz2))


def w0_cross(k: WightmanKernel, wA: Worldline, tauA, wB: Worldline, tauB):
    """Real (symmetrised) part of the d = 4 kernel between two worldline points."""
    if k.dimension != 4:
        raise UnsupportedDimension("w0_cross is defined for d=4 only")
    if wA.dimension != 4 or wB.dimension != 4:
        raise DimensionMismatch("w0_cross needs d=4 worldlines")
    dz2 = interval_sq(wA, tauA, wB, tauB)
    if wA is wB or wA == wB:
        scale2 = (np.asarray(tauA, dtype=float) - np.asarray(tauB, dtype=float)) ** 2
    else:
        dz = wA.position(tauA) - wB.position(tauB)
        scale2 = np.sum(dz**2, axis=-1)
    null_guard(dz2, scale2)
    return _finish(np.real(k.from_interval(dz2)))
