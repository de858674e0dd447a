"""Smooth compactly supported switching functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SwitchingFunction", "smooth_step"]

SHAPE_NAME = "exp-bump-step"


def _flat(x):
    # exp(-1/x) for x > 0, identically 0 otherwise; all derivatives vanish at 0
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(x):
    """C∞ step rising from 0 at ``x <= 0`` to 1 at ``x >= 1``."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    num = _flat(x)
    return num / (num + _flat(1.0 - x))


@dataclass(frozen=True)
class SwitchingFunction:
    """Plateau of height one on ``[tau0, tau]`` with C∞ ramps of duration ``delta``.

    Supported on ``[tau0 - delta, tau + delta]``.
    """

    tau0: float
    tau: float
    delta: float

    def __post_init__(self):
        if not self.tau0 < self.tau:
            raise ValueError("switching plateau needs tau0 < tau")
        if not self.delta > 0:
            raise ValueError("ramp duration delta must be positive")

    @property
    def support(self) -> tuple[float, float]:
        return self.tau0 - self.delta, self.tau + self.delta

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (self.tau0 - self.delta, self.tau0, self.tau, self.tau + self.delta)

    @property
    def duration(self) -> float:
        return self.tau - self.tau0

    @property
    def shape(self) -> str:
        return SHAPE_NAME

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        up = smooth_step((u - (self.tau0 - self.delta)) / self.delta)
        down = smooth_step(((self.tau + self.delta) - u) / self.delta)
        out = up * down
        return out.item() if out.ndim == 0 else out

    def squared_integral(self) -> float:
        """∫χ(u)² du."""
        x, w = np.polynomial.legendre.leggauss(64)
        ramp = 0.5 * self.delta * np.sum(w * smooth_step(0.5 * (x + 1.0)) ** 2)
        return self.duration + 2.0 * ramp

    def autocorrelation(self, s):
        """``C(s) = ∫χ(u) χ(u - s) du`` for gaps ``s >= 0`` (vectorised)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        lo, hi = self.support
        x, w = np.polynomial.legendre.leggauss(48)
        out = np.empty_like(s)
        for k, sk in enumerate(s):
            if sk >= hi - lo:
                out[k] = 0.0
                continue
            cuts = sorted({e for e in self.breakpoints} | {e + sk for e in self.breakpoints})
            cuts = [c for c in cuts if lo + sk <= c <= hi]
            cuts = sorted(set([lo + sk, *cuts, hi]))
            a = np.array(cuts[:-1])
            b = np.array(cuts[1:])
            half = 0.5 * (b - a)
            nodes = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
            vals = self(nodes.ravel()).reshape(nodes.shape) * self(nodes.ravel() - sk).reshape(nodes.shape)
            out[k] = np.sum(vals * w[None, :] * half[:, None])
        return out

    def jump_integral(self, s):
        """``J(s) = ∫χ(u)[χ(u) − χ(u − s)] du = ½∫[χ(u) − χ(u − s)]² du``.

        The squared form has no cancellation at small ``s``.
        """
        s = np.atleast_1d(np.asarray(s, dtype=float))
        lo, hi = self.support
        x, w = np.polynomial.legendre.leggauss(48)
        out = np.empty_like(s)
        for k, sk in enumerate(s):
            if sk <= 0.0:
                out[k] = 0.0
                continue
            cuts = sorted(set(self.breakpoints) | {e + sk for e in self.breakpoints})
            a = np.array(cuts[:-1])
            b = np.array(cuts[1:])
            half = 0.5 * (b - a)
            nodes = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
            flat = nodes.ravel()
            diff = (self(flat) - self(flat - sk)).reshape(nodes.shape)
            out[k] = 0.5 * np.sum(diff**2 * w[None, :] * half[:, None])
        return out

    def jump_breakpoints(self) -> list[float]:
        """Gaps at which J(s) is not smooth (coincidences of ramp edges)."""
        e = self.breakpoints
        return sorted({ei - ej for ei in e for ej in e if ei > ej})
