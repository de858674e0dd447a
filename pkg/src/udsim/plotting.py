"""Report figures for CLI tables.

matplotlib is an optional dependency (``pip install artifact[plot]``); it is
imported only when a report is requested, with the non-interactive Agg
backend.  Figures are written next to the delimited output and never change
its content.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np


def require_matplotlib():
    try:
        import matplotlib
    except ImportError:
        raise ImportError("matplotlib is not installed; install the 'plot' extra") from None
    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def _column(rows, name):
    out = []
    for r in rows:
        v = r.get(name)
        out.append(np.nan if v is None or v == "" else float(v))
    return np.array(out)


def _save(fig, outdir, name):
    os.makedirs(outdir, exist_ok=True)
    path = os.path.join(outdir, name)
    # fixed metadata keeps repeated renders byte-stable where the backend allows
    fig.savefig(path, dpi=120, metadata={"Software": None})
    return path


def _rho11_figure(plt, rows, meta):
    eta = _column(rows, "eta")
    keep = eta > 0
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.loglog(eta[keep], _column(rows, "rho11")[keep], label="exact")
    ax.loglog(eta[keep], _column(rows, "rho11_perturbative")[keep], "--", label="first order")
    ax.set_xlabel(r"$\eta$")
    ax.set_ylabel(r"$\rho_{11}$")
    cfg = meta.get("config", {})
    ax.set_title(f"a = {cfg.get('a')}, gamma = {cfg.get('gamma')}")
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def _teleport_figure(plt, rows, meta):
    t1 = _column(rows, "t1")
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(5.5, 5))
    top.plot(t1, _column(rows, "f_av"), lw=1)
    top.axhline(0.5, color="0.6", lw=0.8, ls=":")
    peaks = meta.get("markers", {}).get("peaks_t") or []
    if peaks:
        top.plot(peaks, np.interp(peaks, t1, _column(rows, "f_av")), "o", ms=3)
    top.set_ylabel(r"$F_{av}$")
    bottom.plot(t1, _column(rows, "e_n"), lw=1)
    bottom.set_ylabel(r"$E_N$")
    bottom.set_xlabel(r"$t_1$")
    fig.tight_layout()
    return fig


def _sweep_figures(plt, target, columns, rows, axes):
    first, rest = axes[0], axes[1:]
    observables = [c for c in columns if c not in axes and c != "failure"]
    groups = {}
    for r in rows:
        groups.setdefault(tuple(r[a] for a in rest), []).append(r)
    for obs in observables:
        fig, ax = plt.subplots(figsize=(5.5, 4))
        for key, grp in groups.items():
            label = ", ".join(f"{a}={v:g}" for a, v in zip(rest, key)) or None
            ax.plot(_column(grp, first), _column(grp, obs), marker=".", label=label)
        ax.set_xlabel(first)
        ax.set_ylabel(obs)
        ax.set_title(target)
        if rest:
            ax.legend(frameon=False, fontsize="small")
        fig.tight_layout()
        yield obs, fig


def report(target: str, columns: Sequence[str], rows: Sequence[dict], meta: dict,
           outdir: str, axes: Sequence[str] = ()) -> list[str]:
    """Render the figures for one CLI table; returns the written paths."""
    plt = require_matplotlib()
    paths = []
    if axes:
        for obs, fig in _sweep_figures(plt, target, list(columns), list(rows), list(axes)):
            paths.append(_save(fig, outdir, f"sweep_{target}_{obs}.png"))
            plt.close(fig)
    elif target == "rho11":
        fig = _rho11_figure(plt, rows, meta)
        paths.append(_save(fig, outdir, "rho11.png"))
        plt.close(fig)
    elif target == "teleport":
        fig = _teleport_figure(plt, rows, meta)
        paths.append(_save(fig, outdir, "teleport.png"))
        plt.close(fig)
    # single-row tables (rate, probability) have nothing to draw
    return paths


__all__ = ["report", "require_matplotlib"]
