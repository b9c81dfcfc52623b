"""Figure rendering for the report path.

Every renderer takes an already-computed dataset and writes one PNG next
to the delimited output; nothing here computes physics.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .series import TimeSeries


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_occupations(series: TimeSeries, path) -> str:
    fig, ax = plt.subplots(figsize=(6.4, 3.8))
    ax.plot(series.t, series.column("Na"), label=r"$\langle N_a\rangle$")
    ax.plot(series.t, series.column("Nb"), "--", label=r"$\langle N_b\rangle$")
    ax.set_xlabel("t")
    ax.set_ylabel("occupation")
    ax.grid(alpha=0.3)
    ax.legend()
    return _finish(fig, path)


def render_fock(series: TimeSeries, path) -> str:
    fig, axes = plt.subplots(2, 1, figsize=(6.4, 5.4), sharex=True)
    axes[0].plot(series.t, series.column("Na"), label=r"$\langle N_a\rangle$")
    axes[0].plot(series.t, series.column("Nb"), "--", label=r"$\langle N_b\rangle$")
    axes[0].set_ylabel("occupation")
    axes[0].legend()
    axes[0].grid(alpha=0.3)
    axes[1].plot(series.t, series.column("entropy"), label="entropy")
    axes[1].plot(series.t, series.column("purity"), "--", label="purity")
    axes[1].set_xlabel("t")
    axes[1].grid(alpha=0.3)
    axes[1].legend()
    return _finish(fig, path)


def render_reduced(series: TimeSeries, path) -> str:
    fig, axes = plt.subplots(2, 1, figsize=(6.4, 5.4), sharex=True)
    axes[0].plot(series.t, series.column("Na_kernel"), label="memory kernel")
    axes[0].plot(series.t, series.column("Na_oracle"), "--", label="partial-trace oracle")
    axes[0].set_ylabel(r"$\langle N_a\rangle$")
    axes[0].legend()
    axes[0].grid(alpha=0.3)
    axes[1].semilogy(series.t[1:], np.maximum(series.column("abs_err")[1:], 1e-18))
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("abs err")
    axes[1].grid(alpha=0.3)
    return _finish(fig, path)


def render_spiral(series: TimeSeries, path) -> str:
    fig, ax = plt.subplots(figsize=(5.4, 5.4))
    ax.plot(series.column("x1"), series.column("y1"), label="contracting mode")
    ax.plot(series.column("x2"), series.column("y2"), label="expanding mode")
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.grid(alpha=0.3)
    ax.legend()
    return _finish(fig, path)


def render_lattice(n, r, path) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ax.semilogy(n, r, "o", ms=5)
    ax.semilogy(n, r, alpha=0.4)
    ax.set_xlabel("n")
    ax.set_ylabel("r(nT)")
    ax.set_title("discrete-time scaling")
    ax.grid(alpha=0.3, which="both")
    return _finish(fig, path)


def render_ratio(s, ratio, path) -> str:
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ax.plot(s, ratio)
    ax.set_xlabel("s")
    ax.set_ylabel("r(t+T)/r(t)")
    ax.grid(alpha=0.3)
    return _finish(fig, path)


def render_koch(points, path) -> str:
    fig, ax = plt.subplots(figsize=(6.4, 3.0))
    ax.plot(points[:, 0], points[:, 1], lw=0.8)
    ax.set_aspect("equal")
    ax.axis("off")
    return _finish(fig, path)
