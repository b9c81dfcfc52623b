"""Closed-form quantum solution: Bogoliubov coefficients, occupations, energies.

The Heisenberg equations of the two-mode engine close on the pair (a, b†),

    ȧ = −iΩ₀ a + Γ b†,      ḃ† = +iΩ₀ b† + Γ a,

giving a(t) = u(t) a(0) + v(t) b†(0) with

    u(t) = cos(Ωt) − i (Ω₀/Ω) sin(Ωt),
    v(t) = (Γ/Ω) sin(Ωt),
    |u|² − |v|² = 1  (canonical transformation).

For any initial product number state (N_a⁰, N_b⁰) the mode occupations are

    ⟨N_a(t)⟩ = N_a⁰ + (Γ²/Ω²)(N_a⁰+N_b⁰+1) sin²(Ωt),

and the a↔b mirror, so the occupation difference is conserved while each
occupation oscillates with period τ = π/Ω.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams
from .model import ModelParams, derive_params
from .series import TimeSeries

ENERGY_SIGN_CONVENTIONS = ("paper-rate", "casimir")


@dataclass(frozen=True)
class BogoliubovPair:
    """Coefficients (u, v); v is real in this model but stored complex."""

    u: complex
    v: complex

    def canonicality_residual(self) -> float:
        return float(np.max(np.abs(np.abs(self.u) ** 2 - np.abs(self.v) ** 2 - 1.0)))


@dataclass(frozen=True)
class OccupationSplit:
    """⟨N_a(t)⟩ = N₀ − ΔN cos(2Ωt): constant baseline plus pure oscillation."""

    N0: float
    DeltaN: float


def bogoliubov(params: ModelParams, t) -> BogoliubovPair:
    """u(t), v(t) of the Heisenberg solution; scalar or array t."""
    dp = derive_params(params)
    t = np.asarray(t, dtype=float)
    wt = dp.Omega * t
    u = np.cos(wt) - 1j * (params.omega0 / dp.Omega) * np.sin(wt)
    v = (dp.Gamma / dp.Omega) * np.sin(wt) + 0.0j
    if t.ndim == 0:
        return BogoliubovPair(u=complex(u), v=complex(v))
    return BogoliubovPair(u=u, v=v)


def _check_occupations(Na0, Nb0):
    if Na0 < 0 or Nb0 < 0:
        raise InvalidParams("initial occupations must be nonnegative")


def occupation_a(params: ModelParams, Na0: float, Nb0: float, t):
    """⟨N_a(t)⟩ = N_a⁰ + (Γ²/Ω²)(N_a⁰+N_b⁰+1) sin²(Ωt) = N_a⁰ + |v|²(N_a⁰+N_b⁰+1)."""
    _check_occupations(Na0, Nb0)
    dp = derive_params(params)
    t = np.asarray(t, dtype=float)
    out = Na0 + (dp.Gamma**2 / dp.Omega**2) * (Na0 + Nb0 + 1.0) * np.sin(dp.Omega * t) ** 2
    return float(out) if out.ndim == 0 else out


def occupation_b(params: ModelParams, Na0: float, Nb0: float, t):
    """Mirror image from b(t) = u(t) b(0) + v(t) a†(0)."""
    _check_occupations(Na0, Nb0)
    dp = derive_params(params)
    t = np.asarray(t, dtype=float)
    out = Nb0 + (dp.Gamma**2 / dp.Omega**2) * (Na0 + Nb0 + 1.0) * np.sin(dp.Omega * t) ** 2
    return float(out) if out.ndim == 0 else out


def split(params: ModelParams, Na0: float, Nb0: float) -> OccupationSplit:
    """Baseline and oscillation amplitude of ⟨N_a(t)⟩ = N₀ − ΔN cos(2Ωt)."""
    _check_occupations(Na0, Nb0)
    dp = derive_params(params)
    half = dp.Gamma**2 / (2.0 * dp.Omega**2) * (Na0 + Nb0 + 1.0)
    return OccupationSplit(N0=Na0 + half, DeltaN=half)


def energy_a(params: ModelParams, Na0: float, Nb0: float, t):
    """E_a(t) = ħΩ₀ ⟨N_a(t)⟩."""
    return params.hbar * params.omega0 * occupation_a(params, Na0, Nb0, t)


def energy_b(params: ModelParams, Na0: float, Nb0: float, t,
             sign_convention: str = "paper-rate"):
    """Amplified-sector energy under either sign convention.

    "paper-rate": E_b = +ħΩ₀⟨N_b⟩, so both sector energies rise and fall
    together.  "casimir": E_b = −ħΩ₀⟨N_b⟩, under which E_a + E_b equals
    the conserved ħΩ₀(N_a⁰−N_b⁰).
    """
    if sign_convention not in ENERGY_SIGN_CONVENTIONS:
        raise InvalidParams(f"unknown energy sign convention {sign_convention!r}")
    sign = 1.0 if sign_convention == "paper-rate" else -1.0
    return sign * params.hbar * params.omega0 * occupation_b(params, Na0, Nb0, t)


def vacuum_energy_baseline(params: ModelParams) -> float:
    """Time-averaged vacuum energy E₀ = ħΩ₀ Γ²/(2Ω²), from vacuum fluctuations."""
    dp = derive_params(params)
    return params.hbar * params.omega0 * dp.Gamma**2 / (2.0 * dp.Omega**2)


def period_tau(params: ModelParams) -> float:
    """Observable period τ = π/Ω (the occupations oscillate as cos 2Ωt)."""
    return derive_params(params).tau


def occupation_rate(params: ModelParams, Na0: float, Nb0: float, t):
    """d⟨N_a⟩/dt = (Γ²/Ω)(N_a⁰+N_b⁰+1) sin(2Ωt); the memory-kernel oracle."""
    _check_occupations(Na0, Nb0)
    dp = derive_params(params)
    t = np.asarray(t, dtype=float)
    out = (dp.Gamma**2 / dp.Omega) * (Na0 + Nb0 + 1.0) * np.sin(2.0 * dp.Omega * t)
    return float(out) if out.ndim == 0 else out


def closed_form_series(params: ModelParams, Na0: float, Nb0: float,
                       t_grid, sign_convention: str = "paper-rate") -> TimeSeries:
    """Tabulate occupations, energies and Bogoliubov coefficients on a grid."""
    t = np.asarray(t_grid, dtype=float)
    pair = bogoliubov(params, t)
    return TimeSeries(t=t, channels={
        "Na": occupation_a(params, Na0, Nb0, t),
        "Nb": occupation_b(params, Na0, Nb0, t),
        "Ea": energy_a(params, Na0, Nb0, t),
        "Eb": energy_b(params, Na0, Nb0, t, sign_convention),
        "u_re": np.real(pair.u),
        "u_im": np.imag(pair.u),
        "v_re": np.real(pair.v),
    })
