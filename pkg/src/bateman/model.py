"""Model parameters and every derived constant used by the other engines.

The model is a planar oscillator pair whose damping is induced by a
spin/deformation parameter s.  All rates and scales downstream derive from
four inputs (m, Ω₀, s, ħ):

    θ = ħs/m²               noncommutativity scale
    γ = Ω₀²s/m              classical damping rate of the equations of motion
    Γ = γ/2                 amplitude rate appearing in e^{±Γt} envelopes
    A = 1/m − mΩ₀²θ²/4ħ²    kinetic coefficient of the light-cone form
    Ω = √(Ω₀²−Γ²)           reduced oscillation frequency (requires |Γ| < Ω₀)
    d = Γ/Ω                 logarithmic-spiral scaling exponent
    T = 2π/Ω                time-lattice period (one full mode rotation)
    τ = T/2 = π/Ω           observable period (occupations oscillate at 2Ω)
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .errors import InvalidParams, OverdampedRegime

_PARAM_KEYS = ("m", "omega0", "s", "hbar")


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs: mass m, natural frequency Ω₀, deformation s, and ħ."""

    m: float
    omega0: float
    s: float
    hbar: float = 1.0

    def __post_init__(self):
        for name in _PARAM_KEYS:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InvalidParams(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidParams(f"{name} must be finite, got {value!r}")
        if self.m <= 0:
            raise InvalidParams(f"m must be positive, got {self.m}")
        if self.omega0 <= 0:
            raise InvalidParams(f"omega0 must be positive, got {self.omega0}")
        if self.hbar <= 0:
            raise InvalidParams(f"hbar must be positive, got {self.hbar}")

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        unknown = set(data) - set(_PARAM_KEYS)
        if unknown:
            raise InvalidParams(f"unknown parameter keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DerivedParams:
    """Every derived constant, populated once by :func:`derive_params`."""

    theta: float
    gamma: float
    Gamma: float
    A: float
    Omega: float
    d: float
    T: float
    tau: float
    ell_d: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        # json round-trips doubles at full precision via repr
        return json.dumps(self.to_dict(), sort_keys=True)


def derive_params(p: ModelParams) -> DerivedParams:
    """Compute all derived constants from validated inputs.

    Pure and deterministic: identical inputs give bit-identical outputs.
    Γ is computed as γ/2 (exact binary halving) so the pair of rates stays
    consistent whichever one a caller reads.

    Raises OverdampedRegime when |Γ| ≥ Ω₀.
    """
    theta = p.hbar * p.s / p.m**2
    gamma = p.omega0**2 * p.s / p.m
    Gamma = 0.5 * gamma
    A = 1.0 / p.m - p.m * p.omega0**2 * theta**2 / (4.0 * p.hbar**2)
    if abs(Gamma) >= p.omega0:
        raise OverdampedRegime(
            f"|Gamma| = {abs(Gamma)} >= omega0 = {p.omega0}: "
            "reduced frequency would be zero or imaginary"
        )
    Omega = math.sqrt(p.omega0**2 - Gamma**2)
    d = Gamma / Omega
    T = 2.0 * math.pi / Omega
    tau = 0.5 * T
    return DerivedParams(
        theta=theta, gamma=gamma, Gamma=Gamma, A=A,
        Omega=Omega, d=d, T=T, tau=tau, ell_d=T,
    )


def unit_params() -> ModelParams:
    """The natural-units reference point (m = Ω₀ = s = ħ = 1, Γ = 1/2)."""
    return ModelParams(m=1.0, omega0=1.0, s=1.0, hbar=1.0)
