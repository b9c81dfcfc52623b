"""Classical dual-oscillator trajectories and their analytic normal modes.

The reduced equations of motion are the dual pair

    Ÿ₁ − γ Ẏ₁ + Ω₀² Y₁ = 0   (amplified),
    Ÿ₂ + γ Ẏ₂ + Ω₀² Y₂ = 0   (damped),

whose complex normal modes are pure exponentials A e^{±Γt} e^{±iΩt} with
Γ = γ/2 and Ω = √(Ω₀²−Γ²).  The analytic modes serve as the oracle for the
fixed-step RK4 integrator, and a central-difference residual provides a
self-check that is independent of both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, StepTooLarge, TooFewPoints
from .model import DerivedParams, ModelParams, derive_params
from .series import TimeSeries

AMPLIFIED = +1
DAMPED = -1


@dataclass(frozen=True)
class ClassicalState:
    """Positions/velocities of the amplified (Y₁) and damped (Y₂) coordinates."""

    y1: float
    y1dot: float
    y2: float
    y2dot: float

    def __post_init__(self):
        for name in ("y1", "y1dot", "y2", "y2dot"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParams(f"{name} must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.y1, self.y1dot, self.y2, self.y2dot], dtype=float)


@dataclass(frozen=True)
class ComplexMode:
    """One exponential normal mode; sign +1 amplified (z₂), −1 damped (z₁)."""

    amplitude: complex
    sign: int

    def __post_init__(self):
        if self.sign not in (AMPLIFIED, DAMPED):
            raise InvalidParams("mode sign must be +1 (amplified) or -1 (damped)")


def analytic_mode(params: ModelParams | DerivedParams, mode: ComplexMode, t):
    """z(t) = A e^{sign·Γt} e^{sign·iΩt}; accepts scalar or array t."""
    dp = params if isinstance(params, DerivedParams) else derive_params(params)
    t = np.asarray(t, dtype=float)
    z = mode.amplitude * np.exp(mode.sign * dp.Gamma * t) * np.exp(1j * mode.sign * dp.Omega * t)
    return complex(z) if z.ndim == 0 else z


def integrate_bateman(params: ModelParams, init: ClassicalState,
                      t_end: float, dt: float) -> TimeSeries:
    """Classical RK4 on the dual pair with a fixed step.

    The grid includes both endpoints; the realized step is
    t_end / round(t_end/dt), i.e. the requested dt rounded to divide the
    interval evenly.  StepTooLarge when dt·Ω₀ > 0.5.
    """
    if dt <= 0:
        raise InvalidParams("dt must be positive")
    if t_end < 0:
        raise InvalidParams("t_end must be nonnegative")
    if dt * params.omega0 > 0.5:
        raise StepTooLarge(f"dt*omega0 = {dt * params.omega0} exceeds stability guard 0.5")
    dp = derive_params(params)
    # linear system sdot = M s for s = (y1, y1', y2, y2')
    w2 = params.omega0**2
    M = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [-w2, dp.gamma, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -w2, -dp.gamma],
    ])
    n = max(1, int(round(t_end / dt))) if t_end > 0 else 0
    h = t_end / n if n else 0.0
    out = np.empty((n + 1, 4))
    s = init.as_array()
    out[0] = s
    for k in range(n):
        k1 = M @ s
        k2 = M @ (s + 0.5 * h * k1)
        k3 = M @ (s + 0.5 * h * k2)
        k4 = M @ (s + h * k3)
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = s
    t = np.linspace(0.0, t_end, n + 1)
    return TimeSeries(t=t, channels={
        "y1": out[:, 0], "y1dot": out[:, 1], "y2": out[:, 2], "y2dot": out[:, 3],
    })


def ode_residual(params: ModelParams, series: TimeSeries) -> float:
    """Max interior residual of both equations via 2nd-order central differences.

    Independent of the integrator and the analytic modes; limited by the
    O(h²) differencing error, not by the trajectory quality.
    """
    if series.t.size < 5:
        raise TooFewPoints("need at least 5 grid points for central differences")
    dp = derive_params(params)
    h = series.dt
    w2 = params.omega0**2
    worst = 0.0
    for name, damping in (("y1", -dp.gamma), ("y2", +dp.gamma)):
        y = series.column(name)
        ydd = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / h**2
        yd = (y[2:] - y[:-2]) / (2.0 * h)
        res = ydd + damping * yd + w2 * y[1:-1]
        worst = max(worst, float(np.max(np.abs(res))))
    return worst
