import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bateman.classical import DAMPED, ComplexMode, analytic_mode, ode_residual
from bateman.errors import InvalidParams, LevelTooLarge
from bateman.geometry import (
    KochCurve,
    Spiral,
    box_counting_dimension,
    fractal_dimension,
    koch_box_dimension,
    koch_generate,
    koch_scaling,
    koch_summary,
    lattice_from_rate,
    lattice_samples,
    scaling_ratio,
    scaling_ratio_curve,
    spiral_from_dynamics,
    spiral_point,
)
from bateman.model import ModelParams, derive_params
from bateman.series import TimeSeries

# the plotted lattice points and their printed precision
FIG3_POINTS = [1.000, 0.286, 0.082, 0.023, 0.0067, 0.0019,
               0.00055, 0.00016, 0.000045, 0.000013]
FIG3_LAST_DIGIT = [1e-3, 1e-3, 1e-3, 1e-3, 1e-4, 1e-4, 1e-5, 1e-5, 1e-6, 1e-6]


def params_with_exponent(d: float) -> ModelParams:
    # choose s so that Γ/Ω = d at Ω₀ = m = 1: Γ = d/√(1+d²), s = 2Γ
    Gamma = d / np.sqrt(1.0 + d * d)
    return ModelParams(m=1.0, omega0=1.0, s=2.0 * Gamma)


def test_spiral_start():
    x, y = spiral_point(Spiral(r0=2.0, d=0.3), 0.0)
    assert (x, y) == (2.0, 0.0)


def test_degenerate_spiral_is_circle():
    sp = Spiral(r0=1.5, d=0.0)
    phi = np.linspace(0.0, 4.0 * np.pi, 64)
    x, y = spiral_point(sp, phi)
    assert np.max(np.abs(np.hypot(x, y) - 1.5)) <= 1e-12


@settings(max_examples=60)
@given(st.floats(-0.9, 0.9), st.floats(0, 6), st.floats(-3, 3))
def test_spiral_self_similarity(d, phi, delta):
    # a shift of angle rescales the radius by a constant and rotates
    sp = Spiral(r0=1.0, d=d)
    x0, y0 = spiral_point(sp, phi)
    x1, y1 = spiral_point(sp, phi + delta)
    scale = np.exp(sp.chirality * d * delta)
    c, s = np.cos(delta), np.sin(delta)
    assert x1 == pytest.approx(scale * (c * x0 - s * y0), abs=1e-9 * max(1.0, scale))
    assert y1 == pytest.approx(scale * (s * x0 + c * y0), abs=1e-9 * max(1.0, scale))


def test_spiral_rejects_bad_inputs():
    with pytest.raises(InvalidParams):
        Spiral(r0=0.0, d=0.1)
    with pytest.raises(InvalidParams):
        Spiral(r0=1.0, d=0.1, chirality=2)


def test_dynamics_spiral_t0(unit):
    series = spiral_from_dynamics(unit, 2.0, np.linspace(0.0, 1.0, 5))
    assert series.column("x1")[0] == 2.0
    assert series.column("x2")[0] == 2.0
    assert series.column("y1")[0] == 0.0


def test_dynamics_spiral_shares_mode_path(unit):
    # bit-identical with the classical analytic modes (same code path)
    t = np.linspace(0.0, 10.0, 101)
    series = spiral_from_dynamics(unit, 1.0, t)
    z1 = analytic_mode(unit, ComplexMode(amplitude=1.0, sign=DAMPED), t)
    assert np.array_equal(series.column("r1"), np.abs(z1))
    assert np.array_equal(series.column("x1"), np.real(z1))


def test_dynamics_spiral_solves_equations(unit):
    t = np.linspace(0.0, 5.0, 5001)
    series = spiral_from_dynamics(unit, 1.0, t)
    # Re z₁ solves the damped equation, Re z₂ the amplified one
    check = TimeSeries(t=t, channels={
        "y1": series.column("x2"), "y1dot": np.zeros_like(t),
        "y2": series.column("x1"), "y2dot": np.zeros_like(t),
    })
    assert ode_residual(unit, check) <= 1e-4


def test_dynamics_spiral_radius_product(unit):
    t = np.linspace(0.0, 15.0, 301)
    series = spiral_from_dynamics(unit, 3.0, t)
    assert np.max(np.abs(series.column("r1") * series.column("r2") - 9.0)) <= 1e-9


def test_lattice_start_and_ratio(unit, unit_derived):
    r = lattice_samples(unit, 2.0, 6)
    assert r[0] == 2.0
    ratios = r[1:] / r[:-1]
    assert np.max(np.abs(ratios - np.exp(-2.0 * np.pi * unit_derived.d))) <= 1e-12


def test_lattice_reference_sequence():
    r = lattice_from_rate(1.25, r0=1.0, n_max=9)
    for got, want, digit in zip(r, FIG3_POINTS, FIG3_LAST_DIGIT):
        assert abs(got - want) <= 2.0 * digit


@settings(max_examples=80)
@given(st.floats(0.01, 2.0), st.integers(0, 20))
def test_discrete_scaling_law(d, n):
    # ln r((n+1)T) − ln r(nT) = −2πd on the time lattice
    p = params_with_exponent(d)
    dp = derive_params(p)
    r = lattice_samples(p, 1.0, n + 1)
    residual = np.log(r[n + 1]) - np.log(r[n]) + 2.0 * np.pi * dp.d
    assert abs(residual) <= 1e-12


def test_scaling_ratio_values():
    assert scaling_ratio(0.0, -1) == 1.0
    assert scaling_ratio(0.2, -1) == pytest.approx(0.2846095433360293, abs=1e-15)
    assert scaling_ratio(0.2, +1) == pytest.approx(1.0 / 0.2846095433360293, rel=1e-13)
    with pytest.raises(InvalidParams):
        scaling_ratio(0.2, 0)


def test_ratio_curve_is_exponential():
    s = 0.1 * np.arange(21)
    assert np.max(np.abs(scaling_ratio_curve(s) - np.exp(-2.0 * np.pi * s))) <= 1e-12


def test_koch_base_case():
    curve = koch_generate(0)
    assert curve.points.shape == (2, 2)
    assert curve.segment_count == 1
    assert curve.length() == 1.0


@pytest.mark.parametrize("level", [1, 2, 5, 6])
def test_koch_counts_and_lengths(level):
    curve = koch_generate(level)
    assert curve.segment_count == 4**level
    assert curve.length() == pytest.approx((4.0 / 3.0) ** level, rel=1e-10)
    assert np.max(np.abs(curve.segment_lengths() - 3.0 ** (-level))) <= 1e-12


def test_koch_level_guard():
    with pytest.raises(LevelTooLarge):
        koch_generate(12)
    with pytest.raises(InvalidParams):
        koch_generate(-1)


def test_koch_scaling_fixed_point():
    assert koch_scaling(0, 4.0, 0.1) == 1.0
    d = np.log(4.0) / np.log(3.0)
    q = 3.0 ** (-d)
    for n in (1, 3, 7):
        assert koch_scaling(n, 4.0, q) == pytest.approx(1.0, abs=1e-12)
    assert koch_scaling(3, 4.0, 1.0 / 3.0) == pytest.approx((4.0 / 3.0) ** 3, rel=1e-14)


def test_fractal_dimension_values():
    assert fractal_dimension(4.0, 3.0) == pytest.approx(1.26186, abs=1e-5)
    assert fractal_dimension(2.0, 2.0) == 1.0
    assert fractal_dimension(9.0, 3.0) == pytest.approx(2.0, abs=1e-14)
    with pytest.raises(InvalidParams):
        fractal_dimension(4.0, 1.0)


def test_box_counting_dimension_brackets_koch():
    slope, counts = koch_box_dimension()
    assert 1.24 <= slope <= 1.28
    assert all(c2 > c1 for c1, c2 in zip(counts, counts[1:]))


def test_box_counting_of_a_line_is_one():
    # N = 3^k + 1 boxes (the x = 1 endpoint adds one), so the coarse grids
    # bias the fit low; the asymptotic window lands on dimension 1
    t = np.linspace(0.0, 1.0, 20001)
    pts = np.column_stack([t, np.zeros_like(t)])
    slope, _ = box_counting_dimension(pts, k_range=(3, 6))
    assert slope == pytest.approx(1.0, abs=0.05)


def test_koch_summary_fields():
    summary = koch_summary(koch_generate(5))
    assert summary["segments"] == 4**5
    assert summary["length"] == pytest.approx((4.0 / 3.0) ** 5, rel=1e-10)
    assert 1.1 <= summary["dimension_estimate"] <= 1.4


def test_observable_periodicity_vs_mode_scaling(unit, unit_derived):
    # the mode itself is not periodic (it shrinks by e^{−2πd} per turn)
    # while the quadratic observable is exactly τ-periodic
    from bateman.closed_form import occupation_a

    T, tau = unit_derived.T, unit_derived.tau
    z_now = analytic_mode(unit, ComplexMode(amplitude=1.0, sign=DAMPED), 1.0)
    z_next = analytic_mode(unit, ComplexMode(amplitude=1.0, sign=DAMPED), 1.0 + T)
    assert abs(z_next) / abs(z_now) == pytest.approx(np.exp(-2.0 * np.pi * unit_derived.d),
                                                     rel=1e-12)
    assert abs(z_next) != pytest.approx(abs(z_now), rel=1e-3)
    assert abs(occupation_a(unit, 0.0, 0.0, 1.0 + tau)
               - occupation_a(unit, 0.0, 0.0, 1.0)) <= 1e-10


def test_koch_curve_type():
    curve = koch_generate(2)
    assert isinstance(curve, KochCurve)
    assert curve.level == 2
