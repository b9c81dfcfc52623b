"""Poisson and Dirac brackets for linear functions on the 8-d phase space.

The first-order formulation of the dual oscillator lives on the canonical
space with coordinates (Y₁, Y₂, π₁, π₂) and their conjugate momenta.  The
momentum-space deformation term makes the momentum definitions constraints
rather than identities, and the resulting second-class set is eliminated
with Dirac brackets:

    {A, B}_DB = {A, B} − {A, φ_α} (C⁻¹)_{αβ} {φ_β, B},   C_{αβ} = {φ_α, φ_β}.

Everything here is linear, so every bracket is a constant and the whole
algebra can be carried in exact rational arithmetic when the inputs are
`fractions.Fraction` (floats are exact binary rationals, so converting them
keeps the table exact).  The expected end result for s ≠ 0 is

    {Y_i, Y_j}_DB = (s/m²) ε_ij,   {Y_i, π_j}_DB = δ_ij,   {π_i, π_j}_DB = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DimensionMismatch, SingularConstraintMatrix
from .model import ModelParams

BATEMAN_COORDS = ("Y1", "Y2", "P_Y1", "P_Y2", "pi1", "pi2", "P_pi1", "P_pi2")
# conjugate pairs (coordinate, momentum) defining the canonical J
_PAIRS = (("Y1", "P_Y1"), ("Y2", "P_Y2"), ("pi1", "P_pi1"), ("pi2", "P_pi2"))


@dataclass(frozen=True)
class PhaseSpace:
    """Coordinate labels plus the canonical symplectic pairing J (J² = −1)."""

    coords: tuple[str, ...]
    J: tuple[tuple[int, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.coords)

    def axis(self, name: str) -> int:
        return self.coords.index(name)


def bateman_phase_space() -> PhaseSpace:
    n = len(BATEMAN_COORDS)
    J = [[0] * n for _ in range(n)]
    for q, p in _PAIRS:
        i, j = BATEMAN_COORDS.index(q), BATEMAN_COORDS.index(p)
        J[i][j] = 1
        J[j][i] = -1
    return PhaseSpace(coords=BATEMAN_COORDS, J=tuple(tuple(row) for row in J))


@dataclass(frozen=True)
class LinearPhaseFunction:
    """c·ξ + const on a phase space; brackets of two of these are constants."""

    coeffs: tuple
    constant: object = 0

    @classmethod
    def from_terms(cls, ps: PhaseSpace, terms: dict, constant=0) -> "LinearPhaseFunction":
        coeffs = [0] * ps.dim
        for name, value in terms.items():
            coeffs[ps.axis(name)] = value
        return cls(coeffs=tuple(coeffs), constant=constant)

    @classmethod
    def coordinate(cls, ps: PhaseSpace, name: str) -> "LinearPhaseFunction":
        return cls.from_terms(ps, {name: 1})


def poisson_bracket(f: LinearPhaseFunction, g: LinearPhaseFunction, ps: PhaseSpace):
    """{f, g} = fᵀ J g; exact when the coefficients are exact."""
    if len(f.coeffs) != ps.dim or len(g.coeffs) != ps.dim:
        raise DimensionMismatch(
            f"functions of dimension {len(f.coeffs)}/{len(g.coeffs)} "
            f"on a {ps.dim}-d phase space"
        )
    total = 0
    for i, fi in enumerate(f.coeffs):
        if not fi:
            continue
        row = ps.J[i]
        for j, Jij in enumerate(row):
            if Jij:
                total += fi * Jij * g.coeffs[j]
    return total


def _invert(C):
    """Gauss-Jordan inverse over whatever field the entries live in.

    Exact for Fraction entries.  For floats a condition-number guard
    (1e12) rejects nearly singular constraint matrices.
    """
    n = len(C)
    exact = all(isinstance(x, Rational) for row in C for x in row)
    if not exact:
        arr = np.array(C, dtype=float)
        if np.linalg.matrix_rank(arr) < n or np.linalg.cond(arr) > 1e12:
            raise SingularConstraintMatrix("constraint matrix is (near-)singular")
        return [list(map(float, row)) for row in np.linalg.inv(arr)]
    one = Fraction(1)
    aug = [[Fraction(x) for x in row] + [one if i == j else Fraction(0) for j in range(n)]
           for i, row in enumerate(C)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise SingularConstraintMatrix("constraint matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = one / aug[col][col]
        aug[col] = [x * inv_p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


@dataclass(frozen=True)
class ConstraintSet:
    """Second-class constraints with their bracket matrix C and C⁻¹."""

    constraints: tuple
    C: tuple
    C_inv: tuple


def constraint_set(constraints, ps: PhaseSpace) -> ConstraintSet:
    n = len(constraints)
    C = [[poisson_bracket(constraints[i], constraints[j], ps) for j in range(n)]
         for i in range(n)]
    for i in range(n):
        for j in range(n):
            if C[i][j] != -C[j][i]:
                raise SingularConstraintMatrix("constraint matrix is not antisymmetric")
    C_inv = _invert(C)
    return ConstraintSet(
        constraints=tuple(constraints),
        C=tuple(tuple(row) for row in C),
        C_inv=tuple(tuple(row) for row in C_inv),
    )


def bateman_constraints(m, s, ps: PhaseSpace | None = None) -> ConstraintSet:
    """Complete second-class set of the deformed first-order Lagrangian.

    The momentum definitions produce four primary constraints:

        χ_i = P_{Yi} − π_i,
        φ₁ = P_{π1} + (s/2m²) π₂,   φ₂ = P_{π2} − (s/2m²) π₁.

    All four are needed: eliminating only the φ pair leaves the Y sector
    decoupled from π and misses the coordinate noncommutativity entirely.
    At s = 0 the momentum-space deformation vanishes, the φ-sector block
    of C is identically zero and the reduction degenerates to the
    canonical table, so the set is rejected.
    """
    ps = ps or bateman_phase_space()
    if s == 0:
        raise SingularConstraintMatrix(
            "s = 0: deformation block of the constraint matrix vanishes"
        )
    c = _ratio(s, 2) / (_as_number(m) * _as_number(m))
    L = LinearPhaseFunction.from_terms
    chi1 = L(ps, {"P_Y1": 1, "pi1": -1})
    chi2 = L(ps, {"P_Y2": 1, "pi2": -1})
    phi1 = L(ps, {"P_pi1": 1, "pi2": c})
    phi2 = L(ps, {"P_pi2": 1, "pi1": -c})
    return constraint_set([chi1, chi2, phi1, phi2], ps)


def _as_number(x):
    return x if isinstance(x, Rational) else float(x)


def _ratio(num, den):
    if isinstance(num, Rational):
        return Fraction(num) / den
    return float(num) / den


def build_bateman_constraints(p: ModelParams) -> ConstraintSet:
    """Constraint set for the given parameters (float coefficients)."""
    return bateman_constraints(p.m, p.s)


def dirac_bracket(f: LinearPhaseFunction, g: LinearPhaseFunction,
                  cs: ConstraintSet, ps: PhaseSpace):
    """{f,g} − {f,φ_α} (C⁻¹)_{αβ} {φ_β,g}; reduces to the Poisson bracket
    when f and g both commute with every constraint."""
    result = poisson_bracket(f, g, ps)
    f_phi = [poisson_bracket(f, phi, ps) for phi in cs.constraints]
    phi_g = [poisson_bracket(phi, g, ps) for phi in cs.constraints]
    for alpha, fa in enumerate(f_phi):
        if not fa:
            continue
        for beta, gb in enumerate(phi_g):
            if gb:
                result -= fa * cs.C_inv[alpha][beta] * gb
    return result


def verify_bracket_table(p: ModelParams) -> dict:
    """Check the full reduced bracket table in exact rational arithmetic.

    Returns {name: {"expected", "computed", "residual", "pass"}} for every
    bracket among {Y₁, Y₂, π₁, π₂}.  Failures are reported, never raised.
    Floats are lifted to exact rationals, so residuals of a correct
    reduction are literally zero.
    """
    ps = bateman_phase_space()
    m = Fraction(p.m)
    s = Fraction(p.s)
    cs = bateman_constraints(m, s, ps)
    sigma = s / m**2
    names = ("Y1", "Y2", "pi1", "pi2")
    var = {nm: LinearPhaseFunction.coordinate(ps, nm) for nm in names}

    def expected(x: str, y: str):
        ix, iy = names.index(x), names.index(y)
        both_Y = ix < 2 and iy < 2
        both_pi = ix >= 2 and iy >= 2
        if both_Y or both_pi:
            if ix == iy:
                return Fraction(0)
            eps = [[0, 1], [-1, 0]][ix % 2][iy % 2]
            return sigma * eps if both_Y else Fraction(0)
        # mixed: {Y_i, π_j} = δ_ij, antisymmetric under swapping the slots
        if ix % 2 != iy % 2:
            return Fraction(0)
        return Fraction(1) if ix < 2 else Fraction(-1)

    report = {}
    for x in names:
        for y in names:
            want = expected(x, y)
            got = dirac_bracket(var[x], var[y], cs, ps)
            residual = got - want
            report[f"{{{x},{y}}}_DB"] = {
                "expected": float(want),
                "computed": float(got),
                "residual": float(abs(residual)),
                "pass": bool(abs(residual) <= Fraction(1, 10**14)),
            }
    return report
