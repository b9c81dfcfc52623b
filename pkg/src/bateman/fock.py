"""Exact two-mode quantum engine on a truncated Fock space.

This module is the oracle for every closed-form quantum statement: dense
ladder operators, the coupled-pair Hamiltonian, unitary propagation through
a cached Hermitian eigendecomposition, SU(1,1) structure, two-mode squeezed
states, partial traces and single-mode observables.

Hamiltonian.  The engine Hamiltonian is

    H = ħΩ₀ (a†a + b†b) + iħΓ (a†b† − ab),

whose Heisenberg flow is the bounded Bogoliubov rotation with reduced
frequency Ω = √(Ω₀²−Γ²) (elliptic for Γ < Ω₀): this is the generator whose
solution is u(t) = cos Ωt − i(Ω₀/Ω) sin Ωt, v(t) = (Γ/Ω) sin Ωt, and it is
a linear combination of the SU(1,1) generators 2ħΩ₀K₀ + iħΓ(K₊−K₋) − ħΩ₀.
The variant with the b-sector sign flipped, H₀ = ħΩ₀(a†a − b†b), makes the
free part the conserved Casimir combination but turns the pair coupling
resonant: its flow is hyperbolic (⟨N_a⟩ grows as sinh²Γt) and it cannot
sustain bounded oscillations.  It is available as a diagnostic via
``b_sector_sign=-1``.  Both variants conserve N_a − N_b exactly, even
after truncation, which the propagator exploits by eigendecomposing each
n_a − n_b sector separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closed_form import bogoliubov
from .errors import (
    CutoffInsufficient,
    EigDecompositionFailure,
    InvalidParams,
    ShapeMismatch,
    ValidationError,
)
from .model import ModelParams, derive_params
from .series import TimeSeries

SHELL_TOLERANCE = 1e-10  # max population allowed at the cutoff shell
HERMITICITY_TOL = 1e-13


@dataclass(frozen=True)
class FockSpace:
    """Two-mode truncated space; flat index = n_a·(nb_max+1) + n_b."""

    na_max: int
    nb_max: int

    def __post_init__(self):
        if self.na_max < 1 or self.nb_max < 1:
            raise InvalidParams("cutoffs must be at least 1 (dim >= 4)")

    @property
    def dim(self) -> int:
        return (self.na_max + 1) * (self.nb_max + 1)

    def index(self, na: int, nb: int) -> int:
        if not (0 <= na <= self.na_max and 0 <= nb <= self.nb_max):
            raise ValidationError(f"occupation ({na},{nb}) outside cutoffs")
        return na * (self.nb_max + 1) + nb

    def occupations(self) -> tuple[np.ndarray, np.ndarray]:
        """(n_a, n_b) of every flat index."""
        na = np.repeat(np.arange(self.na_max + 1), self.nb_max + 1)
        nb = np.tile(np.arange(self.nb_max + 1), self.na_max + 1)
        return na, nb


@dataclass(frozen=True)
class ModeSpace:
    """Single bosonic mode, used for reduced density matrices."""

    n_max: int

    @property
    def dim(self) -> int:
        return self.n_max + 1


@dataclass
class Operator:
    space: FockSpace | ModeSpace
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (self.space.dim, self.space.dim):
            raise ShapeMismatch(f"operator shape {self.matrix.shape} != dim {self.space.dim}")

    def dagger(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.space, self.matrix @ other.matrix)
        return NotImplemented

    def __add__(self, other):
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other):
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar):
        return Operator(self.space, scalar * self.matrix)

    __rmul__ = __mul__


def commutator(A: Operator, B: Operator) -> Operator:
    return Operator(A.space, A.matrix @ B.matrix - B.matrix @ A.matrix)


@dataclass
class State:
    space: FockSpace | ModeSpace
    vector: np.ndarray

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=complex)
        if self.vector.shape != (self.space.dim,):
            raise ShapeMismatch(f"state shape {self.vector.shape} != dim {self.space.dim}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def expect(self, op: Operator) -> complex:
        return complex(self.vector.conj() @ (op.matrix @ self.vector))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.vector, self.vector.conj()))


@dataclass
class DensityMatrix:
    space: FockSpace | ModeSpace
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (self.space.dim, self.space.dim):
            raise ShapeMismatch(f"density shape {self.matrix.shape} != dim {self.space.dim}")

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def expect(self, op: Operator) -> float:
        return float(np.trace(self.matrix @ op.matrix).real)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        """Most negative eigenvalue; physical states stay above -1e-8."""
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0])


# ---------------------------------------------------------------------------
# operator constructors

def ladder_ops(space: FockSpace) -> tuple[Operator, Operator, Operator, Operator]:
    """(a, a†, b, b†) with √n matrix elements.

    [a, a†] = 1 holds exactly on occupations n_a < na_max; the last row of
    the truncated commutator deviates, which every cutoff-shell guard in
    this module exists to police.
    """
    def one_mode(nmax):
        return np.diag(np.sqrt(np.arange(1, nmax + 1, dtype=float)), 1)

    Ia = np.eye(space.na_max + 1)
    Ib = np.eye(space.nb_max + 1)
    a = Operator(space, np.kron(one_mode(space.na_max), Ib))
    b = Operator(space, np.kron(Ia, one_mode(space.nb_max)))
    return a, a.dagger(), b, b.dagger()


def number_ops(space: FockSpace) -> tuple[Operator, Operator]:
    na, nb = space.occupations()
    return (Operator(space, np.diag(na.astype(complex))),
            Operator(space, np.diag(nb.astype(complex))))


def build_hamiltonian(space: FockSpace, params: ModelParams,
                      b_sector_sign: int = +1) -> tuple[Operator, Operator, Operator]:
    """(H, H₀, H_I) with H₀ = ħΩ₀(a†a ± b†b) and H_I = iħΓ(a†b† − ab).

    The default ``b_sector_sign=+1`` is the oscillatory engine (see module
    docstring); ``-1`` gives the hyperbolic gain/loss form whose free part
    is the conserved Casimir combination ħΩ₀(N_a−N_b).
    """
    if b_sector_sign not in (+1, -1):
        raise InvalidParams("b_sector_sign must be +1 or -1")
    dp = derive_params(params)
    a, ad, b, bd = ladder_ops(space)
    na, nb = space.occupations()
    h0 = params.hbar * params.omega0 * (na + b_sector_sign * nb)
    H0 = Operator(space, np.diag(h0.astype(complex)))
    HI = Operator(space, 1j * params.hbar * dp.Gamma * (ad.matrix @ bd.matrix - a.matrix @ b.matrix))
    H = H0 + HI
    if not H.is_hermitian():
        raise EigDecompositionFailure("assembled Hamiltonian is not Hermitian")
    H.hbar = H0.hbar = HI.hbar = params.hbar
    return H, H0, HI


def su11_generators(space: FockSpace) -> tuple[Operator, Operator, Operator]:
    """K₊ = a†b†, K₋ = ab, K₀ = (a†a + b†b + 1)/2."""
    a, ad, b, bd = ladder_ops(space)
    na, nb = space.occupations()
    Kp = Operator(space, ad.matrix @ bd.matrix)
    Km = Operator(space, a.matrix @ b.matrix)
    K0 = Operator(space, np.diag(0.5 * (na + nb + 1).astype(complex)))
    return Kp, Km, K0


def casimir_op(space: FockSpace) -> Operator:
    """N_a − N_b: commutes exactly with the pair coupling, truncated or not."""
    na, nb = space.occupations()
    return Operator(space, np.diag((na - nb).astype(complex)))


def lightcone_hamiltonian(space: FockSpace, params: ModelParams) -> Operator:
    """Quadrature form ½(mΩ₀²X₊²+AP₊²) − ½(mΩ₀²X₋²+AP₋²) + Γ(X₊P₋+X₋P₊).

    Carries the full kinetic coefficient A = 1/m − mΩ₀²θ²/4ħ², i.e. the
    O(θ²) correction that the pair form drops when A → 1/m.
    """
    dp = derive_params(params)
    a, ad, b, bd = ladder_ops(space)
    xs = np.sqrt(params.hbar / (2.0 * params.m * params.omega0))
    ps = np.sqrt(params.m * params.omega0 * params.hbar / 2.0)
    Xp = xs * (a.matrix + ad.matrix)
    Pp = -1j * ps * (a.matrix - ad.matrix)
    Xm = xs * (b.matrix + bd.matrix)
    Pm = -1j * ps * (b.matrix - bd.matrix)
    w2m = params.m * params.omega0**2
    Hm = (0.5 * (w2m * Xp @ Xp + dp.A * Pp @ Pp)
          - 0.5 * (w2m * Xm @ Xm + dp.A * Pm @ Pm)
          + dp.Gamma * (Xp @ Pm + Xm @ Pp))
    return Operator(space, Hm)


def hamiltonian_form_gap(space: FockSpace, params: ModelParams) -> dict:
    """Interior max-entry gaps between the quadrature form and both pair forms.

    The quadrature form matches the b_sector_sign=−1 pair form up to the
    O(θ²) kinetic correction; against the oscillatory engine the gap is
    O(ħΩ₀) because the free parts differ by 2ħΩ₀ b†b.  The two outermost
    occupation shells are excluded: the truncated quadratures corrupt the
    harmonic identity X², P² ↔ 2n+1 there regardless of θ.
    """
    na, nb = space.occupations()
    keep = np.flatnonzero((na <= space.na_max - 2) & (nb <= space.nb_max - 2))
    block = np.ix_(keep, keep)
    H_lc = lightcone_hamiltonian(space, params)
    H_minus, _, _ = build_hamiltonian(space, params, b_sector_sign=-1)
    H_plus, _, _ = build_hamiltonian(space, params, b_sector_sign=+1)
    return {
        "lightcone_vs_pair_minus": float(np.max(np.abs((H_lc.matrix - H_minus.matrix)[block]))),
        "lightcone_vs_pair_plus": float(np.max(np.abs((H_lc.matrix - H_plus.matrix)[block]))),
    }


# ---------------------------------------------------------------------------
# propagation

@dataclass
class _SectorDecomposition:
    indices: list[np.ndarray]
    eigvals: list[np.ndarray]
    eigvecs: list[np.ndarray]


class Propagator:
    """Cached Hermitian eigendecomposition of one Hamiltonian.

    When the matrix is block diagonal in the conserved grading n_a − n_b
    (checked exactly), each sector is decomposed separately; otherwise a
    single dense decomposition is used.  Long-time evolution then costs a
    phase rotation in the eigenbasis, with no step error.
    """

    def __init__(self, H: Operator, hbar: float | None = None):
        if not isinstance(H.space, FockSpace):
            raise ShapeMismatch("propagation requires a two-mode FockSpace operator")
        if not H.is_hermitian():
            raise EigDecompositionFailure("Hamiltonian must be Hermitian")
        self.space = H.space
        self.H = H
        self.hbar = float(hbar if hbar is not None else getattr(H, "hbar", 1.0))
        na, nb = H.space.occupations()
        grading = na - nb
        self._decomp = self._decompose(H.matrix, grading)

    @staticmethod
    def _graded(matrix: np.ndarray, grading: np.ndarray) -> bool:
        mask = grading[:, None] != grading[None, :]
        return not np.any(matrix[mask])

    def _decompose(self, matrix, grading) -> _SectorDecomposition:
        try:
            if self._graded(matrix, grading):
                indices, eigvals, eigvecs = [], [], []
                for value in np.unique(grading):
                    idx = np.flatnonzero(grading == value)
                    w, V = np.linalg.eigh(matrix[np.ix_(idx, idx)])
                    indices.append(idx)
                    eigvals.append(w)
                    eigvecs.append(V)
                return _SectorDecomposition(indices, eigvals, eigvecs)
            w, V = np.linalg.eigh(matrix)
            return _SectorDecomposition([np.arange(matrix.shape[0])], [w], [V])
        except np.linalg.LinAlgError as exc:
            raise EigDecompositionFailure(str(exc)) from exc

    def state_at(self, psi0: np.ndarray, t: float) -> np.ndarray:
        scaled = t / self.hbar
        out = np.zeros_like(psi0, dtype=complex)
        for idx, w, V in zip(self._decomp.indices, self._decomp.eigvals, self._decomp.eigvecs):
            block = psi0[idx]
            if np.any(block):
                out[idx] = V @ (np.exp(-1j * w * scaled) * (V.conj().T @ block))
        return out

    def unitary(self, t: float) -> np.ndarray:
        scaled = t / self.hbar
        dim = self.space.dim
        U = np.zeros((dim, dim), dtype=complex)
        for idx, w, V in zip(self._decomp.indices, self._decomp.eigvals, self._decomp.eigvecs):
            U[np.ix_(idx, idx)] = (V * np.exp(-1j * w * scaled)) @ V.conj().T
        return U


def _propagator(H: Operator) -> Propagator:
    # cached on the operator instance; idempotent, so a racing rebuild is benign
    prop = getattr(H, "_cached_propagator", None)
    if prop is None:
        prop = Propagator(H)
        H._cached_propagator = prop
    return prop


def vacuum_state(space: FockSpace) -> State:
    vec = np.zeros(space.dim, dtype=complex)
    vec[space.index(0, 0)] = 1.0
    return State(space, vec)


def number_state(space: FockSpace, na: int, nb: int) -> State:
    vec = np.zeros(space.dim, dtype=complex)
    vec[space.index(na, nb)] = 1.0
    return State(space, vec)


def propagate(space: FockSpace, H: Operator, psi0: State, t: float) -> State:
    """ψ(t) = e^{−iHt/ħ} ψ₀ through the cached eigendecomposition.

    The builders attach the ħ they were given to the operator (attribute
    ``hbar``); bare operators default to ħ = 1.
    """
    psi = _propagator(H).state_at(psi0.vector, t)
    return State(space, psi)


def heisenberg_op(space: FockSpace, H: Operator, O: Operator, t: float) -> Operator:
    """O(t) = U†(t) O U(t) with U = e^{−iHt}."""
    U = _propagator(H).unitary(t)
    return Operator(space, U.conj().T @ (O.matrix @ U))


def shell_population(state: State) -> float:
    """Probability mass on the cutoff shell (n_a = na_max or n_b = nb_max)."""
    space = state.space
    na, nb = space.occupations()
    mask = (na == space.na_max) | (nb == space.nb_max)
    return float(np.sum(np.abs(state.vector[mask]) ** 2))


def require_cutoff(state: State, tol: float = SHELL_TOLERANCE) -> None:
    pop = shell_population(state)
    if pop >= tol:
        raise CutoffInsufficient(
            f"cutoff-shell population {pop:.3e} >= {tol:.0e}; enlarge the space"
        )


def squeezed_vacuum(space: FockSpace, zeta: complex) -> State:
    """|0(ζ)⟩ = e^{ζK₊ − ζ*K₋}|0,0⟩ via its pair expansion.

    The exact coefficients are (e^{iφ} tanh r)ⁿ / cosh r on |n,n⟩ for
    ζ = r e^{iφ}; ⟨N_a⟩ = sinh²r.  Raises CutoffInsufficient when the
    population at the cutoff shell would exceed the shell tolerance.
    """
    r = abs(zeta)
    vec = np.zeros(space.dim, dtype=complex)
    if r == 0:
        vec[space.index(0, 0)] = 1.0
        return State(space, vec)
    phase = zeta / r
    n_pair = min(space.na_max, space.nb_max)
    amp = (phase * np.tanh(r)) ** np.arange(n_pair + 1) / np.cosh(r)
    if abs(amp[-1]) ** 2 >= SHELL_TOLERANCE:
        raise CutoffInsufficient(
            f"squeezing |zeta| = {r} populates the cutoff shell above {SHELL_TOLERANCE:.0e}"
        )
    for n in range(n_pair + 1):
        vec[space.index(n, n)] = amp[n]
    state = State(space, vec / np.linalg.norm(vec))
    return state


def annihilator_check(space: FockSpace, H: Operator, params: ModelParams, t: float) -> float:
    """‖(u* a − v b†) ψ(t)‖ for the propagated vacuum.

    u* a − v b† is the instantaneous annihilator of the evolved vacuum
    (the −t Bogoliubov image of a), so the residual is pure truncation
    plus roundoff.
    """
    pair = bogoliubov(params, t)
    a, _, _, bd = ladder_ops(space)
    psi = propagate(space, H, vacuum_state(space), t)
    vec = np.conj(pair.u) * (a.matrix @ psi.vector) - pair.v * (bd.matrix @ psi.vector)
    return float(np.linalg.norm(vec))


def overlap(psi1: State, psi2: State) -> complex:
    if psi1.space != psi2.space:
        raise ShapeMismatch("overlap of states on different spaces")
    return complex(psi1.vector.conj() @ psi2.vector)


def partial_trace_b(rho: DensityMatrix) -> DensityMatrix:
    """(ρ_a)_{mn} = Σ_k ρ_{(m,k),(n,k)}; trace and Hermiticity preserved."""
    space = rho.space
    if not isinstance(space, FockSpace):
        raise ShapeMismatch("partial trace expects a two-mode density matrix")
    da, db = space.na_max + 1, space.nb_max + 1
    reshaped = rho.matrix.reshape(da, db, da, db)
    reduced = np.einsum("akbk->ab", reshaped)
    return DensityMatrix(ModeSpace(space.na_max), reduced)


def observables(rho_a: DensityMatrix) -> dict:
    """{mean_n, purity, entropy}; entropy from eigenvalues ≥ 1e−14."""
    n = np.arange(rho_a.space.dim)
    mean_n = float(np.real(np.diag(rho_a.matrix)) @ n)
    purity = float(np.trace(rho_a.matrix @ rho_a.matrix).real)
    lam = np.linalg.eigvalsh(rho_a.matrix)
    lam = lam[lam >= 1e-14]
    entropy = float(-np.sum(lam * np.log(lam)))
    return {"mean_n": mean_n, "purity": purity, "entropy": entropy}


def parse_initial(space: FockSpace, spec: str) -> State:
    """CLI initial-state grammar: vacuum | number:na,nb | squeezed:re,im."""
    if spec == "vacuum":
        return vacuum_state(space)
    kind, _, rest = spec.partition(":")
    if kind == "number":
        try:
            na, nb = (int(x) for x in rest.split(","))
        except ValueError as exc:
            raise InvalidParams(f"bad number state spec {spec!r}") from exc
        return number_state(space, na, nb)
    if kind == "squeezed":
        try:
            re, im = (float(x) for x in rest.split(","))
        except ValueError as exc:
            raise InvalidParams(f"bad squeezed state spec {spec!r}") from exc
        return squeezed_vacuum(space, complex(re, im))
    raise InvalidParams(f"unknown initial state {spec!r}")


def fock_series(params: ModelParams, cutoff: int, t_grid,
                initial: str | State = "vacuum") -> TimeSeries:
    """Propagate and tabulate t, Na, Nb, energy, purity, entropy, overlap0.

    The cutoff-shell population is checked at every sample; exceeding the
    shell tolerance raises CutoffInsufficient rather than returning
    silently truncated numbers.
    """
    space = FockSpace(cutoff, cutoff)
    H, _, _ = build_hamiltonian(space, params)
    psi0 = parse_initial(space, initial) if isinstance(initial, str) else initial
    na_diag, nb_diag = space.occupations()
    t = np.asarray(t_grid, dtype=float)
    prop = _propagator(H)
    cols = {name: np.empty(t.size) for name in
            ("Na", "Nb", "energy", "purity", "entropy", "overlap0")}
    for i, ti in enumerate(t):
        vec = prop.state_at(psi0.vector, float(ti))
        state = State(space, vec)
        require_cutoff(state)
        prob = np.abs(vec) ** 2
        cols["Na"][i] = prob @ na_diag
        cols["Nb"][i] = prob @ nb_diag
        cols["energy"][i] = np.real(vec.conj() @ (H.matrix @ vec))
        rho_a = partial_trace_b(state.density())
        obs = observables(rho_a)
        cols["purity"][i] = obs["purity"]
        cols["entropy"][i] = obs["entropy"]
        cols["overlap0"][i] = abs(complex(psi0.vector.conj() @ vec))
    return TimeSeries(t=t, channels=cols)
