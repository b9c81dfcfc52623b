import numpy as np
import pytest
import scipy.linalg

from bateman import closed_form
from bateman.errors import CutoffInsufficient, InvalidParams, ShapeMismatch, ValidationError
from bateman.fock import (
    DensityMatrix,
    FockSpace,
    ModeSpace,
    Operator,
    Propagator,
    State,
    annihilator_check,
    build_hamiltonian,
    casimir_op,
    commutator,
    fock_series,
    hamiltonian_form_gap,
    heisenberg_op,
    ladder_ops,
    number_ops,
    number_state,
    observables,
    overlap,
    parse_initial,
    partial_trace_b,
    propagate,
    shell_population,
    squeezed_vacuum,
    su11_generators,
    vacuum_state,
)
from bateman.model import ModelParams


@pytest.fixture(scope="module")
def space():
    return FockSpace(12, 12)


@pytest.fixture(scope="module")
def engine(space, unit):
    H, H0, HI = build_hamiltonian(space, unit)
    return H, H0, HI


def test_space_indexing():
    sp = FockSpace(3, 2)
    assert sp.dim == 12
    assert sp.index(0, 0) == 0
    assert sp.index(1, 0) == 3
    na, nb = sp.occupations()
    assert na[sp.index(2, 1)] == 2 and nb[sp.index(2, 1)] == 1
    with pytest.raises(ValidationError):
        sp.index(4, 0)
    with pytest.raises(InvalidParams):
        FockSpace(0, 0)


def test_ladder_matrix_elements(space):
    a, ad, b, bd = ladder_ops(space)
    one_zero = number_state(space, 1, 0)
    lowered = a.matrix @ one_zero.vector
    assert lowered[space.index(0, 0)] == pytest.approx(1.0)
    # a†a diagonal with entries n_a
    na, _ = space.occupations()
    assert np.allclose(np.diag((ad @ a).matrix).real, na)
    # ⟨2,0|a†a†|0,0⟩ = √2
    amp = number_state(space, 2, 0).vector.conj() @ (ad.matrix @ ad.matrix
                                                     @ vacuum_state(space).vector)
    assert amp == pytest.approx(np.sqrt(2.0))


def test_ccr_on_interior(space):
    a, ad, _, _ = ladder_ops(space)
    ccr = commutator(a, ad).matrix
    na, nb = space.occupations()
    interior = na < space.na_max
    assert np.allclose(np.diag(ccr).real[interior], 1.0, atol=1e-13)


def test_hamiltonian_structure(space, unit):
    H, H0, HI = build_hamiltonian(space, unit)
    assert H.is_hermitian()
    # pair-coupling matrix element ⟨1,1|H|0,0⟩ = iħΓ
    amp = number_state(space, 1, 1).vector.conj() @ (H.matrix @ vacuum_state(space).vector)
    assert amp == pytest.approx(0.5j, abs=1e-14)
    # free part of the oscillatory engine counts total quanta
    na, nb = space.occupations()
    assert np.allclose(np.diag(H0.matrix).real, na + nb)
    # gain/loss variant: free part is the Casimir combination
    Hm, H0m, _ = build_hamiltonian(space, unit, b_sector_sign=-1)
    assert np.allclose(np.diag(H0m.matrix).real, na - nb)


def test_no_coupling_is_diagonal(space):
    p = ModelParams(m=1.0, omega0=1.0, s=0.0)
    H, _, HI = build_hamiltonian(space, p)
    assert np.max(np.abs(HI.matrix)) == 0.0
    assert np.max(np.abs(H.matrix - np.diag(np.diag(H.matrix)))) == 0.0


def test_casimir_commutes_exactly(space, engine):
    H, _, _ = engine
    C = casimir_op(space)
    assert np.max(np.abs(commutator(H, C).matrix)) == 0.0


def test_su11_algebra(space):
    Kp, Km, K0 = su11_generators(space)
    na, nb = space.occupations()
    interior = (na < space.na_max) & (nb < space.nb_max)
    idx = np.flatnonzero(interior)
    for lhs, rhs in (
        (commutator(K0, Kp).matrix, Kp.matrix),
        (commutator(K0, Km).matrix, -Km.matrix),
        (commutator(Km, Kp).matrix, 2.0 * K0.matrix),
    ):
        assert np.max(np.abs((lhs - rhs)[np.ix_(idx, idx)])) <= 1e-12
    vac = vacuum_state(space).vector
    assert (K0.matrix @ vac)[0] == pytest.approx(0.5)
    assert (commutator(Km, Kp).matrix @ vac)[0] == pytest.approx(1.0)


def test_hamiltonian_su11_reconstruction(space, unit, engine):
    # H = 2ħΩ₀K₀ + iħΓ(K₊−K₋) − ħΩ₀ entrywise
    H, _, _ = engine
    Kp, Km, K0 = su11_generators(space)
    rebuilt = (2.0 * K0.matrix + 0.5j * (Kp.matrix - Km.matrix)
               - np.eye(space.dim))
    assert np.max(np.abs(H.matrix - rebuilt)) <= 1e-14


def test_propagate_identity_and_eigenstate(space, engine, unit):
    H, _, _ = engine
    psi0 = vacuum_state(space)
    assert np.array_equal(propagate(space, H, psi0, 0.0).vector.round(14),
                          psi0.vector.round(14))
    p0 = ModelParams(m=1.0, omega0=1.0, s=0.0)
    H0, _, _ = build_hamiltonian(space, p0)
    one = number_state(space, 1, 0)
    evolved = propagate(space, H0, one, 2.2)
    assert abs(evolved.vector[space.index(1, 0)]) == pytest.approx(1.0, abs=1e-13)
    assert evolved.vector[space.index(1, 0)] == pytest.approx(np.exp(-1j * 2.2), abs=1e-12)


def test_propagation_matches_closed_form(unit, unit_derived):
    # dual-route: the exact engine is the oracle for the closed form and
    # vice versa
    sp = FockSpace(20, 20)
    H, _, _ = build_hamiltonian(sp, unit)
    na_diag, _ = sp.occupations()
    t_grid = np.linspace(0.0, 2.0 * unit_derived.T, 101)
    psi0 = vacuum_state(sp)
    prop_err = 0.0
    for t in t_grid:
        psi = propagate(sp, H, psi0, float(t))
        na = float(np.abs(psi.vector) ** 2 @ na_diag)
        prop_err = max(prop_err, abs(na - closed_form.occupation_a(unit, 0.0, 0.0, float(t))))
    assert prop_err <= 1e-9


def test_sector_decomposition_matches_dense_eigh(unit, rng):
    # block propagation against a full decomposition of the same matrix
    sp = FockSpace(6, 6)
    H, _, _ = build_hamiltonian(sp, unit)
    w, V = np.linalg.eigh(H.matrix)
    psi0 = rng.normal(size=sp.dim) + 1j * rng.normal(size=sp.dim)
    psi0 /= np.linalg.norm(psi0)
    t = 3.7
    dense = V @ (np.exp(-1j * w * t) * (V.conj().T @ psi0))
    block = Propagator(H).state_at(psi0, t)
    assert np.max(np.abs(dense - block)) <= 1e-12


def test_propagator_hbar_scaling():
    p = ModelParams(m=1.0, omega0=1.0, s=1.0, hbar=2.0)
    sp = FockSpace(8, 8)
    H, _, _ = build_hamiltonian(sp, p)
    # dynamics depends on H/ħ = Ω₀(Na+Nb) + iΓ(...): same Γ, Ω₀ as ħ=1
    ref, _, _ = build_hamiltonian(sp, ModelParams(m=1.0, omega0=1.0, s=1.0))
    psi = propagate(sp, H, vacuum_state(sp), 1.3)
    psi_ref = propagate(sp, ref, vacuum_state(sp), 1.3)
    assert np.max(np.abs(psi.vector - psi_ref.vector)) <= 1e-12


def test_heisenberg_identity_and_special_angles(unit, unit_derived):
    sp = FockSpace(30, 30)
    H, _, _ = build_hamiltonian(sp, unit)
    a, ad, b, bd = ladder_ops(sp)
    assert np.max(np.abs(heisenberg_op(sp, H, a, 0.0).matrix - a.matrix)) <= 1e-12
    # Ωt = π maps a → −a (Bogoliubov pair (−1, 0)); compare on a deep block
    t_pi = np.pi / unit_derived.Omega
    aH = heisenberg_op(sp, H, a, t_pi)
    na, nb = sp.occupations()
    block = (na <= 3) & (nb <= 3)
    idx = np.flatnonzero(block)
    assert np.max(np.abs((aH.matrix + a.matrix)[np.ix_(idx, idx)])) <= 5e-9


def test_heisenberg_matches_bogoliubov_block(unit):
    # entrywise a(t) = u a + v b† on occupations whose squeezed image stays
    # well below the cutoff: |n,n⟩ evolves to mean (1+2Γ²/Ω²)n ≈ 1.67n here,
    # so the comparison block must sit much deeper than the shell
    sp = FockSpace(30, 30)
    H, _, _ = build_hamiltonian(sp, unit)
    a, ad, b, bd = ladder_ops(sp)
    t = 2.3
    pair = closed_form.bogoliubov(unit, t)
    aH = heisenberg_op(sp, H, a, t)
    ref = pair.u * a.matrix + pair.v * bd.matrix
    na, nb = sp.occupations()
    idx = np.flatnonzero((na <= 3) & (nb <= 3))
    assert np.max(np.abs((aH.matrix - ref)[np.ix_(idx, idx)])) <= 5e-9


def test_heisenberg_casimir_invariant(space, engine):
    H, _, _ = engine
    C = casimir_op(space)
    Ct = heisenberg_op(space, H, C, 4.1)
    assert np.max(np.abs(Ct.matrix - C.matrix)) <= 1e-11


def test_squeezed_vacuum_zero(space):
    st = squeezed_vacuum(space, 0.0)
    assert st.vector[0] == 1.0


def test_squeezed_vacuum_mean_occupation(unit):
    sp = FockSpace(40, 40)
    st = squeezed_vacuum(sp, 0.5)
    na_diag, _ = sp.occupations()
    mean = float(np.abs(st.vector) ** 2 @ na_diag)
    assert mean == pytest.approx(np.sinh(0.5) ** 2, abs=1e-8)
    assert mean == pytest.approx(0.2715403174076219, abs=1e-8)


def test_squeezed_vacuum_expm_oracle():
    # explicit matrix exponential of ζK₊ − ζ*K₋ applied to the vacuum
    sp = FockSpace(20, 20)
    zeta = 0.4 * np.exp(0.3j)
    Kp, Km, _ = su11_generators(sp)
    gen = zeta * Kp.matrix - np.conj(zeta) * Km.matrix
    brute = scipy.linalg.expm(gen) @ vacuum_state(sp).vector
    st = squeezed_vacuum(sp, zeta)
    assert np.max(np.abs(st.vector - brute)) <= 1e-6


def test_squeezed_vacuum_cutoff_guard():
    with pytest.raises(CutoffInsufficient):
        squeezed_vacuum(FockSpace(4, 4), 1.5)


def test_pair_selection_rule(space, engine):
    # vacuum evolution populates only n_a = n_b
    H, _, _ = engine
    psi = propagate(space, H, vacuum_state(space), 1.7)
    na, nb = space.occupations()
    off = np.abs(psi.vector[na != nb])
    assert np.max(off) <= 1e-12


def test_annihilator_check(unit):
    sp = FockSpace(40, 40)
    H, _, _ = build_hamiltonian(sp, unit)
    assert annihilator_check(sp, H, unit, 0.0) <= 1e-14
    assert annihilator_check(sp, H, unit, 1.0) <= 1e-8
    # truncation sensitivity at a small cutoff
    sp6 = FockSpace(6, 6)
    H6, _, _ = build_hamiltonian(sp6, unit)
    assert annihilator_check(sp6, H6, unit, 1.0) > 1e-4


def test_overlap_family(unit):
    sp = FockSpace(30, 30)
    H, _, _ = build_hamiltonian(sp, unit)
    psi0 = vacuum_state(sp)
    assert overlap(psi0, psi0) == pytest.approx(1.0)
    for t in (1.0, 2.5):
        psi = propagate(sp, H, psi0, t)
        u = closed_form.bogoliubov(unit, t).u
        assert abs(overlap(psi0, psi)) == pytest.approx(1.0 / abs(u), abs=1e-6)
        assert abs(overlap(psi0, psi)) < 1.0
    # brute-force geometric-amplitude oracle: |c_n| = |v/u|ⁿ/|u|
    t = 1.9
    psi = propagate(sp, H, psi0, t)
    pair = closed_form.bogoliubov(unit, t)
    amps = np.array([abs(psi.vector[sp.index(n, n)]) for n in range(10)])
    expected = (np.abs(pair.v) / np.abs(pair.u)) ** np.arange(10) / abs(pair.u)
    assert np.max(np.abs(amps - expected)) <= 1e-10


def test_partial_trace_product_state(space):
    rho = number_state(space, 1, 0).density()
    red = partial_trace_b(rho)
    expect = np.zeros((space.na_max + 1, space.na_max + 1))
    expect[1, 1] = 1.0
    assert np.max(np.abs(red.matrix - expect)) <= 1e-14
    assert red.trace() == pytest.approx(1.0, abs=1e-12)


def test_partial_trace_bell_like(space):
    # (|0,0⟩ + |1,1⟩)/√2 → diag(1/2, 1/2): hand-checked textbook case
    vec = np.zeros(space.dim, dtype=complex)
    vec[space.index(0, 0)] = vec[space.index(1, 1)] = 1.0 / np.sqrt(2.0)
    red = partial_trace_b(State(space, vec).density())
    assert red.matrix[0, 0] == pytest.approx(0.5, abs=1e-14)
    assert red.matrix[1, 1] == pytest.approx(0.5, abs=1e-14)
    assert abs(red.matrix[0, 1]) <= 1e-14


def test_partial_trace_thermal_profile(unit):
    sp = FockSpace(30, 30)
    H, _, _ = build_hamiltonian(sp, unit)
    t = 1.3
    rho_a = partial_trace_b(propagate(sp, H, vacuum_state(sp), t).density())
    off = rho_a.matrix - np.diag(np.diag(rho_a.matrix))
    assert np.max(np.abs(off)) <= 1e-12
    pair = closed_form.bogoliubov(unit, t)
    ratio = np.abs(pair.v) ** 2 / np.abs(pair.u) ** 2
    pn = np.real(np.diag(rho_a.matrix))[:12]
    expected = (1.0 - ratio) * ratio ** np.arange(12)
    assert np.max(np.abs(pn - expected)) <= 1e-10


def test_partial_trace_shape_guard(space):
    red = partial_trace_b(number_state(space, 0, 0).density())
    with pytest.raises(ShapeMismatch):
        partial_trace_b(red)  # already single-mode


def test_observables_pure_vacuum():
    rho = DensityMatrix(ModeSpace(5), np.diag([1.0, 0, 0, 0, 0, 0]).astype(complex))
    obs = observables(rho)
    assert obs == {"mean_n": 0.0, "purity": 1.0, "entropy": 0.0}


def test_observables_thermal_entropy():
    # brute-force eigen-sum oracle for the closed thermal formula at n̄ = 1/3
    nbar = 1.0 / 3.0
    n = np.arange(60)
    pn = (nbar / (1.0 + nbar)) ** n / (1.0 + nbar)
    rho = DensityMatrix(ModeSpace(59), np.diag(pn).astype(complex))
    obs = observables(rho)
    closed = (nbar + 1.0) * np.log(nbar + 1.0) - nbar * np.log(nbar)
    assert closed == pytest.approx(0.7497801928250777, abs=1e-15)
    assert obs["mean_n"] == pytest.approx(nbar, abs=1e-12)
    assert obs["entropy"] == pytest.approx(closed, abs=1e-10)


def test_purity_below_one_when_entangled(unit):
    sp = FockSpace(20, 20)
    H, _, _ = build_hamiltonian(sp, unit)
    rho_a = partial_trace_b(propagate(sp, H, vacuum_state(sp), 0.9).density())
    assert observables(rho_a)["purity"] < 1.0


def test_quadrature_form_gap(unit):
    # the O(θ²) kinetic correction separates the quadrature form from the
    # b_sector_sign=−1 pair form; the oscillatory engine differs at O(ħΩ₀)
    sp = FockSpace(8, 8)
    gap = hamiltonian_form_gap(sp, unit)
    dpA = 0.75  # A at unit parameters; pair form uses A → 1/m = 1
    a, ad, b, bd = ladder_ops(sp)
    Pp = -1j * np.sqrt(0.5) * (a.matrix - ad.matrix)
    Pm = -1j * np.sqrt(0.5) * (b.matrix - bd.matrix)
    na, nb = sp.occupations()
    keep = np.flatnonzero((na <= sp.na_max - 2) & (nb <= sp.nb_max - 2))
    diff = 0.5 * (dpA - 1.0) * (Pp @ Pp - Pm @ Pm)
    expected = np.max(np.abs(diff[np.ix_(keep, keep)]))
    assert gap["lightcone_vs_pair_minus"] == pytest.approx(expected, rel=1e-12)
    assert gap["lightcone_vs_pair_plus"] > 1.0
    # gap vanishes with the deformation
    tiny = hamiltonian_form_gap(sp, ModelParams(m=1.0, omega0=1.0, s=1e-4))
    assert tiny["lightcone_vs_pair_minus"] <= 1e-7


def test_norm_preservation_long_time(unit, unit_derived):
    sp = FockSpace(20, 20)
    H, _, _ = build_hamiltonian(sp, unit)
    psi0 = vacuum_state(sp)
    for frac in (0.25, 0.5, 1.0):
        psi = propagate(sp, H, psi0, frac * 100.0 * unit_derived.T)
        assert abs(psi.norm() - 1.0) <= 1e-10


def test_fock_series_and_guards(unit, unit_derived):
    t = np.linspace(0.0, unit_derived.T, 17)
    series = fock_series(unit, 20, t)
    assert series.header() == ["t", "Na", "Nb", "energy", "purity", "entropy", "overlap0"]
    assert series.column("Na")[0] == pytest.approx(0.0, abs=1e-14)
    # a number state parked at the cutoff trips the shell guard immediately
    with pytest.raises(CutoffInsufficient):
        fock_series(unit, 8, t, initial="number:8,8")


def test_parse_initial(space):
    assert parse_initial(space, "vacuum").vector[0] == 1.0
    st = parse_initial(space, "number:2,1")
    assert st.vector[space.index(2, 1)] == 1.0
    sq = parse_initial(space, "squeezed:0.3,0.1")
    assert shell_population(sq) < 1e-10
    with pytest.raises(InvalidParams):
        parse_initial(space, "number:x,y")
    with pytest.raises(InvalidParams):
        parse_initial(space, "thermal:1.0")
