import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boundary_terms.errors import DegeneracyError, IntegrityError, ParameterError
from boundary_terms.lattice import WaveFunction, integrate, make_uniform_grid, plane_wave
from boundary_terms.quantum_ops import (
    IDENTITY,
    MOMENTUM,
    POSITION,
    HamiltonianSpec,
    apply_observable,
    bloch_family,
    build_hamiltonian,
    check_hermitian,
    eigenstate_k_derivative,
    eigenstates,
    formal_commutator_apply,
    free_spec,
    solve_eigen,
)


def expect(psi, samples):
    return integrate(np.conj(psi.samples) * samples, psi.grid)


def test_free_ring_spectrum():
    g = make_uniform_grid(1.0, 256)
    E = eigenstates(free_spec(g), g, 3).energies
    assert E[0] == pytest.approx(0.0, abs=1e-9)  # roundoff relative to |H| ~ 1/h^2
    assert E[1:] == pytest.approx([2 * np.pi**2] * 2, rel=1e-3)


def test_infinite_well_levels():
    g = make_uniform_grid(1.0, 257, "dirichlet")
    E = eigenstates(free_spec(g), g, 2).energies
    assert E[0] == pytest.approx(np.pi**2 / 2, rel=1e-3)
    assert E[1] / E[0] == pytest.approx(4.0, rel=1e-3)


def test_half_flux_ring_ground_energy():
    g = make_uniform_grid(1.0, 256)
    E = eigenstates(free_spec(g, vector_potential=np.pi), g, 1).energies
    assert E[0] == pytest.approx(np.pi**2 / 2, rel=1e-3)


def test_hamiltonian_is_hermitian_dense_and_sparse():
    g = make_uniform_grid(1.0, 64)
    rng = np.random.default_rng(1)
    spec = HamiltonianSpec(rng.standard_normal(64), 0.4, 1.1)
    H = build_hamiltonian(spec, g)
    check_hermitian(H)
    assert np.allclose(build_hamiltonian(spec, g, sparse=True).toarray(), H)


def test_check_hermitian_rejects():
    with pytest.raises(IntegrityError):
        check_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_potential_must_be_real_and_sized():
    with pytest.raises(ParameterError):
        HamiltonianSpec(np.array([1j, 0, 0]))
    g = make_uniform_grid(1.0, 16)
    with pytest.raises(ParameterError):
        build_hamiltonian(HamiltonianSpec(np.zeros(8)), g)


def test_eigenvectors_are_normalized_and_count_checked():
    g = make_uniform_grid(1.0, 64, "dirichlet")
    sol = eigenstates(free_spec(g), g, 4)
    for psi in sol.states:
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ParameterError):
        solve_eigen(build_hamiltonian(free_spec(g), g), 0, g)


def test_apply_observable_examples():
    g = make_uniform_grid(1.0, 256)
    psi = WaveFunction(g, np.exp(2j * np.pi * g.points))
    assert np.array_equal(apply_observable(IDENTITY, psi)[:256], psi.samples)
    assert np.allclose(apply_observable(POSITION, psi)[:256], g.points * psi.samples)
    p = apply_observable(MOMENTUM, psi)[:256]
    assert np.max(np.abs(p - 2 * np.pi * psi.samples)) < 1e-3


def test_formal_commutator_examples():
    g = make_uniform_grid(1.0, 512)
    k = 2 * np.pi
    psi = plane_wave(g, k)
    H = free_spec(g)
    assert (1j * expect(psi, formal_commutator_apply(H, POSITION, psi))).real == pytest.approx(k, rel=1e-4)
    assert np.max(np.abs(formal_commutator_apply(H, IDENTITY, psi))) == 0.0
    well = make_uniform_grid(1.0, 257, "dirichlet")
    ground = eigenstates(free_spec(well), well, 1).states[0]
    assert abs(expect(ground, formal_commutator_apply(free_spec(well), MOMENTUM, ground))) < 1e-12


def test_k_derivative_on_empty_lattice():
    g = make_uniform_grid(1.0, 128)
    V = np.zeros(128)
    errs = []
    for step in (2e-2, 1e-2):
        fam = bloch_family(V, g, 1.0, 0, step)
        centre = fam.states[1]
        exact = 1j * (g.points - 0.5) * centre.samples
        errs.append(np.max(np.abs(eigenstate_k_derivative(fam) - exact)))
    assert errs[1] < 1e-4
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_k_derivative_is_imaginary_at_k0_in_symmetric_potential():
    g = make_uniform_grid(1.0, 128)
    V = 0.5 * np.cos(2 * np.pi * g.points)
    fam = bloch_family(V, g, 0.0, 0, 1e-4)
    d = eigenstate_k_derivative(fam)
    assert np.max(np.abs(fam.states[1].samples.imag)) < 1e-12
    assert np.max(np.abs(d.real)) < 1e-6 * np.max(np.abs(d))


def test_degenerate_band_raises():
    g = make_uniform_grid(1.0, 64)
    with pytest.raises(DegeneracyError):
        bloch_family(np.zeros(64), g, np.pi, 0, 1e-12)


@settings(max_examples=15, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(-2.0, 2.0), st.integers(0, 2**16))
def test_eigenpairs_satisfy_the_discrete_equation(A, k, seed):
    g = make_uniform_grid(1.0, 32)
    V = np.random.default_rng(seed).standard_normal(32)
    spec = HamiltonianSpec(V, A, k)
    H = build_hamiltonian(spec, g)
    sol = eigenstates(spec, g, 3)
    for E, psi in zip(sol.energies, sol.states):
        assert np.max(np.abs(H @ psi.samples - E * psi.samples)) < 1e-9
