import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boundary_terms.currents import expectation
from boundary_terms.dynamics import (
    SuperpositionSpec,
    beat_period,
    energy_drift,
    norm_drift,
    pair_contributions,
    propagate,
    qw_dxdt_series,
    superposition_audit,
    superposition_state,
    well_energy,
    well_position_element,
    well_position_quadrature,
    well_state,
)
from boundary_terms.errors import ParameterError
from boundary_terms.lattice import WaveFunction, make_uniform_grid
from boundary_terms.quantum_ops import POSITION, HamiltonianSpec, eigenstates, free_spec

TWO = SuperpositionSpec((2**-0.5, 2**-0.5))


def test_eigenstate_only_rotates_its_phase():
    g = make_uniform_grid(1.0, 256)
    H = HamiltonianSpec(0.8 * np.cos(2 * np.pi * g.points), 0.3)
    psi = eigenstates(H, g, 1).states[0]
    traj = propagate(H, psi, 1e-3, 200, save_every=20)
    for s in traj:
        assert abs(psi.inner(s)) == pytest.approx(1.0, abs=1e-9)
    assert len(traj) == 11
    assert traj.times[-1] == pytest.approx(0.2)


def test_norm_drift_over_a_thousand_steps():
    g = make_uniform_grid(1.0, 512, "dirichlet")
    traj = propagate(free_spec(g), superposition_state(TWO, g), 1e-4, 1000)
    assert norm_drift(traj) <= 1e-10
    assert energy_drift(free_spec(g), traj) <= 1e-8


def test_mean_position_is_periodic_with_the_beat():
    g = make_uniform_grid(1.0, 1024, "dirichlet")
    T = beat_period(TWO, 1.0)
    assert T == pytest.approx(2 * np.pi / (well_energy(2, 1.0) - well_energy(1, 1.0)))
    traj = propagate(free_spec(g), superposition_state(TWO, g), T / 2000, 2500, save_every=100)
    x = np.array([expectation(POSITION, s).real for s in traj])
    assert np.max(np.abs(x[20:] - x[: len(x) - 20])) < 1e-4
    assert np.ptp(x) > 0.3


def test_series_single_state_and_symmetric_start():
    assert qw_dxdt_series(SuperpositionSpec((1.0,)), 1.0, 0.37) == 0
    assert abs(qw_dxdt_series(TWO, 1.0, 0.0)) < 1e-15


def test_series_peak_velocity():
    T = beat_period(TWO, 1.0)
    t = np.linspace(0, T, 20001)
    v = np.array([qw_dxdt_series(TWO, 1.0, s).real for s in t])
    assert np.max(np.abs(v)) == pytest.approx(8 / 3, abs=1e-6)
    assert qw_dxdt_series(TWO, 1.0, T / 4).real == pytest.approx(8 / 3, abs=1e-12)


def test_series_matches_brute_force_formula():
    w = 3 * np.pi**2 / 2
    x12 = -16 / (9 * np.pi**2)
    for t in (0.05, 0.13, 0.3):
        assert qw_dxdt_series(TWO, 1.0, t).real == pytest.approx(-2 * w * 0.5 * x12 * np.sin(w * t), abs=1e-12)


def test_position_elements():
    g = make_uniform_grid(1.0, 2049, "dirichlet")
    for l, n in ((1, 2), (2, 3), (1, 4), (3, 3)):
        assert well_position_quadrature(l, n, g) == pytest.approx(well_position_element(l, n, 1.0), abs=1e-6)
    assert well_position_element(1, 3, 1.0) == 0.0
    assert well_position_element(2, 1, 2.0) == pytest.approx(-32 / (9 * np.pi**2))


def test_well_state_is_a_lattice_eigenvector():
    g = make_uniform_grid(1.0, 65, "dirichlet")
    lattice = eigenstates(free_spec(g), g, 3)
    for n in (1, 2, 3):
        assert abs(abs(lattice.states[n - 1].inner(WaveFunction(g, well_state(g, n)))) - 1) < 1e-12


def test_three_state_even_pairs_vanish():
    spec = SuperpositionSpec((0.6, 0.64, 0.48))
    terms = pair_contributions(spec, 1.0, 0.21)
    assert terms[(1, 3)] == 0 and terms[(3, 1)] == 0
    assert abs(terms[(1, 2)]) > 0.1 and abs(terms[(2, 3)]) > 0.1


def test_superposition_spec_validation():
    with pytest.raises(ParameterError):
        SuperpositionSpec((0.5, 0.5))
    with pytest.raises(ParameterError):
        SuperpositionSpec((0.6, 0.8), (1, 1))


def test_two_state_audit_over_one_beat():
    a = superposition_audit(TWO, 1.0, 1024, 1e-4, 4246, audit_every=10)
    assert a.max_propagated_vs_series <= 1e-4
    assert a.max_audit_vs_series <= 1e-4
    assert a.max_residual <= 1e-4
    assert a.series_imag <= 1e-12


def test_three_state_audit():
    spec = SuperpositionSpec((0.6, 0.64, 0.48))
    a = superposition_audit(spec, 1.0, 4096, 1e-4, 4246, audit_every=50)
    assert a.max_propagated_vs_series <= 1e-4
    assert a.max_audit_vs_series <= 1e-4


def test_eigenstate_audit_is_quiet():
    a = superposition_audit(SuperpositionSpec((1.0,), (2,)), 1.0, 512, 1e-4, 100)
    assert a.max_deviation <= 1e-6
    assert a.max_residual <= 1e-6


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 2 * np.pi), st.floats(0.1, 0.9), st.floats(0.0, 1.0))
def test_series_is_real_for_any_phases(phase, weight, t):
    c = (np.sqrt(weight), np.sqrt(1 - weight) * np.exp(1j * phase))
    assert abs(qw_dxdt_series(SuperpositionSpec(c), 1.0, t).imag) < 1e-12
