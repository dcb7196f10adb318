import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boundary_terms.auditor import (
    AuditReport,
    ab_flux_dependence,
    ehrenfest_audit,
    hf_corrected_slope,
    hf_naive_check,
    hf_slope_from_family,
    hypervirial_check,
    regauge_family,
)
from boundary_terms.dynamics import SuperpositionSpec, propagate, qw_dxdt_series, superposition_state
from boundary_terms.errors import UsageError
from boundary_terms.lattice import make_uniform_grid, plane_wave
from boundary_terms.potentials import random_smooth
from boundary_terms.quantum_ops import MOMENTUM, POSITION, HamiltonianSpec, bloch_family, free_spec

K = 2 * np.pi


def test_free_particle_position_audit_closes_only_with_boundary():
    g = make_uniform_grid(1.0, 2**14)
    r = ehrenfest_audit(free_spec(g), POSITION, plane_wave(g, K))
    assert r.formal_term == pytest.approx(K, abs=1e-6)
    assert r.boundary_term == pytest.approx(K, abs=1e-6)
    assert abs(r.residual) < 1e-8
    assert r.without_boundary().residual == pytest.approx(K, abs=1e-6)
    assert r.recomputed_residual() == r.residual


def test_free_particle_momentum_audit_has_no_boundary_term():
    g = make_uniform_grid(1.0, 256)
    r = ehrenfest_audit(free_spec(g), MOMENTUM, plane_wave(g, K))
    assert abs(r.boundary_term) < 1e-8
    assert abs(r.residual) < 1e-8


def test_residual_arrangement():
    assert AuditReport.combine(2.0, 0.5, 0.25, 1.0) == 0.75


def test_two_state_superposition_audit():
    g = make_uniform_grid(1.0, 1024, "dirichlet")
    H = free_spec(g)
    spec = SuperpositionSpec((2**-0.5, 2**-0.5))
    traj = propagate(H, superposition_state(spec, g, 0.1), 1e-4, 2)
    r = ehrenfest_audit(H, POSITION, traj, time_index=1)
    assert abs(r.residual) < 1e-4
    assert r.observed_derivative.real == pytest.approx(qw_dxdt_series(spec, 1.0, traj[1].time).real, abs=1e-4)
    assert abs(r.observed_derivative) > 1.0


def test_trajectory_audit_validates_input():
    g = make_uniform_grid(1.0, 64, "dirichlet")
    H = free_spec(g)
    spec = SuperpositionSpec((2**-0.5, 2**-0.5))
    traj = propagate(H, superposition_state(spec, g), 1e-4, 4)
    with pytest.raises(UsageError):
        ehrenfest_audit(H, POSITION, traj.states[:2])
    with pytest.raises(UsageError):
        ehrenfest_audit(H, POSITION, traj, time_index=0)
    with pytest.raises(UsageError):
        ehrenfest_audit(H, POSITION, [traj[0], traj[1], traj[3]])


@pytest.mark.parametrize("seed", [0, 7])
def test_hypervirial_random_ring(seed):
    g = make_uniform_grid(1.0, 2048)
    H = HamiltonianSpec(random_smooth(g, 1.0, seed))
    r = hypervirial_check(H, g, 0)
    assert abs(r.residual) < 5e-6
    assert abs(r.extras["integral_form"]) < 5e-6


@pytest.mark.parametrize("band", [0, 1, 2])
def test_hypervirial_empty_well(band):
    g = make_uniform_grid(1.0, 513, "dirichlet")
    r = hypervirial_check(free_spec(g), g, band)
    assert abs(r.residual) < 5e-6
    assert abs(r.extras["integral_form"]) < 5e-6


def test_hypervirial_ab_ring_boundary_is_the_velocity():
    g = make_uniform_grid(1.0, 1024)
    r = hypervirial_check(free_spec(g, vector_potential=np.pi / 2), g, 0)
    assert abs(r.residual) < 5e-6
    assert abs(r.extras["integral_form"]) < 5e-6
    assert r.boundary_term.real == pytest.approx(np.pi / 2, rel=1e-4)


def test_ab_flux_dependence():
    rows = ab_flux_dependence(1.0, [0.0, np.pi, np.pi], n=512)
    assert abs(rows[0].boundary_term - rows[1].boundary_term) > 1.0
    assert rows[1].boundary_term == rows[2].boundary_term
    for row in rows:
        assert abs(row.residual) < 5e-6
    with pytest.raises(UsageError):
        ab_flux_dependence(1.0, [0.0])


def test_naive_hellmann_feynman_paradox():
    g = make_uniform_grid(1.0, 256)
    V = 0.5 * np.cos(2 * np.pi * g.points)
    rec = hf_naive_check(V, g, 1.0, 0)
    assert abs(rec.mean_dHdk) < 1e-12
    assert max(abs(t) for t in rec.minimal_boundary_terms) < 1e-8
    assert rec.minimal_mean_dHdk == pytest.approx(rec.momentum_u + 1.0, abs=1e-12)
    assert abs(rec.minimal_mean_dHdk) > 0.1


def test_corrected_slope_on_empty_lattice():
    g = make_uniform_grid(1.0, 256)
    r = hf_corrected_slope(np.zeros(256), g, 1.0, 0)
    for slope in (r.dE_dk_spectral, r.dE_dk_corrected.real, r.momentum_slope):
        assert slope == pytest.approx(1.0, abs=1e-5)
    assert abs(r.mean_dHdk) == 0.0


def test_corrected_slope_vanishes_at_symmetric_point():
    g = make_uniform_grid(1.0, 256)
    r = hf_corrected_slope(0.5 * np.cos(2 * np.pi * g.points), g, 0.0, 0)
    for slope in (r.dE_dk_spectral, r.dE_dk_corrected, r.momentum_slope):
        assert abs(slope) < 1e-8


@settings(max_examples=10, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(-2.0, 2.0))
def test_slope_is_gauge_invariant(k, amplitude):
    g = make_uniform_grid(1.0, 128)
    V = 0.5 * np.cos(2 * np.pi * g.points)
    fam = bloch_family(V, g, k, 0)
    base = hf_slope_from_family(fam)
    other = hf_slope_from_family(regauge_family(fam, lambda q: amplitude * np.sin(3 * q)))
    assert other.dE_dk_corrected == pytest.approx(base.dE_dk_corrected, abs=1e-6)
    assert other.max_residual() < 1e-5
