import numpy as np
import pytest

from boundary_terms.berry import (
    TwoLevelModel,
    adiabatic_deviation,
    berry_fields,
    berry_phase_loop,
    circular_path,
    comoving,
    curvature_at,
    force_balance,
    loop_holonomy,
    propagate_family,
    solid_angle_phase,
    static_path,
    stencil,
    with_common_phase,
    wrap_phase,
)
from boundary_terms.errors import DegeneracyError, ParameterError, UsageError

MODEL = TwoLevelModel(3)
R0 = (0.6, 0.3, 0.8)


def test_stencil_sizes():
    assert len(stencil(3, 0.1)) == 25
    assert len(stencil(2, 0.1)) == 13
    assert len(set(stencil(3, 0.1))) == 25


def test_static_family_only_rotates_phase():
    fam = propagate_family(MODEL, static_path(R0, 1e-2, 50), 1e-4)
    psi = fam.states[0]
    assert np.max(np.abs(np.abs(psi.conj() @ psi[0]) - 1)) < 1e-9
    assert fam.energies[0, 0] == pytest.approx(-0.5 * np.linalg.norm(R0))


def test_static_balance_reduces_to_the_textbook_theorem():
    fam = comoving(propagate_family(MODEL, static_path(R0, 1e-3, 10), 1e-4))
    b = force_balance(fam, 5)
    assert np.linalg.norm(b.residual) <= 1e-8
    assert np.array_equal(b.boundary, np.zeros(3))
    assert np.linalg.norm(b.lorentz) < 1e-12


def test_static_scalar_potential_sign_and_reality():
    fam = propagate_family(MODEL, static_path(R0, 1e-4, 10), 1e-4)
    s = berry_fields(fam, 5)
    assert s.scalar_potential == pytest.approx(s.energy, abs=1e-8)
    assert s.imag_connection < 1e-8 and s.imag_scalar < 1e-8
    c = comoving(fam)
    a, b = berry_fields(c, 2).connection, berry_fields(c, 8).connection
    assert np.linalg.norm(a - b) < 1e-8


def test_energy_gradient_converges_at_second_order_in_delta():
    R = np.array(R0)
    exact = -R / (2 * np.linalg.norm(R))
    errs = []
    for delta in (2e-2, 1e-2):
        fam = comoving(propagate_family(MODEL, static_path(R0, 1e-3, 4), delta))
        errs.append(np.linalg.norm(force_balance(fam, 2).energy_gradient - exact))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_curvature_is_the_monopole_field():
    for R in ((0.0, 0.0, 1.0), (0.6, 0.3, 0.8), (1.5, -0.5, 0.2)):
        B = curvature_at(MODEL, R)
        r = np.linalg.norm(R)
        assert np.linalg.norm(B) == pytest.approx(1 / (2 * r**2), rel=0.05)
        assert abs(np.dot(B, R) / (np.linalg.norm(B) * r)) == pytest.approx(1.0, abs=1e-3)


def test_planar_model_curvature_is_a_scalar():
    model = TwoLevelModel(2, offset=0.5)
    B = curvature_at(model, (0.4, -0.2))
    b = np.linalg.norm((0.4, -0.2, 0.5))
    assert np.ndim(B) == 0
    assert abs(B) == pytest.approx(0.5 / (2 * b**3), rel=0.05)


def test_holonomy_matches_curvature_flux():
    radius = 0.05
    hol = loop_holonomy(MODEL, (0.0, 0.0, 1.0), radius)
    B = curvature_at(MODEL, (0.0, 0.0, 1.0))
    assert abs(hol) == pytest.approx(abs(B[2]) * np.pi * radius**2, rel=0.01)


def test_slow_circle_balance_shrinks_with_dt_and_delta():
    rel = []
    for step in (1e-3, 1e-4):
        path = circular_path(1.0, 20.0, step, turns=0.01, height=0.5)
        rel.append(force_balance(propagate_family(MODEL, path, step), path.steps // 2).relative)
    assert rel[1] <= 1e-3
    assert rel[1] < rel[0]


def test_common_phase_shifts_only_the_scalar_potential():
    path = circular_path(1.0, 20.0, 1e-3, turns=0.02, height=0.5)
    fam = propagate_family(MODEL, path, 1e-4)
    shifted = with_common_phase(fam, lambda t: 0.7 * t**2)
    m = path.steps // 2
    t = path.times[m]
    a, b = berry_fields(fam, m), berry_fields(shifted, m)
    assert b.scalar_potential - a.scalar_potential == pytest.approx(-1.4 * t, abs=1e-6)
    assert np.linalg.norm(b.connection - a.connection) < 1e-8
    assert np.linalg.norm(force_balance(shifted, m).residual - force_balance(fam, m).residual) < 1e-6


def test_solid_angle_berry_phase():
    assert solid_angle_phase(1.0, 0.0) == pytest.approx(np.pi)
    phase = berry_phase_loop(MODEL, 1.0, 2000.0, 0.05, height=1.0)
    assert abs(wrap_phase(phase - solid_angle_phase(1.0, 1.0))) < 2e-2


def test_adiabatic_deviation_halves_with_doubled_time():
    slow = adiabatic_deviation(MODEL, 1.0, 0.5, 320.0, 0.16, samples=16)
    slower = adiabatic_deviation(MODEL, 1.0, 0.5, 640.0, 0.32, samples=16)
    assert 1.5 <= slow.connection / slower.connection <= 2.5
    assert 1.5 <= slow.scalar / slower.scalar <= 2.5


def test_errors():
    fam = propagate_family(MODEL, static_path(R0, 1e-3, 4), 1e-4)
    with pytest.raises(UsageError):
        berry_fields(fam, 0)
    with pytest.raises(UsageError):
        berry_fields(propagate_family(MODEL, static_path(R0, 1e-3, 4), None), 2)
    with pytest.raises(DegeneracyError):
        propagate_family(MODEL, static_path((0.0, 0.0, 0.0), 1e-3, 4), 1e-4)
    with pytest.raises(ParameterError):
        TwoLevelModel(4)
    with pytest.raises(ParameterError):
        propagate_family(TwoLevelModel(2), static_path(R0, 1e-3, 4))
