import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boundary_terms.errors import ParameterError, ShapeError
from boundary_terms.lattice import (
    WaveFunction,
    boundary_difference,
    derivative,
    integrate,
    make_uniform_grid,
    plane_wave,
)
from boundary_terms.dynamics import well_state


@pytest.mark.parametrize(
    "L, n, bc, h",
    [(1.0, 256, "periodic", 1 / 256), (1.0, 257, "dirichlet", 1 / 256), (2 * np.pi, 128, "periodic", 2 * np.pi / 128)],
)
def test_spacing(L, n, bc, h):
    g = make_uniform_grid(L, n, bc)
    assert g.spacing == pytest.approx(h, rel=1e-15)
    assert g.point_count == n


@pytest.mark.parametrize("L, n", [(0.0, 64), (-1.0, 64), (1.0, 7)])
def test_rejects_bad_grids(L, n):
    with pytest.raises(ParameterError):
        make_uniform_grid(L, n)


def test_integrate_constant_and_sine_squared():
    g = make_uniform_grid(1.0, 256)
    assert integrate(np.ones(256), g) == pytest.approx(1.0, abs=1e-14)
    assert integrate(np.sin(2 * np.pi * g.points) ** 2, g) == pytest.approx(0.5, abs=1e-10)


def test_integrate_well_ground_state_is_normalized():
    g = make_uniform_grid(1.0, 1025, "dirichlet")
    assert integrate(np.abs(well_state(g, 1)) ** 2, g) == pytest.approx(1.0, abs=1e-8)


def test_integrate_rejects_wrong_length():
    g = make_uniform_grid(1.0, 64)
    with pytest.raises(ShapeError):
        integrate(np.ones(10), g)


def test_derivative_of_plane_wave_is_second_order():
    errs = []
    for n in (64, 128, 256):
        g = make_uniform_grid(1.0, n)
        f = np.exp(2j * np.pi * g.points)
        errs.append(np.max(np.abs(derivative(f, g) - 2j * np.pi * f)))
    assert 3.5 <= errs[0] / errs[1] <= 4.5
    assert 3.5 <= errs[1] / errs[2] <= 4.5


def test_derivative_of_constant_and_linear():
    g = make_uniform_grid(1.0, 33, "dirichlet")
    assert np.max(np.abs(derivative(np.full(33, 3.0 + 1j), g))) == 0.0
    assert np.max(np.abs(derivative(g.points, g) - 1.0)) < 1e-10


def test_boundary_difference_examples():
    g = make_uniform_grid(1.0, 65, "dirichlet")
    assert boundary_difference(g.points, g) == pytest.approx(1.0)
    ring = make_uniform_grid(1.0, 64)
    u = np.cos(2 * np.pi * ring.points) + 0.3j * np.sin(4 * np.pi * ring.points)
    assert abs(boundary_difference(u, ring)) < 1e-14
    psi = plane_wave(ring, 2 * np.pi)
    assert boundary_difference(lambda x, i: x * abs(psi.closed()[i]) ** 2, ring) == pytest.approx(1.0, abs=1e-10)


def test_closed_points_end_at_length():
    g = make_uniform_grid(2.0, 16)
    assert g.closed_points[-1] == 2.0
    assert g.closed_count == 17


def test_fundamental_theorem_on_dirichlet_grid():
    errs = []
    for n in (65, 129):
        g = make_uniform_grid(1.0, n, "dirichlet")
        f = np.exp(np.sin(3 * g.points))
        errs.append(abs(integrate(derivative(f, g), g) - boundary_difference(f, g)))
    assert errs[1] < errs[0] and errs[1] < 1e-4


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False), min_size=1, max_size=4), st.integers(3, 6))
def test_derivative_of_periodic_function_integrates_to_zero(coeffs, log_n):
    g = make_uniform_grid(1.0, 2**log_n * 4)
    f = sum(c * np.exp(2j * np.pi * (m + 1) * g.points) for m, c in enumerate(coeffs))
    assert abs(integrate(derivative(f, g), g)) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.floats(0.5, 3.0))
def test_quadrature_is_second_order_on_dirichlet_grids(m, L):
    def err(n):
        g = make_uniform_grid(L, n, "dirichlet")
        f = np.exp(g.points / L) * np.cos(m * g.points)
        a = np.exp(1.0) * (np.cos(m * L) / L + m * np.sin(m * L)) / (1 / L**2 + m**2) - 1 / L / (1 / L**2 + m**2)
        return abs(integrate(f, g) - a)

    ratio = err(129) / err(257)
    assert 3.5 <= ratio <= 4.5


def test_wavefunction_inner_and_norm():
    g = make_uniform_grid(1.0, 64)
    psi = WaveFunction(g, 2 * np.exp(2j * np.pi * g.points)).normalized()
    assert psi.norm() == pytest.approx(1.0)
    assert psi.inner(psi) == pytest.approx(1.0)
