"""Generalized currents, sink terms and continuity residuals.

For an observable ``B`` the generalized current and density are

    J_gen = (i/2) [psi*' (B psi) - psi* (B psi)'] + A psi* (B psi)
    p_gen = psi* (B psi)

and they obey ``dJ_gen/dx + dp_gen/dt = Sigma`` with the sink
``Sigma = psi* (dB/dt + i [H, B]) psi``.  ``B = 1`` gives the probability
current.  Every field is sampled on the closed point set, so the boundary
flux ``J(L) - J(0)`` sees the analytic value at ``x = L``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ShapeError, UsageError
from .lattice import Grid1D, WaveFunction, boundary_difference, derivative, integrate
from .quantum_ops import HamiltonianSpec, ObservableSpec, closed_commutator, observable_jet


@dataclass(frozen=True)
class CurrentField:
    samples: np.ndarray  # closed points
    observable: str
    vector_potential: float


@dataclass(frozen=True)
class SinkField:
    samples: np.ndarray  # closed points
    observable: str


def generalized_current(B: ObservableSpec, psi: WaveFunction, A: float = 0.0) -> CurrentField:
    f, df = psi.closed(), psi.closed_gradient()
    Bf, dBf = observable_jet(B, psi, shift=A)
    J = 0.5j * (np.conj(df) * Bf - np.conj(f) * dBf) + A * np.conj(f) * Bf
    return CurrentField(J, B.tag, A)


def probability_current(psi: WaveFunction, A: float = 0.0) -> np.ndarray:
    """``Im(psi* psi') + A |psi|^2`` on the grid points."""
    s = psi.samples
    return np.imag(np.conj(s) * psi.gradient()) + A * np.abs(s) ** 2


def generalized_density(B: ObservableSpec, psi: WaveFunction, A: float = 0.0) -> np.ndarray:
    return np.conj(psi.closed()) * observable_jet(B, psi, shift=A)[0]


def sink_term(H: HamiltonianSpec, B: ObservableSpec, psi: WaveFunction) -> SinkField:
    f = np.conj(psi.closed())
    sigma = f * B.time_derivative(psi) + 1j * f * closed_commutator(H, B, psi)
    return SinkField(sigma, B.tag)


def boundary_flux(J: CurrentField, g: Grid1D) -> complex:
    """One-dimensional surface integral ``J(L) - J(0)``."""
    return complex(boundary_difference(J.samples, g))


def divergence(J: CurrentField, g: Grid1D) -> np.ndarray:
    """dJ/dx on the closed points (one-sided stencils at both ends)."""
    return derivative(J.samples, g)


def interior(g: Grid1D) -> slice:
    """Closed-point indices that use centered stencils only."""
    return slice(1, g.closed_count - 1)


def continuity_residual(
    B: ObservableSpec,
    H: HamiltonianSpec,
    trajectory: Sequence[WaveFunction],
    dt: float,
) -> float:
    """L2 norm of ``dJ/dx + dp/dt - Sigma`` over interior points and times.

    The norm is ``sqrt(mean_t  h * sum_x |r|^2)``; ``dp/dt`` is a centered
    difference over neighbouring snapshots.
    """
    if len(trajectory) < 3:
        raise UsageError("continuity residual needs at least 3 snapshots")
    if dt <= 0:
        raise UsageError("time step must be positive")
    g = trajectory[0].grid
    a = H.shift
    inner = interior(g)
    dens = [generalized_density(B, psi, a) for psi in trajectory]
    total = 0.0
    for m in range(1, len(trajectory) - 1):
        psi = trajectory[m]
        if psi.grid != g:
            raise ShapeError("trajectory snapshots live on different grids")
        div = divergence(generalized_current(B, psi, a), g)
        dpdt = (dens[m + 1] - dens[m - 1]) / (2 * dt)
        r = (div + dpdt - sink_term(H, B, psi).samples)[inner]
        total += g.spacing * float(np.sum(np.abs(r) ** 2))
    return float(np.sqrt(total / (len(trajectory) - 2)))


def standard_continuity_residual(trajectory: Sequence[WaveFunction], dt: float, A: float = 0.0) -> float:
    """Same norm as :func:`continuity_residual` for ``dj/dx + d|psi|^2/dt``."""
    if len(trajectory) < 3:
        raise UsageError("continuity residual needs at least 3 snapshots")
    g = trajectory[0].grid
    inner = interior(g)
    rho = [np.abs(psi.closed()) ** 2 for psi in trajectory]
    total = 0.0
    for m in range(1, len(trajectory) - 1):
        psi = trajectory[m]
        f, df = psi.closed(), psi.closed_gradient()
        j = np.imag(np.conj(f) * df) + A * np.abs(f) ** 2
        r = (derivative(j, g) + (rho[m + 1] - rho[m - 1]) / (2 * dt))[inner]
        total += g.spacing * float(np.sum(r**2))
    return float(np.sqrt(total / (len(trajectory) - 2)))


def expectation(B: ObservableSpec, psi: WaveFunction, A: float = 0.0) -> complex:
    return complex(integrate(generalized_density(B, psi, A), psi.grid))


def free_particle_cube_flux(k, volume: float = 1.0, face_samples: int = 16) -> complex:
    """Closed-surface integral of ``(-2i k x + x_hat) / V`` over a cube ``[0, a]^3``.

    This is the x-component surface term of a box-normalized plane wave; the
    faces are integrated with the midpoint rule.
    """
    k = np.asarray(k, dtype=float)
    if k.shape != (3,):
        raise ShapeError("k must be a 3-vector")
    if face_samples < 16:
        raise UsageError("face_samples must be at least 16")
    if volume <= 0:
        raise UsageError("volume must be positive")
    a = volume ** (1.0 / 3.0)
    mid = (np.arange(face_samples) + 0.5) * a / face_samples
    dA = (a / face_samples) ** 2
    u, v = np.meshgrid(mid, mid, indexing="ij")

    def field(x):
        return np.stack([-2j * k[0] * x + 1.0, -2j * k[1] * x, -2j * k[2] * x]) / volume

    total = 0.0 + 0.0j
    for axis in range(3):
        for side, sign in ((a, 1.0), (0.0, -1.0)):
            coords = [u, v]
            coords.insert(axis, np.full_like(u, side))
            F = field(coords[0])
            total += sign * np.sum(F[axis]) * dA
    return complex(total)
