"""Uniform 1D grids, quadrature, stencils and boundary evaluation.

Periodic grids hold the points ``x_j = j*h`` for ``j = 0..n-1``.  Quantities
that are not periodic (``x * psi`` on a ring, Bloch states with a twist) are
handled on the *closed* point set ``x_0 .. x_n = L``, whose last value is
built from the analytic rule of the integrand at ``x = L`` rather than by
wrapping.  Dirichlet grids already include both endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import ParameterError, ShapeError

BoundaryCondition = Literal["periodic", "dirichlet"]

MIN_POINTS = 8


@dataclass(frozen=True)
class Grid1D:
    length: float
    point_count: int
    boundary_condition: BoundaryCondition
    spacing: float

    @property
    def periodic(self) -> bool:
        return self.boundary_condition == "periodic"

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.point_count) * self.spacing

    @property
    def closed_points(self) -> np.ndarray:
        """Grid points including ``x = L`` (length n+1 on periodic grids)."""
        if self.periodic:
            return np.arange(self.point_count + 1) * self.spacing
        return self.points

    @property
    def closed_count(self) -> int:
        return self.point_count + 1 if self.periodic else self.point_count


def make_uniform_grid(L: float, n: int, bc: BoundaryCondition = "periodic") -> Grid1D:
    if not np.isfinite(L) or L <= 0:
        raise ParameterError(f"grid length must be positive, got {L!r}")
    if int(n) != n or n < MIN_POINTS:
        raise ParameterError(f"point_count must be an integer >= {MIN_POINTS}, got {n!r}")
    if bc not in ("periodic", "dirichlet"):
        raise ParameterError(f"unknown boundary condition {bc!r}")
    n = int(n)
    h = L / n if bc == "periodic" else L / (n - 1)
    return Grid1D(float(L), n, bc, h)


def _check(f: np.ndarray, g: Grid1D, allow_closed: bool = True) -> np.ndarray:
    f = np.asarray(f)
    sizes = {g.point_count, g.closed_count} if allow_closed else {g.point_count}
    if f.ndim != 1 or f.shape[0] not in sizes:
        raise ShapeError(f"expected {sorted(sizes)} samples, got shape {f.shape}")
    return f


def twist_factor(g: Grid1D, twist: float) -> complex:
    """Bloch factor ``exp(i*twist*L)`` relating f(x + L) to f(x)."""
    return complex(np.exp(1j * twist * g.length)) if twist else 1.0


def close(f: np.ndarray, g: Grid1D, twist: float = 0.0) -> np.ndarray:
    """Append the analytic extension f(L) = exp(i*twist*L) f(0) on periodic grids."""
    f = _check(f, g, allow_closed=False)
    if not g.periodic:
        return f
    return np.concatenate([f, [f[0] * twist_factor(g, twist)]])


def integrate(f: np.ndarray, g: Grid1D) -> complex:
    """Rectangle rule for periodic samples, trapezoid for dirichlet and closed samples."""
    f = _check(f, g)
    h = g.spacing
    if g.periodic and f.shape[0] == g.point_count:
        return h * np.sum(f)
    return h * (np.sum(f) - 0.5 * (f[0] + f[-1]))


def open_derivative(f: np.ndarray, h: float) -> np.ndarray:
    """Central differences with 3-point one-sided stencils at both ends."""
    f = np.asarray(f)
    out = np.empty_like(f, dtype=np.result_type(f, float))
    out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return out


def derivative(f: np.ndarray, g: Grid1D, twist: float = 0.0) -> np.ndarray:
    """Second-order first derivative.

    On periodic grids the stencil wraps with the Bloch factor of ``twist``;
    closed samples (n+1 values) and dirichlet samples use one-sided ends.
    """
    f = _check(f, g)
    if not g.periodic or f.shape[0] == g.closed_count:
        return open_derivative(f, g.spacing)
    phase = twist_factor(g, twist)
    ahead = np.roll(f, -1).astype(np.result_type(f, phase))
    behind = np.roll(f, 1).astype(ahead.dtype)
    ahead[-1] = f[0] * phase
    behind[0] = f[-1] / phase
    return (ahead - behind) / (2 * g.spacing)


def boundary_difference(f: np.ndarray | Callable[[float, int], complex], g: Grid1D) -> complex:
    """Evaluate ``[f]_0^L``.

    ``f`` is either a sample array or a rule ``f(x, j)`` giving the integrand
    at coordinate ``x`` from the data stored at sample ``j``.  For a rule on a
    periodic grid, ``x = L`` is the wrap image of sample 0 evaluated with
    ``x = L`` (so ``x * |psi|^2`` yields ``L |psi(0)|^2``).  Plain periodic
    arrays of length n are periodic by construction and give 0.
    """
    if callable(f):
        last = 0 if g.periodic else g.point_count - 1
        return f(g.length, last) - f(0.0, 0)
    f = _check(f, g)
    if g.periodic and f.shape[0] == g.point_count:
        return f[0] - f[0]
    return f[-1] - f[0]


@dataclass(frozen=True)
class WaveFunction:
    """Complex samples on a grid.

    ``twist`` is the Bloch wave number of the boundary condition
    ``psi(x + L) = exp(i*twist*L) psi(x)`` on periodic grids.
    """

    grid: Grid1D
    samples: np.ndarray
    time: float = 0.0
    twist: float = 0.0

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        _check(s, self.grid, allow_closed=False)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def norm(self) -> float:
        return float(np.sqrt(abs(integrate(np.abs(self.samples) ** 2, self.grid))))

    def normalized(self) -> "WaveFunction":
        return self.with_samples(self.samples / self.norm())

    def with_samples(self, samples: np.ndarray, time: float | None = None) -> "WaveFunction":
        return WaveFunction(self.grid, samples, self.time if time is None else time, self.twist)

    def inner(self, other: "WaveFunction") -> complex:
        """<self|other>, integrated over the closed cell so twists may differ."""
        return complex(integrate(np.conj(self.closed()) * other.closed(), self.grid))

    def closed(self) -> np.ndarray:
        return close(self.samples, self.grid, self.twist)

    def gradient(self) -> np.ndarray:
        return derivative(self.samples, self.grid, self.twist)

    def closed_gradient(self) -> np.ndarray:
        return close(self.gradient(), self.grid, self.twist)

    def closed_second_gradient(self) -> np.ndarray:
        d1 = self.gradient()
        return close(derivative(d1, self.grid, self.twist), self.grid, self.twist)


def plane_wave(g: Grid1D, k: float, time: float = 0.0) -> WaveFunction:
    """Box-normalized ``exp(ikx)/sqrt(L)``; carries twist k unless it is periodic."""
    x = g.points
    twist = 0.0 if np.isclose(np.exp(1j * k * g.length), 1.0, atol=1e-14) else k
    return WaveFunction(g, np.exp(1j * k * x) / np.sqrt(g.length), time, twist)
