"""Crank-Nicolson propagation and the infinite-well superposition series.

For ``psi = sum_n C_n exp(-i E_n t) phi_n`` the velocity is

    d<x>/dt = i sum_{n,l} C_l* C_n exp(i (E_l - E_n) t) (E_l - E_n) x_ln

with ``x_ln = int x phi_l phi_n``.  In the well ``[0, L]`` the off-diagonal
elements vanish unless ``l - n`` is odd.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .auditor import ehrenfest_audit
from .currents import expectation
from .errors import NumericalError, ParameterError, UsageError
from .lattice import Grid1D, WaveFunction, integrate, make_uniform_grid
from .quantum_ops import POSITION, HamiltonianSpec, build_hamiltonian, energy, free_spec

NORM_TOL = 1e-12


@dataclass(frozen=True)
class Trajectory:
    states: tuple[WaveFunction, ...]
    dt: float
    hamiltonian: HamiltonianSpec

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError("dt must be positive")

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def __iter__(self):
        return iter(self.states)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])


def _cn_steps(H: HamiltonianSpec, psi0: WaveFunction, dt: float) -> Iterator[WaveFunction]:
    """Yield ``psi0`` and then every Crank-Nicolson step, indefinitely."""
    if not dt > 0:
        raise ParameterError("dt must be positive")
    if psi0.twist:
        raise UsageError("propagation of twisted states is not supported")
    g = psi0.grid
    M = build_hamiltonian(H, g, sparse=True).tocsc()
    eye = scipy.sparse.identity(g.point_count, dtype=complex, format="csc")
    try:
        lu = scipy.sparse.linalg.splu((eye + 0.5j * dt * M).tocsc())
    except RuntimeError as exc:
        raise NumericalError(f"Crank-Nicolson factorization failed: {exc}") from exc
    rhs = (eye - 0.5j * dt * M).tocsr()
    s = np.array(psi0.samples)
    t0 = psi0.time
    step = 0
    while True:
        yield WaveFunction(g, s, t0 + step * dt, 0.0)
        s = lu.solve(rhs @ s)
        if not np.all(np.isfinite(s)):
            raise NumericalError("non-finite values during propagation")
        step += 1


def propagate(H: HamiltonianSpec, psi0: WaveFunction, dt: float, steps: int, save_every: int = 1) -> Trajectory:
    """``(1 + i dt H / 2) psi_{t+dt} = (1 - i dt H / 2) psi_t`` for ``steps`` steps."""
    if steps < 0 or save_every < 1:
        raise ParameterError("steps must be >= 0 and save_every >= 1")
    saved = []
    for i, psi in enumerate(_cn_steps(H, psi0, dt)):
        if i % save_every == 0:
            saved.append(psi)
        if i == steps:
            break
    return Trajectory(tuple(saved), dt * save_every, H)


# ------------------------------------------------------------------ the well


@dataclass(frozen=True)
class SuperpositionSpec:
    """Coefficients ``C_n`` on well levels ``levels`` (1-based quantum numbers)."""

    coefficients: tuple[complex, ...]
    levels: tuple[int, ...] | None = None

    def __post_init__(self):
        c = tuple(complex(x) for x in self.coefficients)
        levels = tuple(range(1, len(c) + 1)) if self.levels is None else tuple(int(n) for n in self.levels)
        if len(levels) != len(c) or not c:
            raise ParameterError("need one level per coefficient")
        if min(levels) < 1 or len(set(levels)) != len(levels):
            raise ParameterError("levels must be distinct positive integers")
        if abs(sum(abs(x) ** 2 for x in c) - 1.0) > NORM_TOL:
            raise ParameterError("coefficients are not normalized")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "levels", levels)


def well_energy(n: int, L: float) -> float:
    return (n * np.pi / L) ** 2 / 2


def well_state(g: Grid1D, n: int) -> np.ndarray:
    """``sqrt(2/L) sin(n pi x / L)`` (an exact eigenvector of the lattice well)."""
    return np.sqrt(2 / g.length) * np.sin(n * np.pi * g.points / g.length)


def well_position_element(l: int, n: int, L: float) -> float:
    """Closed form of ``int_0^L x phi_l phi_n dx``."""
    if l == n:
        return L / 2
    if (l - n) % 2 == 0:
        return 0.0
    return -8 * L * l * n / (np.pi**2 * (l * l - n * n) ** 2)


def well_position_quadrature(l: int, n: int, g: Grid1D) -> float:
    return float(integrate(g.points * well_state(g, l) * well_state(g, n), g).real)


def pair_contributions(spec: SuperpositionSpec, L: float, t: float, energies=None) -> dict[tuple[int, int], complex]:
    """Terms ``(l, n)`` of the double sum, ``l != n``."""
    E = {n: well_energy(n, L) for n in spec.levels} if energies is None else dict(zip(spec.levels, energies))
    out = {}
    for cl, l in zip(spec.coefficients, spec.levels):
        for cn, n in zip(spec.coefficients, spec.levels):
            if l == n:
                continue
            out[(l, n)] = (
                1j * np.conj(cl) * cn * np.exp(1j * (E[l] - E[n]) * t) * (E[l] - E[n]) * well_position_element(l, n, L)
            )
    return out


def qw_dxdt_series(spec: SuperpositionSpec, L: float, t: float, n_max: int | None = None, energies=None) -> complex:
    """``d<x>/dt`` of a well superposition from the matrix-element double sum.

    Returned complex so callers can confirm the imaginary part cancels.
    """
    if L <= 0:
        raise ParameterError("L must be positive")
    if n_max is not None and max(spec.levels) > n_max:
        raise ParameterError("a level exceeds n_max")
    return complex(sum(pair_contributions(spec, L, t, energies).values(), 0j))


def superposition_state(spec: SuperpositionSpec, g: Grid1D, t: float = 0.0) -> WaveFunction:
    """The superposition at time ``t`` with the continuum phases ``exp(-i E_n t)``."""
    s = sum(
        c * np.exp(-1j * well_energy(n, g.length) * t) * well_state(g, n) for c, n in zip(spec.coefficients, spec.levels)
    )
    return WaveFunction(g, s, t)


def beat_period(spec: SuperpositionSpec, L: float) -> float:
    """Period of the slowest beat present (``2 pi / min |E_l - E_n|``)."""
    E = sorted(well_energy(n, L) for n in spec.levels)
    if len(E) < 2:
        return 0.0
    return 2 * np.pi / min(b - a for a, b in zip(E, E[1:]))


@dataclass(frozen=True)
class SuperpositionAudit:
    times: np.ndarray
    propagated: np.ndarray  # (a) centered differences of <x>
    series: np.ndarray  # (b)
    predicted: np.ndarray  # (c) formal - boundary from the Ehrenfest audit
    residuals: np.ndarray  # Ehrenfest residual per time
    norm_drift: float
    energy_drift: float
    n: int
    dt: float

    @property
    def max_propagated_vs_series(self) -> float:
        return float(np.max(np.abs(self.propagated - self.series), initial=0.0))

    @property
    def max_audit_vs_series(self) -> float:
        return float(np.max(np.abs(self.predicted - self.series), initial=0.0))

    @property
    def max_propagated_vs_audit(self) -> float:
        return float(np.max(np.abs(self.propagated - self.predicted), initial=0.0))

    @property
    def max_deviation(self) -> float:
        return max(self.max_propagated_vs_series, self.max_audit_vs_series, self.max_propagated_vs_audit)

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals), initial=0.0))

    @property
    def series_imag(self) -> float:
        return float(np.max(np.abs(self.series.imag), initial=0.0))


def superposition_audit(
    spec: SuperpositionSpec, L: float, n: int, dt: float, steps: int, audit_every: int = 1
) -> SuperpositionAudit:
    """Propagate a well superposition and compare velocity estimates along the run."""
    if steps < 2:
        raise ParameterError("need at least 2 steps")
    g = make_uniform_grid(L, n, "dirichlet")
    H = free_spec(g)
    psi0 = superposition_state(spec, g)
    norm0, e0 = psi0.norm(), energy(H, psi0)
    window: list[WaveFunction] = []
    xs: list[complex] = []
    times, prop, series, pred, resid = [], [], [], [], []
    norm_drift = energy_drift = 0.0
    for i, psi in enumerate(_cn_steps(H, psi0, dt)):
        window = (window + [psi])[-3:]
        xs = (xs + [expectation(POSITION, psi)])[-3:]
        norm_drift = max(norm_drift, abs(psi.norm() - norm0))
        energy_drift = max(energy_drift, abs(energy(H, psi) - e0) / max(abs(e0), 1e-300))
        if len(window) == 3 and (i - 1) % audit_every == 0:
            mid = window[1]
            rep = ehrenfest_audit(H, POSITION, window, time_index=1)
            times.append(mid.time)
            prop.append(((xs[2] - xs[0]) / (2 * dt)).real)
            series.append(qw_dxdt_series(spec, L, mid.time))
            pred.append(rep.formal_term - rep.boundary_term)
            resid.append(rep.residual)
        if i == steps:
            break
    return SuperpositionAudit(
        np.array(times),
        np.array(prop),
        np.array(series),
        np.array(pred),
        np.array(resid),
        float(norm_drift),
        float(energy_drift),
        n,
        dt,
    )


def norm_drift(traj: Sequence[WaveFunction]) -> float:
    norms = np.array([s.norm() for s in traj])
    return float(np.max(np.abs(norms - norms[0])))


def energy_drift(H: HamiltonianSpec, traj: Sequence[WaveFunction]) -> float:
    """Largest relative change of ``<H>`` along a trajectory."""
    e = np.array([energy(H, s) for s in traj])
    return float(np.max(np.abs(e - e[0])) / max(abs(e[0]), 1e-300))
