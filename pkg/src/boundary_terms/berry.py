"""Parameter-space sector: Berry connection, scalar potential, curvature and force balance.

Conventions (checked on static eigenstates, where every term is analytic):

* ``A_B = i<psi|grad_R psi>`` and ``V_B = i<psi|d_t psi>`` (partial time
  derivative at fixed R), so a static eigenstate ``exp(-iEt)|n>`` has
  ``V_B = +E``.
* ``R' . A_B = i<psi|D psi> - V_B = E - V_B`` with ``D = d_t + R' . grad_R``.
* The balance closes as ``<grad H> = grad E - Omega - R' x B_B`` with
  ``Omega = grad V_B - d_t A_B``.  Finite-dimensional models have no
  spatial boundary, so the surface term is identically zero.

Gradients in R come from a family of trajectories started at shifted
parameters.  The stencil holds the centre, ``+-d e_i``, ``+-2d e_i`` and the
mixed corners ``+-d e_i +-d e_j`` so that the connection itself can be
differentiated at the face members (curl and ``grad V_B``).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations, product
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import DegeneracyError, ParameterError, UsageError

PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)
GAP_TOL = 1e-8


@dataclass(frozen=True)
class TwoLevelModel:
    """``H(R) = (R_1 s_x + R_2 s_y + R_3 s_z) / 2``.

    For ``dimension == 2`` the z component is the fixed ``offset``.
    """

    dimension: int = 3
    offset: float = 0.0

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ParameterError("dimension must be 2 or 3")

    def field(self, R: np.ndarray) -> np.ndarray:
        """Full 3-vector ``b`` with ``H = b . sigma / 2``; R may carry leading axes."""
        R = np.asarray(R, dtype=float)
        if R.shape[-1] != self.dimension:
            raise ParameterError(f"expected {self.dimension}-vectors")
        if self.dimension == 3:
            return R
        z = np.full(R.shape[:-1] + (1,), self.offset)
        return np.concatenate([R, z], axis=-1)

    def matrix(self, R) -> np.ndarray:
        return 0.5 * np.einsum("...i,ijk->...jk", self.field(R), PAULI)

    def gradient(self) -> np.ndarray:
        """``dH/dR_i`` for each i (constant for this model)."""
        return 0.5 * PAULI[: self.dimension]

    def ground_state(self, R) -> np.ndarray:
        b = self.field(R)
        if np.linalg.norm(b) < GAP_TOL:
            raise DegeneracyError(f"levels cross at R = {np.asarray(R).tolist()}")
        w, v = np.linalg.eigh(self.matrix(R))
        return v[:, 0]


@dataclass(frozen=True)
class ParameterPath:
    positions: np.ndarray  # (steps + 1, d)
    dt: float

    def __post_init__(self):
        p = np.array(self.positions, dtype=float)
        if p.ndim != 2 or p.shape[1] not in (2, 3) or p.shape[0] < 3:
            raise ParameterError("path needs at least 3 samples of 2- or 3-vectors")
        if not self.dt > 0:
            raise ParameterError("dt must be positive")
        p.setflags(write=False)
        object.__setattr__(self, "positions", p)

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    @property
    def steps(self) -> int:
        return self.positions.shape[0] - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt

    @property
    def velocity(self) -> np.ndarray:
        return np.gradient(self.positions, self.dt, axis=0, edge_order=2)


def circular_path(radius: float, period: float, dt: float, turns: float = 1.0, height: float = 0.0, dimension: int = 3) -> ParameterPath:
    """Circle of ``radius`` about the third axis, traversed once per ``period``."""
    if radius <= 0 or period <= 0:
        raise ParameterError("radius and period must be positive")
    steps = int(round(turns * period / dt))
    t = np.arange(steps + 1) * dt
    phase = 2 * np.pi * t / period
    cols = [radius * np.cos(phase), radius * np.sin(phase)]
    if dimension == 3:
        cols.append(np.full_like(t, height))
    return ParameterPath(np.stack(cols, axis=1), dt)


def static_path(R0, dt: float, steps: int) -> ParameterPath:
    R0 = np.asarray(R0, dtype=float)
    return ParameterPath(np.tile(R0, (steps + 1, 1)), dt)


def stencil(d: int, delta: float) -> list[tuple[float, ...]]:
    """Offsets: centre, ``+-delta e_i``, ``+-2 delta e_i``, ``+-delta e_i +-delta e_j``."""
    e = np.eye(d) * delta
    out = [np.zeros(d)]
    for i in range(d):
        out += [e[i], -e[i], 2 * e[i], -2 * e[i]]
    for i, j in combinations(range(d), 2):
        for si, sj in product((1, -1), repeat=2):
            out.append(si * e[i] + sj * e[j])
    return [tuple(o) for o in out]


@dataclass(frozen=True)
class BerryFamily:
    model: TwoLevelModel
    path: ParameterPath
    delta: float
    offsets: tuple[tuple[float, ...], ...]
    states: np.ndarray  # (members, steps + 1, 2)
    energies: np.ndarray  # (members, steps + 1)
    frame: str = "lab"

    def member(self, offset) -> int:
        key = tuple(np.round(np.asarray(offset, dtype=float) / self.delta).astype(int))
        return self._index[key]

    @property
    def _index(self) -> dict:
        return {tuple(np.round(np.asarray(o) / self.delta).astype(int)): m for m, o in enumerate(self.offsets)}


def _energies(model: TwoLevelModel, positions: np.ndarray, states: np.ndarray) -> np.ndarray:
    H = model.matrix(positions)
    return np.einsum("...i,...ij,...j->...", states.conj(), H, states).real


def _step(model: TwoLevelModel, R_mid: np.ndarray, psi: np.ndarray, dt: float) -> np.ndarray:
    """Exact exponential of the midpoint Hamiltonian, ``exp(-i dt H((R_m + R_m+1)/2))``."""
    b = model.field(R_mid)
    norm = np.linalg.norm(b, axis=-1)
    phi = 0.5 * norm * dt
    nhat = b / norm[..., None]
    ns = np.einsum("...i,ijk->...jk", nhat, PAULI)
    U = np.cos(phi)[..., None, None] * np.eye(2) - 1j * np.sin(phi)[..., None, None] * ns
    return np.einsum("...ij,...j->...i", U, psi)


def _initial_states(model: TwoLevelModel, starts: np.ndarray) -> np.ndarray:
    ref = model.ground_state(starts[0])
    out = []
    for R in starts:
        v = model.ground_state(R)
        ov = np.vdot(ref, v)
        out.append(v * np.conj(ov) / abs(ov))
    return np.array(out)


def propagate_family(model: TwoLevelModel, path: ParameterPath, delta: float | None = 1e-4) -> BerryFamily:
    """Propagate the ground state along the path and along every shifted copy.

    ``delta=None`` propagates the central path only.
    """
    d = path.dimension
    if d != model.dimension:
        raise ParameterError("path and model dimensions differ")
    if delta is not None and not delta > 0:
        raise ParameterError("delta must be positive")
    offsets = [tuple(np.zeros(d))] if delta is None else stencil(d, delta)
    off = np.array(offsets)
    positions = path.positions[None, :, :] + off[:, None, :]  # (M, N+1, d)
    gaps = np.linalg.norm(model.field(positions), axis=-1)
    if np.min(gaps) < GAP_TOL:
        raise DegeneracyError("a family member passes through the level crossing")
    states = np.empty(positions.shape[:2] + (2,), dtype=complex)
    states[:, 0] = _initial_states(model, positions[:, 0])
    mids = 0.5 * (positions[:, 1:] + positions[:, :-1])
    for m in range(path.steps):
        states[:, m + 1] = _step(model, mids[:, m], states[:, m], path.dt)
    E = _energies(model, positions, states)
    return BerryFamily(model, path, delta if delta is not None else 1.0, tuple(offsets), states, E)


def comoving(family: BerryFamily) -> BerryFamily:
    """Remove each member's dynamical phase: ``psi -> exp(i int_0^t E dt) psi``."""
    theta = cumulative_trapezoid(family.energies, dx=family.path.dt, axis=1, initial=0.0)
    return replace(family, states=family.states * np.exp(1j * theta)[..., None], frame="comoving")


def with_common_phase(family: BerryFamily, theta: Callable[[np.ndarray], np.ndarray]) -> BerryFamily:
    """Multiply every member by the same time-dependent phase ``exp(i theta(t))``."""
    ph = np.exp(1j * theta(family.path.times))
    return replace(family, states=family.states * ph[None, :, None])


def adiabatic_family(model: TwoLevelModel, path: ParameterPath, delta: float) -> BerryFamily:
    """Instantaneous ground states of every member, parallel transported in time."""
    offsets = stencil(path.dimension, delta)
    off = np.array(offsets)
    positions = path.positions[None, :, :] + off[:, None, :]
    states = np.empty(positions.shape[:2] + (2,), dtype=complex)
    states[:, 0] = _initial_states(model, positions[:, 0])
    for m in range(1, path.steps + 1):
        for s in range(len(offsets)):
            v = model.ground_state(positions[s, m])
            ov = np.vdot(states[s, m - 1], v)
            states[s, m] = v * np.conj(ov) / abs(ov)
    E = _energies(model, positions, states)
    return BerryFamily(model, path, delta, tuple(offsets), states, E, frame="adiabatic")


@dataclass(frozen=True)
class BerryState:
    time: float
    connection: np.ndarray  # A_B, d-vector
    scalar_potential: float  # V_B
    energy: float
    curvature: np.ndarray | float  # scalar (d = 2) or 3-vector
    electric: np.ndarray  # Omega
    velocity: np.ndarray
    imag_connection: float  # largest imaginary part discarded from A_B
    imag_scalar: float


@dataclass(frozen=True)
class ForceBalance:
    time: float
    mean_gradient: np.ndarray  # <grad H>
    energy_gradient: np.ndarray
    electric: np.ndarray
    lorentz: np.ndarray  # R' x B_B
    boundary: np.ndarray  # zero for finite-dimensional models
    residual: np.ndarray

    @property
    def relative(self) -> float:
        return float(np.linalg.norm(self.residual) / max(np.linalg.norm(self.mean_gradient), 1e-300))


def _connection(fam: BerryFamily, base, m: int) -> np.ndarray:
    """``i<psi|grad psi>`` at member ``base`` and time index m (complex)."""
    d, delta = fam.path.dimension, fam.delta
    base = np.asarray(base, dtype=float)
    psi = fam.states[fam.member(base), m]
    out = np.empty(d, dtype=complex)
    for i in range(d):
        e = np.zeros(d)
        e[i] = delta
        up = fam.states[fam.member(base + e), m]
        dn = fam.states[fam.member(base - e), m]
        out[i] = 1j * np.vdot(psi, up - dn) / (2 * delta)
    return out


def _material(fam: BerryFamily, s: int, m: int) -> complex:
    """``i<psi|D psi>`` for member s at time index m (D follows the member's path)."""
    st = fam.states[s]
    return 1j * np.vdot(st[m], st[m + 1] - st[m - 1]) / (2 * fam.path.dt)


def _check_index(fam: BerryFamily, m: int) -> None:
    if len(fam.offsets) == 1:
        raise UsageError("fields need a family propagated with a finite delta")
    if not 1 <= m <= fam.path.steps - 1:
        raise UsageError(f"time index {m} has no centered stencil")


def _cross(v: np.ndarray, B) -> np.ndarray:
    if v.shape[0] == 3:
        return np.cross(v, B)
    return np.array([v[1] * B, -v[0] * B])


def _assemble(fam: BerryFamily, m: int):
    _check_index(fam, m)
    d, delta = fam.path.dimension, fam.delta
    vel = fam.path.velocity[m]
    zero = np.zeros(d)
    A0 = _connection(fam, zero, m)
    faces = {}
    for j in range(d):
        for sgn in (1, -1):
            off = zero.copy()
            off[j] = sgn * delta
            s = fam.member(off)
            A = _connection(fam, off, m).real
            V = (_material(fam, s, m) - vel @ A).real
            faces[(j, sgn)] = (A, V, fam.energies[s, m])
    J = np.array([[(faces[(j, 1)][0][i] - faces[(j, -1)][0][i]) / (2 * delta) for j in range(d)] for i in range(d)])
    if d == 3:
        curl = np.array([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])
    else:
        curl = J[1, 0] - J[0, 1]
    grad_V = np.array([(faces[(j, 1)][1] - faces[(j, -1)][1]) / (2 * delta) for j in range(d)])
    grad_E = np.array([(faces[(j, 1)][2] - faces[(j, -1)][2]) / (2 * delta) for j in range(d)])
    DA = (_connection(fam, zero, m + 1).real - _connection(fam, zero, m - 1).real) / (2 * fam.path.dt)
    dA_dt = DA - J @ vel
    omega = grad_V - dA_dt
    material = _material(fam, 0 if fam.offsets[0] == tuple(zero) else fam.member(zero), m)
    V0 = material - vel @ A0
    state = BerryState(
        time=float(fam.path.times[m]),
        connection=A0.real,
        scalar_potential=float(V0.real),
        energy=float(fam.energies[fam.member(zero), m]),
        curvature=curl,
        electric=omega,
        velocity=vel,
        imag_connection=float(np.max(np.abs(A0.imag))),
        imag_scalar=float(abs(V0.imag)),
    )
    return state, grad_E


def berry_fields(fam: BerryFamily, m: int) -> BerryState:
    return _assemble(fam, m)[0]


def force_balance(fam: BerryFamily, m: int) -> ForceBalance:
    """``<grad H> - (grad E - Omega - R' x B_B + boundary)`` at time index m."""
    state, grad_E = _assemble(fam, m)
    psi = fam.states[fam.member(np.zeros(fam.path.dimension)), m]
    mean_grad = np.einsum("i,kij,j->k", psi.conj(), fam.model.gradient(), psi).real
    lorentz = _cross(state.velocity, state.curvature)
    boundary = np.zeros_like(mean_grad)
    residual = mean_grad - (grad_E - state.electric - lorentz + boundary)
    return ForceBalance(state.time, mean_grad, grad_E, state.electric, lorentz, boundary, residual)


def wrap_phase(x: float) -> float:
    """Map an angle to ``(-pi, pi]``."""
    return float(np.angle(np.exp(1j * x)))


def geometric_phase(states: np.ndarray) -> float:
    """Total phase minus the discrete dynamical phase of a state sequence."""
    total = np.angle(np.vdot(states[0], states[-1]))
    dynamical = np.sum(np.angle(np.einsum("mi,mi->m", states[:-1].conj(), states[1:])))
    return wrap_phase(total - dynamical)


def berry_phase_loop(model: TwoLevelModel, radius: float, period: float, dt: float, height: float = 0.0) -> float:
    """Geometric phase of the propagated ground state over one circuit."""
    path = circular_path(radius, period, dt, height=height, dimension=model.dimension)
    fam = propagate_family(model, path, delta=None)
    return geometric_phase(fam.states[0])


def solid_angle_phase(radius: float, height: float) -> float:
    """Analytic lower-level phase ``pi (1 - cos theta)`` for a circle at polar angle theta."""
    cos_t = height / np.hypot(radius, height)
    return wrap_phase(np.pi * (1 - cos_t))


def loop_holonomy(model: TwoLevelModel, centre, radius: float, axes=(0, 1), points: int = 256) -> float:
    """``-sum arg <n_m|n_m+1>`` of instantaneous ground states around a small circle."""
    centre = np.asarray(centre, dtype=float)
    t = np.arange(points) * 2 * np.pi / points
    loop = np.tile(centre, (points, 1))
    loop[:, axes[0]] += radius * np.cos(t)
    loop[:, axes[1]] += radius * np.sin(t)
    vs = [model.ground_state(R) for R in loop]
    vs.append(vs[0])
    return wrap_phase(-sum(np.angle(np.vdot(a, b)) for a, b in zip(vs[:-1], vs[1:])))


def curvature_at(model: TwoLevelModel, R0, delta: float = 1e-3, dt: float = 1e-2):
    """Curvature of the ground state at a fixed point from a short static family."""
    fam = comoving(propagate_family(model, static_path(R0, dt, 2), delta))
    return berry_fields(fam, 1).curvature


@dataclass(frozen=True)
class AdiabaticDeviation:
    period: float
    scalar: float  # max |V_B| in the comoving frame (its static value is 0)
    connection: float  # max |A_B - A_B(adiabatic reference)|


def adiabatic_deviation(
    model: TwoLevelModel, radius: float, height: float, period: float, dt: float, delta: float = 1e-4, samples: int = 32
) -> AdiabaticDeviation:
    """Distance from the adiabatic limit along one circuit, on evenly spaced times."""
    path = circular_path(radius, period, dt, height=height, dimension=model.dimension)
    fam = comoving(propagate_family(model, path, delta))
    ref = adiabatic_family(model, path, delta)
    idx = np.unique(np.linspace(1, path.steps - 1, samples).round().astype(int))
    dv = da = 0.0
    for m in idx:
        s = berry_fields(fam, m)
        r = berry_fields(ref, m)
        dv = max(dv, abs(s.scalar_potential))
        da = max(da, float(np.linalg.norm(s.connection - r.connection)))
    return AdiabaticDeviation(period, dv, da)
