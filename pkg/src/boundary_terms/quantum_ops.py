"""Hamiltonians, the observable catalog and eigensolves.

The Hamiltonian is ``H = (p + A + k)^2 / 2 + V(x)`` with ``p = -i d/dx``.
On the lattice the kinetic term is the Peierls form

    (H psi)_j = (psi_j - (e^{i a h} psi_{j+1} + e^{-i a h} psi_{j-1}) / 2) / h^2 + V_j psi_j

with ``a = A + k``.  It is exactly Hermitian and exactly gauge covariant
(shifting ``a`` by ``2*pi/L`` permutes the ring spectrum).

Formal commutators ``[H, B] psi`` are taken from analytic operator identities
evaluated with grid derivatives, never from the matrix commutator.  The
matrix is Hermitian, so the matrix commutator cannot see boundary terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import DegeneracyError, GaugeError, IntegrityError, ParameterError, UsageError
from .lattice import Grid1D, WaveFunction, close, derivative, integrate

HERMITICITY_TOL = 1e-12
DEGENERACY_GAP = 1e-8
DEFAULT_K_STEP = 1e-4


@dataclass(frozen=True)
class HamiltonianSpec:
    """Mass is fixed at 1.

    ``crystal_momentum`` is ``None`` when H does not depend on k explicitly
    (the ``exp(ikx) u`` picture); a number means minimal substitution.
    """

    potential: np.ndarray
    vector_potential: float = 0.0
    crystal_momentum: float | None = None

    def __post_init__(self):
        v = np.asarray(self.potential)
        if np.iscomplexobj(v):
            if np.max(np.abs(v.imag), initial=0.0) > 0:
                raise ParameterError("potential samples must be real")
            v = v.real
        v = np.array(v, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ParameterError("potential samples must be finite")
        for name in ("vector_potential", "crystal_momentum"):
            value = getattr(self, name)
            if value is not None and not np.isfinite(value):
                raise ParameterError(f"{name} must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "potential", v)

    @property
    def explicit_k(self) -> bool:
        return self.crystal_momentum is not None

    @property
    def shift(self) -> float:
        """Total uniform shift ``A + k`` of the canonical momentum."""
        return self.vector_potential + (self.crystal_momentum or 0.0)


def free_spec(g: Grid1D, **kwargs) -> HamiltonianSpec:
    return HamiltonianSpec(np.zeros(g.point_count), **kwargs)


def _kinetic_parts(spec: HamiltonianSpec, g: Grid1D):
    n, h = g.point_count, g.spacing
    if spec.potential.shape != (n,):
        raise ParameterError(f"potential has {spec.potential.shape} samples, grid has {n}")
    diag = 1.0 / h**2 + spec.potential
    hop = -0.5 / h**2 * np.exp(1j * spec.shift * h)  # element (j, j+1)
    return diag, hop


def build_hamiltonian(spec: HamiltonianSpec, g: Grid1D, sparse: bool = False):
    """Matrix of H on the grid.

    Dirichlet grids pin psi = 0 at both ends; their boundary rows and columns
    are zero and eigensolves act on the interior block.
    """
    n = g.point_count
    diag, hop = _kinetic_parts(spec, g)
    diag = diag.astype(complex)
    upper = np.full(n - 1, hop)
    if not g.periodic:
        diag[[0, -1]] = 0.0
        upper[[0, -1]] = 0.0
    H = scipy.sparse.diags([np.conj(upper), diag, upper], [-1, 0, 1], shape=(n, n), format="lil")
    if g.periodic:
        H[n - 1, 0] = hop
        H[0, n - 1] = np.conj(hop)
    return H.tocsr() if sparse else H.toarray()


def check_hermitian(H: np.ndarray) -> None:
    H = H.toarray() if scipy.sparse.issparse(H) else np.asarray(H)
    scale = np.max(np.abs(H), initial=0.0)
    if np.max(np.abs(H - H.conj().T), initial=0.0) > HERMITICITY_TOL * max(scale, 1e-300):
        raise IntegrityError("matrix is not Hermitian within tolerance")


def momentum_matrix(g: Grid1D) -> np.ndarray:
    """``-i d/dx`` with central differences (periodic wrap on rings)."""
    n, h = g.point_count, g.spacing
    D = np.zeros((n, n))
    idx = np.arange(n - 1)
    D[idx, idx + 1] = 1 / (2 * h)
    D[idx + 1, idx] = -1 / (2 * h)
    if g.periodic:
        D[n - 1, 0] = 1 / (2 * h)
        D[0, n - 1] = -1 / (2 * h)
    return -1j * D


@dataclass(frozen=True)
class EigenSolution:
    energies: np.ndarray
    states: list[WaveFunction]
    gauge: str

    def __len__(self):
        return len(self.energies)


def _clusters(energies: np.ndarray, tol: float) -> list[list[int]]:
    groups = [[0]]
    for i in range(1, len(energies)):
        if energies[i] - energies[i - 1] < tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _fix_phase(v: np.ndarray) -> np.ndarray:
    mags = np.abs(v)
    j = int(np.argmax(mags >= (1 - 1e-8) * mags.max()))
    return v * (np.conj(v[j]) / mags[j])


def solve_eigen(H: np.ndarray, count: int, grid: Grid1D) -> EigenSolution:
    """Lowest ``count`` eigenpairs, normalized on the grid and gauge fixed.

    Degenerate clusters are rotated to diagonalize the momentum operator and
    ordered by ascending momentum; each state is then made real positive at
    its largest component.
    """
    H = H.toarray() if scipy.sparse.issparse(H) else np.asarray(H)
    check_hermitian(H)
    n = grid.point_count
    inner = slice(None) if grid.periodic else slice(1, n - 1)
    block = H[inner, inner]
    dim = block.shape[0]
    if count < 1 or count > dim:
        raise ParameterError(f"count must be in [1, {dim}], got {count}")
    extra = min(dim, count + 2)
    w, v = scipy.linalg.eigh(block, subset_by_index=[0, extra - 1])
    tol = DEGENERACY_GAP + 100 * np.finfo(float).eps * np.max(np.abs(block))
    P = momentum_matrix(grid)[inner, inner]
    for group in _clusters(w, tol):
        if len(group) > 1:
            sub = v[:, group]
            mw, mv = np.linalg.eigh(sub.conj().T @ P @ sub)
            v[:, group] = sub @ mv
            w[group] = np.mean(w[group])
    states = []
    for i in range(count):
        full = np.zeros(n, dtype=complex)
        full[inner] = _fix_phase(v[:, i])
        psi = WaveFunction(grid, full)
        states.append(psi.normalized())
    return EigenSolution(np.array(w[:count]), states, gauge="max-component-real;momentum-diagonal")


def eigenstates(spec: HamiltonianSpec, g: Grid1D, count: int) -> EigenSolution:
    return solve_eigen(build_hamiltonian(spec, g), count, g)


def apply_hamiltonian(spec: HamiltonianSpec, psi: WaveFunction) -> np.ndarray:
    """Matrix-free H psi honouring the state's twist (used for energies)."""
    g = psi.grid
    diag, hop = _kinetic_parts(spec, g)
    s = psi.samples
    phase = np.exp(1j * psi.twist * g.length) if g.periodic else 0.0
    ahead = np.empty_like(s)
    behind = np.empty_like(s)
    ahead[:-1], behind[1:] = s[1:], s[:-1]
    ahead[-1] = s[0] * phase
    behind[0] = s[-1] * np.conj(phase) if g.periodic else 0.0
    out = diag * s + hop * ahead + np.conj(hop) * behind
    if not g.periodic:
        out[[0, -1]] = 0.0
    return out


def energy(spec: HamiltonianSpec, psi: WaveFunction) -> float:
    return float(integrate(np.conj(psi.samples) * apply_hamiltonian(spec, psi), psi.grid).real)


# ----------------------------------------------------------------- observables

ObservableKind = Literal[
    "identity", "position", "momentum", "kinematic_momentum", "function_of_x", "parameter_derivative"
]


@dataclass(frozen=True)
class KFamily:
    """States at ``k - step``, ``k``, ``k + step`` of one band, gauge aligned."""

    k: float
    step: float
    band: int
    energies: tuple[float, float, float]
    states: tuple[WaveFunction, WaveFunction, WaveFunction]


@dataclass(frozen=True)
class ObservableSpec:
    """An operator ``B`` with its action and formal commutator.

    ``function_of_x`` needs ``func`` and its first two derivatives;
    ``parameter_derivative`` needs an attached :class:`KFamily`.
    """

    kind: ObservableKind
    func: Callable[[np.ndarray], np.ndarray] | None = None
    dfunc: Callable[[np.ndarray], np.ndarray] | None = None
    d2func: Callable[[np.ndarray], np.ndarray] | None = None
    family: KFamily | None = None
    label: str = field(default="")

    @property
    def tag(self) -> str:
        return self.label or self.kind

    def time_derivative(self, psi: WaveFunction) -> np.ndarray:
        """Explicit ``dB/dt psi``; zero for every built-in."""
        return np.zeros(psi.grid.closed_count, dtype=complex)


IDENTITY = ObservableSpec("identity")
POSITION = ObservableSpec("position")
MOMENTUM = ObservableSpec("momentum")
KINEMATIC_MOMENTUM = ObservableSpec("kinematic_momentum")


def function_of_x(f, df, d2f, label: str = "f(x)") -> ObservableSpec:
    return ObservableSpec("function_of_x", f, df, d2f, label=label)


def k_derivative_observable(family: KFamily) -> ObservableSpec:
    return ObservableSpec("parameter_derivative", family=family, label="d/dk")


def observable_jet(B: ObservableSpec, psi: WaveFunction, shift: float = 0.0):
    """``(B psi, d(B psi)/dx)`` on the closed point set.

    Position uses the unwrapped coordinate, so at ``x = L`` a ring gives
    ``L psi(0)``.  ``shift`` is the ``A + k`` entering the kinematic momentum.
    """
    g = psi.grid
    x = g.closed_points
    f, df = psi.closed(), psi.closed_gradient()
    kind = B.kind
    if kind == "identity":
        return f, df
    if kind == "position":
        return x * f, f + x * df
    if kind in ("momentum", "kinematic_momentum"):
        d2f = psi.closed_second_gradient()
        a = shift if kind == "kinematic_momentum" else 0.0
        return -1j * df + a * f, -1j * d2f + a * df
    if kind == "function_of_x":
        if B.func is None or B.dfunc is None:
            raise UsageError("function_of_x observable needs func and dfunc")
        return B.func(x) * f, B.dfunc(x) * f + B.func(x) * df
    if kind == "parameter_derivative":
        fam = B.family
        if fam is None:
            raise UsageError("parameter_derivative needs an attached eigenstate family")
        lo, _, hi = fam.states
        value = (hi.closed() - lo.closed()) / (2 * fam.step)
        slope = (hi.closed_gradient() - lo.closed_gradient()) / (2 * fam.step)
        return value, slope
    raise UsageError(f"no catalog entry for observable kind {kind!r}")


def apply_observable(B: ObservableSpec, psi: WaveFunction, shift: float = 0.0) -> np.ndarray:
    """Samples of ``B psi`` on the grid points."""
    return observable_jet(B, psi, shift)[0][: psi.grid.point_count]


def _closed_commutator(spec: HamiltonianSpec, B: ObservableSpec, psi: WaveFunction) -> np.ndarray:
    g = psi.grid
    a = spec.shift
    f, df = psi.closed(), psi.closed_gradient()
    kinetic = -1j * df + a * f  # Pi psi
    kind = B.kind
    if kind == "identity":
        return np.zeros_like(f)
    if kind == "position":
        return -1j * kinetic
    if kind in ("momentum", "kinematic_momentum"):
        dV = close(derivative(spec.potential, g), g)
        return 1j * dV * f
    if kind == "function_of_x":
        if B.dfunc is None or B.d2func is None:
            raise UsageError("function_of_x commutator needs dfunc and d2func")
        x = g.closed_points
        d1, d2 = B.dfunc(x), B.d2func(x)
        return -0.5 * d2 * f - d1 * df - 1j * a * d1 * f
    if kind == "parameter_derivative":
        if B.family is None:
            raise UsageError("parameter_derivative needs an attached eigenstate family")
        return -kinetic if spec.explicit_k else np.zeros_like(f)
    raise UsageError(f"no formal commutator for observable kind {kind!r}")


def formal_commutator_apply(spec: HamiltonianSpec, B: ObservableSpec, psi: WaveFunction) -> np.ndarray:
    """Samples of ``[H, B] psi`` from the analytic operator identity.

    position -> ``-i Pi psi``; momentum -> ``i V' psi``; d/dk -> ``-(dH/dk) psi``
    (zero unless H carries k explicitly); identity -> 0.
    """
    return _closed_commutator(spec, B, psi)[: psi.grid.point_count]


def closed_commutator(spec: HamiltonianSpec, B: ObservableSpec, psi: WaveFunction) -> np.ndarray:
    return _closed_commutator(spec, B, psi)


# ------------------------------------------------------------ Bloch families


def bloch_state(u: WaveFunction, k: float) -> WaveFunction:
    """``exp(ikx) u(x)`` as a twisted state (u periodic)."""
    x = u.grid.points
    return WaveFunction(u.grid, np.exp(1j * k * x) * u.samples, u.time, k)


def band_gap(energies: Sequence[float], band: int) -> float:
    gaps = []
    if band > 0:
        gaps.append(energies[band] - energies[band - 1])
    if band + 1 < len(energies):
        gaps.append(energies[band + 1] - energies[band])
    return min(gaps) if gaps else np.inf


def bloch_eigen(potential: np.ndarray, g: Grid1D, k: float, count: int) -> EigenSolution:
    """Minimal-substitution eigensolve; states are periodic cell functions u_k."""
    return eigenstates(HamiltonianSpec(potential, 0.0, k), g, count)


def align_phase(reference: WaveFunction, psi: WaveFunction, min_overlap: float = 0.9) -> WaveFunction:
    """Parallel transport: rotate ``psi`` so ``<reference|psi>`` is real positive."""
    ov = reference.inner(psi)
    if abs(ov) < min_overlap:
        raise GaugeError(f"overlap {abs(ov):.3g} below {min_overlap} during phase alignment")
    return psi.with_samples(psi.samples * (np.conj(ov) / abs(ov)))


def bloch_family(
    potential: np.ndarray, g: Grid1D, k: float, band: int, step: float = DEFAULT_K_STEP
) -> KFamily:
    """Bloch states ``exp(ikx) u`` of ``band`` at ``k - step, k, k + step``.

    The outer states are parallel transported onto the central one.
    """
    if not g.periodic:
        raise UsageError("Bloch families need a periodic grid")
    if step <= 0:
        raise ParameterError("k step must be positive")
    count = band + 2
    energies, states = [], []
    for kk in (k - step, k, k + step):
        sol = bloch_eigen(potential, g, kk, count)
        if band_gap(sol.energies, band) < DEGENERACY_GAP:
            raise DegeneracyError(f"band {band} is degenerate at k = {kk}")
        energies.append(float(sol.energies[band]))
        states.append(bloch_state(sol.states[band], kk))
    centre = states[1]
    lo = align_phase(centre, states[0])
    hi = align_phase(centre, states[2])
    return KFamily(k, step, band, tuple(energies), (lo, centre, hi))


def eigenstate_k_derivative(family: KFamily) -> np.ndarray:
    """Centered difference ``(psi_{k+d} - psi_{k-d}) / 2d`` on the grid points."""
    lo, _, hi = family.states
    return (hi.samples - lo.samples) / (2 * family.step)
