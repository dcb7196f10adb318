"""Term-by-term audits of the boundary-corrected Ehrenfest and Hellmann-Feynman theorems.

Every report stores the terms of

    d<B>/dt = <dB/dt> + i<[H, B]> - [J_gen]_0^L

separately, together with ``residual = explicit + formal - boundary - observed``
(predicted minus observed).  ``boundary`` is the surface flux of the
generalized current itself, so for a plane wave with ``B = x`` the formal and
boundary terms are both the velocity ``k`` and cancel.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .currents import boundary_flux, expectation, generalized_current
from .errors import DegeneracyError, UsageError
from .lattice import Grid1D, WaveFunction, boundary_difference, integrate, make_uniform_grid
from .quantum_ops import (
    DEFAULT_K_STEP,
    POSITION,
    HamiltonianSpec,
    KFamily,
    ObservableSpec,
    align_phase,
    band_gap,
    bloch_eigen,
    bloch_family,
    closed_commutator,
    eigenstates,
    free_spec,
    k_derivative_observable,
)

CONVENTION = "residual = explicit + formal - boundary - observed; boundary = J(L) - J(0)"
UNIFORM_DT_RTOL = 1e-9


@dataclass(frozen=True)
class AuditReport:
    scenario: str
    observable: str
    formal_term: complex
    boundary_term: complex
    explicit_time_term: complex
    observed_derivative: complex
    residual: complex
    n: int
    h: float
    dt: float | None = None
    order: float | None = None
    extras: dict = field(default_factory=dict)

    @staticmethod
    def combine(formal: complex, boundary: complex, explicit: complex, observed: complex) -> complex:
        return explicit + formal - boundary - observed

    def recomputed_residual(self) -> complex:
        return self.combine(self.formal_term, self.boundary_term, self.explicit_time_term, self.observed_derivative)

    def without_boundary(self) -> "AuditReport":
        """The same audit with the surface term dropped (the textbook Ehrenfest theorem)."""
        res = self.combine(self.formal_term, 0.0, self.explicit_time_term, self.observed_derivative)
        return replace(self, boundary_term=0j, residual=res)


def _terms(H: HamiltonianSpec, B: ObservableSpec, psi: WaveFunction):
    g = psi.grid
    bra = np.conj(psi.closed())
    formal = 1j * complex(integrate(bra * closed_commutator(H, B, psi), g))
    explicit = complex(integrate(bra * B.time_derivative(psi), g))
    boundary = boundary_flux(generalized_current(B, psi, H.shift), g)
    return formal, boundary, explicit


def _uniform_dt(states: Sequence[WaveFunction]) -> float:
    times = np.array([s.time for s in states], dtype=float)
    steps = np.diff(times)
    if len(steps) == 0 or np.any(steps <= 0):
        raise UsageError("trajectory times must increase")
    if np.max(np.abs(steps - steps[0])) > UNIFORM_DT_RTOL * abs(steps[0]):
        raise UsageError("trajectory time step is not uniform")
    return float(steps[0])


def ehrenfest_audit(
    H: HamiltonianSpec,
    B: ObservableSpec,
    state: WaveFunction | Sequence[WaveFunction],
    time_index: int | None = None,
    scenario: str = "",
) -> AuditReport:
    """Audit a declared eigenstate (observed derivative 0) or one trajectory time.

    For a trajectory the observed derivative is the centered difference of
    ``<B>`` around ``time_index`` (default: the middle snapshot).
    """
    if isinstance(state, WaveFunction):
        psi, observed, dt = state, 0j, None
    else:
        states = list(state)
        if len(states) < 3:
            raise UsageError("a trajectory audit needs at least 3 snapshots")
        dt = _uniform_dt(states)
        m = len(states) // 2 if time_index is None else time_index
        if not 1 <= m <= len(states) - 2:
            raise UsageError(f"time index {m} has no centered stencil")
        psi = states[m]
        a = H.shift
        observed = (expectation(B, states[m + 1], a) - expectation(B, states[m - 1], a)) / (2 * dt)
    formal, boundary, explicit = _terms(H, B, psi)
    g = psi.grid
    return AuditReport(
        scenario=scenario,
        observable=B.tag,
        formal_term=formal,
        boundary_term=boundary,
        explicit_time_term=explicit,
        observed_derivative=complex(observed),
        residual=AuditReport.combine(formal, boundary, explicit, observed),
        n=g.point_count,
        h=g.spacing,
        dt=dt,
        extras={"time": psi.time},
    )


def position_second_moment_form(psi: WaveFunction, A: float = 0.0) -> complex:
    """``-(i/2) int x (psi psi*'' - psi* psi'') dx`` in the ``A = 0`` gauge.

    The uniform vector potential is moved into the boundary condition,
    ``phi = exp(iAx) psi`` with twist ``A``; the integrand is then the
    derivative of the (constant) probability current for an eigenstate.
    """
    g = psi.grid
    phi = WaveFunction(g, np.exp(1j * A * g.points) * psi.samples, psi.time, psi.twist + A)
    f, d2 = phi.closed(), phi.closed_second_gradient()
    x = g.closed_points
    return complex(-0.5j * integrate(x * (f * np.conj(d2) - np.conj(f) * d2), g))


def hypervirial_check(H: HamiltonianSpec, g: Grid1D, band: int, scenario: str = "") -> AuditReport:
    """Position audit of eigenstate ``band`` plus the second-derivative integral form."""
    sol = eigenstates(H, g, band + 2)
    if band_gap(sol.energies, band) < 1e-8:
        raise DegeneracyError(f"band {band} is degenerate")
    psi = sol.states[band]
    report = ehrenfest_audit(H, POSITION, psi, scenario=scenario)
    extras = dict(report.extras)
    extras.update(band=band, energy=float(sol.energies[band]), integral_form=position_second_moment_form(psi, H.shift))
    return replace(report, extras=extras)


@dataclass(frozen=True)
class FluxRow:
    flux: float
    vector_potential: float
    boundary_term: complex
    residual: complex
    energies: tuple[float, ...]


def ab_flux_dependence(L: float, flux_values: Sequence[float], n: int = 512, levels: int = 6) -> list[FluxRow]:
    """Ground-state position audits on a free ring for each enclosed flux."""
    if len(flux_values) < 2:
        raise UsageError("need at least two flux values")
    g = make_uniform_grid(L, n)
    rows = []
    for flux in flux_values:
        A = float(flux) / L
        H = free_spec(g, vector_potential=A)
        sol = eigenstates(H, g, levels)
        report = ehrenfest_audit(H, POSITION, sol.states[0], scenario=f"ab_ring:{flux}")
        rows.append(FluxRow(float(flux), A, report.boundary_term, report.residual, tuple(map(float, sol.energies))))
    return rows


# --------------------------------------------------------------- Hellmann-Feynman


@dataclass(frozen=True)
class NaiveHFRecord:
    k: float
    band: int
    mean_dHdk: float
    minimal_mean_dHdk: float
    minimal_boundary_terms: tuple[complex, complex, complex]
    momentum_u: float


def hf_naive_check(V: np.ndarray, g: Grid1D, k: float, band: int, step: float = DEFAULT_K_STEP) -> NaiveHFRecord:
    """Both pictures in which the textbook theorem fails to give a band slope.

    In the ``exp(ikx) u`` picture ``dH/dk`` is the zero operator.  In the
    minimal picture ``H_k = (p + k)^2/2 + V`` with periodic ``u``, the three
    boundary terms ``[u*' du/dk]``, ``[u* (du/dk)']`` and ``[2ik u* du/dk]``
    are evaluated separately.
    """
    fam = bloch_family(V, g, k, band, step)
    psi = fam.states[1]
    dHdk = np.zeros(g.closed_count)  # H = p^2/2 + V has no k
    mean_dHdk = float(integrate(np.conj(psi.closed()) * dHdk * psi.closed(), g).real)

    us = []
    for kk in (k - step, k, k + step):
        us.append(bloch_eigen(V, g, kk, band + 2).states[band])
    centre = us[1]
    lo, hi = align_phase(centre, us[0]), align_phase(centre, us[2])
    du = (hi.closed() - lo.closed()) / (2 * step)
    ddu = (hi.closed_gradient() - lo.closed_gradient()) / (2 * step)
    u, du_x = centre.closed(), centre.closed_gradient()
    terms = (
        complex(boundary_difference(np.conj(du_x) * du, g)),
        complex(boundary_difference(np.conj(u) * ddu, g)),
        complex(boundary_difference(2j * k * np.conj(u) * du, g)),
    )
    p_u = float(integrate(np.conj(u) * (-1j) * du_x, g).real)
    return NaiveHFRecord(float(k), band, mean_dHdk, p_u + k, terms, p_u)


@dataclass(frozen=True)
class HFReport:
    k: float
    band: int
    dE_dk_spectral: float
    mean_dHdk: complex
    boundary_term: complex
    dE_dk_corrected: complex
    momentum_slope: float
    residual_corrected_spectral: float
    residual_corrected_momentum: float
    residual_spectral_momentum: float

    def max_residual(self) -> float:
        return max(self.residual_corrected_spectral, self.residual_corrected_momentum, self.residual_spectral_momentum)


def _slopes_from_family(fam: KFamily) -> HFReport:
    psi = fam.states[1]
    g = psi.grid
    B = k_derivative_observable(fam)
    mean_dHdk = 0j  # the exp(ikx) u picture: H does not contain k
    boundary = -1j * boundary_flux(generalized_current(B, psi, 0.0), g)
    corrected = mean_dHdk + boundary
    spectral = (fam.energies[2] - fam.energies[0]) / (2 * fam.step)
    momentum = float(integrate(np.conj(psi.closed()) * (-1j) * psi.closed_gradient(), g).real)
    return HFReport(
        k=fam.k,
        band=fam.band,
        dE_dk_spectral=float(spectral),
        mean_dHdk=mean_dHdk,
        boundary_term=boundary,
        dE_dk_corrected=corrected,
        momentum_slope=momentum,
        residual_corrected_spectral=float(abs(corrected - spectral)),
        residual_corrected_momentum=float(abs(corrected - momentum)),
        residual_spectral_momentum=float(abs(spectral - momentum)),
    )


def hf_corrected_slope(V: np.ndarray, g: Grid1D, k: float, band: int, step: float = DEFAULT_K_STEP) -> HFReport:
    """Band slope three ways: boundary-corrected theorem, spectral difference, <p>."""
    return _slopes_from_family(bloch_family(V, g, k, band, step))


def regauge_family(fam: KFamily, theta) -> KFamily:
    """Multiply each member by ``exp(i theta(k))`` without re-aligning phases."""
    ks = (fam.k - fam.step, fam.k, fam.k + fam.step)
    states = tuple(s.with_samples(s.samples * np.exp(1j * theta(kk))) for s, kk in zip(fam.states, ks))
    return replace(fam, states=states)


def hf_slope_from_family(fam: KFamily) -> HFReport:
    return _slopes_from_family(fam)
