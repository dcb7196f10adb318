"""The acceptance suite: one function per criterion, each a list of checks.

A check passes when its value lies in ``[lower, upper]``.  ``tolerance_scale``
multiplies the upper bound of absolute-tolerance checks only; convergence
ratio windows are never scaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .auditor import (
    ab_flux_dependence,
    ehrenfest_audit,
    hf_corrected_slope,
    hf_naive_check,
    position_second_moment_form,
)
from .berry import (
    TwoLevelModel,
    adiabatic_deviation,
    berry_fields,
    berry_phase_loop,
    circular_path,
    comoving,
    force_balance,
    propagate_family,
    static_path,
    with_common_phase,
    wrap_phase,
)
from .currents import continuity_residual, free_particle_cube_flux, standard_continuity_residual
from .dynamics import (
    SuperpositionSpec,
    beat_period,
    energy_drift,
    norm_drift,
    pair_contributions,
    propagate,
    superposition_audit,
    superposition_state,
    well_position_quadrature,
)
from .lattice import WaveFunction, make_uniform_grid, plane_wave
from .potentials import random_smooth
from .quantum_ops import IDENTITY, MOMENTUM, POSITION, HamiltonianSpec, eigenstates, free_spec
from .scenarios import ordered_map

TWO_STATE = SuperpositionSpec((2**-0.5, 2**-0.5))
THREE_STATE = SuperpositionSpec((0.6, 0.64, 0.48))
ORDER_WINDOW = (3.5, 4.5)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    lower: float = -math.inf
    upper: float = math.inf
    scalable: bool = True

    def passed(self, scale: float = 1.0) -> bool:
        upper = self.upper * scale if self.scalable else self.upper
        return bool(self.lower <= self.value <= upper)

    def describe(self) -> str:
        if math.isinf(self.lower):
            return f"{self.name} = {self.value:.3e} <= {self.upper:.1e}"
        if math.isinf(self.upper):
            return f"{self.name} = {self.value:.3e} >= {self.lower:.3g}"
        return f"{self.name} = {self.value:.4g} in [{self.lower:g}, {self.upper:g}]"


def at_most(name: str, value: float, tol: float) -> Check:
    return Check(name, float(value), upper=tol)


def within(name: str, value: float, lo: float, hi: float) -> Check:
    return Check(name, float(value), lo, hi, scalable=False)


@dataclass
class CriterionResult:
    id: int
    name: str
    checks: list[Check] = field(default_factory=list)
    scale: float = 1.0

    @property
    def passed(self) -> bool:
        return all(c.passed(self.scale) for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed(self.scale)]

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        worst = self.failures() or self.checks
        return f"[{tag}] criterion {self.id}: {self.name} ({len(self.checks)} checks; {worst[0].describe()})"

    def row(self) -> dict:
        checks = [
            {"name": c.name, "value": c.value, "lower": c.lower if math.isfinite(c.lower) else None,
             "upper": c.upper if math.isfinite(c.upper) else None, "scalable": c.scalable,
             "passed": c.passed(self.scale)}
            for c in self.checks
        ]
        return {"id": self.id, "name": self.name, "verdict": "PASS" if self.passed else "FAIL", "checks": checks}


def _ratio(coarse: float, fine: float) -> float:
    return coarse / fine if fine > 0 else math.inf


# ---------------------------------------------------------------- criteria


def free_particle_cancellation() -> CriterionResult:
    res = CriterionResult(1, "free-particle cancellation")
    k = 2 * np.pi
    g = make_uniform_grid(1.0, 2**18)
    r = ehrenfest_audit(free_spec(g), POSITION, plane_wave(g, k), scenario="free_particle")
    res.checks += [
        at_most("|formal - 2pi|", abs(r.formal_term - k), 1e-8),
        at_most("|boundary - 2pi|", abs(r.boundary_term - k), 1e-8),
        at_most("|residual|", abs(r.residual), 1e-8),
        at_most("|residual without boundary - 2pi|", abs(r.without_boundary().residual - k), 1e-8),
    ]
    g = make_uniform_grid(1.0, 256)
    psi = plane_wave(g, k)
    res.checks.append(at_most("|residual| at n=256", abs(ehrenfest_audit(free_spec(g), POSITION, psi).residual), 1e-8))
    m = ehrenfest_audit(free_spec(g), MOMENTUM, psi)
    res.checks.append(at_most("|momentum boundary| at n=256", abs(m.boundary_term), 1e-8))
    return res


def cube_surface_integral() -> CriterionResult:
    res = CriterionResult(2, "cube surface integral")
    value = free_particle_cube_flux((2 * np.pi, 0.0, 0.0), 1.0, 64)
    res.checks.append(at_most("|flux + 4 pi i|", abs(value + 4j * np.pi), 1e-10))
    return res


HYPERVIRIAL_SEEDS = (0, 1, 2, 3, 4)
HYPERVIRIAL_FLUX = 0.7
HYPERVIRIAL_AMPLITUDE = 1.0


def _hypervirial_terms(seed: int, n: int):
    g = make_uniform_grid(1.0, n)
    H = HamiltonianSpec(random_smooth(g, HYPERVIRIAL_AMPLITUDE, seed), HYPERVIRIAL_FLUX)
    sol = eigenstates(H, g, 4)
    audits = [abs(ehrenfest_audit(H, POSITION, sol.states[b]).residual) for b in range(3)]
    forms = [abs(position_second_moment_form(sol.states[b], HYPERVIRIAL_FLUX)) for b in range(3)]
    return np.array(audits), np.array(forms)


def hypervirial(jobs: int = 1) -> CriterionResult:
    res = CriterionResult(3, "hypervirial property")
    tasks = [(s, n) for s in HYPERVIRIAL_SEEDS for n in (1024, 2048)]
    out = dict(zip(tasks, ordered_map(lambda t: _hypervirial_terms(*t), tasks, jobs)))
    for s in HYPERVIRIAL_SEEDS:
        (a1, f1), (a2, f2) = out[(s, 1024)], out[(s, 2048)]
        for b in range(3):
            res.checks.append(at_most(f"seed {s} band {b} |audit residual|", a2[b], 5e-6))
            res.checks.append(at_most(f"seed {s} band {b} |integral form|", f2[b], 5e-6))
        rms = lambda v: float(np.sqrt(np.mean(v**2)))  # noqa: E731
        res.checks.append(within(f"seed {s} audit halving ratio", _ratio(rms(a1), rms(a2)), *ORDER_WINDOW))
        res.checks.append(within(f"seed {s} integral halving ratio", _ratio(rms(f1), rms(f2)), *ORDER_WINDOW))
    return res


def ab_flux() -> CriterionResult:
    res = CriterionResult(4, "Aharonov-Bohm flux dependence")
    tol = 5e-6
    rows = ab_flux_dependence(1.0, [0.0, np.pi], n=2048)
    for r in rows:
        res.checks.append(at_most(f"|residual| at flux {r.flux:.4g}", abs(r.residual), tol))
    gap = abs(rows[0].boundary_term - rows[1].boundary_term)
    res.checks.append(Check("|boundary(0) - boundary(pi)|", float(gap), lower=10 * tol, scalable=False))
    return res


BLOCH_AMPLITUDE = 0.5
BLOCH_POINTS = 33
BLOCH_N = 256


def bloch(jobs: int = 1) -> CriterionResult:
    res = CriterionResult(5, "Bloch paradox and rescue")
    g = make_uniform_grid(1.0, BLOCH_N)
    V = BLOCH_AMPLITUDE * np.cos(2 * np.pi * g.points)
    for k in (-2.0, 1.0):
        naive = hf_naive_check(V, g, k, 0)
        res.checks.append(at_most(f"|<dH/dk>| at k={k}", abs(naive.mean_dHdk), 1e-12))
        for i, term in enumerate(naive.minimal_boundary_terms):
            res.checks.append(at_most(f"minimal-picture term {i + 1} at k={k}", abs(term), 1e-8))
    ks = np.linspace(-np.pi, np.pi, BLOCH_POINTS)
    reports = ordered_map(lambda k: hf_corrected_slope(V, g, float(k), 0), ks, jobs)
    res.checks.append(at_most("max pairwise slope disagreement (33 k)", max(r.max_residual() for r in reports), 1e-5))
    res.checks.append(Check("sweep rows", len(reports), BLOCH_POINTS, BLOCH_POINTS, scalable=False))
    return res


def _period_steps(spec: SuperpositionSpec, dt: float) -> int:
    return int(math.ceil(beat_period(spec, 1.0) / dt)) + 1


def superposition() -> CriterionResult:
    res = CriterionResult(6, "superposition dynamics")
    dt = 1e-4
    a = superposition_audit(TWO_STATE, 1.0, 1024, dt, _period_steps(TWO_STATE, dt))
    res.checks.append(at_most("max |series - CN| over one beat", a.max_propagated_vs_series, 1e-4))
    res.checks.append(at_most("|peak CN velocity - 8/3|", abs(np.max(np.abs(a.propagated)) - 8 / 3), 1e-4))
    res.checks.append(at_most("|peak series velocity - 8/3|", abs(np.max(np.abs(a.series)) - 8 / 3), 1e-4))
    res.checks.append(at_most("max |Im series|", a.series_imag, 1e-12))
    g = make_uniform_grid(1.0, 1024, "dirichlet")
    for t in (0.0, 0.1, 0.37):
        terms = pair_contributions(THREE_STATE, 1.0, t)
        even = max(abs(terms[(1, 3)]), abs(terms[(3, 1)]))
        res.checks.append(at_most(f"even-pair series terms at t={t}", even, 1e-12))
    res.checks.append(at_most("|quadrature x_13|", abs(well_position_quadrature(1, 3, g)), 1e-12))
    return res


def _well_trajectory(n: int, dt: float, steps: int, t0: float):
    g = make_uniform_grid(1.0, n, "dirichlet")
    H = free_spec(g)
    return H, propagate(H, superposition_state(TWO_STATE, g, t0), dt, steps)


CONTINUITY_T0 = 0.1  # a generic phase of the beat, away from the symmetric start


def continuity() -> CriterionResult:
    res = CriterionResult(7, "generalized continuity")
    dt = 1e-4
    H, traj = _well_trajectory(1024, dt, _period_steps(TWO_STATE, dt), 0.0)
    res.checks.append(at_most("RMS residual over one beat (n=1024, dt=1e-4)", continuity_residual(POSITION, H, traj, dt), 1e-4))
    window = traj.states[:41]
    gen = continuity_residual(IDENTITY, H, window, dt)
    std = standard_continuity_residual(window, dt)
    res.checks.append(at_most("|identity residual - standard residual|", abs(gen - std), 1e-10))
    fine_dt = 1e-6
    by_h = [continuity_residual(POSITION, *_well_trajectory(n, fine_dt, 4, CONTINUITY_T0), fine_dt) for n in (256, 512, 1024)]
    res.checks.append(within("h halving ratio 256->512", _ratio(by_h[0], by_h[1]), *ORDER_WINDOW))
    res.checks.append(within("h halving ratio 512->1024", _ratio(by_h[1], by_h[2]), *ORDER_WINDOW))
    by_dt = [continuity_residual(POSITION, *_well_trajectory(4096, s, 4, CONTINUITY_T0), s) for s in (4e-3, 2e-3, 1e-3)]
    res.checks.append(within("dt halving ratio 4e-3->2e-3", _ratio(by_dt[0], by_dt[1]), *ORDER_WINDOW))
    res.checks.append(within("dt halving ratio 2e-3->1e-3", _ratio(by_dt[1], by_dt[2]), *ORDER_WINDOW))
    return res


BERRY_POINT = (0.6, 0.3, 0.8)


def berry() -> CriterionResult:
    res = CriterionResult(8, "Berry sector force balance")
    model = TwoLevelModel(3)
    lab = propagate_family(model, static_path(BERRY_POINT, 1e-3, 10), 1e-4)
    fam = comoving(lab)
    res.checks.append(at_most("static |residual|", np.linalg.norm(force_balance(fam, 5).residual), 1e-8))
    drift = np.linalg.norm(berry_fields(fam, 8).connection - berry_fields(fam, 2).connection)
    res.checks.append(at_most("static comoving |A_B(t) - A_B(t')|", drift, 1e-8))
    s = berry_fields(propagate_family(model, static_path(BERRY_POINT, 1e-4, 10), 1e-4), 5)
    res.checks.append(at_most("static lab-frame |V_B - E| at dt=1e-4 (V_B = +E)", abs(s.scalar_potential - s.energy), 1e-8))

    rel = []
    for step in (4e-4, 1e-4):
        path = circular_path(1.0, 20.0, step, turns=200 * step / 20.0, height=0.5)
        f = propagate_family(model, path, step)
        rel.append(force_balance(f, path.steps // 2).relative)
    res.checks.append(at_most("slow circle relative residual (dt=delta=1e-4)", rel[1], 1e-3))
    res.checks.append(Check("residual shrink factor for dt, delta / 4", _ratio(rel[0], rel[1]), lower=2.0, scalable=False))

    path = circular_path(1.0, 20.0, 1e-3, turns=0.05, height=0.5)
    f = propagate_family(model, path, 1e-4)
    theta = lambda t: 0.3 * np.sin(2 * t)  # noqa: E731
    g = with_common_phase(f, theta)
    m = path.steps // 2
    t = path.times[m]
    shift = berry_fields(g, m).scalar_potential - berry_fields(f, m).scalar_potential
    res.checks.append(at_most("|V_B shift + dtheta/dt| under common phase", abs(shift + 0.6 * np.cos(2 * t)), 1e-6))
    res.checks.append(
        at_most("|residual change| under common phase", np.linalg.norm(force_balance(g, m).residual - force_balance(f, m).residual), 1e-6)
    )

    slow, slower = (adiabatic_deviation(model, 1.0, 0.5, T, T / 4000) for T in (320.0, 640.0))
    res.checks.append(within("V_B deviation ratio for doubled traversal time", slow.scalar / slower.scalar, 1.5, 2.5))
    res.checks.append(within("A_B deviation ratio for doubled traversal time", slow.connection / slower.connection, 1.5, 2.5))

    phase = berry_phase_loop(model, 1.0, 4000.0, 0.05, height=0.0)
    res.checks.append(at_most("|equatorial Berry phase - pi|", abs(wrap_phase(phase - np.pi)), 2e-2))
    return res


def _integrity_scenarios():
    dt, steps = 1e-4, 1000
    out = []
    for name, spec, n in (("two-state well", TWO_STATE, 1024), ("three-state well", THREE_STATE, 1024)):
        g = make_uniform_grid(1.0, n, "dirichlet")
        H = free_spec(g)
        out.append((name, H, propagate(H, superposition_state(spec, g), dt, steps)))
    g = make_uniform_grid(1.0, 1024)
    H = HamiltonianSpec(random_smooth(g, HYPERVIRIAL_AMPLITUDE, 0), HYPERVIRIAL_FLUX)
    out.append(("ring eigenstate", H, propagate(H, eigenstates(H, g, 1).states[0], dt, steps)))
    x = g.points
    packet = WaveFunction(g, np.exp(-((x - 0.5) ** 2) / (2 * 0.05**2) + 10j * x)).normalized()
    out.append(("ring wave packet", H, propagate(H, packet, dt, steps)))
    return out


def propagator_integrity() -> CriterionResult:
    res = CriterionResult(9, "propagator integrity")
    for name, H, traj in _integrity_scenarios():
        res.checks.append(at_most(f"{name} norm drift per 1e3 steps", norm_drift(traj), 1e-10))
        res.checks.append(at_most(f"{name} relative energy drift", energy_drift(H, traj), 1e-8))
    return res


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: free_particle_cancellation,
    2: cube_surface_integral,
    3: hypervirial,
    4: ab_flux,
    5: bloch,
    6: superposition,
    7: continuity,
    8: berry,
    9: propagator_integrity,
}
TAKES_JOBS = {3, 5}


def run_criterion(cid: int, tolerance_scale: float = 1.0, jobs: int = 1) -> CriterionResult:
    fn = CRITERIA[cid]
    result = fn(jobs) if cid in TAKES_JOBS else fn()
    result.scale = tolerance_scale
    return result


def run_all(tolerance_scale: float = 1.0, jobs: int = 1) -> list[CriterionResult]:
    """Criteria 1-9; criterion 10 (CLI determinism) is checked around this runner."""
    return [run_criterion(c, tolerance_scale, jobs) for c in sorted(CRITERIA)]
