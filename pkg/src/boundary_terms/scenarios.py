"""Dispatch from a validated scenario config to the module pipelines."""

from __future__ import annotations

import datetime as _dt
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .auditor import CONVENTION, AuditReport, ab_flux_dependence, ehrenfest_audit, hf_corrected_slope, hypervirial_check
from .berry import TwoLevelModel, berry_fields, circular_path, force_balance, propagate_family
from .config import ScenarioConfig
from .dynamics import SuperpositionSpec, superposition_audit
from .lattice import make_uniform_grid, plane_wave
from .potentials import preset_potential
from .quantum_ops import POSITION, HamiltonianSpec, free_spec
from .reports import ReportBundle, spread, split_complex, verdict


def ordered_map(fn, items, jobs: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool; order is preserved."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def audit_row(r: AuditReport, tol: float) -> dict:
    metric = abs(r.residual)
    row = {"scenario": r.scenario, "observable": r.observable}
    row.update(split_complex("formal", r.formal_term))
    row.update(split_complex("boundary", r.boundary_term))
    row.update(split_complex("explicit", r.explicit_time_term))
    row.update(split_complex("observed", r.observed_derivative))
    row.update(split_complex("residual", r.residual))
    row.update(n=r.n, h=r.h, dt=r.dt, metric=metric, tolerance=tol, verdict=verdict(metric, tol))
    return row


def _free_particle(cfg: ScenarioConfig, tol: float, jobs: int) -> tuple[str, list[dict]]:
    p, num = cfg.physics, cfg.numerics
    g = make_uniform_grid(p.length, num.n)
    k = 2 * np.pi * p.k_index / p.length
    psi = plane_wave(g, k)
    H = free_spec(g)
    name = cfg.scenario.name or "free_particle"
    return "audit", [audit_row(ehrenfest_audit(H, POSITION, psi, scenario=name), tol)]


def _quantum_well(cfg: ScenarioConfig, tol: float, jobs: int) -> tuple[str, list[dict]]:
    p, num = cfg.physics, cfg.numerics
    g = make_uniform_grid(p.length, num.n, "dirichlet")
    H = HamiltonianSpec(preset_potential(p.potential, g, p.amplitude, p.seed))
    name = cfg.scenario.name or "quantum_well"
    reports = ordered_map(lambda b: hypervirial_check(H, g, b, scenario=f"{name}:band{b}"), p.bands, jobs)
    return "audit", [audit_row(r, tol) for r in reports]


def _bloch(cfg: ScenarioConfig, tol: float, jobs: int) -> tuple[str, list[dict]]:
    p, num = cfg.physics, cfg.numerics
    g = make_uniform_grid(p.length, num.n)
    V = preset_potential(p.potential, g, p.amplitude, p.seed)
    tasks = [(float(k), b) for b in p.bands for k in np.linspace(p.k_min, p.k_max, p.k_points)]
    reports = ordered_map(lambda kb: hf_corrected_slope(V, g, kb[0], kb[1], num.delta), tasks, jobs)
    rows = []
    for r in reports:
        metric = r.max_residual()
        row = {"k": r.k, "band": r.band, "dE_dk_spectral": r.dE_dk_spectral}
        row.update(split_complex("mean_dHdk", r.mean_dHdk))
        row.update(split_complex("boundary", r.boundary_term))
        row.update(split_complex("dE_dk_corrected", r.dE_dk_corrected))
        row.update(
            momentum_slope=r.momentum_slope,
            residual_corrected_spectral=r.residual_corrected_spectral,
            residual_corrected_momentum=r.residual_corrected_momentum,
            residual_spectral_momentum=r.residual_spectral_momentum,
            metric=metric,
            tolerance=tol,
            verdict=verdict(metric, tol),
        )
        rows.append(row)
    return "hf", rows


def _ab_ring(cfg: ScenarioConfig, tol: float, jobs: int) -> tuple[str, list[dict]]:
    p, num = cfg.physics, cfg.numerics
    rows = []
    for r in ab_flux_dependence(p.length, p.flux, num.n):
        metric = abs(r.residual)
        row = {"flux": r.flux, "vector_potential": r.vector_potential}
        row.update(split_complex("boundary", r.boundary_term))
        row.update(split_complex("residual", r.residual))
        row.update(ground_energy=r.energies[0], metric=metric, tolerance=tol, verdict=verdict(metric, tol))
        rows.append(row)
    return "flux", rows


def _superposition(cfg: ScenarioConfig, tol: float, jobs: int) -> tuple[str, list[dict]]:
    p, num = cfg.physics, cfg.numerics
    spec = SuperpositionSpec(tuple(p.coefficients), None if p.levels is None else tuple(p.levels))
    every = max(1, num.steps // num.samples)
    a = superposition_audit(spec, p.length, num.n, num.dt, num.steps, audit_every=every)
    rows = []
    for i, t in enumerate(a.times):
        metric = abs(a.propagated[i] - a.series[i])
        row = {"time": t, "propagated": a.propagated[i]}
        row.update(split_complex("series", a.series[i]))
        row.update(split_complex("predicted", a.predicted[i]))
        row.update(split_complex("residual", a.residuals[i]))
        row.update(metric=metric, tolerance=tol, verdict=verdict(metric, tol))
        rows.append(row)
    return "superposition", rows


def _berry(cfg: ScenarioConfig, tol: float, jobs: int) -> tuple[str, list[dict]]:
    p, num = cfg.physics, cfg.numerics
    model = TwoLevelModel(3)
    turns = min(1.0, num.steps * num.dt / p.period)
    path = circular_path(p.radius, p.period, num.dt, turns=turns, height=p.height)
    fam = propagate_family(model, path, num.delta)
    idx = np.unique(np.linspace(1, path.steps - 1, num.samples).round().astype(int))
    rows = []
    for m in idx:
        s = berry_fields(fam, int(m))
        b = force_balance(fam, int(m))
        metric = b.relative
        row = {"time": s.time}
        row.update(spread("connection", s.connection))
        row.update(scalar_potential=s.scalar_potential, energy=s.energy)
        row.update(spread("curvature", s.curvature))
        row.update(spread("electric", s.electric))
        row.update(spread("residual", b.residual))
        row.update(metric=metric, tolerance=tol, verdict=verdict(metric, tol))
        rows.append(row)
    return "berry", rows


SWEEP_KINDS = ("bloch", "ab_ring")

PIPELINES = {
    "free_particle": _free_particle,
    "quantum_well": _quantum_well,
    "bloch": _bloch,
    "ab_ring": _ab_ring,
    "superposition": _superposition,
    "berry_two_level": _berry,
}


def metadata(config_echo: dict | None, tolerance_scale: float, **extra) -> dict:
    meta = {
        "artifact_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "convention": CONVENTION,
        "tolerance_scale": tolerance_scale,
        "config": config_echo,
    }
    meta.update(extra)
    return meta


def run_scenario(cfg: ScenarioConfig, tolerance_scale: float = 1.0, jobs: int = 1) -> ReportBundle:
    tol = cfg.numerics.tolerance * tolerance_scale
    kind, rows = PIPELINES[cfg.scenario.kind](cfg, tol, jobs)
    return ReportBundle(kind, metadata(cfg.echo(), tolerance_scale, seed=cfg.physics.seed), rows)
