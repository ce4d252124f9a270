"""Validate, run and check one member of a nu sweep; sweep-level claims."""

from __future__ import annotations

import math

import numpy as np

from . import characteristics as chars
from . import diagnostics as diag
from .conditions import ValidationReport, check_gamma_range, validate
from .config import RunConfig, build_data, build_grid, build_profile, gas_for


def validation_grids(cfg: RunConfig, profile):
    grid = build_grid(cfg, profile)
    return grid.x, np.linspace(0.0, max(cfg.t_final, 1e-12), 1001)


def validate_member(cfg: RunConfig, nu: float) -> ValidationReport:
    """All hypothesis checks for one ``nu``; a bad ``gamma`` short-circuits."""
    gamma = cfg.gamma if cfg.gamma is not None else math.nan
    gv = check_gamma_range(gamma)
    if not gv.passed:
        return ValidationReport({"gamma-range": gv})
    gas = gas_for(cfg, nu)
    profile = build_profile(cfg)
    initial, boundary = build_data(cfg, profile, gas)
    x_grid, t_grid = validation_grids(cfg, profile)
    return validate(profile, gas, initial, boundary, x_grid=x_grid, t_grid=t_grid,
                    c_xi=cfg.c_xi, delta=cfg.delta)


def run_claims(record, initial, boundary, cfg: RunConfig) -> list:
    """Every per-run claim on a finished simulation."""
    scfg = record.config
    gas, profile = scfg.gas, scfg.profile
    soft = gas.nu > cfg.strict_nu
    snaps = record.snapshots
    series = record.series
    x = scfg.grid.x
    t_grid = np.linspace(0.0, max(scfg.t_final, 1e-12), 1001)
    out = [diag.norms_finite(series), diag.sup_v_nonincreasing(series, cfg.claim_tol),
           diag.sup_rho_decreased(series)]
    out.append(diag.ClaimReport("positivity", record.clip_events == 0,
                                -float(record.clip_events), note="density floor events"))
    M = diag.data_bound_M(initial, boundary, x, t_grid)
    out.append(min((diag.max_principle_check(s, M) for s in snaps),
                   key=lambda c: c.worst_margin))
    out.append(diag.xi_bound_check(snaps, initial, boundary, x, t_grid))
    out.append(min((diag.slope_inequality_check(s, profile, gas, cfg.claim_tol, cfg.strict_nu)
                    for s in snaps), key=lambda c: c.worst_margin))
    probes = [p for p in cfg.probes if scfg.grid.x_b <= p <= scfg.grid.x_c]
    out.extend(diag.decay_check(snaps, initial, profile, gas, probes, cfg.claim_tol,
                                soft=soft))
    if len(snaps) >= 2 and cfg.traces > 0:
        out.extend(trace_claims(snaps, gas, M, cfg.traces, cfg.mono_tol))
    return out


def trace_claims(snaps, gas, M, count: int, tol: float) -> list:
    fld = chars.SpaceTimeField(snaps, gas)
    out = []
    for family in ("1", "2"):
        worst_mono, worst_vac = None, None
        for start in chars.default_starts(fld, count):
            tr = chars.trace(fld, start, family)
            if tr.t.size < 2:
                continue
            rep = chars.monotonicity_report(tr, tol)
            c = diag.ClaimReport(f"monotone-{family}", rep.ok, rep.worst, start[0], start[1],
                                 note=f"worst {rep.worst_kind or '-'} at t={rep.worst_t:.4g}")
            if worst_mono is None or c.worst_margin < worst_mono.worst_margin:
                worst_mono = c
            vac = chars.vacuum_equivalence_check(tr, gas, max(M, float(np.max(tr.R))))
            c = diag.ClaimReport(f"vacuum-equiv-{family}", vac.passed, vac.worst_margin,
                                 start[0], start[1])
            if worst_vac is None or c.worst_margin < worst_vac.worst_margin:
                worst_vac = c
        out.extend(c for c in (worst_mono, worst_vac) if c is not None)
    return out


def sweep_claims(sup_xi: dict, final_v: dict) -> list:
    """``sup xi`` scaling in ``nu`` and the ordering of final-``v`` distances."""
    out = []
    if len(sup_xi) >= 2:
        nus = sorted(sup_xi)
        slope = diag.xi_scaling_slope(nus, [sup_xi[n] for n in nus])
        ok = 0.4 <= slope <= 0.6
        out.append(diag.ClaimReport("xi-scaling", ok, min(slope - 0.4, 0.6 - slope),
                                    note=f"fitted slope {slope:.4f}"))
    out.append(diag.nu_convergence_ordering(final_v))
    return out
