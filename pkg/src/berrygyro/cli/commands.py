"""Sweep commands.  Each returns ``(outputs, grid)`` with everything held in memory."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import adiabatic_geo as geo
from .. import dynamics, model, sensing
from ..errors import NumericalFailure
from .config import RunConfig, preset
from .output import Table

TWO_PI = model.TWO_PI


def _map(fn, items, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _cycle_grid(s: model.PhysicalScenario, n_t: int) -> np.ndarray:
    return np.linspace(0.0, s.period, n_t + 1)


def spectrum(cfg: RunConfig, workers: int = 1):
    s = cfg.scenario()
    t = _cycle_grid(s, cfg.grid.N_t)
    h = model.hamiltonian(s, t)
    lam = np.linalg.eigvalsh(h)
    gaps = np.diff(lam, axis=-1).min(axis=-1)
    diag = model.diagonal_curves(s, t)
    bz = model.field_from_hamiltonian(h, s.Q_prime)[:, 2]
    table = Table.of(
        units="t in s; omega_gamma_t in rad; energies, gap and Bz in rad/s",
        t=t, omega_gamma_t=s.omega_gamma * t,
        lambda1=lam[:, 0], lambda2=lam[:, 1], lambda3=lam[:, 2],
        Hpp=diag.Hpp, Hmm=diag.Hmm, gap=gaps, Bz=bz,
    )
    rc = model.resonance_class(s)
    k = int(np.argmin(gaps))
    summary = {
        "resonance": rc.kind.name.lower(),
        "resonance_product": rc.product,
        "boundary_residual": rc.boundary_residual,
        "bz_extrema": list(model.bz_extrema(s)),
        "min_gap": float(gaps[k]),
        "min_gap_omega_gamma_t": float(s.omega_gamma * t[k]),
    }
    return {"spectrum.csv": table, "spectrum.json": summary}, {"N_t": cfg.grid.N_t}


def adiabaticity(cfg: RunConfig, workers: int = 1):
    s = cfg.scenario()
    track = geo.track_eigensystem(s, cfg.grid.N_t)
    rep = geo.adiabatic_parameter(track)
    cols = {"t": track.t, "omega_gamma_t": s.omega_gamma * track.t}
    d = track.dim
    for m in range(d):
        for n in range(m + 1, d):
            cols[f"eps_{m}{n}"] = rep.eps[:, m, n]
    table = Table.of(units="t in s; omega_gamma_t in rad; eps dimensionless", **cols)
    summary = {"max_eps": rep.max_eps, "min_gap": track.min_gap}
    return {"adiabaticity.csv": table, "adiabaticity.json": summary}, {"N_t": cfg.grid.N_t}


def _berry(cfg: RunConfig, workers: int) -> geo.BerryCurve:
    return geo.berry_curve(cfg.scenario(), cfg.omega_grid(), n_t=cfg.grid.N_t, workers=workers)


def _berry_summary(curve: geo.BerryCurve) -> dict:
    return {
        "max_abs_slope": curve.max_abs_slope,
        "argmax_slope_omega": curve.argmax_slope,
        "argmax_slope_omega_hz": curve.argmax_slope / TWO_PI,
        "phi_g_at_zero": float(curve.phi_g[np.argmin(np.abs(curve.omega_grid))]),
        "points": int(curve.omega_grid.size),
    }


def berry(cfg: RunConfig, workers: int = 1):
    curve = _berry(cfg, workers)
    table = Table.of(
        units="omega in rad/s; phases in rad; slope in s",
        omega=curve.omega_grid, phi_g=curve.phi_g, delta_phi_g=curve.delta_phi_g, slope=curve.slope,
    )
    grid = {"N_t": cfg.grid.N_t, "omega_points": int(curve.omega_grid.size)}
    return {"berry.csv": table, "berry.json": _berry_summary(curve)}, grid


def _dynamics_point(cfg: RunConfig, include_cd: bool, om: float):
    s = cfg.scenario(om)
    res, fid = dynamics.cyclic_phase(s, include_cd, cfg.grid.steps)
    wilson = geo.wilson_loop_phase(geo.track_eigensystem(s, cfg.grid.N_t, with_derivative=False))
    return res, fid, wilson


def dynamics_sweep(cfg: RunConfig, include_cd: bool = True, workers: int = 1):
    omegas = cfg.dynamics_grid()
    results = _map(lambda om: _dynamics_point(cfg, include_cd, om), omegas, workers)
    steps = cfg.grid.steps
    stride = max(1, steps // cfg.grid.N_t)
    t_full = np.arange(steps + 1) * (cfg.scenario().period / steps)
    t_sub = t_full[::stride]
    wg = cfg.scenario().omega_gamma
    fid_cols = {"omega": [], "t": [], "omega_gamma_t": [], "fidelity": []}
    for om, (_, fid, _) in zip(omegas, results):
        fid_cols["omega"].append(np.full(t_sub.size, om))
        fid_cols["t"].append(t_sub)
        fid_cols["omega_gamma_t"].append(wg * t_sub)
        fid_cols["fidelity"].append(fid[::stride])
    fidelity = Table.of(
        units="omega in rad/s; t in s; omega_gamma_t in rad",
        **{k: np.concatenate(v) for k, v in fid_cols.items()},
    )
    r = [x[0] for x in results]
    phases = Table.of(
        units="omega in rad/s; phases in rad",
        omega=omegas,
        total=np.array([x.total_phase for x in r]),
        dynamical=np.array([x.dynamical_phase for x in r]),
        geometric=np.array([x.geometric_phase for x in r]),
        return_fidelity=np.array([x.return_fidelity for x in r]),
        min_fidelity=np.array([x.min_instantaneous_fidelity for x in r]),
    )
    wilson = np.array([x[2] for x in results])
    err = np.abs(geo._wrap(phases.column("geometric") - wilson))
    prof = geo.cd_bare_basis_profile(cfg.scenario(), cfg.grid.N_t)
    cd_profile = Table.of(
        units="t in s; omega_gamma_t in rad; couplings in rad/s",
        t=prof.t, omega_gamma_t=prof.phase,
        plus_minus=prof.plus_minus, plus_zero=prof.plus_zero, zero_minus=prof.zero_minus,
    )
    summary = {
        "cd": include_cd,
        "min_fidelity": float(phases.column("min_fidelity").min()),
        "min_return_fidelity": float(phases.column("return_fidelity").min()),
        "max_abs_geometric_minus_wilson": float(err.max()),
        "wilson": wilson.tolist(),
        "cd_plus_minus_peak_omega_gamma_t": float(prof.phase[np.argmax(prof.plus_minus)]),
    }
    grid = {"N_t": cfg.grid.N_t, "steps": steps, "omega_points": int(omegas.size),
            "fidelity_stride": stride}
    outputs = {"fidelity.csv": fidelity, "phases.csv": phases, "cd_profile.csv": cd_profile,
               "dynamics.json": summary}
    return outputs, grid


def _point_dict(p: sensing.SensitivityPoint) -> dict:
    return dataclasses.asdict(p)


def sensitivity(cfg: RunConfig, workers: int = 1):
    curve = _berry(cfg, workers)
    n = cfg.noise
    sc = sensing.sensitivity_curve(curve, n.N_spins, n.Tm_s, cfg.physics.gamma_n)
    table = Table.of(
        units="omega in rad/s; slope in s; eta in rad/s/sqrt(Hz); eta_B in T/sqrt(Hz)",
        omega=sc.omega, slope=sc.slope, eta=sc.eta, eta_single=sc.eta_single, eta_B=sc.eta_B,
    )
    summary = {
        "optimum": _point_dict(sc.optimum),
        "N_spins": n.N_spins,
        "Tm_s": n.Tm_s,
        "reported_chains": {k: _point_dict(v) for k, v in sensing.reported_chains(cfg.physics.gamma_n).items()},
    }
    grid = {"N_t": cfg.grid.N_t, "omega_points": int(curve.omega_grid.size)}
    return {"sensitivity.csv": table, "sensitivity.json": summary}, grid


def noise(cfg: RunConfig, workers: int = 1):
    n = cfg.noise
    grid = {"tau_points": n.tau_points, "t_i_points": len(n.t_i_s)}
    if n.slope_s is not None:
        slope, source = n.slope_s, "config"
    else:
        curve = _berry(cfg, workers)
        slope, source = curve.max_abs_slope, "berry_curve_max"
        grid.update(N_t=cfg.grid.N_t, omega_points=int(curve.omega_grid.size))
    rows = {"tau": [], "t_i": [], "Tm_opt": [], "eta_real_opt": []}
    try:
        for t_i in n.t_i_s:
            for tau in cfg.tau_grid():
                tm, eta = sensing.optimize_Tm(slope, n.N_spins, tau, t_i)
                for k, v in zip(rows, (tau, t_i, tm, eta)):
                    rows[k].append(v)
        budget = sensing.noise_budget(slope, n.N_spins, n.T1e_s, n.T2n_star_s, n.t_i_s[0],
                                      period=cfg.scenario().period)
    except ValueError as exc:
        raise NumericalFailure(str(exc)) from exc
    table = Table.of(units="times in s; eta_real_opt in rad/s/sqrt(Hz)",
                     **{k: np.array(v) for k, v in rows.items()})
    summary = {"slope": slope, "slope_source": source, "budget": dataclasses.asdict(budget)}
    return {"noise.csv": table, "noise.json": summary}, grid


COMMANDS = {
    "spectrum": spectrum,
    "adiabaticity": adiabaticity,
    "berry": berry,
    "dynamics": dynamics_sweep,
    "sensitivity": sensitivity,
    "noise": noise,
}


# figure id -> list of (preset, command, suffix, options)
FIGURES = {
    "1b": [("resonant", "spectrum", "", {})],
    "2a": [(p, "berry", f"_{p}", {}) for p in ("detuned", "near_resonant", "resonant")],
    "2b": [(p, "adiabaticity", f"_{p}", {}) for p in ("detuned", "near_resonant")],
    "3a": [("near_resonant", "cd_profile", "", {})],
    "3b": [("near_resonant", "dynamics", "_cd", {"include_cd": True}),
           ("near_resonant", "dynamics", "_nocd", {"include_cd": False})],
    "4a": [("near_resonant", "berry", "", {})],
    "4b": [(p, "sensitivity", f"_{p}", {}) for p in ("near_resonant", "detuned")],
    "5a": [("near_resonant", "noise", "", {})],
    "5b": [("near_resonant", "noise", "", {})],
}


def cd_profile(cfg: RunConfig, workers: int = 1):
    prof = geo.cd_bare_basis_profile(cfg.scenario(), cfg.grid.N_t)
    table = Table.of(
        units="t in s; omega_gamma_t in rad; couplings in rad/s",
        t=prof.t, omega_gamma_t=prof.phase,
        plus_minus=prof.plus_minus, plus_zero=prof.plus_zero, zero_minus=prof.zero_minus,
    )
    summary = {
        "plus_minus_peak_omega_gamma_t": float(prof.phase[np.argmax(prof.plus_minus)]),
        "plus_minus_max": float(prof.plus_minus.max()),
    }
    return {"cd_profile.csv": table, "cd_profile.json": summary}, {"N_t": cfg.grid.N_t}


_FIGURE_COMMANDS = {**COMMANDS, "cd_profile": cd_profile}


def reproduce(figure: str, override: RunConfig | None = None, workers: int = 1):
    """Run a figure preset.  ``override`` supplies replacement sweep/grid/noise sections."""
    if figure not in FIGURES:
        raise KeyError(figure)
    outputs, grid = {}, {}
    for name, command, suffix, opts in FIGURES[figure]:
        cfg = preset(name)
        if override is not None:
            cfg = dataclasses.replace(cfg, sweep=override.sweep, grid=override.grid, noise=override.noise)
        out, g = _FIGURE_COMMANDS[command](cfg, workers=workers, **opts)
        if command == "dynamics":
            # one CD profile per figure is enough; fidelity traces balloon the output
            out = {k: v for k, v in out.items() if k in ("phases.csv", "dynamics.json")}
        for fname, val in out.items():
            stem, ext = fname.rsplit(".", 1)
            outputs[f"{stem}{suffix}.{ext}"] = val
        grid[name + suffix] = g
    return outputs, grid
