"""Experiment drivers: single runs and seeded ensembles with CSV/JSON output.

One outer iteration advances the active scales by the shared step dt: the
swarm takes one SDE step, the grid solver sub-steps under its CFL bound up
to the shared time, each scale updates its own penalty controller, and the
coupled mode finishes with the mass transfer.  Given (config, seed) the
written files are byte-identical across repeat runs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, replace

import numpy as np

from .config import ExperimentConfig
from .macro import (
    MacroState,
    cfl_dt,
    consensus_point_macro,
    init_macro,
    lax_friedrichs_step,
    max_wavespeed,
)
from .micro import consensus_point, init_swarm, softmin_gap, step_euler_maruyama
from .micromacro import init_coupling, micro_cell_density, transfer_mass
from .penalty import violation_macro, violation_micro

# at most this many CFL sub-steps per outer step before declaring a stall
MAX_SUBSTEPS = 100_000


def micro_columns(dim: int):
    return (
        ["step", "time"]
        + [f"consensus_{k}" for k in range(dim)]
        + ["softmin_gap", "beta", "kappa", "violation", "branch"]
    )


MACRO_COLUMNS = [
    "step", "time", "consensus", "beta", "kappa", "violation", "branch",
    "total_mass", "argmax_center",
]

MICROMACRO_COLUMNS = [
    "step", "time",
    "consensus_micro", "beta_micro", "kappa_micro", "violation_micro", "branch_micro",
    "consensus_macro", "beta_macro", "kappa_macro", "violation_macro", "branch_macro",
    "zeta", "mass_micro", "mass_macro", "mass_total",
]


class RunError(RuntimeError):
    """A solver hard error, annotated with the failing step and a state digest."""

    def __init__(self, message, step, digest):
        super().__init__(f"{message} (step {step}, state digest {digest})")
        self.step = step
        self.digest = digest


@dataclass
class RunReport:
    mode: str
    seed: int
    out_dir: str
    csv_path: str
    json_path: str
    summary: dict
    rows: list


def _digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()[:16]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def _write_snapshot(out_dir, step, grid, macro: MacroState):
    path = os.path.join(out_dir, f"fields_{step:06d}.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "rho", "rho_u"])
        for x, r, q in zip(grid.centers, macro.rho, macro.rho_u):
            writer.writerow([repr(float(x)), repr(float(r)), repr(float(q))])


def _update_controller(ctrl, violation):
    new = ctrl.update(violation)
    return new, ("success" if ctrl.accepts(violation) else "failure")


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Execute one configured run and write trace.csv plus summary.json."""
    os.makedirs(cfg.output, exist_ok=True)
    started = time.perf_counter()
    constrained = cfg.feasible_set is not None
    alpha = cfg.micro.alpha
    dim = cfg.objective.dim

    if cfg.mode == "micro":
        columns = micro_columns(dim)
        rows, extra = _run_micro(cfg, constrained, alpha)
    elif cfg.mode == "macro":
        columns = MACRO_COLUMNS
        rows, extra = _run_macro(cfg, constrained, alpha)
    else:
        columns = MICROMACRO_COLUMNS
        rows, extra = _run_micromacro(cfg, constrained, alpha)

    csv_path = os.path.join(cfg.output, "trace.csv")
    _write_csv(csv_path, columns, rows)

    final = rows[-1]
    wall = time.perf_counter() - started
    summary = {
        "mode": cfg.mode,
        "seed": cfg.seed,
        "n_steps": cfg.n_steps,
        "final_consensus": extra["final_consensus"],
        "final_beta": extra["final_beta"],
        "final_kappa": extra["final_kappa"],
        "final_violation": extra["final_violation"],
        "final_zeta": extra.get("final_zeta"),
        "final_masses": extra["final_masses"],
        "argmin_estimate": extra["argmin_estimate"],
        "objective_at_estimate": extra["objective_at_estimate"],
        "final_time": final["time"],
        "wall_time_s": wall,
    }
    json_path = os.path.join(cfg.output, "summary.json")
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return RunReport(
        mode=cfg.mode,
        seed=cfg.seed,
        out_dir=cfg.output,
        csv_path=csv_path,
        json_path=json_path,
        summary=summary,
        rows=rows,
    )


def _run_micro(cfg, constrained, alpha):
    rng = np.random.default_rng(cfg.seed)
    params = cfg.build_micro_params()
    pf = cfg.build_penalized("micro")
    ctrl = cfg.build_controller("micro")
    swarm = init_swarm(
        cfg.n_particles, cfg.objective.dim, rng,
        box=cfg.micro.init_box, particle_mass=1.0 / cfg.n_particles,
    )

    rows = []
    consensus = consensus_point(swarm, pf, alpha)
    rows.append(_micro_row(0, 0.0, consensus, softmin_gap(swarm, pf, alpha),
                           ctrl, 0.0, "none"))
    for n in range(1, cfg.n_steps + 1):
        try:
            swarm = step_euler_maruyama(swarm, params, pf, rng)
            violation, branch = 0.0, "none"
            if constrained:
                violation = violation_micro(swarm, pf, alpha)
                ctrl, branch = _update_controller(ctrl, violation)
                pf = pf.with_beta(ctrl.beta)
            consensus = consensus_point(swarm, pf, alpha)
            gap = softmin_gap(swarm, pf, alpha)
        except Exception as exc:
            raise RunError(str(exc), n, _digest(swarm.positions, swarm.velocities)) from exc
        if __debug__:
            assert gap <= np.log(swarm.n_particles) / alpha + 1e-9
        rows.append(_micro_row(n, n * params.dt, consensus, gap, ctrl, violation, branch))

    estimate = [float(c) for c in consensus]
    extra = {
        "final_consensus": {"micro": estimate, "macro": None},
        "final_beta": {"micro": ctrl.beta, "macro": None},
        "final_kappa": {"micro": ctrl.kappa, "macro": None},
        "final_violation": {"micro": rows[-1]["violation"], "macro": None},
        "final_masses": {"micro": swarm.total_mass, "macro": None,
                         "total": swarm.total_mass},
        "argmin_estimate": estimate,
        "objective_at_estimate": float(cfg.build_objective()(np.asarray(estimate))),
    }
    return rows, extra


def _micro_row(step, t, consensus, gap, ctrl, violation, branch):
    row = {"step": step, "time": t}
    for k, c in enumerate(consensus):
        row[f"consensus_{k}"] = float(c)
    row.update(softmin_gap=float(gap), beta=ctrl.beta, kappa=ctrl.kappa,
               violation=float(violation), branch=branch)
    return row


def _advance_macro(state, grid, mp, pf, alpha, cfl, boundary, target_time):
    """CFL sub-steps until the shared time is reached.

    The step is chosen against the end-of-step wavespeed, (s + a*dt)*dt <=
    cfl*dx with a the largest source acceleration.  Sizing against the
    pre-step speed alone lets the attraction term outrun the Courant bound
    mid-step, which seeds a grid-scale parasitic mode.
    """
    accel_coeff = mp.lam / mp.m
    for _ in range(MAX_SUBSTEPS):
        remaining = target_time - state.time
        if remaining <= 1e-12:
            return state
        consensus = consensus_point_macro(state, grid, pf, alpha)
        a_max = accel_coeff * float(np.max(np.abs(grid.centers - consensus)))
        dt_adv = cfl_dt(state, grid, cfl)
        if a_max > 0.0:
            s = max_wavespeed(state)
            budget = cfl * grid.dx
            dt_acc = (math.sqrt(s * s + 4.0 * a_max * budget) - s) / (2.0 * a_max)
            dt_adv = min(dt_adv, dt_acc)
        dt = min(dt_adv, remaining)
        state = lax_friedrichs_step(state, grid, dt, mp, consensus, boundary=boundary)
    raise RuntimeError(
        f"grid solver stalled: {MAX_SUBSTEPS} sub-steps before t={target_time:g}"
    )


def _macro_summary_fields(state, grid, pf, alpha):
    consensus = consensus_point_macro(state, grid, pf, alpha)
    argmax = float(grid.centers[int(np.argmax(state.rho))])
    return consensus, argmax


def _run_macro(cfg, constrained, alpha):
    grid = cfg.build_grid()
    mp = cfg.build_macro_params()
    pf = cfg.build_penalized("macro")
    ctrl = cfg.build_controller("macro")
    state = init_macro(grid, total_mass=1.0, T=cfg.macro.T)
    snap = cfg.macro.snapshot_every

    rows = []
    consensus, argmax = _macro_summary_fields(state, grid, pf, alpha)
    rows.append(_macro_row(0, state, grid, consensus, ctrl, 0.0, "none", argmax))
    for n in range(1, cfg.n_steps + 1):
        try:
            # PDE advances by CFL sub-steps; the penalty loop lives on the
            # shared outer grid n * dt so its cadence is physical time.
            state = _advance_macro(state, grid, mp, pf, alpha, cfg.macro.cfl,
                                   cfg.macro.boundary, n * cfg.micro.dt)
            violation, branch = 0.0, "none"
            if constrained:
                violation = violation_macro(state, grid, pf, alpha)
                ctrl, branch = _update_controller(ctrl, violation)
                pf = pf.with_beta(ctrl.beta)
            consensus, argmax = _macro_summary_fields(state, grid, pf, alpha)
        except Exception as exc:
            raise RunError(str(exc), n, _digest(state.rho, state.rho_u)) from exc
        rows.append(_macro_row(n, state, grid, consensus, ctrl, violation, branch, argmax))
        if snap and n % snap == 0:
            _write_snapshot(cfg.output, n, grid, state)

    extra = {
        "final_consensus": {"micro": None, "macro": consensus},
        "final_beta": {"micro": None, "macro": ctrl.beta},
        "final_kappa": {"micro": None, "macro": ctrl.kappa},
        "final_violation": {"micro": None, "macro": rows[-1]["violation"]},
        "final_masses": {"micro": None, "macro": float(state.rho.sum() * grid.dx),
                         "total": float(state.rho.sum() * grid.dx)},
        "argmin_estimate": [argmax],
        "objective_at_estimate": float(cfg.build_objective()(np.asarray([argmax]))),
    }
    return rows, extra


def _macro_row(step, state, grid, consensus, ctrl, violation, branch, argmax):
    return {
        "step": step,
        "time": state.time,
        "consensus": float(consensus),
        "beta": ctrl.beta,
        "kappa": ctrl.kappa,
        "violation": float(violation),
        "branch": branch,
        "total_mass": float(state.rho.sum() * grid.dx),
        "argmax_center": argmax,
    }


def _run_micromacro(cfg, constrained, alpha):
    rng = np.random.default_rng(cfg.seed)
    params = cfg.build_micro_params()
    grid = cfg.build_grid()
    mp = cfg.build_macro_params()
    pf_m = cfg.build_penalized("micro")
    pf_M = cfg.build_penalized("macro")
    ctrl_m = cfg.build_controller("micro")
    ctrl_M = cfg.build_controller("macro")

    zeta0 = cfg.coupling.zeta0
    swarm = init_swarm(cfg.n_particles, 1, rng, box=cfg.micro.init_box,
                       particle_mass=zeta0 / cfg.n_particles)
    macro = init_macro(grid, total_mass=1.0 - zeta0, T=cfg.macro.T)
    coupling = init_coupling(
        swarm, grid, zeta0=zeta0, t_star=cfg.coupling.t_star,
        zeta_min=cfg.coupling.zeta_min, zeta_max=cfg.coupling.zeta_max,
    )
    snap = cfg.macro.snapshot_every

    rows = [_mm_row(0, 0.0, consensus_point(swarm, pf_m, alpha)[0], ctrl_m, 0.0, "none",
                    consensus_point_macro(macro, grid, pf_M, alpha), ctrl_M, 0.0, "none",
                    coupling, swarm, macro, grid)]
    for n in range(1, cfg.n_steps + 1):
        try:
            swarm = step_euler_maruyama(swarm, params, pf_m, rng)
            viol_m, branch_m = 0.0, "none"
            if constrained:
                viol_m = violation_micro(swarm, pf_m, alpha)
                ctrl_m, branch_m = _update_controller(ctrl_m, viol_m)
                pf_m = pf_m.with_beta(ctrl_m.beta)

            macro = _advance_macro(macro, grid, mp, pf_M, alpha, cfg.macro.cfl,
                                   cfg.macro.boundary, n * params.dt)
            viol_M, branch_M = 0.0, "none"
            if constrained:
                viol_M = violation_macro(macro, grid, pf_M, alpha)
                ctrl_M, branch_M = _update_controller(ctrl_M, viol_M)
                pf_M = pf_M.with_beta(ctrl_M.beta)

            coupling, swarm, macro = transfer_mass(
                coupling, swarm, macro, grid, n, rule=cfg.coupling.transfer_rule)

            cons_m = consensus_point(swarm, pf_m, alpha)[0]
            cons_M = consensus_point_macro(macro, grid, pf_M, alpha)
        except Exception as exc:
            raise RunError(
                str(exc), n,
                _digest(swarm.positions, swarm.velocities, macro.rho, macro.rho_u),
            ) from exc
        rows.append(_mm_row(n, n * params.dt, cons_m, ctrl_m, viol_m, branch_m,
                            cons_M, ctrl_M, viol_M, branch_M,
                            coupling, swarm, macro, grid))
        if snap and n % snap == 0:
            _write_snapshot(cfg.output, n, grid, macro)

    combined = macro.rho + micro_cell_density(swarm, grid)
    argmax = float(grid.centers[int(np.argmax(combined))])
    mass_micro = swarm.total_mass
    mass_macro = float(macro.rho.sum() * grid.dx)
    extra = {
        "final_consensus": {"micro": [float(cons_m)], "macro": float(cons_M)},
        "final_beta": {"micro": ctrl_m.beta, "macro": ctrl_M.beta},
        "final_kappa": {"micro": ctrl_m.kappa, "macro": ctrl_M.kappa},
        "final_violation": {"micro": rows[-1]["violation_micro"],
                            "macro": rows[-1]["violation_macro"]},
        "final_zeta": coupling.zeta,
        "final_masses": {"micro": mass_micro, "macro": mass_macro,
                         "total": mass_micro + mass_macro},
        "argmin_estimate": [argmax],
        "objective_at_estimate": float(cfg.build_objective()(np.asarray([argmax]))),
    }
    return rows, extra


def _mm_row(step, t, cons_m, ctrl_m, viol_m, branch_m,
            cons_M, ctrl_M, viol_M, branch_M, coupling, swarm, macro, grid):
    mass_micro = swarm.total_mass
    mass_macro = float(macro.rho.sum() * grid.dx)
    return {
        "step": step,
        "time": t,
        "consensus_micro": float(cons_m),
        "beta_micro": ctrl_m.beta,
        "kappa_micro": ctrl_m.kappa,
        "violation_micro": float(viol_m),
        "branch_micro": branch_m,
        "consensus_macro": float(cons_M),
        "beta_macro": ctrl_M.beta,
        "kappa_macro": ctrl_M.kappa,
        "violation_macro": float(viol_M),
        "branch_macro": branch_M,
        "zeta": coupling.zeta,
        "mass_micro": mass_micro,
        "mass_macro": mass_macro,
        "mass_total": mass_micro + mass_macro,
    }


@dataclass
class EnsembleReport:
    n_runs: int
    base_seed: int
    out_dir: str
    pooled_csv: str
    json_path: str
    runs: list


def run_ensemble(cfg: ExperimentConfig, n_runs: int, base_seed=None) -> EnsembleReport:
    """Independent runs with seeds base_seed + k; failures are recorded, not fatal."""
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    if base_seed is None:
        base_seed = cfg.seed
    os.makedirs(cfg.output, exist_ok=True)

    if cfg.mode == "micro":
        cons_cols = [f"consensus_{k}" for k in range(cfg.objective.dim)]
    elif cfg.mode == "macro":
        cons_cols = ["consensus"]
    else:
        cons_cols = ["consensus_micro"]
    pooled_cols = ["run", "seed", "step", "time"] + cons_cols

    records, pooled_rows = [], []
    for k in range(n_runs):
        seed = base_seed + k
        sub = replace(cfg, seed=seed, output=os.path.join(cfg.output, f"run_{k:03d}"))
        try:
            report = run_experiment(sub)
        except RunError as exc:
            records.append({"run": k, "seed": seed, "ok": False,
                            "error": str(exc), "failed_step": exc.step})
            continue
        for row in report.rows:
            pooled = {"run": k, "seed": seed, "step": row["step"], "time": row["time"]}
            for c in cons_cols:
                pooled[c] = row[c]
            pooled_rows.append(pooled)
        records.append({"run": k, "seed": seed, "ok": True,
                        "summary": report.summary})

    pooled_csv = os.path.join(cfg.output, "ensemble_consensus.csv")
    _write_csv(pooled_csv, pooled_cols, pooled_rows)
    payload = {"n_runs": n_runs, "base_seed": base_seed, "runs": records}
    json_path = os.path.join(cfg.output, "ensemble.json")
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return EnsembleReport(
        n_runs=n_runs, base_seed=base_seed, out_dir=cfg.output,
        pooled_csv=pooled_csv, json_path=json_path, runs=records,
    )
