"""Coupling between the particle swarm and the moment solver on a shared 1D grid.

The scalar weight zeta compares macroscopic cell velocities with mean
particle velocities and decides how much mass stays on the particle side.
Mass moves by re-weighting particles (never by resampling) together with a
compensating update of the macroscopic density.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .macro import EPS_RHO, Grid1D, MacroState
from .micro import SwarmState

TRANSFER_RULES = ("conserve", "literal")


@dataclass(frozen=True)
class CouplingState:
    """Current zeta, its bounds, the mass bookkeeping and the activation step.

    mu0 is the microscopic mass at initialization; after every activated
    transfer the current microscopic mass equals zeta * mu0.
    """

    zeta: float
    mu0: float
    mu: float
    rho_m_prev: np.ndarray
    t_star: int
    zeta_min: float = 0.1
    zeta_max: float = 0.9

    def __post_init__(self):
        if not 0 < self.zeta_min < self.zeta_max < 1:
            raise ValueError("need 0 < zeta_min < zeta_max < 1")
        if not self.zeta_min <= self.zeta <= self.zeta_max:
            raise ValueError("zeta must lie in [zeta_min, zeta_max]")
        if self.mu0 <= 0 or self.mu <= 0:
            raise ValueError("microscopic masses must be positive")
        if self.t_star < 0:
            raise ValueError("t_star must be nonnegative")
        object.__setattr__(self, "rho_m_prev", np.asarray(self.rho_m_prev, dtype=float))


def init_coupling(
    swarm: SwarmState,
    grid: Grid1D,
    zeta0: float = 0.5,
    t_star: int = 240,
    zeta_min: float = 0.1,
    zeta_max: float = 0.9,
) -> CouplingState:
    """Coupling state at step 0; mu0 is read off the swarm's current mass."""
    return CouplingState(
        zeta=zeta0,
        mu0=swarm.total_mass,
        mu=swarm.total_mass,
        rho_m_prev=micro_cell_density(swarm, grid),
        t_star=t_star,
        zeta_min=zeta_min,
        zeta_max=zeta_max,
    )


def _cell_indices(swarm: SwarmState, grid: Grid1D) -> np.ndarray:
    # coupling runs on the 1D macro grid only
    if swarm.dim != 1:
        raise ValueError("scale coupling requires 1D positions")
    x = swarm.positions[:, 0]
    idx = np.floor((x - grid.x_min) / grid.dx).astype(int)
    # strays beyond the domain count toward the nearest boundary cell
    return np.clip(idx, 0, grid.n_cells - 1)


def micro_cell_density(swarm: SwarmState, grid: Grid1D) -> np.ndarray:
    """Histogram of particle mass per cell, normalized by dx.

    Every particle lands in exactly one cell, so the field integrates to
    particle_mass * N exactly.
    """
    idx = _cell_indices(swarm, grid)
    counts = np.bincount(idx, minlength=grid.n_cells)
    return swarm.particle_mass * counts / grid.dx


def compute_zeta(
    swarm: SwarmState, macro: MacroState, grid: Grid1D, coupling: CouplingState
) -> float:
    """Normalized, density-weighted velocity discrepancy between the scales.

    Per cell: d_j = |u_j - vbar_j| with u_j the macroscopic velocity and
    vbar_j the mean particle velocity (0 in empty cells, which carry zero
    weight anyway); weight w_j is the microscopic share of the cell density.
    The raw value sum(w d) / (sum(w) * max d) is clamped to
    [zeta_min, zeta_max]; the max ranges over occupied cells only.
    """
    idx = _cell_indices(swarm, grid)
    counts = np.bincount(idx, minlength=grid.n_cells)
    occupied = counts > 0

    vbar = np.zeros(grid.n_cells)
    vsum = np.bincount(idx, weights=swarm.velocities[:, 0], minlength=grid.n_cells)
    vbar[occupied] = vsum[occupied] / counts[occupied]

    u = macro.rho_u / np.maximum(macro.rho, EPS_RHO)
    d = np.abs(u - vbar)

    rho_m = micro_cell_density(swarm, grid)
    cell_total = rho_m + macro.rho
    w = np.divide(rho_m, cell_total, out=np.zeros_like(rho_m), where=cell_total > 0)

    w_sum = w.sum()
    d_max = d[occupied].max() if occupied.any() else 0.0
    if d_max == 0.0 or w_sum <= 0.0:
        return coupling.zeta_min
    zeta_raw = float(w @ d / (w_sum * d_max))
    return min(max(zeta_raw, coupling.zeta_min), coupling.zeta_max)


def transfer_mass(
    coupling: CouplingState,
    swarm: SwarmState,
    macro: MacroState,
    grid: Grid1D,
    step: int,
    rule: str = "conserve",
):
    """Re-split the total mass between the scales according to a fresh zeta.

    Frozen before step t_star: no mass moves and zeta keeps its value, but
    the previous-step density snapshot is still refreshed so the first
    activated transfer sees a one-step difference rather than the drift
    accumulated since initialization.  Afterwards the particle weight is set
    so the microscopic mass equals zeta * mu0, the macroscopic density
    absorbs the difference, and (under the default "conserve" rule) one
    multiplicative rescale pins the combined mass to its pre-transfer value.
    The "literal" rule instead applies the signed update branch directly,
    clipped at zero, without the rescale.
    """
    if rule not in TRANSFER_RULES:
        raise ValueError(f"rule must be one of {TRANSFER_RULES}")
    if step < coupling.t_star:
        frozen = replace(coupling, rho_m_prev=micro_cell_density(swarm, grid))
        return frozen, swarm, macro

    dx = grid.dx
    total_before = swarm.total_mass + macro.rho.sum() * dx
    if total_before <= 0:
        raise ValueError("total mass must be positive")

    zeta = compute_zeta(swarm, macro, grid, coupling)
    mu_new = zeta * coupling.mu0
    new_swarm = replace(swarm, particle_mass=mu_new / swarm.n_particles)
    rho_m_new = micro_cell_density(new_swarm, grid)
    delta = rho_m_new - coupling.rho_m_prev

    if rule == "literal":
        rho_macro = macro.rho + delta if mu_new <= coupling.mu else macro.rho - delta
        rho_macro = np.maximum(rho_macro, 0.0)
    else:
        rho_macro = np.maximum(macro.rho - delta, 0.0)
        target = total_before - mu_new
        got = rho_macro.sum() * dx
        if target <= 0 or got <= 0:
            raise ValueError("cannot rebalance: macroscopic mass would vanish")
        rho_macro = rho_macro * (target / got)

    # a cell emptied by the transfer must not keep stale momentum
    rho_u = np.where(rho_macro <= EPS_RHO, 0.0, macro.rho_u)
    new_macro = replace(macro, rho=rho_macro, rho_u=rho_u)
    new_coupling = replace(coupling, zeta=zeta, mu=mu_new, rho_m_prev=rho_m_new)
    return new_coupling, new_swarm, new_macro
