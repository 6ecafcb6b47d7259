"""
A particle swarm solves a constrained 2D problem
================================================

Drive the sampled-particle scale by hand: one Euler-Maruyama step at a
time, with the penalty controller tightening the constraint whenever the
swarm's weighted violation stalls above the current threshold.
"""

import numpy as np

from swarmscale.config import load_bundled
from swarmscale.micro import consensus_point, init_swarm, step_euler_maruyama
from swarmscale.penalty import violation_micro

# The bundled problem: Ackley in 2D, feasible set = union of six balls,
# none of which contains the unconstrained minimizer at the origin.
cfg = load_bundled("ackley2d_constrained")
params = cfg.build_micro_params()
pf = cfg.build_penalized("micro")
ctrl = cfg.build_controller("micro")

rng = np.random.default_rng(cfg.seed)
swarm = init_swarm(cfg.n_particles, 2, rng, box=cfg.micro.init_box)

print(f"{cfg.n_particles} particles, dt={params.dt}, alpha={params.alpha}")
print(f"{'step':>5} {'consensus':>20} {'beta':>7} {'violation':>10}")

for step in range(cfg.n_steps):
    swarm = step_euler_maruyama(swarm, params, pf, rng)

    # weighted distance of the swarm to the feasible set, then the
    # success/failure update: shrink the threshold or raise the penalty
    v = violation_micro(swarm, pf, params.alpha)
    ctrl = ctrl.update(v)
    pf = pf.with_beta(ctrl.beta)

    if step % 50 == 0 or step == cfg.n_steps - 1:
        x = consensus_point(swarm, pf, params.alpha)
        print(
            f"{step:>5} ({x[0]:+8.4f}, {x[1]:+8.4f}) {ctrl.beta:>7.3f} {v:>10.5f}"
        )

x = consensus_point(swarm, pf, params.alpha)
fs = cfg.build_feasible_set()
print(f"\nfinal consensus  ({x[0]:+.4f}, {x[1]:+.4f})")
print(f"distance to feasible set: {float(fs.distance(x)):.5f}")
print("expected neighbourhood: the ball around (1.0, -1.0), the feasible")
print("region closest to the origin on this landscape")
