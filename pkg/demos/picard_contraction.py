"""Picard iteration on a short horizon: Gamma per iterate and its ratios."""

import numpy as np

from nsvacuum import Grid, PhysParams, SimConfig, run
from nsvacuum.diagnostics import sup_l2_distance
from nsvacuum.picard import picard_run, uniform_schedule
from nsvacuum.solvers import initial_state

p = PhysParams(A=1.0, gamma=2.0, delta=3.0, alpha=1.0, beta=0.0, epsilon=0.01)
cfg = SimConfig(p, Grid(6.0, 256), t_end=0.02, initial_kwargs=dict(center=3.0, radius=2.0))

rep = picard_run(None, 6, cfg)
print(rep.summary())

# the fixed point of the discrete iteration is the discrete ns solution on the same steps
sched = uniform_schedule(initial_state(cfg), cfg)
ns = run(cfg.with_(dt_schedule=sched, save_every_step=True))
print(f"sup-L2 distance to direct run: {sup_l2_distance(rep.final, ns):.2e}")
print("ratios:", np.array2string(np.array(rep.ratios), precision=2))
