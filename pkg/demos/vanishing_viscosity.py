"""epsilon -> 0: errors against the inviscid run and fitted log-log slopes.

Candidate exponents for the fractional norms are printed alongside, since the
smooth test data decays faster than either bound requires.
"""

from nsvacuum import Grid, PhysParams, SimConfig
from nsvacuum.grid import NormSpec
from nsvacuum.harness import SweepConfig, candidate_exponents, sweep

p = PhysParams(A=1.0, gamma=2.0, delta=3.0, alpha=1.0, beta=0.0, epsilon=0.01)
base = SimConfig(p, Grid(6.0, 1024), t_end=0.1, initial_kwargs=dict(center=3.0, radius=2.0))

res = sweep(SweepConfig(base, threads=2))

print("eps        " + "  ".join(f"{lab:>10}" for lab in res.labels) + "      sup J")
for eps, errs, supJ in res.rows:
    print(f"{eps:<10.3g} " + "  ".join(f"{errs[lab]:10.3e}" for lab in res.labels) + f"  {supJ:.4e}")

print()
for f in res.fits:
    print(f"{f.norm:>6}: slope {f.slope:.3f}")
for s in (1.5, 2.5):
    c = candidate_exponents(NormSpec.hs_frac(s))
    print(f"H^{s}: candidate exponents single {c['single']:.3f}, double {c['double']:.3f}")
print(f"sup J spread over eps: {res.apriori_spread:.3f}")
