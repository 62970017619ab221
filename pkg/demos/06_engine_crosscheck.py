#!/usr/bin/env python3
"""Cross-validation of the four engines on matched initial data.

The piecewise linear map, the wedge-product construction, the event-driven
particle simulation and the trigonometric engine all encode the same
dynamics.  For each restitution value, 60 random valid directions seed all
four; the collision-symbol streams must agree wherever they are defined.
The particle stream ends when the physical system separates (the projective
map is total, the particle system is not), and the angle engine drops out
when its degeneracy flag trips; both effects are reported.
"""

import numpy as np

from btob.map_core import ProjectiveDirection, Restitution
from btob.oracles import triple_engine_validate


def sample(seed: int, count: int):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        a, b, c = rng.standard_normal(3)
        if abs(a) < 1e-6 or abs(c) < 1e-6:
            continue
        out.append(ProjectiveDirection.from_vector(abs(a), b, -abs(c)))
    return out


print(f"{'r':>6} {'inits':>6} {'symbols':>8} {'divergences':>12} {'trig kept':>10} "
      f"{'median particle lifetime':>25}")
for rv in (0.075, 0.1, 0.15, 0.2, 0.3, 0.5):
    report = triple_engine_validate(Restitution(rv), sample(99, 60), 200)
    lifetimes = sorted(c.particle_symbols for c in report.comparisons)
    median_life = lifetimes[len(lifetimes) // 2]
    n_trig = sum(1 for c in report.comparisons if c.trig_included)
    print(
        f"{rv:>6} {len(report.comparisons):>6} {report.n_symbols:>8} "
        f"{len(report.mismatches):>12} {n_trig:>10} {median_life:>25}"
    )

print("\nper-engine wall time at r = 0.2:")
report = triple_engine_validate(Restitution(0.2), sample(7, 60), 200)
for name, secs in report.engine_seconds.items():
    print(f"  {name:9s} {secs:7.3f}s")
print(f"agreement: {report.all_agree}")
