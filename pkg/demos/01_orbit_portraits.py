#!/usr/bin/env python3
"""Ten random orbits at a fixed restitution coefficient, drawn in the strip.

At r = 0.2 the phase portrait mixes two kinds of attractors: periodic sinks
(a handful of points revisited forever, here the 10-letter branch word
1322231222) and quasi-periodic loops around the center of the middle branch.
Each orbit is iterated 5000 times; the last 2000 states are plotted in the
strip chart (w1, w2) = (y, x+z)/(x-z), one SVG per orbit, and the detected
period (if any) is printed.
"""

import pathlib

import numpy as np

from btob.analysis import detect_period, orbit_tail
from btob.map_core import ProjectiveDirection, Restitution
from btob.svgplot import SvgPlot

OUT = pathlib.Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

R_VALUE = 0.2
rest = Restitution(R_VALUE)
rng = np.random.default_rng(2024)

print(f"ten orbits of the b-to-b map at r = {R_VALUE}")
for k in range(10):
    a, b, c = rng.standard_normal(3)
    u0 = ProjectiveDirection.from_vector(abs(a) + 1e-3, b, -abs(c) - 1e-3)
    tails = orbit_tail(u0, rest, 5000, 2000)
    found = detect_period([int(x) for x in tails.branches[0]], 64)
    label = f"period {found[0]} ({found[1]})" if found else "no period <= 64 (quasi-periodic)"
    print(f"  orbit {k}: start {np.round(u0.vector, 4)} -> {label}")

    plot = SvgPlot(
        (-2.0, 2.0),
        (-1.05, 1.05),
        title=f"orbit {k} at r={R_VALUE}: {label}",
        x_label="w1",
        y_label="w2",
    )
    plot.add_points(tails.w1[0], tails.w2[0], radius=1.4)
    path = OUT / f"orbit_r02_{k}.svg"
    plot.write(path)
print(f"portraits written to {OUT}/orbit_r02_*.svg")
