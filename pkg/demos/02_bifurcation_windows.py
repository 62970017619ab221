#!/usr/bin/env python3
"""Bifurcation diagram over the window-accumulation range, with exact bounds.

Scans 600 restitution values in [0.0717, 0.1717] (the interval between the
three-particle collapse threshold 7 - 4*sqrt(3) and the classical stability
edge 3 - 2*sqrt(2)), 32 grid orbits each, 5000 iterations, plotting the angle
theta of the last 100 states on a log scale.  The stability windows of the
patterns (ab)^n (cb)^n appear as bands of finitely many accumulation points;
their exact lower bounds (roots of the window polynomials, blue) and the
closed-form upper bounds (red) are overlaid for n up to 14.
"""

import pathlib

import numpy as np

from btob.analysis import ScanConfig, scan_tails
from btob.svgplot import SvgPlot
from btob.windows import lower_bound, upper_bound

OUT = pathlib.Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

cfg = ScanConfig(r_min=0.0717, r_max=0.1717, n_r=600, n_iter=5000, tail=100)
print(f"scanning {cfg.n_r} r-values x {len(cfg.init_grid)} orbits x {cfg.n_iter} steps ...")
tails = scan_tails(cfg, threads=4)

rs = np.repeat(cfg.r_values, len(cfg.init_grid))[:, None] * np.ones((1, cfg.tail))
plot = SvgPlot(
    (cfg.r_min, cfg.r_max),
    (1e-7, np.pi / 2),
    title="tails of 32 orbits per r, log(theta)",
    x_label="r",
    y_label="theta (log scale)",
    log_y=True,
)
# every 4th tail state is plenty for the picture and keeps the file small
plot.add_points(rs[:, ::4].ravel(), tails.theta[:, ::4].ravel(), radius=0.4, opacity=0.45)

print("overlaying exact window bounds:")
for n in range(1, 15):
    low = lower_bound(n)
    up = upper_bound(n)
    print(f"  n={n:2d}: [{low}, {up}]")
    plot.add_vline(float(low), "#1f77ff", f"n={n}")
    if up != "not defined":
        plot.add_vline(float(up), "#d62728")

path = OUT / "bifurcation_windows.svg"
plot.write(path)
print(f"diagram written to {path}")
