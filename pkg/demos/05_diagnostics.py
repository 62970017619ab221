#!/usr/bin/env python3
"""Dynamical diagnostics: Lyapunov exponents, rotation numbers, correlations.

Three regimes, three signatures.  A certified periodic orbit has a negative
maximal Lyapunov exponent; a quasi-periodic orbit on an invariant loop of the
middle branch has a vanishing one and non-decaying oscillatory correlations;
at the thin-stripe restitution values the rotation number of the loop is the
prescribed rational l/m.  The empirical measure of a periodic orbit collapses
onto finitely many cells of the strip histogram.
"""

import pathlib

from btob.analysis import (
    OBSERVABLES,
    correlations,
    empirical_histogram,
    histogram_csv,
    lyapunov_max,
    rotation_number,
    thin_stripe_r,
)
from btob.map_core import ProjectiveDirection, Restitution
from btob.spectral import certify_pattern

OUT = pathlib.Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

rest = Restitution(0.3)
cert = certify_pattern("132312", rest)
est = lyapunov_max(cert.direction, rest, 50_000)
print(f"Lyapunov exponent on the certified 132312 orbit at r=0.3: {est.lambda_max:+.6f}")

quasi_start = ProjectiveDirection.from_vector(1.0, 0.02, -0.98)
est = lyapunov_max(quasi_start, Restitution(0.2), 100_000)
print(f"Lyapunov exponent on a quasi-periodic loop at r=0.2:      {est.lambda_max:+.6f}")

print("\nrotation numbers at thin-stripe restitution values:")
for l, m in ((1, 3), (2, 5), (1, 2), (3, 7)):
    r = thin_stripe_r(l, m)
    est = rotation_number(ProjectiveDirection.from_vector(1, 0.01, -0.99), Restitution(r), 4000)
    print(f"  l/m = {l}/{m}:  r = {r:.9f}  rho = {est.rho:.9f}")

print("\ntime correlations of theta along one orbit:")
series = correlations(
    cert.direction, rest, OBSERVABLES["theta"], OBSERVABLES["theta"], 4002, range(0, 13)
)
print("  periodic orbit (132312):", " ".join(f"{v:+.3f}" for v in series.values))
series = correlations(
    quasi_start, Restitution(0.2), OBSERVABLES["w1"], OBSERVABLES["w1"], 4000, range(0, 13)
)
print("  quasi-periodic loop:    ", " ".join(f"{v:+.5f}" for v in series.values))
print("  (no decay in either regime; the periodic one repeats with period 6)")

hist = empirical_histogram(cert.direction, rest, 5000, bins=48)
occupied = int((hist.mass > 0).sum())
print(f"\nempirical measure of the periodic orbit: {occupied} occupied cells of 48x48")
path = OUT / "histogram_132312.csv"
with open(path, "w", encoding="utf-8") as fh:
    histogram_csv(hist, fh)
print(f"histogram written to {path}")
