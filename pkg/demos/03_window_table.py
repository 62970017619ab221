#!/usr/bin/env python3
"""The stability-window table, computed with exact arithmetic.

Lower bounds are isolated roots of Q_n(r) = r^(2n) P_n(r) P_n(1/r) - r^(2n),
where P_n is the trace of J (B A)^n built over exact rationals; every sign
used during isolation and bisection is evaluated with integer arithmetic, so
the printed digits cannot be victims of rounding.  Upper bounds come from the
smallest-Chebyshev-root closed form, evaluated in interval arithmetic.  The
windows are nested and accumulate at 7 - 4*sqrt(3) = 0.0717967697...
"""

import math
import pathlib
import time

from btob.windows import q_poly, window_table, windows_csv

OUT = pathlib.Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

N_MAX = 20
t0 = time.perf_counter()
rows = window_table(N_MAX)
elapsed = time.perf_counter() - t0

print(f"first {N_MAX} windows ({elapsed:.2f}s, exact root isolation):")
print(f"{'n':>3} {'lower':>16} {'upper':>16} {'width':>10}")
for w in rows:
    width = "" if w.upper == "not defined" else f"{float(w.upper) - float(w.lower):.2e}"
    print(f"{w.n:>3} {w.lower:>16} {w.upper:>16} {width:>10}")

base = 7 - 4 * math.sqrt(3)
print(f"\ndistance of the lower bounds to 7-4*sqrt(3) = {base:.12f}:")
for w in rows[::4]:
    print(f"  n={w.n:2d}: {float(w.lower) - base:.3e}")

print(f"\ndegree of Q_20: {q_poly(20).degree()} (exact rational coefficients)")
path = OUT / "windows.csv"
with open(path, "w", encoding="utf-8") as fh:
    windows_csv(rows, fh)
print(f"table written to {path}")
