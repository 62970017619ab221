#!/usr/bin/env python3
"""Certificates for periodic branch words and a scan of the three families.

A branch word is realized by an orbit iff an eigenvector of its matrix
product satisfies, step by step, the strict inequalities selecting each
letter; it is realized stably iff that eigenvector carries the strictly
dominant eigenvalue.  The demo certifies the flagship word 132312 across its
stability boundary (which it locates by bisection to 12 decimals), shows that
13223122 is never realized stably, and scans exponents of the three
empirically observed families to map where each member is stable.
"""

import numpy as np

from btob.map_core import Restitution
from btob.spectral import certify_pattern, family_word

print("certificates for 132312 around its stability boundary:")
for rv in (0.20, 0.21, 0.22, 0.2201, 0.23, 0.3, 0.5):
    cert = certify_pattern("132312", Restitution(rv))
    if cert.exists:
        status = {True: "stable", False: "unstable", None: "undecided"}[cert.stable]
        print(f"  r={rv:<7} exists, {status:9s} |multiplier| = {abs(cert.multiplier):.4g}")
    else:
        step_idx, name = cert.failed_inequality
        print(f"  r={rv:<7} not realized (step {step_idx} violates {name})")


def boundary(word: str, lo: float, hi: float, tol: float = 1e-13) -> float:
    def stable(r: float) -> bool:
        return certify_pattern(word, Restitution(r)).stable is True

    s_hi = stable(hi)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if stable(mid) == s_hi:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


b = boundary("132312", 0.19, 0.25)
print(f"\nstability boundary of 132312: r = {b:.12f}")

print("\n13223122 on a coarse grid (never stable, at any r):")
stable_anywhere = False
for rv in np.linspace(0.02, 0.98, 49):
    if certify_pattern("13223122", Restitution(float(rv))).stable is True:
        stable_anywhere = True
print(f"  stable somewhere? {stable_anywhere}")

print("\nfamily scan (S = stable, u = exists unstable, . = not realized):")
r_grid = np.round(np.linspace(0.05, 0.95, 19), 3)
header = "family n_exp " + " ".join(f"{rv:5.2f}" for rv in r_grid)
print(header)
for family in (1, 2, 3):
    for n in (1, 2, 3, 5, 8):
        word = family_word(family, n)
        marks = []
        for rv in r_grid:
            cert = certify_pattern(word, Restitution(float(rv)))
            marks.append("S" if cert.stable is True else ("u" if cert.exists else "."))
        print(f"  {family}    {n:3d}   " + "     ".join(marks))
