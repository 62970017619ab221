"""Acceptance gate: every criterion at its stated tolerance and budget.

Each test prints one `ACCEPTANCE <id>: PASS` line (pytest -s shows them) and
enforces the runtime budget it was given.  Reference numbers live in
appendix_data.py; everything else is computed in place.
"""

import math
import time
from fractions import Fraction

import numpy as np

from appendix_data import Q_DEVELOPED, WINDOW_BOUNDS
from btob.analysis import (
    ScanConfig,
    batch_iterate,
    batch_periods,
    canonical_rotation,
    lyapunov_max,
    rotation_number,
    scan_tails,
    theta_cluster_count,
    thin_stripe_r,
    cos_rotation_angle,
)
from btob.cli import _sample_directions, main
from btob.map_core import ProjectiveDirection, Restitution, branch_matrix
from btob.oracles import triple_engine_validate
from btob.spectral import (
    P1_REGIME_SWITCH,
    P2_REGIME_SWITCH,
    certify_pattern,
    char_poly,
    eigen_P1,
    eigen_P2,
    reduced_matrix,
    reduced_real_direction,
    solve_cubic,
)
from btob.windows import lower_bound, q_poly, upper_bound


class budget:
    """Context manager asserting a wall-clock budget and reporting the pass."""

    def __init__(self, label: str, seconds: float):
        self.label = label
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, *rest):
        elapsed = time.perf_counter() - self.t0
        if exc_type is None:
            assert elapsed < self.seconds, f"{self.label}: {elapsed:.1f}s over budget"
            print(f"ACCEPTANCE {self.label}: PASS ({elapsed:.2f}s)")
        return False


def test_criterion_01_polynomial_exactness():
    with budget("01 window-polynomial exactness", 10):
        for n in range(1, 11):
            assert list(q_poly(n).coeffs) == Q_DEVELOPED[n], f"Q_{n} mismatch"


def test_criterion_02_lower_bounds_all_100():
    with budget("02 lower bounds n=1..100", 30 * 60):
        for n in range(1, 101):
            assert lower_bound(n) == WINDOW_BOUNDS[n][0], f"lower bound n={n}"


def test_criterion_03_upper_bounds_all_100():
    with budget("03 upper bounds n=1..100", 60):
        assert upper_bound(1) == "not defined"
        for n in range(2, 101):
            assert upper_bound(n) == WINDOW_BOUNDS[n][1], f"upper bound n={n}"


def test_criterion_04_pattern_132312_boundary(capsys):
    with budget("04 stability boundary of 132312", 60):
        code = main(
            ["pattern", "132312", "--r-min", "0.19", "--r-max", "0.25", "--nr", "2",
             "--tol", "1e-13"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "stability boundary near r = 0.220069786146" in out
        for rv in (0.23, 0.3, 0.5):
            cert = certify_pattern("132312", Restitution(rv))
            assert cert.exists and cert.stable is True, f"expected stable at r={rv}"
        for rv in (0.20, 0.21):
            cert = certify_pattern("132312", Restitution(rv))
            assert cert.stable is not True, f"expected not stable at r={rv}"


def test_criterion_05_pattern_13223122_never_stable():
    with budget("05 13223122 unstable everywhere", 5 * 60):
        for k in range(11, 990):
            cert = certify_pattern("13223122", Restitution(k / 1000))
            assert cert.stable is not True, f"stable at r={k / 1000}"

        # the two binding feasibility boundaries coincide at 3 - 2*sqrt(2)
        def component_z(r):
            return reduced_real_direction("1322", Restitution(r))[2]

        def branch1_margin(r):
            v = reduced_real_direction("1322", Restitution(r))
            return (r + 1) / 2 * v[1] - v[0]

        target = 3 - 2 * math.sqrt(2)
        for f in (component_z, branch1_margin):
            lo, hi = 0.165, 0.18
            f_lo = f(lo)
            for _ in range(60):
                mid = (lo + hi) / 2
                if (f(mid) > 0) == (f_lo > 0):
                    lo = mid
                else:
                    hi = mid
            root = (lo + hi) / 2
            assert abs(root - target) < 1e-10


def test_criterion_06_characteristic_polynomial_anchors():
    with budget("06 characteristic-polynomial anchors", 1):
        for rv in (Fraction(1, 7), Fraction(1, 5), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)):
            rest = Restitution(rv)
            cub = char_poly(reduced_matrix("132", rest))
            assert cub.c2 == (7 * rv**6 - 24 * rv**5 - 29 * rv**4 + 21 * rv**2 - 8 * rv + 1) / 32
            assert cub.c1 == (rv**11 - 8 * rv**10 + 21 * rv**9 - 29 * rv**7 - 24 * rv**6 + 7 * rv**5) / 32
            assert cub.c0 == rv**11
            cub = char_poly(reduced_matrix("1322", rest))
            assert cub.c2 == (
                -7 * rv**8 + 42 * rv**7 - 18 * rv**6 - 58 * rv**5 + 24 * rv**4
                + 38 * rv**3 - 30 * rv**2 + 10 * rv - 1
            ) / 64
            assert cub.c1 == (
                -(rv**14) + 10 * rv**13 - 30 * rv**12 + 38 * rv**11 + 24 * rv**10
                - 58 * rv**9 - 18 * rv**8 + 42 * rv**7 - 7 * rv**6
            ) / 64
            assert cub.c0 == rv**14


def test_criterion_07_spectral_closed_forms():
    with budget("07 closed-form spectra vs numeric roots", 1):
        for rv in np.arange(0.01, 0.995, 0.01):
            rest = Restitution(float(rv))
            for closed, mat_id in ((eigen_P1(rest), 1), (eigen_P2(rest), 2)):
                numeric = list(solve_cubic(char_poly(branch_matrix(mat_id, rest))))
                for lam in closed.eigenvalues:
                    best = min(numeric, key=lambda z: abs(z - lam))
                    numeric.remove(best)
                    assert abs(best - lam) < 1e-11
        for switch, eigfn in ((P1_REGIME_SWITCH, eigen_P1), (P2_REGIME_SWITCH, eigen_P2)):
            below = eigfn(Restitution(switch * (1 - 1e-12)))
            above = eigfn(Restitution(switch * (1 + 1e-12)))
            assert all(v.imag == 0 for v in below.eigenvalues)
            assert sum(1 for v in above.eigenvalues if v.imag != 0) == 2


def test_criterion_08_triple_engine_equivalence():
    with budget("08 triple-engine symbol equivalence", 60):
        for rv in (0.1, 0.15, 0.2, 0.3):
            inits = _sample_directions(13, 100)
            report = triple_engine_validate(Restitution(rv), inits, 200)
            assert report.all_agree, f"divergences at r={rv}: {report.mismatches[:5]}"
            n_trig = sum(1 for c in report.comparisons if c.trig_included)
            assert n_trig > 0  # the angle engine participates where it stays clear


def test_criterion_09_window_phenomenology():
    with budget("09 window phenomenology scans", 5 * 60):
        cfg = ScanConfig(r_min=0.1275, r_max=0.1716, n_r=200, n_iter=5000, tail=256)
        tails = scan_tails(cfg)
        periods = batch_periods(tails.branches, 64)
        good = 0
        for i in range(tails.branches.shape[0]):
            if periods[i] != 4:
                continue
            word = "".join(str(c) for c in tails.branches[i, -4:])
            if canonical_rotation(word) != "1133":
                continue
            if theta_cluster_count(tails.theta[i, -100:], tol=1e-6) <= 4:
                good += 1
        frac = good / tails.branches.shape[0]
        assert frac >= 0.95, f"only {frac:.3f} of orbits locked onto 1133"

        cfg = ScanConfig(r_min=0.102, r_max=0.1275, n_r=200, n_iter=5000, tail=256)
        tails = scan_tails(cfg)
        periods = batch_periods(tails.branches, 64)
        frac_aperiodic = float(np.mean(periods == 0))
        assert frac_aperiodic >= 0.90, f"only {frac_aperiodic:.3f} aperiodic"


def test_criterion_10_table_of_detected_patterns():
    with budget("10 detected-pattern spot checks", 2 * 60):
        targets = {
            0.16: canonical_rotation("1133"),
            0.2: canonical_rotation("1322231222"),
            0.3: canonical_rotation("132312"),
            0.58: canonical_rotation("132312"),
        }
        for rv, want in targets.items():
            inits = _sample_directions(101, 10)
            rs = np.full(len(inits), rv)
            us = np.array([u.vector for u in inits])
            tails = batch_iterate(rs, us, 5000, 256)
            periods = batch_periods(tails.branches, 64)
            words = set()
            for i, p in enumerate(periods):
                if p:
                    words.add(
                        canonical_rotation("".join(str(c) for c in tails.branches[i, -p:]))
                    )
            assert want in words, f"r={rv}: wanted {want}, saw {sorted(words)}"


def test_criterion_11_thin_stripes():
    with budget("11 thin-stripe values", 1):
        assert abs(thin_stripe_r(1, 2) - (3 - 2 * math.sqrt(2))) < 1e-12
        assert abs(thin_stripe_r(1, 3) - (2 - math.sqrt(3))) < 1e-12
        for m in range(2, 121):
            for l in range(1, m):
                if math.gcd(l, m) != 1 or not 0.25 <= l / m <= 0.75:
                    continue
                r = thin_stripe_r(l, m)
                assert abs(cos_rotation_angle(r) - math.cos(2 * math.pi * l / m)) < 1e-12


def test_criterion_12_dynamical_diagnostics():
    with budget("12 Lyapunov and rotation diagnostics", 60):
        rest = Restitution(0.3)
        cert = certify_pattern("132312", rest)
        est = lyapunov_max(cert.direction, rest, 20_000)
        assert est.lambda_max < 0

        quasi = lyapunov_max(
            ProjectiveDirection.from_vector(1.0, 0.02, -0.98), Restitution(0.2), 100_000
        )
        assert abs(quasi.lambda_max) < 1e-2

        r13 = thin_stripe_r(1, 3)
        rot = rotation_number(
            ProjectiveDirection.from_vector(1.0, 0.01, -0.99), Restitution(r13), 3000
        )
        assert rot.exit_step is None
        assert abs(rot.rho - 1 / 3) < 1e-3
