"""Scan engine, period detection, thin stripes and the orbit diagnostics."""

import math

import numpy as np
import pytest

from btob.analysis import (
    OBSERVABLES,
    ScanConfig,
    batch_iterate,
    batch_periods,
    bifurcation_scan,
    canonical_rotation,
    correlations,
    cos_rotation_angle,
    default_grid,
    detect_period,
    empirical_histogram,
    lyapunov_max,
    orbit_tail,
    rotation_number,
    scan_tails,
    theta_cluster_count,
    thin_stripe_r,
)
from btob.map_core import DomainError, ProjectiveDirection, Restitution, iterate, step
from btob.spectral import certify_pattern
from conftest import sample_directions


def test_default_grid_shape_and_signs():
    grid = default_grid()
    assert len(grid) == 32
    assert all(u.y < 0 for u in grid)
    first = grid[0]  # g = 1, h = 1: direction of (1, -3, -1.1)
    want = np.array([1.0, -3.0, -1.1])
    want /= np.linalg.norm(want)
    assert np.allclose(first.vector, want)


def test_scan_config_validation():
    with pytest.raises(ValueError):
        ScanConfig(0.5, 0.4, 10)
    with pytest.raises(ValueError):
        ScanConfig(0.1, 0.2, 10, tail=100, n_iter=50)
    with pytest.raises(ValueError):
        ScanConfig(0.1, 0.2, 10, observable="w7")
    cfg = ScanConfig(0.1, 0.2, 3)
    assert len(cfg.init_grid) == 32


def test_bifurcation_scan_record_count_and_order():
    grid = tuple(sample_directions(5, 2))
    cfg = ScanConfig(0.2, 0.3, n_r=3, init_grid=grid, n_iter=40, tail=5)
    records = list(bifurcation_scan(cfg))
    assert len(records) == 3 * 2 * 5
    keys = [(rec.r, rec.init_index, rec.iter_index) for rec in records]
    assert keys == sorted(keys)
    assert {rec.iter_index for rec in records} == {35, 36, 37, 38, 39}
    assert all(rec.branch in (1, 2, 3) for rec in records)


def test_batch_matches_scalar_step_bitwise():
    inits = sample_directions(9, 20)
    rng = np.random.default_rng(2)
    rs = rng.uniform(0.05, 0.95, 20)
    tails = batch_iterate(rs, np.array([u.vector for u in inits]), 300, 300)
    for i in (0, 7, 19):
        u = inits[i]
        rest = Restitution(float(rs[i]))
        for k in range(300):
            res = step(u, rest)
            assert res.branch.id == tails.branches[i, k]
            u = res.next
        assert math.atan2(-u.z, u.x) == pytest.approx(tails.theta[i, -1], abs=1e-12)


def test_scan_tails_threading_is_byte_identical():
    cfg = ScanConfig(0.1, 0.3, n_r=40, init_grid=tuple(sample_directions(3, 4)), n_iter=200, tail=16)
    a = scan_tails(cfg, threads=1)
    b = scan_tails(cfg, threads=4)
    assert np.array_equal(a.branches, b.branches)
    assert np.array_equal(a.theta, b.theta)
    assert np.array_equal(a.w1, b.w1)


def test_detect_period_examples():
    tail = [1, 3, 2, 3, 1, 2] * 4
    assert detect_period(tail, 8) == (6, canonical_rotation("132312"))
    assert canonical_rotation("132312") == "121323"
    assert detect_period([2] * 30, 10) == (1, "2")
    with pytest.raises(ValueError):
        detect_period([1, 2, 3], 4)
    rng = np.random.default_rng(0)
    noise = list(rng.integers(1, 4, 60))
    noise[-1] = 1 + (noise[-2] % 3)  # ensure no period-1 tail
    assert detect_period(noise, 20) is None or detect_period(noise, 20)[0] > 1


def test_batch_periods_matches_scalar():
    rng = np.random.default_rng(4)
    rows = []
    for _ in range(40):
        p = int(rng.integers(1, 9))
        block = list(rng.integers(1, 4, p))
        row = (block * 96)[:96]
        rows.append(row)
    rows.append(list(rng.integers(1, 4, 96)))
    arr = np.array(rows, dtype=np.int8)
    got = batch_periods(arr, 32)
    for i, row in enumerate(rows):
        scalar = detect_period(row, 32)
        assert (got[i] == 0 and scalar is None) or got[i] == scalar[0]


def test_theta_cluster_count():
    assert theta_cluster_count([]) == 0
    assert theta_cluster_count([0.5] * 50) == 1
    vals = [0.1, 0.1 + 5e-7, 0.2, 0.30001]
    assert theta_cluster_count(vals, tol=1e-6) == 3


def test_thin_stripe_closed_forms():
    assert thin_stripe_r(1, 2) == pytest.approx(3 - 2 * math.sqrt(2), abs=1e-12)
    assert thin_stripe_r(1, 3) == pytest.approx(2 - math.sqrt(3), abs=1e-12)
    with pytest.raises(DomainError):
        thin_stripe_r(1, 5)  # l/m = 0.2 outside [1/4, 3/4]


def test_thin_stripe_rotation_angle_consistency():
    for m in range(2, 121):
        for l in range(1, m):
            if math.gcd(l, m) != 1 or not 0.25 <= l / m <= 0.75:
                continue
            r = thin_stripe_r(l, m)
            assert abs(cos_rotation_angle(r) - math.cos(2 * math.pi * l / m)) < 1e-12


def test_lyapunov_negative_on_attracting_orbit():
    rest = Restitution(0.3)
    cert = certify_pattern("132312", rest)
    est = lyapunov_max(cert.direction, rest, 6000)
    assert est.lambda_max < 0
    # Cesaro-rate stability: doubling n moves the estimate by < 10/n
    est2 = lyapunov_max(cert.direction, rest, 12000)
    assert abs(est2.lambda_max - est.lambda_max) < 10 / 6000


def test_lyapunov_near_zero_on_quasi_periodic_orbit():
    est = lyapunov_max(ProjectiveDirection.from_vector(1, 0.02, -0.98), Restitution(0.2), 20000)
    assert abs(est.lambda_max) < 1e-2


def test_lyapunov_seed_fallback():
    # at (1,0,-1)/sqrt(2) the reference (1,0,0) has a fine projection; force
    # the fallback with a reference parallel to u0
    u0 = ProjectiveDirection.from_vector(1, 0, -1)
    est = lyapunov_max(u0, Restitution(0.4), 100, reference=u0.vector)
    assert "fallback" in est.seed


def test_rotation_number_matches_stripe_fractions():
    # (1, 2) sits exactly at the degenerate half-turn parameter; float drift
    # pushes that orbit out of the region after a few hundred steps, which is
    # fine: the winding rate is already converged by then.
    for (l, m) in ((1, 3), (1, 2), (2, 5)):
        r = thin_stripe_r(l, m)
        est = rotation_number(ProjectiveDirection.from_vector(1, 0.01, -0.99), Restitution(r), 1500)
        if (l, m) != (1, 2):
            assert est.exit_step is None
        assert est.window >= 200
        assert abs(est.rho - l / m) < 1e-3


def test_rotation_number_invariant_on_a_curve():
    rest = Restitution(0.2)
    u = ProjectiveDirection.from_vector(1, 0.015, -0.97)
    points = [u]
    for _ in range(4):
        points.append(step(points[-1], rest).next)
    rhos = [rotation_number(p, rest, 2000).rho for p in points]
    assert max(rhos) - min(rhos) < 1e-3


def test_rotation_number_flags_region_exit():
    rest = Restitution(0.3)
    # deep in the branch-1 region: exits immediately
    est = rotation_number(ProjectiveDirection.from_vector(0.05, 1.0, -1.0), rest, 100)
    assert est.exit_step == 0 and math.isnan(est.rho)
    with pytest.raises(DomainError):
        rotation_number(ProjectiveDirection.from_vector(1, 0.01, -0.99), Restitution(0.1), 10)


def test_correlations_periodic_and_constant():
    rest = Restitution(0.3)
    cert = certify_pattern("132312", rest)
    series = correlations(
        cert.direction, rest, OBSERVABLES["theta"], OBSERVABLES["theta"], 3000, range(0, 13)
    )
    # 6-periodic orbit: correlations are 6-periodic in the lag
    assert series.values[0] == pytest.approx(series.values[6], abs=1e-10)
    assert series.values[1] == pytest.approx(series.values[7], abs=1e-10)
    # variance of a constant observable is identically zero
    const = correlations(cert.direction, rest, lambda u: 3.7, lambda u: 3.7, 500, [0, 1, 2])
    assert max(abs(v) for v in const.values) < 1e-12
    assert series.values[0] > 0  # lag-0 value of C(f, f) is a variance
    with pytest.raises(ValueError):
        correlations(cert.direction, rest, abs, abs, 10, [20])


def test_correlations_no_decay_on_quasi_periodic_orbit():
    rest = Restitution(0.2)
    u0 = ProjectiveDirection.from_vector(1, 0.02, -0.98)
    series = correlations(u0, rest, OBSERVABLES["w1"], OBSERVABLES["w1"], 2000, range(0, 201))
    var = series.values[0]
    assert max(abs(v) for v in series.values[100:201]) > 0.1 * var


def test_empirical_histogram_properties():
    rest = Restitution(0.3)
    cert = certify_pattern("132312", rest)
    hist = empirical_histogram(cert.direction, rest, 2000, bins=64)
    assert hist.mass.sum() == pytest.approx(1.0)
    assert (hist.mass > 0).sum() <= 6  # periodic orbit concentrates
    # two initial data on the same attractor agree after a burn-in; the
    # sample count is a multiple of the period so the phases cancel exactly
    u2 = step(step(cert.direction, rest).next, rest).next
    ranges = dict(w1_range=(-2, 2), w2_range=(-1, 1))
    h1 = empirical_histogram(cert.direction, rest, 9996, 32, burn_in=600, **ranges)
    h2 = empirical_histogram(u2, rest, 9996, 32, burn_in=600, **ranges)
    assert np.array_equal(h1.mass, h2.mass)


def test_orbit_tail_matches_iterate():
    rest = Restitution(0.42)
    u0 = sample_directions(77, 1)[0]
    tails = orbit_tail(u0, rest, 50, 10)
    states = iterate(u0, rest, 50)
    got = [int(b) for b in tails.branches[0]]
    want = [res.branch.id for res in states[40:]]
    assert got == want


def test_window_concordance_across_n():
    # Inside each window of (ab)^n (cb)^n the grid locks onto the word 1^n 3^n;
    # strictly between consecutive windows no short period is detected.
    from btob.windows import lower_bound, upper_bound

    for n in range(2, 9):
        low, up = float(lower_bound(n)), float(upper_bound(n))
        word = canonical_rotation("1" * n + "3" * n)
        inside = np.linspace(low + 0.02 * (up - low), up - 0.02 * (up - low), 5)
        us = np.array([u.vector for u in default_grid()])
        rs = np.repeat(inside, len(us))
        tails = batch_iterate(rs, np.tile(us, (5, 1)), 5000, 256)
        periods = batch_periods(tails.branches, 64)
        good = 0
        for i, p in enumerate(periods):
            if p == 2 * n:
                got = canonical_rotation("".join(str(c) for c in tails.branches[i, -p:]))
                good += got == word
        assert good / len(periods) >= 0.90, f"window n={n}: {good}/{len(periods)}"

        gap_hi = float(lower_bound(n))
        gap_lo = float(upper_bound(n + 1))
        band = np.linspace(gap_lo + 0.05 * (gap_hi - gap_lo), gap_hi - 0.05 * (gap_hi - gap_lo), 5)
        rs = np.repeat(band, len(us))
        tails = batch_iterate(rs, np.tile(us, (5, 1)), 5000, 256)
        periods = batch_periods(tails.branches, 64)
        frac_none = float(np.mean(periods == 0))
        assert frac_none >= 0.90, f"band below window n={n}: {frac_none:.2f}"


def test_long_pattern_near_the_regime_switch():
    # Slightly above 3 - 2*sqrt(2) the detected palindromic pattern grows long:
    # at r = 0.1717 every sampled orbit locks onto the 138-letter word
    # corresponding to exponent 67 of the second family.
    from btob.spectral import family_word
    from conftest import sample_directions as sd

    want = canonical_rotation(family_word(2, 67).letters)
    for u0 in sd(7, 3):
        tails = orbit_tail(u0, Restitution(0.1717), 5000, 2000)
        found = detect_period([int(b) for b in tails.branches[0]], 400)
        assert found is not None and found[0] == 138
        assert found[1] == want


def test_histogram_csv_schema(tmp_path):
    import io

    from btob.analysis import histogram_csv

    rest = Restitution(0.3)
    cert = certify_pattern("132312", rest)
    hist = empirical_histogram(cert.direction, rest, 600, bins=8)
    buf = io.StringIO()
    histogram_csv(hist, buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "w1_bin,w2_bin,mass"
    assert len(lines) == 1 + 64
    total = sum(float(l.split(",")[2]) for l in lines[1:])
    assert total == pytest.approx(1.0)


def test_phi_clusters_at_016_are_fourfold():
    # In the second window the tails accumulate on four phi values (two on
    # each side of pi/2), not six: the six-fold pattern belongs to window 3.
    cfg = ScanConfig(0.159, 0.161, n_r=3, n_iter=5000, tail=100)
    tails = scan_tails(cfg)
    import math as _math

    for i in range(tails.phi.shape[0]):
        clusters = theta_cluster_count(tails.phi[i], tol=1e-6)
        assert clusters == 4
        below = (tails.phi[i] < _math.pi / 2).mean()
        assert abs(below - 0.5) < 0.3  # accumulation on both sides of pi/2


def test_periodic_orbit_at_02_has_eight_visible_strip_points():
    # The 10-state cycle at r = 0.2 shows 8 points inside |w1| <= 2; the other
    # two escape far along the strip (visible only in a rescaled portrait).
    rest = Restitution(0.2)
    cert = certify_pattern(canonical_rotation("1322231222"), rest)
    assert cert.exists and cert.stable
    cur = cert.direction
    w1s = []
    for _ in range(10):
        from btob.map_core import strip_coords

        w1s.append(strip_coords(cur)[0])
        cur = step(cur, rest).next
    inside = sum(1 for w in w1s if abs(w) <= 2.0)
    assert inside == 8
    assert sum(1 for w in w1s if abs(w) > 2.0) == 2
