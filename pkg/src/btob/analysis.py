"""Orbit statistics: bifurcation scans, period detection, and dynamical diagnostics.

The scans iterate many (r, initial direction) pairs at once with a vectorized
form of the branch step (the component formulas of the three branches applied
under their selection masks, renormalized each iteration), record the tail of
each orbit, and hand the tails to period detection and clustering.  The
diagnostics follow the standard recipes for piecewise-smooth maps: finite-time
Lyapunov exponents from the derivative cocycle of the normalized map, rotation
numbers from the phase in the complex eigenplane of the branch-2 matrix, time
correlations and empirical measures along single orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .map_core import (
    DomainError,
    ProjectiveDirection,
    Restitution,
    branch_matrix,
    classify,
    phi as phi_angle,
    step,
    strip_coords,
    theta as theta_angle,
)
_BATCH_LIMIT = 20_000  # orbits per vectorized chunk; bounds memory, not results


def default_grid() -> list[ProjectiveDirection]:
    """The 8x4 grid (1, -9/(2+g), -0.1-h), g = 1..8, h = 1..4, g-major order.

    All 32 points have negative second component, so the first collision block
    is cb or cab.  The -9/(2+g) numerator is kept literally as printed in the
    source of the grid even though it reads like a typo for -(1+g); callers
    can pass any grid of their own.
    """
    return [
        ProjectiveDirection.from_vector(1.0, -9.0 / (2 + g), -0.1 - h)
        for g in range(1, 9)
        for h in range(1, 5)
    ]


@dataclass(frozen=True)
class ScanConfig:
    r_min: float
    r_max: float
    n_r: int
    init_grid: tuple[ProjectiveDirection, ...] = ()
    n_iter: int = 5000
    tail: int = 100
    observable: str = "theta"

    def __post_init__(self):
        if not 0.0 < self.r_min < self.r_max < 1.0:
            raise ValueError("need 0 < r_min < r_max < 1")
        if self.n_r < 1 or self.n_iter < 1:
            raise ValueError("n_r and n_iter must be positive")
        if self.tail > self.n_iter:
            raise ValueError("tail cannot exceed n_iter")
        if self.observable not in ("theta", "phi", "strip"):
            raise ValueError("observable must be theta, phi or strip")
        if not self.init_grid:
            object.__setattr__(self, "init_grid", tuple(default_grid()))

    @property
    def r_values(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_r)


@dataclass(frozen=True)
class BifurcationRecord:
    r: float
    init_index: int
    iter_index: int
    theta: float
    phi: float
    w1: float
    w2: float
    branch: int


@dataclass(frozen=True)
class BatchTail:
    """Tail arrays of a batch of orbits; axis 0 = orbit, axis 1 = tail iteration."""

    branches: np.ndarray  # int8
    theta: np.ndarray
    phi: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    first_iter: int  # iteration index of tail column 0


def batch_iterate(
    rs: np.ndarray, inits: np.ndarray, n_iter: int, tail: int
) -> BatchTail:
    """Iterate orbits (r_i, u_i) for n_iter steps, recording the last `tail`.

    Bitwise replica of the scalar step: identical expressions, identical
    operation order, renormalization and canonical sign each iteration (the
    map is homogeneous, so rows of `inits` may carry any positive scale).
    Each orbit is independent, so results do not depend on how a larger run
    was chunked.
    """
    rs = np.asarray(rs, dtype=float)
    n = rs.shape[0]
    u = np.array(inits, dtype=float)
    if u.shape != (n, 3):
        raise ValueError("inits must have shape (len(rs), 3)")
    alpha = (rs + 1.0) / 2.0
    r2 = rs * rs

    branches = np.empty((n, tail), dtype=np.int8)
    thetas = np.empty((n, tail))
    phis = np.empty((n, tail))
    w1s = np.empty((n, tail))
    w2s = np.empty((n, tail))

    x, y, z = u[:, 0].copy(), u[:, 1].copy(), u[:, 2].copy()

    for k in range(n_iter):
        ax = alpha * y - x
        az = alpha * y - z
        b1 = (y > 0.0) & (ax > 0.0)
        b3 = (y < 0.0) & (az < 0.0)
        branch = np.where(b1, 1, np.where(b3, 3, 2)).astype(np.int8)

        x1 = rs * ax
        y1 = alpha * ax - rs * y + rs * alpha * z
        z1 = r2 * z
        x2 = -rs * ax
        y2 = -alpha * ax - alpha * az + rs * y
        z2 = -rs * az
        x3 = r2 * x
        y3 = alpha * az - rs * y + rs * alpha * x
        z3 = rs * az

        nx = np.where(b1, x1, np.where(b3, x3, x2))
        ny = np.where(b1, y1, np.where(b3, y3, y2))
        nz = np.where(b1, z1, np.where(b3, z3, z2))
        norm = np.sqrt(nx * nx + ny * ny + nz * nz)
        nx, ny, nz = nx / norm, ny / norm, nz / norm
        flip = (nx < 0.0) | ((nx == 0.0) & ((nz > 0.0) | ((nz == 0.0) & (ny < 0.0))))
        sign = np.where(flip, -1.0, 1.0)
        x, y, z = nx * sign, ny * sign, nz * sign

        t = k - (n_iter - tail)
        if t >= 0:
            branches[:, t] = branch
            thetas[:, t] = np.arctan2(-z, x)
            rho2 = x * x + z * z
            qn = np.sqrt(x * x * y * y + rho2 * rho2 + y * y * z * z)
            with np.errstate(invalid="ignore", divide="ignore"):
                phis[:, t] = np.arccos(np.clip(-y * np.sqrt(rho2) / qn, -1.0, 1.0))
                d = x - z
                w1s[:, t] = y / d
                w2s[:, t] = (x + z) / d

    return BatchTail(branches, thetas, phis, w1s, w2s, n_iter - tail)


def orbit_tail(
    u0: ProjectiveDirection, rest: Restitution, n_iter: int, tail: int
) -> BatchTail:
    """Single-orbit convenience wrapper around batch_iterate."""
    rs = np.array([float(rest.r)])
    inits = np.array([u0.vector])
    return batch_iterate(rs, inits, n_iter, tail)


def scan_tails(cfg: ScanConfig, threads: int = 1) -> BatchTail:
    """Tails for the full (r, init) product of a scan, in (r-index, init-index) order.

    Chunked over r to bound memory; with threads > 1 the chunks run on a
    thread pool and are reassembled in submission order, so the output is
    byte-identical for any thread count.
    """
    n_init = len(cfg.init_grid)
    inits_block = np.array([u.vector for u in cfg.init_grid])
    r_values = cfg.r_values
    rows_per_chunk = max(1, _BATCH_LIMIT // n_init)
    chunks = [
        r_values[i : i + rows_per_chunk] for i in range(0, len(r_values), rows_per_chunk)
    ]

    def run(chunk: np.ndarray) -> BatchTail:
        rs = np.repeat(chunk, n_init)
        inits = np.tile(inits_block, (len(chunk), 1))
        return batch_iterate(rs, inits, cfg.n_iter, cfg.tail)

    if threads > 1 and len(chunks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    return BatchTail(
        np.concatenate([p.branches for p in parts]),
        np.concatenate([p.theta for p in parts]),
        np.concatenate([p.phi for p in parts]),
        np.concatenate([p.w1 for p in parts]),
        np.concatenate([p.w2 for p in parts]),
        cfg.n_iter - cfg.tail,
    )


def bifurcation_scan(cfg: ScanConfig, threads: int = 1) -> Iterator[BifurcationRecord]:
    """Stream of tail records ordered by (r index, init index, iteration index)."""
    tails = scan_tails(cfg, threads)
    n_init = len(cfg.init_grid)
    r_values = cfg.r_values
    for row in range(tails.branches.shape[0]):
        r = float(r_values[row // n_init])
        init_index = row % n_init
        for t in range(cfg.tail):
            yield BifurcationRecord(
                r,
                init_index,
                tails.first_iter + t,
                float(tails.theta[row, t]),
                float(tails.phi[row, t]),
                float(tails.w1[row, t]),
                float(tails.w2[row, t]),
                int(tails.branches[row, t]),
            )


# ---------------------------------------------------------------------------
# Symbolic period detection
# ---------------------------------------------------------------------------


def canonical_rotation(word: str) -> str:
    """Lexicographically least rotation; the canonical name of a periodic word."""
    return min(word[i:] + word[:i] for i in range(len(word)))


def detect_period(
    branches: Sequence[int], max_period: int
) -> Optional[tuple[int, str]]:
    """Smallest p <= max_period such that the whole tail is p-periodic.

    Requires at least 3*max_period entries so that any reported period is
    seen at least twice in full.  Returns (p, canonical word) or None when the
    tail is aperiodic at this horizon.
    """
    seq = list(branches)
    n = len(seq)
    if n < 3 * max_period:
        raise ValueError("sequence must be at least 3x the maximal period")
    for p in range(1, max_period + 1):
        if all(seq[i] == seq[i + p] for i in range(n - p)):
            word = "".join(str(c) for c in seq[-p:])
            return p, canonical_rotation(word)
    return None


def batch_periods(branch_tails: np.ndarray, max_period: int) -> np.ndarray:
    """Vector form of detect_period over rows; 0 marks an aperiodic tail."""
    n, length = branch_tails.shape
    if length < 3 * max_period:
        raise ValueError("tails must be at least 3x the maximal period")
    out = np.zeros(n, dtype=np.int32)
    undecided = np.ones(n, dtype=bool)
    for p in range(1, max_period + 1):
        if not undecided.any():
            break
        ok = np.all(branch_tails[:, : length - p] == branch_tails[:, p:], axis=1)
        newly = undecided & ok
        out[newly] = p
        undecided &= ~ok
    return out


def theta_cluster_count(values: Sequence[float], tol: float = 1e-6) -> int:
    """Number of >tol-separated clusters among tail angles (accumulation points)."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return 0
    return 1 + int(np.count_nonzero(np.diff(v) > tol))


# ---------------------------------------------------------------------------
# Thin stripes
# ---------------------------------------------------------------------------


def cos_rotation_angle(r: float) -> float:
    """cos of the rotation angle of the branch-2 matrix on its invariant plane."""
    return -((1.0 - r) ** 2) / (4.0 * r)


def thin_stripe_r(l: int, m: int) -> float:
    """Restitution making the branch-2 rotation angle equal to 2*pi*l/m.

    Defined for 1/4 <= l/m <= 3/4 (outside, the candidate expression turns
    complex); at these r the scans show thin stripes of periodic and locked
    quasi-periodic orbits.
    """
    ratio = l / m
    if not 0.25 <= ratio <= 0.75:
        raise DomainError("l/m must lie in [1/4, 3/4]")
    xi = math.cos(math.pi - 2.0 * math.pi * ratio)
    disc = xi + xi * xi
    if disc < 0:
        raise DomainError("rotation angle outside the representable range")
    return 1.0 + 2.0 * xi - 2.0 * math.sqrt(disc)


# ---------------------------------------------------------------------------
# Diagnostics along single orbits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LyapunovEstimate:
    lambda_max: float
    n_steps: int
    seed: str
    boundary_hits: int = 0


def lyapunov_max(
    u0: ProjectiveDirection,
    rest: Restitution,
    n: int,
    reference: tuple[float, float, float] = (1.0, 0.0, 0.0),
) -> LyapunovEstimate:
    """Largest finite-time Lyapunov exponent via the tangent cocycle.

    The derivative of one normalized step at u along v is
    (I - u'u'^T) P v / |P u| with u' the image direction; the exponent is the
    averaged log growth of an evolved unit tangent vector.  The seed is the
    reference vector projected onto the tangent plane at u0 (with a fallback
    when the projection degenerates).  Landing within 1e-12 of a branch
    boundary is counted, since the derivative is only defined piecewise.
    """
    if n < 1:
        raise ValueError("n must be positive")
    u = np.array(u0.vector)
    ref = np.asarray(reference, dtype=float)
    v = ref - np.dot(ref, u) * u
    seed = f"projection of {tuple(reference)}"
    if np.linalg.norm(v) < 1e-8:
        v = np.array([0.0, 1.0, 0.0]) - u[1] * u
        seed = "projection of (0.0, 1.0, 0.0) [fallback]"
    v /= np.linalg.norm(v)

    alpha = float(rest.alpha)
    acc = 0.0
    boundary_hits = 0
    cur = u0
    for _ in range(n):
        x, y, z = cur.vector
        if min(abs(y), abs(alpha * y - x), abs(alpha * y - z)) < 1e-12:
            boundary_hits += 1
        res = step(cur, rest)
        m = np.array(branch_matrix(res.branch.id, rest), dtype=float)
        w = m @ v
        nxt = np.array(res.next.vector)
        w -= np.dot(w, nxt) * nxt
        growth = np.linalg.norm(w) / res.raw_norm
        if growth == 0.0:
            return LyapunovEstimate(-math.inf, n, seed, boundary_hits)
        acc += math.log(growth)
        v = w / np.linalg.norm(w)
        cur = res.next
    return LyapunovEstimate(acc / n, n, seed, boundary_hits)


@dataclass(frozen=True)
class RotationEstimate:
    rho: float
    window: int
    exit_step: Optional[int] = None  # set when the orbit left the branch-2 region


def rotation_number(u0: ProjectiveDirection, rest: Restitution, n: int) -> RotationEstimate:
    """Winding rate of the orbit in the complex eigenplane of the branch-2 matrix.

    Valid in the regime r > 3 - 2*sqrt(2) where the matrix rotates its
    invariant plane x = z.  States are decomposed against (Re u2, Im u2) of
    the complex eigenvector; the unwrapped phase increase per step, divided
    by 2*pi, is the rotation number (mod 1).  If the orbit leaves the
    branch-2 region the estimate stops there and flags the exit step.
    """
    r = float(rest.r)
    if n < 1:
        raise ValueError("n must be positive")
    alpha = float(rest.alpha)
    sigma2 = 2.0 * r - alpha * alpha
    if sigma2 < -1e-15:
        raise DomainError("rotation number needs the complex regime r >= 3 - 2*sqrt(2)")
    # Exactly at the regime switch the invariant plane is flipped by -r*I:
    # a half turn per step.
    half_turn = sigma2 <= 0.0
    sigma = math.sqrt(max(sigma2, 0.0))

    def phase(u: ProjectiveDirection) -> float:
        # Coordinates against (Re u2, -Im u2) of the branch-2 eigenvector
        # u2 = (r, alpha - i*sigma, r); the step advances this phase by the
        # rotation angle beta with cos(beta) = (r - alpha^2)/r.
        a = (u.x + u.z) / (2.0 * r)
        b = (u.y - a * alpha) / sigma
        return math.atan2(b, a)

    total = 0.0
    cur = u0
    prev = None if half_turn else phase(cur)
    steps = 0
    exit_step = None
    for k in range(n):
        if classify(cur, rest).id != 2:
            exit_step = k
            break
        res = step(cur, rest)
        cur = res.next
        if half_turn:
            total += math.pi
        else:
            ang = phase(cur)
            total += (ang - prev) % (2.0 * math.pi)
            prev = ang
        steps += 1
    if steps == 0:
        return RotationEstimate(float("nan"), 0, exit_step)
    rho = (total / (2.0 * math.pi * steps)) % 1.0
    return RotationEstimate(rho, steps, exit_step)


OBSERVABLES: dict[str, Callable[[ProjectiveDirection], float]] = {
    "theta": theta_angle,
    "phi": phi_angle,
    "w1": lambda u: strip_coords(u)[0],
    "w2": lambda u: strip_coords(u)[1],
}


@dataclass(frozen=True)
class CorrelationSeries:
    lags: tuple[int, ...]
    values: tuple[float, ...]


def correlations(
    u0: ProjectiveDirection,
    rest: Restitution,
    f: Callable[[ProjectiveDirection], float],
    g: Callable[[ProjectiveDirection], float],
    n_samples: int,
    lags: Sequence[int],
) -> CorrelationSeries:
    """Time correlations C(f, g; lag) along one orbit of length n_samples + max lag.

    C(lag) = mean over k < n_samples of f(x_k) g(x_{k+lag}) minus the product
    of the separate means over the same k range.
    """
    lags = tuple(int(v) for v in lags)
    if not lags or min(lags) < 0:
        raise ValueError("lags must be nonnegative")
    if n_samples <= max(lags):
        raise ValueError("n_samples must exceed the largest lag")
    length = n_samples + max(lags)
    fs = np.empty(length)
    gs = np.empty(length)
    cur = u0
    for k in range(length):
        fs[k] = f(cur)
        gs[k] = g(cur)
        cur = step(cur, rest).next
    f_mean = fs[:n_samples].mean()
    g_mean = gs[:n_samples].mean()
    values = tuple(
        float(np.mean(fs[:n_samples] * gs[lag : lag + n_samples]) - f_mean * g_mean)
        for lag in lags
    )
    return CorrelationSeries(lags, values)


@dataclass(frozen=True)
class Histogram2D:
    mass: np.ndarray
    w1_edges: np.ndarray
    w2_edges: np.ndarray


def histogram_csv(hist: "Histogram2D", stream) -> None:
    """Write the mass grid as rows w1_bin,w2_bin,mass (floats at 17 digits)."""
    stream.write("w1_bin,w2_bin,mass\n")
    n1, n2 = hist.mass.shape
    for i in range(n1):
        for j in range(n2):
            stream.write(f"{i},{j},{hist.mass[i, j]:.17g}\n")


def empirical_histogram(
    u0: ProjectiveDirection,
    rest: Restitution,
    n_samples: int,
    bins: int,
    burn_in: int = 0,
    w1_range: Optional[tuple[float, float]] = None,
    w2_range: Optional[tuple[float, float]] = None,
) -> Histogram2D:
    """Empirical measure of the orbit in strip coordinates, as a mass-1 histogram.

    With burn_in > 0 the transient is discarded first (tail-only accumulation,
    useful when comparing attractors from different starting points).  Ranges
    default to the data extent so every sample lands in a bin.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    tails = orbit_tail(u0, rest, burn_in + n_samples, n_samples)
    w1, w2 = tails.w1[0], tails.w2[0]
    mass, e1, e2 = np.histogram2d(
        w1,
        w2,
        bins=bins,
        range=(
            w1_range or (float(w1.min()), float(w1.max())),
            w2_range or (float(w2.min()), float(w2.max())),
        ),
    )
    total = mass.sum()
    if total == 0:
        raise DomainError("no samples fell inside the requested ranges")
    return Histogram2D(mass / total, e1, e2)
