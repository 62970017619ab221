"""Three independent reference engines used to cross-validate the linear map.

* an event-driven simulation of the four-particle system itself, in the
  relative variables (gaps p, relative velocities q);
* the cross-product formulation: one b-to-b application computed with wedge
  products and the raw collision matrices A, B, C acting on velocity vectors;
* the trigonometric formulation: collision-to-collision updates written in
  the angles (theta, phi) that parametrize position and velocity on the
  sphere, known to degrade numerically near theta in {0, pi/2}.

All engines produce collision-symbol streams over {a, b, c}; agreement of
those streams (with simultaneous a/c contacts flattened as "a then c") is the
strongest end-to-end check the package has.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .map_core import (
    Branch,
    DomainError,
    ProjectiveDirection,
    Restitution,
    collision_matrix,
    phi,
    step,
    theta,
)


class TripleCollisionError(DomainError):
    """Three or more particles in simultaneous contact: dynamics undefined."""


_SYMBOLS = ("a", "b", "c")

# Simultaneity tolerance for candidate collision times (relative).
_SIMUL_RTOL = 1e-12


@dataclass(frozen=True)
class ParticleState:
    """Relative gaps p (nonnegative) and relative velocities q of the chain."""

    p: tuple[float, float, float]
    q: tuple[float, float, float]


@dataclass(frozen=True)
class CollisionEvent:
    time: float
    symbols: frozenset[str]


def initial_condition(u: ProjectiveDirection) -> ParticleState:
    """Post-b particle state whose plane Span[p, q] has normal u.

    p = (-z, 0, x) and q = (-x*y, x^2 + z^2, -y*z), both normalized; requires
    the canonical quadrant so that the gaps are nonnegative.
    """
    x, y, z = u.x, u.y, u.z
    if x < 0 or z > 0:
        raise DomainError("direction must lie in the canonical quadrant x >= 0, z <= 0")
    p = np.array([-z, 0.0, x])
    q = np.array([-x * y, x * x + z * z, -y * z])
    p /= np.linalg.norm(p)
    q /= np.linalg.norm(q)
    return ParticleState(tuple(p), tuple(q))


def particle_next_event(
    state: ParticleState, rest: Restitution
) -> Optional[tuple[CollisionEvent, ParticleState]]:
    """Advance the free flight to the next collision and apply the impact law.

    Times solve p_i + t*q_i = 0 for the closing gaps; the earliest one wins.
    A simultaneous pair {a, c} is legal (the matrices commute); any adjacent
    simultaneity is a triple contact and raises.  Returns None when every gap
    is opening (no further collision, particles separate forever).  Both p
    and q are rescaled to unit norm afterwards, which does not affect the
    order of later collisions.
    """
    p, q = state.p, state.q
    times = [(-p[i] / q[i], i) for i in range(3) if q[i] < 0.0]
    if not times:
        return None
    t_star = min(t for t, _ in times)
    hits = sorted(i for t, i in times if t <= t_star + _SIMUL_RTOL * max(t_star, 1e-300))
    if len(hits) >= 2 and any(b - a == 1 for a, b in zip(hits, hits[1:])):
        raise TripleCollisionError(f"adjacent pairs {hits} collide simultaneously")
    symbols = frozenset(_SYMBOLS[i] for i in hits)

    new_p = [p[i] + t_star * q[i] for i in range(3)]
    for i in hits:
        new_p[i] = 0.0
    qv = np.array(q)
    for i in hits:  # commuting matrices for the {a, c} pair, single one otherwise
        k = np.array(collision_matrix(_SYMBOLS[i], rest), dtype=float)
        qv = k @ qv
    pa = np.array(new_p)
    pn = np.linalg.norm(pa)
    qn = np.linalg.norm(qv)
    if pn == 0.0 or qn == 0.0:
        raise TripleCollisionError("degenerate configuration after collision")
    nxt = ParticleState(tuple(pa / pn), tuple(qv / qn))
    return CollisionEvent(t_star, symbols), nxt


def particle_events(state: ParticleState, rest: Restitution):
    """Generator of (event, state) pairs for a given restitution coefficient."""
    while True:
        out = particle_next_event(state, rest)
        if out is None:
            return
        event, state = out
        yield event, state


def particle_symbol_run(
    p0: Sequence[float], q0: Sequence[float], rest: Restitution, n: int
) -> tuple[list[str], bool]:
    """First n collision symbols of the particle system from a post-b state.

    Simultaneous {a, c} events are flattened as "a" then "c".  Returns the
    symbols plus a flag telling whether the system separated before reaching
    n collisions.
    """
    p0 = tuple(float(v) for v in p0)
    q0 = tuple(float(v) for v in q0)
    if abs(p0[1]) > 1e-12 * max(p0) or q0[1] <= 0.0:
        raise DomainError("initial state must be post-b: p2 = 0 and q2 > 0")
    state = ParticleState((p0[0], 0.0, p0[2]), q0)
    symbols: list[str] = []
    for event, state in particle_events(state, rest):
        if event.symbols == frozenset(("a", "c")):
            symbols.extend(("a", "c"))
        else:
            symbols.append(next(iter(event.symbols)))
        if len(symbols) >= n:
            return symbols[:n], False
    return symbols, True


# ---------------------------------------------------------------------------
# Cross-product formulation
# ---------------------------------------------------------------------------

_E = {name: np.eye(3)[i] for i, name in enumerate(_SYMBOLS)}  # e_a = e_x etc.
_NEXT_IF_POS = {"a": "b", "b": "c", "c": "a"}
_NEXT_IF_NEG = {"a": "c", "b": "a", "c": "b"}


def defn23_step(u: Sequence[float], rest: Restitution) -> tuple[np.ndarray, Branch]:
    """One b-to-b application computed with the wedge-product algorithm.

    Starting from a post-b normal vector u, decide each intermediate contact
    from the sign of (p ^ u) . v with p = u ^ e_contact and v the projection
    of u off the contact axis, apply the matching collision matrix to q, and
    rebuild the normal as q' ^ p'; stop at the first b contact.  A vanishing
    decision product means a branch-boundary state; there the geometric
    reconstruction degenerates (at the fixed direction (1, 0, -1) the
    intermediate p' and q' become parallel, leaving no plane), so a domain
    error is raised.  The boundary behaviour is recovered as a limit.
    """
    u = np.asarray(u, dtype=float)
    if u[0] < 0.0:
        u = -u
    contact = "b"
    emitted: list[str] = []
    axes = {"a": _E["a"], "b": _E["b"], "c": _E["c"]}
    mats = {
        "a": np.array(collision_matrix("a", rest), dtype=float),
        "b": np.array(collision_matrix("b", rest), dtype=float),
        "c": np.array(collision_matrix("c", rest), dtype=float),
    }
    for _ in range(3):
        e = axes[contact]
        p = np.cross(u, e)
        q = np.cross(p, u)
        v = u - np.dot(u, e) * e
        s = np.dot(q, v)
        if s == 0.0:
            raise DomainError(
                "contact decision is degenerate (branch-boundary state); "
                "the wedge construction has no plane here"
            )
        nxt = _NEXT_IF_POS[contact] if s > 0.0 else _NEXT_IF_NEG[contact]
        p_new = np.cross(axes[nxt], u)
        q_new = mats[nxt] @ q
        u = np.cross(q_new, p_new)
        u /= np.linalg.norm(u)
        contact = nxt
        emitted.append(contact)
        if contact == "b":
            branch = _branch_from_symbols(tuple(emitted))
            return u, branch
    raise RuntimeError("wedge-product algorithm failed to reach a b contact in 3 collisions")


def _branch_from_symbols(symbols: tuple[str, ...]) -> Branch:
    if symbols == ("a", "b"):
        return Branch(1, symbols)
    if symbols == ("c", "b"):
        return Branch(3, symbols)
    if symbols in (("a", "c", "b"), ("c", "a", "b")):
        return Branch(2, symbols)
    raise RuntimeError(f"impossible collision block {symbols}")


def defn23_symbol_run(u0: ProjectiveDirection, rest: Restitution, n: int) -> list[str]:
    u = np.array(u0.vector)
    symbols: list[str] = []
    while len(symbols) < n:
        u, branch = defn23_step(u, rest)
        symbols.extend(branch.symbols)
    return symbols[:n]


# ---------------------------------------------------------------------------
# Trigonometric formulation
# ---------------------------------------------------------------------------

_DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class SphericalState:
    """Unit position X, unit velocity V orthogonal to X, and the last contact."""

    X: tuple[float, float, float]
    V: tuple[float, float, float]
    contact: str
    degenerate: bool = False
    theta: float = float("nan")
    phi: float = float("nan")


def spherical_from_angles(theta0: float, phi0: float) -> SphericalState:
    """Post-b state parametrized by theta in (0, pi/2) and phi in (0, pi)."""
    X = (math.sin(theta0), 0.0, math.cos(theta0))
    V = (
        math.cos(phi0) * math.cos(theta0),
        math.sin(phi0),
        -math.cos(phi0) * math.sin(theta0),
    )
    return SphericalState(X, V, "b", theta=theta0, phi=phi0)


def spherical_from_direction(u: ProjectiveDirection) -> SphericalState:
    return spherical_from_angles(theta(u), phi(u))


# Per contact: which X/V components carry theta and cos(phi), and the two
# (new X builder, collision symbol) outcomes for phi < pi/2 and phi > pi/2.
_TRIG_TABLE = {
    "a": (
        1,
        2,
        lambda th, ph: (math.cos(th) * math.sin(ph), 0.0, math.cos(ph)),
        "b",
        lambda th, ph: (math.sin(th) * math.sin(ph), -math.cos(ph), 0.0),
        "c",
    ),
    "b": (
        2,
        0,
        lambda th, ph: (math.cos(ph), math.cos(th) * math.sin(ph), 0.0),
        "c",
        lambda th, ph: (0.0, math.sin(th) * math.sin(ph), -math.cos(ph)),
        "a",
    ),
    "c": (
        0,
        1,
        lambda th, ph: (0.0, math.cos(ph), math.cos(th) * math.sin(ph)),
        "a",
        lambda th, ph: (-math.cos(ph), 0.0, math.sin(th) * math.sin(ph)),
        "b",
    ),
}


def trig_step(state: SphericalState, rest: Restitution) -> SphericalState:
    """One collision-to-collision update in the angle representation.

    Extracts theta and phi with arccos, branches on phi vs pi/2, applies the
    collision matrix and re-projects V onto the tangent plane of the new X.
    The degenerate flag is set (and propagated) when an arccos argument gets
    within 1e-12 of +-1, after which the output is numerically meaningless.
    """
    ix, iv, x_lo, sym_lo, x_hi, sym_hi = _TRIG_TABLE[state.contact]
    c_th = state.X[ix]
    degenerate = state.degenerate or abs(c_th) >= 1.0 - _DEGENERACY_TOL
    th = math.acos(max(-1.0, min(1.0, c_th)))
    cos_th = math.cos(th)
    if cos_th == 0.0:
        c_ph = math.inf
    else:
        c_ph = state.V[iv] / cos_th
    degenerate = degenerate or abs(c_ph) >= 1.0 - _DEGENERACY_TOL
    ph = math.acos(max(-1.0, min(1.0, c_ph)))
    if ph < math.pi / 2:
        X_new, symbol = x_lo(th, ph), sym_lo
    else:
        X_new, symbol = x_hi(th, ph), sym_hi
    X = np.array(X_new)
    X /= np.linalg.norm(X)
    K = np.array(collision_matrix(symbol, rest), dtype=float)
    V = K @ np.array(state.V)
    V -= np.dot(V, X) * X
    V /= np.linalg.norm(V)
    return SphericalState(tuple(X), tuple(V), symbol, degenerate, th, ph)


def trig_symbol_run(
    state: SphericalState, rest: Restitution, n: int
) -> tuple[list[str], bool]:
    """First n collision symbols from the angle engine, stopping on degeneracy.

    Returns the symbols produced before the degeneracy flag tripped and the
    flag itself (True means the run is unreliable past its end).
    """
    symbols: list[str] = []
    while len(symbols) < n:
        state = trig_step(state, rest)
        if state.degenerate:
            return symbols, True
        symbols.append(state.contact)
    return symbols[:n], False


def b_state_angles(state: SphericalState) -> tuple[float, float]:
    """(theta, phi) of a post-b state, via the same arccos reads the engine uses."""
    if state.contact != "b":
        raise ValueError("state must be a post-b configuration")
    th = math.acos(max(-1.0, min(1.0, state.X[2])))
    c = math.cos(th)
    c_ph = state.V[0] / c if c != 0.0 else math.inf
    return th, math.acos(max(-1.0, min(1.0, c_ph)))


def trig_b_states(state: SphericalState, rest: Restitution, n_b: int):
    """Yield the engine states at each of the next n_b b-contacts."""
    count = 0
    while count < n_b:
        state = trig_step(state, rest)
        if state.degenerate:
            return
        if state.contact == "b":
            count += 1
            yield state


# ---------------------------------------------------------------------------
# Cross-engine validation
# ---------------------------------------------------------------------------


def map_symbol_run(u0: ProjectiveDirection, rest: Restitution, n: int) -> list[str]:
    symbols: list[str] = []
    u = u0
    while len(symbols) < n:
        res = step(u, rest)
        symbols.extend(res.branch.symbols)
        u = res.next
    return symbols[:n]


@dataclass(frozen=True)
class EngineComparison:
    init_index: int
    first_divergence: Optional[int]  # None: no disagreement on the compared prefix
    trig_included: bool
    particle_symbols: int = 0  # physical lifetime; the particle system may separate


@dataclass(frozen=True)
class ValidationReport:
    r: float
    n_symbols: int
    comparisons: tuple[EngineComparison, ...]
    engine_seconds: dict = field(default_factory=dict)

    @property
    def mismatches(self) -> list[tuple[int, int]]:
        return [
            (c.init_index, c.first_divergence)
            for c in self.comparisons
            if c.first_divergence is not None
        ]

    @property
    def all_agree(self) -> bool:
        return not self.mismatches


def _first_divergence(streams: list[list[str]]) -> Optional[int]:
    length = min(len(s) for s in streams)
    for k in range(length):
        tokens = {s[k] for s in streams}
        if len(tokens) > 1:
            return k
    return None


def triple_engine_validate(
    rest: Restitution,
    inits: Sequence[ProjectiveDirection],
    n_symbols: int,
    include_trig: bool = True,
) -> ValidationReport:
    """Run all engines from matched initial data and report symbol divergences.

    The map, wedge-product and angle engines always produce n_symbols; the
    particle stream ends at physical separation (the projective map is total,
    the particle system is not), so each comparison runs over the shortest
    stream present.  A degenerate angle-engine run is excluded outright (its
    symbols drift before the flag trips).  Disagreement is data, not an
    error: the report carries the first bad position for each initial datum.
    """
    if n_symbols < 1:
        raise ValueError("n_symbols must be positive")
    seconds = {"map": 0.0, "defn23": 0.0, "particle": 0.0, "trig": 0.0}
    comparisons = []
    for idx, u0 in enumerate(inits):
        t0 = time.perf_counter()
        s_map = map_symbol_run(u0, rest, n_symbols)
        seconds["map"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        s_defn = defn23_symbol_run(u0, rest, n_symbols)
        seconds["defn23"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        state0 = initial_condition(u0)
        s_part, _ = particle_symbol_run(state0.p, state0.q, rest, n_symbols)
        seconds["particle"] += time.perf_counter() - t0

        streams = [s_map, s_defn, s_part]
        trig_included = False
        if include_trig:
            t0 = time.perf_counter()
            s_trig, degenerate = trig_symbol_run(spherical_from_direction(u0), rest, n_symbols)
            seconds["trig"] += time.perf_counter() - t0
            # Near-degenerate angle extraction drifts before the flag trips,
            # so a flagged run is excluded from the comparison outright.
            if not degenerate:
                trig_included = True
                streams.append(s_trig)
        comparisons.append(
            EngineComparison(idx, _first_divergence(streams), trig_included, len(s_part))
        )
    return ValidationReport(float(rest.r), n_symbols, tuple(comparisons), seconds)
