"""Piecewise projective linear form of the b-to-b collision map.

Four inelastic point particles on a line, colliding with a fixed restitution
coefficient r, are tracked between consecutive collisions of the central pair
(type-b collisions).  The state that matters is the plane spanned by the
relative-gap vector p and the relative-velocity vector q; identifying that
plane with its unit normal u reduces the return map to a projective action on
R^3.  On the physical quadrant {x >= 0, z <= 0} the action is piecewise
linear: one of three fixed matrices P1, P2, P3 applies, selected by the signs
of y, alpha*y - x and alpha*y - z, where alpha = (r+1)/2.  The letters 1, 2, 3
name those branches; in collision symbols they spell ab, acb/cab and cb.

Everything here is pure and works on plain floats (exact rationals are also
accepted by the matrix builders: pass a Restitution holding a Fraction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Scalar = Union[float, Fraction]
Vec3 = tuple[Scalar, Scalar, Scalar]
Mat3 = tuple[Vec3, Vec3, Vec3]


class DomainError(ValueError):
    """State outside the domain of the map (zero vector, wrong quadrant, ...)."""


@dataclass(frozen=True)
class Restitution:
    """Restitution coefficient r in (0, 1); alpha = (r+1)/2 is always derived."""

    r: Scalar

    def __post_init__(self):
        if not 0 < self.r < 1:
            raise DomainError(f"restitution coefficient must lie in (0,1), got {self.r}")

    @property
    def alpha(self) -> Scalar:
        # Fraction input stays exact: Fraction/int division is exact.
        return (self.r + 1) / 2


def _canonical_triple(x: float, y: float, z: float) -> tuple[float, float, float]:
    # Sign convention for the projective line through (x,y,z): x >= 0, then
    # z <= 0 when x = 0, then y > 0 when x = z = 0.
    if x < 0 or (x == 0 and (z > 0 or (z == 0 and y < 0))):
        return (-x, -y, -z)
    return (x, y, z)


@dataclass(frozen=True)
class ProjectiveDirection:
    """Canonical unit representative of a line in R^3 (normal to Span[p, q])."""

    x: float
    y: float
    z: float

    @classmethod
    def from_vector(cls, x: float, y: float, z: float) -> "ProjectiveDirection":
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0 or not math.isfinite(n):
            raise DomainError("direction must be a nonzero finite vector")
        return cls(*_canonical_triple(x / n, y / n, z / n))

    @property
    def vector(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)


@dataclass(frozen=True)
class Branch:
    """Branch label in {1,2,3} with its collision-symbol expansion.

    1 -> ab, 3 -> cb; 2 expands to acb when entered with y > 0 and cab when
    entered with y < 0 (the two spellings apply the same matrix, since the
    outer collision matrices commute).
    """

    id: int
    symbols: tuple[str, ...]


@dataclass(frozen=True)
class StepResult:
    next: ProjectiveDirection
    branch: Branch
    raw_norm: float


def collision_matrix(symbol: str, rest: Restitution) -> Mat3:
    """Velocity update of a single binary collision (a: pair 1-2, b: 2-3, c: 3-4)."""
    r, a = rest.r, rest.alpha
    if symbol == "a":
        return ((-r, 0, 0), (a, 1, 0), (0, 0, 1))
    if symbol == "b":
        return ((1, a, 0), (0, -r, 0), (0, a, 1))
    if symbol == "c":
        return ((1, 0, 0), (0, 1, a), (0, 0, -r))
    raise ValueError(f"unknown collision symbol {symbol!r}")


def branch_matrix(i: int, rest: Restitution) -> Mat3:
    """Matrix P_i applied by branch i of the map (the y < 0 companion of P2 equals P2)."""
    r, a = rest.r, rest.alpha
    if i == 1:
        return ((-r, r * a, 0), (-a, a * a - r, r * a), (0, 0, r * r))
    if i == 2:
        return ((r, -r * a, 0), (a, -2 * a * a + r, a), (0, -r * a, r))
    if i == 3:
        return ((r * r, 0, 0), (r * a, a * a - r, -a), (0, r * a, -r))
    raise ValueError(f"branch id must be 1, 2 or 3, got {i}")


def branch_image(i: int, rest: Restitution, v: Vec3) -> Vec3:
    """Component formulas of the three branches; must agree with branch_matrix.

    The operation order is shared verbatim with the vectorized scan engine so
    that scalar and batched orbits agree bit for bit.
    """
    r, a = rest.r, rest.alpha
    x, y, z = v
    ax = a * y - x
    az = a * y - z
    if i == 1:
        return (r * ax, a * ax - r * y + r * a * z, r * r * z)
    if i == 2:
        return (-r * ax, -a * ax - a * az + r * y, -r * az)
    if i == 3:
        return (r * r * x, a * az - r * y + r * a * x, r * az)
    raise ValueError(f"branch id must be 1, 2 or 3, got {i}")


# J conjugation swaps the roles of the outer particle pairs: x <-> z, y -> -y.
J: Mat3 = ((0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (1.0, 0.0, 0.0))


def mat_vec(m: Mat3, v: Vec3) -> Vec3:
    return tuple(m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2] for i in range(3))


def mat_mul(m: Mat3, n: Mat3) -> Mat3:
    return tuple(
        tuple(sum(m[i][k] * n[k][j] for k in range(3)) for j in range(3)) for i in range(3)
    )


def mat_det(m: Mat3) -> Scalar:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def mat_trace(m: Mat3) -> Scalar:
    return m[0][0] + m[1][1] + m[2][2]


def classify(u: ProjectiveDirection, rest: Restitution) -> Branch:
    """Branch taken from u: 1 if y>0 and alpha*y-x>0, 3 if y<0 and alpha*y-z<0, else 2.

    The boundary sets y = 0, alpha*y = x and alpha*y = z all fall to branch 2,
    which is the continuous choice on y = 0 and the conventional one on the
    other two (comparisons are strict, no epsilon band).
    """
    x, y, z = u.x, u.y, u.z
    if x == 0.0 and y == 0.0 and z == 0.0:
        raise DomainError("zero vector has no branch")
    if x * z > 0.0:
        raise DomainError(f"state ({x}, {y}, {z}) violates the quadrant condition x*z <= 0")
    a = rest.alpha
    if y > 0.0 and a * y - x > 0.0:
        return Branch(1, ("a", "b"))
    if y < 0.0 and a * y - z < 0.0:
        return Branch(3, ("c", "b"))
    return Branch(2, ("a", "c", "b") if y >= 0.0 else ("c", "a", "b"))


def step(u: ProjectiveDirection, rest: Restitution) -> StepResult:
    """One b-to-b step: classify, apply the branch map, renormalize, canonicalize."""
    branch = classify(u, rest)
    w = branch_image(branch.id, rest, u.vector)
    raw_norm = math.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    if raw_norm == 0.0:
        raise DomainError("map image collapsed to zero (invalid state)")
    nxt = ProjectiveDirection(*_canonical_triple(w[0] / raw_norm, w[1] / raw_norm, w[2] / raw_norm))
    return StepResult(nxt, branch, raw_norm)


def iterate(u0: ProjectiveDirection, rest: Restitution, n: int) -> list[StepResult]:
    """n consecutive steps starting from u0 (empty list for n = 0)."""
    if n < 0:
        raise ValueError("iteration count must be nonnegative")
    out = []
    u = u0
    for _ in range(n):
        res = step(u, rest)
        out.append(res)
        u = res.next
    return out


def theta(u: ProjectiveDirection) -> float:
    """Position angle: tan(theta) = -z/x, in [0, pi/2] on the canonical quadrant."""
    if u.x == 0.0 and u.z == 0.0:
        raise DomainError("theta is undefined on the line x = z = 0")
    return math.atan2(-u.z, u.x)


def phi(u: ProjectiveDirection) -> float:
    """Velocity angle in [0, pi]: cos(phi) = -y*sqrt(x^2+z^2)/|q|, q = (-xy, x^2+z^2, -yz).

    phi < pi/2 exactly when the next collision block starts with symbol c
    (equivalently y < 0).
    """
    x, y, z = u.x, u.y, u.z
    rho2 = x * x + z * z
    if rho2 == 0.0:
        raise DomainError("phi is undefined on the line x = z = 0")
    qn = math.sqrt(x * x * y * y + rho2 * rho2 + y * y * z * z)
    c = -y * math.sqrt(rho2) / qn
    return math.acos(max(-1.0, min(1.0, c)))


def strip_coords(u: ProjectiveDirection) -> tuple[float, float]:
    """Chart on the plane x - z = 1: (w1, w2) = (y, x + z)/(x - z), w2 in [-1, 1].

    The branch boundaries are the lines w2 = 2*alpha*w1 -/+ 1: below the first
    the step is branch 1, above the second branch 3, branch 2 between them.
    """
    d = u.x - u.z
    if d == 0.0:
        raise DomainError("strip coordinates are undefined when x = z")
    return (u.y / d, (u.x + u.z) / d)


def mirror_direction(u: ProjectiveDirection) -> ProjectiveDirection:
    """Conjugation by J on representatives: (x,y,z) -> (-z,-y,-x).

    Swaps branches 1 and 3, fixes branch 2, and commutes with the step map.
    """
    return ProjectiveDirection.from_vector(-u.z, -u.y, -u.x)
