"""Eigen-analysis of the branch matrices and certification of periodic words.

The three branch matrices have fully explicit spectra.  P1 keeps the plane
z = 0 invariant with eigenvalue r^2 transverse to it; its in-plane pair is
real exactly while r <= 7 - 4*sqrt(3) and complex of modulus r above.  P2
fixes the direction (1, 0, -1) with eigenvalue r and rotates the orthogonal
plane x = z; its pair is real for r <= 3 - 2*sqrt(2) and complex of modulus r
above, which is the mechanism behind the quasi-periodic regimes.  P3 is the
J-conjugate of P1.

A periodic branch word w is realized by the map iff some eigenvector of the
word's matrix product satisfies, step by step, the strict inequalities that
select each letter; it is realized stably iff that eigenvector belongs to the
strictly dominant eigenvalue.  For palindromic words (w = h followed by the
1<->3 mirror of h) the product is the square of J times the half product, and
the certification runs on that reduced matrix.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
import mpmath

from .map_core import (
    DomainError,
    Mat3,
    ProjectiveDirection,
    Restitution,
    branch_matrix,
    mat_mul,
)

# Regime-switch restitution coefficients: discriminants of the quadratic
# factors of the characteristic polynomials change sign exactly here.
P1_REGIME_SWITCH = 7 - 4 * math.sqrt(3.0)
P2_REGIME_SWITCH = 3 - 2 * math.sqrt(2.0)

_DOMINANCE_RTOL = 1e-12

J_INT: Mat3 = ((0, 0, 1), (0, 1, 0), (1, 0, 0))


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: tuple[complex, complex, complex]
    eigenvectors: tuple[tuple[complex, ...], ...]
    dominant_index: Optional[int]


@dataclass(frozen=True)
class Cubic:
    """Monic cubic x^3 + c2*x^2 + c1*x + c0; coefficients float or Fraction."""

    c2: Union[float, Fraction]
    c1: Union[float, Fraction]
    c0: Union[float, Fraction]

    def __call__(self, x):
        return ((x + self.c2) * x + self.c1) * x + self.c0

    def derivative(self, x):
        return (3 * x + 2 * self.c2) * x + self.c1


def _dominant_index(eigenvalues: Sequence[complex]) -> Optional[int]:
    mods = [abs(v) for v in eigenvalues]
    order = sorted(range(3), key=lambda i: -mods[i])
    top, second = mods[order[0]], mods[order[1]]
    if top == 0.0 or (top - second) < _DOMINANCE_RTOL * top:
        return None
    return order[0]


def eigen_P1(rest: Restitution) -> EigenSystem:
    """Closed-form eigen-system of P1: r^2 on (alpha, r+1, 3*alpha), pair on z = 0."""
    r = float(rest.r)
    a = (r + 1) / 2
    disc = a * a - 4 * r  # = (r^2 - 14r + 1)/4, sign flips at 7 - 4*sqrt(3)
    s = cmath.sqrt(complex(disc))
    lam2 = (a * (a - s) - 2 * r) / 2  # (r^2-6r+1 -/+ (r+1)sqrt(r^2-14r+1))/8
    lam3 = (a * (a + s) - 2 * r) / 2
    v1 = (a, r + 1.0, 3 * a)
    v2 = (2 * r, a - s, 0.0)
    v3 = (2 * r, a + s, 0.0)
    vals = (complex(r * r), lam2, lam3)
    return EigenSystem(vals, (v1, v2, v3), _dominant_index(vals))


def eigen_P2(rest: Restitution) -> EigenSystem:
    """Closed-form eigen-system of P2: r on (1, 0, -1), pair on the plane x = z."""
    r = float(rest.r)
    a = (r + 1) / 2
    disc = a * a - 2 * r  # = (r^2 - 6r + 1)/4, sign flips at 3 - 2*sqrt(2)
    s = cmath.sqrt(complex(disc))
    lam2 = r - a * a + a * s
    lam3 = r - a * a - a * s
    v1 = (1.0, 0.0, -1.0)
    v2 = (r, a - s, r)
    v3 = (r, a + s, r)
    vals = (complex(r), lam2, lam3)
    return EigenSystem(vals, (v1, v2, v3), _dominant_index(vals))


def eigen_P3(rest: Restitution) -> EigenSystem:
    """P3 = J P1 J, so the spectrum is P1's and eigenvectors are J-transformed."""
    base = eigen_P1(rest)
    vecs = tuple((v[2], v[1], v[0]) for v in base.eigenvectors)
    return EigenSystem(base.eigenvalues, vecs, base.dominant_index)


def char_poly(m: Mat3) -> Cubic:
    """Characteristic polynomial det(x*I - M) via trace, 2-minor sum, determinant."""
    tr = m[0][0] + m[1][1] + m[2][2]
    minors = (
        m[1][1] * m[2][2]
        - m[1][2] * m[2][1]
        + m[0][0] * m[2][2]
        - m[0][2] * m[2][0]
        + m[0][0] * m[1][1]
        - m[0][1] * m[1][0]
    )
    det = (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )
    return Cubic(-tr, minors, -det)


def solve_cubic(cubic: Cubic) -> tuple[complex, complex, complex]:
    """Roots of a monic real cubic: closed form plus one Newton polish each.

    Depressed-cubic discriminant decides between one real root plus a complex
    pair (Cardano) and three real roots (trigonometric form); the fixed 3x3
    size makes a general eigensolver unnecessary.
    """
    c2, c1, c0 = float(cubic.c2), float(cubic.c1), float(cubic.c0)
    shift = -c2 / 3.0
    p = c1 - c2 * c2 / 3.0
    q = c0 + c2 * (2.0 * c2 * c2 - 9.0 * c1) / 27.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc >= 0.0 or p >= 0.0:
        # One real root (or borderline): Cardano with stable cube-root choice.
        sq = cmath.sqrt(complex(disc))
        for cand in (-q / 2.0 + sq, -q / 2.0 - sq):
            if abs(cand) > 0.0:
                w = cand ** (1.0 / 3.0)
                break
        else:
            w = 0.0 + 0.0j
        if w == 0:
            roots = [complex(shift)] * 3
        else:
            omega = complex(-0.5, math.sqrt(3.0) / 2.0)
            roots = [w * omega**k - p / (3.0 * w * omega**k) + shift for k in range(3)]
    else:
        # Three real roots: p < 0 here, use the trigonometric parametrization.
        rho = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * rho)))
        ang = math.acos(arg) / 3.0
        roots = [
            complex(rho * math.cos(ang - 2.0 * math.pi * k / 3.0) + shift) for k in range(3)
        ]
    polished = []
    for z in roots:
        fz = cubic(z)
        dz = cubic.derivative(z)
        if dz != 0:
            z = z - fz / dz
        if abs(z.imag) < 1e-12 * max(1.0, abs(z.real)):
            z = complex(z.real)
        polished.append(z)
    return tuple(polished)


def eigenvector_for(m: Mat3, lam: complex) -> tuple[complex, complex, complex]:
    """Null direction of (M - lam*I) from the largest cross product of its rows."""
    a = np.array(m, dtype=complex) - lam * np.eye(3)
    candidates = [
        np.cross(a[0], a[1]),
        np.cross(a[0], a[2]),
        np.cross(a[1], a[2]),
    ]
    v = max(candidates, key=lambda w: float(np.abs(w) @ np.abs(w)))
    n = np.linalg.norm(v)
    if n == 0.0:
        raise DomainError("eigenvector is not determined (repeated eigenvalue)")
    return tuple(v / n)


def numeric_eigensystem(m: Mat3) -> EigenSystem:
    """Eigen-system of an arbitrary real 3x3 matrix via the cubic solver."""
    vals = solve_cubic(char_poly(tuple(tuple(float(x) for x in row) for row in m)))
    vecs = tuple(eigenvector_for(m, lam) for lam in vals)
    return EigenSystem(vals, vecs, _dominant_index(vals))


# ---------------------------------------------------------------------------
# Pattern words
# ---------------------------------------------------------------------------

_MIRROR = str.maketrans("13", "31")


def mirror_word(letters: str) -> str:
    """Swap letters 1 and 3 (branch roles under J conjugation); 2 is fixed."""
    return letters.translate(_MIRROR)


@dataclass(frozen=True)
class PatternWord:
    """Word over {1,2,3}; palindromic_half h is set when letters == h + mirror(h)."""

    letters: str
    palindromic_half: Optional[str] = None

    def __post_init__(self):
        if not self.letters or set(self.letters) - set("123"):
            raise ValueError(f"pattern word must be nonempty over {{1,2,3}}: {self.letters!r}")
        if self.palindromic_half is None:
            n = len(self.letters)
            if n % 2 == 0:
                half = self.letters[: n // 2]
                if self.letters == half + mirror_word(half):
                    object.__setattr__(self, "palindromic_half", half)
        else:
            h = self.palindromic_half
            if self.letters != h + mirror_word(h):
                raise ValueError("palindromic_half does not reconstruct the word")

    def __len__(self) -> int:
        return len(self.letters)


def word_matrix(word: Union[str, PatternWord], rest: Restitution) -> Mat3:
    """Product of branch matrices in reverse temporal order (last letter leftmost)."""
    letters = word.letters if isinstance(word, PatternWord) else word
    out = None
    for ch in letters:
        m = branch_matrix(int(ch), rest)
        out = m if out is None else mat_mul(m, out)
    if out is None:
        raise ValueError("word must be nonempty")
    return out


def reduced_matrix(half: Union[str, PatternWord], rest: Restitution) -> Mat3:
    """J times the half-word product; its square is the full palindromic product."""
    return mat_mul(J_INT, word_matrix(half, rest))


def family_word(family: int, n: int) -> PatternWord:
    """The three empirically found families: 132^n; (132^n)(312^n); (13131 2^n)(31313 2^n)."""
    if n < 1:
        raise ValueError("family exponent must be >= 1")
    if family == 1:
        return PatternWord("13" + "2" * n)
    if family == 2:
        half = "13" + "2" * n
    elif family == 3:
        half = "13131" + "2" * n
    else:
        raise ValueError("family must be 1, 2 or 3")
    return PatternWord(half + mirror_word(half), palindromic_half=half)


# ---------------------------------------------------------------------------
# Feasibility and certification
# ---------------------------------------------------------------------------


def _letter_failure(letter: str, a: float, v: Sequence[float]) -> Optional[str]:
    """Name of the first violated strict inequality for this letter, or None."""
    x, y, z = v
    if not x > 0.0:
        return "x > 0"
    if not z < 0.0:
        return "z < 0"
    ax, az = a * y - x, a * y - z
    if letter == "1":
        return None if ax > 0.0 else "alpha*y - x > 0"
    if letter == "3":
        return None if az < 0.0 else "alpha*y - z < 0"
    # Branch 2 region, sign-agnostic in y: alpha*y < x and alpha*y > z.
    if not ax < 0.0:
        return "alpha*y - x < 0"
    if not az > 0.0:
        return "alpha*y - z > 0"
    return None


def feasibility_check(
    word: Union[str, PatternWord], u: Sequence[float], rest: Restitution
) -> Optional[tuple[int, str]]:
    """Walk the word from u; return None if every letter's region is hit strictly.

    The walk applies the raw branch matrices without sign flips (a feasible
    walk stays strictly inside the quadrant, so none are needed) and
    renormalizes for numerical range only.  On failure returns (step index,
    violated inequality).
    """
    letters = word.letters if isinstance(word, PatternWord) else word
    a = float(rest.alpha)
    v = np.asarray(u, dtype=float)
    v = v / np.linalg.norm(v)
    for k, ch in enumerate(letters):
        fail = _letter_failure(ch, a, v)
        if fail is not None:
            return (k, fail)
        m = np.array(branch_matrix(int(ch), rest), dtype=float)
        v = m @ v
        v /= np.linalg.norm(v)
    return None


@dataclass(frozen=True)
class PeriodicOrbitCertificate:
    word: PatternWord
    r: float
    exists: bool
    stable: Optional[bool]  # None: dominance tie, stability undecided
    direction: Optional[ProjectiveDirection]
    multiplier: Optional[complex]  # eigenvalue of the full-period matrix
    failed_inequality: Optional[tuple[int, str]]


def certify_pattern(word: Union[str, PatternWord], rest: Restitution) -> PeriodicOrbitCertificate:
    """Existence/stability certificate for a periodic branch word at fixed r.

    Eigenvectors of the word matrix (the J-reduced half matrix for palindromic
    words) are tested against the feasibility inequalities, both sign
    representatives each.  stable is True iff a feasible eigenvector carries
    the strictly dominant eigenvalue, None when the top moduli tie within
    1e-12 relative (undecided), False otherwise.
    """
    if not isinstance(word, PatternWord):
        word = PatternWord(word)
    reduced = word.palindromic_half is not None
    m = (
        reduced_matrix(word.palindromic_half, rest)
        if reduced
        else word_matrix(word, rest)
    )
    # Long words contract hard (det ~ r^(4*|w|)); rescale so the cubic solver
    # works near unit magnitude, and undo the scale on the multiplier.
    scale = max(abs(float(m[i][j])) for i in range(3) for j in range(3))
    if scale == 0.0:
        raise DomainError("word matrix underflowed to zero; restitution too small")
    m_scaled = tuple(tuple(float(x) / scale for x in row) for row in m)
    eig = numeric_eigensystem(m_scaled)

    feasible_index = None
    feasible_vec = None
    failure = None
    failure_score = (-1, -1, -1)
    for i, (lam, vec) in enumerate(zip(eig.eigenvalues, eig.eigenvectors)):
        if abs(lam.imag) > 1e-10 * max(1.0, abs(lam)):
            continue
        v = np.real(np.array(vec))
        if np.linalg.norm(v) < 1e-12:
            continue
        v /= np.linalg.norm(v)
        for cand in (v, -v):
            res = feasibility_check(word, cand, rest)
            if res is None:
                feasible_index = i
                feasible_vec = cand
                break
            # Report the most informative failure: dominant eigenvector first,
            # deepest step next, and never the wrong sign representative's
            # trivial step-0 quadrant miss if something better exists.
            score = (
                1 if eig.dominant_index == i else 0,
                res[0],
                0 if (res[0] == 0 and res[1] in ("x > 0", "z < 0")) else 1,
            )
            if score > failure_score:
                failure, failure_score = res, score
        if feasible_index is not None:
            break

    if feasible_index is None:
        return PeriodicOrbitCertificate(word, float(rest.r), False, False, None, None, failure)

    lam_scaled = eig.eigenvalues[feasible_index]
    lam = lam_scaled * scale
    multiplier = lam * lam if reduced else lam
    if eig.dominant_index is None:
        mods = sorted(abs(v) for v in eig.eigenvalues)
        # Tie at the top: stability undecided only if the feasible one ties.
        stable = None if abs(lam_scaled) >= mods[-1] * (1 - _DOMINANCE_RTOL) else False
    else:
        stable = feasible_index == eig.dominant_index
    direction = ProjectiveDirection.from_vector(*feasible_vec)
    return PeriodicOrbitCertificate(
        word, float(rest.r), True, stable, direction, multiplier, None
    )


def reduced_real_direction(half: str, rest: Restitution) -> tuple[float, float, float]:
    """Eigenvector of the most negative real eigenvalue of J * word_matrix(half).

    That eigenvalue is the one that stays real over the whole range of
    restitution coefficients for the palindromic half words studied here.
    Scaled to x-component 1 (y-component 1 when the x-component vanishes,
    which happens at isolated critical restitution coefficients).
    """
    m = reduced_matrix(half, rest)
    scale = max(abs(float(m[i][j])) for i in range(3) for j in range(3))
    m_scaled = tuple(tuple(float(x) / scale for x in row) for row in m)
    eig = numeric_eigensystem(m_scaled)
    real = [
        (lam.real, vec)
        for lam, vec in zip(eig.eigenvalues, eig.eigenvectors)
        if abs(lam.imag) < 1e-9 * max(1.0, abs(lam))
    ]
    if not real:
        raise DomainError("no real eigenvalue found")
    _, vec = min(real, key=lambda t: t[0])
    v = np.real(np.array(vec))
    if abs(v[0]) > 1e-9:
        v = v / v[0]
    else:
        v = v / v[1]
    return (float(v[0]), float(v[1]), float(v[2]))


def _dominant_real_eigenvector_132(r) -> tuple:
    """Eigenvector (x-component 1) of the always-real eigenvalue of J*P2*P3*P1.

    mpmath arithmetic throughout: the bisection in critical_r_132 needs more
    than float accuracy near the root.  The always-real eigenvalue is the
    most negative real root of the characteristic cubic.
    """
    one = mpmath.mpf(1)
    a = (r + 1) / 2
    p1 = ((-r, r * a, 0), (-a, a * a - r, r * a), (0, 0, r * r))
    p2 = ((r, -r * a, 0), (a, -2 * a * a + r, a), (0, -r * a, r))
    p3 = ((r * r, 0, 0), (r * a, a * a - r, -a), (0, r * a, -r))

    def mul(mm, nn):
        return tuple(
            tuple(sum(mm[i][k] * nn[k][j] for k in range(3)) for j in range(3))
            for i in range(3)
        )

    m = mul(p2, mul(p3, p1))
    m = (m[2], m[1], m[0])  # left-multiply by J
    tr = m[0][0] + m[1][1] + m[2][2]
    minors = (
        m[1][1] * m[2][2]
        - m[1][2] * m[2][1]
        + m[0][0] * m[2][2]
        - m[0][2] * m[2][0]
        + m[0][0] * m[1][1]
        - m[0][1] * m[1][0]
    )
    det = (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )
    roots = mpmath.polyroots([one, -tr, minors, -det], extraprec=50)
    lam = min((z.real for z in roots if abs(mpmath.im(z)) < mpmath.mpf("1e-20")))
    rows = [
        (m[0][0] - lam, m[0][1], m[0][2]),
        (m[1][0], m[1][1] - lam, m[1][2]),
        (m[2][0], m[2][1], m[2][2] - lam),
    ]

    def cross(u, v):
        return (
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        )

    cands = [cross(rows[0], rows[1]), cross(rows[0], rows[2]), cross(rows[1], rows[2])]
    vec = max(cands, key=lambda w: sum(abs(c) for c in w))
    return tuple(c / vec[0] for c in vec)


def critical_r_132(tolerance: float) -> float:
    """Root of alpha(r)*u_y(r) - 1 = 0 for the dominant eigenvector of J*P2*P3*P1.

    The eigenvector is scaled to x-component 1; above the root the word 132312
    is realized stably, below it the first branch-1 inequality fails.
    Bisection over (0.19, 0.25) with mpmath working precision.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    with mpmath.workdps(40):

        def g(r):
            vec = _dominant_real_eigenvector_132(mpmath.mpf(r))
            return (r + 1) / 2 * vec[1] - vec[0]

        lo, hi = mpmath.mpf("0.19"), mpmath.mpf("0.25")
        glo, ghi = g(lo), g(hi)
        if glo * ghi >= 0:
            raise DomainError("bisection bracket (0.19, 0.25) does not straddle the root")
        while hi - lo > tolerance / 4:
            mid = (lo + hi) / 2
            gm = g(mid)
            if gm == 0:
                return float(mid)
            if (gm > 0) == (ghi > 0):
                hi, ghi = mid, gm
            else:
                lo, glo = mid, gm
        return float((lo + hi) / 2)
