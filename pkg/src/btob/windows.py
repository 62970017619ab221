"""Exact-arithmetic stability-window bounds for the patterns (ab)^n (cb)^n.

The pattern (ab)^n (cb)^n is realized stably on an interval of restitution
coefficients.  The lower endpoint of the n-th interval is a root of

    Q_n(r) = r^(2n) * P_n(r) * P_n(1/r) - r^(2n),

where P_n is the trace of J (B A)^n, a degree-2n polynomial, built here with
exact rational arithmetic (binary exponentiation of the polynomial matrix
keeps the work bounded).  The candidate upper endpoint is the closed form

    (2 cos(pi/(2n)) - sqrt(4 cos^2(pi/(2n)) - 1))^2,

the smallest Chebyshev-root choice; it is evaluated with interval arithmetic
so the printed decimals carry a certified error bound.

Root isolation never touches floating point: signs of Q_n at dyadic rationals
are computed with integer Horner evaluation, and root counts on an interval
use the Descartes bound of the Moebius-transformed integer polynomial,
subdividing until the bound is 0 or 1 (exact in both cases).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

import mpmath

Rational = Union[int, Fraction]

ONE_HALF = Fraction(1, 2)


class RootCountError(ArithmeticError):
    """The target interval does not contain exactly one root of Q_n."""

    def __init__(self, n: int, count: int, message: str = ""):
        self.n = n
        self.count = count
        super().__init__(
            f"Q_{n}: expected exactly one root in the window interval, found {count}"
            + (f" ({message})" if message else "")
        )


class RationalPoly:
    """Univariate polynomial with exact Fraction coefficients (index = degree)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Rational]):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def monomial(cls, degree: int, coeff: Rational = 1) -> "RationalPoly":
        return cls([0] * degree + [coeff])

    def degree(self) -> int:
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other: "RationalPoly") -> "RationalPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return RationalPoly(out)

    def __neg__(self) -> "RationalPoly":
        return RationalPoly([-c for c in self.coeffs])

    def __sub__(self, other: "RationalPoly") -> "RationalPoly":
        return self + (-other)

    def __mul__(self, other: Union["RationalPoly", Rational]) -> "RationalPoly":
        if isinstance(other, (int, Fraction)):
            return RationalPoly([c * other for c in self.coeffs])
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1) if self and other else []
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __divmod__(self, other: "RationalPoly") -> tuple["RationalPoly", "RationalPoly"]:
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        den = other.coeffs
        quo = [Fraction(0)] * max(0, len(rem) - len(den) + 1)
        for k in range(len(rem) - len(den), -1, -1):
            f = rem[k + len(den) - 1] / den[-1]
            quo[k] = f
            if f:
                for j, c in enumerate(den):
                    rem[k + j] -= f * c
        return RationalPoly(quo), RationalPoly(rem)

    def __call__(self, x: Rational) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def reversed(self, degree: Optional[int] = None) -> "RationalPoly":
        """r^d * p(1/r): the coefficient sequence reversed, padded to degree d."""
        d = self.degree() if degree is None else degree
        if d < self.degree():
            raise ValueError("cannot reverse into a smaller degree")
        padded = list(self.coeffs) + [Fraction(0)] * (d + 1 - len(self.coeffs))
        return RationalPoly(padded[::-1])

    def integer_coeffs(self) -> tuple[list[int], int]:
        """(c, m) with c integer coefficients of m * self; m the denominator LCM."""
        m = 1
        for c in self.coeffs:
            m = m * c.denominator // math.gcd(m, c.denominator)
        return [int(c * m) for c in self.coeffs], m

    def __repr__(self):
        return f"RationalPoly({list(self.coeffs)!r})"


@dataclass(frozen=True)
class PrecisionBudget:
    """Working decimal digits for transcendental evaluation and output decimals."""

    working: int = 64
    target: int = 12

    def __post_init__(self):
        if self.working < self.target + 10:
            raise ValueError("working precision must exceed target by at least 10 digits")


@dataclass(frozen=True)
class StabilityWindow:
    n: int
    lower: str
    upper: str  # "not defined" for n = 1


# --- trace and window polynomials -----------------------------------------

_PolyMat = tuple[tuple[RationalPoly, ...], ...]


def _poly_mat(entries: Sequence[Sequence[Rational]]) -> _PolyMat:
    return tuple(tuple(RationalPoly([e]) for e in row) for row in entries)


def _poly_mat_mul(m: _PolyMat, n: _PolyMat) -> _PolyMat:
    return tuple(
        tuple(
            m[i][0] * n[0][j] + m[i][1] * n[1][j] + m[i][2] * n[2][j] for j in range(3)
        )
        for i in range(3)
    )


def _poly_mat_pow(m: _PolyMat, n: int) -> _PolyMat:
    result = None
    base = m
    while n > 0:
        if n & 1:
            result = base if result is None else _poly_mat_mul(result, base)
        n >>= 1
        if n:
            base = _poly_mat_mul(base, base)
    assert result is not None
    return result


def _collision_poly_matrices() -> tuple[_PolyMat, _PolyMat]:
    """A and B with alpha = (r+1)/2 as degree-1 polynomials in r."""
    r = RationalPoly([0, 1])
    alpha = RationalPoly([ONE_HALF, ONE_HALF])
    zero, one = RationalPoly([]), RationalPoly([1])
    a = ((-r, zero, zero), (alpha, one, zero), (zero, zero, one))
    b = ((one, alpha, zero), (zero, -r, zero), (zero, alpha, one))
    return a, b


@lru_cache(maxsize=None)
def trace_poly(n: int) -> RationalPoly:
    """P_n = trace of J (B A)^n, exactly; degree 2n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b = _collision_poly_matrices()
    ban = _poly_mat_pow(_poly_mat_mul(b, a), n)
    # J swaps rows 1 and 3, so the trace picks entries (3,1), (2,2), (1,3).
    p = ban[2][0] + ban[1][1] + ban[0][2]
    assert p.degree() == 2 * n
    return p


@lru_cache(maxsize=None)
def q_poly(n: int) -> RationalPoly:
    """Q_n(r) = r^(2n) P_n(r) P_n(1/r) - r^(2n); degree 4n, palindromic."""
    p = trace_poly(n)
    q = p * p.reversed(2 * n) - RationalPoly.monomial(2 * n)
    assert q.degree() == 4 * n
    return q


# --- exact sign evaluation and root counting -------------------------------


def _sign_at(coeffs: Sequence[int], num: int, den: int) -> int:
    """Sign of sum c_k (num/den)^k, exactly, via integer Horner."""
    acc = 0
    dpow = 1
    for c in reversed(coeffs):
        acc = acc * num + c * dpow
        dpow *= den
    return (acc > 0) - (acc < 0)


def _taylor_shift(coeffs: list[int], a: int) -> list[int]:
    """Coefficients of P(x + a) for integer a (in-place Horner scheme)."""
    c = list(coeffs)
    d = len(c) - 1
    for i in range(d):
        for j in range(d - 1, i - 1, -1):
            c[j] += a * c[j + 1]
    return c


def _variations(coeffs: Sequence[int]) -> int:
    count = 0
    prev = 0
    for c in coeffs:
        if c == 0:
            continue
        s = 1 if c > 0 else -1
        if prev and s != prev:
            count += 1
        prev = s
    return count


def _dyadic_parts(x: Fraction) -> tuple[int, int]:
    """(numerator, k) with x = numerator / 2^k; requires a power-of-two denominator."""
    den = x.denominator
    k = den.bit_length() - 1
    if 1 << k != den:
        raise ValueError("interval endpoints must be dyadic rationals")
    return x.numerator, k


def _sign_at_dyadic(coeffs: Sequence[int], x: Fraction) -> int:
    num, k = _dyadic_parts(x)
    return _sign_at(coeffs, num, 1 << k)


def _count_roots(coeffs: Sequence[int], a: Fraction, b: Fraction, depth: int = 0) -> int:
    """Exact number of roots in the open interval (a, b); a, b dyadic, not roots.

    Descartes' rule on the transformed polynomial (1+x)^d P(a + (b-a)/(1+x))
    gives an upper bound with the right parity; 0 and 1 are therefore exact,
    anything larger is resolved by subdividing.
    """
    if depth > 64:
        raise ArithmeticError("root counting failed to separate roots (depth cap)")
    pa, ka = _dyadic_parts(a)
    pb, kb = _dyadic_parts(b)
    s = max(ka, kb)
    pa <<= s - ka
    pb <<= s - kb
    pm = pb - pa
    if pm <= 0:
        raise ValueError("empty interval")
    d = len(coeffs) - 1
    # Clear the 2^s denominator: D(y) = (2^s)^d P(y / 2^s).
    dcoeffs = [c << (s * (d - k)) for k, c in enumerate(coeffs)]
    e = _taylor_shift(dcoeffs, pa)
    f = [c * pm**k for k, c in enumerate(e)]
    t = _taylor_shift(f[::-1], 1)
    v = _variations(t)
    if v <= 1:
        return v
    mid = (a + b) / 2
    mn, mk = _dyadic_parts(mid)
    extra = 0
    if _sign_at(coeffs, mn, 1 << mk) == 0:
        extra = 1
    return (
        _count_roots(coeffs, a, mid, depth + 1)
        + extra
        + _count_roots(coeffs, mid, b, depth + 1)
    )


def _round_fraction(x: Fraction, places: int) -> str:
    """Decimal string of x with `places` digits after the point, round half-even."""
    neg = x < 0
    if neg:
        x = -x
    scaled = x * 10**places
    q, r = divmod(scaled.numerator, scaled.denominator)
    twice = 2 * r
    if twice > scaled.denominator or (twice == scaled.denominator and q % 2 == 1):
        q += 1
    whole, frac = divmod(q, 10**places)
    s = f"{whole}.{frac:0{places}d}"
    return "-" + s if neg else s


def _mpf_tuple_to_fraction(t) -> Fraction:
    sign, man, exp, _ = t
    if man == 0:
        return Fraction(0)
    f = Fraction(man << exp) if exp >= 0 else Fraction(man, 1 << -exp)
    return -f if sign else f


def _sqrt3_upper(bits: int) -> Fraction:
    """Dyadic upper bound on sqrt(3) with error below 2^-bits."""
    s = math.isqrt(3 << (2 * bits))
    return Fraction(s + 1, 1 << bits)


def _collapse_threshold_upper(bits: int = 48) -> Fraction:
    """Dyadic q >= 7 - 4*sqrt(3) with error below 2^-(bits-2)."""
    s = math.isqrt(3 << (2 * bits))  # s <= sqrt(3) * 2^bits
    return 7 - Fraction(4 * s, 1 << bits)


def upper_bound(n: int, budget: PrecisionBudget = PrecisionBudget()) -> str:
    """Chebyshev-root upper bound of window n, certified to the target decimals.

    Interval arithmetic carries directed rounding through cos and sqrt; the
    working precision is raised until the enclosure rounds unambiguously.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return "not defined"
    lo, hi = _upper_bound_interval(n, budget)
    slo = _round_fraction(lo, budget.target)
    shi = _round_fraction(hi, budget.target)
    dps = budget.working
    while slo != shi and dps < 16 * budget.working:
        dps *= 2
        lo, hi = _upper_bound_interval(n, PrecisionBudget(dps, budget.target))
        slo = _round_fraction(lo, budget.target)
        shi = _round_fraction(hi, budget.target)
    if slo != shi:
        raise ArithmeticError(f"upper bound for n={n} straddles a rounding boundary")
    return slo


def _upper_bound_interval(n: int, budget: PrecisionBudget) -> tuple[Fraction, Fraction]:
    """Certified dyadic enclosure of the upper-bound formula at window n."""
    old = mpmath.iv.dps
    try:
        mpmath.iv.dps = budget.working
        c = mpmath.iv.cos(mpmath.iv.pi / (2 * n))
        t = 2 * c - mpmath.iv.sqrt(4 * c * c - 1)
        r = t * t
        lo_t, hi_t = r._mpi_
        lo = _mpf_tuple_to_fraction(lo_t)
        hi = _mpf_tuple_to_fraction(hi_t)
    finally:
        mpmath.iv.dps = old
    if hi - lo > Fraction(1, 10 ** (budget.target + 2)):
        raise ArithmeticError("interval evaluation too wide; raise the working precision")
    return lo, hi


def _snap_down(x: Fraction, bits: int = 64) -> Fraction:
    """Largest multiple of 2^-bits that is <= x (keeps integer transforms small)."""
    return Fraction((x.numerator << bits) // x.denominator, 1 << bits)


def _window_bracket(n: int, budget: PrecisionBudget) -> tuple[Fraction, Fraction]:
    """Dyadic (a, b) slightly inside (7 - 4*sqrt(3), upper_bound(n)].

    The right endpoint is the certified upper enclosure of the window's upper
    bound, snapped down by at most 2^-64 (orders of magnitude below the
    window width, so the root stays strictly inside).
    """
    base = _collapse_threshold_upper()
    if n == 1:
        b = Fraction(1)
    else:
        _, hi = _upper_bound_interval(n, budget)
        b = _snap_down(hi)
    gap = b - base
    if gap <= 0:
        raise RootCountError(n, 0, "upper bound does not exceed 7 - 4*sqrt(3)")
    return base, b


@lru_cache(maxsize=None)
def _q_int_coeffs(n: int) -> tuple[int, ...]:
    return tuple(q_poly(n).integer_coeffs()[0])


def _isolate_lower_root(n: int, budget: PrecisionBudget) -> tuple[Fraction, Fraction]:
    """Bracket of the unique root of Q_n in its window interval, exact signs only."""
    coeffs = _q_int_coeffs(n)
    base, b = _window_bracket(n, budget)
    gap = b - base
    a = None
    for shift in (10, 20, 30):
        cand = base + gap / (1 << shift)
        # Margins of base and b stay dyadic: gap/2^k has a 2-power denominator.
        if _sign_at_dyadic(coeffs, cand) != 0 and _sign_at_dyadic(coeffs, b) != 0:
            count = _count_roots(coeffs, cand, b)
            if count == 1:
                a = cand
                break
            if count > 1:
                raise RootCountError(n, count)
    if a is None:
        raise RootCountError(n, 0, "no root found above 7 - 4*sqrt(3)")

    sa = _sign_at_dyadic(coeffs, a)
    sb = _sign_at_dyadic(coeffs, b)
    if sa == sb:
        raise RootCountError(n, 1, "endpoints have equal signs despite a unique root")
    width_goal = Fraction(1, 10 ** (budget.target + 2))
    lo, hi = a, b
    slo, shi = sa, sb
    for _ in range(4096):
        if hi - lo < width_goal and _round_fraction(lo, budget.target) == _round_fraction(
            hi, budget.target
        ):
            return lo, hi
        mid = (lo + hi) / 2
        sm = _sign_at_dyadic(coeffs, mid)
        if sm == 0:
            return mid, mid
        if sm == slo:
            lo = mid
        else:
            hi = mid
    raise ArithmeticError(f"bisection for Q_{n} did not converge")


def lower_bound(n: int, budget: PrecisionBudget = PrecisionBudget()) -> str:
    """Lower bound of window n: the unique root of Q_n in (7-4*sqrt(3), upper).

    For n = 1 the interval is (7-4*sqrt(3), 1).  Root isolation and bisection
    use exact integer sign evaluation; if the interval does not contain
    exactly one root a RootCountError reports the count instead of guessing.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = _isolate_lower_root(n, budget)
    return _round_fraction((lo + hi) / 2, budget.target)


def window_table(
    n_max: int, budget: PrecisionBudget = PrecisionBudget()
) -> list[StabilityWindow]:
    """Windows 1..n_max with monotonicity checks (nested, accumulating bounds)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    rows = []
    prev_lower = None
    for n in range(1, n_max + 1):
        low = lower_bound(n, budget)
        up = upper_bound(n, budget)
        if up != "not defined" and not low < up:
            raise ArithmeticError(f"window {n}: lower bound {low} not below upper {up}")
        if prev_lower is not None and not low < prev_lower:
            raise ArithmeticError(f"window {n}: lower bounds are not decreasing")
        prev_lower = low
        rows.append(StabilityWindow(n, low, up))
    return rows


def windows_csv(rows: Iterable[StabilityWindow], stream) -> None:
    stream.write("n,lower,upper\n")
    for w in rows:
        stream.write(f"{w.n},{w.lower},{w.upper}\n")
