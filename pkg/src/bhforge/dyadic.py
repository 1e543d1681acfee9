"""Certified dyadic interval arithmetic on plain Python integers.

Every quantity is carried as an interval [lo*2^exp, hi*2^exp] with integer
mantissas, so soundness never depends on floating point.  Transcendental
values (arctan, pi, ln 2, log2, 2^x) are produced by integer Taylor /
Machin-style series whose truncation and floor-division slop is folded
into the returned interval: the true value is always inside.

Escalation: callers that need a predicate decided retry at doubled
precision until the interval separates, up to a hard cap (default 2^20
bits, override with the BH_FORGE_PRECISION_CAP environment variable).
"""

from __future__ import annotations

import os
from fractions import Fraction
from math import isqrt

from .errors import PrecisionCapExceeded

DEFAULT_PRECISION_CAP = 1 << 20
_GUARD = 16  # extra working bits per series evaluation


def precision_cap() -> int:
    raw = os.environ.get("BH_FORGE_PRECISION_CAP")
    if raw is None:
        return DEFAULT_PRECISION_CAP
    cap = int(raw)
    if cap < 8:
        raise ValueError("precision cap must be at least 8 bits")
    return cap


class DyadicInterval:
    """Closed interval [lo*2^exp, hi*2^exp], lo <= hi, all integers."""

    __slots__ = ("lo", "hi", "exp")

    def __init__(self, lo: int, hi: int, exp: int):
        if lo > hi:
            raise ValueError(f"inverted interval: lo={lo} hi={hi}")
        self.lo = lo
        self.hi = hi
        self.exp = exp

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_int(cls, n: int) -> "DyadicInterval":
        return cls(n, n, 0)

    @classmethod
    def from_fraction(cls, fr: Fraction, prec: int) -> "DyadicInterval":
        """Enclose num/den outward at scale 2^-prec (exact if dyadic)."""
        num, den = fr.numerator, fr.denominator
        lo = _floor_div(num << prec, den)
        hi = -_floor_div(-(num << prec), den)
        return cls(lo, hi, -prec)

    # -- exact operations --------------------------------------------------

    def _aligned(self, other: "DyadicInterval"):
        e = min(self.exp, other.exp)
        a = self.shift_to(e)
        b = other.shift_to(e)
        return a, b, e

    def shift_to(self, exp: int) -> "DyadicInterval":
        """Re-express at a finer (smaller) exponent; exact."""
        if exp > self.exp:
            raise ValueError("shift_to only refines the exponent")
        s = self.exp - exp
        return DyadicInterval(self.lo << s, self.hi << s, exp)

    def __add__(self, other: "DyadicInterval") -> "DyadicInterval":
        a, b, e = self._aligned(other)
        return DyadicInterval(a.lo + b.lo, a.hi + b.hi, e)

    def __sub__(self, other: "DyadicInterval") -> "DyadicInterval":
        a, b, e = self._aligned(other)
        return DyadicInterval(a.lo - b.hi, a.hi - b.lo, e)

    def __neg__(self) -> "DyadicInterval":
        return DyadicInterval(-self.hi, -self.lo, self.exp)

    def __mul__(self, other: "DyadicInterval") -> "DyadicInterval":
        ps = (self.lo * other.lo, self.lo * other.hi,
              self.hi * other.lo, self.hi * other.hi)
        return DyadicInterval(min(ps), max(ps), self.exp + other.exp)

    def scale_pow2(self, k: int) -> "DyadicInterval":
        """Multiply by 2^k; exact."""
        return DyadicInterval(self.lo, self.hi, self.exp + k)

    def mul_int(self, n: int) -> "DyadicInterval":
        if n >= 0:
            return DyadicInterval(self.lo * n, self.hi * n, self.exp)
        return DyadicInterval(self.hi * n, self.lo * n, self.exp)

    def abs(self) -> "DyadicInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return DyadicInterval(0, max(-self.lo, self.hi), self.exp)

    # -- rounded operations ------------------------------------------------

    def round(self, prec: int) -> "DyadicInterval":
        """Outward round to exponent -prec."""
        if self.exp >= -prec:
            return self.shift_to(-prec)
        s = -prec - self.exp
        return DyadicInterval(self.lo >> s, -((-self.hi) >> s), -prec)

    def mul_fraction(self, fr: Fraction, prec: int) -> "DyadicInterval":
        """Multiply by an exact rational, outward at 2^-prec."""
        a = self.round(prec + 4)
        num, den = fr.numerator, fr.denominator
        cands = (a.lo * num, a.hi * num)
        lo, hi = min(cands), max(cands)
        return DyadicInterval(_floor_div(lo, den), -_floor_div(-hi, den),
                              a.exp).round(prec)

    def div(self, other: "DyadicInterval", prec: int) -> "DyadicInterval":
        """self / other for other certainly positive, outward at 2^-prec."""
        if other.lo <= 0:
            raise ValueError("division requires a certainly-positive divisor")
        k = prec + 4
        s = self.exp - other.exp + k    # makes the result exponent -k

        def ddiv(num: int, den: int, up: bool) -> int:
            nn, dd = (num << s, den) if s >= 0 else (num, den << -s)
            return -((-nn) // dd) if up else nn // dd

        lo = ddiv(self.lo, other.hi if self.lo >= 0 else other.lo, up=False)
        hi = ddiv(self.hi, other.lo if self.hi >= 0 else other.hi, up=True)
        return DyadicInterval(lo, hi, -k).round(prec)

    def sqrt(self, prec: int) -> "DyadicInterval":
        """Square root of a certainly-nonnegative interval, outward."""
        if self.lo < 0:
            raise ValueError("sqrt of an interval reaching below zero")
        a = self.round(2 * (prec + 2))
        # a.exp is even and negative
        half = -a.exp // 2
        lo = isqrt(a.lo)
        hi_root = isqrt(a.hi)
        if hi_root * hi_root < a.hi:
            hi_root += 1
        return DyadicInterval(lo, hi_root, -half).round(prec)

    # -- predicates & accessors --------------------------------------------

    def width_leq(self, prec: int) -> bool:
        """Is the exact width <= 2^-prec?"""
        shift = -prec - self.exp
        if shift >= 0:
            return self.hi - self.lo <= 1 << shift
        return (self.hi - self.lo) << -shift <= 1

    def width_fraction(self) -> Fraction:
        return Fraction(self.hi - self.lo) * Fraction(2) ** self.exp

    def lo_fraction(self) -> Fraction:
        return Fraction(self.lo) * Fraction(2) ** self.exp

    def hi_fraction(self) -> Fraction:
        return Fraction(self.hi) * Fraction(2) ** self.exp

    def contains(self, fr) -> bool:
        fr = Fraction(fr)
        return self.lo_fraction() <= fr <= self.hi_fraction()

    def contains_interval(self, other: "DyadicInterval") -> bool:
        return (self.lo_fraction() <= other.lo_fraction()
                and other.hi_fraction() <= self.hi_fraction())

    def certainly_lt(self, other: "DyadicInterval") -> bool:
        a, b, _ = self._aligned(other)
        return a.hi < b.lo

    def certainly_gt(self, other: "DyadicInterval") -> bool:
        return other.certainly_lt(self)

    def floor_unique(self):
        """The common floor of all values, or None if not yet decided."""
        if self.exp >= 0:
            flo = self.lo << self.exp
            fhi = self.hi << self.exp
        else:
            flo = self.lo >> -self.exp
            fhi = self.hi >> -self.exp
        if flo != fhi:
            return None
        # an exact-integer upper endpoint still straddles the grid point
        if self.exp < 0 and fhi << -self.exp == self.hi and self.hi != self.lo:
            return None
        return flo

    def to_float(self) -> float:
        """Midpoint as float; reporting only, never used in decisions."""
        mid = (self.lo + self.hi) / 2
        try:
            return float(mid * 2.0 ** self.exp)
        except OverflowError:
            return float(Fraction(self.lo + self.hi, 2) * Fraction(2) ** self.exp)

    def __repr__(self):
        return f"DyadicInterval({self.lo}, {self.hi}, 2^{self.exp})"


def _floor_div(a: int, b: int) -> int:
    return a // b


# ---------------------------------------------------------------------------
# Integer series kernels.  All return (lo, hi) mantissas at scale 2^-w such
# that the true value lies in [lo*2^-w, hi*2^-w].
# ---------------------------------------------------------------------------

def _atan_series(p: int, q: int, w: int):
    """arctan(p/q) for 0 <= p/q <= 1/2 via the alternating Taylor series."""
    if p == 0:
        return 0, 0
    W = w + _GUARD
    p2, q2 = p * p, q * q
    pw = (p << W) // q          # ~ x * 2^W, floor error < 1
    k = 0
    acc = 0
    slop = 0
    while True:
        term = pw // (2 * k + 1)
        acc += term if k % 2 == 0 else -term
        slop += k + 2           # floor-error budget of pw and the division
        nxt = pw * p2 // q2
        if nxt == 0:
            # true tail <= (error bound of pw at next order) * 4/3
            slop += k + 4
            break
        pw = nxt
        k += 1
        if k > 4 * W:
            raise RuntimeError("arctan series failed to converge")
    lo = (acc - slop) >> _GUARD
    hi = -((-(acc + slop)) >> _GUARD)
    return lo, hi


def _atanh_series(p: int, q: int, w: int):
    """atanh(p/q) for 0 <= p/q <= 1/2; all terms positive."""
    if p == 0:
        return 0, 0
    W = w + _GUARD
    p2, q2 = p * p, q * q
    pw = (p << W) // q
    k = 0
    acc = 0
    slop = 0
    while True:
        acc += pw // (2 * k + 1)
        slop += k + 2
        nxt = pw * p2 // q2
        if nxt == 0:
            # geometric tail: x^2 <= 1/4 so tail <= next-term-bound * 4/3
            slop += 2 * (k + 4)
            break
        pw = nxt
        k += 1
        if k > 4 * W:
            raise RuntimeError("atanh series failed to converge")
    lo = (acc - slop) >> _GUARD
    hi = -((-(acc + slop)) >> _GUARD)
    return lo, hi


_pi_cache: dict[int, DyadicInterval] = {}
_ln2_cache: dict[int, DyadicInterval] = {}


def pi_interval(prec: int) -> DyadicInterval:
    """Machin: pi = 16*arctan(1/5) - 4*arctan(1/239)."""
    got = _pi_cache.get(prec)
    if got is not None:
        return got
    w = prec + 8
    a5 = _atan_series(1, 5, w)
    a239 = _atan_series(1, 239, w)
    lo = 16 * a5[0] - 4 * a239[1]
    hi = 16 * a5[1] - 4 * a239[0]
    out = DyadicInterval(lo, hi, -w).round(prec)
    _pi_cache[prec] = out
    return out


def ln2_interval(prec: int) -> DyadicInterval:
    """ln 2 = 2*atanh(1/3)."""
    got = _ln2_cache.get(prec)
    if got is not None:
        return got
    w = prec + 8
    lo, hi = _atanh_series(1, 3, w)
    out = DyadicInterval(2 * lo, 2 * hi, -w).round(prec)
    _ln2_cache[prec] = out
    return out


def atan_fraction(p: int, q: int, prec: int) -> DyadicInterval:
    """arctan(p/q) for 0 <= p/q <= 1, certified.

    Arguments above 1/2 are reflected through arctan(x) =
    pi/4 - arctan((q-p)/(q+p)), keeping the series argument <= 1/3.
    """
    if p < 0 or q <= 0 or p > q:
        raise ValueError("atan_fraction expects 0 <= p/q <= 1")
    w = prec + 8
    if 2 * p <= q:
        lo, hi = _atan_series(p, q, w)
        return DyadicInterval(lo, hi, -w).round(prec)
    quarter_pi = pi_interval(w).mul_fraction(Fraction(1, 4), w)
    lo, hi = _atan_series(q - p, q + p, w)
    return (quarter_pi - DyadicInterval(lo, hi, -w)).round(prec)


def log2_int(n: int, prec: int) -> DyadicInterval:
    """log2(n) for integer n >= 1, certified."""
    if n < 1:
        raise ValueError("log2_int expects n >= 1")
    if n & (n - 1) == 0:
        return DyadicInterval.from_int(n.bit_length() - 1)
    w = prec + 8
    t = n.bit_length() - 1          # n / 2^t in [1, 2)
    # ln(n/2^t) = 2*atanh(u), u = (n - 2^t) / (n + 2^t) in (0, 1/3)
    lo, hi = _atanh_series(n - (1 << t), n + (1 << t), w)
    lnf = DyadicInterval(2 * lo, 2 * hi, -w)
    return (DyadicInterval.from_int(t) + lnf.div(ln2_interval(w), w)).round(prec)


def _exp_series_dir(y: int, W: int, up: bool) -> int:
    """Bound on e^(y/2^W) * 2^W for 0 <= y/2^W < 3/4; directed by `up`."""
    if y == 0:
        return 1 << W
    term = 1 << W
    acc = term
    k = 0
    slop = 0
    while term > 0:
        k += 1
        term = term * y // ((1 << W) * k)
        acc += term
        slop += 2
        if k > 4 * W:
            raise RuntimeError("exp series failed to converge")
    # tail after a zero floor term: bounded by slop-scale crumbs
    slop += k + 4
    return acc + slop if up else acc - slop


def exp2_interval(x: DyadicInterval, prec: int) -> DyadicInterval:
    """2^x, certified, for an interval x of moderate magnitude."""
    w = prec + 8
    ln2 = ln2_interval(w + 8)

    def endpoint(m: int, e: int, up: bool) -> tuple[int, int]:
        # returns (mantissa, exponent) bound of 2^(m*2^e)
        if e >= 0:
            return 1, m << e
        n = m >> -e                      # floor of the exponent
        fnum = m - (n << -e)             # frac part f = fnum / 2^-e in [0,1)
        if fnum == 0:
            return 1, n
        # y = f * ln2 at scale 2^-(w+8), directed
        shift = -e + (-ln2.exp) - (w + 8)
        raw = fnum * lnm_hi if up else fnum * lnm_lo
        y = -((-raw) >> shift) if up else raw >> shift
        val = _exp_series_dir(y, w + 8, up)
        return val, n - (w + 8)

    lnm_lo, lnm_hi = ln2.lo, ln2.hi
    mlo, elo = endpoint(x.lo, x.exp, up=False)
    mhi, ehi = endpoint(x.hi, x.exp, up=True)
    e = min(elo, ehi)
    return DyadicInterval(mlo << (elo - e), mhi << (ehi - e), e).round(prec)


def sqrt_int_interval(n: int, prec: int) -> DyadicInterval:
    """sqrt(n) for integer n >= 0, certified at 2^-prec."""
    if n < 0:
        raise ValueError("negative operand")
    w = prec + 2
    lo = isqrt(n << (2 * w))
    hi = lo if lo * lo == n << (2 * w) else lo + 1
    return DyadicInterval(lo, hi, -w).round(prec)


def escalate(start_bits: int, attempt, what: str = "predicate"):
    """Retry `attempt(bits)` at doubling precision until it returns non-None."""
    cap = precision_cap()
    bits = max(8, start_bits)
    while bits <= cap:
        out = attempt(bits)
        if out is not None:
            return out
        bits *= 2
    raise PrecisionCapExceeded(
        f"could not decide {what} within the {cap}-bit precision cap", bits=cap)
