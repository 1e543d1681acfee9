"""First-octant Gaussian primes and certified enclosures of their arguments.

For each rational prime p = 1 (mod 4) there is a unique Gaussian prime
a+bi with a > b > 0 and a^2 + b^2 = p.  Its normalized argument
theta = arctan(b/a) / (2*pi) lies strictly inside (0, 1/8) and is
irrational, so binary digits of alpha*theta are well defined for any
rational alpha and can be certified by interval escalation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np

from .dyadic import (DyadicInterval, atan_fraction, escalate, pi_interval,
                     sqrt_int_interval)

# direct a^2+b^2 search below this norm; Cornacchia-style reduction above
_DIRECT_SEARCH_LIMIT = 200_000


@dataclass(frozen=True, slots=True, order=True)
class GaussianPrime:
    """First-octant Gaussian prime a+bi with norm = a^2 + b^2 = 1 (mod 4)."""

    norm: int
    a: int
    b: int

    def __post_init__(self):
        if not (self.a > self.b > 0):
            raise ValueError(f"not in the open first octant: {self.a}+{self.b}i")
        if self.a * self.a + self.b * self.b != self.norm:
            raise ValueError(f"norm mismatch for {self.a}+{self.b}i")
        if self.norm % 4 != 1:
            raise ValueError(f"norm {self.norm} is not 1 mod 4")

    def __repr__(self):
        return f"GaussianPrime({self.a}+{self.b}i, norm={self.norm})"


def _decompose_direct(p: int) -> tuple[int, int]:
    for b in range(1, isqrt(p // 2) + 1):
        a2 = p - b * b
        a = isqrt(a2)
        if a * a == a2:
            return a, b
    raise ValueError(f"{p} is not a sum of two squares")


def _decompose_cornacchia(p: int) -> tuple[int, int]:
    # square root of -1 mod p from a quadratic non-residue
    n = 2
    while pow(n, (p - 1) // 2, p) != p - 1:
        n += 1
    z = pow(n, (p - 1) // 4, p)
    z = min(z, p - z)
    r0, r1 = p, z
    while r1 * r1 > p:
        r0, r1 = r1, r0 % r1
    a, b = r1, r0 % r1
    if a * a + b * b != p:
        raise ValueError(f"decomposition failed for {p}")
    return (a, b) if a > b else (b, a)


def decompose_norm(p: int) -> tuple[int, int]:
    """Return (a, b) with a > b > 0 and a^2 + b^2 = p, for prime p = 1 mod 4."""
    if p <= _DIRECT_SEARCH_LIMIT:
        a, b = _decompose_direct(p)
    else:
        a, b = _decompose_cornacchia(p)
    if not a > b > 0:
        raise ValueError(f"degenerate decomposition of {p}")
    return a, b


def primes_one_mod_four(lo: int, hi: int) -> np.ndarray:
    """Rational primes p = 1 (mod 4) with lo <= p < hi, ascending."""
    if hi <= 5:
        return np.empty(0, dtype=np.int64)
    sieve = np.ones(hi, dtype=bool)
    sieve[:2] = False
    for q in range(2, isqrt(hi - 1) + 1):
        if sieve[q]:
            sieve[q * q::q] = False
    pr = np.flatnonzero(sieve).astype(np.int64)
    pr = pr[pr % 4 == 1]
    return pr[pr >= lo]


def sieve_gaussian_primes(max_norm: int) -> list[GaussianPrime]:
    """All first-octant Gaussian primes with norm <= max_norm, norm-ascending."""
    if max_norm < 5:
        return []
    out = []
    for p in primes_one_mod_four(5, max_norm + 1):
        a, b = decompose_norm(int(p))
        out.append(GaussianPrime(int(p), a, b))
    return out


# ---------------------------------------------------------------------------
# Certified arguments
# ---------------------------------------------------------------------------

# per-prime cache of the tightest enclosure computed so far: (prec, lo, hi, exp)
_theta_cache: dict[tuple[int, int], tuple[int, int, int, int]] = {}


def _theta_tight(p: GaussianPrime, prec: int) -> DyadicInterval:
    """Enclosure of arctan(b/a)/(2*pi) with width <= 2^-prec, cached."""
    key = (p.a, p.b)
    got = _theta_cache.get(key)
    if got is not None and got[0] >= prec:
        return DyadicInterval(got[1], got[2], got[3])
    w = prec + 8
    at = atan_fraction(p.b, p.a, w)
    th = at.div(pi_interval(w).mul_int(2), w).round(prec + 2)
    _theta_cache[key] = (prec, th.lo, th.hi, th.exp)
    return th


def theta_interval(p: GaussianPrime, precision_bits: int) -> DyadicInterval:
    """Certified enclosure of theta(p), width <= 2^-precision_bits.

    The returned interval is symmetrically padded so that recomputing at
    any higher precision always yields a nested (contained) interval.
    """
    if precision_bits < 8:
        raise ValueError("precision_bits must be >= 8")
    tight = _theta_tight(p, precision_bits + 6)
    pad = DyadicInterval(-1, 1, -(precision_bits + 2))
    return tight + pad


def alpha_theta_interval(alpha: Fraction, p: GaussianPrime,
                         prec: int) -> DyadicInterval:
    """Enclosure of alpha * theta(p) at width <= 2^-prec."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    extra = max(0, alpha.numerator.bit_length() - alpha.denominator.bit_length()) + 2
    return _theta_tight(p, prec + extra).mul_fraction(alpha, prec)


def certified_digits(alpha: Fraction, p: GaussianPrime,
                     count: int) -> tuple[int, ...]:
    """First `count` binary digits of alpha*theta(p), certified.

    Escalates precision until the enclosure does not straddle a multiple
    of 2^-count; alpha*theta(p) is irrational, so this terminates (or
    raises PrecisionCapExceeded at the configured cap).
    """
    if count < 1:
        raise ValueError("count must be positive")

    def attempt(bits):
        iv = alpha_theta_interval(alpha, p, bits)
        scaled = iv.scale_pow2(count)
        grid = scaled.floor_unique()
        if grid is None:
            return None
        return grid

    m = escalate(count + 8, attempt, what=f"digits of {alpha}*theta({p.a}+{p.b}i)")
    return tuple((m >> (count - 1 - i)) & 1 for i in range(count))


def theta_product_norm_root(norms_product: int, prec: int) -> DyadicInterval:
    """Enclosure of sqrt of an integer product of norms (|p_1 ... p_k|)."""
    return sqrt_int_interval(norms_product, prec)


def theta_floor(p: GaussianPrime, scale_bits: int) -> int:
    """floor(theta(p) * 2^scale_bits), certified by escalation."""

    def attempt(bits):
        return _theta_tight(p, bits).scale_pow2(scale_bits).floor_unique()

    return escalate(scale_bits + 8, attempt,
                    what=f"floor(2^{scale_bits}*theta({p.a}+{p.b}i))")


def theta_bounds_int(p: GaussianPrime, scale_bits: int) -> tuple[int, int]:
    """Integers (lo, hi) with lo*2^-s <= theta(p) <= hi*2^-s, hi-lo small."""
    iv = _theta_tight(p, scale_bits + 2)
    s = iv.shift_to(-scale_bits) if iv.exp > -scale_bits else iv.round(scale_bits)
    return s.lo, s.hi
