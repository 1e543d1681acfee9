"""Visible lattice points and exact sector counting.

A lattice point (x, y) != 0 is visible when gcd(|x|, |y|) = 1.  Sector
membership compares the point's normalized angle theta(x, y) in [0, 1)
turns against dyadic-rational turn boundaries.  Comparisons are exact:
multiples of 1/8 turn reduce to integer sign/magnitude tests, and any
other dyadic turn is decided by certified arctan enclosures with
escalation (a visible point can only sit exactly on a 1/8-multiple ray,
so escalation always terminates).  Floating point appears solely as a
prefilter with a safety band re-checked exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic import DyadicInterval, atan_fraction, escalate, pi_interval
from .errors import RadiusTooLarge

RADIUS_GUARD = 10_000


def _is_dyadic(fr: Fraction) -> bool:
    return fr.denominator & (fr.denominator - 1) == 0


@dataclass(frozen=True, slots=True)
class SectorQuery:
    """Count visible points with |v| < radius and ||theta(v) + t|| < eps.

    Angles are in turns of a full circle; radius, t and eps are dyadic
    rationals so the boundary tests stay exact.
    """

    radius: Fraction
    t: Fraction
    eps: Fraction

    def __post_init__(self):
        object.__setattr__(self, "radius", Fraction(self.radius))
        object.__setattr__(self, "t", Fraction(self.t))
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        if not 0 < self.eps < Fraction(1, 2):
            raise ValueError("eps must lie in (0, 1/2) turns")
        for fr in (self.radius, self.t, self.eps):
            if not _is_dyadic(fr):
                raise ValueError("radius, t, eps must be dyadic rationals")


def visible_points(radius) -> np.ndarray:
    """All visible lattice points with 0 < |v| < radius, except (1, 0).

    Returns an (N, 2) int64 array sorted lexicographically.  Includes all
    four quadrants and the axis points (0, +-1), (-1, 0).
    """
    radius = Fraction(radius)
    if radius > RADIUS_GUARD:
        raise RadiusTooLarge(f"radius {radius} above guard {RADIUS_GUARD}")
    r_int = math.isqrt(int(radius ** 2))    # |x|, |y| <= r_int suffices
    coords = np.arange(-r_int, r_int + 1, dtype=np.int64)
    xs, ys = np.meshgrid(coords, coords, indexing="ij")
    xs, ys = xs.ravel(), ys.ravel()
    norm2 = xs * xs + ys * ys
    r2 = radius ** 2
    # exact strict |v|^2 < radius^2 on integers scaled by the denominator
    keep = (norm2 * r2.denominator < r2.numerator) & (norm2 > 0)
    xs, ys = xs[keep], ys[keep]
    keep = np.gcd(np.abs(xs), np.abs(ys)) == 1
    xs, ys = xs[keep], ys[keep]
    keep = ~((xs == 1) & (ys == 0))
    pts = np.stack([xs[keep], ys[keep]], axis=1)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    return pts[order]


# ---------------------------------------------------------------------------
# Exact angle comparison
# ---------------------------------------------------------------------------

def _octant_split(x: int, y: int) -> tuple[int, int, int, int]:
    """(k, sign, p, q): theta(x, y) = (k + sign*arctan(p/q)/(2pi)*8)/8 turns,
    with 0 <= p <= q, i.e. the residual arctan argument within the octant."""
    if x == 0 and y == 0:
        raise ValueError("origin has no angle")
    ax, ay = abs(x), abs(y)
    if x > 0 and y >= 0:
        quad, qx, qy = 0, ax, ay
    elif x <= 0 and y > 0:
        quad, qx, qy = 1, ay, ax
    elif x < 0 and y <= 0:
        quad, qx, qy = 2, ax, ay
    else:
        quad, qx, qy = 3, ay, ax
    # within quadrant: angle from its start axis is arctan(qy/qx) in [0, pi/2)
    if qy <= qx:
        return 2 * quad, +1, qy, qx
    return 2 * quad + 2, -1, qx, qy


def theta_vs_turn(x: int, y: int, q: Fraction) -> int:
    """Sign of theta(x, y) - q for q in [0, 1) turns; exact.

    Returns -1, 0 or +1.  Equality only happens on the eight 1/8-turn
    rays; everywhere else certified escalation decides strictly.
    """
    if not 0 <= q < 1:
        raise ValueError("q must lie in [0, 1)")
    k, sign, p, den = _octant_split(x, y)
    # theta = (k/8) + sign * arctan(p/den) / (2*pi), arctan arg in [0, 1]
    if p == 0 or p == den:
        # exactly on a 1/8-multiple ray
        theta = Fraction(k, 8) + Fraction(sign, 16) * (1 if p == den else 0)
        theta %= 1
        return (theta > q) - (theta < q)
    lo_oct = Fraction(k, 8) if sign > 0 else Fraction(k, 8) - Fraction(1, 8)
    hi_oct = lo_oct + Fraction(1, 8)
    if q <= lo_oct:
        return 1
    if q >= hi_oct:
        return -1
    # strict interior comparison: arctan(p/den)/(2pi) vs sign*(q - k/8)
    target = (q - Fraction(k, 8)) * sign

    def attempt(bits):
        iv = atan_fraction(p, den, bits).div(pi_interval(bits).mul_int(2), bits)
        if iv.hi_fraction() < target:
            return -sign
        if iv.lo_fraction() > target:
            return sign
        return None

    return escalate(64, attempt, what=f"theta({x},{y}) vs {q}")


def _in_arc(x: int, y: int, lo: Fraction, hi: Fraction) -> bool:
    """Is theta(x, y) strictly inside the arc (lo, hi) mod 1, hi-lo < 1?"""
    lo %= 1
    hi %= 1
    if lo < hi:
        return theta_vs_turn(x, y, lo) > 0 and theta_vs_turn(x, y, hi) < 0
    return theta_vs_turn(x, y, lo) > 0 or theta_vs_turn(x, y, hi) < 0


def count_in_sector(q: SectorQuery) -> int:
    """Exact #{v visible, |v| < R, ||theta(v) + t|| < eps}.

    A float prefilter classifies points whose distance to the arc
    boundary exceeds a 2^-40 safety band; the remainder go through the
    exact comparison.
    """
    pts = visible_points(q.radius)
    if len(pts) == 0:
        return 0
    lo = (-q.t - q.eps) % 1
    hi = (-q.t + q.eps) % 1
    theta = np.arctan2(pts[:, 1], pts[:, 0]) / (2 * math.pi) % 1.0
    band = 2.0 ** -40
    flo, fhi = float(lo), float(hi)
    if flo < fhi:
        inside = (theta > flo) & (theta < fhi)
        near = (np.abs(theta - flo) < band) | (np.abs(theta - fhi) < band)
    else:
        inside = (theta > flo) | (theta < fhi)
        near = (np.abs(theta - flo) < band) | (np.abs(theta - fhi) < band) \
            | (theta < band) | (theta > 1 - band)
    count = int(np.count_nonzero(inside & ~near))
    for x, y in pts[near]:
        if _in_arc(int(x), int(y), lo, hi):
            count += 1
    return count


def sector_report(q: SectorQuery, prec: int = 64) -> dict:
    """Count plus both analytic bound forms.

    The proof's form bounds the count by (angular width in radians)*R^2+1;
    the turns form plugs the turn-width directly (width 2*eps turns =
    4*pi*eps radians).  Bounds are certified from above so the reported
    comparison never flatters the count.
    """
    count = count_in_sector(q)
    r2 = q.radius ** 2
    pi_hi = pi_interval(prec).hi_fraction()
    radian_width = 4 * pi_hi * q.eps
    return {
        "count": count,
        "radius": float(q.radius),
        "t": float(q.t),
        "eps": float(q.eps),
        "bound_radian_form": float(radian_width * r2 + 1),
        "bound_turns_form": float(2 * q.eps * r2 + 1),
    }


def sector_bound_holds(q: SectorQuery) -> bool:
    """count <= (4*pi*eps)*R^2 + 1, certified (pi taken from below)."""
    count = count_in_sector(q)

    def attempt(bits):
        pi_lo = pi_interval(bits).lo_fraction()
        pi_hi = pi_interval(bits).hi_fraction()
        lo_bound = 4 * pi_lo * q.eps * q.radius ** 2 + 1
        hi_bound = 4 * pi_hi * q.eps * q.radius ** 2 + 1
        if count <= lo_bound:
            return True
        if count > hi_bound:
            return False
        return None

    return escalate(64, attempt, what="sector bound comparison")
