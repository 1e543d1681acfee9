"""Finite B_h sets { floor(x*theta(p)) : norm(p)^h * 7h <= x }.

The admission rule norm <= (x/(7h))^(1/h) is decided exactly on integers
(7h * norm^h <= x); the floors come from certified enclosures of
x*theta(p), escalating precision whenever an enclosure straddles an
integer (theta is irrational, so this terminates).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dyadic import escalate
from .gaussian_core import (GaussianPrime, sieve_gaussian_primes,
                            theta_interval)


@dataclass(frozen=True, slots=True)
class FiniteBhSet:
    h: int
    x: int
    elements: tuple[int, ...]          # sorted, duplicates collapsed
    source_primes: tuple[GaussianPrime, ...]


def admissible_max_norm(x: int, h: int) -> int:
    """Largest integer norm with 7h * norm^h <= x."""
    n = int((x / (7 * h)) ** (1.0 / h)) + 2
    while 7 * h * n ** h > x:
        n -= 1
    return n


def floor_x_theta(x: int, p: GaussianPrime) -> int:
    """floor(x * theta(p)) via certified escalation."""

    def attempt(bits):
        return theta_interval(p, bits).mul_int(x).floor_unique()

    return escalate(x.bit_length() + 16, attempt,
                    what=f"floor({x}*theta({p.a}+{p.b}i))")


def build_finite_bh(x: int, h: int) -> FiniteBhSet:
    if h not in (2, 3, 4):
        raise ValueError("h must be 2, 3 or 4")
    if x < 7 * h * 25:
        raise ValueError(f"x={x} too small: need x >= {7 * h * 25}")
    primes = sieve_gaussian_primes(admissible_max_norm(x, h))
    elements = sorted({floor_x_theta(x, p) for p in primes})
    return FiniteBhSet(h, x, tuple(elements), tuple(primes))


def density_report(s: FiniteBhSet) -> dict:
    """count, x and the normalized ratio count * x^(-1/h) * ln(x)."""
    count = len(s.elements)
    ratio = count * s.x ** (-1.0 / s.h) * math.log(s.x) if count else 0.0
    return {"h": s.h, "x": s.x, "count": count, "ratio": ratio}
