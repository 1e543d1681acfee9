"""Shell-indexed big-integer encoding of Gaussian prime arguments.

Primes are grouped into shells P_K by norm window
[2^((K-2)^2/c), 2^((K-1)^2/c)); the first K^2 binary digits of
alpha*theta(p) are packed into blocks Delta_1..Delta_K (block j holds
digit places (j-1)^2+1 .. j^2, so 2j-1 bits), and the encoded integer is

    b = 2^(K^2+(2d+1)K+(d+1)) + sum_j Delta_j * 2^((j-1)^2+(2d+1)(j-1))

with d = ceil(log2 h).  The top power-of-two term marks the shell; the
2d+1 zero bits between blocks absorb all carries when up to h encoded
integers are added, which is what makes collision analysis blockwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import (DyadicInterval, escalate, exp2_interval, log2_int,
                     sqrt_int_interval)
from .errors import MalformedEncoding, ShellTooSmall
from .gaussian_core import (GaussianPrime, certified_digits, decompose_norm,
                            primes_one_mod_four)


def growth_parameter_interval(h: int, prec: int) -> DyadicInterval:
    """Enclosure of c = sqrt((h-1)^2 + 1) + (h-1)."""
    g = h - 1
    return sqrt_int_interval(g * g + 1, prec) + DyadicInterval.from_int(g)


@dataclass(frozen=True, slots=True)
class ShellConfig:
    """Parameters fixing one construction run: order h, rational alpha."""

    h: int
    alpha: Fraction

    def __post_init__(self):
        if self.h not in (2, 3, 4):
            raise ValueError("h must be 2, 3 or 4")
        if not (1 <= self.alpha <= 2):
            raise ValueError("alpha must lie in [1, 2]")

    @property
    def d(self) -> int:
        return (self.h - 1).bit_length()   # ceil(log2 h) for h >= 2

    @property
    def c_poly(self) -> tuple[int, int, int]:
        """Coefficients (c0, c1, c2) of the minimal polynomial of c:
        c^2 - 2(h-1)c - 1 = 0."""
        return (-1, -2 * (self.h - 1), 1)

    def c_interval(self, prec: int = 64) -> DyadicInterval:
        return growth_parameter_interval(self.h, prec)

    def marker_position(self, K: int) -> int:
        d = self.d
        return K * K + (2 * d + 1) * K + (d + 1)

    def block_offset(self, j: int) -> int:
        return (j - 1) * (j - 1) + (2 * self.d + 1) * (j - 1)


def make_config(h: int, alpha=Fraction(1)) -> ShellConfig:
    return ShellConfig(h, Fraction(alpha))


@dataclass(frozen=True, slots=True)
class BlockVector:
    """Digit blocks Delta_1..Delta_K of a truncated expansion."""

    K: int
    blocks: tuple[int, ...]

    def __post_init__(self):
        if len(self.blocks) != self.K:
            raise ValueError("need exactly K blocks")
        for j, blk in enumerate(self.blocks, start=1):
            if not 0 <= blk < 1 << (2 * j - 1):
                raise ValueError(f"block {j} out of range: {blk}")

    def truncation(self) -> Fraction:
        """The truncated value sum_j Delta_j * 2^(-j^2)."""
        return sum((Fraction(blk, 1 << j * j)
                    for j, blk in enumerate(self.blocks, start=1)),
                   Fraction(0))

    def truncation_numerator(self) -> int:
        """Truncation scaled by 2^(K^2), an exact integer."""
        K2 = self.K * self.K
        return sum(blk << (K2 - j * j)
                   for j, blk in enumerate(self.blocks, start=1))


@dataclass(frozen=True, slots=True)
class EncodedElement:
    """One encoded integer b with its provenance."""

    prime: GaussianPrime
    K: int
    t: int
    b: int
    block_vector: BlockVector

    def __repr__(self):
        return (f"EncodedElement(K={self.K}, prime={self.prime.a}+{self.prime.b}i,"
                f" b~2^{self.b.bit_length() - 1})")


# ---------------------------------------------------------------------------
# Shell windows
# ---------------------------------------------------------------------------

def shell_bounds(cfg: ShellConfig, K: int,
                 prec: int = 64) -> tuple[DyadicInterval, DyadicInterval]:
    """Enclosures of the norm window [2^((K-2)^2/c), 2^((K-1)^2/c))."""
    if K < cfg.h + 1:
        raise ShellTooSmall(f"K={K} below minimum {cfg.h + 1} for h={cfg.h}")
    c = cfg.c_interval(prec + 16)
    lo = exp2_interval(DyadicInterval.from_int((K - 2) ** 2).div(c, prec + 16), prec)
    hi = exp2_interval(DyadicInterval.from_int((K - 1) ** 2).div(c, prec + 16), prec)
    return lo, hi


def _boundary_ceil(cfg: ShellConfig, exponent_num: int) -> int:
    """Smallest integer >= 2^(exponent_num / c); the bound is irrational
    for exponent_num > 0, so the ceiling is eventually decided exactly."""
    if exponent_num == 0:
        return 1

    def attempt(bits):
        c = cfg.c_interval(bits)
        iv = exp2_interval(DyadicInterval.from_int(exponent_num).div(c, bits), bits)
        fl = iv.floor_unique()
        if fl is None:
            return None
        return fl + 1

    return escalate(64, attempt, what=f"shell boundary 2^({exponent_num}/c)")


def shell_norm_range(cfg: ShellConfig, K: int) -> tuple[int, int]:
    """Integer norms n admitted to shell K form [lo, hi) with these bounds."""
    if K < cfg.h + 1:
        raise ShellTooSmall(f"K={K} below minimum {cfg.h + 1} for h={cfg.h}")
    return (_boundary_ceil(cfg, (K - 2) ** 2), _boundary_ceil(cfg, (K - 1) ** 2))


def shell_norm_membership(cfg: ShellConfig, norm: int, K: int) -> bool:
    """Exact membership test of an integer norm in shell K's window."""
    lo, hi = shell_norm_range(cfg, K)
    return lo <= norm < hi


def shell_prime_count(cfg: ShellConfig, K: int) -> int:
    """|P_K| without materializing decompositions."""
    lo, hi = shell_norm_range(cfg, K)
    return int(primes_one_mod_four(lo, hi).size)


def primes_in_shell(cfg: ShellConfig, K: int) -> list[GaussianPrime]:
    """Gaussian primes of shell K, sorted by norm."""
    lo, hi = shell_norm_range(cfg, K)
    out = []
    for p in primes_one_mod_four(lo, hi):
        a, b = decompose_norm(int(p))
        out.append(GaussianPrime(int(p), a, b))
    return out


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def digits_to_blocks(K: int, digits: tuple[int, ...]) -> BlockVector:
    """Pack K^2 leading digits into blocks (digit places (j-1)^2+1 .. j^2)."""
    if len(digits) < K * K:
        raise ValueError("need K^2 digits")
    blocks = []
    for j in range(1, K + 1):
        val = 0
        for i in range((j - 1) * (j - 1) + 1, j * j + 1):
            val = (val << 1) | digits[i - 1]
        blocks.append(val)
    return BlockVector(K, tuple(blocks))


def truncated_expansion(cfg: ShellConfig, p: GaussianPrime, K: int) -> BlockVector:
    """Blocks of the K^2-digit truncation of alpha*theta(p)."""
    if K < cfg.h + 1:
        raise ShellTooSmall(f"K={K} below minimum {cfg.h + 1}")
    return digits_to_blocks(K, certified_digits(cfg.alpha, p, K * K))


def assemble(cfg: ShellConfig, K: int, blocks: tuple[int, ...]) -> tuple[int, int]:
    """(t, b) from blocks, per the marker/offset layout."""
    t = 1 << cfg.marker_position(K)
    b = t
    for j, blk in enumerate(blocks, start=1):
        b += blk << cfg.block_offset(j)
    return t, b


def encode_element(cfg: ShellConfig, p: GaussianPrime, K: int) -> EncodedElement:
    bv = truncated_expansion(cfg, p, K)
    t, b = assemble(cfg, K, bv.blocks)
    return EncodedElement(p, K, t, b, bv)


def decode_element(cfg: ShellConfig, b: int) -> tuple[int, BlockVector]:
    """Invert the bit layout; raises MalformedEncoding on any violation."""
    if b <= 0:
        raise MalformedEncoding("non-positive value")
    pos = b.bit_length() - 1
    d = cfg.d
    # solve K^2 + (2d+1)K + (d+1) = pos for integer K
    disc = (2 * d + 1) ** 2 + 4 * (pos - (d + 1))
    if disc < 0:
        raise MalformedEncoding(f"marker bit at {pos} matches no shell")
    from math import isqrt
    r = isqrt(disc)
    if r * r != disc or (r - (2 * d + 1)) % 2 != 0:
        raise MalformedEncoding(f"marker bit at {pos} matches no shell")
    K = (r - (2 * d + 1)) // 2
    if K < cfg.h + 1:
        raise MalformedEncoding(f"decoded K={K} below minimum {cfg.h + 1}")
    rest = b - (1 << pos)
    blocks = []
    for j in range(1, K + 1):
        off = cfg.block_offset(j)
        blocks.append((rest >> off) & ((1 << (2 * j - 1)) - 1))
    bv = BlockVector(K, tuple(blocks))
    _, rebuilt = assemble(cfg, K, bv.blocks)
    if rebuilt != b:
        raise MalformedEncoding("set bits outside marker/block windows")
    return K, bv


def build_shell(cfg: ShellConfig, K: int) -> list[EncodedElement]:
    """Encode every prime of shell K; the b values are pairwise distinct."""
    out = [encode_element(cfg, p, K) for p in primes_in_shell(cfg, K)]
    seen = {}
    for el in out:
        if el.b in seen:
            raise AssertionError(
                f"distinctness violated in shell {K}: {el.prime} vs {seen[el.b].prime}")
        seen[el.b] = el
    return out


def build_shells(cfg: ShellConfig, k_max: int,
                 k_min: int | None = None) -> dict[int, list[EncodedElement]]:
    """Shells k_min..k_max (k_min defaults to h+1), keyed by K."""
    if k_min is None:
        k_min = cfg.h + 1
    return {K: build_shell(cfg, K) for K in range(k_min, k_max + 1)}


# ---------------------------------------------------------------------------
# Sequence dump format: one JSON header line, then one JSON record per element
# ---------------------------------------------------------------------------

def dump_header(cfg: ShellConfig, k_range: tuple[int, int]) -> str:
    return json.dumps({
        "h": cfg.h,
        "alpha": f"{cfg.alpha.numerator}/{cfg.alpha.denominator}",
        "c_poly": list(cfg.c_poly),
        "K_range": list(k_range),
    })


def dump_element(el: EncodedElement) -> str:
    return json.dumps({
        "K": el.K,
        "a": el.prime.a,
        "b_im": el.prime.b,
        "norm": el.prime.norm,
        "b_hex": format(el.b, "x"),
    })


def write_sequence(path, cfg: ShellConfig, elements, k_range) -> None:
    with open(path, "w") as fh:
        fh.write(dump_header(cfg, k_range) + "\n")
        for el in elements:
            fh.write(dump_element(el) + "\n")


def read_sequence(path) -> tuple[ShellConfig, tuple[int, int], list[EncodedElement]]:
    """Load a dump; re-derives each element and checks b_hex matches."""
    with open(path) as fh:
        head = json.loads(fh.readline())
        num, den = head["alpha"].split("/")
        cfg = ShellConfig(head["h"], Fraction(int(num), int(den)))
        k_range = tuple(head["K_range"])
        elements = []
        for line in fh:
            rec = json.loads(line)
            p = GaussianPrime(rec["norm"], rec["a"], rec["b_im"])
            el = encode_element(cfg, p, rec["K"])
            if format(el.b, "x") != rec["b_hex"]:
                raise MalformedEncoding(
                    f"stored b mismatch for {p}: file has {rec['b_hex']}")
            elements.append(el)
    return cfg, k_range, elements
