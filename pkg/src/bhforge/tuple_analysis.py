"""Tuple-level predicates and the empirical alpha-grid scan.

Covers three layers of checking:

* separation of argument sums: |sum theta(p_r) - theta(p'_r)| exceeds
  1/(7 |p_1 ... p'_h|) for distinct first-octant Gaussian primes, decided
  by certified enclosures;
* certification of collision records: shell matching, exact equality of
  truncated expansions, the omega window bounds, the shell-growth
  inequality and the dyadic-approximation condition, all on enclosures;
* the alpha scan: over a dyadic grid of alpha in [1,2], count bad
  2l-tuples per top shell, certify each, and report trapezoid integral
  estimates beside the analytic reference curves.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bh_verifier import (DEFAULT_BUDGET, CollisionRecord, _make_record,
                          find_collisions)
from .dyadic import DyadicInterval, escalate, exp2_interval
from .errors import PrecisionCapExceeded, SearchBudgetExceeded, Undecided
from .gaussian_core import (GaussianPrime, certified_digits, theta_bounds_int,
                            theta_interval, theta_product_norm_root)
from .pairsum import pair_sum_clusters
from .shell_encoding import (EncodedElement, ShellConfig, encode_element,
                             make_config, primes_in_shell)

_SCAN_THETA_BITS = 60   # scale of the integer theta proxies in the fast scan


# ---------------------------------------------------------------------------
# Omega profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class OmegaProfile:
    """Partial sums omega_s = sum_{r<=s} (theta(p_r) - theta(p'_r))."""

    left: tuple[GaussianPrime, ...]
    right: tuple[GaussianPrime, ...]
    omegas: tuple[DyadicInterval, ...]


def omega_profile(left, right, prec: int) -> OmegaProfile:
    if len(left) != len(right):
        raise ValueError("sides must have equal length")
    omegas = []
    acc = DyadicInterval.from_int(0)
    for p, q in zip(left, right):
        acc = acc + (theta_interval(p, prec) - theta_interval(q, prec))
        omegas.append(acc)
    return OmegaProfile(tuple(left), tuple(right), tuple(omegas))


# ---------------------------------------------------------------------------
# Separation check
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class SeparationResult:
    holds: bool
    margin: float          # lower(|lhs|) - upper(rhs); negative if violated
    bits: int              # precision at which the comparison separated


def check_separation(primes, start_bits: int = 64) -> SeparationResult:
    """Certify |sum(theta(p_r) - theta(p'_r))| > 1/(7 |p_1 ... p'_h|).

    `primes`: 2h distinct first-octant Gaussian primes; the first h are
    the p_r, the rest the p'_r.  Raises Undecided at the precision cap.
    """
    primes = tuple(primes)
    if len(primes) % 2 or len(primes) < 2:
        raise ValueError("need 2h primes")
    if len({(p.a, p.b) for p in primes}) != len(primes):
        raise ValueError("primes must be distinct")
    h = len(primes) // 2
    prod = math.prod(p.norm for p in primes)

    def attempt(bits):
        lhs = DyadicInterval.from_int(0)
        for r in range(h):
            lhs = lhs + (theta_interval(primes[r], bits)
                         - theta_interval(primes[h + r], bits))
        lhs = lhs.abs()
        rhs = DyadicInterval.from_int(1).div(
            theta_product_norm_root(prod, bits).mul_int(7), bits)
        if lhs.certainly_gt(rhs):
            return SeparationResult(
                True, float(lhs.lo_fraction() - rhs.hi_fraction()), bits)
        if lhs.certainly_lt(rhs):
            return SeparationResult(
                False, float(lhs.hi_fraction() - rhs.lo_fraction()), bits)
        return None

    try:
        return escalate(start_bits, attempt, what="separation inequality")
    except PrecisionCapExceeded as exc:
        raise Undecided(str(exc), bits=exc.bits) from exc


# ---------------------------------------------------------------------------
# Collision certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class BadTupleCertificate:
    record: CollisionRecord
    profile: OmegaProfile
    checks: dict

    @property
    def undecided(self) -> tuple[str, ...]:
        return tuple(k for k, v in self.checks.items() if v is None)

    @property
    def valid(self) -> bool:
        return all(v is True for v in self.checks.values())


def _tri_state(attempt, what: str):
    """Escalate a tri-state predicate; None at cap means undecided."""
    try:
        return escalate(64, attempt, what=what)
    except PrecisionCapExceeded:
        return None


def certify(record: CollisionRecord, cfg: ShellConfig) -> BadTupleCertificate:
    """Check a collision record against every tuple-level lemma predicate."""
    left, right, l = record.left, record.right, record.l
    if not all(isinstance(e, EncodedElement) for e in left + right):
        raise ValueError("certification needs encoded elements")
    checks: dict = {}

    # shell matching and exact truncated-expansion equality
    shells = tuple(e.K for e in left)
    checks["shell_matching"] = shells == tuple(e.K for e in right)
    lsum = sum(e.block_vector.truncation() for e in left)
    rsum = sum(e.block_vector.truncation() for e in right)
    checks["truncation_equality"] = lsum == rsum

    lp = tuple(e.prime for e in left)
    rp = tuple(e.prime for e in right)
    K_l = shells[-1]
    alpha = cfg.alpha

    def omega(s, bits):
        acc = DyadicInterval.from_int(0)
        for r in range(s):
            acc = acc + (theta_interval(lp[r], bits)
                         - theta_interval(rp[r], bits))
        return acc

    # |omega_l| <= l * 2^-(K_l^2)
    bound_i = Fraction(l, 1 << K_l * K_l)

    def att_i(bits):
        iv = omega(l, bits + K_l * K_l).abs()
        if iv.hi_fraction() <= bound_i:
            return True
        if iv.lo_fraction() > bound_i:
            return False
        return None

    checks["omega_l_small"] = _tri_state(att_i, "omega_l bound")

    # |omega_{l-1}| >= 2^(-(K_l-1)^2/c - 4)
    def att_ii(bits):
        iv = omega(l - 1, bits).abs()
        expo = -(DyadicInterval.from_int((K_l - 1) ** 2).div(
            cfg.c_interval(bits), bits)) - DyadicInterval.from_int(4)
        rhs = exp2_interval(expo, bits)
        if iv.lo_fraction() >= rhs.hi_fraction():
            return True
        if iv.hi_fraction() < rhs.lo_fraction():
            return False
        return None

    checks["omega_prev_large"] = _tri_state(att_ii, "omega_{l-1} bound")

    # (K_l-1)^2 * (c-1) <= sum_{r<l} (K_r-1)^2
    rhs_iii = sum((K - 1) ** 2 for K in shells[:-1])

    def att_iii(bits):
        lhs = (cfg.c_interval(bits) - DyadicInterval.from_int(1)).mul_int(
            (K_l - 1) ** 2)
        if lhs.hi_fraction() <= rhs_iii:
            return True
        if lhs.lo_fraction() > rhs_iii:
            return False
        return None

    checks["shell_growth"] = _tri_state(att_iii, "shell growth inequality")

    # || alpha 2^(K_{s+1}^2) omega_s || <= s 2^(K_{s+1}^2 - K_s^2), s=1..l-1
    for s in range(1, l):
        K_next, K_s = shells[s], shells[s - 1]
        bound = Fraction(s) * Fraction(2) ** (K_next ** 2 - K_s ** 2)
        name = f"dyadic_approx_s{s}"
        if bound >= Fraction(1, 2):
            checks[name] = True      # distance to nearest integer <= 1/2
            continue

        def att_c(bits, s=s, K_next=K_next, bound=bound):
            iv = omega(s, bits + K_next ** 2 + 4).scale_pow2(K_next ** 2)
            iv = iv.mul_fraction(alpha, bits)
            if not iv.width_leq(2):
                return None
            mid = (iv.lo_fraction() + iv.hi_fraction()) / 2
            n = round(mid)
            diff = (iv - DyadicInterval.from_int(n)).abs()
            if diff.hi_fraction() <= bound:
                return True
            lo_f, hi_f = iv.lo_fraction(), iv.hi_fraction()
            if (n - Fraction(1, 2) < lo_f and hi_f < n + Fraction(1, 2)
                    and diff.lo_fraction() > bound):
                return False
            return None

        checks[name] = _tri_state(att_c, name)

    profile = omega_profile(lp, rp, 64 + K_l * K_l)
    return BadTupleCertificate(record, profile, checks)


# ---------------------------------------------------------------------------
# Visible reduction of prime products
# ---------------------------------------------------------------------------

def visible_reduction(factors) -> tuple[int, int]:
    """Gaussian-integer product with stated conjugations, made primitive.

    `factors`: iterable of (GaussianPrime, conjugate: bool).  Returns the
    visible representative (x/g, y/g), g = gcd(|x|, |y|).
    """
    x, y = 1, 0
    n = 0
    for p, conj in factors:
        a, b = p.a, -p.b if conj else p.b
        x, y = x * a - y * b, x * b + y * a
        n += 1
    if n == 0:
        raise ValueError("empty factor list")
    g = math.gcd(abs(x), abs(y))
    return x // g, y // g


# ---------------------------------------------------------------------------
# Alpha-grid scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ScanRow:
    alpha: Fraction
    K: int
    l: int
    count: int
    undecided: int
    budget_flag: bool


@dataclass(slots=True)
class ScanResult:
    h: int
    k_max: int
    step: Fraction
    rows: list
    shell_sizes: dict
    records: list                       # (alpha, CollisionRecord)
    certificates: list                  # aligned with records when certified
    integral_estimates: dict            # (K, l) -> trapezoid estimate
    reference_curves: dict              # label -> {(K, l): value}

    def mean_counts(self) -> dict:
        """(K, l) -> mean count over the alpha grid (flagged rows excluded)."""
        acc: dict = {}
        ns: dict = {}
        for row in self.rows:
            if row.budget_flag:
                continue
            key = (row.K, row.l)
            acc[key] = acc.get(key, 0) + row.count
            ns[key] = ns.get(key, 0) + 1
        return {k: acc[k] / ns[k] for k in acc}


def _alpha_grid(step: Fraction) -> list[Fraction]:
    if step <= 0 or Fraction(1) % step != 0:
        raise ValueError("step must divide 1 exactly")
    if step < Fraction(1, 1 << 12):
        raise ValueError("grid step below 2^-12")
    n = int(Fraction(1) / step)
    return [1 + Fraction(k) * step for k in range(n + 1)]


def _reference_curves(h: int, k_range, ls) -> dict:
    g = h - 1
    c = math.sqrt(g * g + 1) + g
    curves: dict = {}
    for label, denom, kpow in (
            ("prop_bound_stated", c - 1, {2: 1, 3: 2, 4: 2}),
            ("prop_bound_final", c - 1, {2: 1, 3: 4, 4: 5}),
            ("lemma_integral_bound", c, {2: 1, 3: 1, 4: 1})):
        vals = {}
        for K in k_range:
            for l in ls:
                expo = (2 * (l - 1) / denom - 1) * (K - 1) ** 2 - 2 * K
                vals[(K, l)] = K ** kpow[l] * 2.0 ** expo
        curves[label] = vals
    return curves


class _ShellThetaTable:
    """Per-shell integer theta data: 2^60-scale proxies for the batched
    near-coincidence scan, and tighter bounds for exact per-alpha
    truncation extraction."""

    def __init__(self, cfg: ShellConfig, K: int):
        self.K = K
        self.K2 = K * K
        self.primes = primes_in_shell(cfg, K)
        self.scale = max(self.K2 + 30, _SCAN_THETA_BITS + 4)
        bounds = [theta_bounds_int(p, self.scale) for p in self.primes]
        self.lo = [b[0] for b in bounds]
        self.hi = [b[1] for b in bounds]
        shift = self.scale - _SCAN_THETA_BITS
        self.proxy = np.array([lo >> shift for lo in self.lo], dtype=np.int64)

    def _refresh(self, idx: int) -> None:
        lo, hi = theta_bounds_int(self.primes[idx], self.scale + 32)
        self.lo[idx] = lo >> 32
        self.hi[idx] = -((-hi) >> 32)

    def truncations(self, alpha: Fraction, q_bits: int) -> list[int]:
        """Exact floor(alpha * theta * 2^(K^2)) per prime; alpha*2^q_bits
        must be an integer."""
        num = alpha.numerator * ((1 << q_bits) // alpha.denominator)
        if num * alpha.denominator != alpha.numerator << q_bits:
            raise ValueError("alpha does not live on the 2^-q grid")
        shift = self.scale + q_bits - self.K2
        out = []
        for i in range(len(self.primes)):
            tlo = (num * self.lo[i]) >> shift
            thi = (num * self.hi[i]) >> shift
            if tlo != thi:
                self._refresh(i)
                tlo = (num * self.lo[i]) >> shift
                thi = (num * self.hi[i]) >> shift
                if tlo != thi:
                    digs = certified_digits(alpha, self.primes[i], self.K2)
                    tlo = int("".join(map(str, digs)), 2)
            out.append(tlo)
        return out


def _candidate_quads_same_shell(table: _ShellThetaTable) -> list[tuple]:
    """Alpha-independent candidate quadruples ((i,j),(i2,j2)) in one shell.

    A b-sum collision at any alpha in [1,2] forces
    |theta_i + theta_j - theta_i2 - theta_j2| < 2*2^-(K^2), so the 2^60
    proxies satisfy |pair-sum difference| <= 2^(61-K^2) + 4.
    """
    tol = (1 << max(0, _SCAN_THETA_BITS + 1 - table.K2)) + 4
    order = np.argsort(table.proxy, kind="stable")
    vals = table.proxy[order]
    quads = set()
    for cluster in pair_sum_clusters(vals, tol=int(tol)):
        for x, y in itertools.combinations(cluster, 2):
            if abs(x[2] - y[2]) > tol:
                continue
            a = (int(order[x[0]]), int(order[x[1]]))
            b = (int(order[y[0]]), int(order[y[1]]))
            if set(a) & set(b):
                continue
            quads.add((a, b) if a <= b else (b, a))
    return sorted(quads)


def _cross_shell_records(cfg, t1: _ShellThetaTable, t2: _ShellThetaTable,
                         T1: list[int], T2: list[int], out: list) -> None:
    """Records pairing shell t1.K with shell t2.K < t1.K at one alpha."""
    n1, m = len(T1), len(T2)
    if n1 < 2 or m < 1:
        return
    shift = t1.K2 - t2.K2
    mask = (1 << shift) - 1
    tails: dict[int, list[int]] = {}
    for i, t in enumerate(T1):
        tails.setdefault(t & mask, []).append(i)
    cand = [(i, j) for grp in tails.values() if len(grp) > 1
            for i, j in itertools.combinations(grp, 2)]
    if not cand:
        return
    diffs = sorted((T2[a] - T2[b], a, b)
                   for a in range(m) for b in range(m) if a != b)
    dvals = [d[0] for d in diffs]
    for i, j in cand:
        delta = (T1[j] >> shift) - (T1[i] >> shift)
        if delta == 0:
            continue
        lo = bisect_left(dvals, delta)
        while lo < len(dvals) and dvals[lo] == delta:
            _, a, b = diffs[lo]
            ei = encode_element(cfg, t1.primes[i], t1.K)
            ej = encode_element(cfg, t1.primes[j], t1.K)
            ea = encode_element(cfg, t2.primes[a], t2.K)
            eb = encode_element(cfg, t2.primes[b], t2.K)
            if ei.b + ea.b == ej.b + eb.b:
                out.append(_make_record((ei, ea), (ej, eb)))
            lo += 1


def _scan_fast_h2(grid, k_max: int, step: Fraction, budget: int,
                  do_certify: bool) -> ScanResult:
    """Batched scan for h=2.

    One near-coincidence pass over the alpha-independent theta proxies
    yields all same-shell candidate quadruples for every grid alpha at
    once; per alpha only exact truncation extraction, candidate checks
    and cross-shell tail grouping remain.  Output is identical to the
    direct per-alpha search.
    """
    h = 2
    q_bits = (step.denominator - 1).bit_length()
    base_cfg = make_config(h, Fraction(1))
    tables = {K: _ShellThetaTable(base_cfg, K) for K in range(h + 1, k_max + 1)}
    shell_sizes = {K: len(t.primes) for K, t in tables.items()}

    # largest K whose cumulative union still fits the enumeration budget
    cum = 0
    k_feasible = h
    for K in range(h + 1, k_max + 1):
        cum += shell_sizes[K]
        if math.comb(cum + 1, 2) > budget:
            break
        k_feasible = K

    cand_same = {K: _candidate_quads_same_shell(tables[K])
                 for K in range(h + 1, k_feasible + 1)}

    rows: list[ScanRow] = []
    records = []
    certs = []
    counts_grid: dict = {}
    for alpha in grid:
        cfg = make_config(h, alpha)
        trunc = {K: tables[K].truncations(alpha, q_bits)
                 for K in range(h + 1, k_feasible + 1)}
        found: list[CollisionRecord] = []

        for K in range(h + 1, k_feasible + 1):
            T = trunc[K]
            for (i, j), (i2, j2) in cand_same[K]:
                if T[i] + T[j] != T[i2] + T[j2]:
                    continue
                els = [encode_element(cfg, tables[K].primes[x], K)
                       for x in (i, j, i2, j2)]
                if els[0].b + els[1].b == els[2].b + els[3].b:
                    found.append(_make_record((els[0], els[1]),
                                              (els[2], els[3])))

        for K1 in range(h + 2, k_feasible + 1):
            for K2 in range(h + 1, K1):
                _cross_shell_records(cfg, tables[K1], tables[K2],
                                     trunc[K1], trunc[K2], found)

        per_k_counts = {K: 0 for K in range(h + 1, k_max + 1)}
        per_k_und = {K: 0 for K in range(h + 1, k_max + 1)}
        seen = set()
        for rec in found:
            key = (rec.left_values(), rec.right_values())
            if key in seen:
                continue
            seen.add(key)
            top_k = rec.shells[0]
            per_k_counts[top_k] += 1
            records.append((alpha, rec))
            if do_certify:
                cert = certify(rec, cfg)
                certs.append(cert)
                if cert.undecided:
                    per_k_und[top_k] += 1

        for K in range(h + 1, k_max + 1):
            rows.append(ScanRow(alpha, K, 2, per_k_counts[K], per_k_und[K],
                                budget_flag=K > k_feasible))
            counts_grid.setdefault((K, 2), []).append(per_k_counts[K])

    integrals = {key: float(step) * (sum(cs) - 0.5 * (cs[0] + cs[-1]))
                 for key, cs in counts_grid.items()}
    curves = _reference_curves(h, range(h + 1, k_max + 1), [2])
    return ScanResult(h, k_max, step, rows, shell_sizes, records, certs,
                      integrals, curves)


def _scan_direct(h: int, k_max: int, step: Fraction, budget: int,
                 do_certify: bool) -> ScanResult:
    """Reference scan: full find_collisions per grid alpha."""
    from .shell_encoding import build_shells
    grid = _alpha_grid(step)
    rows: list[ScanRow] = []
    records = []
    certs = []
    counts_grid: dict = {}
    shell_sizes: dict = {}
    for alpha in grid:
        cfg = make_config(h, alpha)
        shells = build_shells(cfg, k_max)
        shell_sizes = {K: len(els) for K, els in shells.items()}
        union = [el for els in shells.values() for el in els]
        flagged = False
        recs: list[CollisionRecord] = []
        try:
            recs = find_collisions(union, h, budget)
        except SearchBudgetExceeded:
            flagged = True
        per: dict = {}
        und: dict = {}
        for rec in recs:
            key = (rec.shells[0], rec.l)
            per[key] = per.get(key, 0) + 1
            records.append((alpha, rec))
            if do_certify:
                cert = certify(rec, cfg)
                certs.append(cert)
                if cert.undecided:
                    und[key] = und.get(key, 0) + 1
        for K in range(h + 1, k_max + 1):
            for l in range(2, h + 1):
                rows.append(ScanRow(alpha, K, l, per.get((K, l), 0),
                                    und.get((K, l), 0), flagged))
                counts_grid.setdefault((K, l), []).append(per.get((K, l), 0))
    integrals = {key: float(step) * (sum(cs) - 0.5 * (cs[0] + cs[-1]))
                 for key, cs in counts_grid.items()}
    curves = _reference_curves(h, range(h + 1, k_max + 1), range(2, h + 1))
    return ScanResult(h, k_max, step, rows, shell_sizes, records, certs,
                      integrals, curves)


def alpha_scan(h: int, k_max: int, step: Fraction,
               budget: int = DEFAULT_BUDGET, do_certify: bool = True,
               fast: bool = True) -> ScanResult:
    """Scan alpha over a dyadic grid of [1,2]: count bad 2l-tuples by top
    shell K <= k_max, certify found records, estimate the alpha-integrals.

    For h=2 a batched exact path is used (identical output to the direct
    per-alpha search); rows whose search would exceed `budget` carry
    budget_flag=True and an invalid zero count.
    """
    step = Fraction(step)
    grid = _alpha_grid(step)
    if h == 2 and fast:
        return _scan_fast_h2(grid, k_max, step, budget, do_certify)
    return _scan_direct(h, k_max, step, budget, do_certify)
