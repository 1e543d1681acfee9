"""Brute-force and structure-aware detection of repeated sums.

A bad 2l-tuple is a pair of disjoint l-multisets of encoded integers with
equal sums.  The exhaustive reference path enumerates l-multisets and
groups them by exact big-integer sum.  The structured path (l = 2 over
encoded elements) exploits the carry-free block layout: equal b-sums
force equal shell multisets and equal per-window block sums, so the
search decomposes by shell pair and reduces to int64 truncation-sum
coincidences, each candidate then re-checked blockwise and by exact
big-integer sum.  Both paths return identical records.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, SearchBudgetExceeded
from .pairsum import equal_pair_sum_groups, equal_pair_sum_groups_bigint
from .shell_encoding import EncodedElement, ShellConfig

DEFAULT_BUDGET = 10 ** 8


@dataclass(frozen=True, slots=True)
class CollisionRecord:
    """Two disjoint l-tuples with equal sums, each non-increasing by value.

    `left`/`right` hold EncodedElements (or plain ints for synthetic
    inputs); `shells` carries K_1 >= ... >= K_l when elements are encoded.
    """

    l: int
    left: tuple
    right: tuple
    shells: tuple | None

    def left_values(self) -> tuple[int, ...]:
        return tuple(_value(e) for e in self.left)

    def right_values(self) -> tuple[int, ...]:
        return tuple(_value(e) for e in self.right)

    def top(self):
        """The largest element involved (always left[0] by canonicality)."""
        return self.left[0]

    def validate(self) -> None:
        if len(self.left) != self.l or len(self.right) != self.l:
            raise ValueError("side lengths disagree with l")
        lv, rv = self.left_values(), self.right_values()
        if sum(lv) != sum(rv):
            raise ValueError("sides do not sum equal")
        if set(lv) & set(rv):
            raise ValueError("sides share an element")
        if list(lv) != sorted(lv, reverse=True) or list(rv) != sorted(rv, reverse=True):
            raise ValueError("sides not sorted non-increasing")
        if lv < rv:
            raise ValueError("not canonical: left must be the larger side")


def _value(e) -> int:
    return e.b if isinstance(e, EncodedElement) else int(e)


def _multiset_count(n: int, l: int) -> int:
    return math.comb(n + l - 1, l)


def check_budget(n: int, h: int, budget: int = DEFAULT_BUDGET) -> None:
    """Raise SearchBudgetExceeded unless every level l=2..h fits the budget."""
    for l in range(2, h + 1):
        c = _multiset_count(n, l)
        if c > budget:
            raise SearchBudgetExceeded(
                f"l={l} over {n} elements needs {c} enumerations"
                f" > budget {budget}")


def _make_record(sideA: tuple, sideB: tuple) -> CollisionRecord:
    a = tuple(sorted(sideA, key=_value, reverse=True))
    b = tuple(sorted(sideB, key=_value, reverse=True))
    if tuple(map(_value, a)) < tuple(map(_value, b)):
        a, b = b, a
    shells = None
    if all(isinstance(e, EncodedElement) for e in a + b):
        shells = tuple(e.K for e in a)
    return CollisionRecord(len(a), a, b, shells)


def _record_key(rec: CollisionRecord):
    return (rec.l, rec.left_values(), rec.right_values())


def _find_collisions_brute(elements, h: int) -> list[CollisionRecord]:
    """Reference path: enumerate l-multisets, group by exact sum."""
    n = len(elements)
    records = {}
    for l in range(2, h + 1):
        sums: dict[int, int] = {}
        for combo in itertools.combinations_with_replacement(range(n), l):
            s = sum(_value(elements[i]) for i in combo)
            sums[s] = sums.get(s, 0) + 1
        dup = {s for s, c in sums.items() if c >= 2}
        if not dup:
            continue
        groups: dict[int, list] = {s: [] for s in dup}
        for combo in itertools.combinations_with_replacement(range(n), l):
            s = sum(_value(elements[i]) for i in combo)
            if s in groups:
                groups[s].append(combo)
        for s in sorted(groups):
            for ca, cb in itertools.combinations(groups[s], 2):
                va = {_value(elements[i]) for i in ca}
                vb = {_value(elements[i]) for i in cb}
                if va & vb:
                    continue            # cancels to a smaller level
                rec = _make_record(tuple(elements[i] for i in ca),
                                   tuple(elements[i] for i in cb))
                records[_record_key(rec)] = rec
    return sorted(records.values(), key=_record_key)


# ---------------------------------------------------------------------------
# Structured l=2 search over encoded elements
# ---------------------------------------------------------------------------

def _pairs_same_shell(els: list[EncodedElement]) -> list[tuple]:
    """Candidate (eA1, eA2, eB1, eB2) with equal b-sums, all in one shell."""
    n = len(els)
    if n < 2:
        return []
    K = els[0].K
    T = [el.block_vector.truncation_numerator() for el in els]
    order = sorted(range(n), key=T.__getitem__)
    sorted_T = [T[i] for i in order]
    out = []
    if (K * K + 2) <= 62:
        arr = np.array(sorted_T, dtype=np.int64)
        group_iter = equal_pair_sum_groups(arr)
    else:
        group_iter = equal_pair_sum_groups_bigint(sorted_T)
    for group in group_iter:
        for (i1, j1), (i2, j2) in itertools.combinations(group, 2):
            a = (els[order[i1]], els[order[j1]])
            b = (els[order[i2]], els[order[j2]])
            if {a[0].b, a[1].b} & {b[0].b, b[1].b}:
                continue
            if a[0].b + a[1].b != b[0].b + b[1].b:
                continue            # truncation-sum carry artifact
            out.append((a, b))
    return out


def _pairs_cross_shell(top: list[EncodedElement],
                       low: list[EncodedElement]) -> list[tuple]:
    """Candidates (t1, l1, t2, l2): t in shell K1, l in shell K2 < K1."""
    if not top or not low:
        return []
    K1, K2 = top[0].K, low[0].K
    shift = K1 * K1 - K2 * K2
    tails: dict[tuple, list[int]] = {}
    heads = []
    for idx, el in enumerate(top):
        T = el.block_vector.truncation_numerator()
        heads.append(T >> shift)
        tails.setdefault(el.block_vector.blocks[K2:], []).append(idx)
    cand_pairs = [(i, j) for grp in tails.values() if len(grp) > 1
                  for i, j in itertools.combinations(grp, 2)]
    if not cand_pairs:
        return []
    T2 = [el.block_vector.truncation_numerator() for el in low]
    m = len(low)
    diffs = sorted((T2[a] - T2[b], a, b)
                   for a in range(m) for b in range(m) if a != b)
    dvals = [d[0] for d in diffs]
    out = []
    for i, j in cand_pairs:
        delta = heads[j] - heads[i]     # need T2[a] - T2[b] == delta
        if delta == 0:
            continue
        lo = bisect_right(dvals, delta - 1)
        while lo < len(dvals) and dvals[lo] == delta:
            _, a, b = diffs[lo]
            # candidate: top_i + low_a vs top_j + low_b
            if top[i].b + low[a].b == top[j].b + low[b].b:
                out.append(((top[i], low[a]), (top[j], low[b])))
            lo += 1
    return out


def _find_collisions_structured_l2(by_shell: dict[int, list[EncodedElement]]):
    out = []
    ks = sorted(by_shell, reverse=True)
    for K1 in ks:
        out.extend(_pairs_same_shell(by_shell[K1]))
        for K2 in ks:
            if K2 < K1:
                out.extend(_pairs_cross_shell(by_shell[K1], by_shell[K2]))
    return out


def find_collisions(elements, h: int,
                    budget: int = DEFAULT_BUDGET) -> list[CollisionRecord]:
    """All bad 2l-tuples, l = 2..h, among `elements` (encoded or plain ints).

    Canonical: each record once, left side lexicographically larger.
    Raises SearchBudgetExceeded if any level's multiset count exceeds
    `budget` (records found so far are attached as invalid partials).
    """
    elements = list(elements)
    check_budget(len(elements), h, budget)
    encoded = all(isinstance(e, EncodedElement) for e in elements)
    if not encoded:
        return _find_collisions_brute(elements, h)

    records = {}
    by_shell: dict[int, list[EncodedElement]] = {}
    for el in elements:
        by_shell.setdefault(el.K, []).append(el)
    for a, b in _find_collisions_structured_l2(by_shell):
        rec = _make_record(a, b)
        records[_record_key(rec)] = rec
    if h > 2:
        for rec in _find_collisions_brute(elements, h):
            if rec.l > 2:
                records[_record_key(rec)] = rec
    return sorted(records.values(), key=_record_key)


# ---------------------------------------------------------------------------
# Bad-element removal and counting
# ---------------------------------------------------------------------------

def bad_elements(shells: dict[int, list[EncodedElement]], h: int,
                 budget: int = DEFAULT_BUDGET) -> dict[int, set[EncodedElement]]:
    """Per shell, the elements that are the maximum of some collision."""
    union = [el for els in shells.values() for el in els]
    bad: dict[int, set[EncodedElement]] = {K: set() for K in shells}
    for rec in find_collisions(union, h, budget):
        top = rec.top()
        bad[top.K].add(top)
    return bad


def clean_sequence(shells: dict[int, list[EncodedElement]], h: int,
                   budget: int = DEFAULT_BUDGET,
                   verify: bool = True) -> list[EncodedElement]:
    """Union of shells minus bad elements, ascending by b.

    With verify=True the cleaned union is re-searched; one removal pass
    provably suffices, so any residual collision is an implementation bug.
    """
    bad = bad_elements(shells, h, budget)
    cleaned = [el for K, els in shells.items() for el in els
               if el not in bad[K]]
    cleaned.sort(key=lambda el: el.b)
    if verify:
        residual = find_collisions(cleaned, h, budget)
        if residual:
            raise AssertionError(
                f"cleaning left {len(residual)} collisions; this is a bug")
    return cleaned


def counting_function(sequence, x: int) -> int:
    """#{b in sequence : b <= x} for an ascending sequence of integers."""
    vals = [_value(e) for e in sequence]
    if any(vals[i] > vals[i + 1] for i in range(len(vals) - 1)):
        raise ValueError("sequence must be sorted ascending")
    return bisect_right(vals, x)


def _shell_of_value(b: int, d: int) -> int:
    pos = b.bit_length() - 1
    disc = (2 * d + 1) ** 2 + 4 * (pos - (d + 1))
    r = math.isqrt(disc)
    if r * r != disc or (r - (2 * d + 1)) % 2:
        raise ValueError(f"value with marker at bit {pos} matches no shell")
    return (r - (2 * d + 1)) // 2


def least_squares_slope(xs, ys) -> float:
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise InsufficientData("degenerate abscissa grid")
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx


def exponent_estimate(sequence, h: int) -> dict:
    """Log-log slope of the counting function at shell boundary points.

    Samples B(x) at x_K = 2^(K^2+(2d+1)K+(d+2)) for each shell K spanned
    by the sequence and fits log2 B vs log2 x by least squares; reports
    the slope next to the limit target 1/c_h = sqrt((h-1)^2+1)-(h-1).
    """
    vals = sorted(_value(e) for e in sequence)
    if not vals:
        raise InsufficientData("empty sequence")
    d = (h - 1).bit_length()
    ks = sorted({el.K if isinstance(el, EncodedElement) else _shell_of_value(_value(el), d)
                 for el in sequence})
    if len(ks) < 4:
        raise InsufficientData(f"sequence spans {len(ks)} shells; need >= 4")
    points = []
    for K in range(ks[0], ks[-1] + 1):
        pos = K * K + (2 * d + 1) * K + (d + 1)
        count = bisect_right(vals, (1 << (pos + 1)) - 1)
        if count > 0:
            points.append((pos + 1, math.log2(count)))
    slope = least_squares_slope([p[0] for p in points], [p[1] for p in points])
    g = h - 1
    return {
        "h": h,
        "slope": slope,
        "target": math.sqrt(g * g + 1) - g,
        "points": points,
    }
