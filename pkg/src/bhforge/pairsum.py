"""Exhaustive equal / near-equal pair-sum detection over int64 values.

Enumerating all i <= j pair sums of n values is Theta(n^2); at desk scale
n can reach ~5*10^4 (10^9 pairs), far beyond RAM if materialized.  The
trick: partition *by sum value*.  For sorted values, the pairs whose sum
falls in a window [A, B) are, per row i, a contiguous j-range found by
binary search, so each window is enumerated independently with bounded
memory.  Identical sums always land in the same window, so no duplicate
group is ever split; near-groups (|s - s'| <= tol) are caught by letting
windows overlap by tol.

Everything is exact int64 arithmetic; callers must guarantee pair sums
fit in a signed 64-bit integer.
"""

from __future__ import annotations

import numpy as np

_DEFAULT_CHUNK = 1 << 23


def _window_edges(vals: np.ndarray, chunk_pairs: int) -> np.ndarray:
    """Approximate equal-count sum-window edges from a strided sample."""
    n = len(vals)
    total = n * (n + 1) // 2
    n_windows = max(1, int(total // chunk_pairs) + 1)
    if n_windows == 1:
        return np.array([2 * int(vals[0]), 2 * int(vals[-1]) + 1], dtype=np.int64)
    k = max(1, n // 1024)
    sample = vals[::k]
    sums = (sample[:, None] + sample[None, :]).ravel()
    qs = np.quantile(sums, np.linspace(0.0, 1.0, n_windows + 1))
    edges = np.unique(qs.astype(np.int64))
    edges[0] = 2 * int(vals[0])
    edges = np.append(edges, 2 * int(vals[-1]) + 1)
    return np.unique(edges)


def _window_ranges(vals: np.ndarray, lo_sum: int, hi_sum: int):
    """Per-row j-ranges of pairs (i <= j) whose sum lies in [lo_sum, hi_sum)."""
    n = len(vals)
    j_lo = np.searchsorted(vals, lo_sum - vals, side="left")
    j_hi = np.searchsorted(vals, hi_sum - vals, side="left")
    j_lo = np.maximum(j_lo, np.arange(n))
    counts = np.maximum(j_hi - j_lo, 0)
    return j_lo, counts


def _enumerate_window(vals: np.ndarray, lo_sum: int, hi_sum: int,
                      with_indices: bool):
    """Pair sums in [lo_sum, hi_sum); optionally with their (i, j) indices."""
    j_lo, counts = _window_ranges(vals, lo_sum, hi_sum)
    cum = np.concatenate(([0], np.cumsum(counts)))
    total = int(cum[-1])
    if total == 0:
        return None
    I = np.repeat(np.arange(len(vals)), counts)
    J = (np.arange(total) - np.repeat(cum[:-1], counts)
         + np.repeat(j_lo, counts))
    S = vals[I] + vals[J]
    if with_indices:
        return I, J, S
    return None, None, S


def pair_sum_clusters(vals: np.ndarray, tol: int = 0,
                      chunk_pairs: int = _DEFAULT_CHUNK):
    """Yield clusters of index pairs with equal (tol=0) or near-equal sums.

    vals: ascending-sorted int64 array; pairs are unordered with i <= j
    (the diagonal i == j is included).  Each yielded cluster is a list
    [(i, j, s), ...] of length >= 2 sorted by s, in which consecutive
    sums differ by at most tol.

    With tol = 0 every identical-sum group is yielded exactly once.
    With tol > 0 windows overlap by tol, so a cluster near a window edge
    may be re-yielded (possibly truncated); any two pairs within tol of
    each other are guaranteed to co-occur in at least one cluster, and
    consumers must dedupe at the pair level.
    """
    vals = np.ascontiguousarray(vals, dtype=np.int64)
    n = len(vals)
    if n < 2:
        return
    if np.any(np.diff(vals) < 0):
        raise ValueError("values must be sorted ascending")
    edges = _window_edges(vals, chunk_pairs)
    for w in range(len(edges) - 1):
        lo_edge = int(edges[w]) - tol      # overlap so boundary pairs re-appear
        hi_edge = int(edges[w + 1])
        got = _enumerate_window(vals, lo_edge, hi_edge, with_indices=False)
        if got is None:
            continue
        _, _, S = got
        S.sort()
        hit = np.any(np.diff(S) <= tol) if len(S) > 1 else False
        if not hit:
            continue
        # rare: re-enumerate with indices and extract the clusters
        I, J, S = _enumerate_window(vals, lo_edge, hi_edge, with_indices=True)
        order = np.argsort(S, kind="stable")
        S = S[order]
        I = I[order]
        J = J[order]
        if tol == 0:
            brk = np.flatnonzero(np.diff(S) != 0)
        else:
            brk = np.flatnonzero(np.diff(S) > tol)
        starts = np.concatenate(([0], brk + 1))
        ends = np.concatenate((brk + 1, [len(S)]))
        for s0, s1 in zip(starts, ends):
            if s1 - s0 < 2:
                continue
            yield sorted((int(I[k]), int(J[k]), int(S[k]))
                         for k in range(s0, s1))


def equal_pair_sum_groups(vals: np.ndarray,
                          chunk_pairs: int = _DEFAULT_CHUNK):
    """Groups of index pairs sharing an identical pair sum (size >= 2)."""
    for cluster in pair_sum_clusters(vals, tol=0, chunk_pairs=chunk_pairs):
        yield [(i, j) for (i, j, _) in cluster]


def equal_pair_sum_groups_bigint(vals: list[int]):
    """Reference path for values beyond int64: two-pass dict grouping."""
    n = len(vals)
    counts: dict[int, int] = {}
    for i in range(n):
        vi = vals[i]
        for j in range(i, n):
            s = vi + vals[j]
            counts[s] = counts.get(s, 0) + 1
    dup = {s for s, c in counts.items() if c >= 2}
    if not dup:
        return
    groups: dict[int, list] = {s: [] for s in dup}
    for i in range(n):
        vi = vals[i]
        for j in range(i, n):
            s = vi + vals[j]
            if s in groups:
                groups[s].append((i, j))
    for s in sorted(groups):
        yield groups[s]
