"""Compiled inner loops for the dependence estimators and their oracles.

Everything here works on the two aligned windows a = x[0:n-k], b = x[k:n] of a
series.  Rank-kernel sums are accumulated as int64 so that the fast paths and
the brute-force enumerations produce bit-identical floats after the final
division.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "count_inversions",
    "kendall_numerator_pairs",
    "kendall_numerator_concordance",
    "ordered_product_pair_sum",
    "spearman_numerator_triples",
    "autocov_numerator_pairs",
]


@njit(cache=True, nogil=True)
def count_inversions(values):
    """Number of pairs i < j with values[i] > values[j].

    Bottom-up merge sort; ``values`` is modified in place, pass a copy.
    Assumes distinct entries (tie handling lives elsewhere).
    """
    n = values.size
    buf = np.empty(n, values.dtype)
    src = values
    dst = buf
    inv = 0
    width = 1
    while width < n:
        lo = 0
        while lo < n:
            mid = lo + width
            if mid > n:
                mid = n
            hi = lo + 2 * width
            if hi > n:
                hi = n
            i = lo
            j = mid
            pos = lo
            while i < mid and j < hi:
                if src[j] < src[i]:
                    dst[pos] = src[j]
                    j += 1
                    inv += mid - i
                else:
                    dst[pos] = src[i]
                    i += 1
                pos += 1
            while i < mid:
                dst[pos] = src[i]
                i += 1
                pos += 1
            while j < hi:
                dst[pos] = src[j]
                j += 1
                pos += 1
            lo += 2 * width
        tmp = src
        src = dst
        dst = tmp
        width *= 2
    return inv


@njit(cache=True, nogil=True)
def kendall_numerator_pairs(a, b):
    """Sum over time-ordered pairs s < t of 4*(I(a_s<a_t)-1/2)*(I(b_s<b_t)-1/2).

    Each term is +1 when the two indicators agree and -1 otherwise, so the
    sum is an exact integer.  Valid with or without ties.
    """
    n = a.size
    total = 0
    for s in range(n - 1):
        for t in range(s + 1, n):
            p = a[s] < a[t]
            q = b[s] < b[t]
            if p == q:
                total += 1
            else:
                total -= 1
    return total


@njit(cache=True, nogil=True)
def kendall_numerator_concordance(a, b):
    """Sum over time-ordered pairs of 2*I(a_s<a_t, b_s<b_t) + 2*I(a_t<a_s, b_t<b_s) - 1."""
    n = a.size
    total = 0
    for s in range(n - 1):
        for t in range(s + 1, n):
            v = -1
            if a[s] < a[t] and b[s] < b[t]:
                v += 2
            if a[t] < a[s] and b[t] < b[s]:
                v += 2
            total += v
    return total


@njit(cache=True, nogil=True)
def ordered_product_pair_sum(a, b):
    """Sum over ordered pairs p != q of 4*(I(a_p<a_q)-1/2)*(I(b_p<b_q)-1/2)."""
    n = a.size
    total = 0
    for s in range(n - 1):
        for t in range(s + 1, n):
            if (a[s] < a[t]) == (b[s] < b[t]):
                total += 1
            else:
                total -= 1
            if (a[t] < a[s]) == (b[t] < b[s]):
                total += 1
            else:
                total -= 1
    return total


@njit(cache=True, nogil=True)
def spearman_numerator_triples(a, b):
    """Brute-force Spearman numerator: sum of the 6-permutation kernel over triples.

    The kernel value on a triple is (#agreeing permutation terms) - 3, an
    integer in {-3, ..., 3}; a permutation term (p, q, r) agrees when
    I(a_p < a_q) == I(b_p < b_r).
    """
    n = a.size
    total = 0
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            for l in range(j + 1, n):
                cnt = 0
                # permutations of (i, j, l) as (p, q, r)
                if (a[i] < a[j]) == (b[i] < b[l]):
                    cnt += 1
                if (a[i] < a[l]) == (b[i] < b[j]):
                    cnt += 1
                if (a[j] < a[i]) == (b[j] < b[l]):
                    cnt += 1
                if (a[j] < a[l]) == (b[j] < b[i]):
                    cnt += 1
                if (a[l] < a[i]) == (b[l] < b[j]):
                    cnt += 1
                if (a[l] < a[j]) == (b[l] < b[i]):
                    cnt += 1
                total += cnt - 3
    return total


@njit(cache=True, nogil=True)
def autocov_numerator_pairs(a, b):
    """Brute-force covariance numerator: sum over pairs of (a_s-a_t)*(b_s-b_t)/2."""
    n = a.size
    total = 0.0
    for s in range(n - 1):
        for t in range(s + 1, n):
            total += 0.5 * (a[s] - a[t]) * (b[s] - b[t])
    return total
