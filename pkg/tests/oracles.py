"""Slow, obviously-correct reference implementations used as test oracles."""
from __future__ import annotations

from collections import defaultdict


def twice_median_window(counts, i):
    """2 * median of counts[i-2 .. i+2] (clipped), in integer arithmetic."""
    lo, hi = max(0, i - 2), min(len(counts) - 1, i + 2)
    w = sorted(int(c) for c in counts[lo: hi + 1])
    n = len(w)
    if n % 2:
        return 2 * w[n // 2]
    return w[n // 2 - 1] + w[n // 2]


def twice_deviation(counts):
    return [2 * int(c) - twice_median_window(counts, i) for i, c in enumerate(counts)]


def naive_peaks(years, dev):
    out = []
    n = len(dev)
    for i in range(n):
        left = dev[i - 1] if i > 0 else None
        right = dev[i + 1] if i < n - 1 else None
        if dev[i] > 0 and (left is None or dev[i] > left) and (right is None or dev[i] > right):
            out.append(int(years[i]))
    return out


def pairwise_ranks(values):
    """Average rank by counting: 1 + #smaller + (#equal - 1) / 2."""
    out = []
    for v in values:
        less = sum(1 for u in values if u < v)
        eq = sum(1 for u in values if u == v)
        out.append(1 + less + (eq - 1) / 2)
    return out


def levenshtein(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def anova_direct(values, groups):
    """(F, df_between, df_within, ss_between, ss_within) by explicit loops."""
    by = defaultdict(list)
    for v, g in zip(values, groups):
        by[g].append(float(v))
    n_total = len(values)
    grand = sum(float(v) for v in values) / n_total
    ssb = 0.0
    ssw = 0.0
    for vs in by.values():
        m = sum(vs) / len(vs)
        ssb += len(vs) * (m - grand) ** 2
        ssw += sum((v - m) ** 2 for v in vs)
    dfb = len(by) - 1
    dfw = n_total - len(by)
    return (ssb / dfb) / (ssw / dfw), dfb, dfw, ssb, ssw
