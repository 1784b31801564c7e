"""Numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen per call from ``RPYS_KIT_BACKEND`` (``numba`` or
``numpy``).  When numba cannot be imported the numpy path is used
regardless of the variable.  Both paths return identical results; the
test-suite checks this on random inputs.
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


BACKEND_ENV = "RPYS_KIT_BACKEND"

# Pairs per vectorised edit-distance batch in the numpy path.
_BATCH = 50_000


def backend() -> str:
    """Return the active kernel backend name."""
    want = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if want == "numpy" or not NUMBA_AVAILABLE:
        return "numpy"
    if want != "numba":
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {want!r}")
    return "numba"


def pack_strings(strings):
    """Concatenate strings into one int32 code-point array plus offsets."""
    offsets = np.zeros(len(strings) + 1, dtype=np.int64)
    chunks = []
    for i, s in enumerate(strings):
        arr = np.frombuffer(s.encode("utf-32-le"), dtype=np.uint32).astype(np.int32)
        chunks.append(arr)
        offsets[i + 1] = offsets[i] + arr.shape[0]
    codes = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int32)
    return codes.astype(np.int32), offsets


# ---------------------------------------------------------------------------
# clipped five-year running median
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def median5_numba(counts):
    n = counts.shape[0]
    out = np.empty(n, np.float64)
    w = np.empty(5, np.float64)
    for i in range(n):
        lo = max(0, i - 2)
        hi = min(n, i + 3)
        m = hi - lo
        for k in range(m):
            w[k] = counts[lo + k]
        for a in range(1, m):
            v = w[a]
            b = a - 1
            while b >= 0 and w[b] > v:
                w[b + 1] = w[b]
                b -= 1
            w[b + 1] = v
        if m % 2 == 1:
            out[i] = w[m // 2]
        else:
            out[i] = 0.5 * (w[m // 2 - 1] + w[m // 2])
    return out


def median5_numpy(counts):
    x = np.asarray(counts, dtype=np.float64)
    if x.size == 0:
        return np.zeros(0, dtype=np.float64)
    padded = np.concatenate([np.full(2, np.nan), x, np.full(2, np.nan)])
    windows = np.lib.stride_tricks.sliding_window_view(padded, 5)
    return np.nanmedian(windows, axis=1)


def median5(counts):
    """Median over the window ``i-2 .. i+2`` clipped to the array bounds.

    Even-sized edge windows (four values) take the mean of the two central
    values.
    """
    x = np.ascontiguousarray(counts, dtype=np.float64)
    if backend() == "numba":
        return median5_numba(x)
    return median5_numpy(x)


# ---------------------------------------------------------------------------
# average ranks, NaN = missing
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def average_ranks_numba(x):
    n = x.shape[0]
    out = np.full(n, np.nan)
    idx = np.empty(n, np.int64)
    k = 0
    for i in range(n):
        if not np.isnan(x[i]):
            idx[k] = i
            k += 1
    idx = idx[:k]
    vals = np.empty(k, np.float64)
    for t in range(k):
        vals[t] = x[idx[t]]
    order = np.argsort(vals, kind="mergesort")
    i = 0
    while i < k:
        j = i
        while j + 1 < k and vals[order[j + 1]] == vals[order[i]]:
            j += 1
        r = 0.5 * (i + j) + 1.0
        for t in range(i, j + 1):
            out[idx[order[t]]] = r
        i = j + 1
    return out


def average_ranks_numpy(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.full(x.shape, np.nan)
    present = np.flatnonzero(~np.isnan(x))
    if present.size == 0:
        return out
    vals = x[present]
    order = np.argsort(vals, kind="mergesort")
    s = vals[order]
    starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
    ends = np.r_[starts[1:], s.size] - 1
    group_rank = 0.5 * (starts + ends) + 1.0
    sizes = ends - starts + 1
    ranks_sorted = np.repeat(group_rank, sizes)
    out[present[order]] = ranks_sorted
    return out


def average_ranks(values):
    """Ascending 1-based ranks; ties share their mean position."""
    x = np.ascontiguousarray(values, dtype=np.float64)
    if backend() == "numba":
        return average_ranks_numba(x)
    return average_ranks_numpy(x)


# ---------------------------------------------------------------------------
# pairwise weighted similarity inside one year block
# ---------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _edit_distance(codes_a, a0, a1, codes_b, b0, b1, row):
    la = a1 - a0
    lb = b1 - b0
    if la == 0:
        return lb
    if lb == 0:
        return la
    for j in range(lb + 1):
        row[j] = j
    for i in range(1, la + 1):
        diag = row[0]
        row[0] = i
        ca = codes_a[a0 + i - 1]
        for j in range(1, lb + 1):
            up = row[j]
            cost = 0 if ca == codes_b[b0 + j - 1] else 1
            best = diag + cost
            if up + 1 < best:
                best = up + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            row[j] = best
            diag = up
    return row[lb]


@njit(cache=True, nogil=True)
def _ratio_score(codes, offs, i, j, weight, row):
    a0 = offs[i]
    a1 = offs[i + 1]
    b0 = offs[j]
    b1 = offs[j + 1]
    la = a1 - a0
    lb = b1 - b0
    if la == 0 and lb == 0:
        return weight
    if la == 0 or lb == 0:
        return 0.5 * weight
    d = _edit_distance(codes, a0, a1, codes, b0, b1, row)
    m = la if la > lb else lb
    return weight * (1.0 - d / m)


@njit(cache=True, nogil=True)
def _exact_score(ids, i, j, weight):
    a = ids[i]
    b = ids[j]
    if a < 0 and b < 0:
        return weight
    if a < 0 or b < 0:
        return 0.5 * weight
    return weight if a == b else 0.0


@njit(cache=True, nogil=True)
def pair_similarity_numba(auth_codes, auth_offs, src_codes, src_offs,
                          vol_ids, page_ids, doi_ids, weights, doi_overrides, i, j):
    if doi_overrides and doi_ids[i] >= 0 and doi_ids[j] >= 0:
        return 1.0 if doi_ids[i] == doi_ids[j] else 0.0
    longest = 1
    for k in range(auth_offs.shape[0] - 1):
        longest = max(longest, auth_offs[k + 1] - auth_offs[k])
    for k in range(src_offs.shape[0] - 1):
        longest = max(longest, src_offs[k + 1] - src_offs[k])
    row = np.empty(longest + 1, np.int64)
    s = _exact_score(vol_ids, i, j, weights[2])
    s += _exact_score(page_ids, i, j, weights[3])
    s += _ratio_score(src_codes, src_offs, i, j, weights[1], row)
    s += _ratio_score(auth_codes, auth_offs, i, j, weights[0], row)
    return s


@njit(cache=True, nogil=True)
def similarity_edges_numba(auth_codes, auth_offs, src_codes, src_offs,
                           vol_ids, page_ids, doi_ids, weights, doi_overrides,
                           threshold):
    n = vol_ids.shape[0]
    longest = 1
    for k in range(n):
        longest = max(longest, auth_offs[k + 1] - auth_offs[k])
        longest = max(longest, src_offs[k + 1] - src_offs[k])
    row = np.empty(longest + 1, np.int64)
    cap = 64
    ei = np.empty(cap, np.int64)
    ej = np.empty(cap, np.int64)
    es = np.empty(cap, np.float64)
    m = 0
    for i in range(n):
        for j in range(i + 1, n):
            if doi_overrides and doi_ids[i] >= 0 and doi_ids[j] >= 0:
                s = 1.0 if doi_ids[i] == doi_ids[j] else 0.0
            else:
                s = _exact_score(vol_ids, i, j, weights[2])
                s += _exact_score(page_ids, i, j, weights[3])
                s += _ratio_score(src_codes, src_offs, i, j, weights[1], row)
                # the author term is the most expensive; skip it when even a
                # perfect author match cannot reach the threshold
                if s + weights[0] < threshold:
                    continue
                s += _ratio_score(auth_codes, auth_offs, i, j, weights[0], row)
            if s >= threshold:
                if m == cap:
                    cap *= 2
                    ni = np.empty(cap, np.int64)
                    nj = np.empty(cap, np.int64)
                    ns = np.empty(cap, np.float64)
                    ni[:m] = ei[:m]
                    nj[:m] = ej[:m]
                    ns[:m] = es[:m]
                    ei, ej, es = ni, nj, ns
                ei[m] = i
                ej[m] = j
                es[m] = s
                m += 1
    return ei[:m], ej[:m], es[:m]


def _padded(codes, offs, idx):
    lens = (offs[idx + 1] - offs[idx]).astype(np.int64)
    width = int(lens.max()) if lens.size else 0
    out = np.full((idx.size, max(width, 1)), -1, dtype=np.int32)
    for r, k in enumerate(idx):
        out[r, : lens[r]] = codes[offs[k]: offs[k + 1]]
    return out, lens


def edit_distance_batch_numpy(A, la, B, lb):
    """Levenshtein distances for row pairs of two padded code matrices.

    Rows are processed together; the insertion recurrence along a DP row is
    turned into a running minimum so every step is a whole-array operation.
    """
    P = A.shape[0]
    LA = int(la.max()) if P else 0
    LB = B.shape[1]
    out = np.zeros(P, dtype=np.int64)
    out[la == 0] = lb[la == 0]
    j = np.arange(LB + 1, dtype=np.int64)
    prev = np.broadcast_to(j, (P, LB + 1)).copy()
    rows = np.arange(P)
    for i in range(1, LA + 1):
        cost = (A[:, i - 1][:, None] != B).astype(np.int64)
        best = np.empty_like(prev)
        best[:, 0] = i
        best[:, 1:] = np.minimum(prev[:, :-1] + cost, prev[:, 1:] + 1)
        cur = j + np.minimum.accumulate(best - j, axis=1)
        prev = cur
        done = la == i
        if done.any():
            out[done] = prev[rows[done], lb[done]]
    return out


def _ratio_numpy(codes, offs, ii, jj, weight):
    A, la = _padded(codes, offs, ii)
    B, lb = _padded(codes, offs, jj)
    B = np.where(B < 0, -2, B)
    d = edit_distance_batch_numpy(A, la, B, lb)
    m = np.maximum(la, lb)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = 1.0 - d / np.where(m == 0, 1, m)
    score = weight * r
    both_empty = (la == 0) & (lb == 0)
    one_empty = (la == 0) ^ (lb == 0)
    score = np.where(both_empty, weight, score)
    return np.where(one_empty, 0.5 * weight, score)


def _exact_numpy(ids, ii, jj, weight):
    a = ids[ii]
    b = ids[jj]
    s = np.where(a == b, weight, 0.0)
    s = np.where((a < 0) ^ (b < 0), 0.5 * weight, s)
    return np.where((a < 0) & (b < 0), weight, s)


def similarity_edges_numpy(auth_codes, auth_offs, src_codes, src_offs,
                           vol_ids, page_ids, doi_ids, weights, doi_overrides,
                           threshold):
    n = vol_ids.shape[0]
    ii_all, jj_all = np.triu_indices(n, k=1)
    out_i, out_j, out_s = [], [], []
    for start in range(0, ii_all.size, _BATCH):
        ii = ii_all[start: start + _BATCH]
        jj = jj_all[start: start + _BATCH]
        s = (_exact_numpy(vol_ids, ii, jj, weights[2])
             + _exact_numpy(page_ids, ii, jj, weights[3])
             + _ratio_numpy(src_codes, src_offs, ii, jj, weights[1])
             + _ratio_numpy(auth_codes, auth_offs, ii, jj, weights[0]))
        if doi_overrides:
            both = (doi_ids[ii] >= 0) & (doi_ids[jj] >= 0)
            s = np.where(both, (doi_ids[ii] == doi_ids[jj]).astype(np.float64), s)
        keep = s >= threshold
        out_i.append(ii[keep])
        out_j.append(jj[keep])
        out_s.append(s[keep])
    if not out_i:
        return (np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.float64))
    return (np.concatenate(out_i).astype(np.int64), np.concatenate(out_j).astype(np.int64),
            np.concatenate(out_s))


def similarity_edges(block, weights, doi_overrides, threshold):
    """All pairs ``i < j`` in a packed block with similarity >= threshold.

    ``block`` is the tuple ``(auth_codes, auth_offs, src_codes, src_offs,
    vol_ids, page_ids, doi_ids)``.
    """
    w = np.asarray(weights, dtype=np.float64)
    fn = similarity_edges_numba if backend() == "numba" else similarity_edges_numpy
    return fn(*block, w, bool(doi_overrides), float(threshold))


def pair_similarity(block, weights, doi_overrides, i=0, j=1):
    w = np.asarray(weights, dtype=np.float64)
    if backend() == "numba":
        return float(pair_similarity_numba(*block, w, bool(doi_overrides), i, j))
    ii = np.array([i])
    jj = np.array([j])
    auth_codes, auth_offs, src_codes, src_offs, vol_ids, page_ids, doi_ids = block
    if doi_overrides and doi_ids[i] >= 0 and doi_ids[j] >= 0:
        return 1.0 if doi_ids[i] == doi_ids[j] else 0.0
    s = (_exact_numpy(vol_ids, ii, jj, w[2])
         + _exact_numpy(page_ids, ii, jj, w[3])
         + _ratio_numpy(src_codes, src_offs, ii, jj, w[1])
         + _ratio_numpy(auth_codes, auth_offs, ii, jj, w[0]))
    return float(s[0])
