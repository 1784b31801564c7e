"""Cited-reference disambiguation.

References are blocked by publication year and, inside a block, joined by
single linkage over a weighted field similarity.  Byte-identical field
tuples are collapsed before the pairwise pass so that the quadratic step
only sees distinct spellings.
"""
from __future__ import annotations

import csv
import io
import os
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .wos import RawCitedRef, digits

THREADS_ENV = "RPYS_KIT_THREADS"


def thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class MatchConfig:
    string_sim_threshold: float = 0.75
    require_year_block: bool = True
    doi_overrides: bool = True
    weights: tuple = (0.4, 0.3, 0.15, 0.15)  # author, source, volume, page

    def __post_init__(self):
        if not 0.0 <= self.string_sim_threshold <= 1.0:
            raise ValueError("string_sim_threshold must lie in [0, 1]")
        if len(self.weights) != 4 or any(w < 0 for w in self.weights):
            raise ValueError("weights must be four non-negative numbers")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


@dataclass(frozen=True)
class RefCluster:
    cluster_id: int
    ref_year: Optional[int]
    representative: RawCitedRef
    members: tuple

    @property
    def count(self) -> int:
        return len(self.members)

    @property
    def dois(self) -> set:
        return {m.doi for m in self.members if m.doi}


def _match_key(r: RawCitedRef) -> tuple:
    return (r.first_author, r.source, digits(r.volume), digits(r.first_page), r.doi or "")


def _pack(keys: Sequence[tuple]):
    auth_codes, auth_offs = _kernels.pack_strings([k[0] for k in keys])
    src_codes, src_offs = _kernels.pack_strings([k[1] for k in keys])

    def ids(col):
        table: dict = {}
        out = np.full(len(keys), -1, dtype=np.int64)
        for i, k in enumerate(keys):
            v = k[col]
            if v:
                out[i] = table.setdefault(v, len(table))
        return out

    return (auth_codes, auth_offs, src_codes, src_offs, ids(2), ids(3), ids(4))


def similarity(a: RawCitedRef, b: RawCitedRef, cfg: Optional[MatchConfig] = None) -> float:
    """Weighted field similarity in [0, 1].

    Equal DOIs give 1.0 and conflicting DOIs 0.0.  References from different
    years score 0.0.  Otherwise the score is
    ``w_author*ratio(author) + w_source*ratio(source) + w_vol*[vol equal] +
    w_page*[page equal]``, where ``ratio`` is the normalised Levenshtein
    similarity.  A field missing on exactly one side scores half its weight;
    missing on both sides counts as agreement.
    """
    cfg = cfg or MatchConfig()
    if cfg.doi_overrides and a.doi and b.doi:
        return 1.0 if a.doi == b.doi else 0.0
    if cfg.require_year_block and a.ref_year != b.ref_year:
        return 0.0
    block = _pack([_match_key(a), _match_key(b)])
    return _kernels.pair_similarity(block, cfg.weights, cfg.doi_overrides, 0, 1)


def _choose_representative(members: Sequence[RawCitedRef]) -> RawCitedRef:
    return min(members, key=lambda m: (-m.populated_fields(), m.original, m.parent_record_id))


def _member_order(m: RawCitedRef):
    return (m.original, m.parent_record_id)


def _cluster_block(refs: Sequence[RawCitedRef], cfg: MatchConfig) -> list:
    groups: dict = defaultdict(list)
    for r in refs:
        groups[_match_key(r)].append(r)
    keys = sorted(groups)
    n = len(keys)
    parent = list(range(n))
    doi_of = [k[4] or None for k in keys]

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    if n > 1:
        block = _pack(keys)
        ei, ej, es = _kernels.similarity_edges(block, cfg.weights, cfg.doi_overrides,
                                               cfg.string_sim_threshold)
        # strongest links first, so a DOI conflict blocks the weaker chain
        order = np.lexsort((ej, ei, -es))
        for t in order:
            a, b = find(int(ei[t])), find(int(ej[t]))
            if a == b:
                continue
            da, db = doi_of[a], doi_of[b]
            if cfg.doi_overrides and da and db and da != db:
                continue
            lo, hi = min(a, b), max(a, b)
            parent[hi] = lo
            doi_of[lo] = da or db

    comps: dict = defaultdict(list)
    for i, k in enumerate(keys):
        comps[find(i)].extend(groups[k])
    return [sorted(c, key=_member_order) for c in comps.values()]


def cluster_refs(refs: Iterable[RawCitedRef], cfg: Optional[MatchConfig] = None,
                 threads: Optional[int] = None) -> list:
    """Partition references into :class:`RefCluster` objects.

    Year blocks are independent and are clustered on up to ``threads``
    worker threads (default from ``RPYS_KIT_THREADS``).  The result does not
    depend on input order or thread count.
    """
    cfg = cfg or MatchConfig()
    by_year: dict = defaultdict(list)
    unknown = []
    for r in refs:
        if r.ref_year is None:
            unknown.append(r)
        else:
            by_year[r.ref_year].append(r)

    years = sorted(by_year)
    workers = min(threads or thread_cap(), max(1, len(years)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            blocks = list(ex.map(lambda y: _cluster_block(by_year[y], cfg), years))
    else:
        blocks = [_cluster_block(by_year[y], cfg) for y in years]

    raw = []
    for y, comps in zip(years, blocks):
        for members in comps:
            raw.append((y, _choose_representative(members), tuple(members)))
    for r in unknown:
        raw.append((None, r, (r,)))

    raw.sort(key=lambda t: (t[0] is None, t[0] or 0, t[1].original, t[1].parent_record_id))
    return [RefCluster(i, y, rep, members) for i, (y, rep, members) in enumerate(raw, start=1)]


def clusters_by_year(clusters: Iterable[RefCluster]) -> dict:
    out: dict = defaultdict(list)
    for c in clusters:
        out[c.ref_year].append(c)
    return dict(out)


CLUSTER_CSV_COLUMNS = ["cluster_id", "ref_year", "count", "first_author", "source",
                       "volume", "first_page", "doi", "representative", "members"]


def clusters_to_csv(clusters: Iterable[RefCluster]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CLUSTER_CSV_COLUMNS)
    for c in clusters:
        rep = c.representative
        w.writerow([c.cluster_id, "" if c.ref_year is None else c.ref_year, c.count,
                    rep.first_author, rep.source, rep.volume or "", rep.first_page or "",
                    rep.doi or "", rep.original, "|".join(m.original for m in c.members)])
    return buf.getvalue()
