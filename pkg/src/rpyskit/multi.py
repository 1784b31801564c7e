"""Multi-RPYS: per-citing-year spectra, rank transformed into a matrix."""
from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from . import _kernels
from .rpys import Spectrum, spectrum_from_counts
from .wos import Corpus


@dataclass(frozen=True)
class SegmentSpec:
    min_segment_records: int = 1
    citing_year_range: Optional[tuple] = None

    def __post_init__(self):
        if self.min_segment_records < 1:
            raise ValueError("min_segment_records must be >= 1")
        if self.citing_year_range is not None:
            lo, hi = self.citing_year_range
            if lo > hi:
                raise ValueError("citing_year_range bounds out of order")


def segment_by_citing_year(corpus: Corpus, spec: Optional[SegmentSpec] = None) -> list:
    """Split a corpus into ``(citing_year, Corpus)`` pairs, oldest first.

    Records without a publication year are left out.
    """
    spec = spec or SegmentSpec()
    groups: dict = defaultdict(list)
    for rec in corpus.records:
        y = rec.pub_year
        if y is None:
            continue
        if spec.citing_year_range is not None:
            lo, hi = spec.citing_year_range
            if not lo <= y <= hi:
                continue
        groups[y].append(rec)
    return [(y, Corpus(tuple(groups[y]))) for y in sorted(groups)
            if len(groups[y]) >= spec.min_segment_records]


def rank_transform(deviations: Mapping) -> dict:
    """Average ranks of a ``{year: deviation}`` mapping.

    The largest deviation receives the largest rank.  ``None``/NaN values are
    treated as missing and returned as ``None``.
    """
    keys = list(deviations)
    vals = np.array([np.nan if deviations[k] is None else float(deviations[k]) for k in keys],
                    dtype=np.float64)
    ranks = _kernels.average_ranks(vals)
    return {k: (None if math.isnan(r) else float(r)) for k, r in zip(keys, ranks)}


@dataclass(frozen=True)
class MultiRpysMatrix:
    """Rows are citing years, columns a dense cited-year axis.

    ``rank`` and ``deviation`` hold NaN where a segment does not reach a
    cited year (outside the span of years that segment cites).
    """

    citing_years: np.ndarray
    cited_years: np.ndarray
    rank: np.ndarray
    deviation: np.ndarray
    segment_sizes: np.ndarray

    @property
    def shape(self) -> tuple:
        return self.rank.shape

    def column(self, year: int) -> np.ndarray:
        return self.rank[:, int(year - self.cited_years[0])]

    def observations(self):
        """(values, cited_year) pairs for every non-missing cell."""
        mask = ~np.isnan(self.rank)
        cols = np.broadcast_to(self.cited_years, self.rank.shape)
        return self.rank[mask], cols[mask]

    def to_long_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["citing_year", "cited_year", "rank"])
        for i, cy in enumerate(self.citing_years):
            for j, y in enumerate(self.cited_years):
                r = self.rank[i, j]
                if not np.isnan(r):
                    w.writerow([int(cy), int(y), repr(float(r))])
        return buf.getvalue()

    def to_json(self) -> str:
        def cells(a):
            return [[None if np.isnan(v) else float(v) for v in row] for row in a]

        doc = {
            "citing_years": [int(y) for y in self.citing_years],
            "cited_years": [int(y) for y in self.cited_years],
            "segment_sizes": [int(n) for n in self.segment_sizes],
            "rank": cells(self.rank),
            "deviation": cells(self.deviation),
        }
        return json.dumps(doc, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "MultiRpysMatrix":
        d = json.loads(text)

        def arr(rows):
            return np.array([[np.nan if v is None else v for v in row] for row in rows],
                            dtype=np.float64).reshape(len(d["citing_years"]), len(d["cited_years"]))

        return cls(np.array(d["citing_years"], dtype=np.int64),
                   np.array(d["cited_years"], dtype=np.int64),
                   arr(d["rank"]), arr(d["deviation"]),
                   np.array(d["segment_sizes"], dtype=np.int64))


def matrix_from_spectra(spectra: Mapping[int, Spectrum],
                        segment_sizes: Optional[Mapping[int, int]] = None) -> MultiRpysMatrix:
    """Assemble the matrix from per-citing-year spectra."""
    citing = sorted(spectra)
    spans = [spectra[c] for c in citing if len(spectra[c])]
    if spans:
        lo = min(s.first_year for s in spans)
        hi = max(s.last_year for s in spans)
        cited = np.arange(lo, hi + 1, dtype=np.int64)
    else:
        cited = np.zeros(0, dtype=np.int64)
    rank = np.full((len(citing), cited.size), np.nan)
    dev = np.full((len(citing), cited.size), np.nan)
    for i, c in enumerate(citing):
        s = spectra[c]
        if not len(s):
            continue
        j0 = s.first_year - int(cited[0])
        dev[i, j0: j0 + len(s)] = s.deviation
        rank[i, j0: j0 + len(s)] = _kernels.average_ranks(s.deviation)
    sizes = np.array([(segment_sizes or {}).get(c, 0) for c in citing], dtype=np.int64)
    return MultiRpysMatrix(np.array(citing, dtype=np.int64), cited, rank, dev, sizes)


def segment_spectra(corpus: Corpus, clusters: Optional[Iterable] = None,
                    spec: Optional[SegmentSpec] = None) -> tuple:
    """Per-segment spectra and segment sizes.

    With ``clusters`` given, segment counts come from cluster members whose
    parent record lies in the segment; otherwise the corpus references are
    parsed directly.  Both routes count every known-year reference once.
    """
    segments = segment_by_citing_year(corpus, spec)
    owner = {}
    for cy, sub in segments:
        for rec in sub.records:
            owner[rec.record_id] = cy
    per_seg: dict = {cy: Counter() for cy, _ in segments}
    if clusters is None:
        refs = (r for _, sub in segments for r in sub.cited_refs())
    else:
        refs = (m for c in clusters for m in c.members)
    for r in refs:
        cy = owner.get(r.parent_record_id)
        if cy is not None and r.ref_year is not None:
            per_seg[cy][r.ref_year] += 1
    spectra = {cy: spectrum_from_counts(per_seg[cy]) for cy, _ in segments}
    sizes = {cy: len(sub) for cy, sub in segments}
    return spectra, sizes


def build_matrix(corpus: Corpus, clusters: Optional[Iterable] = None,
                 spec: Optional[SegmentSpec] = None) -> MultiRpysMatrix:
    """Run RPYS within each citing-year segment and rank-transform each row."""
    spectra, sizes = segment_spectra(corpus, clusters, spec)
    if not spectra:
        raise ValueError("no citing-year segments: no record has a known publication year")
    return matrix_from_spectra(spectra, sizes)
