"""Standard reference publication year spectroscopy."""
from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class Spectrum:
    """Citation counts per reference year with the 5-year median baseline.

    ``years`` is dense: every year between the first and last cited year is
    present, gap years with count 0.
    """

    years: np.ndarray
    count: np.ndarray
    median5: np.ndarray
    deviation: np.ndarray

    def __len__(self) -> int:
        return int(self.years.size)

    @property
    def first_year(self) -> Optional[int]:
        return int(self.years[0]) if self.years.size else None

    @property
    def last_year(self) -> Optional[int]:
        return int(self.years[-1]) if self.years.size else None

    def index(self, year: int) -> Optional[int]:
        if not self.years.size or year < self.years[0] or year > self.years[-1]:
            return None
        return int(year - self.years[0])

    def deviation_map(self) -> dict:
        return {int(y): float(d) for y, d in zip(self.years, self.deviation)}

    def to_csv(self, peaks: Optional[Iterable[int]] = None) -> str:
        peak_set = set(detect_peaks(self) if peaks is None else peaks)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["year", "count", "median5", "deviation", "is_peak"])
        for y, c, m, d in zip(self.years, self.count, self.median5, self.deviation):
            w.writerow([int(y), int(c), _num(m), _num(d), int(int(y) in peak_set)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"years": [int(y) for y in self.years],
                "count": [int(c) for c in self.count]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "Spectrum":
        return spectrum_from_counts(dict(zip(d["years"], d["count"])))


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def spectrum_from_counts(year_counts: Mapping[int, int]) -> Spectrum:
    """Spectrum from a ``{year: count}`` mapping (missing years become 0)."""
    items = {int(y): int(c) for y, c in year_counts.items()}
    if not items:
        empty_i = np.zeros(0, dtype=np.int64)
        empty_f = np.zeros(0, dtype=np.float64)
        return Spectrum(empty_i, empty_i.copy(), empty_f, empty_f.copy())
    lo, hi = min(items), max(items)
    years = np.arange(lo, hi + 1, dtype=np.int64)
    count = np.zeros(years.size, dtype=np.int64)
    for y, c in items.items():
        if c < 0:
            raise ValueError(f"negative count for year {y}")
        count[y - lo] += c
    med = _kernels.median5(count)
    return Spectrum(years, count, med, count - med)


def build_spectrum(clusters: Iterable) -> Spectrum:
    """Aggregate cluster counts by reference year.

    Accepts :class:`~rpyskit.disambig.RefCluster` objects or, in a no-dedup
    mode, raw references (each counting once).  Items with unknown year are
    ignored.
    """
    counts: Counter = Counter()
    for c in clusters:
        if c.ref_year is None:
            continue
        counts[c.ref_year] += getattr(c, "count", 1)
    return spectrum_from_counts(counts)


def detect_peaks(s: Spectrum) -> list:
    """Years whose deviation is positive and strictly above both neighbours.

    Boundary years are compared with their single existing neighbour.
    """
    d = s.deviation
    n = d.size
    if n == 0:
        return []
    ok = d > 0
    left = np.ones(n, dtype=bool)
    right = np.ones(n, dtype=bool)
    left[1:] = d[1:] > d[:-1]
    right[:-1] = d[:-1] > d[1:]
    return [int(y) for y in s.years[ok & left & right]]


@dataclass(frozen=True)
class RankedEntry:
    cluster: object
    count: int
    rank: int


@dataclass(frozen=True)
class RankedRefList:
    year: int
    entries: tuple = ()

    def __len__(self) -> int:
        return len(self.entries)

    def rank_of(self, cluster_id: int) -> Optional[int]:
        for e in self.entries:
            if e.cluster.cluster_id == cluster_id:
                return e.rank
        return None


def rank_clusters(clusters: Iterable, year: int) -> list:
    """Every cluster of ``year`` ordered by count, ties by representative."""
    pool = [c for c in clusters if c.ref_year == year]
    pool.sort(key=lambda c: (-c.count, c.representative.original, c.cluster_id))
    entries = []
    prev_count = None
    rank = 0
    for pos, c in enumerate(pool, start=1):
        if c.count != prev_count:
            rank = pos
            prev_count = c.count
        entries.append(RankedEntry(c, c.count, rank))
    return entries


def top_references(clusters: Iterable, year: int, n: int = 10) -> RankedRefList:
    """The ``n`` most cited clusters of a reference year.

    Tied counts share the smallest position (competition ranking).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return RankedRefList(int(year), tuple(rank_clusters(clusters, year)[:n]))
