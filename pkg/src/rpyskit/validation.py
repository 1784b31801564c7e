"""Checking detected milestones against an expert milestone list.

A milestone article counts as captured by a search when (1) the search's
spectrum has a peak in the article's year and (2) the article is among the
ten most cited works of that year.  An article is captured overall when
any search captures it.

Milestone files
---------------
CSV with columns ``year, description, article_keys`` (header optional).
``article_keys`` holds ``;``-separated keys of the form
``author|year|source[|doi]``.  The key ``*`` marks a milestone the expert
gave no document for; it is matched by the most cited work of that year.
JSON files hold a list of ``{"year", "description", "articles"}`` objects
where ``articles`` is a list of key strings.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .disambig import MatchConfig, _match_key, similarity
from .rpys import Spectrum, detect_peaks, rank_clusters
from .wos import RawCitedRef, normalize_doi, normalize_text

OPEN_KEY = "*"
ARTICLE_MATCH_THRESHOLD = 0.8


class MilestoneFileError(ValueError):
    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(f"row {row}: {message}" if row is not None else message)
        self.row = row


@dataclass(frozen=True)
class ArticleKey:
    author: str
    year: int
    source: str
    doi: Optional[str] = None
    open_slot: bool = False

    def __str__(self) -> str:
        if self.open_slot:
            return OPEN_KEY
        parts = [self.author, str(self.year), self.source]
        if self.doi:
            parts.append(self.doi)
        return "|".join(parts)

    def as_ref(self) -> RawCitedRef:
        return RawCitedRef(original=str(self), first_author=self.author, ref_year=self.year,
                           source=self.source, doi=self.doi)


@dataclass(frozen=True)
class MilestoneEntry:
    year: int
    description: str
    articles: tuple = ()


def parse_article_key(text: str, entry_year: int, row: Optional[int] = None) -> ArticleKey:
    t = text.strip()
    if t == OPEN_KEY:
        return ArticleKey("", entry_year, "", None, open_slot=True)
    parts = [p.strip() for p in t.split("|")]
    if len(parts) not in (3, 4):
        raise MilestoneFileError(f"article key {t!r} is not author|year|source[|doi]", row)
    author, year, source = parts[:3]
    if not author or not source:
        raise MilestoneFileError(f"article key {t!r} lacks author or source", row)
    try:
        y = int(year)
    except ValueError:
        raise MilestoneFileError(f"article key {t!r} has non-integer year", row) from None
    doi = None
    if len(parts) == 4 and parts[3]:
        doi = normalize_doi(parts[3])
        if doi is None:
            raise MilestoneFileError(f"article key {t!r} has a DOI not starting with '10.'", row)
    return ArticleKey(normalize_text(author), y, normalize_text(source), doi)


def _entry(year_raw, desc, keys, row) -> MilestoneEntry:
    try:
        year = int(str(year_raw).strip())
    except ValueError:
        raise MilestoneFileError(f"year {year_raw!r} is not an integer", row) from None
    arts = tuple(parse_article_key(k, year, row) for k in keys if k.strip())
    return MilestoneEntry(year, str(desc).strip(), arts)


def parse_milestones(text: str, fmt: str = "auto") -> list:
    """Parse milestone CSV or JSON text."""
    if not text.strip():
        return []
    if fmt == "auto":
        fmt = "json" if text.lstrip()[0] in "[{" else "csv"
    if fmt == "json":
        doc = json.loads(text)
        if isinstance(doc, dict):
            doc = doc.get("milestones", [])
        out = []
        for i, item in enumerate(doc, start=1):
            if not isinstance(item, dict) or "year" not in item:
                raise MilestoneFileError("entry needs a 'year' field", i)
            arts = item.get("articles", [])
            if isinstance(arts, str):
                arts = arts.split(";")
            out.append(_entry(item["year"], item.get("description", ""), arts, i))
        return out
    out = []
    reader = csv.reader(io.StringIO(text))
    for rowno, row in enumerate(reader, start=1):
        if not row or not any(c.strip() for c in row):
            continue
        if rowno == 1 and row[0].strip().lower() == "year":
            continue
        if len(row) not in (2, 3):
            raise MilestoneFileError(f"expected 3 columns, found {len(row)}", rowno)
        keys = row[2].split(";") if len(row) == 3 else []
        out.append(_entry(row[0], row[1], keys, rowno))
    return out


def load_milestones(path) -> list:
    """Read a milestone file (CSV or JSON, by extension or content)."""
    p = Path(path)
    fmt = {".json": "json", ".csv": "csv"}.get(p.suffix.lower(), "auto")
    return parse_milestones(p.read_text(encoding="utf-8"), fmt)


def bundled_milestones() -> list:
    """The expert milestone table shipped with the package."""
    from importlib import resources

    text = resources.files("rpyskit").joinpath("data/hedgehog_milestones.csv").read_text("utf-8")
    return parse_milestones(text, "csv")


def article_slots(milestones: Sequence[MilestoneEntry]) -> list:
    return [(m, a) for m in milestones for a in m.articles]


# ---------------------------------------------------------------------------
# year level
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class YearReport:
    candidates: tuple
    hits: tuple
    hit_rate: Optional[float]
    span: tuple
    span_years: int
    milestone_years: int
    chance_baseline: float

    def to_dict(self) -> dict:
        return {
            "candidates": list(self.candidates),
            "hits": list(self.hits),
            "hit_rate": self.hit_rate,
            "span": list(self.span),
            "span_years": self.span_years,
            "milestone_years": self.milestone_years,
            "chance_baseline": self.chance_baseline,
        }


def evaluate_years(candidates: Sequence[int], milestones: Sequence[MilestoneEntry],
                   span: Optional[tuple] = None) -> YearReport:
    """Hit rate of candidate years against the milestone years.

    The chance baseline is the number of distinct milestone years over the
    inclusive span length; the span defaults to the first and last
    milestone year.
    """
    years = sorted({m.year for m in milestones})
    if span is None:
        if not years:
            raise ValueError("no milestones and no span given")
        span = (years[0], years[-1])
    first, last = int(span[0]), int(span[1])
    if first > last:
        raise ValueError("span bounds out of order")
    if years and (years[0] < first or years[-1] > last):
        raise ValueError("span does not cover every milestone year")
    ys = set(years)
    hits = tuple(int(c) in ys for c in candidates)
    rate = (sum(hits) / len(hits)) if hits else None
    n_span = last - first + 1
    return YearReport(tuple(int(c) for c in candidates), hits, rate, (first, last),
                      n_span, len(years), len(years) / n_span)


# ---------------------------------------------------------------------------
# article level
# ---------------------------------------------------------------------------

@dataclass
class SearchData:
    """The pieces of one search's analysis that validation needs."""

    spectrum: Spectrum
    clusters: Sequence
    _peaks: Optional[set] = field(default=None, repr=False)
    _ranked: dict = field(default_factory=dict, repr=False)
    _spellings: dict = field(default_factory=dict, repr=False)

    @property
    def peaks(self) -> set:
        if self._peaks is None:
            self._peaks = set(detect_peaks(self.spectrum))
        return self._peaks

    def ranked(self, year: int) -> list:
        if year not in self._ranked:
            self._ranked[year] = rank_clusters(self.clusters, year)
        return self._ranked[year]

    def spellings(self, cluster) -> list:
        """Representative first, then one member per distinct field tuple."""
        cid = cluster.cluster_id
        if cid not in self._spellings:
            seen = {_match_key(cluster.representative)}
            out = [cluster.representative]
            for m in cluster.members:
                k = _match_key(m)
                if k not in seen:
                    seen.add(k)
                    out.append(m)
            self._spellings[cid] = out
        return self._spellings[cid]


@dataclass(frozen=True)
class SearchOutcome:
    peak_present: bool
    rank: Optional[int]
    status: str  # captured | no_peak | outside_top | absent
    ambiguous: bool = False

    @property
    def captured(self) -> bool:
        return self.status == "captured"


@dataclass(frozen=True)
class ArticleResult:
    milestone_year: int
    description: str
    key: ArticleKey
    outcomes: dict
    captured: bool

    @property
    def peak_present(self) -> bool:
        return any(o.peak_present for o in self.outcomes.values())


def key_matches(key: ArticleKey, ref: RawCitedRef, threshold: float = ARTICLE_MATCH_THRESHOLD,
                cfg: Optional[MatchConfig] = None) -> bool:
    """Whether a cited reference denotes the keyed article.

    A key author without initials is compared with the surname token only.
    """
    probe = key.as_ref()
    cand = ref
    if key.author and " " not in key.author and cand.first_author:
        cand = RawCitedRef(original=ref.original, first_author=ref.first_author.split(" ")[0],
                           ref_year=ref.ref_year, source=ref.source, volume=ref.volume,
                           first_page=ref.first_page, doi=ref.doi)
    return similarity(probe, cand, cfg) >= threshold


def _outcome(key: ArticleKey, data: SearchData, top_n: int, threshold: float,
             cfg: Optional[MatchConfig]) -> SearchOutcome:
    peak = key.year in data.peaks
    ranked = data.ranked(key.year)
    if key.open_slot:
        hits = [e for e in ranked if e.rank == 1]
    else:
        hits = [e for e in ranked
                if any(key_matches(key, m, threshold, cfg) for m in data.spellings(e.cluster))]
    if not hits:
        return SearchOutcome(peak, None, "absent")
    ambiguous = len(hits) > 1 and not key.open_slot
    best = min(e.rank for e in hits)
    in_top = all(e.rank <= top_n for e in hits) if ambiguous else best <= top_n
    rank = best if best <= top_n else None
    if not in_top:
        status = "outside_top"
    elif not peak:
        status = "no_peak"
    else:
        status = "captured"
    return SearchOutcome(peak, rank, status, ambiguous)


@dataclass(frozen=True)
class ValidationReport:
    labels: tuple
    article_results: tuple
    article_capture_rate: Optional[float]
    years: Optional[YearReport] = None

    @property
    def captured_count(self) -> int:
        return sum(r.captured for r in self.article_results)

    @property
    def year_hits(self):
        return None if self.years is None else self.years.hits

    @property
    def year_hit_rate(self):
        return None if self.years is None else self.years.hit_rate

    @property
    def chance_baseline(self):
        return None if self.years is None else self.years.chance_baseline

    def to_dict(self) -> dict:
        return {
            "searches": list(self.labels),
            "article_capture_rate": self.article_capture_rate,
            "articles_captured": self.captured_count,
            "articles_total": len(self.article_results),
            "articles": [
                {
                    "milestone_year": r.milestone_year,
                    "description": r.description,
                    "key": str(r.key),
                    "captured": r.captured,
                    "searches": {
                        lab: {"peak_present": o.peak_present, "rank": o.rank,
                              "status": o.status, "ambiguous": o.ambiguous}
                        for lab, o in r.outcomes.items()
                    },
                }
                for r in self.article_results
            ],
            "years": None if self.years is None else self.years.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_text(self) -> str:
        head = f"{'Milestone':<44} {'Article':<34} {'Peak':<4} " + " ".join(
            f"{lab:>3}" for lab in self.labels)
        lines = [head, "-" * len(head)]
        for r in self.article_results:
            ranks = " ".join(
                f"{(r.outcomes[lab].rank if r.outcomes[lab].captured else ''):>3}"
                for lab in self.labels)
            desc = f"{r.milestone_year}: {r.description}"[:44]
            lines.append(f"{desc:<44} {str(r.key)[:34]:<34} "
                         f"{'Yes' if r.peak_present else 'No':<4} {ranks}")
        lines.append("")
        if self.article_capture_rate is not None:
            lines.append(f"captured {self.captured_count} of {len(self.article_results)} "
                         f"articles ({self.article_capture_rate:.1%})")
        if self.years is not None and self.years.hit_rate is not None:
            y = self.years
            lines.append(f"year hit rate {y.hit_rate:.0%}; chance baseline "
                         f"{y.milestone_years}/{y.span_years} = {y.chance_baseline:.4f}")
        return "\n".join(lines) + "\n"


def _as_search(v) -> SearchData:
    if isinstance(v, SearchData):
        return v
    spectrum, clusters = v
    return SearchData(spectrum, list(clusters))


def evaluate_articles(per_search: Mapping, milestones: Sequence[MilestoneEntry],
                      top_n: int = 10, threshold: float = ARTICLE_MATCH_THRESHOLD,
                      cfg: Optional[MatchConfig] = None,
                      candidates: Optional[Sequence[int]] = None,
                      span: Optional[tuple] = None) -> ValidationReport:
    """Apply both success criteria for every milestone article and search.

    ``per_search`` maps a search label to a :class:`SearchData` or a
    ``(spectrum, clusters)`` pair.  Milestones without articles are skipped
    here (they still count at year level).  When ``candidates`` is given the
    year-level fragment is included in the report.
    """
    labels = tuple(per_search)
    data = {lab: _as_search(per_search[lab]) for lab in labels}
    results = []
    for entry, key in article_slots(milestones):
        outcomes = {lab: _outcome(key, data[lab], top_n, threshold, cfg) for lab in labels}
        results.append(ArticleResult(entry.year, entry.description, key, outcomes,
                                     any(o.captured for o in outcomes.values())))
    rate = (sum(r.captured for r in results) / len(results)) if results else None
    years = evaluate_years(candidates, milestones, span) if candidates is not None else None
    return ValidationReport(labels, tuple(results), rate, years)
