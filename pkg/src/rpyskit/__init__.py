"""Reference publication year spectroscopy toolkit.

Reads Web of Science exports, clusters variant cited-reference strings,
builds detrended year spectra and per-citing-year rank matrices, scores
cited years by one-way ANOVA, and checks results against milestone lists.
"""
from .disambig import MatchConfig, RefCluster, cluster_refs
from .multi import MultiRpysMatrix, SegmentSpec, build_matrix, rank_transform
from .rpys import Spectrum, build_spectrum, detect_peaks, rank_clusters, top_references
from .stats import (anova_by_cited_year, anova_oneway, studentized_range_cdf,
                    studentized_range_ppf, top_milestone_years, year_effects)
from .validation import evaluate_articles, evaluate_years, load_milestones, parse_milestones
from .wos import CitingRecord, Corpus, RawCitedRef, parse_cited_ref, parse_export, read_export, union

__version__ = "0.1.0"

__all__ = [
    "CitingRecord", "Corpus", "MatchConfig", "MultiRpysMatrix", "RawCitedRef", "RefCluster",
    "SegmentSpec", "Spectrum", "anova_by_cited_year", "anova_oneway", "build_matrix",
    "build_spectrum", "cluster_refs", "detect_peaks", "evaluate_articles", "evaluate_years",
    "load_milestones", "parse_cited_ref", "parse_export", "parse_milestones", "rank_clusters",
    "rank_transform", "read_export", "studentized_range_cdf", "studentized_range_ppf",
    "top_milestone_years", "top_references", "union", "year_effects",
]
