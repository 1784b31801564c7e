import numpy as np
from hypothesis import given, strategies as st

from rpyskit.disambig import cluster_refs
from rpyskit.rpys import (Spectrum, build_spectrum, detect_peaks, spectrum_from_counts,
                          top_references)
from rpyskit.synthetic import PLANTED_YEARS, planted_year_counts
from rpyskit.wos import parse_cited_ref

from oracles import naive_peaks, twice_deviation


def test_deviation_example():
    s = spectrum_from_counts({2000: 10, 2001: 12, 2002: 30, 2003: 11, 2004: 13})
    assert s.deviation_map()[2002] == 18


def test_flat_counts():
    s = spectrum_from_counts({y: 7 for y in range(1950, 1970)})
    assert np.all(s.deviation == 0)
    assert detect_peaks(s) == []


def test_empty_and_gaps():
    s = build_spectrum([])
    assert len(s) == 0 and detect_peaks(s) == []
    s = spectrum_from_counts({1990: 3, 1995: 1})
    assert list(s.years) == list(range(1990, 1996))
    assert list(s.count) == [3, 0, 0, 0, 0, 1]


def test_edge_windows():
    s = spectrum_from_counts({2000: 1, 2001: 9, 2002: 4, 2003: 2})
    # clipped windows: {1,9,4}, {1,9,4,2}, {1,9,4,2}, {9,4,2}
    assert list(s.median5) == [4, 3, 3, 4]


@given(counts=st.lists(st.integers(0, 10_000), min_size=1, max_size=100),
       start=st.integers(1500, 1900))
def test_deviation_matches_brute_force(counts, start, backend):
    s = spectrum_from_counts({start + i: c for i, c in enumerate(counts)})
    assert [int(round(2 * d)) for d in s.deviation] == twice_deviation(counts)
    assert np.array_equal(2 * s.deviation, np.array(twice_deviation(counts), dtype=float))
    assert int(s.count.sum()) == sum(counts)


@given(st.lists(st.integers(0, 500), min_size=5, max_size=60), st.integers(0, 1000))
def test_translation_invariance(counts, c):
    a = spectrum_from_counts(dict(enumerate(counts)))
    b = spectrum_from_counts({k: v + c for k, v in enumerate(counts)})
    assert np.array_equal(a.deviation[2:-2], b.deviation[2:-2])


@given(st.lists(st.integers(0, 50), min_size=1, max_size=80))
def test_peaks_match_naive_scan(counts):
    s = spectrum_from_counts(dict(enumerate(counts, start=1900)))
    peaks = detect_peaks(s)
    assert peaks == naive_peaks(list(s.years), list(s.deviation))
    dev = s.deviation_map()
    assert all(dev[y] > 0 for y in peaks)
    assert all(b - a > 1 for a, b in zip(peaks, peaks[1:]))


def test_peak_shapes():
    s = Spectrum(np.arange(5), np.zeros(5, int), np.zeros(5), np.array([0.0, 2, 18, 3, 0]))
    assert detect_peaks(s) == [2]
    plateau = Spectrum(np.arange(4), np.zeros(4, int), np.zeros(4), np.array([0.0, 5, 5, 0]))
    assert detect_peaks(plateau) == []


def test_planted_spikes_are_exact_peaks():
    counts = planted_year_counts()
    s = spectrum_from_counts(counts)
    assert detect_peaks(s) == list(PLANTED_YEARS)


def test_csv_export():
    s = spectrum_from_counts({2000: 1, 2001: 5, 2002: 1})
    lines = s.to_csv().strip().split("\n")
    assert lines[0] == "year,count,median5,deviation,is_peak"
    assert lines[2] == "2001,5,1,4,1"
    assert Spectrum.from_dict(s.to_dict()).to_csv() == s.to_csv()


def _clusters(cites):
    refs = []
    for i, (au, n) in enumerate(cites):
        refs += [parse_cited_ref(f"{au}, 1996, J {au}, V{i + 1}, P{i + 1}", f"r{k}") for k in range(n)]
    return cluster_refs(refs)


def test_top_references():
    cl = _clusters([("ALPHA A", 5)])
    tl = top_references(cl, 1996)
    assert len(tl) == 1 and tl.entries[0].rank == 1 and tl.entries[0].count == 5
    assert len(top_references(cl, 1800)) == 0
    cl = _clusters([("ALPHA A", 5), ("BRAVO B", 5), ("CHARLIE C", 9), ("DELTA D", 1)])
    tl = top_references(cl, 1996, 10)
    assert [e.count for e in tl.entries] == [9, 5, 5, 1]
    assert [e.rank for e in tl.entries] == [1, 2, 2, 4]
    assert tl.entries[1].cluster.representative.first_author == "alpha a"


@given(st.lists(st.integers(1, 6), min_size=1, max_size=12), st.integers(1, 12))
def test_top_references_prefix(counts, n):
    names = ["ALPHA", "BRAVO", "CHARLIE", "DELTA", "ECHO", "FOXTROT", "GOLF", "HOTEL",
             "INDIA", "JULIETT", "KILO", "LIMA"]
    cl = _clusters([(f"{names[i]} X", c) for i, c in enumerate(counts)])
    a = top_references(cl, 1996, n).entries
    b = top_references(cl, 1996, n + 1).entries
    assert b[:len(a)] == a
    assert all(x.count >= y.count for x, y in zip(a, a[1:]))
