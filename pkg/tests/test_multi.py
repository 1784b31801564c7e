import math
import random

import numpy as np
from hypothesis import given, strategies as st
from scipy.stats import rankdata

from rpyskit.disambig import cluster_refs
from rpyskit.multi import (MultiRpysMatrix, SegmentSpec, build_matrix, matrix_from_spectra,
                           rank_transform, segment_by_citing_year, segment_spectra)
from rpyskit.rpys import build_spectrum
from rpyskit.synthetic import CITING_YEARS
from rpyskit.wos import CitingRecord, Corpus

from oracles import pairwise_ranks


def _corpus(years):
    return Corpus(tuple(CitingRecord(f"R{i}", y, cited_refs=(f"A B, {1950 + i % 7}, J X, V1, P1",))
                        for i, y in enumerate(years)))


def test_segmentation_examples():
    c = _corpus([2010, 2010, 2012])
    segs = segment_by_citing_year(c)
    assert [(y, len(s)) for y, s in segs] == [(2010, 2), (2012, 1)]
    segs = segment_by_citing_year(c, SegmentSpec(min_segment_records=2))
    assert [y for y, _ in segs] == [2010]
    c2 = Corpus(c.records + (CitingRecord("X", None),))
    assert sum(len(s) for _, s in segment_by_citing_year(c2)) == 3
    segs = segment_by_citing_year(c, SegmentSpec(citing_year_range=(2011, 2020)))
    assert [y for y, _ in segs] == [2012]


def test_rank_transform_examples():
    assert rank_transform({"A": -1, "B": 0, "C": 5}) == {"A": 1, "B": 2, "C": 3}
    assert rank_transform({"A": 2, "B": 2}) == {"A": 1.5, "B": 1.5}
    assert rank_transform({"A": None, "B": 1.0, "C": float("nan")}) == {"A": None, "B": 1.0, "C": None}


@given(st.lists(st.integers(-20, 20), min_size=1, max_size=40),
       st.floats(0.001, 1000, allow_nan=False))
def test_rank_transform_properties(vals, c):
    d = dict(enumerate(vals))
    r = rank_transform(d)
    assert [r[k] for k in d] == pairwise_ranks(vals)
    assert np.array_equal([r[k] for k in d], rankdata(vals, method="average"))
    assert rank_transform({k: v * c for k, v in d.items()}) == r
    if len(set(vals)) == len(vals):
        assert sorted(r.values()) == list(range(1, len(vals) + 1))
    assert math.isclose(sum(r.values()), len(vals) * (len(vals) + 1) / 2)


def test_single_segment_matches_global(backend):
    recs = tuple(CitingRecord(f"R{i}", 2000, cited_refs=tuple(
        f"W{j} A, {1950 + (i * j) % 30}, J Y, V{j}, P{j}" for j in range(8))) for i in range(20))
    c = Corpus(recs)
    cl = cluster_refs(c.cited_refs())
    m = build_matrix(c, cl)
    s = build_spectrum(cl)
    assert m.rank.shape == (1, len(s))
    want = rank_transform(s.deviation_map())
    assert list(m.rank[0]) == [want[int(y)] for y in s.years]


def _check_rows(m):
    for i in range(m.rank.shape[0]):
        row = m.rank[i]
        ok = ~np.isnan(row)
        vals = row[ok]
        assert math.isclose(vals.sum(), vals.size * (vals.size + 1) / 2)
        assert np.array_equal(vals, rankdata(m.deviation[i][ok], method="average"))


def test_planted_matrix_properties(planted_matrix, planted_corpora):
    m = planted_matrix
    assert list(m.citing_years) == list(CITING_YEARS)
    assert int(m.segment_sizes.sum()) == len(planted_corpora[0])
    _check_rows(m)
    col = m.column(1980)
    ok = ~np.isnan(m.rank)
    assert np.array_equal(col, np.nanmax(np.where(ok, m.rank, -np.inf), axis=1))
    # cited years after the citing year are outside the segment span
    for i, cy in enumerate(m.citing_years):
        assert np.all(np.isnan(m.rank[i, m.cited_years >= cy]))


def test_matrix_permutation_and_serialisation():
    rng = random.Random(5)
    recs = [CitingRecord(f"R{i}", 2000 + i % 4, cited_refs=tuple(
        f"W{j} A, {1970 + (i + j) % 25}, J Y, V{j}, P{j}" for j in range(6))) for i in range(40)]
    a = build_matrix(Corpus(tuple(recs)))
    rng.shuffle(recs)
    b = build_matrix(Corpus(tuple(recs)))
    assert a.to_json() == b.to_json()
    assert MultiRpysMatrix.from_json(a.to_json()).to_json() == a.to_json()
    spectra, sizes = segment_spectra(Corpus(tuple(recs)))
    from rpyskit.rpys import Spectrum
    again = matrix_from_spectra({k: Spectrum.from_dict(v.to_dict()) for k, v in spectra.items()}, sizes)
    assert again.to_json() == a.to_json()
    _check_rows(a)
    lines = a.to_long_csv().strip().split("\n")
    assert lines[0] == "citing_year,cited_year,rank"
    assert len(lines) - 1 == int((~np.isnan(a.rank)).sum())


def test_positive_scale_row_invariance():
    dev = np.array([3.0, -1.0, 0.0, 7.0, 7.0])
    from rpyskit import _kernels
    assert np.array_equal(_kernels.average_ranks(dev), _kernels.average_ranks(dev * 2.5))
