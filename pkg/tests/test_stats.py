import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats as sps

from rpyskit.multi import MultiRpysMatrix
from rpyskit.stats import (StatsError, anova_by_cited_year, anova_oneway, f_sf, stats_report,
                           stats_text, studentized_range_cdf, studentized_range_ppf,
                           top_milestone_years, year_effects)
from rpyskit.synthetic import PLANTED_YEARS

from oracles import anova_direct

# upper 5% points of the studentized range, standard printed tables
Q_TABLE = {
    (2, 10): 3.151, (2, 20): 2.950, (2, 60): 2.829,
    (3, 10): 3.877, (3, 20): 3.578, (3, 60): 3.399,
    (5, 10): 4.654, (5, 20): 4.232, (5, 60): 3.977,
    (10, 10): 5.599, (10, 20): 5.008, (10, 60): 4.646,
}


def _matrix(rank):
    rank = np.asarray(rank, dtype=float)
    r, c = rank.shape
    return MultiRpysMatrix(np.arange(2000, 2000 + r), np.arange(1900, 1900 + c), rank,
                           rank.copy(), np.ones(r, dtype=np.int64))


def test_anova_hand_example():
    res = anova_oneway([1, 2, 3, 2, 3, 4], [0, 0, 0, 1, 1, 1])
    assert res.f_stat == 1.5
    assert res.ss_between == 1.5 and res.ss_within == 4.0
    assert (res.df_between, res.df_within) == (1, 4)
    assert res.p_value == pytest.approx(sps.f.sf(1.5, 1, 4), rel=1e-12)


def test_anova_degenerate_cases():
    assert anova_oneway([1, 2, 3, 1, 2, 3], [0, 0, 0, 1, 1, 1]).f_stat == 0.0
    res = anova_oneway([5, 5, 5, 5], [0, 0, 1, 1])
    assert (res.f_stat, res.p_value) == (0.0, 1.0)
    with pytest.raises(StatsError):
        anova_oneway([1, 2, 3], [0, 0, 0])
    with pytest.raises(StatsError):
        anova_oneway([1, 2], [0, 1])


@given(st.integers(2, 8), st.integers(2, 6), st.integers(0, 2 ** 31 - 1))
def test_anova_matches_direct(n_rows, n_cols, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n_rows, n_cols)) * rng.uniform(0.1, 10)
    m = _matrix(x)
    res = anova_by_cited_year(m)
    vals, cols = m.observations()
    f, dfb, dfw, ssb, ssw = anova_direct(vals.tolist(), cols.tolist())
    assert (res.df_between, res.df_within) == (dfb, dfw)
    assert res.f_stat == pytest.approx(f, rel=1e-9)
    assert anova_by_cited_year(_matrix(x + 17.0)).f_stat == pytest.approx(f, rel=1e-9)
    assert anova_by_cited_year(_matrix(x * 3.5)).f_stat == pytest.approx(f, rel=1e-9)
    eff = year_effects(m)
    total = sum(e.effect * e.n_obs for e in eff)
    assert abs(total) <= 1e-9 * max(1.0, float(np.abs(x).sum()))
    shifted = {e.cited_year: e.effect for e in year_effects(_matrix(x + 4.0))}
    for e in eff:
        assert e.effect == pytest.approx(shifted[e.cited_year], abs=1e-9)


def test_p_value_monotone_in_f():
    ps = [f_sf(f, 3, 20) for f in np.linspace(0, 10, 50)]
    assert all(a >= b for a, b in zip(ps, ps[1:]))


@pytest.mark.parametrize("k,df", sorted(Q_TABLE))
def test_q_against_table(k, df):
    assert studentized_range_ppf(0.95, k, df) == pytest.approx(Q_TABLE[(k, df)], abs=0.01)


@pytest.mark.parametrize("k,df,q", [(2, 5, 2.5), (3, 12, 3.1), (6, 30, 4.0), (10, 100, 5.0),
                                    (4, 3, 6.0), (20, 40, 5.5)])
def test_cdf_against_scipy(k, df, q):
    assert studentized_range_cdf(q, k, df) == pytest.approx(
        sps.studentized_range.cdf(q, k, df), abs=2e-6)


def test_q_equals_t_sqrt2_for_two_groups():
    for df in (5, 10, 30):
        t = sps.t.ppf(0.975, df)
        assert studentized_range_ppf(0.95, 2, df) == pytest.approx(t * math.sqrt(2), rel=1e-6)


def test_q_limits():
    assert studentized_range_cdf(0.0, 3, 10) == 0.0
    assert studentized_range_ppf(0.95, 3, math.inf) == pytest.approx(3.314, abs=0.001)
    with pytest.raises(ValueError):
        studentized_range_cdf(1.0, 1, 10)


def test_dominant_column_has_largest_effect():
    rng = np.random.default_rng(0)
    x = np.vstack([rng.permutation(6) + 1.0 for _ in range(8)])
    x[:, 3] = 7.0
    m = _matrix(x)
    assert year_effects(m)[0].cited_year == 1903
    assert top_milestone_years(m, 1) == [1903]
    assert len(top_milestone_years(m, 100)) == 6


@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 6))
def test_top_years_prefix(seed, k):
    x = np.random.default_rng(seed).integers(0, 4, size=(5, 8)).astype(float)
    x[0, 0] += 0.5
    m = _matrix(x)
    assert top_milestone_years(m, k + 1)[:k] == top_milestone_years(m, k)
    eff = year_effects(m)
    assert all((a.effect, -a.cited_year) >= (b.effect, -b.cited_year) for a, b in zip(eff, eff[1:]))


def test_planted_effects(planted_matrix):
    eff = year_effects(planted_matrix)
    assert {e.cited_year for e in eff[:18]} == set(PLANTED_YEARS)
    assert set(top_milestone_years(planted_matrix, 10)) <= set(PLANTED_YEARS)
    assert eff[0].significant_vs_grand
    rep = stats_report(planted_matrix)
    assert rep["top_years"] == top_milestone_years(planted_matrix, 10)
    assert rep["anova"]["df_between"] == planted_matrix.rank.shape[1] - 1
    assert "F = " in stats_text(rep)
