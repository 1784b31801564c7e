"""One-way ANOVA over cited years and Tukey-style year effects."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from .multi import MultiRpysMatrix


class StatsError(ValueError):
    pass


# ---------------------------------------------------------------------------
# studentized range distribution
# ---------------------------------------------------------------------------

def _composite_gl(lo: float, hi: float, panels: int, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


_Z_NODES, _Z_WEIGHTS = _composite_gl(-9.0, 9.0, 24, 16)
_LOG_PHI_Z = -0.5 * _Z_NODES ** 2 - 0.5 * math.log(2 * math.pi)


def _range_cdf_normal(w: np.ndarray, k: int) -> np.ndarray:
    """P(range of k iid N(0,1) < w), vectorised over ``w``."""
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    z = _Z_NODES[None, :]
    ww = w[:, None]
    upper = z + 0.5 * ww > 0
    # evaluate the probability mass on the side with the smaller tails
    diff = np.where(upper,
                    special.ndtr(-z) - special.ndtr(-z - ww),
                    special.ndtr(z + ww) - special.ndtr(z))
    with np.errstate(divide="ignore"):
        log_term = (k - 1) * np.log(np.clip(diff, 0.0, 1.0))
    integrand = np.exp(_LOG_PHI_Z[None, :] + log_term)
    out = k * integrand @ _Z_WEIGHTS
    out = np.where(w <= 0, 0.0, out)
    return np.clip(out, 0.0, 1.0)


@lru_cache(maxsize=256)
def _scale_nodes(df: float):
    """Quadrature over s = sqrt(chi2_df / df), carried out in log(s)."""
    a = 0.5 * df
    s_lo = math.sqrt(max(special.gammaincinv(a, 1e-13), 1e-300) / a)
    s_hi = math.sqrt(special.gammainccinv(a, 1e-13) / a)
    u, w = _composite_gl(math.log(s_lo), math.log(s_hi), 24, 16)
    s = np.exp(u)
    log_f = (a * math.log(df) - special.gammaln(a) - (a - 1) * math.log(2.0)
             + (df - 1) * u - 0.5 * df * s ** 2)
    return s, w * np.exp(log_f + u)


def studentized_range_cdf(q: float, k: int, df: float) -> float:
    """CDF of the studentized range for ``k`` means and ``df`` error dof.

    ``df=inf`` gives the range of standard normals.  Computed by
    Gauss-Legendre quadrature over the normal variable and the chi scale.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if q <= 0:
        return 0.0
    if math.isinf(df) or df > 1e5:
        return float(_range_cdf_normal(np.array([q]), k)[0])
    s, w = _scale_nodes(float(df))
    return float(np.clip(_range_cdf_normal(q * s, k) @ w, 0.0, 1.0))


@lru_cache(maxsize=1024)
def studentized_range_ppf(p: float, k: int, df: float) -> float:
    """Quantile of the studentized range; ``p=0.95`` gives the 5% critical q."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    hi = 2.0
    while studentized_range_cdf(hi, k, df) < p:
        hi *= 2.0
        if hi > 1e4:
            raise StatsError("studentized range quantile did not bracket")
    return float(optimize.brentq(lambda x: studentized_range_cdf(x, k, df) - p,
                                 0.0, hi, xtol=1e-10, rtol=1e-12))


def f_sf(f: float, df1: float, df2: float) -> float:
    """Upper tail of the F distribution."""
    if math.isinf(f):
        return 0.0
    if f <= 0:
        return 1.0
    return float(special.fdtrc(df1, df2, f))


# ---------------------------------------------------------------------------
# ANOVA
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnovaResult:
    f_stat: float
    df_between: int
    df_within: int
    p_value: float
    grand_mean: float
    ss_between: float
    ss_within: float

    @property
    def ms_within(self) -> float:
        return self.ss_within / self.df_within


@dataclass(frozen=True)
class YearEffect:
    cited_year: int
    ls_mean: float
    effect: float
    n_obs: int
    significant_vs_grand: bool = False


def _group_moments(values: np.ndarray, groups: np.ndarray):
    labels, inv = np.unique(groups, return_inverse=True)
    n = np.bincount(inv).astype(np.int64)
    sums = np.bincount(inv, weights=values)
    means = sums / n
    return labels, inv, n, means


def anova_oneway(values, groups) -> AnovaResult:
    """Classical one-way ANOVA of ``values`` grouped by ``groups``."""
    x = np.asarray(values, dtype=np.float64)
    g = np.asarray(groups)
    if x.size == 0:
        raise StatsError("no observations")
    labels, inv, n, means = _group_moments(x, g)
    k = labels.size
    N = x.size
    if k < 2:
        raise StatsError("ANOVA needs at least two groups")
    if N - k < 1:
        raise StatsError("ANOVA needs at least one group with two observations")
    grand = float(x.sum() / N)
    ssb = float(np.sum(n * (means - grand) ** 2))
    ssw = float(np.sum((x - means[inv]) ** 2))
    dfb, dfw = k - 1, N - k
    if np.ptp(x) == 0:
        return AnovaResult(0.0, dfb, dfw, 1.0, grand, 0.0, 0.0)
    if ssw == 0.0:
        return AnovaResult(math.inf, dfb, dfw, 0.0, grand, ssb, ssw)
    f = (ssb / dfb) / (ssw / dfw)
    return AnovaResult(f, dfb, dfw, f_sf(f, dfb, dfw), grand, ssb, ssw)


def anova_by_cited_year(m: MultiRpysMatrix) -> AnovaResult:
    """ANOVA of the matrix ranks with cited year as the factor.

    Every non-missing cell is one observation.
    """
    vals, cols = m.observations()
    return anova_oneway(vals, cols)


def _effects(m: MultiRpysMatrix):
    vals, cols = m.observations()
    res = anova_oneway(vals, cols)
    labels, _, n, means = _group_moments(vals, cols)
    return res, labels, n, means


def year_effects(m: MultiRpysMatrix, alpha: float = 0.05) -> list:
    """Per-cited-year LS means and effects (LS mean minus grand mean).

    A year is flagged significant when ``|effect|`` exceeds the Tukey-Kramer
    half-width ``q(alpha, k, df_within) * sqrt(MS_within / n_obs) / sqrt(2)``.
    Sorted by effect, largest first; ties go to the earlier year.
    """
    res, labels, n, means = _effects(m)
    q = studentized_range_ppf(1.0 - alpha, int(labels.size), float(res.df_within))
    msw = res.ms_within
    out = []
    for year, cnt, mean in zip(labels, n, means):
        effect = float(mean - res.grand_mean)
        half = q * math.sqrt(msw / cnt) / math.sqrt(2.0)
        out.append(YearEffect(int(year), float(mean), effect, int(cnt), abs(effect) > half))
    out.sort(key=lambda e: (-e.effect, e.cited_year))
    return out


def top_milestone_years(m: MultiRpysMatrix, k: int = 10) -> list:
    """The ``k`` cited years with the largest effects, in descending order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    res, labels, n, means = _effects(m)
    eff = means - res.grand_mean
    order = sorted(range(labels.size), key=lambda i: (-eff[i], int(labels[i])))
    return [int(labels[i]) for i in order[:k]]


# ---------------------------------------------------------------------------
# reporting
# ---------------------------------------------------------------------------

def stats_report(m: MultiRpysMatrix, k: int = 10, alpha: float = 0.05) -> dict:
    res = anova_by_cited_year(m)
    effects = year_effects(m, alpha)
    q = studentized_range_ppf(1.0 - alpha, len(effects), float(res.df_within))
    return {
        "anova": {
            "f_stat": res.f_stat,
            "df_between": res.df_between,
            "df_within": res.df_within,
            "p_value": res.p_value,
            "grand_mean": res.grand_mean,
            "ss_between": res.ss_between,
            "ss_within": res.ss_within,
        },
        "alpha": alpha,
        "hsd_q": q,
        "effects": [asdict(e) for e in effects],
        "top_years": [e.cited_year for e in effects[:k]],
    }


def stats_report_json(report: dict) -> str:
    return json.dumps(report, indent=1, allow_nan=True) + "\n"


def stats_text(report: dict, rows: int = 20) -> str:
    a = report["anova"]
    lines = [
        f"F = {a['f_stat']:.2f}; df = {a['df_between']}, {a['df_within']}; "
        f"p = {a['p_value']:.3g}",
        "",
        f"{'rank':>4} {'year':>6} {'ls_mean':>10} {'effect':>10} {'n':>5} sig",
    ]
    for i, e in enumerate(report["effects"][:rows], start=1):
        lines.append(f"{i:>4} {e['cited_year']:>6} {e['ls_mean']:>10.3f} "
                     f"{e['effect']:>10.3f} {e['n_obs']:>5} "
                     f"{'*' if e['significant_vs_grand'] else ''}")
    return "\n".join(lines) + "\n"
