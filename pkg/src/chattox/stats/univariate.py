"""Agreement and classical group-comparison tests."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from ..errors import DegenerateAgreement, DegenerateInput
from .distributions import f_sf, t_sf_two_sided


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    df: tuple[float, ...] = ()
    method: str = ""

    __test__ = False  # not a pytest class

    def to_record(self) -> dict:
        return {"method": self.method, "statistic": _finite_or_str(self.statistic),
                "df": [_finite_or_str(d) for d in self.df], "p": self.p_value}

    def format(self) -> str:
        sym = "t" if self.method.startswith("welch") else ("W" if self.method == "levene" else "F")
        return f"({sym}={self.statistic:.2f}, {format_p(self.p_value)})"


def _finite_or_str(x: float):
    return x if math.isfinite(x) else str(x)


def format_p(p: float) -> str:
    return "p<0.001" if p < 0.001 else f"p={p:.3f}"


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    observed_agreement: float
    expected_agreement: float
    n: int = 0


def cohen_kappa(a: Sequence[Hashable], b: Sequence[Hashable]) -> KappaResult:
    """Cohen's kappa over the joint confusion table of two raters."""
    if len(a) != len(b):
        raise ValueError(f"rater lengths differ: {len(a)} vs {len(b)}")
    n = len(a)
    if n == 0:
        raise ValueError("need at least one rated item")
    po = sum(x == y for x, y in zip(a, b)) / n
    ca, cb = Counter(a), Counter(b)
    pe = sum(ca[k] * cb.get(k, 0) for k in ca) / (n * n)
    if pe >= 1.0:
        raise DegenerateAgreement("both raters use one identical label; kappa undefined")
    return KappaResult((po - pe) / (1.0 - pe), po, pe, n)


def _as_groups(groups) -> list[np.ndarray]:
    out = [np.asarray(g, dtype=float) for g in groups]
    if len(out) < 2:
        raise ValueError("need at least two groups")
    for g in out:
        if g.ndim != 1 or g.size < 2:
            raise ValueError("each group needs at least two values")
    return out


def _oneway(groups: list[np.ndarray]) -> tuple[float, float, int, int]:
    """Between and within sums of squares plus their degrees of freedom."""
    allv = np.concatenate(groups)
    grand = allv.mean()
    ssb = float(sum(g.size * (g.mean() - grand) ** 2 for g in groups))
    ssw = float(sum(((g - g.mean()) ** 2).sum() for g in groups))
    return ssb, ssw, len(groups) - 1, allv.size - len(groups)


def _f_from_ss(ssb, ssw, df1, df2) -> float:
    sst = ssb + ssw
    if ssw <= 1e-14 * sst:
        return math.inf
    return (ssb / df1) / (ssw / df2)


def anova_oneway(groups: Sequence[Sequence[float]]) -> TestResult:
    g = _as_groups(groups)
    ssb, ssw, df1, df2 = _oneway(g)
    if ssb == 0 and ssw == 0:
        raise DegenerateInput("all values identical; F undefined")
    f = float(_f_from_ss(ssb, ssw, df1, df2))
    return TestResult(f, f_sf(f, df1, df2), (float(df1), float(df2)), "anova")


def levene(groups: Sequence[Sequence[float]]) -> TestResult:
    """Levene's test with mean centring (not the Brown-Forsythe median variant)."""
    g = _as_groups(groups)
    dev = [np.abs(x - x.mean()) for x in g]
    ssb, ssw, df1, df2 = _oneway(dev)
    if ssb + ssw <= 0 or all(not d.any() for d in dev):
        return TestResult(0.0, 1.0, (float(df1), float(df2)), "levene")
    w = float(_f_from_ss(ssb, ssw, df1, df2))
    return TestResult(w, f_sf(w, df1, df2), (float(df1), float(df2)), "levene")


def welch_t(a: Sequence[float], b: Sequence[float]) -> TestResult:
    x, y = _as_groups([a, b])
    va, vb = x.var(ddof=1) / x.size, y.var(ddof=1) / y.size
    diff = x.mean() - y.mean()
    se2 = va + vb
    if se2 == 0:
        if diff == 0:
            raise DegenerateInput("both samples constant and equal")
        return TestResult(math.copysign(math.inf, diff), 0.0, (math.nan,), "welch_t")
    t = diff / math.sqrt(se2)
    df = se2 ** 2 / (va ** 2 / (x.size - 1) + vb ** 2 / (y.size - 1))
    t, df = float(t), float(df)
    return TestResult(t, t_sf_two_sided(t, df), (df,), "welch_t")


def pooled_t(a: Sequence[float], b: Sequence[float]) -> TestResult:
    x, y = _as_groups([a, b])
    df = x.size + y.size - 2
    sp2 = ((x.size - 1) * x.var(ddof=1) + (y.size - 1) * y.var(ddof=1)) / df
    t = float((x.mean() - y.mean()) / math.sqrt(sp2 * (1 / x.size + 1 / y.size)))
    return TestResult(t, t_sf_two_sided(t, df), (float(df),), "student_t")


def compare_groups(groups: Sequence[Sequence[float]], alpha: float = 0.05) -> tuple[TestResult, TestResult]:
    """Levene first; Welch's t if variances differ at ``alpha``, otherwise ANOVA.

    Welch applies to two groups only; with more groups ANOVA is always used.
    Returns ``(levene_result, chosen_test_result)``.
    """
    lev = levene(groups)
    if lev.p_value < alpha and len(groups) == 2:
        return lev, welch_t(groups[0], groups[1])
    return lev, anova_oneway(groups)
