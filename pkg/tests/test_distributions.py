import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from chattox.stats import betainc, f_sf, t_sf_two_sided

mpmath.mp.dps = 40


def ref_betainc(a, b, x):
    return float(mpmath.betainc(a, b, 0, x, regularized=True))


def ref_f_sf(f, d1, d2):
    f = mpmath.mpf(f)
    return float(mpmath.betainc(d2 / 2, d1 / 2, 0, d2 / (d2 + d1 * f), regularized=True))


def ref_t_two_sided(t, df):
    t = mpmath.mpf(t)
    return float(mpmath.betainc(df / 2, 0.5, 0, df / (df + t * t), regularized=True))


@settings(max_examples=300, deadline=None)
@given(st.floats(0.05, 200), st.floats(0.05, 200), st.floats(0, 1))
def test_betainc_matches_high_precision(a, b, x):
    assert betainc(a, b, x) == pytest.approx(ref_betainc(a, b, x), rel=1e-10, abs=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 500), st.integers(1, 30), st.integers(1, 500))
def test_f_sf_matches_high_precision(f, d1, d2):
    assert f_sf(f, d1, d2) == pytest.approx(ref_f_sf(f, d1, d2), rel=1e-10, abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(-60, 60), st.floats(1, 400))
def test_t_two_sided_matches_high_precision(t, df):
    assert t_sf_two_sided(t, df) == pytest.approx(ref_t_two_sided(t, df), rel=1e-10, abs=1e-14)


def test_tiny_statistic_keeps_precision():
    # 1 - (2/pi) atan(sqrt(f)) for F(1, 1); naive 1 - x loses these digits
    f = 1.5e-17
    assert f_sf(f, 1, 1) == pytest.approx(1 - 2 / math.pi * math.atan(math.sqrt(f)), abs=1e-16)


def test_edges():
    assert f_sf(0.0, 2, 6) == 1.0
    assert f_sf(math.inf, 2, 6) == 0.0
    assert t_sf_two_sided(0.0, 8) == 1.0
    assert t_sf_two_sided(-math.inf, 8) == 0.0
    assert math.isnan(f_sf(math.nan, 1, 1))
    assert betainc(2, 3, 0) == 0 and betainc(2, 3, 1) == 1
