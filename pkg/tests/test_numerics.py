import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from qharness import numerics as N
from qharness.densities import ParamQuadruple, wilson_log_pdf

# mpmath.loggamma at 40 digits, frozen
LOGGAMMA_ORACLE = [
    (0.5 + 1j, -0.6527906442043729 - 0.9550077243425691j),
    (0.25 + 7j, -10.562953339040002 + 6.230160500529651j),
    (-3.7 + 0.2j, -1.6364330925624564 - 12.663282679635772j),
    (12.5 - 20j, 6.10417817484252 - 55.35554623983286j),
    (1e-3 + 0j, 6.907178885383853 + 0j),
    (30 + 30j, 57.91762621817897 + 105.60098611532392j),
]

# -log(sqrt x) - log|Gamma(2i sqrt x)|^2 by mpmath, frozen
LOG_WEIGHT_ORACLE = [(1.0, 5.13845193398175), (100.0, 61.68712318594646),
                     (1e-6, -5.521454338134638)]


@pytest.mark.parametrize("z, want", LOGGAMMA_ORACLE)
def test_loggamma_matches_multiprecision(z, want):
    got = N.log_gamma_complex(z)
    assert abs(got - want) <= 1e-13 * max(1.0, abs(want))


def test_loggamma_trivial_values():
    assert abs(N.log_gamma_complex(1.0)) < 1e-13
    assert abs(N.log_gamma_complex(5.0) - math.log(24)) < 1e-13


def test_loggamma_matches_scipy_on_grid():
    rng = np.random.default_rng(1)
    z = rng.uniform(-20, 40, 2000) + 1j * rng.uniform(-40, 40, 2000)
    got = N.log_gamma_complex(z)
    want = special.loggamma(z)
    # compare Gamma itself: branch of the imaginary part may differ by 2 pi k
    rel = np.abs(np.expm1(got - want))
    assert rel.max() < 1e-12


@pytest.mark.parametrize("z", [0.0, -1.0, -7.0, -3.0 + 1e-13])
def test_loggamma_pole(z):
    with pytest.raises(N.PoleError):
        N.log_gamma_complex(z)


@given(st.floats(-25, 25), st.floats(-25, 25))
def test_loggamma_recurrence(re, im):
    z = complex(re, im)
    if abs(z) > 30 or min(abs(z - k) for k in range(-30, 1)) < 1e-3:
        return
    lhs = N.log_gamma_complex(z + 1)
    rhs = N.log_gamma_complex(z) + np.log(z)
    assert abs(np.expm1(lhs - rhs)) < 1e-12


def test_log_abs_gamma_sq_examples():
    assert abs(N.log_abs_gamma_sq(1.0, 0.0)) < 1e-13
    assert abs(N.log_abs_gamma_sq(1.0, 1.0) - math.log(math.pi / math.sinh(math.pi))) < 1e-13
    # 2 Re loggamma(0.5 + 2i) by mpmath
    assert abs(N.log_abs_gamma_sq(0.5, 4.0) - -4.445311728106517) < 1e-13
    assert abs(N.log_abs_gamma_sq(0.5, 2.0, mode="linear-arg") - -4.445311728106517) < 1e-13


@given(st.floats(0.05, 5), st.floats(-5, 5), st.floats(0, 20))
def test_log_abs_gamma_sq_conjugate_pair_real_and_symmetric(re, im, y):
    # the factor |G(a+iy)|^2 |G(conj(a)+iy)|^2 of a conjugate pair is real and even in y
    a = complex(re, im)
    pair = lambda y: (N.log_abs_gamma_sq(a, y, mode="linear-arg")
                      + N.log_abs_gamma_sq(a.conjugate(), y, mode="linear-arg"))
    v, w = pair(y), pair(-y)
    assert np.isreal(v) and np.isfinite(v)
    assert abs(v - w) <= 1e-12 * max(1.0, abs(v))


@pytest.mark.parametrize("x, want", LOG_WEIGHT_ORACLE)
def test_log_weight_matches_gamma_route_oracle(x, want):
    assert abs(N.log_weight(x) - want) <= 1e-12 * max(1.0, abs(want))


def test_log_weight_small_and_large():
    x = np.array([1e-14, 1e-10])
    assert np.all(np.abs(N.log_weight(x) - np.log(4 * np.sqrt(x))) < 1e-6)
    big = N.log_weight(1e6)
    assert np.isfinite(big)
    assert abs(big - (2 * math.pi * 1e3 - math.log(math.pi))) < 1e-9


def test_log_weight_closed_form_matches_naive_gamma_route():
    x = np.linspace(0.01, 20, 200)
    naive = -0.5 * np.log(x) - 2 * np.real(special.loggamma(2j * np.sqrt(x)))
    assert np.max(np.abs(N.log_weight(x) - naive)) < 1e-10


def test_log_weight_domain():
    with pytest.raises(ValueError):
        N.log_weight(0.0)
    with pytest.raises(ValueError):
        N.log_weight(-1.0)


def test_integrate_examples():
    r = N.integrate(lambda x: stats.norm.logpdf(x), "full-line", 1e-12)
    assert abs(r.value - 1) < 1e-10 and r.abs_error_estimate >= 0 and r.evaluations > 0
    r = N.integrate(lambda x: -x, "half-line", 1e-13)
    assert abs(r.value - 1) < 1e-12
    p = ParamQuadruple(1, 1, 1, 1)
    r = N.integrate(lambda x: wilson_log_pdf(p, x), "half-line", 1e-10)
    assert abs(r.value - 1) < 1e-8


def test_integrate_beta_interval_gap_aware():
    lf = lambda x, lo, hi: 4 * np.log(lo) + 0.5 * np.log(hi) - special.betaln(5, 1.5)
    r = N.integrate(lf, (0.0, 1.0), 1e-12, gap_aware=True)
    assert abs(r.value - 1) < 1e-11


@pytest.mark.parametrize("split", [-1.3, 0.0, 0.4, 2.5])
def test_integrate_split_invariance(split):
    lf = lambda x: stats.t.logpdf(x, df=7, loc=0.3, scale=1.7)
    whole = N.integrate(lf, "full-line", 1e-12)
    left = N.integrate(lf, (-math.inf, split), 1e-12)
    right = N.integrate(lf, (split, math.inf), 1e-12)
    tol = whole.abs_error_estimate + left.abs_error_estimate + right.abs_error_estimate + 1e-14
    assert abs(left.value + right.value - whole.value) <= tol


def test_integrate_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        N.integrate(lambda x: -x, "half-line", 1e-15)
    with pytest.raises(ValueError):
        N.integrate(lambda x: -x, "half-line", 0.1)


def test_integrate_budget_exhaustion():
    # wildly oscillating integrand cannot converge inside a tiny budget
    lf = lambda x: np.log(2 + np.sin(1e4 * x)) - x
    with pytest.raises(N.QuadratureError):
        N.integrate(lf, "half-line", 1e-13, max_evals=300)


# --- quantile tables

def test_table_uniform():
    tab = N.tabulate_inverse_cdf(lambda x, lo, hi: np.zeros_like(x), (0.0, 1.0), 64, gap_aware=True)
    u = np.linspace(1e-6, 1 - 1e-6, 1001)
    assert np.max(np.abs(tab(u) - u)) < 1e-9


def test_table_beta_median():
    lf = lambda x: np.log(6 * x * (1 - x))
    tab = N.tabulate_inverse_cdf(lf, (0.0, 1.0), 64)
    assert abs(tab(0.5) - 0.5) < 1e-9


def test_table_wilson_median_self_consistent():
    p = ParamQuadruple(1, 1, 1, 1)
    lf = lambda x: wilson_log_pdf(p, x)
    tab = N.tabulate_inverse_cdf(lf, "half-line", 512, hint=(1.0, math.sqrt(0.8)))
    q = float(tab(0.5))
    cdf = N.integrate(lf, (0.0, q), 1e-12).value
    assert abs(cdf - 0.5) < 1e-6


def test_table_against_scipy_quantiles():
    lf = lambda x: stats.gamma.logpdf(x, 2.5)
    tab = N.tabulate_inverse_cdf(lf, "half-line", 256, hint=(2.5, 1.6))
    u = np.linspace(1e-5, 1 - 1e-5, 999)
    x = tab(u)
    assert np.all(np.diff(x) > 0)
    assert np.max(np.abs(stats.gamma.cdf(x, 2.5) - u)) < 1e-8
    assert np.max(np.abs(tab.cdf(x) - u)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 4), st.floats(2.1, 30))
def test_table_cdf_accuracy_property(loc, scale, df):
    lf = lambda x: stats.t.logpdf(x, df, loc, scale)
    tab = N.tabulate_inverse_cdf(lf, "full-line", 128, hint=(loc, scale))
    u = np.linspace(1e-4, 1 - 1e-4, 301)
    x = tab(u)
    assert np.all(np.diff(x) > 0)
    assert np.max(np.abs(stats.t.cdf(x, df, loc, scale) - u)) < 1e-6


def test_table_rows_match_scalar_tables():
    locs = np.array([-2.0, 0.0, 0.7, 5.0])
    scales = np.array([0.5, 1.0, 2.0, 0.1])

    def lf(x, rows):
        return stats.norm.logpdf(x, locs[rows][:, None], scales[rows][:, None])

    tabs = N.tabulate_inverse_cdf_rows(lf, "full-line", locs, scales, 256)
    u = np.linspace(0.001, 0.999, 200)
    for r in range(4):
        x = tabs.quantile(np.full(u.size, r), u)
        assert np.max(np.abs(stats.norm.cdf(x, locs[r], scales[r]) - u)) < 1e-6
