import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint, stats

from qharness import densities as D
from qharness.densities import BetaParams, HahnParams, ParamQuadruple, SecantParams

# log f(1; 1,1,1,1) and log f(2.5; .5+-i, .5+-.5i) by mpmath at 40 digits
WILSON_ORACLE = [((1, 1, 1, 1), 1.0, -0.8081984381743372),
                 ((0.5 + 1j, 0.5 - 1j, 0.5 + 0.5j, 0.5 - 0.5j), 2.5, -3.4347237780715334)]

WILSON_GRID = [(1, 1, 1, 1), (0.5, 0.5, 0.5, 0.5), (0.3, 1.7, 2.2, 0.9),
               (0.5 + 1j, 0.5 - 1j, 0.5 + 0.5j, 0.5 - 0.5j), (1.2 + 2j, 1.2 - 2j, 0.4, 3.0)]
THREE_GRID = [(1, 1, 1), (0.5, 2.0, 0.3), (1.5, 0.7 + 1.1j, 0.7 - 1.1j)]
HAHN_GRID = [(1, 1), (1 + 1j, 1 - 1j), (0.4 + 2j, 1.3 - 0.5j)]
SECANT_GRID = [(1, 0.0), (0.5, 1.0), (2.0, -2.5)]


def quad(logf, lo, hi, k=0, center=0.0):
    # independent oracle: scipy QUADPACK, split at the centre of mass
    f = lambda x: x ** k * math.exp(logf(x))
    return sum(sint.quad(f, a, b, limit=400, epsabs=0, epsrel=1e-12)[0]
               for a, b in [(lo, center), (center, hi)])


def moments(logf, lo, hi, center):
    m0 = quad(logf, lo, hi, 0, center)
    m1 = quad(logf, lo, hi, 1, center) / m0
    m2 = quad(lambda x: logf(x), lo, hi, 2, center) / m0
    return m0, m1, m2 - m1 * m1


@pytest.mark.parametrize("params, x, want", WILSON_ORACLE)
def test_wilson_log_pdf_matches_multiprecision(params, x, want):
    assert abs(D.wilson_log_pdf(ParamQuadruple(*params), x) - want) < 1e-12


def test_wilson_norm_const_example():
    assert abs(D.wilson_log_norm_const(ParamQuadruple(1, 1, 1, 1)) - math.log(6 / (4 * math.pi))) < 1e-14
    v = D.wilson_log_norm_const(ParamQuadruple(0.5 + 1j, 0.5 + 1j, 0.5 - 1j, 0.5 - 1j))
    assert isinstance(v, float) and math.isfinite(v)


@pytest.mark.parametrize("params", WILSON_GRID)
def test_wilson_permutation_invariance(params):
    x = np.array([0.01, 0.7, 3.0, 25.0])
    base = D.wilson_log_pdf(ParamQuadruple(*params), x)
    c0 = D.wilson_log_norm_const(ParamQuadruple(*params))
    for perm in itertools.permutations(params):
        assert np.max(np.abs(D.wilson_log_pdf(ParamQuadruple(*perm), x) - base)) < 1e-12
        assert abs(D.wilson_log_norm_const(ParamQuadruple(*perm)) - c0) < 1e-12


@pytest.mark.parametrize("params", WILSON_GRID)
def test_wilson_normalization_and_moments(params):
    p = ParamQuadruple(*params)
    mean, var = D.wilson_mean(p), D.wilson_var(p)
    m0, m1, v = moments(lambda x: D.wilson_log_pdf(p, x), 0, math.inf, mean)
    assert abs(m0 - 1) < 1e-8
    assert abs(m1 - mean) < 1e-8 * abs(mean)
    assert abs(v - var) < 1e-8 * var


def test_wilson_worked_moments():
    p = ParamQuadruple(1, 1, 1, 1)
    assert abs(D.wilson_mean(p) - 1) < 1e-15 and abs(D.wilson_var(p) - 0.8) < 1e-15
    p = ParamQuadruple(0.5, 0.5, 0.5, 0.5)
    assert abs(D.wilson_mean(p) - 0.25) < 1e-15 and abs(D.wilson_var(p) - 1 / 12) < 1e-15


def test_wilson_small_x_behaviour():
    p = ParamQuadruple(1, 1, 1, 1)
    x = np.array([1e-8, 1e-10])
    slope = np.diff(D.wilson_log_pdf(p, x)) / np.diff(np.log(x))
    assert abs(slope[0] - 0.5) < 1e-6


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 3), st.floats(-3, 3), st.floats(0.05, 3), st.floats(-3, 3), st.floats(0.001, 50))
def test_wilson_two_pairs_real(ra, ia, rc, ic, x):
    p = ParamQuadruple(complex(ra, ia), complex(ra, -ia), complex(rc, ic), complex(rc, -ic))
    v = D.wilson_log_pdf(p, x)
    assert isinstance(float(v), float) and math.isfinite(v)


@pytest.mark.parametrize("bad", [(0, 1, 1, 1), (1 + 1j, 1, 1, 1), (-0.5, 1, 1, 1), (1e-13, 1, 1, 1),
                                 (1 + 1j, 1 + 1j, 1, 1)])
def test_wilson_rejects_invalid(bad):
    with pytest.raises(D.ParameterError):
        ParamQuadruple(*bad)


def test_classification():
    assert ParamQuadruple(1, 2, 3, 4).classification is D.Classification.ALL_REAL
    assert ParamQuadruple(1 + 1j, 1 - 1j, 3, 4).classification is D.Classification.ONE_PAIR
    assert ParamQuadruple(1 + 1j, 2 - 1j, 2 + 1j, 1 - 1j).classification is D.Classification.TWO_PAIRS


def test_wilson_domain_error():
    with pytest.raises(D.DomainError):
        D.wilson_log_pdf(ParamQuadruple(1, 1, 1, 1), 0.0)


@pytest.mark.parametrize("abc", THREE_GRID)
def test_threeparam_normalization_and_moments(abc):
    mean, var = D.threeparam_mean(*abc), D.threeparam_var(*abc)
    m0, m1, v = moments(lambda x: D.threeparam_log_pdf(*abc, x), 0, math.inf, mean)
    assert abs(m0 - 1) < 1e-8
    assert abs(m1 - mean) < 1e-8 * mean
    assert abs(v - var) < 1e-8 * var


def test_threeparam_worked_moments():
    assert D.threeparam_mean(1, 1, 1) == 3 and D.threeparam_var(1, 1, 1) == 8


def test_threeparam_rejects_unordered_or_unpaired():
    with pytest.raises(D.ParameterError):
        D.threeparam_log_pdf(1, 1 + 1j, 2, 1.0)
    with pytest.raises(D.ParameterError):
        D.threeparam_log_pdf(-1, 1, 1, 1.0)


@pytest.mark.parametrize("ab", HAHN_GRID)
def test_hahn_normalization_and_moments(ab):
    p = HahnParams(*ab)
    mean, var = D.hahn_mean(p), D.hahn_var(p)
    m0, m1, v = moments(lambda x: D.hahn_log_pdf(p, x), -math.inf, math.inf, mean)
    assert abs(m0 - 1) < 1e-8
    assert abs(m1 - mean) < 1e-8 * math.sqrt(var)
    assert abs(v - var) < 1e-8 * var


def test_hahn_worked_moments():
    p = HahnParams(1, 1)
    assert D.hahn_mean(p) == 0 and abs(D.hahn_var(p) - 0.2) < 1e-15
    assert D.hahn_mean(HahnParams(1 + 1j, 1 - 1j)) == 0


@pytest.mark.parametrize("a, beta", SECANT_GRID)
def test_secant_normalization_and_moments(a, beta):
    p = SecantParams(a, beta)
    mean, var = D.secant_mean(p), D.secant_var(p)
    m0, m1, v = moments(lambda x: D.secant_log_pdf(p, x), -math.inf, math.inf, mean)
    assert abs(m0 - 1) < 1e-8
    assert abs(m1 - mean) < 1e-8 * max(abs(mean), math.sqrt(var))
    assert abs(v - var) < 1e-8 * var


def test_secant_worked_moments():
    p = SecantParams(1, 0.0)
    assert D.secant_mean(p) == 0 and D.secant_var(p) == 0.5
    p = SecantParams(2, math.pi / 2)
    assert abs(D.secant_mean(p) - 2) < 1e-15 and abs(D.secant_var(p) - 2) < 1e-14


def test_secant_matches_scipy_hypsecant_and_closed_form():
    x = np.linspace(-4, 4, 33)
    # a = 1/2: density 1/cosh(pi x), i.e. scipy's hypsecant scaled by pi
    want = stats.hypsecant.logpdf(math.pi * x) + math.log(math.pi)
    assert np.max(np.abs(D.secant_log_pdf(SecantParams(0.5, 0.0), x) - want)) < 1e-13
    # a = 1: |Gamma(1 + ix)|^2 = pi x / sinh(pi x)
    x = x[x != 0]
    want = np.log(2 * x / np.sinh(np.pi * x))
    assert np.max(np.abs(D.secant_log_pdf(SecantParams(1.0, 0.0), x) - want)) < 1e-13


def test_secant_rejects_beta():
    with pytest.raises(D.ParameterError):
        SecantParams(1, math.pi)


def test_beta_matches_scipy():
    x = np.linspace(0.01, 0.99, 50)
    for a, b in [(1, 1), (2, 1), (0.3, 4.5), (7, 7)]:
        got = D.beta_log_pdf(BetaParams(a, b), x)
        assert np.max(np.abs(got - stats.beta.logpdf(x, a, b))) < 1e-12
        assert abs(D.beta_mean(BetaParams(a, b)) - a / (a + b)) < 1e-15
        assert abs(D.beta_var(BetaParams(a, b)) - stats.beta.var(a, b)) < 1e-14
    assert D.beta_mean(BetaParams(1, 1)) == 0.5 and abs(D.beta_var(BetaParams(1, 1)) - 1 / 12) < 1e-16
    assert abs(D.beta_mean(BetaParams(2, 1)) - 2 / 3) < 1e-16


def test_beta_domain():
    with pytest.raises(D.DomainError):
        D.beta_log_pdf(BetaParams(2, 2), 1.0)
    with pytest.raises(D.DomainError):
        D.beta_log_pdf(BetaParams(2, 2), -0.1)


# --- pivot identities as properties

pos = st.floats(0.1, 3)
state = st.floats(0.01, 20)


@settings(max_examples=60, deadline=None)
@given(pos, pos, pos, pos, pos, state, state)
def test_wilson_pivot(a, b, c, d, m, x, y):
    assert abs(D.wilson_pivot_residual(a, b, c, d, m, x, y)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(pos, pos, pos, pos, state, state)
def test_threeparam_pivot(a, b, c, m, x, y):
    b, c = max(b, c), min(b, c)
    assert abs(D.threeparam_pivot_residual(a, b, c, m, x, y)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(pos, st.floats(-2, 2), pos, st.floats(-2, 2), pos, st.floats(-6, 6), st.floats(-6, 6))
def test_hahn_pivot(ra, ia, rb, ib, m, x, y):
    assert abs(D.hahn_pivot_residual(complex(ra, ia), complex(rb, ib), m, x, y)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(pos, pos, st.floats(-3, 3), st.floats(-6, 6), st.floats(-6, 6))
def test_secant_pivot(a, m, beta, x, y):
    assert abs(D.secant_pivot_residual(a, m, beta, x, y)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(pos, pos, pos, st.floats(0.01, 0.98), st.floats(0.01, 0.99))
def test_beta_pivot(a, b, m, x, t):
    y = x + t * (1 - x)
    if not x < y < 1:
        return
    assert abs(D.beta_pivot_residual(a, b, m, x, y)) < 1e-10
