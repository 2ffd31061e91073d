import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qharness import standardize as S
from qharness.densities import ParameterError
from qharness.processes import Dirichlet, FourParam, Secant, ThreeParam, TimeInterval, TwoParam
from qharness.standardize import HarnessParams, StandardizationInput


def close(p, q, tol=1e-12):
    return all(abs(a - b) <= tol * max(1.0, abs(b)) for a, b in zip(p.as_tuple(), q.as_tuple()))


def test_identity_configuration():
    inp = StandardizationInput(0, 0, 0, 1, 0, 1, chi0=1)
    proc, p = S.mobius_standardize(inp, TimeInterval(0.0, 5.0))
    assert p.as_tuple() == (0, 0, 0, 1, 1)
    for t in (0.3, 1.0, 4.2):
        assert proc.ell(t) == t and proc.m(t) == 1 and proc.inverse_time(t) == t
    assert proc.domain.as_tuple() == (0.0, 5.0)


def test_fourparam_worked_example():
    _, p = S.standardize(FourParam(1, 1, 1, 1))
    want = HarnessParams(2 / math.sqrt(5), 2 / math.sqrt(5), 0.2, 0.2, 0.6)
    assert close(p, want)
    assert close(S.harness_params_four(FourParam(1, 1, 1, 1)), want)


def test_negative_epsilon_gives_gamma_below_one():
    inp = StandardizationInput(0.3, 0.2, 1.0, 2.0, -1, 0.7, chi0=0.5, eta0=1.0)
    _, p = S.mobius_standardize(inp, TimeInterval(-1.0, 2.0))
    assert p.gamma < 1
    assert abs(p.gamma - (1 - 2 * math.sqrt(p.sigma * p.tau))) < 1e-15


def test_input_validation():
    with pytest.raises(ParameterError):
        StandardizationInput(0, 0, 0, 1, 0.5, 1, chi0=1)
    with pytest.raises(ParameterError):
        StandardizationInput(0, 0, 2, 1, 1, 1, chi0=1)
    with pytest.raises(ParameterError):
        StandardizationInput(0, 0, 0, 1, 0, 1, chi0=0)


def test_fourparam_domains():
    f = FourParam(0.5 + 1j, 0.5 - 1j, 0.5 + 0.5j, 0.5 - 0.5j)
    proc, _ = S.standardize(f)
    assert proc.domain.as_tuple() == (0.0, math.inf)
    assert S.closed_form_domain(f).as_tuple() == (0.0, math.inf)
    p = S.harness_params_four(FourParam(0.7, 0.7, 1.3, 1.3))
    assert abs(p.theta - p.eta) < 1e-15


def test_threeparam_examples():
    p = S.harness_params_three(ThreeParam(1, 1, 1))
    assert p.as_tuple() == (0.5, 2.0, 0.0, 1.0, 1.0)
    # conjugate B, C: T' starts at 0; it ends at 2A + B + C because T is bounded by A
    proc, _ = S.standardize(ThreeParam(0.8, 0.6 + 1j, 0.6 - 1j))
    assert proc.domain.lo == 0 and abs(proc.domain.hi - 2.8) < 1e-15
    assert close(S.scale_transform(p, 3.0), HarnessParams(0.5 / 3, 6.0, 0.0, 9.0, 1.0))


def test_twoparam_examples():
    p = S.harness_params_two(TwoParam(0.6 + 0.4j, 0.9 + 0.4j))
    assert p.eta == 0 and p.theta == 0
    # Re(A+B) = 1.5, Im(A-B) = 1.125
    p = S.harness_params_two(TwoParam(0.75 + 0.5625j, 0.75 - 0.5625j))
    assert close(p, HarnessParams(0.6, -0.6, 0.25, 0.25, 0.5))


@settings(max_examples=100)
@given(st.floats(0.05, 5), st.floats(-5, 5), st.floats(0.05, 5), st.floats(-5, 5))
def test_twoparam_bridge_relation(ra, ia, rb, ib):
    p = S.harness_params_two(TwoParam(complex(ra, ia), complex(rb, ib)))
    assert abs(p.eta * math.sqrt(p.tau) + p.theta * math.sqrt(p.sigma)) < 1e-14


def test_dirichlet_examples():
    p = S.harness_params_dirichlet(Dirichlet(3))
    assert close(p, HarnessParams(-1.0, 1.0, 0.25, 0.25, 0.5))
    big = S.harness_params_dirichlet(Dirichlet(1e12))
    assert big.sigma < 1e-11 and abs(big.eta) < 1e-5
    for a in (0.1, 1.0, 7.5, 300.0):
        q = S.harness_params_dirichlet(Dirichlet(a))
        assert abs(q.theta ** 2 - 4 * q.tau) < 1e-14


def test_transformations():
    p = HarnessParams(0.5, 2.0, 0.0, 1.0, 1.0)
    assert close(S.scale_transform(p, 2.0), HarnessParams(0.25, 4.0, 0.0, 4.0, 1.0))
    q = HarnessParams(0.3, -1.2, 0.4, 0.1, 0.6)
    assert S.time_inversion(S.time_inversion(q)) == q
    assert close(S.scale_transform(S.scale_transform(q, 1.7), 1 / 1.7), q)
    assert S.time_inversion(q).gamma == q.gamma == S.scale_transform(q, 5.0).gamma
    with pytest.raises(ParameterError):
        S.scale_transform(q, 0.0)


pos = st.floats(0.1, 3)
imag = st.floats(-3, 3)


@st.composite
def families(draw):
    kind = draw(st.sampled_from(["four-real", "four-one", "four-two", "three", "three-pair",
                                 "two", "secant", "dirichlet"]))
    if kind == "four-real":
        return FourParam(draw(pos), draw(pos), draw(pos), draw(pos))
    if kind == "four-one":
        a, i = draw(pos), draw(imag)
        return FourParam(complex(a, i), complex(a, -i), draw(pos), draw(pos))
    if kind == "four-two":
        a, i, c, k = draw(pos), draw(imag), draw(pos), draw(imag)
        return FourParam(complex(a, i), complex(a, -i), complex(c, k), complex(c, -k))
    if kind == "three":
        b, c = draw(pos), draw(pos)
        return ThreeParam(draw(pos), max(b, c), min(b, c))
    if kind == "three-pair":
        b, i = draw(pos), draw(imag)
        return ThreeParam(draw(pos), complex(b, i), complex(b, -i))
    if kind == "two":
        return TwoParam(complex(draw(pos), draw(imag)), complex(draw(pos), draw(imag)))
    if kind == "secant":
        return Secant(draw(st.floats(-3.1, 3.1)))
    return Dirichlet(draw(st.floats(0.05, 50)))


@settings(max_examples=300, deadline=None)
@given(families())
def test_mobius_route_matches_closed_forms(fam):
    proc, p = S.standardize(fam)
    q = S.harness_params(fam)
    assert close(p, q, 1e-12)
    assert abs(p.gamma - (1 + 2 * proc.input.epsilon * math.sqrt(p.sigma * p.tau))) <= 1e-15
    dom, closed = proc.domain, S.closed_form_domain(fam)
    for a, b in ((dom.lo, closed.lo), (dom.hi, closed.hi)):
        assert a == b or abs(a - b) <= 1e-12 * max(1.0, abs(b))


@settings(max_examples=100, deadline=None)
@given(families(), st.floats(0.01, 0.99))
def test_time_maps_are_inverse(fam, q):
    proc, _ = S.standardize(fam)
    lo, hi = proc.domain.lo, proc.domain.hi
    t = lo + (min(hi, lo + 10) - lo) * q
    r = proc.inverse_time(t)
    assert r in proc.source_domain
    assert abs(proc.forward_time(r) - t) < 1e-10 * max(1.0, abs(t))
    assert abs(proc.ell(t) / proc.m(t) - r) < 1e-10 * max(1.0, abs(r))


@pytest.mark.parametrize("fam", [FourParam(1, 1, 1, 1), ThreeParam(1, 2, 0.5), TwoParam(0.8 + 0.2j, 1.1 - 0.7j),
                                 Secant(1.1), Dirichlet(2.5)])
def test_standardized_moments_exact(fam):
    # E X_t = 0 and E X_s X_t = min(s, t) from the closed-form moments of the source
    proc, _ = S.standardize(fam)
    lo, hi = proc.domain.lo, proc.domain.hi
    ts = lo + (min(hi, lo + 4) - lo) * np.array([0.2, 0.5, 0.8])
    r = proc.source_times(ts)
    means = np.array([fam.mean(v) for v in r])
    assert np.max(np.abs(proc.to_standard(ts, means))) < 1e-12
    for i in range(3):
        for j in range(i, 3):
            c = fam.covariance(r[i], r[j]) * proc.m(ts[i]) * proc.m(ts[j])
            assert abs(c - min(ts[i], ts[j])) < 1e-12 * max(1, ts[j])
