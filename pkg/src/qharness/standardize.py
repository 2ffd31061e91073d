"""Mobius standardization of product-covariance processes into quadratic harnesses.

A process with affine mean alpha + beta*r, covariance
M**2 (psi + min) (delta + epsilon * max), and two-sided conditional variance
proportional to ``chi0 + eta0*(u Y_s - s Y_u)/(u-s) + theta0*(Y_u - Y_s)/(u-s)
+ ((Y_u - Y_s)/(u-s))**2`` becomes, after the time change
``r = (t*delta - psi) / (1 - t*epsilon)`` and scaling by
``m(t) = (1 - t*epsilon) / (M (delta - epsilon*psi))``, a process with
E X_t = 0, E X_s X_t = min(s, t) and quadratic conditional variance with
parameters (eta, theta, sigma, tau, gamma).
"""
from dataclasses import dataclass, asdict
import math

import numpy as np

from .densities import ParameterError
from .processes import (Dirichlet, FourParam, Secant, ThreeParam, TildeView, TimeInterval,
                        TwoParam)

__all__ = [
    "StandardizationInput",
    "HarnessParams",
    "StandardizedProcess",
    "mobius_standardize",
    "standardization_input",
    "standardize",
    "harness_params",
    "harness_params_four",
    "harness_params_three",
    "harness_params_two",
    "harness_params_secant",
    "harness_params_dirichlet",
    "closed_form_domain",
    "scale_transform",
    "time_inversion",
]


@dataclass(frozen=True)
class StandardizationInput:
    alpha: float
    beta: float
    psi: float
    delta: float
    epsilon: float
    M: float
    chi0: float = 0.0
    eta0: float = 0.0
    theta0: float = 0.0

    def __post_init__(self):
        if self.epsilon not in (-1, 0, 1):
            raise ParameterError("epsilon must be -1, 0 or 1")
        if not self.M > 0:
            raise ParameterError(f"M > 0 violated ({self.M:g})")
        if not self.delta - self.epsilon * self.psi > 0:
            raise ParameterError("delta - epsilon*psi > 0 violated")
        if not self.chi > 0:
            raise ParameterError(f"chi > 0 violated ({self.chi:g})")

    @property
    def chi(self):
        return self.chi0 + self.alpha * self.eta0 + self.beta * self.theta0 + self.beta ** 2


@dataclass(frozen=True)
class HarnessParams:
    eta: float
    theta: float
    sigma: float
    tau: float
    gamma: float

    def __post_init__(self):
        if self.sigma < 0 or self.tau < 0:
            raise ParameterError("sigma, tau >= 0 violated")

    def as_dict(self):
        return asdict(self)

    def as_tuple(self):
        return (self.eta, self.theta, self.sigma, self.tau, self.gamma)


class StandardizedProcess:
    """Affine maps between a source process and its standardized version.

    ``source_domain`` is the interval of source times r; ``domain`` is T',
    its image under ``forward_time``. When built from a four- or
    three-parameter family the source is the tilde view.
    """

    def __init__(self, inp, source_domain, family=None):
        self.input = inp
        self.source_domain = source_domain
        self.family = family
        self.tilde = isinstance(family, (FourParam, ThreeParam))
        self.domain = _image(inp, source_domain)
        self._norm = inp.M * (inp.delta - inp.epsilon * inp.psi)

    def ell(self, t):
        i = self.input
        return (t * i.delta - i.psi) / self._norm

    def m(self, t):
        return (1 - t * self.input.epsilon) / self._norm

    def inverse_time(self, t):
        """Source time r = ell(t)/m(t) for a standardized time t."""
        i = self.input
        return (t * i.delta - i.psi) / (1 - t * i.epsilon)

    def forward_time(self, r):
        i = self.input
        return (r + i.psi) / (i.epsilon * r + i.delta)

    def source_times(self, times):
        """Times at which the underlying family must be observed."""
        r = np.array([self.inverse_time(t) for t in times], dtype=np.float64)
        return r / 2 if self.tilde else r

    def to_standard(self, times, y):
        """Map source-family states ``y`` (last axis along ``times``) to X."""
        times = np.asarray(times, dtype=np.float64)
        r = self.inverse_time(times)
        y = np.asarray(y, dtype=np.float64)
        yt = y + r ** 2 / 4 if self.tilde else y
        return self.m(times) * (yt - self.input.alpha - self.input.beta * r)

    def check_times(self, times):
        prev = -math.inf
        for t in times:
            if t not in self.domain:
                raise ParameterError(f"time {t:g} outside T' = ({self.domain.lo:g}, {self.domain.hi:g})")
            if not t > prev:
                raise ParameterError("times must be strictly increasing")
            prev = t


def _image(inp, dom):
    def f(r):
        if math.isinf(r):
            if inp.epsilon == 0:
                return math.copysign(math.inf, r) / inp.delta
            return 1.0 / inp.epsilon
        den = inp.epsilon * r + inp.delta
        if abs(den) <= 1e-14 * max(1.0, abs(inp.delta)):
            return math.inf
        return (r + inp.psi) / den
    return TimeInterval(f(dom.lo), f(dom.hi))


def mobius_standardize(inp, T):
    """Standardize: returns (StandardizedProcess, HarnessParams)."""
    proc = StandardizedProcess(inp, T)
    return proc, _params_from_input(inp)


def _params_from_input(inp):
    chi = inp.chi
    M, eps = inp.M, inp.epsilon
    eta = M * (inp.delta * inp.eta0 + eps * (2 * inp.beta + inp.theta0)) / chi
    theta = M * (2 * inp.beta + inp.psi * inp.eta0 + inp.theta0) / chi
    sigma = M * M * eps * eps / chi
    tau = M * M / chi
    gamma = 1 + 2 * eps * math.sqrt(sigma * tau)
    return HarnessParams(eta, theta, sigma, tau, gamma)


def standardization_input(fam):
    """Family-specific Mobius inputs and the source time domain."""
    if isinstance(fam, (FourParam, ThreeParam)):
        view = TildeView(fam)
        eps = view.epsilon
        inp = StandardizationInput(view.alpha, view.beta, view.psi, view.delta, eps,
                                   math.sqrt(view.M2), chi0=0.0, eta0=1.0, theta0=0.0)
        return inp, view.domain
    if isinstance(fam, TwoParam):
        r = fam.R
        alpha = -(fam.B.imag * fam.A.real + fam.A.imag * fam.B.real) / r
        beta = (fam.B - fam.A).imag / r
        inp = StandardizationInput(alpha, beta, fam.B.real, fam.A.real, -1.0,
                                   math.sqrt(fam.M2), chi0=1.0)
        return inp, fam.time_domain()
    if isinstance(fam, Secant):
        inp = StandardizationInput(0.0, math.tan(fam.beta / 2), 0.0, 1.0, 0.0,
                                   1.0 / (math.sqrt(2) * math.cos(fam.beta / 2)), chi0=1.0)
        return inp, fam.time_domain()
    if isinstance(fam, Dirichlet):
        a = fam.A
        inp = StandardizationInput(0.0, 1.0 / a, 0.0, a, -1.0, 1.0 / (a * math.sqrt(a + 1)))
        return inp, fam.time_domain()
    raise TypeError(f"unknown family {fam!r}")


def standardize(fam):
    """(StandardizedProcess, HarnessParams) for a process family via the Mobius route."""
    inp, dom = standardization_input(fam)
    return StandardizedProcess(inp, dom, fam), _params_from_input(inp)


# ---------------------------------------------------------------------------
# closed forms per family

def harness_params_four(fam):
    A, B, C, D = fam.A, fam.B, fam.C, fam.D
    s = fam.total
    root = math.sqrt(((A + C) * (B + C) * (A + D) * (B + D)).real * (s + 1))
    plus = s * s / root
    minus = ((C - D) ** 2 - (A - B) ** 2).real / root
    sig = 1.0 / (s + 1)
    return HarnessParams((plus - minus) / 2, (plus + minus) / 2, sig, sig, (s - 1) / (s + 1))


def harness_params_three(fam):
    eta = 1.0 / math.sqrt(fam.M2)
    return HarnessParams(eta, (2 * fam.A + (fam.B + fam.C).real) * eta, 0.0, 1.0, 1.0)


def harness_params_two(fam):
    r = fam.R
    i = (fam.A - fam.B).imag
    sig = 1.0 / (2 * r + 1)
    eta = 2 * i / math.sqrt((2 * r + 1) * (i * i + r * r))
    return HarnessParams(eta, -eta, sig, sig, 1 - 2 * sig)


def harness_params_secant(fam):
    return HarnessParams(0.0, math.sqrt(2) * math.sin(fam.beta / 2), 0.0, 0.5, 1.0)


def harness_params_dirichlet(fam):
    a = fam.A
    sig = 1.0 / (1 + a)
    return HarnessParams(-2 / math.sqrt(1 + a), 2 / math.sqrt(1 + a), sig, sig, 1 - 2 * sig)


_CLOSED = {
    FourParam: harness_params_four,
    ThreeParam: harness_params_three,
    TwoParam: harness_params_two,
    Secant: harness_params_secant,
    Dirichlet: harness_params_dirichlet,
}


def harness_params(fam):
    """Closed-form harness parameters of a family."""
    return _CLOSED[type(fam)](fam)


def closed_form_domain(fam):
    """T' from the closed-form endpoint formulas (no Mobius evaluation)."""
    if isinstance(fam, FourParam):
        A, B, C, D = fam.A, fam.B, fam.C, fam.D
        lo = ((C + D).real - 2 * C.real) / ((A + B).real + 2 * C.real)
        den = (A + B).real - 2 * A.real
        hi = math.inf if den <= 1e-14 * max(1.0, (A + B).real) else ((C + D).real + 2 * A.real) / den
        return TimeInterval(lo, hi)
    if isinstance(fam, ThreeParam):
        bc = (fam.B + fam.C).real
        return TimeInterval(bc - 2 * fam.C.real, 2 * fam.A + bc)
    return TimeInterval(0.0, math.inf)


def scale_transform(p, a):
    """Parameters of a*X_{t/a^2}."""
    if not a > 0:
        raise ParameterError("scale factor must be positive")
    return HarnessParams(p.eta / a, a * p.theta, p.sigma / a ** 2, a ** 2 * p.tau, p.gamma)


def time_inversion(p):
    """Parameters of t*X_{1/t}."""
    return HarnessParams(p.theta, p.eta, p.tau, p.sigma, p.gamma)
