"""The five parameterized densities: log-pdfs, normalizing constants, moments.

Public functions validate their parameters; the ``*_rows`` kernels skip
validation and accept one parameter set per evaluation point, which is what
Chapman-Kolmogorov integrals need when the parameters depend on the
integration variable.
"""
from dataclasses import dataclass
import enum
import math

import numpy as np

from . import _backend
from .numerics import PoleError, log_gamma_complex, log_weight, sum_log_abs_gamma_sq

MIN_REAL_PART = 1e-12
IMAG_TOL = 1e-12
LOG_2PI = math.log(2 * math.pi)
LOG_4PI = math.log(4 * math.pi)


class ParameterError(ValueError):
    """Parameters violate a family invariant; the message names it."""


class DomainError(ValueError):
    """Evaluation point outside the support."""


class Classification(enum.Enum):
    ALL_REAL = "AllReal"
    ONE_PAIR = "OnePair"
    TWO_PAIRS = "TwoPairs"


def _realize(z, what):
    # drop an imaginary part that is pure roundoff, refuse anything larger
    z = complex(z)
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(z.real)):
        raise ArithmeticError(f"{what} has imaginary residue {z.imag:.3g}")
    return z.real


def _lgamma_re(z):
    z = np.asarray(z, dtype=np.complex128)
    try:
        return _backend.loggamma(z.ravel()).real.reshape(z.shape)
    except ValueError as exc:
        raise PoleError(str(exc)) from None


def classify(values, tol=IMAG_TOL):
    """Classify complex entries as all real, one conjugate pair, or two."""
    vals = [complex(v) for v in values]
    scale = max(1.0, max(abs(v) for v in vals))
    nonreal = [v for v in vals if abs(v.imag) > tol * scale]
    unused = list(nonreal)
    pairs = 0
    while unused:
        z = unused.pop(0)
        match = [k for k, w in enumerate(unused) if abs(w - z.conjugate()) <= tol * scale]
        if not match:
            raise ParameterError(f"entry {z} has no conjugate partner")
        unused.pop(match[0])
        pairs += 1
    return [Classification.ALL_REAL, Classification.ONE_PAIR, Classification.TWO_PAIRS][pairs]


def _check_positive_real(name, z):
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ParameterError(f"{name} must be finite")
    if z.real <= MIN_REAL_PART:
        raise ParameterError(f"Re({name}) > 0 violated ({z.real:g})")


@dataclass(frozen=True)
class ParamQuadruple:
    """Wilson parameters: positive reals or one/two conjugate pairs."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            z = complex(getattr(self, name))
            object.__setattr__(self, name, z)
            _check_positive_real(name, z)
        object.__setattr__(self, "classification", classify(self.as_tuple()))

    def as_tuple(self):
        return (self.a, self.b, self.c, self.d)

    def as_array(self):
        return np.array(self.as_tuple(), dtype=np.complex128)


@dataclass(frozen=True)
class HahnParams:
    """Continuous Hahn parameters (a, b); the other two are their conjugates."""

    a: complex
    b: complex

    def __post_init__(self):
        for name in "ab":
            z = complex(getattr(self, name))
            object.__setattr__(self, name, z)
            _check_positive_real(name, z)


@dataclass(frozen=True)
class SecantParams:
    a: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > MIN_REAL_PART):
            raise ParameterError(f"a > 0 violated ({self.a:g})")
        if not -math.pi < self.beta < math.pi:
            raise ParameterError(f"beta in (-pi, pi) violated ({self.beta:g})")


@dataclass(frozen=True)
class BetaParams:
    a: float
    b: float

    def __post_init__(self):
        for name in "ab":
            v = getattr(self, name)
            if not (math.isfinite(v) and v > MIN_REAL_PART):
                raise ParameterError(f"{name} > 0 violated ({v:g})")


# ---------------------------------------------------------------------------
# Wilson density on (0, inf)

_PAIRS = [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3)]


def wilson_log_norm_const_rows(params):
    """log K for each row of an (n, 4) complex parameter array."""
    p = np.asarray(params, dtype=np.complex128)
    sums = np.stack([p[..., j] + p[..., k] for j, k in _PAIRS], axis=-1)
    total = p.sum(axis=-1)
    return _lgamma_re(total) - _lgamma_re(sums).sum(axis=-1) - LOG_4PI


def wilson_log_norm_const(p):
    """log K(a, b, c, d) of the Wilson density."""
    z = p.as_array()
    lg = log_gamma_complex(np.concatenate([[z.sum()], [z[j] + z[k] for j, k in _PAIRS]]))
    return _realize(lg[0] - lg[1:].sum(), "log K") - LOG_4PI


def wilson_log_pdf_rows(params, x):
    """Wilson log-density with one parameter row per point (no validation)."""
    x = np.asarray(x, dtype=np.float64)
    return (wilson_log_norm_const_rows(params)
            + sum_log_abs_gamma_sq(params, np.sqrt(x)) + log_weight(x))


def _positive_points(x):
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x > 0)) or np.any(~np.isfinite(x)):
        raise DomainError("x > 0 required")
    return x


def wilson_log_pdf(p, x):
    """log f(x; a, b, c, d) for x > 0."""
    x = _positive_points(x)
    out = (wilson_log_norm_const(p) + sum_log_abs_gamma_sq(p.as_array(), np.sqrt(x))
           + log_weight(x))
    return float(out) if np.ndim(out) == 0 else out


def wilson_mean(p):
    a, b, c, d = p.as_tuple()
    return _realize((a * b * c + a * b * d + a * c * d + b * c * d) / (a + b + c + d), "mean")


def wilson_var(p):
    a, b, c, d = p.as_tuple()
    s = a + b + c + d
    num = (a + b) * (a + c) * (b + c) * (a + d) * (b + d) * (c + d)
    return _realize(num / (s * s * (s + 1)), "variance")


# ---------------------------------------------------------------------------
# three-parameter density g on (0, inf)

def _check_three(a, b, c):
    a = float(a)
    if not a > MIN_REAL_PART:
        raise ParameterError(f"a > 0 violated ({a:g})")
    b, c = complex(b), complex(c)
    _check_positive_real("b", b)
    _check_positive_real("c", c)
    if classify([b, c]) is Classification.ALL_REAL:
        b, c = b.real + 0j, c.real + 0j
    return a, b, c


def threeparam_log_pdf_rows(params, x):
    """log g with one (a, b, c) row per point (no validation)."""
    p = np.asarray(params, dtype=np.complex128)
    x = np.asarray(x, dtype=np.float64)
    sums = np.stack([p[..., 0] + p[..., 1], p[..., 0] + p[..., 2], p[..., 1] + p[..., 2]], axis=-1)
    return (sum_log_abs_gamma_sq(p, np.sqrt(x)) + log_weight(x)
            - _lgamma_re(sums).sum(axis=-1) - LOG_4PI)


def threeparam_log_norm_const(a, b, c):
    a, b, c = _check_three(a, b, c)
    lg = log_gamma_complex(np.array([a + b, a + c, b + c]))
    return -_realize(lg.sum(), "log normalizer") - LOG_4PI


def threeparam_log_pdf(a, b, c, x):
    """log g(x; a, b, c) for x > 0."""
    a, b, c = _check_three(a, b, c)
    x = _positive_points(x)
    out = (threeparam_log_norm_const(a, b, c)
           + sum_log_abs_gamma_sq(np.array([a, b, c], dtype=np.complex128), np.sqrt(x))
           + log_weight(x))
    return float(out) if np.ndim(out) == 0 else out


def threeparam_mean(a, b, c):
    a, b, c = _check_three(a, b, c)
    return _realize(a * b + a * c + b * c, "mean")


def threeparam_var(a, b, c):
    a, b, c = _check_three(a, b, c)
    return _realize((a + b) * (a + c) * (b + c), "variance")


# ---------------------------------------------------------------------------
# continuous Hahn density phi(x; a, b, conj(a), conj(b)) on the real line

def hahn_log_norm_const_rows(a, b):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    total = 2.0 * (a.real + b.real)
    return (_lgamma_re(total + 0j) - LOG_2PI - _lgamma_re(2.0 * a.real + 0j)
            - _lgamma_re(2.0 * b.real + 0j) - 2.0 * _lgamma_re(a + np.conj(b)))


def hahn_log_pdf_rows(a, b, x):
    """log phi(x; a, b, conj a, conj b) with per-point a, b (no validation)."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    x = np.asarray(x, dtype=np.float64)
    params = np.stack(np.broadcast_arrays(a, b), axis=-1)
    return hahn_log_norm_const_rows(a, b) + sum_log_abs_gamma_sq(params, x)


def hahn_log_pdf(p, x):
    """log phi(x; a, b, conj a, conj b) for real x."""
    x = np.asarray(x, dtype=np.float64)
    out = (float(hahn_log_norm_const_rows(p.a, p.b))
           + sum_log_abs_gamma_sq(np.array([p.a, p.b]), x))
    return float(out) if np.ndim(out) == 0 else out


def hahn_mean(p):
    ra, rb = p.a.real, p.b.real
    return -(ra * p.b.imag + rb * p.a.imag) / (ra + rb)


def hahn_var(p):
    ra, rb = p.a.real, p.b.real
    r = ra + rb
    i = (p.a - p.b).imag
    return ra * rb * (r * r + i * i) / (r * r * (2 * r + 1))


# ---------------------------------------------------------------------------
# hyperbolic secant density on the real line

def secant_log_pdf_rows(a, beta, x):
    """log f(x; a, beta) with per-point a (no validation)."""
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    return (2 * a * math.log(2 * math.cos(beta / 2)) - LOG_2PI - _lgamma_re(2 * a + 0j)
            + sum_log_abs_gamma_sq((a + 0j)[..., None], x) + beta * x)


def secant_log_pdf(p, x):
    """log f(x; a, beta) for real x."""
    out = secant_log_pdf_rows(np.full(np.shape(x), p.a), p.beta, x)
    return float(out) if np.ndim(out) == 0 else out


def secant_mean(p):
    return p.a * math.tan(p.beta / 2)


def secant_var(p):
    return 0.5 * p.a / math.cos(p.beta / 2) ** 2


# ---------------------------------------------------------------------------
# beta density on (0, 1)

def beta_log_pdf_rows(a, b, x, gap=None):
    """Beta log-density; ``gap`` = 1 - x when known more accurately than x."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    gap = 1.0 - x if gap is None else np.asarray(gap, dtype=np.float64)
    lognorm = _lgamma_re(a + b + 0j) - _lgamma_re(a + 0j) - _lgamma_re(b + 0j)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = lognorm + (a - 1) * np.log(x) + (b - 1) * np.log(gap)
    inside = (x > 0) & (gap > 0)
    return np.where(inside, out, -np.inf)


def beta_log_pdf(p, x, gap=None):
    """Standard beta log-density for 0 < x < 1."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(~((x > 0) & (x < 1))) and gap is None:
        raise DomainError("0 < x < 1 required")
    out = beta_log_pdf_rows(p.a, p.b, x, gap)
    return float(out) if np.ndim(out) == 0 else out


def beta_mean(p):
    return p.a / (p.a + p.b)


def beta_var(p):
    s = p.a + p.b
    return p.a * p.b / (s * s * (s + 1))


# ---------------------------------------------------------------------------
# pivot identities: two forward densities over the skip density equal a
# named density of the intermediate point. Each returns lhs - rhs in logs.

def wilson_pivot_residual(a, b, c, d, m, x, y):
    """f(x;a+m,b+m,c,d) f(y;a,b,m+-i sqrt x) / f(y;a,b,c+m,d+m) vs f(x;m+-i sqrt y,c,d)."""
    rx, ry = 1j * math.sqrt(x), 1j * math.sqrt(y)
    lhs = (wilson_log_pdf(ParamQuadruple(a + m, b + m, c, d), x)
           + wilson_log_pdf(ParamQuadruple(a, b, m + rx, m - rx), y)
           - wilson_log_pdf(ParamQuadruple(a, b, c + m, d + m), y))
    rhs = wilson_log_pdf(ParamQuadruple(m + ry, m - ry, c, d), x)
    return lhs - rhs


def threeparam_pivot_residual(a, b, c, m, x, y):
    """g(x;a+m,b,c) g(y;a,m+-i sqrt x) / g(y;a,b+m,c+m) vs f(x;m+-i sqrt y,b,c)."""
    rx, ry = 1j * math.sqrt(x), 1j * math.sqrt(y)
    lhs = (threeparam_log_pdf(a + m, b, c, x)
           + threeparam_log_pdf(a, m + rx, m - rx, y)
           - threeparam_log_pdf(a, b + m, c + m, y))
    rhs = wilson_log_pdf(ParamQuadruple(m + ry, m - ry, b, c), x)
    return lhs - rhs


def hahn_pivot_residual(a, b, m, x, y):
    """phi(y;a,m-ix) phi(x;a+m,b) / phi(y;a,b+m) vs phi(x;b,m-iy)."""
    lhs = (hahn_log_pdf(HahnParams(a, m - 1j * x), y)
           + hahn_log_pdf(HahnParams(a + m, b), x)
           - hahn_log_pdf(HahnParams(a, b + m), y))
    rhs = hahn_log_pdf(HahnParams(b, m - 1j * y), x)
    return lhs - rhs


def secant_pivot_residual(a, m, beta, x, y):
    """f(y-x;m) f(x;a) / f(y;a+m) vs phi(x; a, m-iy)."""
    lhs = (secant_log_pdf(SecantParams(m, beta), y - x)
           + secant_log_pdf(SecantParams(a, beta), x)
           - secant_log_pdf(SecantParams(a + m, beta), y))
    rhs = hahn_log_pdf(HahnParams(a, m - 1j * y), x)
    return lhs - rhs


def beta_pivot_residual(a, b, m, x, y):
    """f((y-x)/(1-x);m,b)/(1-x) f(x;a,b+m) / f(y;a+m,b) vs f(x/y;a,m)/y."""
    lhs = (beta_log_pdf(BetaParams(m, b), (y - x) / (1 - x)) - math.log1p(-x)
           + beta_log_pdf(BetaParams(a, b + m), x)
           - beta_log_pdf(BetaParams(a + m, b), y))
    rhs = beta_log_pdf(BetaParams(a, m), x / y) - math.log(y)
    return lhs - rhs
