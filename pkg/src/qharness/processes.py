"""The five Markov process families built from the beta-type densities.

Each family is an immutable record exposing its time domain, marginal,
transition and bridge log-densities, first and second moments, and
conditional moments. Transition and bridge evaluators broadcast over the
conditioning values as well as the evaluation point, so Chapman-Kolmogorov
integrands can be evaluated in one call.

The four- and three-parameter families have quadratic means; their
conditional moments are stated for the view ``Yt_r = Y_{r/2} + r**2 / 4``
(see ``tilde_transform``), where the mean is affine.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import densities as dens
from .densities import DomainError, ParameterError, Classification

__all__ = [
    "TimeInterval",
    "ConditionalMoment",
    "FourParam",
    "ThreeParam",
    "TwoParam",
    "Secant",
    "Dirichlet",
    "TildeView",
    "FAMILIES",
    "time_domain",
    "marginal_log_pdf",
    "transition_log_pdf",
    "bridge_log_pdf",
    "mean",
    "variance",
    "covariance",
    "tilde_transform",
    "cond_moments_one_sided",
    "cond_moments_two_sided",
]


@dataclass(frozen=True)
class TimeInterval:
    """Open interval (lo, hi); either end may be infinite."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ParameterError(f"empty time interval ({self.lo}, {self.hi})")

    def __contains__(self, t):
        return self.lo < t < self.hi

    def as_tuple(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class ConditionalMoment:
    mean: float
    variance: float


def _real(z):
    return dens._realize(z, "closed form")


class _Family:
    """Shared validation and dispatch; subclasses supply the formulas."""

    tag = ""
    state_support = "half-line"
    gap_aware = False

    def time_domain(self):
        raise NotImplementedError

    def check_time(self, *times):
        dom = self.time_domain()
        prev = -math.inf
        for t in times:
            if not (isinstance(t, (int, float, np.floating, np.integer)) and math.isfinite(t)):
                raise DomainError(f"time {t!r} must be a finite real")
            if t not in dom:
                raise DomainError(f"time {t:g} outside T = ({dom.lo:g}, {dom.hi:g})")
            if not t > prev:
                raise DomainError("times must be strictly increasing")
            prev = t

    def check_state(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(~np.isfinite(x)):
            raise DomainError("states must be finite")
        if self.state_support == "half-line" and np.any(x <= 0):
            raise DomainError("states must lie in (0, inf)")
        return x

    def variance(self, t):
        return self.covariance(t, t)

    def sd(self, t):
        return math.sqrt(self.variance(t))

    def params(self):
        raise NotImplementedError


# ---------------------------------------------------------------------------

def _pair_positions(vals):
    # which index pairs are conjugate (non-real) pairs
    pairs = []
    for j in range(len(vals)):
        for k in range(j + 1, len(vals)):
            if abs(vals[j].imag) > 0 and abs(vals[j] - vals[k].conjugate()) <= 1e-12 * max(1, abs(vals[j])):
                pairs.append((j, k))
    return pairs


@dataclass(frozen=True)
class FourParam(_Family):
    """Wilson-density process: marginal f(x; A-t, B-t, C+t, D+t) on T = (-Re C, Re A).

    A, B, C, D are positive reals, or A = conj(B) and/or C = conj(D) with
    positive real parts. Entries are reordered within the (A, B) and (C, D)
    pairs so that Re A <= Re B and Re C <= Re D; the process is symmetric
    under those swaps.
    """

    A: complex
    B: complex
    C: complex
    D: complex

    tag = "fourparam"
    state_support = "half-line"

    def __post_init__(self):
        vals = [complex(getattr(self, n)) for n in "ABCD"]
        quad = dens.ParamQuadruple(*vals)
        nonreal = [j for j, v in enumerate(vals) if abs(v.imag) > 1e-12 * max(1, abs(v))]
        if nonreal:
            pairs = _pair_positions(vals)
            allowed = {(0, 1), (2, 3)}
            if not set(nonreal) <= {j for p in pairs if p in allowed for j in p}:
                raise ParameterError("conjugate pairs must be A = conj(B) and/or C = conj(D)")
        A, B, C, D = vals
        if A.real > B.real:
            A, B = B, A
        if C.real > D.real:
            C, D = D, C
        for n, v in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, n, v)
        object.__setattr__(self, "classification", quad.classification)

    def params(self):
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D}

    @property
    def total(self):
        return _real(self.A + self.B + self.C + self.D)

    @property
    def M2(self):
        A, B, C, D = self.A, self.B, self.C, self.D
        s = self.total
        return _real((A + C) * (B + C) * (A + D) * (B + D)) / (s * s * (s + 1))

    def time_domain(self):
        return TimeInterval(-self.C.real, self.A.real)

    def marginal_params(self, t):
        return dens.ParamQuadruple(self.A - t, self.B - t, self.C + t, self.D + t)

    def marginal_log_pdf(self, t, x):
        self.check_time(t)
        x = self.check_state(x)
        return dens.wilson_log_pdf(self.marginal_params(t), x)

    def _transition_rows(self, s, t, x, y):
        # parameters follow the shape of x only, so the normalizer is
        # computed once per conditioning value
        r = 1j * np.sqrt(np.asarray(x, float))
        y = np.asarray(y, float)
        p = np.stack(np.broadcast_arrays(self.A - t + 0 * r, self.B - t + 0 * r,
                                         (t - s) + r, (t - s) - r), axis=-1)
        return p, y

    def transition_log_pdf(self, s, t, x, y):
        self.check_time(s, t)
        self.check_state(x)
        self.check_state(y)
        p, y = self._transition_rows(s, t, x, y)
        return _scalarize(dens.wilson_log_pdf_rows(p, y))

    def bridge_log_pdf(self, s, t, u, x, z, y):
        self.check_time(s, t, u)
        for v in (x, z, y):
            self.check_state(v)
        return _scalarize(_wilson_bridge(s, t, u, x, z, y))

    def mean(self, t):
        A, B, C, D = self.A, self.B, self.C, self.D
        m0 = dens.wilson_mean(dens.ParamQuadruple(A, B, C, D))
        return m0 + 2 * _real((A * B - C * D) / (A + B + C + D)) * t - t * t

    def covariance(self, s, t):
        s, t = min(s, t), max(s, t)
        A, B, C, D = self.A, self.B, self.C, self.D
        return self.M2 * _real(C + D + 2 * s) * _real(A + B - 2 * t)

    def transition_moments(self, s, t, x):
        """Mean and variance of Y_t given Y_s = x, from the Wilson moments."""
        r = 1j * math.sqrt(x)
        p = dens.ParamQuadruple(self.A - t, self.B - t, (t - s) + r, (t - s) - r)
        return ConditionalMoment(dens.wilson_mean(p), dens.wilson_var(p))

    def bridge_moments(self, s, t, u, x, z):
        return _wilson_bridge_moments(s, t, u, x, z)

    # conditional moments in the tilde view
    def tilde_one_sided(self, s, t, x):
        A, B = self.A, self.B
        ab = A + B
        m = ((ab - t) * x + A * B * (t - s)) / (ab - s)
        v = ((ab - t) * (t - s) * (A * A - s * A + x) * (B * B - s * B + x)
             / ((ab - s) ** 2 * (ab - s + 1)))
        return ConditionalMoment(_real(m), _real(v))

    def tilde_two_sided(self, s, t, u, x, z):
        return _tilde_two_sided(s, t, u, x, z)

    def tilde_constants(self):
        A, B, C, D = self.A, self.B, self.C, self.D
        alpha = dens.wilson_mean(dens.ParamQuadruple(A, B, C, D))
        beta = _real((A * B - C * D) / (A + B + C + D))
        return alpha, beta, _real(C + D), _real(A + B), self.M2


def _wilson_bridge(s, t, u, x, z, y):
    x, z, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(z, float), np.asarray(y, float))
    rx, rz = 1j * np.sqrt(x), 1j * np.sqrt(z)
    p = np.stack([(u - t) + rz, (u - t) - rz, (t - s) + rx, (t - s) - rx], axis=-1)
    return dens.wilson_log_pdf_rows(p, y)


def _wilson_bridge_moments(s, t, u, x, z):
    rx, rz = 1j * math.sqrt(x), 1j * math.sqrt(z)
    p = dens.ParamQuadruple((u - t) + rz, (u - t) - rz, (t - s) + rx, (t - s) - rx)
    return ConditionalMoment(dens.wilson_mean(p), dens.wilson_var(p))


def _tilde_two_sided(s, t, u, x, z):
    # shared by the four- and three-parameter families (Wilson bridges)
    w = u - s
    m = ((u - t) * x + (t - s) * z) / w
    v = (u - t) * (t - s) / (w + 1) * ((z - x) ** 2 / w ** 2 + (u * x - s * z) / w)
    return ConditionalMoment(m, v)


def _scalarize(a):
    return float(a) if np.ndim(a) == 0 else a


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThreeParam(_Family):
    """Three-parameter process: marginal g(x; A-t, B+t, C+t) on T = (-Re C, A).

    A is real; B, C are real (reordered so B >= C) or a conjugate pair.
    """

    A: float
    B: complex
    C: complex

    tag = "threeparam"
    state_support = "half-line"

    def __post_init__(self):
        A = complex(self.A)
        if abs(A.imag) > 0:
            raise ParameterError("A must be real")
        A = A.real
        B, C = complex(self.B), complex(self.C)
        if not all(map(math.isfinite, (A, B.real, B.imag, C.real, C.imag))):
            raise ParameterError("parameters must be finite")
        if dens.classify([B, C]) is Classification.ALL_REAL:
            B, C = complex(B.real), complex(C.real)
            if B.real < C.real:
                B, C = C, B
        if not A + C.real > dens.MIN_REAL_PART:
            raise ParameterError(f"A + Re(C) > 0 violated ({A + C.real:g})")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    def params(self):
        return {"A": self.A, "B": self.B, "C": self.C}

    @property
    def M2(self):
        return _real((self.A + self.B) * (self.A + self.C))

    def time_domain(self):
        return TimeInterval(-self.C.real, self.A)

    def marginal_log_pdf(self, t, x):
        self.check_time(t)
        x = self.check_state(x)
        return dens.threeparam_log_pdf(self.A - t, self.B + t, self.C + t, x)

    def _transition_rows(self, s, t, x, y):
        r = 1j * np.sqrt(np.asarray(x, float))
        y = np.asarray(y, float)
        p = np.stack(np.broadcast_arrays(self.A - t + 0 * r, (t - s) + r, (t - s) - r), axis=-1)
        return p, y

    def transition_log_pdf(self, s, t, x, y):
        self.check_time(s, t)
        self.check_state(x)
        self.check_state(y)
        p, y = self._transition_rows(s, t, x, y)
        return _scalarize(dens.threeparam_log_pdf_rows(p, y))

    def bridge_log_pdf(self, s, t, u, x, z, y):
        self.check_time(s, t, u)
        for v in (x, z, y):
            self.check_state(v)
        return _scalarize(_wilson_bridge(s, t, u, x, z, y))

    def mean(self, t):
        A, B, C = self.A, self.B, self.C
        return -t * t + 2 * A * t + _real(A * B + A * C + B * C)

    def covariance(self, s, t):
        return self.M2 * _real(self.B + self.C + 2 * min(s, t))

    def transition_moments(self, s, t, x):
        r = 1j * math.sqrt(x)
        a, b, c = self.A - t, (t - s) + r, (t - s) - r
        return ConditionalMoment(_real(a * b + a * c + b * c), _real((a + b) * (a + c) * (b + c)))

    def bridge_moments(self, s, t, u, x, z):
        return _wilson_bridge_moments(s, t, u, x, z)

    def tilde_one_sided(self, s, t, x):
        A = self.A
        return ConditionalMoment(A * (t - s) + x, (t - s) * (A * A - s * A + x))

    def tilde_two_sided(self, s, t, u, x, z):
        return _tilde_two_sided(s, t, u, x, z)

    def tilde_constants(self):
        A, B, C = self.A, self.B, self.C
        return _real(A * B + A * C + B * C), A, _real(B + C), 1.0, self.M2


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoParam(_Family):
    """Continuous-Hahn process: marginal phi(x; A-t, B+t) on T = (-Re B, Re A)."""

    A: complex
    B: complex

    tag = "twoparam"
    state_support = "full-line"

    def __post_init__(self):
        A, B = complex(self.A), complex(self.B)
        if not all(map(math.isfinite, (A.real, A.imag, B.real, B.imag))):
            raise ParameterError("parameters must be finite")
        if not (A + B).real > dens.MIN_REAL_PART:
            raise ParameterError(f"Re(A+B) > 0 violated ({(A + B).real:g})")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def params(self):
        return {"A": self.A, "B": self.B}

    @property
    def R(self):
        return (self.A + self.B).real

    @property
    def M2(self):
        r = self.R
        i = (self.A - self.B).imag
        return (i * i + r * r) / (r * r * (2 * r + 1))

    def time_domain(self):
        return TimeInterval(-self.B.real, self.A.real)

    def marginal_log_pdf(self, t, x):
        self.check_time(t)
        x = self.check_state(x)
        return dens.hahn_log_pdf(dens.HahnParams(self.A - t, self.B + t), x)

    def transition_log_pdf(self, s, t, x, y):
        self.check_time(s, t)
        x = self.check_state(x)
        y = self.check_state(y)
        return _scalarize(dens.hahn_log_pdf_rows(self.A - t, (t - s) - 1j * x, y))

    def bridge_log_pdf(self, s, t, u, x, z, y):
        self.check_time(s, t, u)
        x, z, y = (self.check_state(v) for v in (x, z, y))
        return _scalarize(dens.hahn_log_pdf_rows((t - s) - 1j * x, (u - t) - 1j * z, y))

    def mean(self, t):
        A, B = self.A, self.B
        r = self.R
        return (B - A).imag / r * t - (A.real * B.imag + A.imag * B.real) / r

    def covariance(self, s, t):
        s, t = min(s, t), max(s, t)
        return self.M2 * (self.A.real - t) * (self.B.real + s)

    def transition_moments(self, s, t, x):
        p = dens.HahnParams(self.A - t, (t - s) - 1j * x)
        return ConditionalMoment(dens.hahn_mean(p), dens.hahn_var(p))

    def bridge_moments(self, s, t, u, x, z):
        p = dens.HahnParams((t - s) - 1j * x, (u - t) - 1j * z)
        return ConditionalMoment(dens.hahn_mean(p), dens.hahn_var(p))

    def one_sided(self, s, t, x):
        ra, ia = self.A.real, self.A.imag
        r = ra - s
        m = ((ra - t) * x - (t - s) * ia) / r
        v = (ra - t) * (t - s) * (r * r + (ia + x) ** 2) / (r * r * (2 * r + 1))
        return ConditionalMoment(m, v)

    def two_sided(self, s, t, u, x, z):
        w = u - s
        m = ((u - t) * x + (t - s) * z) / w
        v = (t - s) * (u - t) / (2 * w + 1) * (1 + (z - x) ** 2 / w ** 2)
        return ConditionalMoment(m, v)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Secant(_Family):
    """Hyperbolic secant Levy process: marginal f(x; t, beta) on T = (0, inf)."""

    beta: float

    tag = "secant"
    state_support = "full-line"

    def __post_init__(self):
        b = float(self.beta)
        if not -math.pi < b < math.pi:
            raise ParameterError(f"beta in (-pi, pi) violated ({b:g})")
        object.__setattr__(self, "beta", b)

    def params(self):
        return {"beta": self.beta}

    def time_domain(self):
        return TimeInterval(0.0, math.inf)

    def marginal_log_pdf(self, t, x):
        self.check_time(t)
        x = self.check_state(x)
        return dens.secant_log_pdf(dens.SecantParams(t, self.beta), x)

    def increment_log_pdf(self, s, t, w):
        """Density of Y_t - Y_s, which does not depend on Y_s."""
        return _scalarize(dens.secant_log_pdf_rows(np.full(np.shape(w), t - s), self.beta, w))

    def transition_log_pdf(self, s, t, x, y):
        self.check_time(s, t)
        x = self.check_state(x)
        y = self.check_state(y)
        return self.increment_log_pdf(s, t, y - x)

    def bridge_log_pdf(self, s, t, u, x, z, y):
        self.check_time(s, t, u)
        x, z, y = (self.check_state(v) for v in (x, z, y))
        return _scalarize(dens.hahn_log_pdf_rows(t - s + 0j, (u - t) - 1j * (z - x), y - x))

    @property
    def _tan(self):
        return math.tan(self.beta / 2)

    @property
    def _sec2(self):
        return 1.0 / math.cos(self.beta / 2) ** 2

    def mean(self, t):
        return t * self._tan

    def covariance(self, s, t):
        return 0.5 * min(s, t) * self._sec2

    def transition_moments(self, s, t, x):
        return self.one_sided(s, t, x)

    def bridge_moments(self, s, t, u, x, z):
        return self.two_sided(s, t, u, x, z)

    def one_sided(self, s, t, x):
        return ConditionalMoment(x + (t - s) * self._tan, 0.5 * (t - s) * self._sec2)

    def two_sided(self, s, t, u, x, z):
        w = u - s
        m = ((u - t) * x + (t - s) * z) / w
        v = (t - s) * (u - t) / (2 * w + 1) * (1 + (z - x) ** 2 / w ** 2)
        return ConditionalMoment(m, v)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dirichlet(_Family):
    """Dirichlet (beta) process: marginal Beta(t, A-t) on T = (0, A).

    Transition evaluators accept the optional gaps ``1 - y`` and ``y - x``
    so that densities with endpoint singularities keep full accuracy.
    """

    A: float

    tag = "dirichlet"
    state_support = (0.0, 1.0)
    gap_aware = True

    def __post_init__(self):
        a = float(self.A)
        if not (math.isfinite(a) and a > dens.MIN_REAL_PART):
            raise ParameterError(f"A > 0 violated ({a:g})")
        object.__setattr__(self, "A", a)

    def params(self):
        return {"A": self.A}

    def check_state(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(~((x > 0) & (x < 1))):
            raise DomainError("states must lie in (0, 1)")
        return x

    def time_domain(self):
        return TimeInterval(0.0, self.A)

    def marginal_log_pdf(self, t, x, gap=None):
        self.check_time(t)
        if gap is None:
            x = self.check_state(x)
        return _scalarize(dens.beta_log_pdf_rows(t, self.A - t, x, gap))

    def increment_log_pdf(self, s, t, w, gap=None):
        """Density of W = (Y_t - Y_s) / (1 - Y_s), independent of Y_s."""
        return _scalarize(dens.beta_log_pdf_rows(t - s, self.A - t, w, gap))

    def transition_log_pdf(self, s, t, x, y, y_gap=None, inc=None):
        """log density of y given x; y <= x or y >= 1 gives -inf."""
        self.check_time(s, t)
        x = self.check_state(x)
        y = np.asarray(y, dtype=np.float64)
        y_gap = 1.0 - y if y_gap is None else np.asarray(y_gap, dtype=np.float64)
        inc = y - x if inc is None else np.asarray(inc, dtype=np.float64)
        room = 1.0 - x
        out = dens.beta_log_pdf_rows(t - s, self.A - t, inc / room, y_gap / room) - np.log(room)
        return _scalarize(out)

    def bridge_log_pdf(self, s, t, u, x, z, y, inc=None, rest=None):
        """Beta bridge on (x, z); ``inc`` = y - x and ``rest`` = z - y if known."""
        self.check_time(s, t, u)
        x = np.asarray(x, dtype=np.float64)
        z = np.asarray(z, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if np.any(~(z > x)):
            raise DomainError("bridge needs z > x")
        inc = y - x if inc is None else np.asarray(inc, dtype=np.float64)
        rest = z - y if rest is None else np.asarray(rest, dtype=np.float64)
        span = z - x
        out = dens.beta_log_pdf_rows(t - s, u - t, inc / span, rest / span) - np.log(span)
        return _scalarize(out)

    def mean(self, t):
        return t / self.A

    def covariance(self, s, t):
        s, t = min(s, t), max(s, t)
        a = self.A
        return s * (a - t) / (a * a * (a + 1))

    def transition_moments(self, s, t, x):
        return self.one_sided(s, t, x)

    def bridge_moments(self, s, t, u, x, z):
        return self.two_sided(s, t, u, x, z)

    def one_sided(self, s, t, x):
        a = self.A
        r = a - s
        m = x + (1 - x) * (t - s) / r
        v = (1 - x) ** 2 * (t - s) * (a - t) / (r * r * (r + 1))
        return ConditionalMoment(m, v)

    def two_sided(self, s, t, u, x, z):
        w = u - s
        m = ((u - t) * x + (t - s) * z) / w
        v = (t - s) * (u - t) / (w * w * (w + 1)) * (z - x) ** 2
        return ConditionalMoment(m, v)


FAMILIES = {cls.tag: cls for cls in (FourParam, ThreeParam, TwoParam, Secant, Dirichlet)}


# ---------------------------------------------------------------------------
# tilde view for the families with quadratic means

class TildeView:
    """Yt_r = Y_{r/2} + r**2/4 on (-2 Re C, 2 T.hi), with affine mean alpha + beta*r.

    Covariance is M2 * (psi + min) * (delta - max) for the four-parameter
    family and M2 * (psi + min) for the three-parameter one.
    """

    def __init__(self, fam):
        if not isinstance(fam, (FourParam, ThreeParam)):
            raise TypeError("tilde view exists for the four- and three-parameter families only")
        self.family = fam
        dom = fam.time_domain()
        self.domain = TimeInterval(2 * dom.lo, 2 * dom.hi)
        self.alpha, self.beta, self.psi, self.delta, self.M2 = fam.tilde_constants()
        self.epsilon = -1.0 if isinstance(fam, FourParam) else 0.0

    def to_tilde(self, r, y):
        return np.asarray(y) + np.asarray(r) ** 2 / 4

    def from_tilde(self, r, yt):
        return np.asarray(yt) - np.asarray(r) ** 2 / 4

    def mean(self, r):
        return self.alpha + self.beta * r

    def covariance(self, r1, r2):
        s, t = min(r1, r2), max(r1, r2)
        return self.M2 * (self.psi + s) * (self.delta + self.epsilon * t)

    def marginal_log_pdf(self, r, yt):
        return self.family.marginal_log_pdf(r / 2, self.from_tilde(r, yt))

    def transition_log_pdf(self, r1, r2, xt, yt):
        return self.family.transition_log_pdf(r1 / 2, r2 / 2, self.from_tilde(r1, xt),
                                              self.from_tilde(r2, yt))

    def bridge_log_pdf(self, r1, r2, r3, xt, zt, yt):
        return self.family.bridge_log_pdf(r1 / 2, r2 / 2, r3 / 2, self.from_tilde(r1, xt),
                                          self.from_tilde(r3, zt), self.from_tilde(r2, yt))


# ---------------------------------------------------------------------------
# functional interface

def time_domain(fam):
    return fam.time_domain()


def marginal_log_pdf(fam, t, x):
    return fam.marginal_log_pdf(t, x)


def transition_log_pdf(fam, s, t, x, y):
    return fam.transition_log_pdf(s, t, x, y)


def bridge_log_pdf(fam, s, t, u, x, z, y):
    return fam.bridge_log_pdf(s, t, u, x, z, y)


def mean(fam, t):
    fam.check_time(t)
    return fam.mean(t)


def variance(fam, t):
    fam.check_time(t)
    return fam.variance(t)


def covariance(fam, s, t):
    if s > t:
        raise DomainError("covariance expects s <= t")
    fam.check_time(s)
    fam.check_time(t)
    return fam.covariance(s, t)


def tilde_transform(fam):
    return TildeView(fam)


def cond_moments_one_sided(fam, s, t, x):
    """Moments of the state at t given the state x at s < t.

    For the four- and three-parameter families, s, t and x are tilde-view
    coordinates; otherwise they are plain.
    """
    if isinstance(fam, (FourParam, ThreeParam)):
        view = TildeView(fam)
        _check_view_times(view, s, t)
        fam.check_state(view.from_tilde(s, x))
        return fam.tilde_one_sided(s, t, x)
    fam.check_time(s, t)
    fam.check_state(x)
    return fam.one_sided(s, t, x)


def cond_moments_two_sided(fam, s, t, u, x, z):
    """Moments of the state at t given x at s and z at u (tilde view where applicable)."""
    if isinstance(fam, (FourParam, ThreeParam)):
        view = TildeView(fam)
        _check_view_times(view, s, t, u)
        fam.check_state(view.from_tilde(s, x))
        fam.check_state(view.from_tilde(u, z))
        return fam.tilde_two_sided(s, t, u, x, z)
    fam.check_time(s, t, u)
    fam.check_state(x)
    fam.check_state(z)
    return fam.two_sided(s, t, u, x, z)


def _check_view_times(view, *times):
    prev = -math.inf
    for r in times:
        if r not in view.domain:
            raise DomainError(f"time {r:g} outside ({view.domain.lo:g}, {view.domain.hi:g})")
        if not r > prev:
            raise DomainError("times must be strictly increasing")
        prev = r
