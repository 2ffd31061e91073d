"""Log-space gamma-function numerics, quadrature and quantile tables.

Everything here works on log-densities: integrands are exponentiated
only after subtracting their maximum over the integration window.

Supports are ``"half-line"`` (0, inf), ``"full-line"`` (-inf, inf), or a
``(lo, hi)`` tuple. Infinite ends are truncated by bracketing where the
log-integrand has dropped far below its maximum; semi-infinite ends use
``x = lo + v**2`` (this also removes square-root behaviour at ``lo``) and
finite intervals use a double-exponential map so that algebraic endpoint
singularities are harmless.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import _backend

__all__ = [
    "PoleError",
    "QuadratureError",
    "QuadratureResult",
    "QuantileTable",
    "log_gamma_complex",
    "log_abs_gamma_sq",
    "log_weight",
    "sum_log_abs_gamma_sq",
    "integrate",
    "tabulate_inverse_cdf",
    "tabulate_inverse_cdf_rows",
    "RowTables",
]

DEFAULT_MAX_EVALS = 10**6


class PoleError(ValueError):
    """Gamma function evaluated at (or within 1e-12 of) a pole."""


class QuadratureError(RuntimeError):
    """Quadrature did not converge inside its evaluation budget."""


def log_gamma_complex(z):
    """Principal-branch log Gamma(z) for scalar or array ``z``.

    Uses a rational Lanczos approximation; for Re(z) < 1/2 the argument is
    shifted right with the recurrence so that the branch cut stays on the
    negative real axis.
    """
    arr = np.asarray(z, dtype=np.complex128)
    try:
        out = _backend.loggamma(arr.ravel()).reshape(arr.shape)
    except ValueError as exc:
        raise PoleError(str(exc)) from None
    return complex(out) if out.ndim == 0 else out


def sum_log_abs_gamma_sq(params, y):
    """Sum over j of log|Gamma(params[..., j] + i*y)|^2, broadcasting.

    ``params`` has trailing axis of length k; leading axes broadcast
    against ``y``.
    """
    p = np.asarray(params, dtype=np.complex128)
    y = np.asarray(y, dtype=np.float64)
    shape = np.broadcast_shapes(p.shape[:-1], y.shape)
    k = p.shape[-1]
    yb = np.broadcast_to(y, shape).ravel()
    if p.shape[:-1] == () or p.ndim == 1:
        pb = p.reshape(1, k)
    else:
        pb = np.broadcast_to(p, shape + (k,)).reshape(-1, k)
    try:
        out = _backend.sum_log_abs_gamma_sq(pb, yb)
    except ValueError as exc:
        raise PoleError(str(exc)) from None
    return out.reshape(shape) if shape else float(out[0])


def log_abs_gamma_sq(a, x, mode="sqrt-arg"):
    """log|Gamma(a + i*sqrt(x))|^2 (``sqrt-arg``) or log|Gamma(a + i*x)|^2.

    For complex ``a`` this is Re log Gamma(a + i y) + Re log Gamma(conj(a) - i y),
    which is twice the first term.
    """
    x = np.asarray(x, dtype=np.float64)
    if mode == "sqrt-arg":
        if np.any(x < 0):
            raise ValueError("sqrt-arg mode needs x >= 0")
        y = np.sqrt(x)
    elif mode == "linear-arg":
        y = x
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return sum_log_abs_gamma_sq(np.asarray([a], dtype=np.complex128), y)


def log_weight(x):
    """log of 1 / (sqrt(x) |Gamma(2 i sqrt(x))|^2) = log(2 sinh(2 pi sqrt(x)) / pi)."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr <= 0) or np.any(np.isnan(arr)):
        raise ValueError("log_weight needs x > 0")
    out = _backend.log_weight(arr.ravel()).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


# ---------------------------------------------------------------------------
# variable maps


class _FullLine:
    lo, hi = -math.inf, math.inf
    vlo = -math.inf

    safe_point = 0.0

    def to_x(self, v):
        return v, np.zeros_like(v), np.ones(np.shape(v), dtype=bool)

    def hint(self, center, scale):
        return center, scale


class _HalfLine:
    """x = lo + v^2 (or hi - v^2 when the finite end is on the right)."""

    vlo = 0.0

    def __init__(self, end, right_open):
        self.end = end
        self.sign = 1.0 if right_open else -1.0
        self.lo, self.hi = (end, math.inf) if right_open else (-math.inf, end)
        self.safe_point = end + self.sign

    def to_x(self, v):
        x = self.end + self.sign * v * v
        ok = (v > 0) & (x != self.end)
        with np.errstate(divide="ignore"):
            logj = np.log(2.0 * v)
        return x, logj, ok

    def hint(self, center, scale):
        c = max(self.sign * (center - self.end), 0.0)
        vc = math.sqrt(c)
        vs = 0.5 * (math.sqrt(c + scale) - math.sqrt(max(c - scale, 0.0)))
        return vc, max(vs, 1e-8)


class _Interval:
    """Double-exponential map of (lo, hi) onto the real line."""

    vlo = -math.inf

    def __init__(self, lo, hi):
        self.lo, self.hi = lo, hi
        self.width = hi - lo
        self.safe_point = lo + 0.5 * self.width

    def to_x(self, v, gaps=False):
        with np.errstate(over="ignore", invalid="ignore"):
            q = -math.pi * np.sinh(v)
            # distances to each end, both accurate
            d_lo = self.width / (1.0 + np.exp(q))
            d_hi = self.width / (1.0 + np.exp(-q))
            logj = (np.log(self.width) + np.log(math.pi * np.cosh(v)) + q
                    - 2.0 * np.logaddexp(0.0, q))
        x = np.where(v <= 0, self.lo + d_lo, self.hi - d_hi)
        ok = (d_lo > 0) & (d_hi > 0) & np.isfinite(logj)
        if gaps:
            # the gaps carry the information lost when x rounds to an end
            return x, logj, ok, d_lo, d_hi
        return x, logj, ok & (x > self.lo) & (x < self.hi)

    def hint(self, center, scale):
        p = min(max((center - self.lo) / self.width, 1e-12), 1 - 1e-12)
        vc = math.asinh(math.log(p / (1 - p)) / math.pi)
        dxdv = self.width * p * (1 - p) * math.pi * math.cosh(vc)
        return vc, min(max(scale / dxdv, 1e-3), 1.0)


def _make_map(support):
    if isinstance(support, str):
        support = {"half-line": (0.0, math.inf), "full-line": (-math.inf, math.inf)}[support]
    lo, hi = float(support[0]), float(support[1])
    if not lo < hi:
        raise ValueError(f"empty support ({lo}, {hi})")
    if math.isinf(lo) and math.isinf(hi):
        return _FullLine()
    if math.isinf(hi):
        return _HalfLine(lo, True)
    if math.isinf(lo):
        return _HalfLine(hi, False)
    return _Interval(lo, hi)


class _Integrand:
    """Log-integrand in the mapped variable, with evaluation counting."""

    def __init__(self, logf, vmap, gap_aware):
        self.logf = logf
        self.vmap = vmap
        self.gap_aware = gap_aware and isinstance(vmap, _Interval)
        self.evaluations = 0

    def __call__(self, v):
        v = np.asarray(v, dtype=np.float64)
        if self.gap_aware:
            x, logj, ok, glo, ghi = self.vmap.to_x(v, gaps=True)
        else:
            x, logj, ok = self.vmap.to_x(v)
        out = np.full(v.shape, -np.inf)
        if np.any(ok):
            self.evaluations += int(np.count_nonzero(ok))
            if self.gap_aware:
                lf = np.asarray(self.logf(x[ok], glo[ok], ghi[ok]), dtype=np.float64)
            else:
                lf = np.asarray(self.logf(x[ok]), dtype=np.float64)
            if np.any(np.isnan(lf)):
                raise QuadratureError("log-integrand returned NaN")
            out[ok] = lf + logj[ok]
        return out, x


_PROBE_STEPS = np.array([0.25, 0.5, 1, 1.5, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64,
                         96, 128, 192, 256, 384, 512, 768, 1024, 2048, 4096])


def _bracket(g, vmap, vc, vs, drop):
    """Return (va, vb, shift): window where g >= max(g) - drop, and max(g)."""
    steps = _PROBE_STEPS
    for _ in range(8):
        right = vc + vs * steps
        left = vc - vs * steps
        if vmap.vlo == 0.0:
            left = np.concatenate([left[left > 0], [0.0]])
        probes = np.concatenate([[vc], right, left])
        vals, _ = g(probes)
        top = np.max(vals)
        if not np.isfinite(top):
            if top == np.inf:
                raise QuadratureError("log-integrand is +inf inside the support")
            vs *= 0.25
            continue
        thr = top - drop
        r_vals = vals[1:1 + len(right)]
        l_vals = vals[1 + len(right):]
        # probes are monotone outwards; take the first below-threshold probe
        # beyond the outermost above-threshold one
        above_r = np.nonzero(r_vals >= thr)[0]
        above_l = np.nonzero(l_vals >= thr)[0]
        ok = True
        if len(above_r) and above_r[-1] == len(right) - 1:
            ok = False
        if len(above_l) and above_l[-1] == len(left) - 1 and left[-1] != 0.0:
            ok = False
        if not ok:
            steps = steps * 8
            continue
        vb = right[above_r[-1] + 1] if len(above_r) else right[0]
        if len(above_l):
            va = left[above_l[-1] + 1] if above_l[-1] + 1 < len(left) else left[-1]
        else:
            va = left[0]
        if vals[0] < thr and len(above_r) == 0 and len(above_l) == 0:
            # all mass is between probes; shrink the probe scale
            vs *= 0.25
            continue
        return min(va, vb), max(va, vb), top
    raise QuadratureError("could not bracket the integrand")


# Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_G_INDEX = np.array([1, 3, 5, 7, 9, 11, 13])
_G_WEIGHTS = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk(a, b, g, shift, weight):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    v = c[:, None] + h[:, None] * _GK_NODES[None, :]
    lg, x = g(v.ravel())
    fv = np.exp(lg - shift)
    if weight is not None:
        fv = fv * np.asarray(weight(x), dtype=np.float64)
    fv = fv.reshape(v.shape)
    k = h * (fv @ _GK_WEIGHTS)
    gauss = h * (fv[:, _G_INDEX] @ _G_WEIGHTS)
    kabs = h * (np.abs(fv) @ _GK_WEIGHTS)
    return k, np.abs(k - gauss), kabs


def integrate(logf, support, rel_tol=1e-8, *, hint=None, weight=None,
              gap_aware=False, drop=None, max_evals=DEFAULT_MAX_EVALS):
    """Integrate exp(logf(x)) * weight(x) over ``support``.

    Parameters
    ----------
    logf : callable
        Vectorised log-integrand. With ``gap_aware=True`` and a finite
        support it is called as ``logf(x, x - lo, hi - x)`` with both gaps
        computed without cancellation.
    support : str or (lo, hi)
    rel_tol : float
        Target error relative to the integral of the absolute integrand.
    hint : (center, scale), optional
        Rough location and spread of the mass, used to start the bracket.
    weight : callable, optional
        Signed factor multiplied after exponentiation (moments).

    Returns
    -------
    QuadratureResult
    """
    if not 1e-14 < rel_tol < 1e-2:
        raise ValueError("rel_tol must lie in (1e-14, 1e-2)")
    vmap = _make_map(support)
    g = _Integrand(logf, vmap, gap_aware)
    vc, vs = _start(vmap, hint)
    if drop is None:
        drop = 40.0 - math.log(rel_tol)
    va, vb, shift = _bracket(g, vmap, vc, vs, drop)
    edges = np.linspace(va, vb, 65)
    a, b = edges[:-1], edges[1:]
    k, err, kabs = _gk(a, b, g, shift, weight)
    span = vb - va
    while True:
        total_abs = kabs.sum()
        tol = max(rel_tol * total_abs, 1e-300)
        if err.sum() <= tol:
            break
        if g.evaluations > max_evals:
            raise QuadratureError(
                f"no convergence after {g.evaluations} evaluations "
                f"(error {err.sum() * math.exp(shift):.3g})")
        bad = err > tol * (b - a) / span
        mid = 0.5 * (a[bad] + b[bad])
        na = np.concatenate([a[bad], mid])
        nb = np.concatenate([mid, b[bad]])
        nk, nerr, nabs = _gk(na, nb, g, shift, weight)
        keep = ~bad
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        k = np.concatenate([k[keep], nk])
        err = np.concatenate([err[keep], nerr])
        kabs = np.concatenate([kabs[keep], nabs])
    scale = math.exp(shift)
    return QuadratureResult(float(k.sum() * scale), float(err.sum() * scale), g.evaluations)


def _start(vmap, hint):
    if hint is None:
        if isinstance(vmap, _Interval):
            return vmap.hint(0.5 * (vmap.lo + vmap.hi), 0.25 * vmap.width)
        if isinstance(vmap, _HalfLine):
            return vmap.hint(vmap.end + vmap.sign, 1.0)
        return 0.0, 1.0
    center, scale = float(hint[0]), float(hint[1])
    if not (np.isfinite(center) and np.isfinite(scale) and scale > 0):
        raise ValueError(f"bad hint {hint!r}")
    return vmap.hint(center, scale)


# ---------------------------------------------------------------------------
# quantile tables

_GL5_X = np.array([-0.906179845938663992797626878299, -0.538469310105683091036314420700, 0.0,
                   0.538469310105683091036314420700, 0.906179845938663992797626878299])
_GL5_W = np.array([0.236926885056189087514264040720, 0.478628670499366468041291514836,
                   0.568888888888888888888888888889, 0.478628670499366468041291514836,
                   0.236926885056189087514264040720])

# weights integrating the degree-6 interpolant through (-1, GL5 nodes, 1)
# over the left half [-1, 0] of the reference panel
_HALF_NODES = np.concatenate([[-1.0], _GL5_X, [1.0]])
_HALF_W = np.linalg.solve(
    np.vander(_HALF_NODES, 7, increasing=True).T,
    np.array([(0.0 - (-1.0) ** (j + 1)) / (j + 1) for j in range(7)]),
)


def _row_search(arr, rows, vals):
    """Largest k with arr[rows, k] <= vals (-1 if none); rows of arr increase."""
    lo = np.full(vals.shape, -1, dtype=np.int64)
    hi = np.full(vals.shape, arr.shape[1], dtype=np.int64)
    while True:
        open_ = hi - lo > 1
        if not np.any(open_):
            return lo
        mid = (lo + hi) // 2
        mid_c = np.minimum(mid, arr.shape[1] - 1)
        le = arr[rows, mid_c] <= vals
        lo = np.where(open_ & le, mid, lo)
        hi = np.where(open_ & ~le, mid, hi)


class QuantileTable:
    """Piecewise cubic-Hermite CDFs on node grids, inverted by Newton.

    Holds one or more rows (one distribution per row) of equal length.
    For a single-row table ``u`` and ``x`` are the strictly increasing node
    arrays, calling the table maps probabilities in (0, 1) to quantiles and
    ``cdf`` goes the other way. ``quantile(rows, u)`` serves any row.
    """

    def __init__(self, vmap, v, cum, ccum, slope):
        v, cum, ccum, slope = (np.atleast_2d(a) for a in (v, cum, ccum, slope))
        self._map = vmap
        self._v = v
        self._cum = cum      # F at nodes, accurate near 0
        self._ccum = ccum    # 1 - F at nodes, accurate near 1
        mass = np.diff(cum, axis=1)
        h = np.diff(v, axis=1)
        m0 = slope[:, :-1] * h
        m1 = slope[:, 1:] * h
        # Fritsch-Carlson limiter keeps every panel monotone
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.hypot(m0, m1) / mass
        lim = np.where(r > 3.0, 3.0 / r, 1.0)
        lim = np.where(mass > 0, lim, 0.0)
        self._mass = mass
        self._m0 = m0 * lim
        self._m1 = m1 * lim
        self.evaluations = 0
        self.mass = math.nan

    @property
    def rows(self):
        return self._v.shape[0]

    def __len__(self):
        return self._v.shape[1]

    def _nodes(self):
        if self.rows != 1:
            raise ValueError("node arrays are defined for single-row tables")
        x, _, _ = self._map.to_x(self._v[0])
        cum, ccum = self._cum[0], self._ccum[0]
        u = np.where(cum <= 0.5, cum, 1.0 - ccum)
        keep = np.concatenate([[True], np.diff(u) > 0]) & (u > 0) & (u < 1)
        keep &= np.concatenate([[True], np.diff(x) > 0])
        return u[keep], x[keep]

    @property
    def u(self):
        return self._nodes()[0]

    @property
    def x(self):
        return self._nodes()[1]

    def _increment(self, r, k, t):
        mass, m0, m1 = self._mass[r, k], self._m0[r, k], self._m1[r, k]
        t2 = t * t
        t3 = t2 * t
        return mass * (3 * t2 - 2 * t3) + m0 * (t3 - 2 * t2 + t) + m1 * (t3 - t2)

    def _solve(self, r, k, delta):
        mass, m0, m1 = self._mass[r, k], self._m0[r, k], self._m1[r, k]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.clip(np.where(mass > 0, delta / mass, 0.5), 0.0, 1.0)
        lo = np.zeros_like(t)
        hi = np.ones_like(t)
        for _ in range(30):
            val = self._increment(r, k, t) - delta
            lo = np.where(val <= 0, t, lo)
            hi = np.where(val > 0, t, hi)
            d = 6 * mass * (t - t * t) + m0 * (3 * t * t - 4 * t + 1) + m1 * (3 * t * t - 2 * t)
            with np.errstate(divide="ignore", invalid="ignore"):
                tn = t - val / d
            bad = ~np.isfinite(tn) | (tn < lo) | (tn > hi)
            tn = np.where(bad, 0.5 * (lo + hi), tn)
            if np.all(np.abs(tn - t) <= 1e-15):
                t = tn
                break
            t = tn
        return t

    def quantile(self, rows, u):
        """Quantiles ``u`` (flat array) of the distributions in ``rows``."""
        u = np.asarray(u, dtype=np.float64).ravel()
        rows = np.broadcast_to(np.asarray(rows, dtype=np.int64), u.shape)
        if np.any((u <= 0) | (u >= 1)):
            raise ValueError("probabilities must lie in (0, 1)")
        n = self._mass.shape[1]
        lower = u <= 0.5
        k = np.empty(u.shape, dtype=np.int64)
        delta = np.empty(u.shape)
        rl, ru = rows[lower], rows[~lower]
        kl = np.clip(_row_search(self._cum, rl, u[lower]), 0, n - 1)
        k[lower] = kl
        delta[lower] = u[lower] - self._cum[rl, kl]
        q = 1.0 - u[~lower]
        # ccum decreases: panel k has ccum[k] >= q > ccum[k+1]
        ku = np.clip(_row_search(-self._ccum, ru, -q), 0, n - 1)
        k[~lower] = ku
        delta[~lower] = self._ccum[ru, ku] - q
        delta = np.clip(delta, 0.0, self._mass[rows, k])
        t = self._solve(rows, k, delta)
        v = self._v[rows, k] + t * (self._v[rows, k + 1] - self._v[rows, k])
        x, _, _ = self._map.to_x(v)
        return x

    def __call__(self, u):
        if self.rows != 1:
            raise ValueError("use quantile(rows, u) on multi-row tables")
        arr = np.asarray(u, dtype=np.float64)
        x = self.quantile(0, arr)
        return x.reshape(arr.shape) if arr.ndim else float(x[0])

    def cdf(self, x):
        """Interpolated CDF at ``x`` (clipped to [0, 1] outside the window)."""
        if self.rows != 1:
            raise ValueError("cdf is defined for single-row tables")
        x = np.asarray(x, dtype=np.float64)
        xs, _, _ = self._map.to_x(self._v[0])
        flat = x.ravel()
        k = np.clip(np.searchsorted(xs, flat, side="right") - 1, 0, self._mass.shape[1] - 1)
        v = _invert_map(self._map, flat)
        h = self._v[0, k + 1] - self._v[0, k]
        t = np.clip((v - self._v[0, k]) / h, 0.0, 1.0)
        out = self._cum[0, k] + self._increment(0, k, t)
        out = np.where(flat <= xs[0], 0.0, np.where(flat >= xs[-1], 1.0, out))
        return out.reshape(x.shape) if x.ndim else float(out[0])


def _invert_map(vmap, x):
    if isinstance(vmap, _FullLine):
        return x
    if isinstance(vmap, _HalfLine):
        return np.sqrt(np.maximum(vmap.sign * (x - vmap.end), 0.0))
    p = np.clip((x - vmap.lo) / vmap.width, 1e-300, 1 - 1e-16)
    return np.arcsinh(np.log(p / (1 - p)) / math.pi)


def _indicator(h, masses, node_vals, inner):
    # cubic Hermite value at the panel midpoint against the left-half mass of
    # the degree-6 interpolant through the panel ends and the GL5 samples
    herm = 0.5 * masses + 0.125 * h * (node_vals[..., :-1] - node_vals[..., 1:])
    samples = np.concatenate([node_vals[..., :-1, None], inner, node_vals[..., 1:, None]], axis=-1)
    half = 0.5 * h * (samples @ _HALF_W)
    return np.abs(herm - half)


def _finish(vmap, edges, node_vals, masses, shift):
    total = masses.sum(axis=-1, keepdims=True)
    if not np.all(total > 0):
        raise QuadratureError("density has no mass in the bracketed window")
    cum = np.concatenate([np.zeros_like(total), np.cumsum(masses, axis=-1)], axis=-1) / total
    ccum = np.concatenate([np.cumsum(masses[..., ::-1], axis=-1)[..., ::-1],
                           np.zeros_like(total)], axis=-1) / total
    table = QuantileTable(vmap, edges, cum, ccum, node_vals / total)
    return table, total[..., 0] * np.exp(shift)


def _stretched_edges(va, vb, vc, k, frac):
    # panels uniform in asinh((v - vc) / k): fine near the peak, coarse in the tails
    wa, wb = np.arcsinh((va - vc) / k), np.arcsinh((vb - vc) / k)
    e = vc + k * np.sinh(wa + (wb - wa) * frac)
    e[..., 0], e[..., -1] = np.squeeze(va), np.squeeze(vb)
    return e


def tabulate_inverse_cdf(logf, support, n_nodes=512, *, hint=None, gap_aware=False,
                         drop=45.0, indicator_tol=1e-11, max_rounds=8):
    """Tabulate the quantile function of the density exp(logf).

    The window is bracketed like ``integrate``. ``n_nodes`` panels in the
    mapped variable, uniform in asinh of the distance from the hinted
    centre, carry 5-point Gauss-Legendre masses, and panels
    whose cubic-Hermite CDF misses the interpolated half-panel mass by more
    than ``indicator_tol`` (relative to the total) are bisected. Raises
    ``QuadratureError`` if that is still the case after ``max_rounds``.
    """
    if n_nodes < 64:
        raise ValueError("n_nodes must be at least 64")
    vmap = _make_map(support)
    g = _Integrand(logf, vmap, gap_aware)
    vc, vs = _start(vmap, hint)
    va, vb, shift = _bracket(g, vmap, vc, vs, drop)
    edges = _stretched_edges(va, vb, min(max(vc, va), vb), 2.0 * vs, np.linspace(0.0, 1.0, n_nodes + 1))
    node_vals = np.exp(g(edges)[0] - shift)
    masses, inner = _gl5(edges[:-1], edges[1:], g, shift)
    for rnd in range(max_rounds + 1):
        h = np.diff(edges)
        bad = _indicator(h, masses, node_vals, inner) > indicator_tol * masses.sum()
        if not np.any(bad):
            break
        if rnd == max_rounds:
            raise QuadratureError(f"quantile table not resolved after {max_rounds} refinement rounds")
        a, b = edges[:-1][bad], edges[1:][bad]
        c = 0.5 * (a + b)
        fc = inner[bad, 2]   # the centre GL5 node is the midpoint
        ml, il = _gl5(a, c, g, shift)
        mr, ir = _gl5(c, b, g, shift)
        n = len(masses)
        first = np.arange(n) + np.cumsum(bad) - bad
        m = n + int(bad.sum())
        new_left = np.empty(m)
        new_fl = np.empty(m)
        new_mass = np.empty(m)
        new_inner = np.empty((m, 5))
        new_left[first], new_fl[first] = edges[:-1], node_vals[:-1]
        new_mass[first], new_inner[first] = masses, inner
        fb, sb = first[bad], first[bad] + 1
        new_mass[fb], new_inner[fb] = ml, il
        new_left[sb], new_fl[sb], new_mass[sb], new_inner[sb] = c, fc, mr, ir
        edges = np.append(new_left, edges[-1])
        node_vals = np.append(new_fl, node_vals[-1])
        masses, inner = new_mass, new_inner
    table, mass = _finish(vmap, edges, node_vals, masses, shift)
    table.evaluations = g.evaluations
    table.mass = float(mass)
    return table


def _gl5(a, b, g, shift):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    v = c[:, None] + h[:, None] * _GL5_X[None, :]
    fv = np.exp(g(v.ravel())[0] - shift).reshape(v.shape)
    return h * (fv @ _GL5_W), fv


class RowTables:
    """Quantile functions of a batch of distributions.

    Rows built on the shared fixed grid live in ``main``; rows that needed
    adaptive refinement are kept as separate single-row tables.
    """

    def __init__(self, main, overrides, indicator):
        self.main = main
        self.overrides = overrides
        self.indicator = indicator

    def __len__(self):
        return len(self.indicator)

    def quantile(self, rows, u):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        u = np.asarray(u, dtype=np.float64).ravel()
        out = self.main.quantile(rows, u)
        for r, tab in self.overrides.items():
            sel = rows == r
            if np.any(sel):
                out[sel] = tab(u[sel])
        return out


def _rows_eval(logf, vmap, v, rows):
    # log-integrand on a (len(rows), m) grid of mapped points
    x, logj, ok = vmap.to_x(v)
    safe = np.where(ok, x, vmap.safe_point)
    lf = np.asarray(logf(safe, rows), dtype=np.float64)
    if np.any(np.isnan(lf[ok])):
        raise QuadratureError("log-integrand returned NaN")
    return np.where(ok, lf + logj, -np.inf)


def _bracket_rows(logf, vmap, vc, vs, drop, rows):
    steps = _PROBE_STEPS
    right = vc[:, None] + vs[:, None] * steps
    left = vc[:, None] - vs[:, None] * steps
    if vmap.vlo == 0.0:
        left = np.maximum(left, 0.0)
    probes = np.concatenate([vc[:, None], right, left], axis=1)
    vals = _rows_eval(logf, vmap, probes, rows)
    top = vals.max(axis=1)
    thr = top - drop
    ns = len(steps)
    r_above = vals[:, 1:1 + ns] >= thr[:, None]
    l_above = vals[:, 1 + ns:] >= thr[:, None]
    idx = np.arange(ns)
    r_last = np.where(r_above, idx, -1).max(axis=1)
    l_last = np.where(l_above, idx, -1).max(axis=1)
    fail = ~np.isfinite(top) | (r_last == ns - 1)
    fail |= (l_last == ns - 1) & (left[:, -1] != 0.0)
    fail |= (vals[:, 0] < thr) & (r_last < 0) & (l_last < 0)
    k = np.arange(len(vc))
    vb = right[k, np.clip(r_last + 1, 0, ns - 1)]
    va = left[k, np.clip(l_last + 1, 0, ns - 1)]
    return va, vb, top, fail


def tabulate_inverse_cdf_rows(logf, support, centers, scales, n_nodes=256, *,
                              drop=45.0, indicator_tol=1e-7, chunk_points=2 ** 18):
    """Tabulate many quantile functions on a shared fixed grid.

    ``logf(x, rows)`` returns log densities for an array ``x`` of shape
    (len(rows), m) whose row i belongs to distribution ``rows[i]``.
    ``centers`` and ``scales`` give the rough location and spread of each
    distribution. Rows whose bracketing or accuracy indicator fails are
    rebuilt with ``tabulate_inverse_cdf``.
    """
    vmap = _make_map(support)
    centers = np.asarray(centers, dtype=np.float64).ravel()
    scales = np.asarray(scales, dtype=np.float64).ravel()
    K = len(centers)
    hints = np.array([_start(vmap, (c, s)) for c, s in zip(centers, scales)]).reshape(K, 2)
    n = n_nodes
    per_row = n + 1 + 5 * n
    chunk = max(1, chunk_points // per_row)
    edges = np.empty((K, n + 1))
    node_vals = np.empty((K, n + 1))
    masses = np.empty((K, n))
    shift = np.empty(K)
    indicator = np.empty(K)
    refine = np.zeros(K, dtype=bool)
    frac = np.linspace(0.0, 1.0, n + 1)
    for s0 in range(0, K, chunk):
        rows = np.arange(s0, min(K, s0 + chunk))
        va, vb, top, fail = _bracket_rows(logf, vmap, hints[rows, 0], hints[rows, 1], drop, rows)
        refine[rows] = fail
        va = np.where(fail, 0.0, va)
        vb = np.where(fail, 1.0, vb)
        top = np.where(fail, 0.0, top)
        vc = np.clip(hints[rows, 0], va, vb)
        e = _stretched_edges(va[:, None], vb[:, None], vc[:, None], 2.0 * hints[rows, 1][:, None], frac)
        c = 0.5 * (e[:, :-1] + e[:, 1:])
        h = 0.5 * (e[:, 1:] - e[:, :-1])
        inner = c[..., None] + h[..., None] * _GL5_X
        grid = np.concatenate([e, inner.reshape(len(rows), -1)], axis=1)
        vals = np.exp(_rows_eval(logf, vmap, grid, rows) - top[:, None])
        nv = vals[:, :n + 1]
        fv = vals[:, n + 1:].reshape(len(rows), n, 5)
        m = h * (fv @ _GL5_W)
        tot = m.sum(axis=1)
        ind = _indicator(2 * h, m, nv, fv).max(axis=1) / np.where(tot > 0, tot, 1.0)
        edges[rows], node_vals[rows], masses[rows] = e, nv, m
        shift[rows] = top
        indicator[rows] = ind
        refine[rows] |= ~(tot > 0) | (ind > indicator_tol)
    overrides = {}
    for r in np.nonzero(refine)[0]:
        one = int(r)
        overrides[one] = tabulate_inverse_cdf(
            lambda x, one=one: logf(x[None, :], np.array([one]))[0], support,
            n_nodes=max(64, n), hint=(centers[one], scales[one]), drop=drop,
            indicator_tol=indicator_tol)
        # keep the shared arrays valid for the placeholder row
        edges[one] = frac
        node_vals[one] = 1.0
        masses[one] = 1.0 / n
        shift[one] = 0.0
    main, _ = _finish(vmap, edges, node_vals, masses, shift)
    return RowTables(main, overrides, indicator)
