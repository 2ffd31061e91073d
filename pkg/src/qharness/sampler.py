"""Trajectory simulation by inverse-CDF sampling of tabulated quantile functions.

Marginals are tabulated once per (family, t). Transitions of the secant
and Dirichlet processes reduce to a single innovation law per (s, t):
``Y_t = Y_s + W`` and ``Y_t = Y_s + (1 - Y_s) W`` respectively. The other
families need one table per conditioning value; values are grouped into
buckets of width ``quantization * sd(Y_s)`` and each bucket is tabulated at
its centre. With ``quantization=None`` every conditioning value gets its own
table.
"""
from collections import OrderedDict
from dataclasses import dataclass
import math
import threading

import numpy as np

from . import densities as dens
from .densities import DomainError
from .numerics import tabulate_inverse_cdf, tabulate_inverse_cdf_rows
from .processes import Dirichlet, FourParam, Secant, ThreeParam, TwoParam
from .standardize import standardize

__all__ = [
    "DEFAULT_SEED",
    "RngHandle",
    "Trajectory",
    "PathBatch",
    "Sampler",
    "default_sampler",
    "sample_marginal",
    "sample_transition",
    "simulate_path",
    "simulate_paths",
    "simulate_secant_bridge",
    "secant_bridge_family",
    "simulate_standardized",
]

DEFAULT_SEED = 0x2024
_TINY_U = 2.0 ** -54


class RngHandle:
    """Deterministic stream identified by (seed, spawn key).

    ``split`` hands out child streams with successive counters; the same
    seed and the same sequence of calls always give the same numbers.
    """

    def __init__(self, seed=DEFAULT_SEED, key=()):
        self.seed = int(seed)
        self.key = tuple(key)
        self.counter = 0
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.key)))

    def split(self):
        child = RngHandle(self.seed, self.key + (self.counter,))
        self.counter += 1
        return child

    def uniform(self, size=None):
        """Uniforms strictly inside (0, 1)."""
        return self._gen.random(size) + _TINY_U


def _as_rng(rng):
    if rng is None:
        return RngHandle()
    if isinstance(rng, RngHandle):
        return rng
    return RngHandle(rng)


def _descriptor(fam):
    out = {"family": fam.tag}
    for k, v in fam.params().items():
        out[k] = v
    return out


@dataclass(frozen=True)
class Trajectory:
    family: dict
    seed: int
    times: tuple
    states: tuple

    @property
    def points(self):
        return list(zip(self.times, self.states))


@dataclass(frozen=True)
class PathBatch:
    """``states[i, j]`` is path i at ``times[j]``."""

    family: dict
    seed: int
    times: np.ndarray
    states: np.ndarray

    def __len__(self):
        return self.states.shape[0]

    def path(self, i):
        return Trajectory(self.family, self.seed, tuple(self.times.tolist()),
                          tuple(self.states[i].tolist()))


_OPEN01 = (np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))


class Sampler:
    """Table construction, caching and drawing.

    ``quantization`` is the transition bucket width in units of sd(Y_s)
    (None disables bucketing); ``cache_size`` bounds the LRU table cache.
    Lookups are guarded by a lock, table construction is not, so two
    threads may build the same table; the first stored copy wins.
    """

    def __init__(self, quantization=1e-3, cache_size=256, table_nodes=512, batch_nodes=512,
                 batch_indicator_tol=1e-7):
        if quantization is not None and not quantization > 0:
            raise ValueError("quantization must be positive or None")
        self.quantization = quantization
        self.cache_size = int(cache_size)
        self.table_nodes = table_nodes
        self.batch_nodes = batch_nodes
        self.batch_indicator_tol = batch_indicator_tol
        self._cache = OrderedDict()
        self._lock = threading.Lock()

    # -- cache ------------------------------------------------------------
    def _cached(self, key, build):
        with self._lock:
            tab = self._cache.get(key)
            if tab is not None:
                self._cache.move_to_end(key)
                return tab
        tab = build()
        with self._lock:
            tab = self._cache.setdefault(key, tab)
            self._cache.move_to_end(key)
            while len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return tab

    def cache_info(self):
        with self._lock:
            return {"entries": len(self._cache), "capacity": self.cache_size}

    # -- tables -------------------------------------------------------------
    def marginal_table(self, fam, t):
        fam.check_time(t)

        def build():
            hint = (fam.mean(t), fam.sd(t))
            if fam.gap_aware:
                return tabulate_inverse_cdf(
                    lambda x, glo, ghi: fam.marginal_log_pdf(t, x, gap=ghi), fam.state_support,
                    self.table_nodes, hint=hint, gap_aware=True)
            return tabulate_inverse_cdf(lambda x: fam.marginal_log_pdf(t, x),
                                        fam.state_support, self.table_nodes, hint=hint)
        return self._cached((fam, "marginal", t), build)

    def innovation_table(self, fam, s, t):
        """Quantile table of W for the secant and Dirichlet transitions."""
        fam.check_time(s, t)

        def build():
            if isinstance(fam, Secant):
                m = fam.one_sided(s, t, 0.0)
                return tabulate_inverse_cdf(lambda w: fam.increment_log_pdf(s, t, w), "full-line",
                                            self.table_nodes, hint=(m.mean, math.sqrt(m.variance)))
            if isinstance(fam, Dirichlet):
                a, b = t - s, fam.A - t
                hint = (a / (a + b), math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1))))
                return tabulate_inverse_cdf(
                    lambda w, glo, ghi: fam.increment_log_pdf(s, t, w, gap=ghi), (0.0, 1.0),
                    self.table_nodes, hint=hint, gap_aware=True)
            raise TypeError(f"{type(fam).__name__} has no innovation representation")
        return self._cached((fam, "innovation", s, t), build)

    def _bucket(self, fam, s, x):
        h = self.quantization * fam.sd(s)
        ids = np.floor(x / h)
        return ids, (ids + 0.5) * h

    def transition_table(self, fam, s, t, x):
        """Single-row table of Y_t given Y_s = x (bucket centre when bucketing)."""
        fam.check_time(s, t)
        x = float(fam.check_state(x))
        if self.quantization is None:
            return self._exact_transition_table(fam, s, t, x)
        bid, centre = self._bucket(fam, s, x)
        return self._cached((fam, "transition", s, t, float(bid)),
                            lambda: self._exact_transition_table(fam, s, t, float(centre)))

    def _exact_transition_table(self, fam, s, t, x):
        m = fam.transition_moments(s, t, x)
        return tabulate_inverse_cdf(lambda y: fam.transition_log_pdf(s, t, x, y),
                                    fam.state_support, self.table_nodes,
                                    hint=(m.mean, math.sqrt(m.variance)))

    # -- draws --------------------------------------------------------------
    def marginal(self, fam, t, u):
        x = self.marginal_table(fam, t)(np.asarray(u, dtype=np.float64))
        return _clip_state(fam, x)

    def transition(self, fam, s, t, x, u):
        """Vectorized transition draws: state at t for each entry of ``x``."""
        x = np.asarray(x, dtype=np.float64)
        u = np.asarray(u, dtype=np.float64)
        if isinstance(fam, Secant):
            return x + self.innovation_table(fam, s, t)(u)
        if isinstance(fam, Dirichlet):
            w = self.innovation_table(fam, s, t)(u)
            return _clip_state(fam, x + (1.0 - x) * w)
        fam.check_time(s, t)
        fam.check_state(x)
        flat = x.ravel()
        if self.quantization is None:
            centres, inverse = flat, np.arange(flat.size)
        else:
            ids, _ = self._bucket(fam, s, flat)
            uniq, inverse = np.unique(ids, return_inverse=True)
            centres = (uniq + 0.5) * (self.quantization * fam.sd(s))
        hints = np.array([_moment_hint(fam, s, t, c) for c in centres]).reshape(-1, 2)
        tables = tabulate_inverse_cdf_rows(
            _row_evaluator(fam, s, t, centres), fam.state_support, hints[:, 0], hints[:, 1],
            n_nodes=self.batch_nodes, indicator_tol=self.batch_indicator_tol)
        y = tables.quantile(inverse, u.ravel())
        return _clip_state(fam, y).reshape(x.shape)


def _moment_hint(fam, s, t, x):
    m = fam.transition_moments(s, t, float(x))
    return m.mean, math.sqrt(m.variance)


def _row_evaluator(fam, s, t, centres):
    # log transition density for a (rows, m) grid, row i conditioned on centres[rows[i]]
    if isinstance(fam, FourParam):
        def logf(y, rows):
            p, _ = fam._transition_rows(s, t, centres[rows][:, None], y)
            return dens.wilson_log_pdf_rows(p, y)
    elif isinstance(fam, ThreeParam):
        def logf(y, rows):
            p, _ = fam._transition_rows(s, t, centres[rows][:, None], y)
            return dens.threeparam_log_pdf_rows(p, y)
    elif isinstance(fam, TwoParam):
        def logf(y, rows):
            return dens.hahn_log_pdf_rows(fam.A - t, (t - s) - 1j * centres[rows][:, None], y)
    else:
        raise TypeError(f"no row evaluator for {type(fam).__name__}")
    return logf


def _clip_state(fam, x):
    # draws that round onto the boundary are moved to the nearest state
    if isinstance(fam, Dirichlet):
        return np.clip(x, *_OPEN01)
    if fam.state_support == "half-line":
        return np.maximum(x, _OPEN01[0])
    return x


_DEFAULT = Sampler()


def default_sampler():
    return _DEFAULT


def _check_times(fam, times):
    times = np.asarray(times, dtype=np.float64).ravel()
    if times.size == 0:
        raise DomainError("at least one time is required")
    fam.check_time(*times.tolist())
    return times


def sample_marginal(fam, t, rng=None, size=None, sampler=None):
    """Draw from the marginal at time t (a float when ``size`` is None)."""
    sampler = sampler or _DEFAULT
    rng = _as_rng(rng)
    u = rng.uniform(size)
    x = sampler.marginal(fam, t, u)
    return float(x) if size is None else x


def sample_transition(fam, s, t, x, rng=None, size=None, sampler=None):
    """Draw Y_t given Y_s = x (a float when ``size`` is None)."""
    sampler = sampler or _DEFAULT
    rng = _as_rng(rng)
    n = 1 if size is None else size
    u = rng.uniform(n)
    y = sampler.transition(fam, s, t, np.full(np.shape(u), float(x)), u)
    return float(y[0]) if size is None else y


def simulate_paths(fam, times, n_paths, rng=None, sampler=None):
    """Simulate ``n_paths`` independent paths at ``times`` (vectorized)."""
    sampler = sampler or _DEFAULT
    rng = _as_rng(rng)
    times = _check_times(fam, times)
    n_paths = int(n_paths)
    if n_paths < 0:
        raise ValueError("n_paths must be non-negative")
    states = np.empty((n_paths, times.size))
    if n_paths:
        states[:, 0] = sampler.marginal(fam, times[0], rng.uniform(n_paths))
        for j in range(1, times.size):
            u = rng.uniform(n_paths)
            states[:, j] = sampler.transition(fam, times[j - 1], times[j], states[:, j - 1], u)
    return PathBatch(_descriptor(fam), rng.seed, times, states)


def simulate_path(fam, times, rng=None, sampler=None):
    """One trajectory: marginal draw at times[0], then Markov transitions."""
    rng = _as_rng(rng)
    return simulate_paths(fam, times, 1, rng, sampler).path(0)


def secant_bridge_family(S, U, yS, yU):
    """Two-parameter family equal in law to the secant bridge from (S, yS) to (U, yU)."""
    if not U - S > 0:
        raise DomainError(f"bridge needs U - S > 0 ({U - S:g})")
    return TwoParam(complex(U, -yU), complex(-S, -yS))


def simulate_secant_bridge(beta, S, U, yS, yU, times, n_paths=1, rng=None, sampler=None):
    """Paths of the secant process pinned at (S, yS) and (U, yU).

    The bridge law does not depend on ``beta``; it is validated and recorded.
    """
    Secant(beta)
    fam = secant_bridge_family(S, U, yS, yU)
    batch = simulate_paths(fam, times, n_paths, rng, sampler)
    desc = dict(batch.family, bridge_of="secant", beta=float(beta), S=S, U=U, yS=yS, yU=yU)
    return PathBatch(desc, batch.seed, batch.times, batch.states)


def simulate_standardized(fam, times, n_paths=1, rng=None, sampler=None):
    """Paths of the standardized process X at times in T'."""
    proc, _ = standardize(fam)
    times = np.asarray(times, dtype=np.float64).ravel()
    try:
        proc.check_times(times.tolist())
    except dens.ParameterError as exc:
        raise DomainError(str(exc)) from None
    src = proc.source_times(times)
    batch = simulate_paths(fam, src, n_paths, rng, sampler)
    x = proc.to_standard(times, batch.states) if n_paths else batch.states
    return PathBatch(dict(batch.family, standardized=True), batch.seed, times, x)
