"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Same rational Lanczos approximation, same shift for Re(z) < 1/2, same
error behaviour. Used when the extension is not built or when
``QHARNESS_PURE_PYTHON=1``.
"""
import numpy as np

LANCZOS_G = 6.024680040776729583740234375
POLE_TOL = 1e-12
LOG_PI = np.log(np.pi)

NUM = np.array([
    0.006061842346248906525783753964555936883222,
    0.5098416655656676188125178644804694509993,
    19.51992788247617482847860966235652136208,
    449.9445569063168119446858607650988409623,
    6955.999602515376140356310115515198987526,
    75999.29304014542649875303443598909137092,
    601859.6171681098786670226533699352302507,
    3481712.15498064590882071018964774556468,
    14605578.08768506808414169982791359218571,
    43338889.32467613834773723740590533316085,
    86363131.28813859145546927288977868422342,
    103794043.1163445451906271053616070238554,
    56906521.91347156388090791033559122686859,
])
DEN = np.array([
    1.0, 66.0, 1925.0, 32670.0, 357423.0, 2637558.0, 13339535.0,
    45995730.0, 105258076.0, 150917976.0, 120543840.0, 39916800.0, 0.0,
])


def _lanczos(z):
    # log Gamma(z) for Re(z) >= 0.5
    small = np.abs(z) <= 1.0
    w = np.where(small, z, 1.0 / np.where(small, 1.0, z))
    num = np.zeros_like(z)
    den = np.zeros_like(z)
    for k in range(13):
        # |z| <= 1 uses ascending Horner, |z| > 1 the reversed one in 1/z
        cn = np.where(small, NUM[k], NUM[12 - k])
        cd = np.where(small, DEN[k], DEN[12 - k])
        num = num * w + cn
        den = den * w + cd
    return np.log(num / den) + (z - 0.5) * (np.log(z + LANCZOS_G - 0.5) - 1.0)


def _check_poles(z):
    x, y = z.real, z.imag
    pole = (np.abs(y) <= POLE_TOL) & (x <= POLE_TOL) & (np.abs(x - np.floor(x + 0.5)) <= POLE_TOL)
    if np.any(pole):
        raise ValueError(f"log-gamma pole at z={complex(z[np.argmax(pole)])!r}")


def loggamma(z):
    """Principal-branch log Gamma over a flat complex array."""
    z = np.ascontiguousarray(z, dtype=np.complex128).ravel()
    _check_poles(z)
    shift = np.where(z.real < 0.5, np.ceil(0.5 - z.real), 0.0).astype(np.int64)
    out = _lanczos(z + shift)
    nmax = int(shift.max()) if shift.size else 0
    for k in range(nmax):
        active = shift > k
        out = out - np.where(active, np.log(np.where(active, z + k, 1.0)), 0.0)
    return out


def sum_log_abs_gamma_sq(params, y):
    """Row-wise sum of 2*Re log Gamma(p_j + i*y)."""
    p = np.ascontiguousarray(params, dtype=np.complex128)
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if p.shape[0] not in (1, y.shape[0]):
        raise ValueError("params rows must be 1 or match the number of points")
    z = p + 1j * y[:, None]
    try:
        lg = loggamma(z.ravel()).reshape(z.shape)
    except ValueError:
        raise ValueError("log-gamma pole inside |Gamma|^2 sum") from None
    return 2.0 * lg.real.sum(axis=1)


def log_weight(x):
    """log(2 sinh(2 pi sqrt(x)) / pi) for x > 0."""
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.full(x.shape, np.nan)
    pos = x > 0
    u = 2.0 * np.pi * np.sqrt(x[pos])
    out[pos] = u + np.log(-np.expm1(-2.0 * u)) - LOG_PI
    return out
