# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: complex log-gamma and the log|Gamma|^2 sums.

Mirrors ``qharness._fallback`` exactly; both are selected through
``qharness._backend``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, atan2, ceil, floor, fabs, sqrt, expm1, M_PI, NAN

cnp.import_array()

cdef double LANCZOS_G = 6.024680040776729583740234375
cdef double POLE_TOL = 1e-12
cdef double LOG_PI = 1.1447298858494002

cdef double[13] NUM = [
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
]
cdef double[13] DEN = [
    1.0, 66.0, 1925.0, 32670.0, 357423.0, 2637558.0, 13339535.0,
    45995730.0, 105258076.0, 150917976.0, 120543840.0, 39916800.0, 0.0,
]


cdef inline void _lanczos(double x, double y, double* re, double* im) noexcept nogil:
    # log Gamma(x + iy) for x >= 0.5
    cdef double nr = 0.0, ni = 0.0, dr = 0.0, di = 0.0, wr, wi, t, m2
    cdef int k
    m2 = x * x + y * y
    if m2 <= 1.0:
        wr = x
        wi = y
        for k in range(13):
            t = nr * wr - ni * wi + NUM[k]
            ni = nr * wi + ni * wr
            nr = t
            t = dr * wr - di * wi + DEN[k]
            di = dr * wi + di * wr
            dr = t
    else:
        wr = x / m2
        wi = -y / m2
        for k in range(12, -1, -1):
            t = nr * wr - ni * wi + NUM[k]
            ni = nr * wi + ni * wr
            nr = t
            t = dr * wr - di * wi + DEN[k]
            di = dr * wi + di * wr
            dr = t
    # log(N/D)
    cdef double qr = nr * dr + ni * di
    cdef double qi = ni * dr - nr * di
    cdef double log_abs_l = 0.5 * (log(nr * nr + ni * ni) - log(dr * dr + di * di))
    cdef double arg_l = atan2(qi, qr)
    # (z - 1/2) * (log(z + g - 1/2) - 1)
    cdef double zr = x + LANCZOS_G - 0.5
    cdef double lr = 0.5 * log(zr * zr + y * y) - 1.0
    cdef double li = atan2(y, zr)
    re[0] = log_abs_l + (x - 0.5) * lr - y * li
    im[0] = arg_l + (x - 0.5) * li + y * lr


cdef inline double _lanczos_re(double x, double y) noexcept nogil:
    # Re log Gamma(x + iy) for x >= 0.5
    cdef double nr = 0.0, ni = 0.0, dr = 0.0, di = 0.0, wr, wi, t, m2
    cdef int k
    m2 = x * x + y * y
    if m2 <= 1.0:
        wr = x
        wi = y
        for k in range(13):
            t = nr * wr - ni * wi + NUM[k]
            ni = nr * wi + ni * wr
            nr = t
            t = dr * wr - di * wi + DEN[k]
            di = dr * wi + di * wr
            dr = t
    else:
        wr = x / m2
        wi = -y / m2
        for k in range(12, -1, -1):
            t = nr * wr - ni * wi + NUM[k]
            ni = nr * wi + ni * wr
            nr = t
            t = dr * wr - di * wi + DEN[k]
            di = dr * wi + di * wr
            dr = t
    cdef double zr = x + LANCZOS_G - 0.5
    return (0.5 * (log(nr * nr + ni * ni) - log(dr * dr + di * di))
            + (x - 0.5) * (0.5 * log(zr * zr + y * y) - 1.0) - y * atan2(y, zr))


cdef inline int _re_loggamma(double x, double y, double* re) noexcept nogil:
    cdef int n, k
    cdef double sr = 0.0, xr
    if x < 0.5:
        if fabs(y) <= POLE_TOL and x <= POLE_TOL and fabs(x - floor(x + 0.5)) <= POLE_TOL:
            return -1
        n = <int>ceil(0.5 - x)
        for k in range(n):
            xr = x + k
            sr += 0.5 * log(xr * xr + y * y)
        re[0] = _lanczos_re(x + n, y) - sr
    else:
        re[0] = _lanczos_re(x, y)
    return 0


cdef inline int _loggamma(double x, double y, double* re, double* im) noexcept nogil:
    cdef int n, k
    cdef double sr = 0.0, si = 0.0, xr
    if x < 0.5:
        if fabs(y) <= POLE_TOL and x <= POLE_TOL and fabs(x - floor(x + 0.5)) <= POLE_TOL:
            return -1
        n = <int>ceil(0.5 - x)
        for k in range(n):
            xr = x + k
            sr += 0.5 * log(xr * xr + y * y)
            si += atan2(y, xr)
        _lanczos(x + n, y, re, im)
        re[0] -= sr
        im[0] -= si
    else:
        _lanczos(x, y, re, im)
    return 0


def loggamma(cnp.ndarray z_in):
    """Principal-branch log Gamma over a flat complex array."""
    cdef const double complex[::1] z = np.ascontiguousarray(z_in, dtype=np.complex128).ravel()
    cdef Py_ssize_t n = z.shape[0], i
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double re, im
    cdef Py_ssize_t bad = -1
    with nogil:
        for i in range(n):
            if _loggamma(z[i].real, z[i].imag, &re, &im) != 0:
                bad = i
                break
            o[i] = re + 1j * im
    if bad >= 0:
        raise ValueError(f"log-gamma pole at z={complex(z[bad])!r}")
    return out


def sum_log_abs_gamma_sq(cnp.ndarray params_in, cnp.ndarray y_in):
    """Row-wise sum of 2*Re log Gamma(p_j + i*y).

    ``params_in`` has shape (1, k) (shared) or (n, k) (one row per point).
    """
    cdef const double complex[:, ::1] p = np.ascontiguousarray(params_in, dtype=np.complex128)
    cdef const double[::1] y = np.ascontiguousarray(y_in, dtype=np.float64).ravel()
    cdef Py_ssize_t n = y.shape[0], m = p.shape[0], k = p.shape[1], i, j, row
    if m != 1 and m != n:
        raise ValueError("params rows must be 1 or match the number of points")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double re, im, acc
    cdef Py_ssize_t bad = -1
    with nogil:
        for i in range(n):
            row = 0 if m == 1 else i
            acc = 0.0
            for j in range(k):
                if _re_loggamma(p[row, j].real, p[row, j].imag + y[i], &re) != 0:
                    bad = i
                    break
                acc += re
            if bad >= 0:
                break
            o[i] = 2.0 * acc
    if bad >= 0:
        raise ValueError("log-gamma pole inside |Gamma|^2 sum")
    return out


def log_weight(cnp.ndarray x_in):
    """log(2 sinh(2 pi sqrt(x)) / pi) for x > 0."""
    cdef const double[::1] x = np.ascontiguousarray(x_in, dtype=np.float64).ravel()
    cdef Py_ssize_t n = x.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double u
    with nogil:
        for i in range(n):
            if x[i] > 0.0:
                u = 2.0 * M_PI * sqrt(x[i])
                o[i] = u + log(-expm1(-2.0 * u)) - LOG_PI
            else:
                o[i] = NAN
    return out
