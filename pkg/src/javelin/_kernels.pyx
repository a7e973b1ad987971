# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled autonomous-system kernel (Dormand-Prince 5(4) hot loop).

Mirrors ``_kernels_py`` step for step; only the arithmetic is typed.
"""

import numpy as np
from libc.math cimport fabs, sqrt, pow, isfinite, nextafter, INFINITY

cdef double SAFETY = 0.9
cdef double MIN_FACTOR = 0.2
cdef double MAX_FACTOR = 10.0

cdef double CA[6][5]
cdef double CB[6]
cdef double CE[7]

CA[0][:] = [0, 0, 0, 0, 0]
CA[1][:] = [1.0 / 5, 0, 0, 0, 0]
CA[2][:] = [3.0 / 40, 9.0 / 40, 0, 0, 0]
CA[3][:] = [44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0]
CA[4][:] = [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0]
CA[5][:] = [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656]
CB[:] = [35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84]
CE[:] = [-71.0 / 57600, 0, 71.0 / 16695, -71.0 / 1920, 17253.0 / 339200, -22.0 / 525, 1.0 / 40]


cdef inline int _rhs(const double* x, double* out) nogil:
    cdef double al = x[0], be = x[1], P = x[2], Pt = x[3], z = x[4], zt = x[5]
    cdef double al3, w
    if not (al > 0) or P == 0.0 or not isfinite(P):
        return 0
    al3 = al * al * al
    w = P * P / al3
    out[0] = (2.0 * P * Pt / al3 + 4.0 * w - 4.0 * z * z - 2.0 * z * zt) * al / (3.0 * w)
    out[1] = 5.0 * be - 5.0 * al
    out[2] = Pt
    out[3] = 7.0 * Pt - 12.0 * P + 12.0 * al * z
    out[4] = zt
    out[5] = 6.0 * P / (al * al) - 5.0 * zt - 6.0 * z
    return 1


cdef inline double _rms_scaled(const double* v, const double* scale) nogil:
    cdef double acc = 0.0, r
    cdef int i
    for i in range(6):
        r = v[i] / scale[i]
        acc += r * r
    return sqrt(acc / 6.0)


def as_rhs(x):
    """Right-hand side on a length-6 sequence; ``None`` if undefined."""
    cdef double xs[6]
    cdef double out[6]
    cdef int i
    for i in range(6):
        xs[i] = x[i]
    if not _rhs(xs, out):
        return None
    return [out[i] for i in range(6)]


cdef double _initial_step(const double* y, const double* f0, double direction,
                          double rtol, double atol):
    cdef double scale[6]
    cdef double y1[6]
    cdef double f1[6]
    cdef double diff[6]
    cdef double d0, d1, d2, h0, h1
    cdef int i
    for i in range(6):
        scale[i] = atol + fabs(y[i]) * rtol
    d0 = _rms_scaled(y, scale)
    d1 = _rms_scaled(f0, scale)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    for i in range(6):
        y1[i] = y[i] + h0 * direction * f0[i]
    if not _rhs(y1, f1):
        return h0
    for i in range(6):
        diff[i] = f1[i] - f0[i]
    d2 = _rms_scaled(diff, scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = pow(0.01 / max(d1, d2), 0.2)
    return min(100 * h0, h1)


def integrate_as(x0, double t0, double t_end, double rtol, double atol,
                 double h0=0.0, double max_norm=1e8, long max_steps=200000):
    """Adaptive Dormand-Prince loop for the autonomous system.

    Returns ``(ts, ys, ks, status, t_fail)`` with the status codes of
    :mod:`javelin.integrator`.
    """
    cdef double y[6]
    cdef double fy[6]
    cdef double y_new[6]
    cdef double ystage[6]
    cdef double scale[6]
    cdef double errv[6]
    cdef double K[7][6]
    cdef double t = t0, t_new = t0, h, h_abs, min_step, remaining, err, factor, acc, ymax
    cdef double direction = 1.0 if t_end >= t0 else -1.0
    cdef int i, j, s, ok, rejected, status = 0
    cdef long steps = 0, cap = 256
    cdef object t_fail = None

    for i in range(6):
        y[i] = x0[i]
    if not _rhs(y, fy):
        return (np.array([t0]), np.array([[y[i] for i in range(6)]]),
                np.empty((0, 7, 6)), 3, t0)

    ts_arr = np.empty(cap)
    ys_arr = np.empty((cap, 6))
    ks_arr = np.empty((cap, 7, 6))
    cdef double[::1] ts_v = ts_arr
    cdef double[:, ::1] ys_v = ys_arr
    cdef double[:, :, ::1] ks_v = ks_arr
    ts_v[0] = t
    for i in range(6):
        ys_v[0, i] = y[i]
    if t == t_end:
        return ts_arr[:1].copy(), ys_arr[:1].copy(), np.empty((0, 7, 6)), 0, None

    if h0 != 0.0:
        h_abs = fabs(h0)
    else:
        h_abs = _initial_step(y, fy, direction, rtol, atol)

    while direction * (t_end - t) > 0:
        if steps >= max_steps:
            status = 4
            t_fail = t
            break
        min_step = 10 * fabs(nextafter(t, direction * INFINITY) - t)
        if h_abs < min_step:
            h_abs = min_step
        rejected = 0
        while True:
            remaining = fabs(t_end - t)
            if h_abs >= remaining:
                h_abs = remaining
                t_new = t_end
            else:
                t_new = t + h_abs * direction
            h = h_abs * direction
            for i in range(6):
                K[0][i] = fy[i]
            ok = 1
            for s in range(1, 6):
                for i in range(6):
                    acc = 0.0
                    for j in range(s):
                        acc += CA[s][j] * K[j][i]
                    ystage[i] = y[i] + h * acc
                if not _rhs(ystage, K[s]):
                    ok = 0
                    break
            err = INFINITY
            if ok:
                for i in range(6):
                    acc = 0.0
                    for j in range(6):
                        acc += CB[j] * K[j][i]
                    y_new[i] = y[i] + h * acc
                if not _rhs(y_new, K[6]):
                    ok = 0
                else:
                    for i in range(6):
                        if not (isfinite(y_new[i]) and isfinite(K[6][i])):
                            ok = 0
                if ok:
                    for i in range(6):
                        scale[i] = atol + max(fabs(y[i]), fabs(y_new[i])) * rtol
                        acc = 0.0
                        for j in range(7):
                            acc += CE[j] * K[j][i]
                        errv[i] = h * acc
                    err = _rms_scaled(errv, scale)
            if err < 1.0:
                if err == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, SAFETY * pow(err, -0.2))
                if rejected:
                    factor = min(1.0, factor)
                h_abs *= factor
                break
            if not ok:
                h_abs *= 0.25
            else:
                h_abs *= max(MIN_FACTOR, SAFETY * pow(err, -0.2))
            rejected = 1
            if h_abs < min_step:
                status = 3 if not ok else 2
                t_fail = t
                break
        if status != 0:
            break
        steps += 1
        if steps >= cap:
            cap *= 2
            ts_arr = np.resize(ts_arr, cap)
            ys_arr = np.resize(ys_arr, (cap, 6))
            ks_arr = np.resize(ks_arr, (cap, 7, 6))
            ts_v = ts_arr
            ys_v = ys_arr
            ks_v = ks_arr
        t = t_new
        ymax = 0.0
        for i in range(6):
            y[i] = y_new[i]
            fy[i] = K[6][i]
            ys_v[steps, i] = y[i]
            if fabs(y[i]) > ymax:
                ymax = fabs(y[i])
            for j in range(7):
                ks_v[steps - 1, j, i] = K[j][i]
        ts_v[steps] = t
        if ymax > max_norm:
            status = 1
            t_fail = t
            break
    return (ts_arr[:steps + 1].copy(), ys_arr[:steps + 1].copy(),
            ks_arr[:steps].copy(), status, t_fail)
