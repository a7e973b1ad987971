"""Pure-Python autonomous-system kernel.

Same algorithm as the compiled ``_kernels`` extension, written on plain floats;
selected at import when the extension is unavailable.
"""

import math

import numpy as np

from ._tableau import A, B, C, E

_A = [list(map(float, row)) for row in A]
_B = list(map(float, B))
_E = list(map(float, E))
_C = list(map(float, C))

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


def as_rhs(x):
    """Right-hand side on a length-6 sequence; ``None`` if undefined."""
    al, be, P, Pt, z, zt = x
    if not al > 0 or P == 0.0 or not math.isfinite(P):
        return None
    al3 = al * al * al
    w = P * P / al3
    at = (2.0 * P * Pt / al3 + 4.0 * w - 4.0 * z * z - 2.0 * z * zt) * al / (3.0 * w)
    return [
        at,
        5.0 * be - 5.0 * al,
        Pt,
        7.0 * Pt - 12.0 * P + 12.0 * al * z,
        zt,
        6.0 * P / (al * al) - 5.0 * zt - 6.0 * z,
    ]


def _rms_scaled(v, scale):
    acc = 0.0
    for a, b in zip(v, scale):
        r = a / b
        acc += r * r
    return math.sqrt(acc / len(v))


def _initial_step(y, f0, direction, rtol, atol):
    scale = [atol + abs(v) * rtol for v in y]
    d0 = _rms_scaled(y, scale)
    d1 = _rms_scaled(f0, scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = as_rhs([y[i] + h0 * direction * f0[i] for i in range(6)])
    if f1 is None:
        return h0
    d2 = _rms_scaled([f1[i] - f0[i] for i in range(6)], scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def integrate_as(x0, t0, t_end, rtol, atol, h0=0.0, max_norm=1e8, max_steps=200000):
    """Adaptive Dormand-Prince loop for the autonomous system.

    Returns ``(ts, ys, ks, status, t_fail)`` with the status codes of
    :mod:`javelin.integrator`.
    """
    y = [float(v) for v in x0]
    t = float(t0)
    t_end = float(t_end)
    direction = 1.0 if t_end >= t else -1.0
    fy = as_rhs(y)
    if fy is None:
        return np.array([t]), np.array([y]), np.empty((0, 7, 6)), 3, t
    ts, ys, ks = [t], [list(y)], []
    if t == t_end:
        return np.array(ts), np.array(ys), np.empty((0, 7, 6)), 0, None
    h_abs = abs(h0) if h0 else _initial_step(y, fy, direction, rtol, atol)
    status, t_fail = 0, None
    steps = 0
    while direction * (t_end - t) > 0:
        if steps >= max_steps:
            status, t_fail = 4, t
            break
        min_step = 10 * abs(np.nextafter(t, direction * np.inf) - t)
        if h_abs < min_step:
            h_abs = min_step
        rejected = False
        while True:
            remaining = abs(t_end - t)
            if h_abs >= remaining:
                h_abs = remaining
                t_new = t_end
            else:
                t_new = t + h_abs * direction
            h = h_abs * direction
            K = [fy]
            ok = True
            for s in range(1, 6):
                a = _A[s]
                ys_ = [y[i] + h * sum(a[j] * K[j][i] for j in range(s)) for i in range(6)]
                k = as_rhs(ys_)
                if k is None:
                    ok = False
                    break
                K.append(k)
            err = math.inf
            if ok:
                y_new = [y[i] + h * sum(_B[j] * K[j][i] for j in range(6)) for i in range(6)]
                f_new = as_rhs(y_new)
                if f_new is None or not all(math.isfinite(v) for v in y_new + f_new):
                    ok = False
                else:
                    K.append(f_new)
                    scale = [atol + max(abs(y[i]), abs(y_new[i])) * rtol for i in range(6)]
                    errv = [h * sum(_E[j] * K[j][i] for j in range(7)) for i in range(6)]
                    err = _rms_scaled(errv, scale)
            if err < 1.0:
                if err == 0.0:
                    factor = MAX_FACTOR
                else:
                    factor = min(MAX_FACTOR, SAFETY * err**-0.2)
                if rejected:
                    factor = min(1.0, factor)
                h_abs *= factor
                break
            if not ok:
                h_abs *= 0.25
            else:
                h_abs *= max(MIN_FACTOR, SAFETY * err**-0.2)
            rejected = True
            if h_abs < min_step:
                status = 3 if not ok else 2
                t_fail = t
                break
        if status != 0:
            break
        steps += 1
        t, y, fy = t_new, y_new, f_new
        ts.append(t)
        ys.append(list(y))
        ks.append(K)
        if max(abs(v) for v in y) > max_norm:
            status, t_fail = 1, t
            break
    ks_arr = np.array(ks, dtype=float) if ks else np.empty((0, 7, 6))
    return np.array(ts), np.array(ys, dtype=float), ks_arr, status, t_fail
