"""Finite-difference derivatives on nonuniform grids (Fornberg weights)."""

import numpy as np


def fornberg_weights(x0: float, x: np.ndarray, m: int) -> np.ndarray:
    """Weights ``w[k, j]`` so that ``f^(k)(x0) ~ sum_j w[k, j] f(x[j])``, k <= m."""
    n = len(x)
    c = np.zeros((m + 1, n))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def derivative(f: np.ndarray, x: np.ndarray, order: int, width: int = 7) -> np.ndarray:
    """``order``-th derivative of samples ``f(x)`` with ``width``-point stencils.

    Stencils are centred where possible and shifted inward at the ends.
    """
    f = np.asarray(f, dtype=float)
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < width:
        raise ValueError("not enough samples for the stencil")
    half = width // 2
    out = np.empty(n)
    for i in range(n):
        lo = min(max(i - half, 0), n - width)
        idx = slice(lo, lo + width)
        w = fornberg_weights(x[i], x[idx], order)[order]
        out[i] = w @ f[idx]
    return out
