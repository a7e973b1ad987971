"""Autonomous system for the peeled variables in ``t = -ln s``.

State ordering is ``(alpha, beta, Phi, Phi_t, zeta, zeta_t)``. The system is
second order in ``Phi`` and ``zeta`` and first order in ``alpha`` and ``beta``:

* ``6 Phi = alpha^2 (zeta_tt + 5 zeta_t + 6 zeta)``
* ``Phi_tt - 7 Phi_t + 12 Phi = 12 alpha zeta``
* ``(4 + D)(Phi^2 / alpha^3) = 2 zeta (2 + D) zeta``
* ``5 beta - beta_t = 5 alpha``

The third equation is solved for ``alpha_t``, which needs ``Phi != 0``.
All functions broadcast over trailing axes of the state.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

FIXED_POINT = np.array([1.0, 1.0, 1.0, 0.0, 1.0, 0.0])


class SingularStateError(ArithmeticError):
    """State where the explicit form of the system is undefined."""


class ASState(NamedTuple):
    alpha: float
    beta: float
    Phi: float
    Phi_t: float
    zeta: float
    zeta_t: float


class ASDerivative(NamedTuple):
    alpha_t: float
    beta_t: float
    Phi_t: float
    Phi_tt: float
    zeta_t: float
    zeta_tt: float


def _check(al, P):
    if np.any(~(al > 0)):
        raise SingularStateError("alpha must be positive")
    if np.any(P == 0) or not np.all(np.isfinite(P)):
        raise SingularStateError("Phi must be finite and nonzero")


def rhs_array(x):
    """Time derivative of the state ``x`` (shape ``(6, ...)``)."""
    al, be, P, Pt, z, zt = np.asarray(x, dtype=float)
    _check(al, P)
    al3 = al**3
    w = P * P / al3
    alpha_t = (2 * P * Pt / al3 + 4 * w - 4 * z * z - 2 * z * zt) * al / (3 * w)
    beta_t = 5 * be - 5 * al
    Ptt = 7 * Pt - 12 * P + 12 * al * z
    ztt = 6 * P / (al * al) - 5 * zt - 6 * z
    return np.array([alpha_t, beta_t, Pt, Ptt, zt, ztt])


def rhs(x) -> ASDerivative:
    """Explicit right-hand side; raises :class:`SingularStateError`."""
    d = rhs_array(np.asarray(x, dtype=float))
    return ASDerivative(*(float(v) for v in d))


def system_rhs(t, x):
    """``f(t, x)`` signature for the integrator."""
    return rhs_array(x)


def residual(x, d) -> np.ndarray:
    """Residuals of the four governing equations at state ``x``, derivative ``d``.

    ``Phi_t`` and ``zeta_t`` are read from the state; ``alpha_t``, ``beta_t``
    and the second derivatives from ``d``.
    """
    al, be, P, Pt, z, zt = np.asarray(x, dtype=float)
    at, bt, _, Ptt, _, ztt = np.asarray(d, dtype=float)
    r1 = 6 * P - al**2 * (ztt + 5 * zt + 6 * z)
    r2 = Ptt - 7 * Pt + 12 * P - 12 * al * z
    w = P**2 / al**3
    w_t = 2 * P * Pt / al**3 - 3 * P**2 * at / al**4
    r3 = w_t + 4 * w - 2 * z * (zt + 2 * z)
    r4 = 5 * be - bt - 5 * al
    return np.array([r1, r2, r3, r4])


def event_values(x) -> tuple[float, float]:
    """``(alpha_t - 4 alpha, zeta_t + 2 zeta)``.

    The first vanishes where ``a_s = 0`` and the second where ``y_s = 0``.
    """
    x = np.asarray(x, dtype=float)
    return g_area(None, x), g_slope(None, x)


def g_area(t, x):
    d = rhs_array(x)
    return d[0] - 4 * np.asarray(x)[0]


def g_slope(t, x):
    x = np.asarray(x)
    return x[5] + 2 * x[4]


def jacobian_fd(x=FIXED_POINT, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of :func:`rhs_array`."""
    x = np.asarray(x, dtype=float)
    jac = np.empty((6, 6))
    for j in range(6):
        e = np.zeros(6)
        e[j] = step
        jac[:, j] = (rhs_array(x + e) - rhs_array(x - e)) / (2 * step)
    return jac
