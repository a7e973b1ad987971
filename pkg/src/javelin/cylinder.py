"""Uniform (cylindrical) beam: the reference frequency and mode shape.

With ``a = 1`` on ``s`` in ``[-1, 1]`` the even free-free modes are
``y = A cos(k s) + B cosh(k s)`` with ``k = sqrt(lambda)``; the free-end
conditions reduce to ``tan k + tanh k = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect

# just inside (pi/2, pi), where tan is continuous and negative
_K_LO = math.pi / 2 + 1e-9
_K_HI = math.pi - 1e-9


def frequency_function(k: float) -> float:
    """``tan k + tanh k``; vanishes at ``k = sqrt(lambda)``."""
    return math.tan(k) + math.tanh(k)


@lru_cache(maxsize=None)
def cylinder_lambda() -> float:
    """Lowest nonzero even frequency of the uniform free-free beam."""
    k = bisect(frequency_function, _K_LO, _K_HI, xtol=1e-15, rtol=4 * np.finfo(float).eps,
               maxiter=200)
    return k * k


@dataclass(frozen=True)
class CylinderMode:
    """Fundamental even mode, normalized so ``max |y| = 1`` on ``[-1, 1]``.

    Attributes
    ----------
    lam : float
        Nondimensional frequency.
    A, B : float
        Coefficients of ``cos(k s)`` and ``cosh(k s)``.
    s, y : ndarray
        Samples on ``[-1, 1]``.
    """

    lam: float
    A: float
    B: float
    s: np.ndarray
    y: np.ndarray

    @property
    def k(self) -> float:
        return math.sqrt(self.lam)

    def derivative(self, s, order: int = 0):
        """Analytic ``order``-th derivative of the mode at ``s``."""
        s = np.asarray(s, dtype=float)
        k = self.k
        ks = k * s
        trig = (np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x), np.sin)[order % 4]
        hyp = np.cosh if order % 2 == 0 else np.sinh
        return k**order * (self.A * trig(ks) + self.B * hyp(ks))

    def bc_residuals(self) -> tuple[float, float]:
        """``(y_ss(1), y_sss(1))`` scaled by ``k^2`` and ``k^3``."""
        k = self.k
        return (float(self.derivative(1.0, 2)) / k**2, float(self.derivative(1.0, 3)) / k**3)


def cylinder_mode(n_samples: int = 201) -> CylinderMode:
    """Sample the fundamental even mode on ``n_samples`` points of ``[-1, 1]``."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    lam = cylinder_lambda()
    k = math.sqrt(lam)
    # y_ss(1) = 0 fixes B/A (y_sss(1) = 0 then holds by the frequency equation)
    B = math.cos(k) / math.cosh(k)
    fine = np.linspace(0.0, 1.0, 4001)
    peak = np.max(np.abs(np.cos(k * fine) + B * np.cosh(k * fine)))
    A, B = 1.0 / peak, B / peak
    s = np.linspace(-1.0, 1.0, n_samples)
    s = 0.5 * (s - s[::-1])  # exactly antisymmetric samples
    y = A * np.cos(k * s) + B * np.cosh(k * s)
    return CylinderMode(lam=lam, A=A, B=B, s=s, y=y)


def improvement_ratio(lambda_opt: float) -> float:
    """Frequency of a design relative to the uniform beam of equal volume."""
    if not lambda_opt > 0:
        raise ValueError("lambda_opt must be positive")
    return lambda_opt / cylinder_lambda()


def cylinder_profile(n_samples: int = 2000):
    """The uniform beam as a half-beam :class:`~javelin.model.BeamProfile`.

    ``s`` is measured from the tip (``s = 1`` is the middle), so the mode
    is evaluated at ``s - 1``.
    """
    from .model import BeamProfile

    mode = cylinder_mode(3)
    s = np.linspace(0.0, 1.0, n_samples + 1)[1:]
    x = s - 1.0
    y = mode.derivative(x, 0)
    phi = mode.derivative(x, 2)
    a = np.ones_like(s)
    return BeamProfile(s=s, a=a, b=s.copy(), phi=phi, y=y, lam=mode.lam, meta={"kind": "cylinder"})
