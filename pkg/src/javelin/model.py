"""Nondimensional beam model, tip similarity solution and profile container.

Lengths are measured in units of the half-length ``L/2``, areas in ``V/L``
and deflections in ``sqrt(2V/L)``, so the half-beam occupies ``0 < s <= 1``
and carries unit volume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

#: lambda**2 / a0 on the physical similarity branch.
GAMMA = 72.0


class ModelError(ValueError):
    """Raised for invalid model inputs."""


@dataclass(frozen=True)
class DimensionalBeam:
    """Physical beam parameters (SI units).

    Attributes
    ----------
    rho : float
        Mass density [kg/m^3].
    E : float
        Young's modulus [Pa].
    c : float
        Cross-section shape constant; bending stiffness is ``c * E * a**2``.
    V : float
        Total volume [m^3].
    L : float
        Total length [m].
    """

    rho: float
    E: float
    c: float
    V: float
    L: float

    def __post_init__(self):
        for name in ("rho", "E", "c", "V", "L"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ModelError(f"{name} must be positive and finite, got {value!r}")

    @property
    def frequency_scale(self) -> float:
        """omega / lambda for this beam [rad/s]."""
        return math.sqrt(16.0 * self.c * self.E * self.V / self.rho) / self.L**2


def to_dimensional_frequency(lam: float, beam: DimensionalBeam) -> float:
    """Angular frequency omega [rad/s] of nondimensional frequency ``lam``."""
    if not lam > 0:
        raise ModelError("lambda must be positive")
    return lam * beam.frequency_scale


def from_dimensional_frequency(omega: float, beam: DimensionalBeam) -> float:
    """Inverse of :func:`to_dimensional_frequency`."""
    if not omega > 0:
        raise ModelError("omega must be positive")
    return omega / beam.frequency_scale


# ----------------------------------------------------------------------------
# tip power-law analysis


def _indicial_lhs(p):
    return p * (p - 1) * (p + 6) * (p + 5)


def _indicial_rhs(p):
    return 2 * p**2 * (p - 1) ** 2


def indicial_residual(p: float) -> float:
    return _indicial_lhs(p) - _indicial_rhs(p)


def indicial_roots() -> list[float]:
    """Real roots of ``p(p-1)(p+6)(p+5) = 2 p^2 (p-1)^2``, ascending.

    The difference of the two sides factors as ``p (p-1) Q(p)`` with
    ``Q(p) = (p+6)(p+5) - 2p(p-1) = -p^2 + 13p + 30``; the quadratic is solved
    in closed form.
    """
    a, b, c = -1.0, 13.0, 30.0
    disc = math.sqrt(b * b - 4 * a * c)
    # numerically stable quadratic formula
    qq = -0.5 * (b + math.copysign(disc, b))
    r1, r2 = qq / a, c / qq
    return sorted([0.0, 1.0, r1, r2])


def similarity_gamma(p: float) -> float:
    return _indicial_lhs(p)


def select_physical_root(roots) -> float:
    """Pick the tip exponent of the deflection.

    ``p = 0`` and ``p = 1`` give ``gamma = 0`` (no real frequency), and
    ``p = 15`` makes the left side of the optimality condition vanish at the
    tip while its right side is strictly positive. Only ``p = -2`` survives.
    """
    for p in roots:
        if abs(p + 2.0) < 1e-9:
            return -2.0
    raise ModelError(f"physical root p = -2 not among {list(roots)}")


@dataclass(frozen=True)
class SimilarityConstants:
    """Coefficients of the tip similarity solution for a given ``lam``."""

    lam: float
    y0: float = 1.0
    p: float = -2.0
    gamma: float = GAMMA

    def __post_init__(self):
        if not self.lam > 0:
            raise ModelError("lambda must be positive")
        if not self.gamma > 0:
            raise ModelError("gamma must be positive")

    @property
    def a0(self) -> float:
        return self.lam**2 / self.gamma

    @property
    def b0(self) -> float:
        return self.a0 / 5.0

    @property
    def phi0(self) -> float:
        return self.p * (self.p - 1) * self.y0 * self.a0**2


class SimilarityValues(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    phi: np.ndarray
    y: np.ndarray


def similarity_eval(s, lam: float, y0: float = 1.0) -> SimilarityValues:
    """Evaluate the similarity solution ``(a, b, phi, y)`` at ``s > 0``."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ModelError("similarity solution requires s > 0")
    if not lam > 0:
        raise ModelError("lambda must be positive")
    lam2 = lam * lam
    s4 = s**4
    return SimilarityValues(
        a=lam2 / 72.0 * s4,
        b=lam2 / 360.0 * s4 * s,
        phi=y0 * lam2 * lam2 / 864.0 * s4,
        y=y0 / (s * s),
    )


# ----------------------------------------------------------------------------
# sampled physical solution


@dataclass
class BeamProfile:
    """Sampled half-beam solution on ``0 < s <= 1``.

    ``y`` carries the ``s**-2`` tip singularity; :attr:`s2y` is the bounded
    combination used for plotting.
    """

    s: np.ndarray
    a: np.ndarray
    b: np.ndarray
    phi: np.ndarray
    y: np.ndarray
    lam: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("s", "a", "b", "phi", "y"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.s.shape
        if any(getattr(self, k).shape != n for k in ("a", "b", "phi", "y")):
            raise ModelError("profile columns must have equal length")

    @property
    def s2y(self) -> np.ndarray:
        return self.s**2 * self.y

    def __len__(self):
        return self.s.size

    def validate(self, b_tol: float | None = None) -> None:
        """Check ordering and positivity; optionally ``|b(1) - 1| <= b_tol``."""
        s = self.s
        if s.size < 2 or np.any(np.diff(s) <= 0):
            raise ModelError("s must be strictly increasing")
        if s[0] <= 0 or s[-1] > 1 + 1e-12:
            raise ModelError("s must lie in (0, 1]")
        if np.any(self.a < 0):
            raise ModelError("a must be nonnegative")
        if np.any(self.a[s > 0] <= 0):
            raise ModelError("a must be positive for s > 0")
        if np.any(np.diff(self.b) < 0):
            raise ModelError("b must be nondecreasing")
        if b_tol is not None and abs(self.b[-1] - 1.0) > b_tol:
            raise ModelError(f"b(1) = {self.b[-1]!r} violates the volume constraint")


def volume_check(profile: BeamProfile) -> float:
    """Approximate ``int_0^1 a ds``.

    Trapezoidal rule over the samples plus the exact similarity integral
    ``lam^2 s_min^5 / 360`` of the unresolved tip.
    """
    s, a = profile.s, profile.a
    tip = profile.lam**2 / 360.0 * s[0] ** 5
    return float(np.trapezoid(a, s) + tip)
