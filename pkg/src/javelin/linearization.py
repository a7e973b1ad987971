"""Eigenstructure of the autonomous system linearized about the fixed point.

A perturbation ``(da, db, dPhi, dz) * exp(q t)`` of the state ``(1, 1, 1, 1)``
solves the linear system iff ``M(q) @ direction = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class LinearizationError(ValueError):
    pass


def char_matrix(q: float) -> np.ndarray:
    """The 4x4 matrix ``M(q)`` acting on ``(da, db, dPhi, dz)``."""
    return np.array(
        [
            [-12.0, 0.0, 6.0, -(2 + q) * (3 + q)],
            [-12.0, 0.0, (q - 4) * (q - 3), -12.0],
            [-3 * (4 + q), 0.0, 2 * (4 + q), -2 * (4 + q)],
            [-5.0, 5 - q, 0.0, 0.0],
        ]
    )


# det M(q) = 3 q (q - 5)(q - 1)(q + 4)(q^2 - q - 34), expanded by cofactors
# along the beta column (single entry 5 - q).
CHAR_POLY = (3.0, -9.0, -153.0, 321.0, 1878.0, -2040.0, 0.0)


def char_det(q: float) -> float:
    """``det M(q)`` from the expanded degree-6 polynomial."""
    return float(np.polyval(CHAR_POLY, q))


EXACT_EIGENVALUES = (-4.0, 0.0, 1.0, 5.0)


def _quadratic_pair() -> tuple[float, float]:
    # q^2 - q - 34 = 0
    r = math.sqrt(1.0 + 4 * 34.0)
    return (1.0 - r) / 2.0, (1.0 + r) / 2.0


def eigenvalues() -> list[float]:
    """The six growth exponents, ascending."""
    qs = sorted(list(EXACT_EIGENVALUES) + list(_quadratic_pair()))
    if len(qs) != 6:
        raise LinearizationError(f"expected 6 eigenvalues, got {len(qs)}")
    return qs


@dataclass(frozen=True)
class EigenPair:
    q: float
    direction: np.ndarray

    def residual(self) -> float:
        return float(np.linalg.norm(char_matrix(self.q) @ self.direction))


def _phi_normalization(q: float) -> float:
    """dPhi component used to normalize the direction for exponent ``q``."""
    if abs(q - 1.0) < 1e-9:
        return 4.0
    if abs(q + 4.0) < 1e-9:
        return -27.0
    return 1.0


def _exact_null(q: int, phi: Fraction) -> np.ndarray | None:
    """Rational null vector for an integer exponent (``None`` if rows 1-3 are degenerate)."""
    m = [[Fraction(int(round(v))) for v in row] for row in char_matrix(float(q))]
    rows = m[:3]
    for i in range(3):
        for j in range(i + 1, 3):
            a11, a12 = rows[i][0], rows[i][3]
            a21, a22 = rows[j][0], rows[j][3]
            det = a11 * a22 - a12 * a21
            if det == 0:
                continue
            b1, b2 = -rows[i][2] * phi, -rows[j][2] * phi
            da = (b1 * a22 - a12 * b2) / det
            dz = (a11 * b2 - b1 * a21) / det
            v = [da, 5 * da / (5 - q), phi, dz]
            if all(sum(r[k] * v[k] for k in range(4)) == 0 for r in m):
                return np.array([float(x) for x in v])
            return None
    return None


def null_direction(q: float, phi: float | None = None, tol: float = 1e-9) -> np.ndarray:
    """Null vector of ``M(q)``; exact (rational) for integer ``q``.

    The beta column has a single entry (row 4), so rows 1-3 determine
    ``(da, dz)`` once ``dPhi`` is fixed; beta follows from
    ``(5 - q) db = 5 da``. ``q = 5`` is the pure beta mode ``(0, 1, 0, 0)``.
    ``dPhi`` defaults to the conventional scale (-27 for ``q = -4``, 4 for
    ``q = 1``, 1 otherwise).
    """
    m = char_matrix(q)
    exact = None
    if abs(q - 5.0) < 1e-12:
        exact = np.array([0.0, 1.0, 0.0, 0.0])
    elif float(q).is_integer():
        scale = _phi_normalization(q) if phi is None else phi
        exact = _exact_null(int(q), Fraction(scale))
    if exact is not None:
        v = exact
    else:
        if phi is None:
            phi = _phi_normalization(q)
        # rows 1-3 in the unknowns (da, dz), dPhi moved to the right side
        sub = m[:3][:, [0, 3]]
        rhs = -m[:3, 2] * phi
        sol, *_ = np.linalg.lstsq(sub, rhs, rcond=None)
        da, dz = sol
        v = np.array([da, 5.0 * da / (5.0 - q), phi, dz])
    v[np.abs(v) < 1e-13 * np.max(np.abs(v))] = 0.0  # roundoff-level components
    res = np.linalg.norm(m @ v) / max(1.0, np.linalg.norm(v))
    if res > tol:
        raise LinearizationError(f"M({q}) is not singular (residual {res:.3e})")
    return v


def eigenpairs() -> list[EigenPair]:
    return [EigenPair(q, null_direction(q)) for q in eigenvalues()]


def stable_directions() -> tuple[EigenPair, EigenPair]:
    """Stable pairs ``(S3, S6)``: exponent -4 first, then ``(1 - sqrt 137)/2``."""
    stable = [p for p in eigenpairs() if p.q < 0]
    stable.sort(key=lambda p: -p.q)
    s3, s6 = stable
    return s3, s6
