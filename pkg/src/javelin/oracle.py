"""Direct finite-difference eigensolver for the free-free beam.

Discretizes ``(a^2 y_ss)_ss = lambda^2 a y`` on the whole beam ``[0, 2]``
with the weak form

    y^T K y = sum_i a_i^2 h (D2 y)_i^2,      y^T M y = sum_i w_i a_i y_i^2,

where ``D2`` are central second differences at interior nodes and ``w`` are
trapezoid weights. Leaving the end nodes unconstrained yields the free-end
conditions naturally; ``K`` annihilates constants and linear functions, the
two rigid-body modes. Tips may be cut off (the beam then spans
``[c, 2 - c]`` with free ends at the cut).

Roundoff limits the computed eigenvalues to an absolute accuracy of about
``eps * ||M^-1/2 K M^-1/2||``, which on fine grids exceeds any sensible
rigid-mode threshold. The elastic spectrum is therefore taken from
``C C^T`` with ``K = B^T B`` and ``C = B M^-1/2``: it is symmetric positive
definite, pentadiagonal, and has exactly the nonzero generalized eigenvalues.
The rigid eigenvalues are the Rayleigh quotients of the analytic translation
and rotation vectors.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.linalg import eig_banded, solve_banded

log = logging.getLogger(__name__)

RIGID_THRESHOLD = 1e-6
MIN_POINTS = 50


class OracleError(ArithmeticError):
    pass


class RigidModeError(OracleError):
    """The discretization does not show exactly two rigid-body modes."""

    def __init__(self, message, count):
        super().__init__(message)
        self.count = count


class VolumeDriftError(OracleError):
    pass


TIP_MODES = ("auto", "truncate", "floor")
# "auto" floors a tip whose area at the cut is at least this fraction of the middle
AUTO_FLOOR_RATIO = 0.1


@dataclass(frozen=True)
class DiscreteBeam:
    """Area samples on a uniform grid of ``[0, 2]`` or a centred part of it.

    Parameters
    ----------
    grid : ndarray
        ``n`` uniformly spaced points from ``x0`` to ``2 - x0`` (``x0 >= 0``);
        ``x0 > 0`` means the tips were cut off and the new ends are free.
    a_values : ndarray
        Cross-sectional area at the grid points.
    a_min : float
        Smallest admissible area; every ``a_values`` entry is at least this.
    """

    grid: np.ndarray
    a_values: np.ndarray
    a_min: float

    def __post_init__(self):
        n = self.grid.size
        if n < MIN_POINTS:
            raise ValueError(f"need at least {MIN_POINTS} grid points, got {n}")
        if self.a_values.shape != self.grid.shape:
            raise ValueError("a_values must match the grid")
        if not self.a_min > 0:
            raise ValueError("a_min must be positive")
        if np.any(self.a_values < self.a_min):
            raise ValueError("a_values fall below a_min")
        h = np.diff(self.grid)
        if (self.grid[0] < 0 or abs(self.grid[0] + self.grid[-1] - 2.0) > 1e-12
                or np.ptp(h) > 1e-12 * max(1.0, 1.0 / h[0]) or not h[0] > 0):
            raise ValueError("grid must be uniform and centred on x = 1 within [0, 2]")

    @property
    def n(self) -> int:
        return self.grid.size

    @property
    def h(self) -> float:
        return (self.grid[-1] - self.grid[0]) / (self.n - 1)

    def weights(self) -> np.ndarray:
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def volume(self) -> float:
        """Trapezoid volume over the grid (2 for the unit-volume half-beam)."""
        return float(self.weights() @ self.a_values)

    def with_area(self, a_values) -> "DiscreteBeam":
        a_values = np.asarray(a_values, dtype=float)
        return DiscreteBeam(self.grid, a_values, min(self.a_min, float(a_values.min())))

    @classmethod
    def uniform(cls, n: int, area: float = 1.0) -> "DiscreteBeam":
        grid = np.linspace(0.0, 2.0, n)
        return cls(grid, np.full(n, float(area)), float(area))

    @classmethod
    def from_function(cls, half_area, n: int, tip_cut: float = 0.02,
                      tip_mode: str = "auto") -> "DiscreteBeam":
        """Mirror ``half_area(s)``, ``s`` being the distance from the nearer tip.

        ``tip_mode="truncate"`` removes ``s < tip_cut`` (free ends at the cut);
        ``"floor"`` keeps the whole beam with ``a`` held at ``a(tip_cut)``
        there. A floored power-law tip is a thin uniform stub whose own
        cantilever frequency does not shrink with ``tip_cut``, so it carries
        spurious low modes; truncation does not. Truncating a beam with a
        thick tip, on the other hand, just shortens it. ``"auto"`` floors
        when ``a(tip_cut)`` is at least ``AUTO_FLOOR_RATIO`` times ``a(1)``
        and truncates otherwise.
        """
        if not 0 < tip_cut < 1:
            raise ValueError("tip_cut must lie in (0, 1)")
        if tip_mode not in TIP_MODES:
            raise ValueError(f"tip_mode must be one of {TIP_MODES}")
        if tip_mode == "auto":
            ends = np.asarray(half_area(np.array([tip_cut, 1.0])), dtype=float)
            tip_mode = "floor" if ends[0] >= AUTO_FLOOR_RATIO * ends[1] else "truncate"
        x0 = tip_cut if tip_mode == "truncate" else 0.0
        grid = np.linspace(x0, 2.0 - x0, n)
        s = np.minimum(grid - 0.0, 2.0 - grid)
        a_min = float(np.asarray(half_area(np.array([tip_cut])))[0])
        if not a_min > 0:
            raise ValueError("area at the tip cut must be positive")
        a = np.asarray(half_area(np.maximum(s, tip_cut)), dtype=float)
        a = np.maximum(a, a_min)
        return cls(grid, a, a_min)

    @classmethod
    def from_profile(cls, profile, n: int, tip_cut: float = 0.02,
                     tip_mode: str = "auto") -> "DiscreteBeam":
        """Interpolate a half-beam profile onto the grid (see :meth:`from_function`)."""
        return cls.from_function(profile_area(profile), n, tip_cut, tip_mode)


def profile_area(profile):
    """``s -> a(s)`` from samples, via a cubic spline in ``(log s, log a)``.

    Power-law tips interpolate almost exactly in log-log coordinates;
    outside the sampled range the spline extrapolates the end slopes.
    """
    s = np.asarray(profile.s, dtype=float)
    a = np.asarray(profile.a, dtype=float)
    if np.all(a == a[0]):
        return lambda x: np.full(np.shape(x), a[0])
    spline = CubicSpline(np.log(s), np.log(a))

    def area(x):
        return np.exp(spline(np.log(np.asarray(x, dtype=float))))

    return area


def _difference_operator(n: int):
    ones = np.ones(n - 2)
    return sparse.diags([ones, -2.0 * ones, ones], [0, 1, 2], shape=(n - 2, n), format="csr")


def _factor(beam: DiscreteBeam):
    """``B`` with ``K = B^T B`` and the diagonal of ``M``."""
    h = beam.h
    c = beam.a_values[1:-1] ** 2 / h**3
    B = sparse.diags(np.sqrt(c)) @ _difference_operator(beam.n)
    m = beam.a_values * beam.weights()
    return B.tocsr(), m


def assemble(beam: DiscreteBeam):
    """Stiffness and mass matrices (sparse) of the generalized problem."""
    B, m = _factor(beam)
    K = (B.T @ B).tocsr()
    return K, sparse.diags(m, format="csr")


@dataclass
class SpectralResult:
    """Lowest generalized eigenvalues ``lambda^2`` (ascending) and vectors.

    ``eigenvectors[:, j]`` is M-normalized. ``rigid_modes`` counts the values
    below ``RIGID_THRESHOLD`` times :func:`rigid_scale`.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)
    rigid_modes: int
    grid: np.ndarray = field(repr=False)

    @property
    def fundamental_index(self) -> int:
        return self.rigid_modes

    @property
    def lam(self) -> float:
        return math.sqrt(self.eigenvalues[self.fundamental_index])

    def mode(self, j: int | None = None) -> np.ndarray:
        return self.eigenvectors[:, self.fundamental_index if j is None else j]

    def asymmetry(self, j: int | None = None) -> float:
        """``||v - reverse(v)|| / ||v||``: zero for a mode even about the middle."""
        v = self.mode(j)
        return float(np.linalg.norm(v - v[::-1]) / np.linalg.norm(v))


def _inverse_iteration(lower_band, shift, iterations=3):
    """Eigenvector of the banded SPD matrix for an (accurate) eigenvalue."""
    kd, nb = lower_band.shape[0] - 1, lower_band.shape[1]
    full = np.zeros((2 * kd + 1, nb))  # solve_banded layout
    for d in range(kd + 1):
        full[kd + d, : nb - d] = lower_band[d, : nb - d]
        full[kd - d, d:] = lower_band[d, : nb - d]
    full[kd] -= shift
    x = np.random.default_rng(0).standard_normal(nb)
    for _ in range(iterations):
        x = solve_banded((kd, kd), full, x, check_finite=False)
        x /= np.linalg.norm(x)
    return x


def _rayleigh(B, m, vec) -> float:
    return float(np.sum((B @ vec) ** 2) / (vec @ (m * vec)))


def spectrum(beam: DiscreteBeam, k: int = 4) -> SpectralResult:
    """The ``k`` lowest eigenpairs, rigid modes included."""
    if k < 3:
        raise ValueError("k must be at least 3")
    B, m = _factor(beam)
    r = 1.0 / np.sqrt(m)
    C = (B @ sparse.diags(r)).tocsr()
    G = (C @ C.T).todia()
    nb = G.shape[0]
    band = np.zeros((3, nb))
    for d in range(3):
        band[d, : nb - d] = G.diagonal(-d)
    n_el = k - 2
    ev = eig_banded(band, lower=True, select="i", select_range=(0, n_el - 1),
                    eigvals_only=True)
    w = np.column_stack([_inverse_iteration(band, lam2) for lam2 in ev])
    if np.any(ev <= 0):
        log.debug("non-positive elastic eigenvalue %s", ev.min())
    u = C.T @ w  # unit eigenvectors of the symmetrized problem, times sqrt(ev)
    u /= np.linalg.norm(u, axis=0)
    elastic_vecs = u * r[:, None]
    # G's eigenvalues are only good to ~eps*||G||; the Rayleigh quotient
    # through B (the square root of K) is accurate to ~eps*||B||^2 / lambda^2
    # times the (squared, hence tiny) eigenvector error.
    ev = np.array([_rayleigh(B, m, elastic_vecs[:, j]) for j in range(n_el)])

    x = beam.grid - 1.0
    rigid = []
    for vec in (np.ones(beam.n), x):
        mv = m * vec
        for prev in rigid:
            vec = vec - (prev @ mv) / (prev @ (m * prev)) * prev
            mv = m * vec
        rigid.append(vec)
    rigid_vals, rigid_vecs = [], []
    for vec in rigid:
        vec = vec / math.sqrt(vec @ (m * vec))
        rigid_vals.append(_rayleigh(B, m, vec))
        rigid_vecs.append(vec)

    vals = np.concatenate([rigid_vals, ev])
    vecs = np.column_stack(rigid_vecs + [elastic_vecs])
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    count = int(np.sum(vals < RIGID_THRESHOLD * rigid_scale(beam)))
    return SpectralResult(vals, vecs, count, beam.grid)


def rigid_scale(beam: DiscreteBeam) -> float:
    """``lambda^2`` of the uniform beam with the same length and mean area.

    ``lambda^2`` scales like area over length^4, so this is the natural
    magnitude of an elastic eigenvalue of ``beam``.
    """
    from .cylinder import cylinder_lambda

    length = beam.grid[-1] - beam.grid[0]
    mean_area = beam.volume() / length
    return cylinder_lambda() ** 2 * mean_area * (2.0 / length) ** 4


def lowest_frequency(beam: DiscreteBeam, result: bool = False):
    """Square root of the lowest eigenvalue above the rigid-mode threshold.

    Raises :class:`RigidModeError` unless exactly two rigid modes are found.
    """
    spec = spectrum(beam)
    if spec.rigid_modes != 2:
        raise RigidModeError(
            f"expected 2 rigid modes, found {spec.rigid_modes}", spec.rigid_modes)
    return spec if result else spec.lam


# ----------------------------------------------------------------------------
# stationarity


def volume_preserving_bump(beam: DiscreteBeam, radius: float = 0.5,
                           outer: float = 0.9) -> np.ndarray:
    """Smooth, even, zero-volume perturbation vanishing near the tips.

    A narrow bump ``(1 - v^2)^2`` of half-width ``radius`` about the middle,
    minus the multiple of a wide one (half-width ``outer``) that cancels its
    discrete volume; scaled to unit maximum magnitude.
    """
    if not 0 < radius < outer < 1:
        raise ValueError("need 0 < radius < outer < 1")
    x = beam.grid - 1.0

    def bump(r):
        v = x / r
        return np.where(np.abs(v) < 1, (1 - v**2) ** 2, 0.0)

    inner, wide = bump(radius), bump(outer)
    w = beam.weights()
    g = inner - (w @ inner) / (w @ wide) * wide
    return g / np.max(np.abs(g))


def stationarity_probe(beam: DiscreteBeam, perturbation, eps_list, drift_tol: float = 1e-10):
    """``lambda(a + eps * perturbation)`` for each ``eps``.

    Raises :class:`VolumeDriftError` when the perturbation changes the
    discrete volume by more than ``drift_tol``.
    """
    perturbation = np.asarray(perturbation, dtype=float)
    w = beam.weights()
    base = beam.volume()
    out = []
    for eps in eps_list:
        if eps == 0:
            out.append(lowest_frequency(beam))
            continue
        a = beam.a_values + eps * perturbation
        if np.any(a <= 0):
            raise OracleError(f"perturbed area not positive at eps={eps!r}")
        drift = abs(float(w @ a) - base)
        if drift > drift_tol:
            raise VolumeDriftError(f"volume drift {drift:.3e} at eps={eps!r}")
        out.append(lowest_frequency(beam.with_area(a)))
    return out


def response_exponent(eps_list, lams, lam0) -> float:
    """Least-squares slope of ``log |lambda(eps) - lambda0|`` against ``log eps``."""
    eps = np.abs(np.asarray(eps_list, dtype=float))
    d = np.abs(np.asarray(lams, dtype=float) - lam0)
    keep = (eps > 0) & (d > 0)
    if keep.sum() < 2:
        raise OracleError("need two nonzero responses to fit an exponent")
    return float(np.polyfit(np.log(eps[keep]), np.log(d[keep]), 1)[0])
