"""Stable-manifold shooting for the optimal taper.

A direction ``v(theta) = sin(theta) S3 + cos(theta) S6`` in the tangent plane
of the stable manifold of the fixed point is integrated backward in
``t = -ln s``. The two midpoint conditions ``a_s = 0`` and ``y_s = 0`` must
hold at the same ``t``; ``theta`` is found by root-finding on the difference
of their first crossing times, and ``beta`` at the match gives ``lambda``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _backend, _fd, dynamics
from .integrator import IntegrationError, RHSFailure, Tolerances, Trajectory, integrate
from .linearization import EigenPair, stable_directions
from .model import BeamProfile, ModelError, similarity_eval, volume_check

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class ShootingError(RuntimeError):
    pass


class NoBracketError(ShootingError):
    pass


class UndefinedMismatch(ShootingError):
    """A shot lacks a crossing of one of the two midpoint conditions."""


@dataclass(frozen=True)
class ShootingConfig:
    epsilon: float = 1e-3
    theta_guess: float = -math.pi / 6
    t_span: float = 10.0
    tol: Tolerances = field(default_factory=Tolerances)
    root_xtol: float = 1e-12
    max_iter: int = 100
    scan_samples: int = 180
    max_norm: float = 1e8
    n_samples: int = 2000
    s_min: float = 1e-4
    y0: float = 1.0
    refine_epsilon: float | None = 1e-7
    refine_tol: Tolerances = field(default_factory=lambda: Tolerances(rel=1e-12, abs=1e-14))

    def __post_init__(self):
        if not 0 < self.epsilon < 0.1:
            raise ValueError("epsilon must be positive and small")
        if not self.t_span > 0:
            raise ValueError("t_span must be positive")
        if self.scan_samples < 8:
            raise ValueError("scan_samples must be at least 8")
        if not 0 < self.s_min < 1:
            raise ValueError("s_min must lie in (0, 1)")
        if self.refine_epsilon is not None and not 0 < self.refine_epsilon < 0.1:
            raise ValueError("refine_epsilon must be positive and small")


@dataclass
class ShotOutcome:
    """Crossing times (relative to the start, so negative) of one shot.

    ``status`` is the integrator outcome (``completed``, ``blowup``,
    ``singular`` or ``underflow``); ``diverged`` means the shot ended that way
    before both midpoint conditions were met.
    """

    theta: float
    dt_g1: list
    dt_g2: list
    diverged: bool
    status: str = "completed"
    trajectory: Trajectory | None = field(default=None, repr=False)

    @property
    def first_g1(self) -> float | None:
        return self.dt_g1[0] if self.dt_g1 else None

    @property
    def first_g2(self) -> float | None:
        return self.dt_g2[0] if self.dt_g2 else None


@dataclass
class SolveResult:
    theta_star: float
    delta_t: float
    lam: float
    profile: BeamProfile
    trajectory: Trajectory = field(repr=False)
    t_match: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def theta_star_signed(self) -> float:
        """``theta_star`` mapped to ``(-pi, pi]``."""
        th = self.theta_star
        return th - TWO_PI if th > math.pi else th


# ----------------------------------------------------------------------------
# initial data


def _directions(pairs=None) -> tuple[EigenPair, EigenPair]:
    return pairs if pairs is not None else stable_directions()


def tangent_offset(theta: float, epsilon: float, pairs=None) -> np.ndarray:
    """Six-component offset from the fixed point for direction ``theta``.

    Each stable mode contributes its own ``q * component`` to the derivative
    seeds of ``Phi`` and ``zeta``.
    """
    s3, s6 = _directions(pairs)
    c3, c6 = math.sin(theta), math.cos(theta)
    v = c3 * s3.direction + c6 * s6.direction
    dv = c3 * s3.q * s3.direction + c6 * s6.q * s6.direction
    return epsilon * np.array([v[0], v[1], v[2], dv[2], v[3], dv[3]])


def initial_state(theta: float, epsilon: float, pairs=None) -> np.ndarray:
    return dynamics.FIXED_POINT + tangent_offset(theta, epsilon, pairs)


def linear_continuation(theta: float, epsilon: float, pairs=None):
    """State ``x(tau)`` for ``tau >= 0`` past the start, on the tangent plane.

    ``tau = 0`` reproduces :func:`initial_state`; the deviation decays like
    ``exp(q tau)`` in each stable mode.
    """
    s3, s6 = _directions(pairs)
    c3, c6 = epsilon * math.sin(theta), epsilon * math.cos(theta)

    def state(tau):
        tau = np.asarray(tau, dtype=float)
        e3 = c3 * np.exp(s3.q * tau)
        e6 = c6 * np.exp(s6.q * tau)
        out = np.empty(tau.shape + (6,))
        for k, comp in ((0, 0), (1, 1), (2, 2), (4, 3)):
            out[..., k] = 1.0 + e3 * s3.direction[comp] + e6 * s6.direction[comp]
        out[..., 3] = s3.q * e3 * s3.direction[2] + s6.q * e6 * s6.direction[2]
        out[..., 5] = s3.q * e3 * s3.direction[3] + s6.q * e6 * s6.direction[3]
        return out

    return state


# ----------------------------------------------------------------------------
# shots


def _integrate_shot(theta, config, pairs=None):
    x0 = initial_state(theta, config.epsilon, pairs)
    events = (dynamics.g_area, dynamics.g_slope)
    try:
        traj, found = integrate(
            dynamics.system_rhs,
            x0,
            0.0,
            -config.t_span,
            events=events,
            tol=config.tol,
            max_norm=config.max_norm,
            stepper=_backend.integrate_as,
        )
        status = traj.status
    except IntegrationError as exc:
        # the solution runs into alpha -> 0 or Phi -> 0: an exploding shot
        traj, found = exc.trajectory, exc.events
        traj.status = status = "singular" if isinstance(exc, RHSFailure) else "underflow"
        log.debug("theta=%.6f: %s", theta, exc)
    return traj, found, status


def shoot(theta: float, config: ShootingConfig = ShootingConfig(), pairs=None,
          keep_trajectory: bool = False) -> ShotOutcome:
    """Integrate one direction backward and collect the midpoint crossings.

    A shot that blows up or runs into a singular state before meeting both
    midpoint conditions is flagged ``diverged``. (Past the match the solution
    describes no beam and usually explodes too; ``status`` records that.)
    Crossings found before the end of the integration are kept.
    """
    traj, found, status = _integrate_shot(theta, config, pairs)
    dt1 = [e.t for e in found if e.event == 0]
    dt2 = [e.t for e in found if e.event == 1]
    return ShotOutcome(
        theta=float(theta),
        dt_g1=dt1,
        dt_g2=dt2,
        diverged=status != "completed" and not (dt1 and dt2),
        status=status,
        trajectory=traj if keep_trajectory else None,
    )


def mismatch(theta: float, config: ShootingConfig = ShootingConfig(), pairs=None) -> float:
    """First ``a_s = 0`` crossing time minus first ``y_s = 0`` crossing time.

    "First" is the crossing met first while integrating backward. Raises
    :class:`UndefinedMismatch` when either crossing is missing.
    """
    out = shoot(theta, config, pairs)
    if out.first_g1 is None or out.first_g2 is None:
        raise UndefinedMismatch(f"theta={theta!r}: missing crossing ({out.status})")
    return out.first_g1 - out.first_g2


def _mismatch_or_nan(theta, config, pairs=None):
    try:
        return mismatch(theta, config, pairs)
    except UndefinedMismatch:
        return math.nan


def sweep(theta_samples, config: ShootingConfig = ShootingConfig(), workers: int = 1):
    """One :class:`ShotOutcome` per sampled direction."""
    thetas = [float(t) for t in theta_samples]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(shoot, thetas, [config] * len(thetas)))
    return [shoot(t, config) for t in thetas]


# ----------------------------------------------------------------------------
# root finding


def _circ_dist(a, b):
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


def find_brackets(config: ShootingConfig, pairs=None):
    """Sign changes of the mismatch on a uniform ``theta`` scan.

    Returns ``[(lo, hi, f_lo, f_hi), ...]`` sorted by distance from the guess;
    ``hi`` may exceed ``2 pi`` when the bracket wraps around.
    """
    n = config.scan_samples
    grid = np.linspace(0.0, TWO_PI, n, endpoint=False)
    vals = [_mismatch_or_nan(t, config, pairs) for t in grid]
    brackets = []
    for i in range(n):
        j = (i + 1) % n
        fa, fb = vals[i], vals[j]
        if math.isnan(fa) or math.isnan(fb):
            continue
        if fa == 0.0:
            brackets.append((grid[i], grid[i], fa, fa))
        elif fa * fb < 0:
            hi = grid[j] if j > i else grid[j] + TWO_PI
            brackets.append((grid[i], hi, fa, fb))
    guess = config.theta_guess % TWO_PI
    brackets.sort(key=lambda b: _circ_dist(0.5 * (b[0] + b[1]), guess))
    return brackets


def bracketed_root(f, lo, hi, f_lo, f_hi, xtol=1e-12, max_iter=100):
    """Safeguarded secant iteration on a sign-change bracket.

    Falls back to bisection when the secant point leaves the inner part of
    the bracket, when progress stalls, or when ``f`` is undefined (``nan``)
    at the trial point.
    """
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0:
        raise NoBracketError("no sign change in bracket")
    width_prev = abs(hi - lo)
    for _ in range(max_iter):
        width = hi - lo
        if abs(width) <= xtol:
            return 0.5 * (lo + hi)
        x = hi - f_hi * (hi - lo) / (f_hi - f_lo)
        inner = lo + 0.05 * width, hi - 0.05 * width
        if not (min(inner) <= x <= max(inner)) or abs(width) > 0.5 * width_prev:
            x = 0.5 * (lo + hi)
        width_prev = abs(width)
        fx = f(x)
        if math.isnan(fx):
            x = 0.5 * (lo + hi)
            fx = f(x)
            if math.isnan(fx):
                raise ShootingError(f"mismatch undefined inside bracket at theta={x!r}")
        if fx == 0.0:
            return x
        if fx * f_lo < 0:
            hi, f_hi = x, fx
        else:
            lo, f_lo = x, fx
    raise ShootingError(f"root iteration exceeded {max_iter} iterations")


def find_theta(config: ShootingConfig = ShootingConfig(), pairs=None, match_tol=1e-8) -> float:
    """Direction whose two midpoint conditions hold at the same ``t``.

    Brackets are tried in order of distance from ``theta_guess``; a bracket
    that straddles a jump in the first-crossing time (not a continuous root)
    is discarded.
    """
    def f(th):
        return _mismatch_or_nan(th, config, pairs)

    brackets = find_brackets(config, pairs)
    if not brackets:
        raise NoBracketError("mismatch has no sign change on the theta scan")
    for lo, hi, f_lo, f_hi in brackets:
        root = bracketed_root(f, lo, hi, f_lo, f_hi, config.root_xtol, config.max_iter)
        val = f(root)
        if not math.isnan(val) and abs(val) < match_tol:
            return root % TWO_PI
        log.info("rejecting discontinuous bracket [%.4f, %.4f]", lo, hi)
    raise NoBracketError("no continuous root of the mismatch found")


# ----------------------------------------------------------------------------
# physical reconstruction


def reconstruct(
    trajectory: Trajectory,
    lam: float,
    y0: float = 1.0,
    t_match: float | None = None,
    n_samples: int = 2000,
    s_min: float = 1e-4,
    tail=None,
) -> BeamProfile:
    """Map the peeled trajectory back to ``(s, a, b, phi, y)``.

    The trajectory is shifted so ``t_match`` sits at ``s = 1``. Beyond the
    integrated range (toward the tip) the state comes from ``tail(tau)``,
    ``tau`` measured past the start of the integration; the default tail is
    the fixed point, i.e. the bare similarity solution.
    """
    if t_match is None:
        t_match = trajectory.t_last if trajectory.direction < 0 else trajectory.t0
    lo, hi = sorted((trajectory.t0, trajectory.t_last))
    if not lo - 1e-12 <= t_match <= hi + 1e-12:
        raise ShootingError("matching time lies outside the trajectory")
    t_start = trajectory.t0
    span = t_start - t_match  # extent of the integrated part in shifted time
    if span < 0:
        raise ShootingError("trajectory must run backward from its start to the match")

    tau = np.linspace(-math.log(s_min), 0.0, n_samples)  # ascending s
    states = np.empty((n_samples, 6))
    inside = tau <= span
    if np.any(inside):
        states[inside] = trajectory(t_match + tau[inside])
    if np.any(~inside):
        if tail is None:
            states[~inside] = dynamics.FIXED_POINT
        else:
            states[~inside] = tail(tau[~inside] - span)

    s = np.exp(-tau)
    s[-1] = 1.0
    sim = similarity_eval(s, lam, y0)
    al, be, P, z = states[:, 0], states[:, 1], states[:, 2], states[:, 4]
    return BeamProfile(s=s, a=sim.a * al, b=sim.b * be, phi=sim.phi * P, y=sim.y * z, lam=lam,
                       meta={"y0": y0})


def _trapz_tip(values, s, tip_value):
    return float(np.trapezoid(values, s) + tip_value)


def optimality_lhs(profile: BeamProfile) -> np.ndarray:
    """``2 a y_ss^2 - lambda^2 y^2`` with ``y_ss = phi / a^2``."""
    return 2.0 * profile.phi**2 / profile.a**3 - profile.lam**2 * profile.y**2


def optimality_constant(profile: BeamProfile, multiplier: float) -> float:
    """``2 mu lambda int_0^1 a y^2 ds`` for Lagrange multiplier ``mu``."""
    s = profile.s
    ay2 = profile.a * profile.y**2
    # a y^2 tends to a constant at the tip (a ~ s^4, y ~ s^-2)
    integral = _trapz_tip(ay2, s, ay2[0] * s[0])
    return 2.0 * multiplier * profile.lam * integral


def optimality_residual(profile: BeamProfile, multiplier: float | None = None,
                        tip_exclude: float = 0.02) -> float:
    """Relative deviation of ``2 a y_ss^2 - lambda^2 y^2`` from its constant.

    The constant is ``2 mu lambda int_0^1 a y^2 ds`` with volume multiplier
    ``mu``; ``None`` means ``mu = lambda``. Note that multiplying the
    condition by ``a``, integrating, and using ``int a = 1`` together with
    ``int a^2 y_ss^2 = lambda^2 int a y^2`` forces ``mu = lambda / 2``
    (see :func:`consistent_multiplier`); with ``mu = lambda`` the residual
    of an exact optimum is 1/2. Samples with ``s < tip_exclude`` are skipped.
    """
    mu = profile.lam if multiplier is None else multiplier
    c = optimality_constant(profile, mu)
    keep = profile.s >= tip_exclude
    lhs = optimality_lhs(profile)[keep]
    return float(np.max(np.abs(lhs - c)) / abs(c))


def consistent_multiplier(lam: float) -> float:
    """Volume multiplier compatible with the integrated optimality condition."""
    return 0.5 * lam


def physical_residual(profile: BeamProfile, s_lo: float = 0.05, width: int = 7) -> float:
    """Finite-difference residual of ``(a^2 y_ss)_ss - lambda^2 a y``.

    Both second derivatives use ``width``-point stencils on the (nonuniform)
    sample grid. Scaled by ``lambda^2 max(a y)`` and maximized over
    ``s >= s_lo``.
    """
    s, a, y = profile.s, profile.a, profile.y
    lam2 = profile.lam**2
    moment = a**2 * _fd.derivative(y, s, 2, width)
    res = _fd.derivative(moment, s, 2, width) - lam2 * a * y
    keep = s >= s_lo
    scale = lam2 * np.max(np.abs(a * y)[keep])
    return float(np.max(np.abs(res[keep])) / scale)


def as_residual_max(trajectory: Trajectory, t_lo: float, t_hi: float, per_step: int = 4) -> float:
    """Max residual of the governing equations along the dense interpolant.

    The derivative is that of the interpolant itself, not the right-hand side.
    """
    ts = trajectory.ts
    lo, hi = min(t_lo, t_hi), max(t_lo, t_hi)
    mesh = ts[(ts >= lo) & (ts <= hi)]
    pts = [mesh]
    for k in range(1, per_step):
        frac = k / per_step
        pts.append(mesh[:-1] + frac * np.diff(mesh))
    t = np.concatenate(pts + [np.array([lo, hi])])
    x = trajectory(t)
    d = trajectory.derivative(t)
    r = dynamics.residual(x.T, d.T)
    return float(np.max(np.abs(r)))


# ----------------------------------------------------------------------------
# driver


def _matched_shot(theta, config, pairs=None):
    """Integrate the matched direction; return ``(traj, t_match, lam, extras)``."""
    traj, found, status = _integrate_shot(theta, config, pairs)
    g1 = [e for e in found if e.event == 0]
    g2 = [e for e in found if e.event == 1]
    if not g1 or not g2:
        raise ShootingError("matched shot lost a crossing")
    t_match = 0.5 * (g1[0].t + g2[0].t)
    x_match = traj(t_match)
    beta = x_match[1]
    if not beta > 0:
        raise ShootingError(f"beta at the match is not positive ({beta!r})")
    lam = math.sqrt(360.0 / beta)
    d_match = dynamics.rhs_array(x_match)
    extras = {
        "mismatch": g1[0].t - g2[0].t,
        "g1_at_match": float(d_match[0] - 4 * x_match[0]),
        "g2_at_match": float(x_match[5] + 2 * x_match[4]),
    }
    return traj, t_match, lam, extras


def transport_direction(theta: float, epsilon: float, epsilon_new: float, pairs=None):
    """Carry a start point along the linear flow to a smaller offset.

    Returns ``(theta_new, tau)``: the direction whose offset of size
    ``epsilon_new`` lies on the same linearized orbit, ``tau`` later.
    """
    from scipy.optimize import brentq

    s3, s6 = _directions(pairs)
    c3, c6 = epsilon * math.sin(theta), epsilon * math.cos(theta)

    def size(tau):
        return math.log(math.hypot(c3 * math.exp(s3.q * tau), c6 * math.exp(s6.q * tau))) \
            - math.log(epsilon_new)

    if epsilon_new >= epsilon:
        raise ValueError("epsilon_new must be smaller than epsilon")
    hi = math.log(epsilon / epsilon_new) / abs(s3.q) + 1.0
    tau = brentq(size, 0.0, hi, xtol=1e-14)
    theta_new = math.atan2(c3 * math.exp(s3.q * tau), c6 * math.exp(s6.q * tau))
    return theta_new % TWO_PI, tau


def refine_theta(theta0: float, config: ShootingConfig, pairs=None, h0: float = 1e-7,
                 max_expand: int = 40) -> float:
    """Root of the mismatch near ``theta0`` found by expanding a local bracket."""
    def f(th):
        return _mismatch_or_nan(th, config, pairs)

    f0 = f(theta0)
    if f0 == 0.0:
        return theta0
    h = h0
    for _ in range(max_expand):
        for th in (theta0 - h, theta0 + h):
            ft = f(th)
            if not math.isnan(ft) and not math.isnan(f0) and ft * f0 < 0:
                lo, hi = sorted((theta0, th))
                flo, fhi = (f0, ft) if lo == theta0 else (ft, f0)
                return bracketed_root(f, lo, hi, flo, fhi, config.root_xtol, config.max_iter) % TWO_PI
        h *= 2.0
    raise NoBracketError(f"no sign change of the mismatch near theta={theta0!r}")


def solve(config: ShootingConfig = ShootingConfig(), pairs=None) -> SolveResult:
    """Find the optimal taper and its frequency.

    ``theta_star``, ``delta_t`` and ``lam`` come from shooting with the
    configured offset ``epsilon``. When ``refine_epsilon`` is set, the profile
    is reconstructed from a second matched shot that starts on the same
    linearized orbit but much closer to the fixed point (and at tighter
    tolerance), so that the linear tail used near the tip is accurate; its
    frequency is reported as ``diagnostics["lambda_refined"]``.
    """
    theta = find_theta(config, pairs)
    traj, t_match, lam, extras = _matched_shot(theta, config, pairs)
    log.info("theta*=%.10f dt=%.6f lambda=%.8f", theta, t_match, lam)

    rec_traj, rec_match, rec_lam, rec_theta, rec_cfg = traj, t_match, lam, theta, config
    refined = False
    if config.refine_epsilon is not None and config.refine_epsilon < config.epsilon:
        try:
            th0, tau = transport_direction(theta, config.epsilon, config.refine_epsilon, pairs)
            cfg_r = replace(config, epsilon=config.refine_epsilon, tol=config.refine_tol,
                            t_span=config.t_span + tau)
            th_r = refine_theta(th0, cfg_r, pairs)
            rec_traj, rec_match, rec_lam, _ = _matched_shot(th_r, cfg_r, pairs)
            rec_theta, rec_cfg, refined = th_r, cfg_r, True
            log.info("refined: theta=%.10f lambda=%.10f", th_r, rec_lam)
        except ShootingError as exc:
            log.warning("profile refinement failed, using the primary shot: %s", exc)

    tail = linear_continuation(rec_theta, rec_cfg.epsilon, pairs)
    profile = reconstruct(rec_traj, rec_lam, config.y0, rec_match, config.n_samples,
                          config.s_min, tail)
    try:
        profile.validate()
    except ModelError as exc:
        raise ShootingError(f"reconstructed profile invalid: {exc}") from exc

    diagnostics = dict(extras)
    diagnostics.update({
        "refined": refined,
        "lambda_refined": rec_lam,
        "b_at_1": float(profile.b[-1]),
        "volume": volume_check(profile),
        "as_residual_max": as_residual_max(rec_traj, rec_match, rec_traj.t0),
        "optimality_residual": optimality_residual(profile),
        "optimality_residual_consistent": optimality_residual(
            profile, consistent_multiplier(profile.lam)),
        "physical_residual": physical_residual(profile),
        "steps": traj.n_steps,
        "backend": _backend.BACKEND,
    })
    return SolveResult(
        theta_star=theta,
        delta_t=t_match,
        lam=lam,
        profile=profile,
        trajectory=traj,
        t_match=t_match,
        diagnostics=diagnostics,
    )


def with_changes(config: ShootingConfig, **changes) -> ShootingConfig:
    return replace(config, **changes)
