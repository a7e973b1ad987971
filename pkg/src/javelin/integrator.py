"""Dormand-Prince 5(4) integration with dense output and event location.

Steps are produced by a *stepper* (a generic pure-Python loop here, or the
specialized kernels in :mod:`javelin._backend`); events are located afterwards
on the dense interpolant, so every crossing before an early stop is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._tableau import A, B, C, E, P

# stepper status codes, shared with the compiled kernel
COMPLETED, BLOWUP, UNDERFLOW, SINGULAR, MAX_STEPS = 0, 1, 2, 3, 4
STATUS_NAMES = {
    COMPLETED: "completed",
    BLOWUP: "blowup",
    UNDERFLOW: "underflow",
    SINGULAR: "singular",
    MAX_STEPS: "max_steps",
}

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ERR_EXP = -1.0 / 5.0
EVENT_XTOL = 1e-12


@dataclass(frozen=True)
class Tolerances:
    rel: float = 1e-9
    abs: float = 1e-11

    def __post_init__(self):
        if not (self.rel > 0 and self.abs > 0):
            raise ValueError("tolerances must be positive")


class IntegrationError(RuntimeError):
    """Integration could not continue; the partial result is attached."""

    def __init__(self, message, trajectory=None, events=()):
        super().__init__(message)
        self.trajectory = trajectory
        self.events = list(events)


class StepSizeError(IntegrationError):
    pass


class RHSFailure(IntegrationError):
    pass


@dataclass
class Trajectory:
    """Accepted mesh ``ts`` with states ``ys`` and stage slopes ``ks``.

    ``ks[i]`` holds the seven stage derivatives of step ``ts[i] -> ts[i+1]``.
    """

    ts: np.ndarray
    ys: np.ndarray
    ks: np.ndarray
    status: str = "completed"
    t_fail: float | None = None

    @property
    def direction(self) -> float:
        return 1.0 if self.ts[-1] >= self.ts[0] else -1.0

    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def t_last(self) -> float:
        return float(self.ts[-1])

    @property
    def n_steps(self) -> int:
        return len(self.ts) - 1

    def _locate(self, t):
        t = np.asarray(t, dtype=float)
        d = self.direction
        key = d * self.ts
        idx = np.searchsorted(key, d * t, side="right") - 1
        idx = np.clip(idx, 0, self.n_steps - 1)
        return idx

    def step_eval(self, i: int, t: float) -> np.ndarray:
        h = self.ts[i + 1] - self.ts[i]
        th = (t - self.ts[i]) / h
        q = P @ np.array([th, th * th, th**3, th**4])
        return self.ys[i] + h * (q @ self.ks[i])

    def __call__(self, t) -> np.ndarray:
        """Dense state at ``t`` (scalar -> ``(n,)``, array -> ``(m, n)``)."""
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        if self.n_steps == 0:
            out = np.repeat(self.ys[:1], tt.size, axis=0)
            return out[0] if scalar else out
        idx = self._locate(tt)
        h = self.ts[idx + 1] - self.ts[idx]
        th = (tt - self.ts[idx]) / h
        powers = np.stack([th, th**2, th**3, th**4], axis=-1)
        q = powers @ P.T
        incr = np.einsum("ms,msn->mn", q, self.ks[idx])
        out = self.ys[idx] + h[:, None] * incr
        return out[0] if scalar else out

    def derivative(self, t) -> np.ndarray:
        """Time derivative of the dense interpolant."""
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        idx = self._locate(tt)
        h = self.ts[idx + 1] - self.ts[idx]
        th = (tt - self.ts[idx]) / h
        dpow = np.stack([np.ones_like(th), 2 * th, 3 * th**2, 4 * th**3], axis=-1)
        q = dpow @ P.T
        out = np.einsum("ms,msn->mn", q, self.ks[idx])
        return out[0] if scalar else out


@dataclass(frozen=True)
class EventRecord:
    event: int
    t: float
    state: np.ndarray = field(repr=False)
    direction: int
    value: float = 0.0


# ----------------------------------------------------------------------------
# generic stepper


def _rms(x):
    return math.sqrt(float(np.dot(x, x)) / x.size)


def initial_step(f, t0, y0, f0, direction, rtol, atol, order=4):
    """Initial step size estimate (Hairer, Norsett & Wanner, II.4)."""
    scale = atol + np.abs(y0) * rtol
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = f(t0 + h0 * direction, y1)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order + 1))
    return min(100 * h0, h1)


def dopri_steps(f, y0, t0, t_end, rtol, atol, h0=0.0, max_norm=1e8, max_steps=200000):
    """Generic adaptive stepping loop.

    Returns ``(ts, ys, ks, status, t_fail)``. A failure of ``f`` inside a
    trial step shrinks the step; it becomes :data:`SINGULAR` only once the
    step cannot shrink further.
    """
    y = np.array(y0, dtype=float)
    n = y.size
    t = float(t0)
    direction = 1.0 if t_end >= t0 else -1.0
    try:
        fy = np.asarray(f(t, y), dtype=float)
    except ArithmeticError:
        return (np.array([t]), y[None].copy(), np.empty((0, 7, n)), SINGULAR, t)
    ts, ys, ks = [t], [y.copy()], []
    if t == t_end:
        return np.array(ts), np.array(ys), np.empty((0, 7, n)), COMPLETED, None
    h_abs = abs(h0) if h0 else initial_step(f, t, y, fy, direction, rtol, atol)
    K = np.empty((7, n))
    status, t_fail = COMPLETED, None
    steps = 0
    while direction * (t_end - t) > 0:
        if steps >= max_steps:
            status, t_fail = MAX_STEPS, t
            break
        min_step = 10 * abs(np.nextafter(t, direction * np.inf) - t)
        h_abs = max(h_abs, min_step)
        rejected = False
        while True:
            if h_abs > abs(t_end - t):
                h_abs = abs(t_end - t)
            h = h_abs * direction
            t_new = t_end if h_abs == abs(t_end - t) else t + h
            try:
                K[0] = fy
                for s in range(1, 6):
                    dy = A[s, :s] @ K[:s] * h
                    K[s] = f(t + C[s] * h, y + dy)
                y_new = y + h * (B @ K[:6])
                f_new = np.asarray(f(t_new, y_new), dtype=float)
                K[6] = f_new
                ok = bool(np.all(np.isfinite(y_new)) and np.all(np.isfinite(f_new)))
            except ArithmeticError:
                ok = False
            if ok:
                scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
                err = _rms(h * (E @ K) / scale)
            else:
                err = math.inf
            if err < 1.0:
                factor = MAX_FACTOR if err == 0 else min(MAX_FACTOR, SAFETY * err**ERR_EXP)
                if rejected:
                    factor = min(1.0, factor)
                h_abs *= factor
                break
            if not ok:
                h_abs *= 0.25
            else:
                h_abs *= max(MIN_FACTOR, SAFETY * err**ERR_EXP)
            rejected = True
            if h_abs < min_step:
                status = SINGULAR if not ok else UNDERFLOW
                t_fail = t
                break
        if status != COMPLETED:
            break
        steps += 1
        t, y, fy = t_new, y_new, f_new
        ts.append(t)
        ys.append(y.copy())
        ks.append(K.copy())
        if np.max(np.abs(y)) > max_norm:
            status, t_fail = BLOWUP, t
            break
    ks_arr = np.array(ks) if ks else np.empty((0, 7, n))
    return np.array(ts), np.array(ys), ks_arr, status, t_fail


# ----------------------------------------------------------------------------
# public driver


def _eval_event(g, ts, ys):
    try:
        vals = np.asarray(g(ts, ys.T), dtype=float)
        if vals.shape == ts.shape:
            return vals
    except Exception:  # event not vectorizable
        pass
    return np.array([float(g(t, y)) for t, y in zip(ts, ys)])


def _bisect(g, traj, i, g_lo, xtol):
    lo, hi = traj.ts[i], traj.ts[i + 1]
    f_lo = g_lo
    for _ in range(200):
        if abs(hi - lo) <= xtol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = float(g(mid, traj.step_eval(i, mid)))
        if f_mid == 0.0:
            lo = hi = mid
            break
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    t_ev = 0.5 * (lo + hi)
    x_ev = traj.step_eval(i, t_ev)
    return float(t_ev), x_ev, float(g(t_ev, x_ev))


def locate_events(traj: Trajectory, events: Sequence[Callable], xtol=EVENT_XTOL):
    """All sign changes of each event function, in integration order."""
    found = []
    if traj.n_steps == 0:
        return found
    for ev_id, g in enumerate(events):
        vals = _eval_event(g, traj.ts, traj.ys)
        for i in range(traj.n_steps):
            g_lo, g_hi = vals[i], vals[i + 1]
            if g_hi == 0.0 and g_lo != 0.0:
                found.append(EventRecord(ev_id, float(traj.ts[i + 1]), traj.ys[i + 1].copy(),
                                         int(np.sign(-g_lo)), 0.0))
                continue
            if not (g_lo * g_hi < 0):
                continue
            try:
                t_ev, x_ev, g_ev = _bisect(g, traj, i, g_lo, xtol)
            except ArithmeticError:
                # interpolant leaves the domain of g inside this step
                continue
            found.append(EventRecord(ev_id, t_ev, x_ev, int(np.sign(g_hi - g_lo)), g_ev))
    found.sort(key=lambda e: traj.direction * e.t)
    return found


def integrate(
    rhs: Callable,
    x0,
    t0: float,
    t_end: float,
    events: Sequence[Callable] = (),
    tol: Tolerances = Tolerances(),
    max_norm: float = 1e8,
    stepper: Callable | None = None,
    max_steps: int = 200000,
):
    """Integrate ``x' = rhs(t, x)`` from ``t0`` to ``t_end`` (either direction).

    Parameters
    ----------
    rhs : callable
        ``rhs(t, x) -> dx/dt``. Raising :class:`ArithmeticError` marks a state
        where the right-hand side is undefined.
    events : sequence of callable
        ``g(t, x)``; every sign change along the trajectory is returned as an
        :class:`EventRecord`.
    max_norm : float
        Integration stops with ``trajectory.status == "blowup"`` once
        ``max|x|`` exceeds this bound. This is a flagged outcome, not an error.
    stepper : callable, optional
        Replacement for :func:`dopri_steps` with the same signature minus
        ``f``; used for the compiled autonomous-system kernel.

    Returns
    -------
    trajectory : Trajectory
    events : list of EventRecord

    Raises
    ------
    StepSizeError
        Step size underflow or step limit.
    RHSFailure
        ``rhs`` undefined at every admissible step size.
    """
    if stepper is None:
        ts, ys, ks, status, t_fail = dopri_steps(
            rhs, x0, t0, t_end, tol.rel, tol.abs, max_norm=max_norm, max_steps=max_steps
        )
    else:
        ts, ys, ks, status, t_fail = stepper(
            np.asarray(x0, dtype=float), t0, t_end, tol.rel, tol.abs, 0.0, max_norm, max_steps
        )
    traj = Trajectory(ts, ys, ks, STATUS_NAMES[status], t_fail)
    found = locate_events(traj, events)
    if status in (UNDERFLOW, MAX_STEPS):
        raise StepSizeError(f"{STATUS_NAMES[status]} at t = {t_fail!r}", traj, found)
    if status == SINGULAR:
        raise RHSFailure(f"right-hand side undefined near t = {t_fail!r}", traj, found)
    return traj, found
