"""CSV profiles and JSON summaries.

Profiles are written one sample per row under the header ``s,a,b,phi,y,s2y``
with ``repr`` floats, so a save/load cycle reproduces every column bitwise.
The frequency is not a column; :func:`load_profile` recovers it from the
Rayleigh quotient of the stored mode unless it is given.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from .model import BeamProfile, ModelError

PROFILE_COLUMNS = ("s", "a", "b", "phi", "y", "s2y")


class ProfileFormatError(ValueError):
    """The file is not a profile CSV; the message names the offending column."""


def save_profile(profile: BeamProfile, path) -> None:
    cols = [profile.s, profile.a, profile.b, profile.phi, profile.y, profile.s2y]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_COLUMNS)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])


def _read_columns(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ProfileFormatError(f"{path}: empty file, expected header column 's'") from None
        for i, want in enumerate(PROFILE_COLUMNS):
            got = header[i] if i < len(header) else None
            if got != want:
                raise ProfileFormatError(
                    f"{path}: header column {i + 1} is {got!r}, expected {want!r}")
        if len(header) != len(PROFILE_COLUMNS):
            raise ProfileFormatError(f"{path}: unexpected extra column {header[len(PROFILE_COLUMNS)]!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(PROFILE_COLUMNS):
                raise ProfileFormatError(f"{path}:{lineno}: expected 6 fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                col = next(c for c, v in zip(PROFILE_COLUMNS, row) if not _is_float(v))
                raise ProfileFormatError(f"{path}:{lineno}: bad value in column {col!r}") from exc
    if len(rows) < 2:
        raise ProfileFormatError(f"{path}: need at least two samples")
    return np.array(rows).T


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def rayleigh_lambda(s, a, phi, y) -> float:
    """``sqrt(int phi^2 / a^2 / int a y^2)`` over the half-beam.

    Both integrands are bounded at a power-law tip; the unresolved part
    ``[0, s[0]]`` is added as ``s[0]`` times the first sample.
    """
    e = phi**2 / a**2
    m = a * y**2
    num = simpson(e, x=s) + e[0] * s[0]
    den = simpson(m, x=s) + m[0] * s[0]
    if not (num > 0 and den > 0):
        raise ModelError("profile carries no mode energy")
    return math.sqrt(num / den)


def load_profile(path, lam: float | None = None) -> BeamProfile:
    """Read and validate a profile CSV.

    Raises :class:`ProfileFormatError` for a malformed file and
    :class:`~javelin.model.ModelError` for non-monotone ``s`` or negative ``a``.
    """
    s, a, b, phi, y, s2y = _read_columns(path)
    if np.any(~np.isfinite(np.vstack([s, a, b, phi, y]))):
        raise ModelError(f"{path}: non-finite sample")
    if np.any(np.diff(s) <= 0):
        raise ModelError(f"{path}: s is not strictly increasing")
    if np.any(a < 0):
        raise ModelError(f"{path}: negative area a")
    if not np.allclose(s2y, s**2 * y, rtol=1e-12, atol=0):
        raise ProfileFormatError(f"{path}: column 's2y' disagrees with s**2 * y")
    if lam is None:
        lam = rayleigh_lambda(s, a, phi, y)
    profile = BeamProfile(s=s, a=a, b=b, phi=phi, y=y, lam=float(lam), meta={"source": str(path)})
    profile.validate()
    return profile


def summary_record(result) -> dict:
    """Scalars of a :class:`~javelin.shooting.SolveResult` for the JSON summary."""
    d = result.diagnostics
    return {
        "lambda": result.lam,
        "theta_star": result.theta_star,
        "theta_star_signed": result.theta_star_signed,
        "delta_t": result.delta_t,
        "volume": d["volume"],
        "residuals": {
            "as_residual_max": d["as_residual_max"],
            "optimality_residual": d["optimality_residual"],
            "optimality_residual_consistent": d["optimality_residual_consistent"],
            "physical_residual": d["physical_residual"],
            "volume_check": d["volume"] - 1.0,
            "b_at_1": d["b_at_1"],
            "mismatch": d["mismatch"],
            "g1_at_match": d["g1_at_match"],
            "g2_at_match": d["g2_at_match"],
        },
        "lambda_profile": d["lambda_refined"],
        "backend": d["backend"],
    }


def write_json(record: dict, path) -> None:
    Path(path).write_text(json.dumps(record, indent=2, sort_keys=False) + "\n")
