"""Acceptance criteria, one test per criterion (or per clause).

Each test records a ``PASS``/``FAIL`` line, collected in the
"acceptance criteria" section at the end of the pytest run. All tolerances
are pinned here as module constants.
"""

import io
import json
import math
import time
from contextlib import redirect_stdout

import numpy as np
import pytest

from javelin import cli, dynamics, linearization, model, oracle, shooting
from javelin.cylinder import cylinder_lambda, cylinder_profile, improvement_ratio
from javelin.integrator import Tolerances
from javelin.serialize import save_profile

# reference values
LAMBDA_CYL = 5.5933
EIGENVALUES = [-5.3523, -4.0, 0.0, 1.0, 5.0, 6.3523]
EXACT_EIGENVALUES = {-4.0, 0.0, 1.0, 5.0}
S3_REFERENCE = (9, 5, -27, 135)
S6_REFERENCE = (-11.019, -5.3220, 1.0, 17.529)
LAMBDA_OPT = 27.073
DELTA_T = -2.0429
THETA_STAR = 5.753

# tolerances
TOL_CYL = 1e-3
TOL_EIG = 1e-3
TOL_S6 = 1e-3
TOL_LAMBDA_REL = 1e-2
TOL_DELTA_T = 1e-2
TOL_THETA = 5e-3
RATIO_RANGE = (4.7, 5.0)
TOL_ROBUST = 1e-4
TOL_GAP_OPT = 0.02
TOL_GAP_CYL = 1e-3
TOL_OPTIMALITY = 1e-3
MIN_EXPONENT_OPT = 1.8
CYL_EXPONENT = 1.0
TOL_CYL_EXPONENT = 0.15
TOL_B1 = 1e-4
TOL_AS = 1e-6
TOL_PHYS = 1e-3
INDICIAL = [-2.0, 0.0, 1.0, 15.0]
GAMMA = 72.0

# runtime limits (seconds)
T_CYLINDER = 1.0
T_EIGEN = 1.0
T_OPTIMAL = 30.0

# stationarity probe: zero-volume bump, a fine beam with a short tip cut
PROBE_EPS = [0.005, 0.01, 0.02, 0.04]
PROBE_GRID = 4000
PROBE_TIP_CUT = 0.005


def _run_cli(argv):
    buf = io.StringIO()
    t0 = time.perf_counter()
    with redirect_stdout(buf):
        code = cli.run(argv)
    return code, buf.getvalue(), time.perf_counter() - t0


@pytest.fixture(scope="module")
def optimal_cli():
    code, out, elapsed = _run_cli(["optimal"])
    assert code == 0
    return json.loads(out), elapsed


# 1 -------------------------------------------------------------------------

def test_c1_cylinder_frequency(criterion):
    code, out, elapsed = _run_cli(["cylinder"])
    lam = float(out.strip())
    ok = code == 0 and abs(lam - LAMBDA_CYL) < TOL_CYL and elapsed < T_CYLINDER
    assert criterion("1 cylinder frequency", ok,
                     f"lambda={lam:.6f} (ref {LAMBDA_CYL} +- {TOL_CYL}), {elapsed:.3f}s < {T_CYLINDER}s")


# 2 -------------------------------------------------------------------------

def test_c2_eigenvalues(criterion):
    code, out, elapsed = _run_cli(["eigen"])
    got = json.loads(out)["eigenvalues"]
    exact_ok = all(g == r for g, r in zip(got, EIGENVALUES) if r in EXACT_EIGENVALUES)
    approx_err = max(abs(g - r) for g, r in zip(got, EIGENVALUES) if r not in EXACT_EIGENVALUES)
    ok = (code == 0 and len(got) == 6 and exact_ok and approx_err < TOL_EIG
          and elapsed < T_EIGEN)
    assert criterion("2 linearization eigenvalues", ok,
                     f"{got}, exact members exact={exact_ok}, approx err={approx_err:.1e}, "
                     f"{elapsed:.3f}s")


# 3 -------------------------------------------------------------------------

def test_c3_s3_exact(criterion):
    s3 = tuple(float(v) for v in linearization.null_direction(-4.0))
    ok = s3 == S3_REFERENCE
    assert criterion("3 S3 rational null vector", ok, f"computed {s3}, required {S3_REFERENCE}")


def test_c3_s6(criterion):
    s6 = linearization.stable_directions()[1].direction
    err = float(np.max(np.abs(s6 - np.array(S6_REFERENCE))))
    assert criterion("3 S6 components", err < TOL_S6,
                     f"computed {np.round(s6, 6).tolist()}, max err {err:.1e} < {TOL_S6}")


# 4 -------------------------------------------------------------------------

def test_c4_lambda(criterion, optimal_cli):
    rec, _ = optimal_cli
    rel = abs(rec["lambda"] - LAMBDA_OPT) / LAMBDA_OPT
    assert criterion("4 optimal lambda", rel < TOL_LAMBDA_REL,
                     f"lambda={rec['lambda']:.6f}, rel err {rel:.1e} < {TOL_LAMBDA_REL}")


def test_c4_delta_t(criterion, optimal_cli):
    rec, _ = optimal_cli
    err = abs(rec["delta_t"] - DELTA_T)
    assert criterion("4 optimal delta_t", err < TOL_DELTA_T,
                     f"delta_t={rec['delta_t']:.5f}, required {DELTA_T} +- {TOL_DELTA_T}")


def test_c4_theta(criterion, optimal_cli):
    rec, _ = optimal_cli
    err = abs(rec["theta_star"] - THETA_STAR)
    assert criterion("4 optimal theta*", err < TOL_THETA,
                     f"theta*={rec['theta_star']:.5f}, required {THETA_STAR} +- {TOL_THETA}")


def test_c4_runtime(criterion, optimal_cli):
    _, elapsed = optimal_cli
    assert criterion("4 optimal runtime", elapsed < T_OPTIMAL, f"{elapsed:.2f}s < {T_OPTIMAL}s")


# 5 -------------------------------------------------------------------------

def test_c5_improvement_ratio(criterion, solved):
    r = improvement_ratio(solved.lam)
    lo, hi = RATIO_RANGE
    assert criterion("5 improvement ratio", lo <= r <= hi, f"{r:.4f} in [{lo}, {hi}]")


# 6 -------------------------------------------------------------------------

@pytest.mark.parametrize("variant", ["epsilon/2", "t_span*2", "tol/10"])
def test_c6_robustness(criterion, solved, variant):
    base = shooting.ShootingConfig()
    changes = {
        "epsilon/2": dict(epsilon=base.epsilon / 2),
        "t_span*2": dict(t_span=base.t_span * 2),
        "tol/10": dict(tol=Tolerances(rel=base.tol.rel / 10, abs=base.tol.abs / 10)),
    }[variant]
    lam = shooting.solve(shooting.with_changes(base, **changes)).lam
    rel = abs(lam - solved.lam) / solved.lam
    assert criterion(f"6 robustness ({variant})", rel < TOL_ROBUST,
                     f"lambda={lam:.8f}, rel change {rel:.1e} < {TOL_ROBUST}")


# 7 -------------------------------------------------------------------------

def test_c7_oracle_optimum(criterion, profile_csv, solved):
    code, out, _ = _run_cli(["verify", "--profile", str(profile_csv), "--grid", "4000",
                             "--tip-cut", "0.02", "--lambda", repr(solved.lam)])
    rec = json.loads(out)
    ok = code == 0 and rec["relative_gap"] < TOL_GAP_OPT and rec["rigid_modes"] == 2
    assert criterion("7 oracle on optimum", ok,
                     f"oracle {rec['lambda_oracle']:.5f} vs {rec['lambda_input']:.5f}, "
                     f"gap {rec['relative_gap']:.2e} < {TOL_GAP_OPT}, rigid={rec['rigid_modes']}")


def test_c7_oracle_cylinder(criterion, tmp_path):
    path = tmp_path / "cylinder.csv"
    save_profile(cylinder_profile(2000), path)
    code, out, _ = _run_cli(["verify", "--profile", str(path), "--grid", "2000",
                             "--lambda", repr(cylinder_lambda())])
    rec = json.loads(out)
    ok = code == 0 and rec["relative_gap"] < TOL_GAP_CYL and rec["rigid_modes"] == 2
    assert criterion("7 oracle on a = 1", ok,
                     f"gap {rec['relative_gap']:.2e} < {TOL_GAP_CYL}, rigid={rec['rigid_modes']}")


# 8 -------------------------------------------------------------------------

def test_c8_optimality_residual(criterion, solved):
    r = shooting.optimality_residual(solved.profile)  # mu = lambda
    assert criterion("8 optimality residual (mu = lambda)", r < TOL_OPTIMALITY,
                     f"{r:.3e} < {TOL_OPTIMALITY}")


def _exponent(beam):
    g = oracle.volume_preserving_bump(beam)
    lam0 = oracle.lowest_frequency(beam)
    lams = oracle.stationarity_probe(beam, g, PROBE_EPS)
    return oracle.response_exponent(PROBE_EPS, lams, lam0)


def test_c8_stationarity(criterion, solved):
    opt = oracle.DiscreteBeam.from_profile(solved.profile, PROBE_GRID, PROBE_TIP_CUT, "truncate")
    p_opt = _exponent(opt)
    p_cyl = _exponent(oracle.DiscreteBeam.uniform(PROBE_GRID))
    ok = p_opt >= MIN_EXPONENT_OPT and abs(p_cyl - CYL_EXPONENT) <= TOL_CYL_EXPONENT
    assert criterion("8 stationarity exponents", ok,
                     f"optimum {p_opt:.3f} >= {MIN_EXPONENT_OPT}, "
                     f"cylinder {p_cyl:.3f} ~ {CYL_EXPONENT} +- {TOL_CYL_EXPONENT}")


# 9 -------------------------------------------------------------------------

def test_c9_invariants(criterion, solved):
    d = solved.diagnostics
    b1 = d["b_at_1"]
    fixed = dynamics.rhs_array(dynamics.FIXED_POINT)
    roots = model.indicial_roots()
    gamma = model.similarity_gamma(model.select_physical_root(roots))
    checks = {
        "b(1)": abs(b1 - 1.0) <= TOL_B1,
        "AS residual": d["as_residual_max"] < TOL_AS,
        "physical residual": d["physical_residual"] < TOL_PHYS,
        "rhs(1)=0": bool(np.all(fixed == 0.0)),
        "indicial": roots == INDICIAL and gamma == GAMMA,
    }
    assert criterion("9 structural invariants", all(checks.values()),
                     f"b(1)={b1:.8f}, AS={d['as_residual_max']:.1e}, "
                     f"phys={d['physical_residual']:.1e}, roots={roots}, gamma={gamma}, "
                     f"failed={[k for k, v in checks.items() if not v]}")


# 10 ------------------------------------------------------------------------

def test_c10_sweep_structure(criterion, solved, tmp_path):
    detail = tmp_path / "detail.json"
    code, out, _ = _run_cli(["sweep", "--samples", "720", "--detail", str(detail)])
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()[1:]]
    theta = np.array([float(r[0]) for r in rows])
    g1 = np.array([float(r[1]) for r in rows])
    g2 = np.array([float(r[2]) for r in rows])
    div = np.array([r[3] == "1" for r in rows])
    shots = json.loads(detail.read_text())

    windows = int(np.sum(div & ~np.roll(div, 1)))
    doubles = sum(1 for s in shots if len(s["dt_g1"]) >= 2 or len(s["dt_g2"]) >= 2)
    f = g1 - g2
    nxt = np.roll(f, -1)
    both = ~np.isnan(f) & ~np.isnan(nxt)
    changes = np.flatnonzero(both & (f * nxt <= 0))
    step = theta[1] - theta[0]
    unique = len(changes) == 1
    at_root = unique and abs(theta[changes[0]] + 0.5 * step - solved.theta_star) <= step
    ok = windows >= 1 and doubles >= 1 and unique and at_root
    where = [round(float(theta[i]), 4) for i in changes]
    assert criterion("10 sweep structure", ok,
                     f"{windows} divergent window(s), {doubles} theta with a repeated crossing, "
                     f"first-crossing intersections at {where} (theta*={solved.theta_star:.4f})")
