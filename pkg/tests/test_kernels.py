import numpy as np
import pytest

from javelin import _backend, _kernels_py, dynamics, shooting
from javelin.integrator import Tolerances, dopri_steps

X0 = shooting.initial_state(1.4, 1e-3)

try:
    _cy = _backend.get("cython")
except ImportError:  # extension not built
    _cy = None

needs_cython = pytest.mark.skipif(_cy is None, reason="compiled kernel not built")


def test_python_rhs_matches_dynamics():
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = dynamics.FIXED_POINT + 0.2 * rng.standard_normal(6)
        x[0] = abs(x[0]) + 0.2
        assert np.allclose(_kernels_py.as_rhs(list(x)), dynamics.rhs_array(x), rtol=1e-14, atol=1e-14)


def test_python_rhs_singular():
    x = list(dynamics.FIXED_POINT)
    x[0] = 0.0
    assert _kernels_py.as_rhs(x) is None


def test_python_kernel_matches_generic_stepper():
    ts, ys, ks, status, _ = _kernels_py.integrate_as(X0, 0.0, -2.0, 1e-9, 1e-11)
    ref = dopri_steps(dynamics.system_rhs, X0, 0.0, -2.0, 1e-9, 1e-11)
    assert status == ref[3]
    # error norms are summed in a different order, so step sizes agree to
    # roundoff-amplified ~1e-8 rather than bitwise; the solutions agree
    assert abs(len(ts) - len(ref[0])) <= 1
    assert ts[-1] == ref[0][-1] == -2.0
    assert np.allclose(ys[-1], ref[1][-1], rtol=1e-8, atol=1e-10)


@needs_cython
def test_cython_matches_python():
    a = _cy.integrate_as(X0, 0.0, -2.0, 1e-9, 1e-11)
    b = _kernels_py.integrate_as(X0, 0.0, -2.0, 1e-9, 1e-11)
    assert a[3] == b[3]
    assert np.allclose(a[0], b[0], rtol=0, atol=1e-12)
    assert np.allclose(a[1], b[1], rtol=1e-10, atol=1e-12)


@needs_cython
def test_cython_rhs():
    x = list(dynamics.FIXED_POINT + 0.01)
    assert np.allclose(_cy.as_rhs(x), dynamics.rhs_array(np.array(x)), rtol=1e-14)


def test_backend_selection():
    assert _backend.BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        _backend.get("fortran")


def test_mismatch_backend_independent(monkeypatch):
    cfg = shooting.ShootingConfig(tol=Tolerances())
    ref = shooting.mismatch(1.4, cfg)
    monkeypatch.setattr(_backend, "integrate_as", _kernels_py.integrate_as)
    assert shooting.mismatch(1.4, cfg) == pytest.approx(ref, abs=1e-9)
