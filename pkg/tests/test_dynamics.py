import numpy as np
import pytest

from javelin import dynamics, linearization
from javelin.dynamics import FIXED_POINT, SingularStateError


def test_rhs_vanishes_exactly_at_fixed_point():
    assert np.all(dynamics.rhs_array(FIXED_POINT) == 0.0)
    assert all(v == 0.0 for v in dynamics.rhs(FIXED_POINT))


def test_residual_consistent_with_rhs():
    rng = np.random.default_rng(7)
    for _ in range(50):
        x = FIXED_POINT + 0.3 * rng.standard_normal(6)
        x[0] = abs(x[0]) + 0.1
        d = dynamics.rhs_array(x)
        assert np.max(np.abs(dynamics.residual(x, d))) < 1e-12 * max(1.0, np.max(np.abs(d)))


def test_jacobian_eigenvalues_at_fixed_point():
    ev = np.sort(np.linalg.eigvals(dynamics.jacobian_fd()).real)
    ref = np.array(linearization.eigenvalues())
    assert np.max(np.abs(ev - ref)) < 1e-5


def test_event_values_at_fixed_point():
    assert dynamics.event_values(FIXED_POINT) == (-4.0, 2.0)


@pytest.mark.parametrize("bad", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, np.nan)])
def test_singular_state(bad):
    x = FIXED_POINT.copy()
    x[0], x[2] = bad
    with pytest.raises(SingularStateError):
        dynamics.rhs(x)


def test_vectorized_rhs():
    x = np.tile(FIXED_POINT[:, None], (1, 5))
    x[4] += np.linspace(0, 0.1, 5)
    out = dynamics.rhs_array(x)
    assert out.shape == (6, 5)
    for j in range(5):
        assert np.allclose(out[:, j], dynamics.rhs_array(x[:, j]))
