import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from javelin import model
from javelin.model import BeamProfile, DimensionalBeam, ModelError


def test_indicial_roots_values():
    assert model.indicial_roots() == [-2.0, 0.0, 1.0, 15.0]


def test_indicial_roots_residuals():
    for p in model.indicial_roots():
        assert abs(model.indicial_residual(p)) < 1e-12
    # p = 0: both sides vanish
    assert model._indicial_lhs(0.0) == 0.0 == model._indicial_rhs(0.0)


def test_select_physical_root():
    p = model.select_physical_root([-2.0, 0.0, 1.0, 15.0])
    assert p == -2.0
    assert model.similarity_gamma(p) == 72.0 == model.GAMMA


def test_select_physical_root_missing():
    with pytest.raises(ModelError):
        model.select_physical_root([0.0, 1.0])


def test_similarity_unit_area():
    v = model.similarity_eval(1.0, math.sqrt(72.0), 1.0)
    assert v.a == pytest.approx(1.0, rel=1e-15)


def test_similarity_formula():
    lam = 27.073
    v = model.similarity_eval(0.5, lam, 1.0)
    assert v.a == pytest.approx(lam**2 / 72 * 0.5**4, rel=1e-15)
    assert v.b == pytest.approx(lam**2 / 360 * 0.5**5, rel=1e-15)
    assert v.phi == pytest.approx(lam**4 / 864 * 0.5**4, rel=1e-15)
    assert v.y == pytest.approx(4.0, rel=1e-15)


@pytest.mark.parametrize("s", [0.0, -0.1])
def test_similarity_rejects_nonpositive_s(s):
    with pytest.raises(ModelError):
        model.similarity_eval(s, 5.0)


@settings(max_examples=50, deadline=None)
@given(lam=st.floats(1.0, 60.0), y0=st.floats(0.1, 10.0))
def test_similarity_satisfies_odes(lam, y0):
    """phi = a^2 y_ss, phi_ss = lam^2 a y, b_s = a and the optimality balance."""
    s = np.linspace(0.01, 1.0, 25)
    v = model.similarity_eval(s, lam, y0)
    a0, b0, f0 = lam**2 / 72, lam**2 / 360, y0 * lam**4 / 864
    y_ss = 6 * y0 * s**-4
    phi_ss = 12 * f0 * s**2
    scale_phi = np.abs(v.phi) + 1e-300
    assert np.max(np.abs(v.phi - v.a**2 * y_ss) / scale_phi) < 1e-10
    assert np.max(np.abs(phi_ss - lam**2 * v.a * v.y) / np.abs(phi_ss)) < 1e-10
    assert np.max(np.abs(5 * b0 * s**4 - v.a) / v.a) < 1e-10
    lhs = 2 * v.a * y_ss**2 - lam**2 * v.y**2
    # power-law balance: both terms scale as s^-4 and cancel on this branch
    assert np.max(np.abs(lhs) * s**4) < 1e-10 * lam**2 * y0**2
    assert f0 == pytest.approx(a0**2 * 6 * y0)


def test_dimensional_round_trip_and_unit_scale():
    beam = DimensionalBeam(rho=1.0, E=1.0, c=1.0 / 16, V=1.0, L=1.0)
    assert model.to_dimensional_frequency(5.5933, beam) == pytest.approx(5.5933, rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(
    lam=st.floats(0.1, 100.0),
    rho=st.floats(1.0, 2e4),
    E=st.floats(1e6, 1e12),
    c=st.floats(0.01, 1.0),
    V=st.floats(1e-6, 1.0),
    L=st.floats(0.1, 10.0),
)
def test_dimensional_inverse(lam, rho, E, c, V, L):
    beam = DimensionalBeam(rho, E, c, V, L)
    omega = model.to_dimensional_frequency(lam, beam)
    assert model.from_dimensional_frequency(omega, beam) == pytest.approx(lam, rel=1e-12)
    assert model.to_dimensional_frequency(2 * lam, beam) == pytest.approx(2 * omega, rel=1e-14)


@pytest.mark.parametrize("field", ["rho", "E", "c", "V", "L"])
def test_dimensional_beam_rejects_nonpositive(field):
    kwargs = dict(rho=1.0, E=1.0, c=1.0, V=1.0, L=1.0)
    kwargs[field] = 0.0
    with pytest.raises(ModelError):
        DimensionalBeam(**kwargs)


def _profile(a=None, s=None, lam=math.sqrt(360.0)):
    s = np.linspace(0.01, 1.0, 50) if s is None else s
    v = model.similarity_eval(s, lam)
    return BeamProfile(s=s, a=v.a if a is None else a, b=v.b, phi=v.phi, y=v.y, lam=lam)


def test_volume_check_similarity_profile():
    s = np.geomspace(1e-4, 1.0, 4000)
    p = _profile(s=s)
    assert model.volume_check(p) == pytest.approx(1.0, abs=1e-5)


def test_volume_check_uniform():
    s = np.linspace(1e-3, 1.0, 1000)
    p = BeamProfile(s=s, a=np.ones_like(s), b=s, phi=s, y=s, lam=1e-9)
    assert model.volume_check(p) == pytest.approx(1.0 - 1e-3, abs=1e-12)


def test_profile_validation():
    p = _profile()
    p.validate(b_tol=1e-12)
    bad = _profile(s=np.linspace(0.01, 1.0, 50)[::-1].copy())
    with pytest.raises(ModelError):
        bad.validate()
    neg = _profile(a=-np.ones(50))
    with pytest.raises(ModelError):
        neg.validate()
    assert np.allclose(p.s2y, p.s**2 * p.y)


def test_similarity_constants():
    c = model.SimilarityConstants(lam=27.0, y0=2.0)
    assert c.gamma == 72.0 and c.p == -2.0
    assert c.a0 == pytest.approx(27.0**2 / 72)
