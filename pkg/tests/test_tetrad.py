import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dkmonopole.algebra import DKBasis
from dkmonopole.tetrad import (LocalLorentz, NotLorentzError, PoleGuardError, SpacetimePoint, boost,
                               cartesian_tetrad, christoffel, decompose_in_generators,
                               flat_spherical_metric, gauge_covariance_residuals, lorentz_rep, random_lorentz,
                               ricci_coefficients, rotation, spherical_tetrad, spin_connection,
                               tetrad_divergence, orthonormality_residual)

P = SpacetimePoint(0.3, 1.7, 1.1, 0.4)


def test_orthonormal_frames():
    assert orthonormality_residual(spherical_tetrad(), P) < 1e-14
    assert orthonormality_residual(cartesian_tetrad(), P) < 1e-14


def test_christoffel_known_values():
    g = christoffel(flat_spherical_metric, P.as_array())
    r, th = P.r, P.theta
    assert g[1, 2, 2] == pytest.approx(-r, rel=1e-9)
    assert g[2, 1, 2] == pytest.approx(1 / r, rel=1e-9)
    assert g[3, 2, 3] == pytest.approx(math.cos(th) / math.sin(th), rel=1e-9)


def test_divergence_anchor_values():
    d = tetrad_divergence(spherical_tetrad(), P)
    want = [0, -math.cos(P.theta) / (P.r * math.sin(P.theta)), 0, -2 / P.r]
    assert np.allclose(d, want, atol=1e-13)


def test_analytic_and_numeric_frames_agree():
    sph = spherical_tetrad()
    num = type(sph)(sph.components, sph.metric, "numeric")
    assert np.allclose(ricci_coefficients(sph, P), ricci_coefficients(num, P), atol=1e-8)


def test_ricci_antisymmetric():
    g = ricci_coefficients(spherical_tetrad(), P)
    assert np.abs(g + g.transpose(1, 0, 2)).max() < 1e-12


def test_spin_connection_in_generator_span():
    for b in spin_connection(spherical_tetrad(), P, DKBasis.CYCLIC):
        _, resid = decompose_in_generators(b)
        assert resid < 1e-12


def test_cartesian_frame_has_no_connection():
    for b in spin_connection(cartesian_tetrad(), P):
        assert b.max_abs() < 1e-8


def test_pole_guard():
    with pytest.raises(PoleGuardError):
        SpacetimePoint(0.0, 1.0, 1e-9, 0.0).check()
    with pytest.raises(ValueError):
        SpacetimePoint(0.0, -1.0, 1.0, 0.0).check()


def test_not_lorentz():
    with pytest.raises(NotLorentzError):
        lorentz_rep(np.diag([1.0, 2.0, 1.0, 1.0]))


def test_gauge_covariance_constant(rng):
    res = gauge_covariance_residuals(LocalLorentz.constant(random_lorentz(rng)), [P])
    assert max(res.values()) < 1e-10


def test_gauge_covariance_local():
    def lmat(x):
        return rotation(3, 0.2 * x[2] + 0.1 * x[1]) @ boost(1, 0.15 * x[0] - 0.1 * x[3])

    res = gauge_covariance_residuals(LocalLorentz(lmat), [P, SpacetimePoint(-0.5, 2.5, 2.0, 3.0)])
    assert res["conjugation"] < 1e-10
    assert res["connection"] < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-1, 1))
def test_representation_is_homomorphism(a, b, eta):
    l1, l2 = rotation(2, a) @ boost(3, eta), rotation(1, b)
    s12 = lorentz_rep(l1 @ l2).entries
    assert np.allclose(s12, lorentz_rep(l1).entries @ lorentz_rep(l2).entries, atol=1e-10)
