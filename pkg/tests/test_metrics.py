import numpy as np
import pytest

from finsler import alphabeta as ab
from finsler import busemann as bu
from finsler import geometry as geo
from finsler.errors import ArgumentError, RegularityError
from finsler.metrics import (
    approx_matsumoto,
    euclidean_spec,
    matsumoto,
    phi_derivs,
    point_state,
    randers,
    second_matsumoto,
)


class TestPhiFamilies:
    def test_second_matsumoto_is_cubic_truncation(self):
        fam = second_matsumoto()
        assert fam.coeffs == (1.0, 1.0, 1.0, 1.0)
        assert fam.coeffs == approx_matsumoto(3).coeffs
        for s in (0.0, 0.1, -0.2):
            assert fam.phi(s) == pytest.approx(1 + s + s**2 + s**3)

    def test_matsumoto_slope_profile(self):
        assert matsumoto().phi(0.2) == pytest.approx(1.25)

    def test_phi_derivs_match_polynomial(self):
        d = phi_derivs(second_matsumoto(), 0.0, 3)
        assert d == pytest.approx([1.0, 1.0, 2.0, 6.0])


class TestPointStateGuards:
    def test_zero_fiber_vector_rejected(self, euclid2):
        with pytest.raises(ArgumentError):
            point_state(euclid2, (0.0, 0.0), (0.0, 0.0))

    def test_b_too_large_rejected(self):
        spec = euclidean_spec(2, randers(), b=["1.1", "0"])
        with pytest.raises(RegularityError):
            point_state(spec, (0.0, 0.0), (1.0, 0.0))

    def test_convexity_guard_slope_metric(self):
        # for the slope profile, phi - s*phi' changes sign at s = 1/2:
        # a direction nearly aligned with a long 1-form must be rejected
        spec = euclidean_spec(2, matsumoto(), b=["0.7", "0"])
        with pytest.raises(RegularityError):
            point_state(spec, (0.0, 0.0), (1.0, 0.0))
        # a transverse direction at the same point is fine
        p = point_state(spec, (0.0, 0.0), (0.0, 1.0))
        assert p.F == pytest.approx(1.0)


@pytest.mark.parametrize(
    "family",
    [randers(), approx_matsumoto(2), second_matsumoto(), matsumoto()],
    ids=lambda f: f.label,
)
def test_parallel_beta_is_locally_minkowskian(family):
    """Flat chart, constant 1-form: every curvature obstruction vanishes."""
    spec = euclidean_spec(2, family, b=["0.2", "0.05"])
    rng = np.random.default_rng(8)
    for _ in range(5):
        x = rng.uniform(-0.5, 0.5, 2)
        y = rng.normal(size=2)
        p = point_state(spec, tuple(x), tuple(y))
        assert np.abs(geo.berwald_curvature(spec, p)).max() <= 1e-12
        assert np.abs(geo.mean_berwald(spec, p)).max() <= 1e-12
        assert np.abs(geo.douglas_curvature(spec, p)).max() <= 1e-12
        assert np.abs(geo.mean_landsberg(spec, p)).max() <= 1e-12
        assert np.abs(geo.riemann_curvature(spec, p)).max() <= 1e-12
        assert abs(ab.s_curvature_closed(spec, p)) <= 1e-12
        assert abs(bu.s_curvature_definitional(spec, p, 48)) <= 1e-6


def test_quadrature_dimension_cap():
    spec = euclidean_spec(4)
    with pytest.raises(ArgumentError):
        bu.bh_volume_coefficient(spec, (0.0, 0.0, 0.0, 0.0), 16)
