import numpy as np
import pytest

from finsler import classify as cl
from finsler.errors import ArgumentError
from finsler.metrics import (
    euclidean_spec,
    point_state,
    randers,
    second_matsumoto,
    spec_from_strings,
)
from finsler.sampling import alpha_sphere_states, sample_states, unit_directions


class TestSampling:
    def test_directions_deterministic_and_unit(self):
        d1 = unit_directions(2, 16, seed=3)
        d2 = unit_directions(2, 16, seed=3)
        assert np.array_equal(d1, d2)
        assert np.allclose(np.linalg.norm(d1, axis=1), 1.0)
        d3 = unit_directions(3, 30, seed=1)
        assert np.allclose(np.linalg.norm(d3, axis=1), 1.0)

    def test_alpha_normalization(self, sphere2):
        states = alpha_sphere_states(sphere2, (0.5, -0.3), 12, seed=0)
        for p in states:
            assert p.alpha == pytest.approx(1.0, rel=1e-12)


class TestClassifyParallelBeta:
    def test_rigidity_flags_and_fits(self, rigidity_spec):
        states = sample_states(rigidity_spec, [(0.0, 0.0), (0.3, -0.2)], 24, seed=0)
        rep = cl.classify_at_points(rigidity_spec, states)
        assert rep.flags["berwald"].holds
        assert rep.flags["douglas"].holds
        assert rep.flags["killing_beta"].holds
        assert rep.flags["parallel_beta"].holds
        assert rep.flags["weakly_berwald"].holds
        assert rep.flags["weakly_landsberg"].holds
        assert not rep.flags["riemannian"].holds
        assert max(abs(c) for c in rep.fits["isotropic_S"].c) <= 1e-9
        assert rep.fits["isotropic_E"].residual <= 1e-9
        assert rep.lemma_branch.kind == "CS2"

    def test_berwald_instance_e_fit_zero(self, rigidity_spec):
        states = sample_states(rigidity_spec, [(0.1, 0.4)], 24, seed=1)
        rep = cl.classify_at_points(rigidity_spec, states)
        assert rep.flags["berwald"].residual <= 1e-9
        assert rep.flags["douglas"].residual <= 1e-9
        assert max(abs(c) for c in rep.fits["isotropic_E"].c) <= 1e-9


class TestClassifyRiemannian:
    def test_riemannian_flag(self, riemann_curved):
        states = sample_states(riemann_curved, [(0.1, 0.1)], 24, seed=0)
        rep = cl.classify_at_points(riemann_curved, states)
        assert rep.flags["riemannian"].holds


class TestKilling:
    def test_non_killing_detected(self):
        # beta = x1 dx2 on a flat chart: r_00 = y1 y2, so at y = (1, 1)
        # the killing residual is at least 1/2 after alpha-normalization
        spec = spec_from_strings(2, [["1", "0"], ["0", "1"]], ["0", "x1"], randers())
        x = (0.9, 0.0)
        states = alpha_sphere_states(spec, x, 24, seed=0)
        states.append(point_state(spec, x, (1.0, 1.0)))
        rep = cl.classify_at_points(spec, states)
        assert not rep.flags["killing_beta"].holds
        assert rep.flags["killing_beta"].residual >= 0.5


class TestLemmaBranch:
    def test_parallel_beta_cs2(self, rigidity_spec):
        states = sample_states(
            rigidity_spec, [(0.0, 0.0), (0.2, 0.2), (-0.3, 0.1), (0.1, -0.4), (0.4, 0.4)],
            24, seed=0,
        )
        branch = cl.lemma_cs_branch(rigidity_spec, states)
        assert branch.kind == "CS2"
        assert branch.residual <= 1e-12

    def test_non_killing_is_neither_branch(self):
        spec = spec_from_strings(2, [["1", "0"], ["0", "1"]], ["0", "x1"], randers())
        states = sample_states(spec, [(0.5, 0.0), (0.3, 0.2)], 24, seed=0)
        branch = cl.lemma_cs_branch(spec, states)
        assert branch.kind == "none"

    def test_synthetic_cs1_recovers_epsilon(self):
        # synthetic covariant data built to satisfy the conformal-Killing
        # pattern exactly with epsilon = 0.1
        rng = np.random.default_rng(4)
        entries = []
        for _ in range(5):
            m = rng.normal(size=(2, 2))
            a = m @ m.T + 2.0 * np.eye(2)
            b = rng.uniform(0.1, 0.4, 2)
            b2 = float(b @ np.linalg.inv(a) @ b)
            r = 0.1 * (b2 * a - np.outer(b, b))
            entries.append((a, b, r, np.zeros(2)))
        branch = cl.fit_cs_branch(entries, tol=1e-7)
        assert branch.kind == "CS1"
        assert branch.epsilon is not None
        for e in branch.epsilon:
            assert e == pytest.approx(0.1, abs=1e-6)


class TestFlagFit:
    def test_parallel_beta_minkowski(self, rigidity_spec):
        states = sample_states(rigidity_spec, [(0.0, 0.0), (0.25, 0.1)], 24, seed=0)
        fit = cl.flag_curvature_fit(rigidity_spec, states)
        assert fit.c_magnitude <= 1e-8
        assert max(abs(s) for s in fit.sigma) <= 1e-8
        assert fit.residual <= 1e-8

    def test_euclidean_zero(self, euclid2):
        states = sample_states(euclid2, [(0.0, 0.0)], 24, seed=0)
        fit = cl.flag_curvature_fit(euclid2, states)
        assert fit.c_magnitude <= 1e-12
        assert max(abs(s) for s in fit.sigma) <= 1e-12

    def test_sphere_sigma_one(self, sphere2):
        states = sample_states(sphere2, [(0.4, 0.1), (-0.2, 0.6)], 24, seed=0)
        fit = cl.flag_curvature_fit(sphere2, states)
        assert fit.c_magnitude <= 1e-5
        for s in fit.sigma:
            assert s == pytest.approx(1.0, abs=1e-5)


class TestPreconditions:
    def test_too_few_directions_rejected(self, rigidity_spec):
        states = sample_states(rigidity_spec, [(0.0, 0.0)], 10, seed=0)
        with pytest.raises(ArgumentError):
            cl.classify_at_points(rigidity_spec, states)

    def test_flag_fit_needs_enough_flags(self, euclid2):
        states = sample_states(euclid2, [(0.0, 0.0)], 2, seed=0)
        with pytest.raises(ArgumentError):
            cl.flag_curvature_fit(euclid2, states)


class TestInvariances:
    def test_isotropic_s_fit_invariant_under_direction_rescaling(self, randers_nonconst):
        base = [(0.1, 0.0)]
        states = sample_states(randers_nonconst, base, 24, seed=0)
        scaled = [
            point_state(randers_nonconst, p.x, tuple(3.0 * np.asarray(p.y)))
            for p in states
        ]
        rep1 = cl.classify_at_points(randers_nonconst, states)
        rep2 = cl.classify_at_points(randers_nonconst, scaled)
        f1 = rep1.fits["isotropic_S"]
        f2 = rep2.fits["isotropic_S"]
        assert f1.c == pytest.approx(f2.c, rel=1e-9, abs=1e-12)
        assert f1.residual == pytest.approx(f2.residual, rel=1e-9, abs=1e-12)

    def test_consistency_chain_isotropic_s_implies_isotropic_e(self, rigidity_spec, riemann_curved):
        tol = 1e-7
        for spec in (rigidity_spec, riemann_curved):
            states = sample_states(spec, [(0.0, 0.0), (0.2, -0.1)], 24, seed=0)
            rep = cl.classify_at_points(spec, states, tol=tol)
            fit = rep.fits["isotropic_S"]
            assert fit.residual <= tol
            c_by_base = dict(zip(rep.base_points, fit.c))
            res_e = cl.isotropic_e_residual(spec, states, c_by_base)
            assert res_e <= 10 * tol
