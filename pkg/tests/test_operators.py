import math

import numpy as np
import pytest

import fraclab as fl
from fraclab.manifolds import Circle
from fraclab.operators import slice_coeffs


@pytest.fixture
def circle():
    return Circle(16)


def field(man, values):
    return fl.analyze(fl.GridField(man, values, 1))


class TestFracLaplacian:
    def test_unit_eigenvalue_any_s(self, circle):
        x = circle.nodes(1)
        u = field(circle, np.cos(x))
        for s in (0.2, 0.5, 0.8):
            out = fl.synthesize(fl.frac_laplacian(u, s))
            assert np.max(np.abs(out.values + np.cos(x))) < 1e-13

    def test_constant_annihilated(self, circle):
        c = fl.constant_field(circle, 4.2)
        out = fl.frac_laplacian(c, 0.6)
        assert np.max(np.abs(out.coeffs)) == 0.0

    def test_mode_two_scaling(self, circle):
        x = circle.nodes(1)
        u = field(circle, np.cos(2 * x))
        for s in (0.3, 0.7):
            out = fl.synthesize(fl.frac_laplacian(u, s))
            assert np.max(np.abs(out.values + 4.0**s * np.cos(2 * x))) < 1e-12

    def test_composition_half_power(self, circle):
        rng = np.random.default_rng(0)
        u = fl.random_band_limited(circle, rng, band=6)
        s = 0.62
        twice = fl.frac_laplacian(fl.frac_laplacian(u, s / 2), s / 2)
        once = fl.frac_laplacian(u, s)
        # Lambda^{s/2} Lambda^{s/2} = -Lambda^s (two sign flips of (-Delta)^s nest)
        assert np.max(np.abs(twice.coeffs + once.coeffs)) < 1e-12

    def test_self_adjoint(self, circle):
        rng = np.random.default_rng(1)
        u = fl.random_band_limited(circle, rng, band=8)
        v = fl.random_band_limited(circle, rng, band=8)
        s = 0.41
        a = fl.spectral_inner(fl.frac_laplacian(u, s), v)
        b = fl.spectral_inner(u, fl.frac_laplacian(v, s))
        assert abs(a - b) <= 1e-11 * max(1.0, abs(a))

    def test_zero_mean(self, circle):
        rng = np.random.default_rng(2)
        u = fl.random_band_limited(circle, rng, band=8)
        out = fl.synthesize(fl.frac_laplacian(u, 0.37))
        assert abs(fl.integrate(out)) < 1e-12

    def test_sigma_domain(self, circle):
        x = circle.nodes(1)
        u = field(circle, np.cos(x))
        with pytest.raises(ValueError):
            fl.frac_laplacian(u, 0.0)
        with pytest.raises(ValueError):
            fl.frac_laplacian(u, 1.5)


class TestExtensionSlice:
    def test_half_closed_form(self, circle):
        x = circle.nodes(1)
        u = field(circle, np.cos(x))
        p = fl.make_frac_params(0.5)
        sl = fl.extension_slice(u, p, 1.0)
        assert np.max(np.abs(sl.u_slice.values - math.exp(-1) * np.cos(x))) < 1e-14
        assert np.max(np.abs(sl.dz.values + math.exp(-1) * np.cos(x))) < 1e-11

    def test_constant_fixed(self, circle):
        p = fl.make_frac_params(0.3)
        c = fl.constant_field(circle, 2.5)
        sl = fl.extension_slice(c, p, 0.8)
        assert np.max(np.abs(sl.u_slice.values - 2.5)) < 1e-14
        assert np.max(np.abs(sl.dz.values)) == 0.0

    def test_maximum_principle_and_mean(self, circle):
        rng = np.random.default_rng(3)
        u = fl.random_band_limited(circle, rng, band=8)
        p = fl.make_frac_params(0.65)
        u_max = np.max(np.abs(fl.synthesize(u).values))
        u_mean = fl.integrate(fl.synthesize(u))
        for z in (0.05, 0.5, 2.0, 10.0):
            sl = fl.extension_slice(u, p, z)
            assert np.max(np.abs(sl.u_slice.values)) <= u_max + 1e-10
            assert fl.integrate(sl.u_slice) == pytest.approx(u_mean, abs=1e-11)

    def test_dtn_limit_field(self, circle):
        rng = np.random.default_rng(4)
        u = fl.random_band_limited(circle, rng, band=4)
        for s in (0.3, 0.5, 0.7):
            p = fl.make_frac_params(s)
            d = fl.dtn_field(u, p)
            lam = fl.frac_laplacian(u, s)
            err = np.max(np.abs(d.coeffs - lam.coeffs))
            assert err <= 1e-6 * max(1.0, np.max(np.abs(lam.coeffs)))

    def test_invalid_height(self, circle):
        x = circle.nodes(1)
        u = field(circle, np.cos(x))
        p = fl.make_frac_params(0.5)
        with pytest.raises(ValueError):
            fl.extension_slice(u, p, 0.0)
        with pytest.raises(ValueError):
            fl.extension_slice(u, p, -1.0)


class TestPoissonApply:
    def test_constant_preserved(self, circle):
        p = fl.make_frac_params(0.45)
        ones = fl.GridField(circle, np.ones(circle.grid_shape(1)), 1)
        for z in (0.1, 1.0, 8.0):
            out = fl.poisson_apply(ones, p, z)
            assert np.max(np.abs(out.values - 1.0)) < 1e-13

    def test_single_mode_multiplier(self, circle):
        x = circle.nodes(1)
        p = fl.make_frac_params(0.6)
        g = fl.GridField(circle, np.cos(x), 1)
        z = 0.7
        out = fl.poisson_apply(g, p, z)
        th = fl.poisson_multiplier(p, z)
        assert np.max(np.abs(out.values - th * np.cos(x))) < 1e-13

    def test_agrees_with_slice(self, circle):
        rng = np.random.default_rng(5)
        u = fl.random_band_limited(circle, rng, band=6)
        p = fl.make_frac_params(0.35)
        z = 0.9
        a = fl.poisson_apply(fl.synthesize(u), p, z)
        b = fl.extension_slice(u, p, z).u_slice
        assert np.max(np.abs(a.values - b.values)) < 1e-13


class TestHeatOracle:
    def test_half_closed_form(self, circle):
        x = circle.nodes(1)
        u = field(circle, np.cos(x))
        p = fl.make_frac_params(0.5)
        out = fl.extension_oracle_heat(u, p, 1.0)
        assert np.max(np.abs(out.values - math.exp(-1) * np.cos(x))) < 1e-8

    def test_constant(self, circle):
        p = fl.make_frac_params(0.7)
        c = fl.constant_field(circle, 1.7)
        out = fl.extension_oracle_heat(c, p, 0.6)
        assert np.max(np.abs(out.values - 1.7)) < 1e-9

    def test_matches_multiplier_route(self, circle):
        x = circle.nodes(1)
        u = field(circle, np.cos(2 * x))
        p = fl.make_frac_params(0.3)
        z = 0.7
        heat = fl.extension_oracle_heat(u, p, z)
        mult = fl.extension_slice(u, p, z).u_slice
        assert np.max(np.abs(heat.values - mult.values)) <= 1e-8


class TestSingularIntegralOracle:
    def test_shape_constant_ratio(self, circle):
        x = circle.nodes(1)
        u = field(circle, np.cos(x) + 0.3 * np.cos(3 * x))
        s = 0.6
        out = fl.singular_integral_oracle_circle(u, s)
        spectral = fl.synthesize(fl.frac_laplacian(u, s))
        ratio = out.values / (-spectral.values)
        spread = (ratio.max() - ratio.min()) / abs(ratio.mean())
        assert spread < 1e-5

    def test_constant_maps_to_zero(self, circle):
        c = fl.constant_field(circle, 3.0)
        out = fl.singular_integral_oracle_circle(c, 0.4)
        assert np.max(np.abs(out.values)) < 1e-12

    def test_calibrate_then_predict(self, circle):
        x = circle.nodes(1)
        s = 0.45
        cal = fl.singular_integral_oracle_circle(field(circle, np.cos(x)), s)
        const = float(np.max(cal.values))  # (-Delta)^s cos x = cos x
        pred, est = fl.singular_integral_oracle_circle(field(circle, np.cos(2 * x)), s,
                                                       return_estimate=True)
        err = np.max(np.abs(pred.values / const - 4.0**s * np.cos(2 * x))) / 4.0**s
        assert err < 1e-5
        assert est < 1e-8

    def test_circle_only(self):
        sph = fl.Sphere(8)
        c = fl.constant_field(sph, 1.0)
        with pytest.raises(ValueError):
            fl.singular_integral_oracle_circle(c, 0.5)


class TestSobolevPairings:
    def test_parseval_cos(self, circle):
        x = circle.nodes(1)
        u = field(circle, np.cos(x))
        for s in (0.25, 0.5, 0.9):
            assert fl.hs_inner(u, u, s) == pytest.approx(np.pi, rel=1e-13)

    def test_constant_zero(self, circle):
        c = fl.constant_field(circle, 5.0)
        p = fl.make_frac_params(0.5)
        rules = fl.rules_for(circle, p)
        assert fl.hs_inner(c, c, 0.5) == 0.0
        assert abs(fl.weighted_seminorm_sq(c, p, rules)) < 1e-14

    @pytest.mark.parametrize("s", [0.3, 0.5, 0.7])
    def test_trace_seminorm_identity(self, circle, s):
        # beta_s int int |grad~ U|^2 z^{1-2s} = <(-Delta)^{s/2} u, (-Delta)^{s/2} u>
        x = circle.nodes(1)
        u = field(circle, np.cos(x))
        p = fl.make_frac_params(s)
        rules = fl.rules_for(circle, p)
        sem = fl.weighted_seminorm_sq(u, p, rules)
        assert abs(p.beta * sem - fl.hs_inner(u, u, s)) < 1e-6


class TestDecayProperties:
    def test_dirichlet_convergence_rate(self, circle):
        # || P_z(uv) - U_z V_z ||_L2 = O(z^{2s}); fitted slope within 15%
        x = circle.nodes(1)
        u = field(circle, np.cos(x))
        v = field(circle, np.cos(x) + 0.5 * np.cos(2 * x))
        for s in (0.3, 0.5, 0.75):
            p = fl.make_frac_params(s)
            zs = np.geomspace(3e-3, 3e-2, 8)
            norms = []
            for z in zs:
                uv = fl.pointwise_product(u, v)
                pz = fl.poisson_apply(uv, p, z)
                uz = fl.extension_slice(u, p, z).u_slice
                vz = fl.extension_slice(v, p, z).u_slice
                diff = fl.GridField(circle, pz.values - uz.values * vz.values, 1)
                norms.append(fl.l2_norm(diff))
            slope = np.polyfit(np.log(zs), np.log(norms), 1)[0]
            assert abs(slope - 2 * s) < 0.15 * 2 * s

    def test_decay_report(self, circle):
        rng = np.random.default_rng(6)
        u = fl.random_band_limited(circle, rng, band=5)
        p = fl.make_frac_params(0.4)
        rules = fl.rules_for(circle, p)
        rep = fl.verify_decay(u, p, rules=rules)
        assert rep.passed
        assert rep.metadata["sup_grad_ratio"] <= 1.0 + 1e-12
        assert rep.metadata["l1_dz_grad"] > 0.0
        assert np.isfinite(rep.metadata["l1_dz_grad"])
