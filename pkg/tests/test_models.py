import math

import numpy as np
import pytest

from pseudosusy import models as mdl


def fd5(f, x, h=1e-3):
    # five-point first derivative, the independent route for W'
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


class TestConstruction:
    def test_parameter_validation(self):
        with pytest.raises(mdl.ModelError):
            mdl.scarf2(p=-2.0, q=1.0)
        with pytest.raises(mdl.ModelError):
            mdl.pt_oscillator(a_osc=-0.1)
        with pytest.raises(mdl.ModelError):
            mdl.pt_oscillator(kappa=2)
        with pytest.raises(mdl.ModelError):
            mdl.pt_oscillator(c=0.0)
        with pytest.raises(mdl.ModelError):
            mdl.scalar_tanh(lam=0.0)

    def test_custom_sampled(self):
        x = np.linspace(-3, 3, 11)
        w = np.tanh(x) + 0j
        m = mdl.custom_sampled(x, w)
        assert mdl.superpotential_value(m, x[3]) == w[3]
        with pytest.raises(mdl.ModelError):
            mdl.superpotential_value(m, 0.123456)
        with pytest.raises(mdl.DerivativeUnavailable):
            mdl.superpotential_derivative(m, x[2])
        mdl.superpotential_derivative(m, x[2], fd_fallback=True)


class TestSuperpotential:
    def test_scarf_values(self, scarf):
        # sign convention: sector 1 owns the ground state, so the tanh slope
        # is negative and the imaginary part at the origin is +i(p - q)
        assert mdl.superpotential_value(scarf, 0.0) == pytest.approx(0.5j, abs=1e-15)
        assert mdl.superpotential_value(scarf, 20.0) == pytest.approx(-2.0, abs=1e-8)
        assert mdl.superpotential_value(scarf, -20.0) == pytest.approx(2.0, abs=1e-8)

    def test_oscillator_contour(self, osc):
        w = mdl.superpotential_value(osc, 0.0)
        z = -0.5j
        w0 = -0.4 + 0.5
        assert w == pytest.approx(-z + w0 / z, rel=1e-14)

    def test_scalar_mass_shifted_coupling(self, stanh):
        # coupling + m at the origin is i a
        assert mdl.mass_shifted_coupling(stanh, 0.0) == pytest.approx(0.5j, abs=1e-15)

    def test_derivative_matches_fd(self, scarf, osc, stanh, rng):
        for model in (scarf, osc, stanh):
            for _ in range(25):
                x = rng.uniform(-5, 5)
                got = mdl.superpotential_derivative(model, x)
                want = fd5(lambda t: mdl.superpotential_value(model, t), x)
                assert got == pytest.approx(want, rel=1e-8, abs=1e-9)


class TestPartnerPotential:
    def test_scarf_origin(self, scarf):
        # closed forms at the origin: (p+q)^2 - [2(p^2+q^2) +/- (p+q)]
        assert mdl.partner_potential(scarf, 1, 0.0) == pytest.approx(-2.25 + 0j, abs=1e-14)
        assert mdl.partner_potential(scarf, 2, 0.0) == pytest.approx(1.75 + 0j, abs=1e-14)

    def test_oscillator_closed_form(self, osc):
        a, k, c = 0.4, 1, 0.5
        for x in (-1.3, 0.0, 2.7):
            z = x - 1j * c
            u1 = z ** 2 + (a ** 2 - 0.25) / z ** 2 + 2 * k * a - 2
            u2 = z ** 2 + (a ** 2 - 2 * k * a + 0.75) / z ** 2 + 2 * k * a
            assert mdl.partner_potential(osc, 1, x) == pytest.approx(u1, rel=1e-13)
            assert mdl.partner_potential(osc, 2, x) == pytest.approx(u2, rel=1e-13)

    def test_partner_difference_is_twice_derivative(self, scarf, osc, stanh, rng):
        for model in (scarf, osc, stanh):
            for _ in range(10):
                x = rng.uniform(-4, 4)
                d = (mdl.partner_potential(model, 1, x)
                     - mdl.partner_potential(model, 2, x))
                want = 2 * mdl.superpotential_derivative(model, x)
                assert d == pytest.approx(want, rel=1e-12, abs=1e-13)

    def test_closed_form_consistent_with_w(self, scarf, osc, stanh, rng):
        # U_i agrees with W^2 +/- W'_fd to 1e-6 at random interior points
        for model in (scarf, osc, stanh):
            for _ in range(100):
                x = rng.uniform(-6, 6)
                w = mdl.superpotential_value(model, x)
                wp = fd5(lambda t: mdl.superpotential_value(model, t), x)
                for i, sgn in ((1, 1.0), (2, -1.0)):
                    got = mdl.partner_potential(model, i, x)
                    assert abs(got - (w * w + sgn * wp)) <= 1e-6

    def test_bad_sector_index(self, scarf):
        with pytest.raises(mdl.ModelError):
            mdl.partner_potential(scarf, 3, 0.0)


class TestPTResiduals:
    def test_pt_families_are_odd(self, scarf, osc):
        assert mdl.pt_residual_potential(scarf) <= 1e-13
        assert mdl.pt_residual_potential(osc) <= 1e-13

    def test_pt_partners_are_even(self, scarf, osc):
        for model in (scarf, osc):
            assert mdl.pt_residual_partner(model, 1) <= 1e-12
            assert mdl.pt_residual_partner(model, 2) <= 1e-12

    def test_scalar_model_is_not_pt(self, stanh):
        # the mass shift leaves a 2m offset in the coupling test
        assert mdl.pt_residual_potential(stanh) > 0.1
        assert mdl.pt_residual_partner(stanh, 1) > 0.1
        assert mdl.pt_residual_partner(stanh, 2) > 0.1


class TestLevels:
    def test_scarf_levels(self, scarf):
        assert mdl.analytic_levels(scarf, 1) == [0.0, 3.0]
        assert mdl.analytic_levels(scarf, 2) == [3.0]

    def test_oscillator_levels(self, osc):
        assert mdl.analytic_levels(osc, 1, max_count=4) == [0.0, 4.0, 8.0, 12.0]
        assert mdl.analytic_levels(osc, 2, max_count=3) == [4.0, 8.0, 12.0]

    def test_not_available(self, stanh):
        with pytest.raises(mdl.NotAvailable):
            mdl.analytic_levels(stanh, 1)

    def test_levels_real_nonnegative_and_ground_exclusion(self, scarf, osc):
        for model in (scarf, osc):
            l1 = mdl.analytic_levels(model, 1, max_count=6)
            l2 = mdl.analytic_levels(model, 2, max_count=6)
            assert all(e >= 0 for e in l1)
            # sector 2 is sector 1 with the ground level removed (up to the
            # common truncation length)
            k = min(len(l1) - 1, len(l2))
            assert l2[:k] == l1[1:k + 1]

    def test_dirac_series_scarf(self, scarf):
        pos, neg = mdl.dirac_levels(scarf)
        assert pos == pytest.approx([1.0, 2.0])
        assert neg == pytest.approx([-2.0])

    def test_dirac_series_oscillator(self, osc):
        pos, neg = mdl.dirac_levels(osc, max_count=3)
        assert pos == pytest.approx([1.0, math.sqrt(5.0), 3.0])
        assert neg == pytest.approx([-math.sqrt(5.0), -3.0, -math.sqrt(13.0)])

    def test_massless_series_starts_at_zero(self):
        m = mdl.scarf2(mass=0.0)
        pos, neg = mdl.dirac_levels(m)
        assert pos[0] == 0.0
        assert -0.0 not in [2 * v for v in neg]  # negative side excludes the zero

    def test_energy_map_symmetry(self, scarf):
        # every excited level appears with both signs across the series; the
        # ground level contributes +m only
        pos, neg = mdl.dirac_levels(scarf)
        l1 = mdl.analytic_levels(scarf, 1)
        for eps in l1[1:]:
            e = math.sqrt(scarf.mass ** 2 + eps)
            assert any(abs(v - e) < 1e-12 for v in pos)
            assert any(abs(v + e) < 1e-12 for v in neg)
        assert any(abs(v - scarf.mass) < 1e-12 for v in pos)
        assert not any(abs(v + scarf.mass) < 1e-12 for v in neg)


class TestEigenfunctions:
    def test_scarf_ground_shape(self, scarf):
        # ground state is proportional to the two principal powers alone
        xs = np.array([-1.0, 0.3, 1.7])
        phi = mdl.analytic_eigenfunction(scarf, 0, xs)
        z = (1 - 1j * np.sinh(xs)) / 2
        ref = z ** (-1.25) * np.conj(z) ** (-0.75)
        ratio = phi / ref
        assert np.allclose(ratio, ratio[0], rtol=1e-12)

    def test_oscillator_ground_shape(self, osc):
        xs = np.array([-0.5, 0.9])
        phi = mdl.analytic_eigenfunction(osc, 0, xs)
        z = xs - 0.5j
        ref = np.exp(-z ** 2 / 2) * z ** (-0.4 + 0.5)
        ratio = phi / ref
        assert np.allclose(ratio, ratio[0], rtol=1e-12)

    def test_ground_solves_zero_mode_equation(self, scarf, osc):
        # d(phi)/dx = W phi for the annihilated state, via fd
        for model in (scarf, osc):
            f = lambda t: mdl.analytic_eigenfunction(model, 0, np.array([t]))[0]
            for x in (-0.7, 0.4):
                lhs = fd5(f, x, h=1e-4)
                rhs = mdl.superpotential_value(model, x) * f(x)
                assert lhs == pytest.approx(rhs, rel=1e-7)

    def test_range_error(self, scarf):
        with pytest.raises(mdl.RangeError):
            mdl.analytic_eigenfunction(scarf, 2, 0.0)  # n < p + q = 2 required
        with pytest.raises(mdl.NotAvailable):
            mdl.analytic_eigenfunction(mdl.scalar_tanh(), 0, 0.0)


def test_bound_threshold(scarf, osc, stanh):
    assert mdl.bound_threshold(scarf) == 4.0
    assert mdl.bound_threshold(stanh) == pytest.approx(15.75)
    assert mdl.bound_threshold(osc) is None


def test_view(scarf):
    v = mdl.view(scarf)
    assert v.sector == mdl.PSEUDOSCALAR
    assert v.w(0.0) == pytest.approx(0.5j)
    assert v.energy_map(3.0) == pytest.approx((2.0, -2.0))
