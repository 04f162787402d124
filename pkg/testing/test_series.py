from math import factorial
import numpy as np
import pytest
from gtllab.bilinear import EpsilonSeries, SeriesFn, hirota_Dt, sinh_form_residual, toda_bilinear_residual
from gtllab.errors import DomainError, GtlLabError


def gaussian(K=11, scale=0.5):
    c = np.zeros(K + 1); c[2] = scale
    return SeriesFn(c).exp()


@pytest.fixture
def rng():
    return np.random.default_rng(1)


def random_series(rng, K=10):
    return SeriesFn(np.concatenate(([1.0 + rng.random()], 0.3*rng.normal(size=K))))


class TestSeriesFn:
    def test_exp(self):
        e = SeriesFn.variable(8).exp()
        np.testing.assert_allclose(e.coeffs, [1/factorial(k) for k in range(9)])

    def test_log_inverts_exp(self, rng):
        s = SeriesFn(0.3*rng.normal(size=9))
        np.testing.assert_allclose(s.exp().log().coeffs, s.coeffs, atol=1e-13)

    def test_reciprocal(self, rng):
        s = random_series(rng)
        np.testing.assert_allclose((s*s.reciprocal()).coeffs, np.eye(1, 11)[0], atol=1e-13)
        np.testing.assert_allclose((1.0/s).coeffs, s.reciprocal().coeffs)

    def test_products_truncate_to_the_shorter_series(self):
        a = SeriesFn([1.0, 1.0, 1.0]); b = SeriesFn([1.0, 1.0])
        np.testing.assert_array_equal((a*b).coeffs, [1.0, 2.0])

    def test_scalar_arithmetic(self):
        s = SeriesFn([1.0, 2.0, 3.0])
        np.testing.assert_array_equal((2.0 - s).coeffs, [1.0, -2.0, -3.0])
        np.testing.assert_array_equal((s + 1).coeffs, [2.0, 2.0, 3.0])
        np.testing.assert_array_equal((s/2).coeffs, [0.5, 1.0, 1.5])

    def test_derivative_and_integral(self):
        s = SeriesFn([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(s.dt().coeffs, [2.0, 6.0, 12.0])
        np.testing.assert_array_equal(s.dt(2).coeffs, [6.0, 24.0])
        np.testing.assert_allclose(s.dt().integrate(1.0).coeffs, s.coeffs)

    def test_evaluation(self):
        s = SeriesFn([1.0, 2.0, 3.0], t0=1.0)
        assert s(2.0) == pytest.approx(6.0)
        assert SeriesFn.variable(3, t0=2.0)(5.0) == pytest.approx(5.0)

    def test_rescale(self):
        s = SeriesFn([1.0, 1.0, 1.0]).rescale(0.5)
        np.testing.assert_array_equal(s.coeffs, [1.0, 0.5, 0.25])

    def test_power(self):
        s = SeriesFn([1.0, 1.0, 0.0, 0.0])
        np.testing.assert_array_equal((s**3).coeffs, [1.0, 3.0, 3.0, 1.0])
        with pytest.raises(GtlLabError):
            s**-1

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            SeriesFn([0.0, 1.0]).reciprocal()
        with pytest.raises(DomainError):
            SeriesFn([-1.0, 1.0]).log()
        with pytest.raises(DomainError):
            SeriesFn([1.0, 1.0]).dt(2)

    def test_base_points_must_agree(self):
        with pytest.raises(GtlLabError):
            SeriesFn([1.0, 1.0]) + SeriesFn([1.0, 1.0], t0=1.0)

    def test_empty(self):
        with pytest.raises(GtlLabError):
            SeriesFn([])


class TestEpsilonSeries:
    def test_product_is_graded(self, rng):
        a = EpsilonSeries((random_series(rng), random_series(rng)))
        b = EpsilonSeries((random_series(rng), random_series(rng)))
        eps = 1e-2
        gap = (a*b).at(eps) - a.at(eps)*b.at(eps)
        # only the dropped eps^2 a1 b1 term remains
        np.testing.assert_allclose(gap.coeffs, -(a.terms[1]*b.terms[1]*eps**2).coeffs, atol=1e-13)

    def test_exp_log(self, rng):
        x = EpsilonSeries(tuple(SeriesFn(0.2*rng.normal(size=7)) for _ in range(3)))
        back = x.exp().log()
        for got, want in zip(back.terms, x.terms):
            np.testing.assert_allclose(got.coeffs, want.coeffs, atol=1e-13)

    def test_reciprocal(self, rng):
        x = EpsilonSeries((random_series(rng), random_series(rng), random_series(rng)))
        one = x*x.reciprocal()
        np.testing.assert_allclose(one.terms[0].coeffs, np.eye(1, 11)[0], atol=1e-13)
        for term in one.terms[1:]:
            np.testing.assert_allclose(term.coeffs, 0.0, atol=1e-13)

    def test_lift(self):
        x = EpsilonSeries.lift(2.0, 2, SeriesFn([1.0, 0.0, 0.0]))
        assert x.K_eps == 2
        np.testing.assert_array_equal(x.at(0.5).coeffs, [2.0, 0.0, 0.0])

    def test_needs_terms(self):
        with pytest.raises(GtlLabError):
            EpsilonSeries(())


class TestHirota:
    def test_odd_order_self_product_vanishes(self, rng):
        f = random_series(rng)
        assert hirota_Dt(1, f, f).max_abs() < 1e-14
        assert hirota_Dt(3, f, f).max_abs() < 1e-13

    def test_second_order(self, rng):
        f = random_series(rng)
        expected = (f*f.dt(2) - f.dt()*f.dt())*2.0
        np.testing.assert_allclose(hirota_Dt(2, f, f).coeffs, expected.coeffs[:9], atol=1e-13)

    def test_gauge_invariance(self, rng):
        f, g = random_series(rng), random_series(rng)
        gauge = SeriesFn(np.concatenate(([0.3, -0.7], np.zeros(9)))).exp()
        lhs = hirota_Dt(2, f*gauge, g*gauge)
        rhs = hirota_Dt(2, f, g)*gauge*gauge
        np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)

    def test_order_checks(self):
        f = SeriesFn([1.0, 1.0])
        with pytest.raises(DomainError):
            hirota_Dt(2, f, f)
        with pytest.raises(GtlLabError):
            hirota_Dt(-1, f, f)

    def test_printed_form_on_the_gaussian(self):
        tau = gaussian()
        assert toda_bilinear_residual((tau, tau, tau), "printed").max_abs() < 1e-12

    def test_vacuum_solves_standard_form(self):
        one = SeriesFn.constant(1.0, 6)
        assert toda_bilinear_residual((one, one, one)).max_abs() == 0.0
        assert toda_bilinear_residual((one, one, one), "printed").max_abs() == 1.0

    def test_printed_variant_alias(self, rng):
        taus = [random_series(rng) for _ in range(3)]
        np.testing.assert_array_equal(toda_bilinear_residual(taus, "paper").coeffs,
                                      toda_bilinear_residual(taus, "printed").coeffs)
        one = SeriesFn.constant(1.0, 6)
        assert toda_bilinear_residual((one, one, one), "paper").max_abs() == 1.0

    def test_unknown_variant(self):
        one = SeriesFn.constant(1.0, 4)
        with pytest.raises(GtlLabError):
            toda_bilinear_residual((one, one, one), "sinh")

    def test_sinh_form_on_the_gaussian(self):
        tau = gaussian()
        expected = gaussian(scale=1.0)*2.0
        np.testing.assert_allclose(sinh_form_residual([tau, tau, tau], 1).coeffs, expected.coeffs[:10], atol=1e-12)

    def test_sinh_form_is_twice_the_standard_form(self, rng):
        f = {n: random_series(rng) for n in (4, 5, 6)}
        gap = sinh_form_residual(f, 5) - toda_bilinear_residual((f[4], f[5], f[6]))*2.0
        assert gap.max_abs() < 1e-12

    def test_sinh_form_needs_neighbours(self, rng):
        f = [random_series(rng) for _ in range(3)]
        with pytest.raises(GtlLabError):
            sinh_form_residual(f, 2)
        with pytest.raises(GtlLabError):
            sinh_form_residual(f, 0)
