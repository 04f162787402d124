from math import factorial
import numpy as np
import pytest
from gtllab.bilinear import (GridFn2, hirota_grid, nls_bilinear_residual, nlse_residual, phi_from_tau,
                             plane_wave, schur_h)
from gtllab.errors import DomainError, GtlLabError

T1 = np.linspace(-1.0, 1.0, 81)
T2 = np.linspace(0.0, 0.5, 21)


def tau_family(k: float, omega: float):
    """
    tau_0 = exp(t1^2/2) and tau_{+-1} = phi^{+-1} tau_0 for the plane wave phi.
    """
    phase = lambda T1, T2: np.exp(1j*(k*T1 - omega*T2))
    tau0 = GridFn2.sample(lambda T1, T2: np.exp(T1**2/2) + 0j*T2, T1, T2)
    taup = GridFn2.sample(lambda T1, T2: phase(T1, T2)*np.exp(T1**2/2), T1, T2)
    taum = GridFn2.sample(lambda T1, T2: np.exp(T1**2/2)/phase(T1, T2), T1, T2)
    return taum, tau0, taup


class TestGrid:
    def test_needs_2d(self):
        with pytest.raises(GtlLabError):
            GridFn2(np.ones(5), 0.1, 0.1)

    def test_positive_spacing(self):
        with pytest.raises(GtlLabError):
            GridFn2(np.ones((5, 5)), 0.0, 0.1)

    def test_sample_origin(self):
        g = GridFn2.sample(lambda T1, T2: T1 + T2, [1.0, 1.5, 2.0], [0.0, 0.25])
        assert (g.h1, g.h2, g.t1_0, g.t2_0) == (0.5, 0.25, 1.0, 0.0)
        assert g.values[2, 1] == 2.25

    def test_small_grid(self):
        g = GridFn2(np.ones((4, 4)), 0.1, 0.1)
        with pytest.raises(DomainError):
            hirota_grid(g, g, 1, 0)

    def test_orders(self):
        g = GridFn2(np.ones((5, 5)), 0.1, 0.1)
        with pytest.raises(GtlLabError):
            hirota_grid(g, g, 3, 0)


class TestHirotaGrid:
    def test_odd_self_product_vanishes(self):
        f = GridFn2.sample(lambda T1, T2: np.exp(np.sin(T1) + T1*T2), T1, T2)
        assert hirota_grid(f, f, 1, 0).max_abs() == 0.0

    def test_second_order_log_derivative(self):
        # D1^2 f.f = 2 f^2 (ln f)'' and (ln f)'' = 1 for exp(t1^2/2)
        f = GridFn2.sample(lambda T1, T2: np.exp(T1**2/2) + 0j*T2, T1, T2)
        got = hirota_grid(f, f, 2, 0)
        np.testing.assert_allclose(got.values, 2.0*f.interior()**2, rtol=1e-5)
        assert got.t1_0 == pytest.approx(T1[2])


class TestNlse:
    @pytest.mark.parametrize("k", [0.0, 0.5, 1.0])
    def test_plane_wave_dispersion(self, k):
        phi, phibar = plane_wave(k, k**2 - 2.0, T1, T2)
        assert nlse_residual(phi, phibar).max_abs() < 1e-5

    def test_wrong_frequency(self):
        phi, phibar = plane_wave(0.0, 0.0, T1, T2)
        assert nlse_residual(phi, phibar).max_abs() == pytest.approx(2.0, abs=1e-6)

    def test_stencil_order(self):
        coarse = np.linspace(0.0, 1.6, 17); fine = np.linspace(0.0, 1.6, 33)
        err = [nlse_residual(*plane_wave(2.0, 2.0, t, t)).max_abs() for t in (coarse, fine)]
        assert 14.0 < err[0]/err[1] < 18.0


class TestBilinearPair:
    def test_tau_family_solves_the_pair(self):
        k = 0.5
        r1, r2 = nls_bilinear_residual(*tau_family(k, k**2 - 2.0), time="nlse")
        assert r1.max_abs() < 1e-4
        assert r2.max_abs() < 1e-4

    def test_real_time_reading_does_not(self):
        k = 0.5
        r1, _ = nls_bilinear_residual(*tau_family(k, k**2 - 2.0), time="real")
        assert r1.max_abs() > 1.0

    def test_unknown_time(self):
        g = GridFn2(np.ones((5, 5)), 0.1, 0.1)
        with pytest.raises(GtlLabError):
            nls_bilinear_residual(g, g, g, time="imaginary")

    def test_phi_from_tau(self):
        k = 0.5
        taus = tau_family(k, k**2 - 2.0)
        phi, phibar = phi_from_tau(*taus)
        wave, wavebar = plane_wave(k, k**2 - 2.0, T1, T2)
        np.testing.assert_allclose(phi.values, wave.values, rtol=1e-12)
        np.testing.assert_allclose(phibar.values, wavebar.values, rtol=1e-12)
        assert nlse_residual(phi, phibar).max_abs() < 1e-5

    def test_vanishing_tau(self):
        g = GridFn2(np.ones((5, 5)), 0.1, 0.1)
        with pytest.raises(DomainError):
            phi_from_tau(g, GridFn2(np.zeros((5, 5)), 0.1, 0.1), g)


class TestSchur:
    def test_single_variable(self):
        x = 0.7
        for n in range(6):
            assert schur_h(n, [x, 0.0, 0.0, 0.0, 0.0]) == pytest.approx(x**n/factorial(n))

    def test_second(self):
        assert schur_h(2, [0.3, 1.1]) == pytest.approx(1.1 + 0.3**2/2)

    def test_inputs(self):
        with pytest.raises(GtlLabError):
            schur_h(-1, [])
        with pytest.raises(GtlLabError):
            schur_h(3, [1.0, 2.0])
